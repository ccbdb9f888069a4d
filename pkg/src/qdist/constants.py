"""Physical constants record.

Natural units (hbar = c = k_B = G = 1) are the default.  ``QDIST_CONSTANTS``
may point at a JSON file with any subset of the keys ``hbar``, ``c``,
``k_B``, ``G``; ``Constants.si()`` gives CODATA values.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace

import scipy.constants as sc

ENV_VAR = "QDIST_CONSTANTS"


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    c: float = 1.0
    k_B: float = 1.0
    G: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (v > 0 and v < float("inf")):
                raise ValueError(f"constant {f.name} must be positive and finite, got {v!r}")

    @classmethod
    def natural(cls) -> "Constants":
        return cls()

    @classmethod
    def si(cls) -> "Constants":
        return cls(hbar=sc.hbar, c=sc.c, k_B=sc.k, G=sc.G)

    @classmethod
    def from_mapping(cls, data: dict, base: "Constants | None" = None) -> "Constants":
        base = base or cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        return replace(base, **{k: float(v) for k, v in data.items()})

    @classmethod
    def from_env(cls) -> "Constants":
        path = os.environ.get(ENV_VAR)
        if not path:
            return cls()
        with open(path) as fh:
            return cls.from_mapping(json.load(fh))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


NATURAL = Constants()
