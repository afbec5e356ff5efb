"""Frozen obstruction catalog: the labelled 4-element table and small forbidden classes."""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import PreRotationSystem

CATALOG_VERSION = 1
_FIELDS = ("pi4o", "pi5a", "pi5b", "conv5a", "conv5b", "hconv6", "gt_allowed5")


class CatalogError(RuntimeError):
    """Catalog data missing or inconsistent."""


@dataclass(frozen=True)
class FourEntry:
    """One labelled pre-rotation system on 4 elements, keyed by its Y signature.

    Labels are local (1..4).  For crossing entries ``pair`` holds the crossing
    edges and ``cross_rotation`` the counterclockwise order of their endpoints
    around the crossing.  ``side_abc_contains_d`` says whether 4 lies in the side
    of triangle 1, 2, 3 from which 1, 2, 3 read counterclockwise.
    """
    signature: tuple
    drawable: bool
    pair: tuple | None = None
    cross_rotation: tuple | None = None
    side_abc_contains_d: bool | None = None

    @property
    def left_to_right(self) -> bool | None:
        if self.pair is None:
            return None
        (e0, _), (f0, f1) = self.pair
        cyc = list(self.cross_rotation)
        k = cyc.index(e0)
        cyc = cyc[k:] + cyc[:k]
        return cyc[1] == f1

    def to_dict(self) -> dict:
        return {
            "signature": [int(b) for b in self.signature],
            "drawable": self.drawable,
            "pair": [list(e) for e in self.pair] if self.pair else None,
            "cross_rotation": list(self.cross_rotation) if self.cross_rotation else None,
            "side_abc_contains_d": self.side_abc_contains_d,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FourEntry":
        return cls(
            tuple(bool(b) for b in d["signature"]),
            d["drawable"],
            tuple(tuple(e) for e in d["pair"]) if d["pair"] else None,
            tuple(d["cross_rotation"]) if d["cross_rotation"] else None,
            d["side_abc_contains_d"],
        )


@dataclass
class ObstructionCatalog:
    four: dict
    pi4o: PreRotationSystem | None = None
    pi5a: PreRotationSystem | None = None
    pi5b: PreRotationSystem | None = None
    conv5a: PreRotationSystem | None = None
    conv5b: PreRotationSystem | None = None
    hconv6: PreRotationSystem | None = None
    gt_allowed5: PreRotationSystem | None = None
    drawable5: tuple = ()

    @property
    def side_table(self) -> dict:
        return {sig: e.side_abc_contains_d for sig, e in self.four.items() if e.drawable}

    def to_dict(self) -> dict:
        out = {"version": CATALOG_VERSION,
               "four": [self.four[k].to_dict() for k in sorted(self.four)]}
        for name in _FIELDS:
            val = getattr(self, name)
            out[name] = [list(r) for r in val.rotations] if val is not None else None
        out["drawable5"] = [[list(r) for r in p.rotations] for p in self.drawable5]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ObstructionCatalog":
        if d.get("version") != CATALOG_VERSION:
            raise CatalogError(f"unsupported catalog version {d.get('version')}")
        four = {}
        for item in d["four"]:
            e = FourEntry.from_dict(item)
            four[e.signature] = e
        kw = {name: PreRotationSystem.from_rotations(d[name]) if d.get(name) else None
              for name in _FIELDS}
        kw["drawable5"] = tuple(PreRotationSystem.from_rotations(r) for r in d.get("drawable5", []))
        return cls(four, **kw)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")


_override: list[ObstructionCatalog] = []
_loaded: ObstructionCatalog | None = None


def default_path() -> Path:
    return Path(str(resources.files("rotsys") / "data" / "catalog.json"))


def load_catalog(path=None) -> ObstructionCatalog:
    global _loaded
    if path is not None:
        return ObstructionCatalog.from_dict(json.loads(Path(path).read_text()))
    if _override:
        return _override[-1]
    if _loaded is None:
        p = default_path()
        if not p.exists():
            raise CatalogError(f"catalog data file {p} missing; run `rotsys derive-catalog`")
        _loaded = ObstructionCatalog.from_dict(json.loads(p.read_text()))
    return _loaded


@contextlib.contextmanager
def using_catalog(cat: ObstructionCatalog):
    """Temporarily route every catalog lookup to ``cat``."""
    _override.append(cat)
    try:
        yield cat
    finally:
        _override.pop()


def reset_cache():
    global _loaded
    _loaded = None
