"""Line-delimited JSON files: group catalog, results database and checkpoints.

Every file is one JSON object per line with a fixed key order, so two runs
with the same inputs produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .groups import ClassData, FiniteGroup, GroupError, build_group, standard_group
from .aut import isomorphism

CATALOG_FORMAT = "topotypes-catalog"
RESULTS_FORMAT = "topotypes-results"
CHECKPOINT_FORMAT = "topotypes-checkpoint"

BUNDLED_CATALOG = Path(__file__).with_name("data") / "catalog_g5.jsonl"


class FormatError(ValueError):
    """A malformed line; the message carries the file and line number."""


def _dumps(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _parse_lines(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, rec


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# catalog


@dataclass
class CatalogEntry:
    id: str
    order: int
    degree: int
    generators: list[list[int]]
    name: str | None = None
    _group: FiniteGroup | None = field(default=None, repr=False, compare=False)

    @property
    def group(self) -> FiniteGroup:
        if self._group is None:
            self._group = build_group(self.generators, self.degree, label=self.name or self.id,
                                      order_cap=max(self.order, 1) + 1)
        return self._group

    def to_record(self) -> dict:
        return {"id": self.id, "order": self.order, "name": self.name,
                "degree": self.degree, "generators": self.generators}


@dataclass
class Catalog:
    """Groups keyed by id, plus what the file claims about completeness.

    ``complete_genus = g`` promises every group having a spherical system of
    generators of genus at most ``g``; ``complete_orders`` lists orders for
    which every isomorphism class is present.
    """

    entries: list[CatalogEntry]
    complete_genus: int | None = None
    complete_orders: tuple[int, ...] = ()
    path: str | None = None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def covers(self, order: int, g: int) -> bool:
        return (self.complete_genus is not None and g <= self.complete_genus) or order in self.complete_orders

    def get(self, key: str) -> CatalogEntry:
        """Look up by id (``24.3``), by name (``sym4``) or by ``order.name``."""
        for e in self.entries:
            if e.id == key or (e.name is not None and (e.name == key or f"{e.order}.{e.name}" == key)):
                return e
        raise KeyError(key)

    def header(self) -> dict:
        return {"format": CATALOG_FORMAT, "version": 1, "complete_genus": self.complete_genus,
                "complete_orders": list(self.complete_orders)}


def ingest_catalog(path: str | Path, validate: bool = True) -> Catalog:
    """Read a catalog file; every entry is closed and its order checked."""
    entries: list[CatalogEntry] = []
    seen: set[str] = set()
    complete_genus, complete_orders = None, ()
    for lineno, rec in _parse_lines(path):
        if rec.get("format") == CATALOG_FORMAT:
            complete_genus = rec.get("complete_genus")
            complete_orders = tuple(rec.get("complete_orders") or ())
            continue
        try:
            entry = CatalogEntry(str(rec["id"]), int(rec["order"]), int(rec["degree"]),
                                 [list(map(int, p)) for p in rec["generators"]], rec.get("name"))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad catalog entry ({exc})") from None
        if entry.id in seen:
            raise FormatError(f"{path}:{lineno}: duplicate catalog id {entry.id!r}")
        seen.add(entry.id)
        if validate:
            try:
                G = entry.group
            except GroupError as exc:
                raise FormatError(f"{path}:{lineno}: entry {entry.id!r}: {exc}; declared order {entry.order}") from None
            if G.order != entry.order:
                raise FormatError(f"{path}:{lineno}: entry {entry.id!r} declares order {entry.order} "
                                  f"but generates a group of order {G.order}")
        entries.append(entry)
    return Catalog(entries, complete_genus, complete_orders, str(path))


def write_catalog(catalog: Catalog, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps(catalog.header()) + "\n")
        for e in catalog.entries:
            fh.write(_dumps(e.to_record()) + "\n")


def invariant_factors(G: FiniteGroup) -> list[int] | None:
    """Invariant factors (ascending, each dividing the next) of an abelian group."""
    if not G.is_abelian:
        return None
    d = G.order
    primes = [p for p in range(2, d + 1) if d % p == 0 and all(p % q for q in range(2, int(p**0.5) + 1))]
    factors: list[int] = []
    for p in primes:
        # Sum_i min(k, lambda_i) = log_p #{x : x^(p^k) = 1}
        cums, k = [0], 1
        while True:
            n = sum(1 for o in G.element_order if (p**k) % o == 0)
            e = round(math.log(n, p))
            if e == cums[-1]:
                break
            cums.append(e)
            k += 1
        conj = [cums[i] - cums[i - 1] for i in range(1, len(cums))]
        parts = [sum(1 for c in conj if c > j) for j in range(conj[0])] if conj else []
        parts.sort(reverse=True)
        for j, a in enumerate(parts):
            if j >= len(factors):
                factors.append(1)
            factors[j] *= p**a
    return sorted(factors) or [1]


def standard_name(G: FiniteGroup) -> str | None:
    """Short name when ``G`` is cyclic, abelian, dihedral, symmetric or alternating."""
    d = G.order
    inv = invariant_factors(G)
    if inv is not None:
        return f"cyc{d}" if len(inv) == 1 else "ab" + "x".join(map(str, inv))
    if d % 2 == 0 and d >= 6 and _is_dihedral(G):
        return f"dih{d // 2}"
    for n, fam in ((4, "symmetric"), (5, "symmetric"), (4, "alternating"), (5, "alternating")):
        H = standard_group(fam, n)
        if H.order == d and isomorphism(G, H) is not None:
            return f"{'sym' if fam == 'symmetric' else 'alt'}{n}"
    return None


def _is_dihedral(G: FiniteGroup) -> bool:
    """A cyclic subgroup of index 2 and an involution outside it inverting it."""
    n = G.order // 2
    a = next((x for x in range(G.order) if G.element_order[x] == n), None)
    if a is None:
        return False
    cyc = {G.power(a, k) for k in range(n)}
    return any(b not in cyc and G.element_order[b] == 2 and G.conj(a, b) == G.inverse[a]
               for b in range(G.order))


# ---------------------------------------------------------------------------
# Conder table


def load_conder_table(path: str | Path) -> dict[int, int]:
    """``{"g": .., "max_order": ..}`` per line: largest group order acting on genus g."""
    out = {}
    for lineno, rec in _parse_lines(path):
        try:
            out[int(rec["g"])] = int(rec["max_order"])
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}:{lineno}: expected g and max_order") from None
    return out


# ---------------------------------------------------------------------------
# results


def class_multiset(cd: ClassData, cvec: Sequence[int]) -> list[dict]:
    counts = Counter(cvec)
    return [{"class": k, "order": cd.classes[k].element_order, "size": cd.classes[k].size,
             "multiplicity": counts[k]} for k in sorted(counts)]


def type_record(t, G: FiniteGroup, cd: ClassData) -> dict:
    """Results-file record for a :class:`TopologicalType`."""
    if G.perms is not None:
        rep = [G.perms[x].tolist() for x in t.representative]
    else:
        rep = [list(map(int, t.representative))]
    return {"kind": "type", "genus": t.genus, "group": t.group_id, "order": t.order,
            "signature": list(t.signature), "classes": class_multiset(cd, t.classes),
            "representative": rep, "orbit_size": t.orbit_size, "fast_path": t.fast_path}


def task_record(res) -> dict:
    return {"kind": "task", "task": res.key, "genus": res.genus, "group": res.group_id,
            "signature": list(res.signature), "status": res.status, "reason": res.reason,
            "path": res.path, "types": len(res.types)}


def genus_record(g: int, types: int, exact: bool, skipped: int, missing_orders: Sequence[int]) -> dict:
    return {"kind": "genus", "genus": g, "types": types, "exact": exact, "skipped": skipped,
            "missing_orders": list(missing_orders)}


def warning_record(g: int, message: str) -> dict:
    return {"kind": "warning", "genus": g, "message": message}


def write_results(records: Iterable[Mapping[str, Any]], path: str | Path, append: bool = False) -> None:
    with open(path, "a" if append else "w") as fh:
        for rec in records:
            fh.write(_dumps(rec) + "\n")


def read_results(path: str | Path) -> Iterator[dict]:
    for _, rec in _parse_lines(path):
        yield rec


@dataclass
class GenusSummary:
    genus: int
    types: int
    exact: bool

    def __str__(self) -> str:
        return f"{self.genus} {'' if self.exact else '> '}{self.types}"


def summarize(records: Iterable[Mapping[str, Any]]) -> list[GenusSummary]:
    """Per-genus totals; genera without a closing summary record count as lower bounds."""
    counts: Counter = Counter()
    closed: dict[int, bool] = {}
    for rec in records:
        if rec.get("kind") == "type":
            counts[rec["genus"]] += 1
        elif rec.get("kind") == "genus":
            closed[rec["genus"]] = bool(rec["exact"])
    return [GenusSummary(g, counts[g], closed.get(g, False)) for g in sorted(set(counts) | set(closed))]


# ---------------------------------------------------------------------------
# checkpoints


class ResumeError(RuntimeError):
    pass


class Checkpoint:
    """Completed task keys, each with the results-file size right after it.

    Line one is ``{"format", "config_hash"}``; each further line is
    ``{"task", "offset"}``.  A torn last line is ignored.
    """

    def __init__(self, path: str | Path, config_hash: str):
        self.path = Path(path)
        self.config_hash = config_hash
        self.done: set[str] = set()
        self.offset = 0

    def start(self) -> None:
        with open(self.path, "w") as fh:
            fh.write(_dumps({"format": CHECKPOINT_FORMAT, "config_hash": self.config_hash}) + "\n")
        self.done, self.offset = set(), 0

    def load(self) -> None:
        """Read an existing checkpoint; refuses one written under another configuration."""
        if not self.path.exists() or self.path.stat().st_size == 0:
            self.start()
            return
        with open(self.path) as fh:
            lines = fh.read().split("\n")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            raise ResumeError(f"{self.path}: unreadable checkpoint header") from None
        if header.get("config_hash") != self.config_hash:
            raise ResumeError(f"{self.path}: checkpoint was written with config hash "
                              f"{header.get('config_hash')}, current run has {self.config_hash}")
        good = [lines[0]]
        for n, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            try:
                rec = json.loads(line)
                key, off = rec["task"], int(rec["offset"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                if n == len(lines) or all(not x for x in lines[n:]):
                    break  # torn final write
                raise ResumeError(f"{self.path}:{n}: corrupt checkpoint line") from None
            if off < self.offset:
                raise ResumeError(f"{self.path}:{n}: offsets go backwards")
            self.done.add(key)
            self.offset = off
            good.append(line)
        with open(self.path, "w") as fh:
            fh.write("\n".join(good) + "\n")

    def record(self, key: str, offset: int) -> None:
        with open(self.path, "a") as fh:
            fh.write(_dumps({"task": key, "offset": offset}) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self.done.add(key)
        self.offset = offset


def truncate_results(path: str | Path, offset: int) -> None:
    """Cut the results file back to the last checkpointed record."""
    path = Path(path)
    size = path.stat().st_size if path.exists() else 0
    if size < offset:
        raise ResumeError(f"{path}: results file has {size} bytes but the checkpoint expects {offset}; "
                          "refusing to resume")
    with open(path, "r+b" if path.exists() else "wb") as fh:
        fh.truncate(offset)
