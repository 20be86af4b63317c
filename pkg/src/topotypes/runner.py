"""Resumable genus-by-genus classification run writing a results database."""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .aut import DEFAULT_AUT_CAP
from .classifier import (DEFAULT_FIBER_CAP, CatalogGroup, ClassifyConfig, ContextCache, genus_tasks,
                         run_task, task_key)
from .oracle import DEFAULT_ORACLE_CAP
from .signatures import Signature, SignatureStore
from .storage import (Checkpoint, file_digest, genus_record, ingest_catalog, load_conder_table,
                      read_results, summarize, task_record, truncate_results, type_record,
                      warning_record, GenusSummary, RESULTS_FORMAT, _dumps)

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    genera: tuple[int, ...]
    catalog: str
    output: str
    frobenius: bool = True
    scott: bool = True
    dihedral_fast_path: bool = True
    abelian_fast_path: bool = True
    fiber_cap: int = DEFAULT_FIBER_CAP
    aut_cap: int = DEFAULT_AUT_CAP
    oracle_cap: int = DEFAULT_ORACLE_CAP
    workers: int = 1
    resume: bool = False
    conder: str | None = None
    signatures: str | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("fiber_cap", "aut_cap", "oracle_cap", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.genera or min(self.genera) < 2:
            raise ValueError("genus must be at least 2")

    def classify_config(self) -> ClassifyConfig:
        return ClassifyConfig(self.frobenius, self.scott, self.dihedral_fast_path, self.abelian_fast_path,
                              self.fiber_cap, self.aut_cap, self.seed)

    def config_hash(self) -> str:
        """Hash of everything that can change the results (not paths, workers or resume)."""
        fields = asdict(self)
        for k in ("catalog", "output", "workers", "resume", "conder", "signatures"):
            fields.pop(k)
        fields["catalog_sha256"] = file_digest(self.catalog)
        fields["conder_sha256"] = file_digest(self.conder) if self.conder else None
        fields["signatures_sha256"] = file_digest(self.signatures) if self.signatures else None
        blob = json.dumps(fields, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def checkpoint_path(output: str | Path) -> Path:
    return Path(str(output) + ".ckpt")


_WORKER_CACHE: ContextCache | None = None


def _init_worker(config: ClassifyConfig) -> None:
    global _WORKER_CACHE
    _WORKER_CACHE = ContextCache(config)


def task_records(cache: ContextCache, sig: Signature, entry: CatalogGroup) -> list[dict]:
    """Result records for one (signature, group) task; empty when the group is excluded."""
    res = run_task(cache, sig, entry)
    if res is None:
        return []
    records = []
    if res.types:
        ctx = cache.get(entry)
        records = [type_record(t, ctx.group, ctx.classes) for t in res.types]
    records.append(task_record(res))
    return records


def _worker(task: tuple[Signature, CatalogGroup]) -> list[dict]:
    assert _WORKER_CACHE is not None
    return task_records(_WORKER_CACHE, *task)


def _run_tasks(tasks: list[tuple[Signature, CatalogGroup]], config: RunConfig) -> Iterator[list[dict]]:
    if config.workers == 1 or len(tasks) < 2:
        cache = ContextCache(config.classify_config())
        for sig, entry in tasks:
            yield task_records(cache, sig, entry)
        return
    with ProcessPoolExecutor(config.workers, initializer=_init_worker,
                             initargs=(config.classify_config(),)) as pool:
        yield from pool.map(_worker, tasks, chunksize=1)


class _Sink:
    """Single writer: appends records and checkpoints after each unit of work."""

    def __init__(self, path: Path, checkpoint: Checkpoint):
        self.path = path
        self.checkpoint = checkpoint

    def commit(self, key: str, records: Sequence[dict]) -> None:
        with open(self.path, "a") as fh:
            for rec in records:
                fh.write(_dumps(rec) + "\n")
            fh.flush()
            offset = fh.tell()
        self.checkpoint.record(key, offset)


def run(config: RunConfig, progress: Callable[[str], None] | None = None) -> list[GenusSummary]:
    catalog = ingest_catalog(config.catalog)
    conder = load_conder_table(config.conder) if config.conder else None
    g_max = max(config.genera)
    if config.signatures:
        store = SignatureStore.load(config.signatures)
    else:
        store = SignatureStore(g_max, conder=conder)
    groups = [CatalogGroup(e.id, e.group, e.name) for e in catalog]

    out = Path(config.output)
    ck = Checkpoint(checkpoint_path(out), config.config_hash())
    if config.resume:
        ck.load()
        truncate_results(out, ck.offset)
    else:
        ck.start()
        out.write_text("")
    sink = _Sink(out, ck)

    if "header" not in ck.done:
        sink.commit("header", [{"kind": "header", "format": RESULTS_FORMAT, "version": 1,
                                "config_hash": ck.config_hash, "genera": list(config.genera)}])
    for g in config.genera:
        sigs = store.by_genus(g)
        missing = [d for d in sorted({s.d for s in sigs}) if not catalog.covers(d, g)]
        wkey = f"warnings:{g}"
        if wkey not in ck.done:
            sink.commit(wkey, [warning_record(g, f"catalog incomplete for order {d}") for d in missing])
        todo = [(s, e) for s, e in genus_tasks(sigs, groups) if task_key(e.id, s.m) not in ck.done]
        for (sig, entry), records in zip(todo, _run_tasks(todo, config)):
            sink.commit(task_key(entry.id, sig.m), records)
            if progress and any(r["kind"] == "type" for r in records):
                progress(f"g={g} {entry.id} {sig.m}: {sum(r['kind'] == 'type' for r in records)} types")
        gkey = f"genus:{g}"
        if gkey not in ck.done:
            recs = [r for r in read_results(out) if r.get("genus") == g]
            ntypes = sum(r["kind"] == "type" for r in recs)
            skipped = sum(r["kind"] == "task" and r["status"] != "ok" for r in recs)
            sink.commit(gkey, [genus_record(g, ntypes, not missing and not skipped, skipped, missing)])
    return summarize(read_results(out))
