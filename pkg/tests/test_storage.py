from __future__ import annotations

import json
import random

import pytest

from topotypes.storage import (Catalog, CatalogEntry, Checkpoint, FormatError, ResumeError, ingest_catalog,
                               load_conder_table, read_results, summarize, truncate_results, write_catalog,
                               write_results)


def write_lines(path, *objs):
    path.write_text("".join(json.dumps(o) + "\n" for o in objs))


def test_ingest_examples(tmp_path):
    p = tmp_path / "cat.jsonl"
    write_lines(p, {"id": "2.1", "order": 2, "degree": 2, "generators": [[1, 0]]},
                {"id": "24.x", "order": 24, "degree": 4, "generators": [[1, 0, 2, 3], [1, 2, 3, 0]]})
    cat = ingest_catalog(p)
    assert [e.group.order for e in cat] == [2, 24]
    assert cat.complete_genus is None and not cat.covers(2, 2)


def test_order_mismatch_names_entry(tmp_path):
    p = tmp_path / "cat.jsonl"
    # a 10-cycle and a reflection generate D10 of order 20
    ten = [(i + 1) % 10 for i in range(10)]
    refl = [(-i) % 10 for i in range(10)]
    write_lines(p, {"id": "10.bad", "order": 10, "degree": 10, "generators": [ten, refl]})
    with pytest.raises(FormatError, match="10.bad"):
        ingest_catalog(p)


def test_duplicate_and_parse_errors(tmp_path):
    p = tmp_path / "cat.jsonl"
    write_lines(p, {"id": "2.1", "order": 2, "degree": 2, "generators": [[1, 0]]},
                {"id": "2.1", "order": 2, "degree": 2, "generators": [[1, 0]]})
    with pytest.raises(FormatError, match=":2: duplicate"):
        ingest_catalog(p)
    p.write_text('{"id": "2.1", "order": 2, "degree": 2, "generators": [[1, 0]]}\n{oops\n')
    with pytest.raises(FormatError, match=":2:"):
        ingest_catalog(p)
    write_lines(p, {"id": "3.1", "order": 3, "degree": 3, "generators": [[1, 1, 0]]})
    with pytest.raises(FormatError, match="invalid permutation"):
        ingest_catalog(p)


def test_bundled_catalog_header(catalog):
    assert catalog.complete_genus == 5
    assert catalog.covers(168, 3) and not catalog.covers(168, 6)
    assert catalog.get("24.sym4").name == "sym4"
    assert catalog.get("sym4").id == catalog.get("24.sym4").id
    with pytest.raises(KeyError):
        catalog.get("nope")


def test_catalog_round_trip_is_idempotent(tmp_path, catalog):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_catalog(catalog, a)
    write_catalog(ingest_catalog(a), b)
    assert a.read_bytes() == b.read_bytes()


def _synthetic(rng):
    return {"kind": "type", "genus": rng.randint(2, 5), "group": f"{rng.randint(2, 99)}.{rng.randint(1, 9)}",
            "order": rng.randint(2, 99), "signature": sorted(rng.choices([2, 3, 4, 6], k=rng.randint(3, 6))),
            "classes": [{"class": 1, "order": 2, "size": rng.randint(1, 9), "multiplicity": 2}],
            "representative": [[rng.randint(0, 5) for _ in range(6)] for _ in range(3)],
            "orbit_size": rng.choice([None, rng.randint(1, 500)]), "fast_path": rng.choice(["none", "dihedral"])}


def test_results_round_trip(tmp_path):
    rng = random.Random(0)
    recs = [_synthetic(rng) for _ in range(100)]
    p = tmp_path / "r.jsonl"
    write_results(recs, p)
    assert list(read_results(p)) == recs
    q = tmp_path / "r2.jsonl"
    write_results(read_results(p), q)
    assert p.read_bytes() == q.read_bytes()


def test_results_error_position(tmp_path):
    p = tmp_path / "r.jsonl"
    p.write_text('{"kind": "type"}\n[1, 2]\n')
    with pytest.raises(FormatError, match=":2:"):
        list(read_results(p))


def test_summarize_marks_lower_bounds():
    recs = [{"kind": "type", "genus": 2}] * 3 + [{"kind": "genus", "genus": 2, "exact": True}] + \
           [{"kind": "type", "genus": 3}] * 2 + [{"kind": "genus", "genus": 3, "exact": False}] + \
           [{"kind": "type", "genus": 4}]
    assert [str(s) for s in summarize(recs)] == ["2 3", "3 > 2", "4 > 1"]


def test_conder_table(tmp_path):
    p = tmp_path / "conder.jsonl"
    write_lines(p, {"g": 2, "max_order": 48}, {"g": 3, "max_order": 168})
    assert load_conder_table(p) == {2: 48, 3: 168}
    p.write_text('{"g": 2}\n')
    with pytest.raises(FormatError, match=":1:"):
        load_conder_table(p)


def test_checkpoint_guards(tmp_path):
    ck = Checkpoint(tmp_path / "c.ckpt", "abc")
    ck.start()
    ck.record("t1", 10)
    ck.record("t2", 25)
    # torn last line is dropped
    with open(ck.path, "a") as fh:
        fh.write('{"task": "t3", "off')
    again = Checkpoint(ck.path, "abc")
    again.load()
    assert again.done == {"t1", "t2"} and again.offset == 25
    with pytest.raises(ResumeError, match="config hash"):
        Checkpoint(ck.path, "other").load()
    empty = Checkpoint(tmp_path / "none.ckpt", "abc")
    empty.load()
    assert empty.done == set() and empty.offset == 0


def test_truncate(tmp_path):
    p = tmp_path / "r.jsonl"
    p.write_text("0123456789")
    truncate_results(p, 4)
    assert p.read_text() == "0123"
    with pytest.raises(ResumeError):
        truncate_results(p, 100)


def test_entry_record_field_order():
    e = CatalogEntry("2.1", 2, 2, [[1, 0]], "cyc2")
    assert list(e.to_record()) == ["id", "order", "name", "degree", "generators"]
    assert list(Catalog([e], 5).header()) == ["format", "version", "complete_genus", "complete_orders"]
