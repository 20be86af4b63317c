"""Command-line entry point: ``topotypes <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .aut import DEFAULT_AUT_CAP
from .classifier import DEFAULT_FIBER_CAP, ClassifyConfig, classify_Gm, prepare_group
from .groups import FiniteGroup, GroupError, standard_group
from .oracle import DEFAULT_ORACLE_CAP, OracleTooLarge, brute_force_orbits
from .signatures import SignatureStore, genus
from .storage import (BUNDLED_CATALOG, FormatError, ResumeError, ingest_catalog, load_conder_table,
                      read_results, summarize, write_catalog)

log = logging.getLogger("topotypes")


class CliError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _catalog_path(arg: str | None) -> str:
    if arg is None or arg == "bundled":
        return str(BUNDLED_CATALOG)
    if arg.lower() == "none":
        raise CliError("a group catalog is required (--catalog none given)")
    if not Path(arg).is_file():
        raise CliError(f"catalog not found: {arg}")
    return arg


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--catalog", help="catalog file (default: the bundled genus <= 5 catalog)")
    p.add_argument("--no-frobenius", dest="frobenius", action="store_false", help="disable the Frobenius filter")
    p.add_argument("--no-scott", dest="scott", action="store_false", help="disable Scott's test")
    p.add_argument("--no-dihedral-fast-path", dest="dihedral", action="store_false")
    p.add_argument("--no-abelian-fast-path", dest="abelian", action="store_false")
    p.add_argument("--fiber-cap", type=_positive, default=DEFAULT_FIBER_CAP)
    p.add_argument("--aut-cap", type=_positive, default=DEFAULT_AUT_CAP)
    p.add_argument("--seed", type=int, default=0)


def _classify_config(args) -> ClassifyConfig:
    return ClassifyConfig(args.frobenius, args.scott, args.dihedral, args.abelian,
                          args.fiber_cap, args.aut_cap, args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topotypes",
                                     description="Topological types of finite group actions on curves with rational quotient.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signatures", help="enumerate admissible signatures")
    p.add_argument("--gmax", type=int, required=True)
    p.add_argument("--genus", type=int, help="only print signatures of this genus")
    p.add_argument("--conder", help="table of maximal orders per genus (JSON lines g, max_order)")
    p.add_argument("--out", help="write the signature store here instead of printing")

    p = sub.add_parser("classify", help="classify all topological types of the given genera")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--genus", type=int)
    grp.add_argument("--gmax", type=int, help="classify genera 2..gmax")
    p.add_argument("--out", required=True, help="results database (JSON lines)")
    _add_pipeline_flags(p)
    p.add_argument("--oracle-cap", type=_positive, default=DEFAULT_ORACLE_CAP)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--resume", action="store_true", help="continue from OUT.ckpt")
    p.add_argument("--conder", help="table of maximal orders per genus")
    p.add_argument("--signatures", help="precomputed signature store")

    p = sub.add_parser("oracle", help="compare the pipeline with brute force on one group and signature")
    p.add_argument("--group", required=True,
                   help="catalog id or name (24.3, sym4, 24.sym4) or family:params (dihedral:5)")
    p.add_argument("--signature", type=_int_list, required=True)
    _add_pipeline_flags(p)
    p.add_argument("--oracle-cap", type=_positive, default=DEFAULT_ORACLE_CAP)

    p = sub.add_parser("summarize", help="per-genus type counts of a results database")
    p.add_argument("results")

    p = sub.add_parser("catalog", help="build a catalog by searching quotients of orbifold groups")
    p.add_argument("--gmax", type=int, required=True)
    p.add_argument("--out", required=True)
    return parser


def _resolve_group(group_spec: str, catalog_arg: str | None) -> tuple[str, FiniteGroup]:
    if ":" in group_spec:
        family, _, params = group_spec.partition(":")
        try:
            return group_spec, standard_group(family, *_int_list(params))
        except (GroupError, TypeError, ValueError) as exc:
            raise CliError(f"cannot build group {group_spec!r}: {exc}") from None
    catalog = ingest_catalog(_catalog_path(catalog_arg))
    try:
        entry = catalog.get(group_spec)
    except KeyError:
        raise CliError(f"group {group_spec!r} not in catalog {catalog.path}") from None
    return entry.id, entry.group


def cmd_signatures(args) -> int:
    conder = load_conder_table(args.conder) if args.conder else None
    store = SignatureStore(args.gmax, conder=conder)
    if args.out:
        store.save(args.out)
        print(f"{len(store.signatures)} signatures written to {args.out}")
        return 0
    genera = [args.genus] if args.genus else range(2, args.gmax + 1)
    for g in genera:
        for s in store.by_genus(g):
            print(f"{g} {s.d} {','.join(map(str, s.m))}")
    return 0


def cmd_classify(args) -> int:
    from .runner import RunConfig, run

    genera = (args.genus,) if args.genus else tuple(range(2, args.gmax + 1))
    config = RunConfig(genera, _catalog_path(args.catalog), args.out, args.frobenius, args.scott,
                       args.dihedral, args.abelian, args.fiber_cap, args.aut_cap, args.oracle_cap,
                       args.workers, args.resume, args.conder, args.signatures, args.seed)
    for line in run(config, progress=log.info):
        print(line)
    return 0


def cmd_oracle(args) -> int:
    gid, G = _resolve_group(args.group, args.catalog)
    m = tuple(sorted(args.signature))
    ctx = prepare_group(gid, G, _classify_config(args))
    res = classify_Gm(ctx, m, _classify_config(args), genus(G.order, m))
    if res.status != "ok":
        raise CliError(f"pipeline skipped {gid} {m}: {res.reason}")
    try:
        orc = brute_force_orbits(G, m, ctx.aut, cap=args.oracle_cap)
    except OracleTooLarge as exc:
        raise CliError(str(exc)) from None
    hit = sorted(orc.orbit_of(t.representative) for t in res.types)
    same = hit == list(range(orc.count))
    print(f"group {gid} order {G.order} signature {','.join(map(str, m))} genus {genus(G.order, m)}")
    print(f"pipeline {len(res.types)} oracle {orc.count} {'match' if same else 'MISMATCH'}")
    return 0 if same else 1


def cmd_summarize(args) -> int:
    if not Path(args.results).is_file():
        raise CliError(f"results file not found: {args.results}")
    for line in summarize(read_results(args.results)):
        print(line)
    return 0


def cmd_catalog(args) -> int:
    from .quotients import build_catalog

    catalog = build_catalog(args.gmax, progress=lambda d, m, n: log.info("order %d %s: %d quotients", d, m, n))
    write_catalog(catalog, args.out)
    print(f"{len(catalog)} groups written to {args.out}")
    return 0


COMMANDS = {"signatures": cmd_signatures, "classify": cmd_classify, "oracle": cmd_oracle,
            "summarize": cmd_summarize, "catalog": cmd_catalog}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, FormatError, ResumeError, LookupError, ValueError, OSError) as exc:
        print(f"topotypes: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
