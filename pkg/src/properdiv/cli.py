"""Command-line interface: ``properdiv {div,audit,grid-eval,catalogue}``.

stdout carries only the JSON or CSV payload; warnings and errors go to
stderr. Exit codes: 0 success, 2 input or parse error, 3 math or domain
error, 4 datasets with no common cell.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .divergences import CATEGORICAL, DESCRIPTIONS, DIVERGENCE_IDS, MOMENT_BASED, PROPRIETY, DivergenceSpec, Propriety, divergence
from .errors import NoCommonCells, ProperDivError, SingularCovariance, Unsupported
from .gridded_eval import load_grid_dataset, rank_models, write_outputs
from .measures import EmpiricalMeasure, bin_counts, moment_summary, read_samples
from .propriety_lab import (
    CounterexampleFamily,
    McConfig,
    Scenario,
    build_counterexample,
    propriety_check,
)

EXIT_OK, EXIT_INPUT, EXIT_MATH, EXIT_DATA = 0, 2, 3, 4

FAMILY_DEFAULT_K = {"av-uniform": "1..25", "ks-uniform": "1..5", "hellinger": "1,2,5,6,10"}


class UsageError(ProperDivError, ValueError):
    pass


def _warn(msg):
    print(f"properdiv: warning: {msg}", file=sys.stderr)


def parse_k_values(text) -> tuple:
    """``"1..25"``, ``"1,2,5"`` or a mix such as ``"1..3,10"``."""
    if isinstance(text, int):
        return (text,)
    if isinstance(text, (list, tuple)):
        return tuple(int(k) for k in text)
    out = []
    for part in str(text).split(","):
        part = part.strip()
        try:
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise UsageError(f"bad k list {text!r}") from exc
    if not out or any(k < 1 for k in out):
        raise UsageError(f"k values must be positive integers, got {text!r}")
    return tuple(out)


def _parse_edges(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError as exc:
        raise UsageError(f"bad bin edges {text!r}") from exc


def _spec(obj) -> DivergenceSpec:
    return obj if isinstance(obj, DivergenceSpec) else DivergenceSpec.from_json(obj)


def _dump(obj):
    print(json.dumps(obj, indent=2))


# --- commands --------------------------------------------------------------------


def cmd_div(args) -> int:
    spec = _spec(args.spec)
    f_vals, g_vals = read_samples(args.F), read_samples(args.G)
    edges = _parse_edges(args.edges)
    if spec.id in CATEGORICAL:
        if edges is None:
            raise UsageError(f"{spec.id} needs --edges")
        fc, gc = bin_counts(f_vals, edges), bin_counts(g_vals, edges)
        G = gc if spec.id == "KL_SCOREFORM" else gc / gc.sum()
        val = divergence(spec, fc / fc.sum(), G, args.units)
    elif spec.id in MOMENT_BASED:
        val = divergence(spec, moment_summary(f_vals), moment_summary(g_vals), args.units)
    else:
        val = divergence(spec, EmpiricalMeasure(f_vals), EmpiricalMeasure(g_vals), args.units)
    if spec.propriety is Propriety.IMPROPER_VARIANT:
        _warn(f"{spec.id} is not proper; do not use it to rank forecasts")
    out = val.to_json()
    _dump({"value": out["value"], "units": out["units"], "propriety": out["propriety"], "divergence": out["divergence"]})
    return EXIT_OK


def _audit_scenario(args) -> Scenario:
    if args.scenario:
        try:
            text = Path(args.scenario).read_text(encoding="utf-8")
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"scenario file is not valid JSON: {exc}") from exc
        sc = Scenario.from_json(obj)
        if args.k is not None:
            sc = Scenario(sc.divergence, sc.truth, sc.candidate, parse_k_values(args.k))
        return sc
    if not args.family:
        raise UsageError("audit needs --family or --scenario")
    fam = args.family.lower()
    if fam not in FAMILY_DEFAULT_K:
        raise UsageError(f"unknown family {args.family!r}; choose from {sorted(FAMILY_DEFAULT_K)}")
    ks = parse_k_values(args.k if args.k is not None else FAMILY_DEFAULT_K[fam])
    if fam == "hellinger":
        f1 = 0.10 if args.f1 is None else float(args.f1)
        g1 = 0.25 if args.g1 is None else float(args.g1)
        return build_counterexample(CounterexampleFamily("HELLINGER_BINARY", f1=f1, g1=g1), ks)
    return build_counterexample(CounterexampleFamily(fam.upper(), k=ks[0]), ks)


def cmd_audit(args) -> int:
    if args.seed is None:
        raise UsageError("audit requires an explicit --seed")
    cfg = McConfig(int(args.seed), int(args.reps), float(args.confidence))
    verdict = propriety_check(_audit_scenario(args), cfg)
    _dump(verdict.to_json())
    return EXIT_OK


def cmd_grid_eval(args) -> int:
    if not args.models:
        raise UsageError("grid-eval needs at least one model file")
    if not args.ref1 or not args.ref2 or not args.out_dir:
        raise UsageError("grid-eval needs --ref1, --ref2 and --out-dir")
    spec = _spec(args.spec)
    models = [load_grid_dataset(p) for p in args.models]
    refs = [load_grid_dataset(args.ref1), load_grid_dataset(args.ref2)]
    for ds in (*models, *refs):
        for cid, why in ds.flags.items():
            _warn(f"{ds.dataset_id}: cell {cid}: {why}")
    table = rank_models(models, refs, spec, edges=_parse_edges(args.edges), coslat=args.coslat)
    if table.propriety_warning:
        _warn(f"ranking with {spec.id}, which is not proper")
    files = write_outputs(table, args.out_dir)
    _dump({
        "divergence": spec.to_json(),
        "propriety": spec.propriety.value,
        "propriety_warning": table.propriety_warning,
        "files": [p.name for p in files],
        "ranking": [r._asdict() | {"avg_ref1": _j(r.avg_ref1), "avg_ref2": _j(r.avg_ref2)} for r in table.rows],
        "baseline": _j(table.baseline),
    })
    return EXIT_OK


def _j(x):
    return x if math.isfinite(x) else "inf"


def catalogue_rows():
    return [
        {
            "id": i,
            "propriety": PROPRIETY[i].value,
            "units": DivergenceSpec(i, **_example_params(i)).units(),
            "description": DESCRIPTIONS[i],
        }
        for i in DIVERGENCE_IDS
    ]


def _example_params(i):
    if i == "WIQ":
        return {"weight": {"breakpoints": [0.0, 1.0], "levels": [1.0]}}
    if i == "MAHALANOBIS":
        return {"sigma": [[1.0]]}
    return {}


def cmd_catalogue(args) -> int:
    rows = catalogue_rows()
    if args.json:
        _dump(rows)
        return EXIT_OK
    w_id = max(len(r["id"]) for r in rows)
    w_pr = max(len(r["propriety"]) for r in rows)
    w_un = max(len(r["units"]) for r in rows)
    print(f"{'id':<{w_id}}  {'propriety':<{w_pr}}  {'units':<{w_un}}  description")
    for r in rows:
        print(f"{r['id']:<{w_id}}  {r['propriety']:<{w_pr}}  {r['units']:<{w_un}}  {r['description']}")
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="properdiv", description="Proper divergences, propriety audits and gridded model ranking.")
    p.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("div", help="divergence between two sample files")
    d.add_argument("F", help="forecast samples (one value per line, or CSV with a 'value' column)")
    d.add_argument("G", help="observed samples")
    d.add_argument("--spec", default='{"id": "IQ"}', help='divergence spec JSON, e.g. \'{"id": "WASSERSTEIN", "p": 2}\'')
    d.add_argument("--edges", help="comma-separated bin edges for categorical divergences; write --edges=-inf,... when the first edge is negative")
    d.add_argument("--units", default="data", help="physical unit of the samples")
    d.set_defaults(func=cmd_div)

    a = sub.add_parser("audit", help="Monte Carlo k-propriety check")
    src = a.add_mutually_exclusive_group()
    src.add_argument("--family", help="av-uniform, ks-uniform or hellinger")
    src.add_argument("--scenario", help="scenario JSON file")
    a.add_argument("--k", help='k values such as "1..25" or "1,2,5"')
    a.add_argument("--f1", type=float)
    a.add_argument("--g1", type=float)
    a.add_argument("--seed", type=int, help="required; no implicit entropy")
    a.add_argument("--reps", type=int, default=100_000)
    a.add_argument("--confidence", type=float, default=0.99)
    a.set_defaults(func=cmd_audit)

    g = sub.add_parser("grid-eval", help="rank gridded models against two references")
    g.add_argument("models", nargs="*", help="model grid CSV files")
    g.add_argument("--ref1")
    g.add_argument("--ref2")
    g.add_argument("--spec", default='{"id": "IQ"}')
    g.add_argument("--out-dir")
    g.add_argument("--edges")
    g.add_argument("--coslat", action="store_true", help="weight cells by cos(latitude)")
    g.set_defaults(func=cmd_grid_eval)

    c = sub.add_parser("catalogue", help="list divergences with their propriety status")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_catalogue)
    return p


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config = _load_config(argv)
    except UsageError as exc:
        print(f"properdiv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if config:
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in config.items() if k in known})
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if isinstance(getattr(args, "spec", None), dict):
        args.spec = json.dumps(args.spec)
    try:
        return args.func(args)
    except NoCommonCells as exc:
        print(f"properdiv: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SingularCovariance, Unsupported, ArithmeticError) as exc:
        print(f"properdiv: error: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ProperDivError, ValueError, OSError) as exc:
        print(f"properdiv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
