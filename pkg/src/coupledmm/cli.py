"""Command line interface.

Verbs:

    coupledmm build  CONFIG [--order N] [--cache-dir DIR]
    coupledmm eval   CONFIG [--out PATH] [--order N] [--seed S]
    coupledmm verify [--quick | --full] [--report PATH]
    coupledmm info   CONFIG

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import __version__, correlators
from .biortho import hilbert_grids
from .cache import cache_key, load_or_build
from .config import RunConfig, load_config
from .errors import CacheError, ConfigError, NumericalError
from .model import model_fingerprint
from .schur import Partition

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

CSV_FIELDS = [
    "correlator", "N", "M", "point_index", "z_re", "z_im", "w_re", "w_im",
    "value_re", "value_im", "log_scale", "tail", "cond",
]


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    return f"{float(x):.17g}"


def _build_system(cfg: RunConfig):
    fp = model_fingerprint(cfg.model)
    bm, system, hit = load_or_build(cfg.cache_dir, cfg.model, fp, cfg.degree, cfg.order)
    return bm, system, hit, fp


def _run_correlator(cfg: RunConfig, system):
    """Dispatch the task section; returns (result, points list of (z, w))."""
    name = cfg.correlator
    if name is None:
        raise ConfigError("config has no task.correlator")
    n, m = cfg.n, cfg.m
    model = cfg.model
    grids = None
    if name in ("charpoly_inverse_small", "charpoly_inverse_large",
                "pair_inverse_small", "pair_inverse_large", "mixed_pair_average"):
        grids = hilbert_grids(system, model, cfg.hilbert_order)

    if name == "partition_function":
        return correlators.partition_function(system, n), [(None, None)]
    if name == "schur_average":
        res = correlators.schur_average(system, Partition(cfg.lam), Partition(cfg.mu), n)
        return res, [(None, None)]

    z = cfg.z_points
    w = cfg.w_points
    if name == "charpoly_average":
        return correlators.charpoly_average(system, cfg.side, z, n), [(za, None) for za in z]
    if name == "charpoly_inverse_small":
        res = correlators.charpoly_inverse_average_small(system, model, cfg.side, z, n,
                                                         grids=grids)
        return res, [(za, None) for za in z]
    if name == "charpoly_inverse_large":
        res = correlators.charpoly_inverse_average_large(system, model, cfg.side, z, n,
                                                         grids=grids)
        return res, [(za, None) for za in z]
    if name == "pair_charpoly_average":
        return correlators.pair_charpoly_average(system, model, z, w, n), list(zip(z, w))
    if name == "pair_inverse_small":
        res = correlators.pair_inverse_average_small(system, model, z, w, n,
                                                     kmax=cfg.kmax, grids=grids)
        return res, list(zip(z, w))
    if name == "pair_inverse_large":
        res = correlators.pair_inverse_average_large(system, model, z, w, n, grids=grids)
        return res, list(zip(z, w))
    if name == "mixed_pair_average":
        res = correlators.mixed_pair_average(system, model, z, w, n,
                                             orientation=cfg.orientation, grids=grids)
        return res, list(zip(z, w))
    raise ConfigError(f"unknown correlator {name!r}")


def _rows(cfg: RunConfig, res, points):
    rows = []
    for k, (zp, wp) in enumerate(points):
        rows.append({
            "correlator": cfg.correlator,
            "N": str(cfg.n),
            "M": str(len(points)) if points[0][0] is not None else "0",
            "point_index": str(k),
            "z_re": _fmt(None if zp is None else zp.real),
            "z_im": _fmt(None if zp is None else zp.imag),
            "w_re": _fmt(None if wp is None else wp.real),
            "w_im": _fmt(None if wp is None else wp.imag),
            "value_re": _fmt(res.value.real if np.iscomplexobj(res.value) or isinstance(res.value, complex) else res.value),
            "value_im": _fmt(res.value.imag if isinstance(res.value, complex) else 0.0),
            "log_scale": _fmt(res.log_scale),
            "tail": _fmt(res.diagnostics.get("tail")) if "tail" in res.diagnostics else "",
            "cond": _fmt(res.diagnostics.get("cond")) if "cond" in res.diagnostics else "",
        })
    return rows


def _provenance(cfg: RunConfig, fp: str) -> dict:
    return {
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "cache_key": cache_key(fp, cfg.degree, cfg.order),
    }


def _emit(cfg: RunConfig, rows, prov, out_path):
    if cfg.out_format == "json":
        text = json.dumps({"provenance": prov, "rows": rows}, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        for k in sorted(prov):
            buf.write(f"# {k}: {prov[k]}\n")
        buf.write(",".join(CSV_FIELDS) + "\n")
        for row in rows:
            buf.write(",".join(row[f] for f in CSV_FIELDS) + "\n")
        text = buf.getvalue()
    if out_path:
        try:
            with open(out_path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = load_config(args.config)
    if args.order:
        cfg.order = args.order
    if args.cache_dir:
        cfg.cache_dir = args.cache_dir
    bm, system, hit, fp = _build_system(cfg)
    print(f"model fingerprint: {fp[:16]}")
    print(f"cache: {'hit' if hit else 'recomputed'} "
          f"({cache_key(fp, cfg.degree, cfg.order)})")
    for i, h in enumerate(system.norms):
        print(f"h_{i} = {h:.15e}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    if args.order:
        cfg.order = args.order
    if args.seed is not None:
        cfg.seed = args.seed
    out_path = args.out or cfg.out_path
    bm, system, hit, fp = _build_system(cfg)
    res, points = _run_correlator(cfg, system)
    rows = _rows(cfg, res, points)
    return _emit(cfg, rows, _provenance(cfg, fp), out_path)


def cmd_verify(args) -> int:
    from . import verification

    quick = args.level == "quick"
    results = verification.run_criteria(quick=quick)
    ok = True
    for res in results:
        status = "pass" if res.passed else "FAIL"
        print(f"criterion {res.cid:2d} [{status}] {res.label} ({res.elapsed:.1f}s)")
        ok = ok and res.passed
    if args.report:
        try:
            verification.write_report(results, args.report)
        except OSError as exc:
            print(f"error: cannot write report {args.report}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"report written to {args.report}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_info(args) -> int:
    cfg = load_config(args.config)
    model = cfg.model
    fp = model_fingerprint(model)
    print(f"coupledmm {__version__}")
    print(f"fingerprint : {fp}")
    print(f"v_left      : {list(model.v_left.coeffs)}")
    print(f"v_right     : {list(model.v_right.coeffs)}")
    print(f"kernel      : {model.kernel.kind}")
    print(f"domains     : L={model.domain_left} R={model.domain_right}")
    print(f"degree      : {cfg.degree}, order {cfg.order}, "
          f"hilbert order {cfg.hilbert_order}")
    if cfg.correlator:
        print(f"task        : {cfg.correlator} (N={cfg.n}, M={cfg.m})")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coupledmm",
                                 description="coupled two-matrix model correlators")
    ap.add_argument("--version", action="version", version=f"coupledmm {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("build", help="compute bimoments and the biorthogonal system")
    p.add_argument("config")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--cache-dir", default=None)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("eval", help="evaluate the correlator in the config task")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("verify", help="run the formula-vs-oracle verification suite")
    p.add_argument("level", nargs="?", choices=("quick", "full"), default="full")
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("info", help="describe the model and task in a config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_info)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CacheError as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
