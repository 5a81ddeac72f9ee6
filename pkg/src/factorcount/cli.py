"""Command-line interface: select, edge, and simulate subcommands.

Exit codes: 0 success, 2 invalid input or options, 3 numerical failure.
Reports and results are emitted as JSON (stdout or --json/--out), with
optional plot-data and CSV side files for external figure scripts.
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .dataio import (
    IngestOptions,
    build_report,
    file_sha256,
    ingest,
    read_atoms,
)
from .edge import EdgeProblem, upper_edge
from .errors import NumericalError, ValidationError
from .matrix import variance_distribution
from .select import ddpa_plus_select, ddpa_select, dpa_select, pa_select
from .simulate import run_experiment, scenario_names

__all__ = ["main", "cli_select", "cli_edge", "cli_simulate"]

_METHODS = ("pa", "dpa", "ddpa", "ddpa+")


def _add_ingest_flags(sp):
    sp.add_argument("--input", required=True, help="delimited matrix file, rows = samples")
    sp.add_argument("--delimiter", default=",", help="field delimiter (default ',')")
    sp.add_argument("--missing-token", default="NA", help="token marking missing cells")
    sp.add_argument("--header", action="store_true", help="first line is a header")
    sp.add_argument("--transpose", action="store_true", help="input file is features x samples")
    sp.add_argument("--scale", action="store_true", help="divide columns by sample SD")
    sp.add_argument("--no-center", action="store_true", help="skip column centering")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="factorcount",
        description="Choose the number of factors/components in a data matrix.",
    )
    parser.add_argument("--version", action="version", version=f"factorcount {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("select", help="run one selector on a data matrix")
    ps.add_argument("--method", required=True, choices=_METHODS)
    _add_ingest_flags(ps)
    ps.add_argument("--eps", type=float, default=0.0, help="threshold inflation for dpa/ddpa")
    ps.add_argument("--permutations", type=int, default=19, help="PA permutation count")
    ps.add_argument("--percentile", type=float, default=100.0, help="PA percentile in (0, 100]")
    ps.add_argument("--seed", type=int, default=0, help="PA permutation seed")
    ps.add_argument("--json", help="write the report here instead of stdout")
    ps.add_argument("--plot-data", help="write squared singular values plus all method thresholds here")
    ps.set_defaults(func=_cmd_select)

    pe = sub.add_parser("edge", help="compute the upper spectral edge")
    pe.add_argument("--gamma", type=float, required=True, help="aspect ratio p/n")
    src = pe.add_mutually_exclusive_group(required=True)
    src.add_argument("--atoms", help="two-column weight,atom file ('#' comments allowed)")
    src.add_argument("--input", help="derive atoms from a data matrix's column variances")
    pe.add_argument("--delimiter", default=",")
    pe.add_argument("--missing-token", default="NA")
    pe.add_argument("--header", action="store_true")
    pe.add_argument("--transpose", action="store_true")
    pe.add_argument("--scale", action="store_true")
    pe.add_argument("--no-center", action="store_true")
    pe.set_defaults(func=_cmd_edge)

    pm = sub.add_parser("simulate", help="run a named experiment scenario")
    pm.add_argument("--scenario", required=True, help=", ".join(scenario_names()))
    pm.add_argument("--replicates", type=int, default=None)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out", help="write the JSON result here instead of stdout")
    pm.add_argument("--csv", help="write the flat per-replicate CSV here")
    pm.set_defaults(func=_cmd_simulate)
    return parser


def _ingest_options(ns):
    return IngestOptions(
        delimiter=ns.delimiter,
        has_header=ns.header,
        missing_token=ns.missing_token,
        center=not ns.no_center,
        scale=ns.scale,
        transpose=ns.transpose,
    )


def _run_selector(method, X, ns):
    if method == "pa":
        return pa_select(
            X,
            n_permutations=ns.permutations,
            percentile=ns.percentile,
            seed=ns.seed,
        )
    if method == "dpa":
        return dpa_select(X, eps=ns.eps)
    if method == "ddpa":
        return ddpa_select(X, eps=ns.eps)
    return ddpa_plus_select(X)


def _overlay_threshold(result, n):
    """Last recorded threshold, converted to squared-singular-value units."""
    if not result.steps:
        return None
    thr = result.steps[-1].threshold
    if result.method.value == "pa":
        return thr * thr / n
    if result.method.value in ("dpa", "ddpa"):
        return thr * thr
    return thr


def _cmd_select(ns):
    t0 = time.perf_counter()
    X = ingest(ns.input, _ingest_options(ns))
    t1 = time.perf_counter()
    result = _run_selector(ns.method, X, ns)
    t2 = time.perf_counter()

    sv_scaled = np.linalg.svd(X.values, compute_uv=False) / math.sqrt(X.n)
    edge_used = None
    if ns.method == "dpa" and result.steps:
        root = result.steps[0].threshold / (1.0 + ns.eps)
        edge_used = root * root
    report = build_report(
        result=result,
        singular_values=sv_scaled,
        edge_used=edge_used,
        timings={
            "ingest_ms": (t1 - t0) * 1e3,
            "select_ms": (t2 - t1) * 1e3,
            "total_ms": (time.perf_counter() - t0) * 1e3,
        },
        input_sha256=file_sha256(ns.input),
        version=__version__,
    )
    _emit_json(report, ns.json)

    if ns.plot_data:
        thresholds = {}
        for name in _METHODS:
            try:
                res = result if name == ns.method else _run_selector(name, X, ns)
            except (ValidationError, NumericalError):
                thresholds[name] = None
                continue
            thresholds[name] = _overlay_threshold(res, X.n)
        payload = {
            "squared_singular_values": [float(x * x) for x in sv_scaled],
            "thresholds": thresholds,
        }
        with open(ns.plot_data, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_edge(ns):
    if ns.atoms:
        H = read_atoms(ns.atoms)
    else:
        H = variance_distribution(ingest(ns.input, _ingest_options(ns)))
    sol = upper_edge(EdgeProblem(gamma=ns.gamma, H=H))
    _emit_json(
        {
            "edge": sol.edge,
            "v_star": sol.v_star,
            "iterations": sol.iterations,
            "residual": sol.residual,
        },
        None,
    )
    return 0


def _cmd_simulate(ns):
    result = run_experiment(ns.scenario, replicates=ns.replicates, seed=ns.seed)
    _emit_json(result.to_dict(), ns.out)
    csv_path = ns.csv
    if csv_path is None and ns.out:
        csv_path = ns.out.rsplit(".", 1)[0] + ".csv" if "." in ns.out else ns.out + ".csv"
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write("grid,method,replicate,k\n")
            for label, name, rep, k in result.iter_csv_rows():
                fh.write(f"{label},{name},{rep},{k}\n")
    return 0


def _emit_json(payload, path):
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        print(text)


def main(argv=None):
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except ValidationError as exc:
        print(f"factorcount: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"factorcount: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"factorcount: {exc}", file=sys.stderr)
        return 2


def cli_select(argv):
    return main(["select", *argv])


def cli_edge(argv):
    return main(["edge", *argv])


def cli_simulate(argv):
    return main(["simulate", *argv])


if __name__ == "__main__":
    sys.exit(main())
