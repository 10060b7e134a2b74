"""Command-line interface.

Subcommands: estimate, embed, dimselect, simulate-sbm, re-sweep,
cross-validate, perm-test. Every run writes a manifest JSON (config echo,
seed, versions, wall time) alongside its outputs. Exit codes: 0 success,
1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .core import AdjacencyMatrix, NumericalError, ValidationError
from .dimselect import Fixed, parse_dim_method, select_dimension
from .efficiency import cross_validate, run_sbm_experiment
from .estimator import estimate_phat
from .io import (FORMATS, load_adjacency, load_batch, load_dense_csv,
                 save_dense_csv, save_matrix)
from .models import (FIXTURE_NAMES, fixture, load_sbm_json, sample_iem_array,
                     sbm_probability_array)
from .permtest import (LabelAssignment, LatentPositions, SpatialAdjacency,
                       perm_test, validate_contiguity)
from .rng import stream
from .spectral import ase, eig_sym


def _threads_default() -> int:
    env = os.environ.get("GRAPHMEAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _float_repr(x) -> str:
    return repr(float(x))


def _write_manifest(out_dir: Path, subcommand: str, args: argparse.Namespace,
                    outputs: list, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k not in ("func", "needs_seed")},
        "seed": getattr(args, "seed", None),
        "versions": {
            "graphmean": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": time.time() - started,
        "outputs": [os.fspath(p) for p in outputs],
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_params(args):
    if getattr(args, "fixture", None):
        return fixture(args.fixture)
    if getattr(args, "params", None):
        return load_sbm_json(args.params)
    raise ValidationError("one of --fixture or --params is required")


def _sbm_parent(sub):
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--fixture", choices=FIXTURE_NAMES, help="built-in blockmodel parameters")
    group.add_argument("--params", help="JSON file with {'B': [[...]], 'rho': [...]}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_estimate(args) -> list:
    batch = load_batch(args.input, fmt=args.format, binary=not args.weighted)
    out = Path(args.out)
    if args.method == "abar":
        total = np.zeros((batch.n, batch.n))
        for g in batch.graphs:
            if not args.weighted:
                g.require_binary()
            total += g.data
        estimate = total / len(batch)
        diagnostics = {"method": "abar", "m": len(batch)}
        save_dense_csv(estimate, out)
    else:
        result = estimate_phat(batch, parse_dim_method(args.dim), weighted=args.weighted)
        save_dense_csv(result.phat.data, out)
        diagnostics = {
            "method": "phat",
            "m": len(batch),
            "d_selected": result.d_selected,
            "dim_method": args.dim,
            "eigenvalues": [float(x) for x in result.diagnostics["eigenvalues"]],
            "spectrum_scope": result.diagnostics["spectrum_scope"],
            "augmented_diagonal": [float(x) for x in result.diagnostics["augmented_diagonal"]],
            "warnings": result.diagnostics["warnings"],
        }
    outputs = [out]
    if args.diagnostics:
        with open(args.diagnostics, "w") as fh:
            json.dump(diagnostics, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.append(Path(args.diagnostics))
    return outputs


def cmd_embed(args) -> list:
    graph = load_adjacency(args.input, fmt=args.format, directed=False)
    pairs = eig_sym(graph.data)
    latent = ase(graph.data, args.dim)
    out = Path(args.out)
    save_dense_csv(latent.X, out)
    sidecar = out.with_suffix(out.suffix + ".eigenvalues.csv")
    with open(sidecar, "w") as fh:
        for value in pairs.values:
            fh.write(_float_repr(value) + "\n")
    return [out, sidecar]


def cmd_dimselect(args) -> list:
    matrix = load_dense_csv(args.input)
    method = parse_dim_method(args.dim)
    with warnings.catch_warnings(record=True) as grabbed:
        warnings.simplefilter("always")
        d = select_dimension(matrix, method, m=args.m)
    payload = {"d": int(d), "method": args.dim, "m": args.m,
               "warnings": [str(w.message) for w in grabbed]}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        return [Path(args.out)]
    print(text)
    return []


def cmd_simulate_sbm(args) -> list:
    params = _load_params(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = stream(args.seed, 0)
    tau = rng.choice(params.K, size=args.n, p=params.rho)
    P = sbm_probability_array(params, tau)
    outputs = []
    width = max(3, len(str(args.m - 1)))
    for idx in range(args.m):
        graph = sample_iem_array(P, rng)
        path = out_dir / f"graph-{idx:0{width}d}.csv"
        save_matrix(AdjacencyMatrix(graph), path, fmt=args.format)
        outputs.append(path)
    tau_path = out_dir / "memberships.csv"
    with open(tau_path, "w") as fh:
        for label in tau:
            fh.write(f"{int(label)}\n")
    p_path = out_dir / "probability.csv"
    save_dense_csv(P, p_path)
    return outputs + [tau_path, p_path]


def cmd_re_sweep(args) -> list:
    params = _load_params(args)
    method = parse_dim_method(args.dim) if args.dim else Fixed(params.rank)
    n_list = [int(tok) for tok in args.n.split(",") if tok.strip()]
    report = run_sbm_experiment(
        params, n_list, m=args.m, replicates=args.replicates, method=method,
        seed=args.seed, threads=args.threads,
    )
    out = Path(args.out)
    report.to_csv(out)
    return [out]


def cmd_cross_validate(args) -> list:
    batch = load_batch(args.input, fmt=args.format, binary=True)
    method = parse_dim_method(args.dim)
    report = cross_validate(
        batch, m=args.m, replicates=args.replicates, method=method,
        seed=args.seed, threads=args.threads,
        compare_population=args.compare_population,
    )
    out = Path(args.out)
    report.to_csv(out)
    return [out]


def _load_labels(path) -> LabelAssignment:
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = [t.strip() for t in line.split(",")]
            if len(toks) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'vertex,label'")
            if toks[0].lower() == "vertex":
                continue
            entries.append((int(toks[0]), toks[1]))
    if not entries:
        raise ValidationError(f"{path}: no label rows found")
    entries.sort()
    indices = [i for i, _ in entries]
    if indices != list(range(len(entries))):
        raise ValidationError(f"{path}: vertex indices must cover 0..N-1 exactly once")
    return LabelAssignment.from_labels([lab for _, lab in entries])


def _load_spatial(path, fmt: str) -> SpatialAdjacency:
    graph = load_adjacency(path, fmt=fmt, directed=False)
    return SpatialAdjacency(graph.data)


def cmd_perm_test(args) -> list:
    if args.latent:
        latent = LatentPositions(load_dense_csv(args.latent))
    else:
        batch = load_batch(args.graphs, fmt=args.format, binary=True)
        result = estimate_phat(batch, parse_dim_method(args.dim))
        latent = result.latent
    assignment = _load_labels(args.labels)
    spatial = _load_spatial(args.spatial, args.spatial_format)
    validate_contiguity(assignment, spatial)

    k_values = [int(tok) for tok in args.flips.split(",") if tok.strip()]
    if not k_values:
        raise ValidationError("perm-test: --flips must name at least one flip count")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = {}
    nulls_path = out_dir / "null-samples.csv"
    with open(nulls_path, "w") as fh:
        fh.write("k,replicate,t_value\n")
        for k in k_values:
            res = perm_test(
                latent, assignment, spatial, k=k, replicates=args.replicates,
                seed=args.seed, enforce_contiguity=not args.no_contiguity,
                smoothed=args.smoothed_p, threads=args.threads,
            )
            results[k] = res
            for r, value in enumerate(res.null_samples):
                fh.write(f"{k},{r},{_float_repr(value)}\n")

    summary_path = out_dir / "perm-test.json"
    first = results[k_values[0]]
    payload = {
        "t_observed": float(first.t_observed),
        "replicates": args.replicates,
        "smoothed": bool(args.smoothed_p),
        "contiguity_enforced": not args.no_contiguity,
    }
    if len(k_values) == 1:
        payload["k"] = k_values[0]
        payload["p_value"] = float(first.p_value)
    else:
        payload["p_values"] = {str(k): float(results[k].p_value) for k in k_values}
    with open(summary_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [nulls_path, summary_path]


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphmean",
        description="Estimate the mean of a population of graphs with low-rank smoothing.",
    )
    parser.add_argument("--version", action="version", version=f"graphmean {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("estimate", help="estimate the mean graph of a batch")
    p.add_argument("--input", required=True, help="directory of graph files or a JSON batch manifest")
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--method", choices=("abar", "phat"), default="phat")
    p.add_argument("--dim", default="zg:3", help="zg:S, usvt:C or fixed:D (phat only)")
    p.add_argument("--weighted", action="store_true", help="accept non-binary edge weights")
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.add_argument("--diagnostics", help="optional diagnostics JSON path")
    p.set_defaults(func=cmd_estimate, needs_seed=False)

    p = subs.add_parser("embed", help="adjacency spectral embedding of one matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--out", required=True, help="latent positions CSV (N rows, d columns)")
    p.set_defaults(func=cmd_embed, needs_seed=False)

    p = subs.add_parser("dimselect", help="choose an embedding dimension for a matrix")
    p.add_argument("--input", required=True, help="dense CSV matrix (diagonally augmented mean)")
    p.add_argument("--dim", required=True, help="zg:S or usvt:C (fixed:D echoes D)")
    p.add_argument("--m", type=int, default=1, help="number of graphs behind the mean")
    p.add_argument("--out", help="write the result JSON here instead of stdout")
    p.set_defaults(func=cmd_dimselect, needs_seed=False)

    p = subs.add_parser("simulate-sbm", help="sample graphs from a stochastic blockmodel")
    _sbm_parent(p)
    p.add_argument("--n", type=int, required=True, help="vertex count")
    p.add_argument("--m", type=int, required=True, help="number of graphs")
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate_sbm, needs_seed=True)

    p = subs.add_parser("re-sweep", help="Monte Carlo relative-efficiency sweep over N")
    _sbm_parent(p)
    p.add_argument("--n", required=True, help="comma-separated vertex counts")
    p.add_argument("--m", type=int, required=True, help="graphs per replicate")
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--dim", help="zg:S, usvt:C or fixed:D; default fixed:rank(B)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--out", required=True, help="report CSV")
    p.set_defaults(func=cmd_re_sweep, needs_seed=True)

    p = subs.add_parser("cross-validate", help="held-out-mean cross-validation on a batch")
    p.add_argument("--input", required=True, help="directory of graph files or a JSON batch manifest")
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--m", type=int, required=True, help="sample size per replicate")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--dim", default="zg:3")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--compare-population", action="store_true",
                   help="compare against the whole-batch mean including the subsample")
    p.add_argument("--out", required=True, help="report CSV")
    p.set_defaults(func=cmd_cross_validate, needs_seed=True)

    p = subs.add_parser("perm-test", help="label-structure permutation test")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--latent", help="latent positions CSV")
    src.add_argument("--graphs", help="graph batch to embed first")
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--dim", default="zg:3", help="dimension method when embedding --graphs")
    p.add_argument("--labels", required=True, help="CSV of vertex,label rows")
    p.add_argument("--spatial", required=True, help="spatial adjacency matrix file")
    p.add_argument("--spatial-format", choices=FORMATS, default="dense-csv")
    p.add_argument("--flips", required=True, help="flip count k, or comma-separated list")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--no-contiguity", action="store_true",
                   help="disable contiguity enforcement during flips")
    p.add_argument("--smoothed-p", action="store_true",
                   help="use the (count+1)/(R+1) p-value variant")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_perm_test, needs_seed=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        outputs = args.func(args)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"graphmean {args.subcommand}: validation error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"graphmean {args.subcommand}: numerical failure: {exc}", file=sys.stderr)
        return 2
    if outputs:
        manifest_dir = Path(outputs[0]).parent
        _write_manifest(manifest_dir, args.subcommand, args, outputs, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
