"""Command-line front end.

Subcommands: match, concavity-check, bound, ensemble, dissimilarity,
embed. Every command is deterministic under a fixed --seed, writes JSON
(stable key order) or CSV reports, and can additionally render matplotlib
figures next to the data files via --figures.

Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import affinity as aff
from . import fileio
from .concavity import (
    SpectrumTemplate,
    certify_conditional_concavity,
    chernoff_bound,
    closed_form_bound,
    mc_convexity_probability,
    vertex_local_minima_experiment,
)
from .energy import energy_E1, hessian_E2, hessian_onesided, restricted_spectrum
from .errors import (
    ConcavematchError,
    DenseLimitError,
    DimensionError,
    DisconnectedGraphError,
    DuplicatePointsError,
    InputFormatError,
)
from .meshes import mesh_edge_graph
from .pipeline import all_pairs_dissimilarity, classical_mds
from .polytope import PolytopeDescriptor, PolytopeKind
from .solver import SolverConfig, multi_start

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _jsonify(obj):
    """JSON-safe conversion: numpy scalars to Python, non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _write_json(path, doc):
    text = json.dumps(_jsonify(doc), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _write_kv_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _threads_default():
    env = os.environ.get("CONCAVEMATCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--out", type=str, default=None, help="output file path")
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default=None,
        help="report format (default: json; csv for dissimilarity/embed)",
    )
    parser.add_argument(
        "--figures",
        type=str,
        default=None,
        metavar="DIR",
        help="also render figures into DIR",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker pool size (default: CONCAVEMATCH_THREADS or CPU count)",
    )


def _add_affinity_flags(parser):
    parser.add_argument(
        "--affinity",
        choices=aff.KERNEL_NAMES,
        default="distance",
        help="kernel applied to the raw distances (default: distance)",
    )
    parser.add_argument(
        "--kernel-param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="kernel parameter (c, beta, tau, gamma, scale, variant); repeatable",
    )
    parser.add_argument(
        "--input-kind",
        choices=("auto", "points", "graph", "mesh", "affinity"),
        default="auto",
        help="how to interpret input files (default: by extension)",
    )


def _add_solver_flags(parser):
    parser.add_argument("--restarts", type=int, default=10)
    parser.add_argument("--anchors", type=int, default=3, help="anchor pairs per restart")
    parser.add_argument("--tol", type=float, default=1e-8, help="stationarity tolerance")
    parser.add_argument("--max-iters", type=int, default=500)


def _kernel_spec(args):
    params = {}
    for item in args.kernel_param:
        if "=" not in item:
            raise _UsageError(f"--kernel-param needs KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in ("c", "beta", "tau", "gamma", "scale", "variant"):
            raise _UsageError(f"unknown kernel parameter {key!r}")
        params[key] = value.strip() if key == "variant" else float(value)
    try:
        return aff.KernelSpec(name=args.affinity, **params)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _load_input(path, input_kind):
    kind = input_kind
    if kind == "auto":
        suffix = Path(path).suffix.lower()
        kind = {
            ".off": "mesh",
            ".xyz": "points",
            ".csv": "points",
            ".edges": "graph",
            ".edgelist": "graph",
            ".graph": "graph",
        }.get(suffix)
        if kind is None:
            raise _UsageError(
                f"cannot infer input kind of {path}; pass --input-kind"
            )
    if kind == "points":
        return "points", fileio.load_point_cloud(path)
    if kind == "graph":
        return "graph", fileio.load_edge_list(path)
    if kind == "mesh":
        points, triangles = fileio.load_off_mesh(path)
        return "graph", mesh_edge_graph(points, triangles)
    return "affinity", fileio.load_affinity_csv(path)


def _build_affinity(loaded, spec):
    kind, payload = loaded
    if kind == "affinity":
        base = payload
    elif kind == "graph":
        base = aff.geodesic_distances(payload)
    elif spec.name in ("spherical-distance", "spherical-gaussian"):
        base = aff.spherical_distances(payload)
    else:
        base = aff.pairwise_euclidean(payload)
    return aff.apply_kernel(base, spec)


def _affinities_from_paths(paths, args):
    spec = _kernel_spec(args)
    return [_build_affinity(_load_input(p, args.input_kind), spec) for p in paths]


def _figures_dir(args):
    if args.figures is None:
        return None
    directory = Path(args.figures)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _cmd_match(args):
    polytope = PolytopeKind(args.polytope)
    if args.energy == "onesided" and polytope is not PolytopeKind.ONESIDED:
        raise _UsageError("--energy onesided requires --polytope onesided")
    if args.energy != "onesided" and polytope is PolytopeKind.ONESIDED:
        raise _UsageError(f"--energy {args.energy} requires --polytope permutation")
    paths = args.inputs if len(args.inputs) == 2 else [args.inputs[0], args.inputs[0]]
    a, b = _affinities_from_paths(paths, args)
    linear = None
    if args.linear_term:
        linear = fileio.load_affinity_csv(args.linear_term, provenance="kernel:linear").values
    if args.energy == "onesided":
        h = hessian_onesided(a, b)
    else:
        h = hessian_E2(a, b)
    if linear is not None:
        if linear.shape != (a.n, b.n):
            raise DimensionError(
                f"linear term shape {linear.shape} does not match ({a.n}, {b.n})"
            )
        h = type(h)(h.terms, linear)
    descriptor = PolytopeDescriptor(polytope, a.n, b.n)
    config = SolverConfig(max_iters=args.max_iters, stationarity_tol=args.tol)
    result = multi_start(
        h, descriptor, args.anchors, args.restarts, config, seed=args.seed,
        threads=args.threads if args.threads else _threads_default(),
    )
    doc = {
        "command": "match",
        "inputs": [str(p) for p in args.inputs],
        "polytope": polytope.value,
        "energy": args.energy,
        "seed": args.seed,
        "restarts": args.restarts,
        "anchors": args.anchors,
        "result": result.to_dict(),
    }
    if args.energy == "E1-report-only":
        doc["energy_E1"] = energy_E1(a, b, result.x)
    out = args.out or "match_result.json"
    if args.format == "csv":
        rows = [("source", "target")]
        rows += [(i, int(j)) for i, j in enumerate(result.assignment)]
        _write_kv_csv(out, rows)
    else:
        _write_json(out, doc)
    print(f"energy {result.energy:.12g} is_vertex {result.is_vertex}")
    figures = _figures_dir(args)
    if figures is not None:
        from . import plots

        plots.plot_energy_trace(result.trace, figures / "match_trace.png")
    return 0


def _bound_report_dict(report):
    return {
        "chernoff_value": report.chernoff_value,
        "optimal_t": report.optimal_t,
        "subspace_dim": report.subspace_dim,
        "mc_estimate": report.mc_estimate,
        "mc_samples": report.mc_samples,
        "mc_hits": report.mc_hits,
        "epsilon_hat": report.epsilon_hat,
    }


def _cmd_concavity_check(args):
    matrices = _affinities_from_paths(args.inputs, args)
    labels = [Path(p).stem for p in args.inputs]
    if len(matrices) == 1:
        pairs = [(0, 0)]
    elif len(matrices) == 2:
        pairs = [(0, 1)]
    else:
        pairs = [(i, j) for i in range(len(matrices)) for j in range(i + 1, len(matrices))]
    rows = []
    seeds = np.random.SeedSequence(args.seed).spawn(len(pairs))
    for (i, j), seed in zip(pairs, seeds):
        a, b = matrices[i], matrices[j]
        if a.n != b.n:
            raise DimensionError(
                f"{labels[i]} and {labels[j]} have different sizes ({a.n} vs {b.n})"
            )
        h = hessian_E2(a, b)
        descriptor = PolytopeDescriptor(PolytopeKind.PERMUTATION, a.n)
        entry = {"a": labels[i], "b": labels[j]}
        try:
            certificate = certify_conditional_concavity(h, descriptor)
            spectrum = restricted_spectrum(h, descriptor)
            entry["certificate"] = certificate.classification
            entry["margin"] = certificate.margin
            entry["spectrum_min"] = float(spectrum[0])
            entry["spectrum_max"] = float(spectrum[-1])
        except DenseLimitError:
            spectrum = None
            entry["certificate"] = "unavailable"
            entry["margin"] = None
            entry["spectrum_min"] = None
            entry["spectrum_max"] = None
        report = mc_convexity_probability(
            h,
            descriptor,
            d=args.d,
            samples=args.samples,
            seed=np.random.default_rng(seed),
            eigenvalues=spectrum,
        )
        entry["bound_report"] = _bound_report_dict(report)
        rows.append(entry)
    bounds = [r["bound_report"]["chernoff_value"] for r in rows]
    have_bounds = [b for b in bounds if b is not None]
    empiricals = [r["bound_report"]["mc_estimate"] for r in rows]
    aggregate = {
        "bound_mean": float(np.mean(have_bounds)) if have_bounds else None,
        "bound_std": float(np.std(have_bounds)) if have_bounds else None,
        "empirical_mean": float(np.mean(empiricals)),
        "empirical_std": float(np.std(empiricals)),
    }
    doc = {
        "command": "concavity-check",
        "seed": args.seed,
        "samples": args.samples,
        "subspace_dim": args.d,
        "pairs": rows,
        "aggregate": aggregate,
    }
    out = args.out or "concavity_report.json"
    if args.format == "csv":
        table = [
            (
                "a",
                "b",
                "certificate",
                "margin",
                "chernoff_bound",
                "mc_estimate",
                "mc_hits",
                "mc_samples",
            )
        ]
        for r in rows:
            br = r["bound_report"]
            table.append(
                (
                    r["a"],
                    r["b"],
                    r["certificate"],
                    _csv_num(r["margin"]),
                    _csv_num(br["chernoff_value"]),
                    _csv_num(br["mc_estimate"]),
                    br["mc_hits"],
                    br["mc_samples"],
                )
            )
        table.append(
            ("mean", "", "", "", _csv_num(aggregate["bound_mean"]),
             _csv_num(aggregate["empirical_mean"]), "", "")
        )
        table.append(
            ("std", "", "", "", _csv_num(aggregate["bound_std"]),
             _csv_num(aggregate["empirical_std"]), "", "")
        )
        _write_kv_csv(out, table)
    else:
        _write_json(out, doc)
    for r in rows:
        br = r["bound_report"]
        bound_text = "n/a" if br["chernoff_value"] is None else f"{br['chernoff_value']:.3e}"
        print(
            f"{r['a']} vs {r['b']}: {r['certificate']} "
            f"bound {bound_text} empirical {br['mc_estimate']:.3e}"
        )
    figures = _figures_dir(args)
    if figures is not None and rows:
        from . import plots

        a, b = matrices[pairs[0][0]], matrices[pairs[0][1]]
        spectrum = restricted_spectrum(
            hessian_E2(a, b), PolytopeDescriptor(PolytopeKind.PERMUTATION, a.n)
        )
        plots.plot_spectrum(spectrum, figures / "concavity_spectrum.png")
    return 0


def _csv_num(value):
    return "" if value is None else f"{value:.17g}"


def _cmd_bound(args):
    template = SpectrumTemplate(
        m=args.m,
        p=args.p,
        pos_bound=args.pos_bound,
        neg_bound=args.neg_bound,
        mode=args.mode,
    )
    rng = np.random.default_rng(args.seed)
    spectrum = template.eigenvalues(rng)
    bound, t_star = chernoff_bound(spectrum, d=args.d)
    closed = None
    if template.mode == "fixed" and template.pos_bound <= template.neg_bound:
        closed = closed_form_bound(template)
    mc = None
    if args.samples:
        if args.d > 1:
            raise _UsageError("--samples with --d > 1 is not supported for templates")
        mc = mc_convexity_probability(
            None, template.m, d=1, samples=args.samples, seed=rng,
            eigenvalues=spectrum,
        )
    doc = {
        "command": "bound",
        "template": {
            "m": template.m,
            "p": template.p,
            "p_effective": template.p_effective,
            "pos_bound": template.pos_bound,
            "neg_bound": template.neg_bound,
            "mode": template.mode,
        },
        "subspace_dim": args.d,
        "chernoff": bound,
        "optimal_t": t_star,
        "closed_form": closed,
        "mc": None if mc is None else _bound_report_dict(mc),
        "seed": args.seed,
    }
    out = args.out or "bound_report.json"
    if args.format == "csv":
        rows = [("key", "value"), ("chernoff", _csv_num(bound)),
                ("optimal_t", _csv_num(t_star if math.isfinite(t_star) else None)),
                ("closed_form", _csv_num(closed)), ("m", template.m),
                ("p", template.p), ("d", args.d)]
        if mc is not None:
            rows.append(("mc_estimate", _csv_num(mc.mc_estimate)))
            rows.append(("mc_hits", mc.mc_hits))
        _write_kv_csv(out, rows)
    else:
        _write_json(out, doc)
    closed_text = "n/a" if closed is None else f"{closed:.6e}"
    print(f"chernoff {bound:.6e} closed-form {closed_text}")
    figures = _figures_dir(args)
    if figures is not None:
        from . import plots

        plots.plot_bound_objective(spectrum, t_star, figures / "bound_objective.png")
    return 0


def _cmd_ensemble(args):
    m = (args.n - 1) ** 2
    template = SpectrumTemplate(
        m=m,
        p=args.p,
        pos_bound=args.pos_bound,
        neg_bound=args.neg_bound,
        mode=args.mode,
    )
    config = SolverConfig(max_iters=args.max_iters, stationarity_tol=args.tol)
    report = vertex_local_minima_experiment(
        template,
        args.n,
        trials=args.trials,
        restarts=args.restarts,
        seed=args.seed,
        config=config,
    )
    doc = {
        "command": "ensemble",
        "template": {
            "m": template.m,
            "p": template.p,
            "pos_bound": template.pos_bound,
            "neg_bound": template.neg_bound,
            "mode": template.mode,
        },
        "n": args.n,
        "trials": report.trials,
        "restarts": report.restarts,
        "total_runs": report.total_runs,
        "vertex_trials": report.vertex_trials,
        "vertex_fraction": report.vertex_fraction,
        "run_vertex_fraction": report.run_vertex_fraction,
        "face_dimension_histogram": {
            str(k): v for k, v in report.face_dimension_histogram.items()
        },
        "mean_iterations": report.mean_iterations,
        "seed": args.seed,
    }
    out = Path(args.out or "ensemble_report.json")
    json_path = out if out.suffix == ".json" else out.with_suffix(".json")
    csv_path = json_path.with_suffix(".csv")
    _write_json(json_path, doc)
    rows = [
        ("key", "value"),
        ("n", args.n),
        ("trials", report.trials),
        ("restarts", report.restarts),
        ("vertex_fraction", f"{report.vertex_fraction:.17g}"),
        ("mean_iterations", f"{report.mean_iterations:.17g}"),
    ]
    for dim, count in report.face_dimension_histogram.items():
        rows.append((f"face_dim_{dim}", count))
    _write_kv_csv(csv_path, rows)
    print(
        f"vertex fraction {report.vertex_fraction:.4f} over {report.trials} trials "
        f"({report.restarts} restarts each)"
    )
    figures = _figures_dir(args)
    if figures is not None:
        from . import plots

        plots.plot_face_histogram(
            report.face_dimension_histogram,
            report.vertex_fraction,
            figures / "ensemble_faces.png",
        )
    return 0


def _cmd_dissimilarity(args):
    matrices = _affinities_from_paths(args.inputs, args)
    labels = [Path(p).stem for p in args.inputs]
    kind = PolytopeKind(args.polytope)
    config = SolverConfig(max_iters=args.max_iters, stationarity_tol=args.tol)
    threads = args.threads if args.threads else _threads_default()
    dissimilarity, failures = all_pairs_dissimilarity(
        matrices,
        labels=labels,
        kind=kind,
        anchors=args.anchors,
        restarts=args.restarts,
        config=config,
        seed=args.seed,
        threads=threads,
    )
    out = args.out or "dissimilarity.csv"
    if args.format == "json":
        doc = {
            "command": "dissimilarity",
            "labels": list(dissimilarity.labels),
            "values": dissimilarity.values,
            "failures": [list(f) for f in failures],
            "seed": args.seed,
        }
        _write_json(out, doc)
    else:
        fileio.save_dissimilarity_csv(out, dissimilarity)
    print(
        f"dissimilarity over {len(labels)} items written to {out}"
        + (f" ({len(failures)} failed pairs)" if failures else "")
    )
    figures = _figures_dir(args)
    if figures is not None:
        from . import plots

        plots.plot_dissimilarity(dissimilarity, figures / "dissimilarity.png")
    return 0


def _cmd_embed(args):
    dissimilarity = fileio.load_dissimilarity_csv(args.inputs[0])
    coords = classical_mds(dissimilarity, args.k)
    out = args.out or "embedding.csv"
    if args.format == "json":
        doc = {
            "command": "embed",
            "labels": list(dissimilarity.labels),
            "coordinates": coords,
            "k": args.k,
        }
        _write_json(out, doc)
    else:
        fileio.save_embedding_csv(out, dissimilarity.labels, coords)
    print(f"{args.k}-dimensional embedding of {dissimilarity.n} items written to {out}")
    figures = _figures_dir(args)
    if figures is not None:
        from . import plots

        plots.plot_embedding(dissimilarity.labels, coords, figures / "embedding.png")
    return 0


def build_parser():
    parser = _Parser(
        prog="concavematch",
        description="Graph matching with conditionally concave energies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="match two inputs")
    p_match.add_argument("inputs", nargs="+", metavar="INPUT")
    p_match.add_argument(
        "--polytope", choices=("permutation", "onesided"), default="permutation"
    )
    p_match.add_argument(
        "--energy", choices=("E2", "onesided", "E1-report-only"), default="E2"
    )
    p_match.add_argument("--linear-term", type=str, default=None, metavar="CSV")
    _add_affinity_flags(p_match)
    _add_solver_flags(p_match)
    _add_common(p_match)

    p_check = sub.add_parser(
        "concavity-check", help="certificates and convex-direction bounds"
    )
    p_check.add_argument("inputs", nargs="+", metavar="INPUT")
    p_check.add_argument("--samples", type=int, default=100_000)
    p_check.add_argument("--d", type=int, default=1, help="subspace dimension")
    _add_affinity_flags(p_check)
    _add_common(p_check)

    p_bound = sub.add_parser("bound", help="bounds for a two-level spectrum")
    p_bound.add_argument("--m", type=int, required=True)
    p_bound.add_argument("--p", type=float, required=True)
    p_bound.add_argument("--pos-bound", type=float, default=1.0)
    p_bound.add_argument("--neg-bound", type=float, default=1.0)
    p_bound.add_argument("--mode", choices=("fixed", "sampled"), default="fixed")
    p_bound.add_argument("--d", type=int, default=1)
    p_bound.add_argument("--samples", type=int, default=0)
    _add_common(p_bound)

    p_ens = sub.add_parser("ensemble", help="random-Hessian vertex experiment")
    p_ens.add_argument("--n", type=int, required=True)
    p_ens.add_argument("--p", type=float, required=True)
    p_ens.add_argument("--pos-bound", type=float, default=1.0)
    p_ens.add_argument("--neg-bound", type=float, default=1.0)
    p_ens.add_argument("--mode", choices=("fixed", "sampled"), default="fixed")
    p_ens.add_argument("--trials", type=int, default=100)
    p_ens.add_argument("--restarts", type=int, default=3)
    p_ens.add_argument("--tol", type=float, default=1e-8)
    p_ens.add_argument("--max-iters", type=int, default=500)
    _add_common(p_ens)

    p_diss = sub.add_parser("dissimilarity", help="all-pairs corpus dissimilarity")
    p_diss.add_argument("inputs", nargs="+", metavar="INPUT")
    p_diss.add_argument(
        "--polytope", choices=("permutation", "onesided"), default="permutation"
    )
    _add_affinity_flags(p_diss)
    _add_solver_flags(p_diss)
    _add_common(p_diss)

    p_embed = sub.add_parser("embed", help="classical MDS of a dissimilarity CSV")
    p_embed.add_argument("inputs", nargs=1, metavar="DISSIMILARITY_CSV")
    p_embed.add_argument("--k", type=int, default=2)
    _add_common(p_embed)

    return parser


_HANDLERS = {
    "match": _cmd_match,
    "concavity-check": _cmd_concavity_check,
    "bound": _cmd_bound,
    "ensemble": _cmd_ensemble,
    "dissimilarity": _cmd_dissimilarity,
    "embed": _cmd_embed,
}

_INPUT_ERRORS = (
    InputFormatError,
    DimensionError,
    DuplicatePointsError,
    DisconnectedGraphError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = "csv" if args.command in ("dissimilarity", "embed") else "json"
        if args.command == "match" and not 1 <= len(args.inputs) <= 2:
            raise _UsageError("match takes one or two inputs")
        if args.command == "dissimilarity" and len(args.inputs) < 2:
            raise _UsageError("dissimilarity needs at least two inputs")
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConcavematchError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
