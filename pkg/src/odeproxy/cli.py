"""Command-line front end: errorbound, verify, compare, sample.

Loads a model (a JSON file or the bundled "fpa" benchmark) and a safety
problem, runs the requested pipeline, and writes machine-readable reports:
JSON for structured results, CSV for plot data so any external plotter can
reproduce the figures. With --plot, matplotlib renderings of the same data
are written next to the CSV files.

Exit codes are a stable contract: 0 success/Safe, 1 Unknown, 2 input error,
3 enclosure failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (
    METHOD_INTERVAL,
    METHOD_MEANVALUE,
    error_set,
    negate_error_set,
    sander_bound,
)
from .fpa import (
    FPA_OUTPUT_DIMS,
    INPUT_SET_NOTE,
    fpa_input_box,
    fpa_model,
    fpa_safe_set,
)
from .network import ModelError, load_model
from .reach import NoEnclosure, reach_tube
from .sets import Box, interval_hull
from .verify import (
    BOUND_SANDER,
    BOUND_SET,
    NODE_VIA_RESNET,
    RESNET_VIA_NODE,
    SAMPLE_NODE,
    SAMPLE_RESNET,
    RunConfig,
    SafetyProblem,
    sample_outputs,
    soundness_report,
    verify,
)

EXIT_SAFE = 0
EXIT_UNKNOWN = 1
EXIT_INPUT_ERROR = 2
EXIT_NO_ENCLOSURE = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="odeproxy",
        description="Set-based error bounds between a continuous-depth flow "
                    "and its residual Euler step, with safety verification.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", default="fpa",
                        help='model JSON path, or "fpa" for the bundled '
                             "benchmark (default: fpa)")
        sp.add_argument("--problem", default=None,
                        help="safety problem JSON path (default: bundled "
                             "fpa problem)")
        sp.add_argument("--segments", type=int, default=20,
                        help="number of tube segments (default: 20)")
        sp.add_argument("--order", type=int, default=10,
                        help="matrix exponential Taylor order (default: 10)")
        sp.add_argument("--max-gens", type=int, default=None,
                        help="zonotope order-reduction cap (default: 10n)")
        sp.add_argument("--error-method", default=METHOD_MEANVALUE,
                        choices=[METHOD_INTERVAL, METHOD_MEANVALUE],
                        help="error-image propagation (default: meanvalue)")
        sp.add_argument("--method", default=BOUND_SET,
                        choices=[BOUND_SET, BOUND_SANDER],
                        help="expansion bound: full error set or the scalar "
                             "Lipschitz hypercube (default: set)")
        sp.add_argument("--samples", type=int, default=10000,
                        help="Monte-Carlo sample count (default: 10000)")
        sp.add_argument("--seed", type=int, default=42,
                        help="sampling seed (default: 42)")
        sp.add_argument("--out", default=".",
                        help="output directory (default: current directory)")
        sp.add_argument("--plot", action="store_true",
                        help="also render matplotlib figures next to the CSVs")

    sp = sub.add_parser("errorbound",
                        help="compute the error set and write errorbound.json "
                             "+ segments.csv + tube.csv")
    common(sp)

    sp = sub.add_parser("verify",
                        help="run one verification direction and write "
                             "verdict.json; exit 0 Safe, 1 Unknown")
    common(sp)
    sp.add_argument("--direction", default=None,
                    choices=[NODE_VIA_RESNET, RESNET_VIA_NODE],
                    help="verification direction (default: from the problem "
                         "file, or node-via-resnet for the bundled problem)")

    sp = sub.add_parser("compare",
                        help="compare the set bound to the scalar bound; "
                             "writes compare.json + compare.csv")
    common(sp)

    sp = sub.add_parser("sample",
                        help="sample both models' outputs and check them "
                             "against the expanded sets; writes samples.csv "
                             "+ soundness.json")
    common(sp)
    return p


def _load_model_arg(spec: str):
    if spec == "fpa":
        return fpa_model(), ["fpa"]
    return load_model(spec), []


def _load_problem_arg(args, direction=None) -> SafetyProblem:
    if args.problem is None:
        if args.model != "fpa":
            raise ModelError("--problem is required for a custom model")
        return SafetyProblem(fpa_input_box(), fpa_safe_set(), FPA_OUTPUT_DIMS,
                             direction or NODE_VIA_RESNET)
    with open(args.problem) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelError(f"malformed problem JSON: {e}") from e
    if direction is not None:
        d = dict(d, direction=direction)
    return SafetyProblem.from_json(d)


def _config(args) -> RunConfig:
    return RunConfig(n_segments=args.segments, max_gens=args.max_gens,
                     error_method=args.error_method, samples=args.samples,
                     seed=args.seed, exp_order=args.order,
                     bound_method=args.method)


def _notes(args):
    return [INPUT_SET_NOTE] if args.model == "fpa" else []


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _box_row(prefix, b: Box):
    return list(prefix) + [repr(v) for v in b.lo] + [repr(v) for v in b.hi]


def _box_header(extra, n):
    return extra + [f"lo_{i + 1}" for i in range(n)] + \
        [f"hi_{i + 1}" for i in range(n)]


def cmd_errorbound(args) -> int:
    f, notes = _load_model_arg(args.model)
    problem = _load_problem_arg(args)
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tube = reach_tube(f, problem.input_set, n_segments=cfg.n_segments,
                      exp_order=cfg.exp_order, max_gens=cfg.max_gens)
    err = error_set(f, tube, cfg.error_method)
    comp = sander_bound(f, err)

    _write_json(out / "errorbound.json", {
        "config": cfg.to_json(),
        "input_set": problem.input_set.to_json(),
        "error_bound": err.to_json(),
        "comparison": comp.to_json(),
        "notes": notes,
    })
    n = f.dim
    with open(out / "segments.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_box_header(["segment", "t_lo", "t_hi"], n))
        for k, (seg, b) in enumerate(zip(tube.segments, err.per_segment)):
            w.writerow(_box_row([k, repr(seg.t_lo), repr(seg.t_hi)], b))
    with open(out / "tube.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_box_header(["segment", "t_lo", "t_hi"], n))
        for k, seg in enumerate(tube.segments):
            w.writerow(_box_row([k, repr(seg.t_lo), repr(seg.t_hi)],
                                seg.enclosure))
    if args.plot:
        from .plots import plot_error_segments
        plot_error_segments(err, out / "errorbound.png")
    return EXIT_SAFE


def cmd_verify(args) -> int:
    f, notes = _load_model_arg(args.model)
    problem = _load_problem_arg(args, direction=args.direction)
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    verdict = verify(f, problem, cfg)
    _write_json(out / "verdict.json", {
        "config": cfg.to_json(),
        "problem": problem.to_json(),
        "verdict": verdict.to_json(),
        "notes": notes,
    })
    if args.plot:
        from .plots import plot_verification
        which = (SAMPLE_NODE if problem.direction == NODE_VIA_RESNET
                 else SAMPLE_RESNET)
        samples = sample_outputs(f, problem.input_set,
                                 min(cfg.samples, 2000), which, seed=cfg.seed)
        plot_verification(verdict, problem, out / "verify.png", samples)
    if verdict.diagnostics.get("no_enclosure"):
        return EXIT_NO_ENCLOSURE
    return EXIT_SAFE if verdict.is_safe else EXIT_UNKNOWN


def cmd_compare(args) -> int:
    f, notes = _load_model_arg(args.model)
    problem = _load_problem_arg(args)
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tube = reach_tube(f, problem.input_set, n_segments=cfg.n_segments,
                      exp_order=cfg.exp_order, max_gens=cfg.max_gens)
    err = error_set(f, tube, cfg.error_method)
    comp = sander_bound(f, err)

    _write_json(out / "compare.json", {
        "config": cfg.to_json(),
        "comparison": comp.to_json(),
        "omega_eps": err.omega_eps.to_json(),
        "notes": notes,
    })
    n = f.dim
    inf_cube = Box(-comp.set_inf_norm * np.ones(n),
                   comp.set_inf_norm * np.ones(n))
    sander_cube = Box(-comp.sander_scalar * np.ones(n),
                      comp.sander_scalar * np.ones(n))
    with open(out / "compare.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim_i", "dim_j", "set_kind",
                    "lo_i", "lo_j", "hi_i", "hi_j"])
        for i in range(n):
            for j in range(i + 1, n):
                for kind, b in (("omega_eps", err.omega_eps),
                                ("inf_norm_cube", inf_cube),
                                ("sander_cube", sander_cube)):
                    w.writerow([i + 1, j + 1, kind,
                                repr(b.lo[i]), repr(b.lo[j]),
                                repr(b.hi[i]), repr(b.hi[j])])
    if args.plot:
        from .plots import plot_comparison
        plot_comparison(err, comp, out / "compare.png")
    return EXIT_SAFE


def cmd_sample(args) -> int:
    f, notes = _load_model_arg(args.model)
    problem = _load_problem_arg(args)
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    node = sample_outputs(f, problem.input_set, cfg.samples, SAMPLE_NODE,
                          seed=cfg.seed, h=cfg.sim_step)
    resnet = sample_outputs(f, problem.input_set, cfg.samples, SAMPLE_RESNET,
                            seed=cfg.seed)
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind"] + [f"x_{i + 1}" for i in range(f.dim)])
        for row in node:
            w.writerow([SAMPLE_NODE] + [repr(v) for v in row])
        for row in resnet:
            w.writerow([SAMPLE_RESNET] + [repr(v) for v in row])

    # Each model's samples must land inside the expanded set built for it.
    reports = {}
    p_fwd = SafetyProblem(problem.input_set, problem.safe_set,
                          problem.output_dims, NODE_VIA_RESNET)
    p_bwd = SafetyProblem(problem.input_set, problem.safe_set,
                          problem.output_dims, RESNET_VIA_NODE)
    for p, samples in ((p_fwd, node), (p_bwd, resnet)):
        verdict = verify(f, p, cfg)
        if verdict.expanded_set is None:
            reports[p.direction] = {"no_enclosure": True}
            continue
        reports[p.direction] = soundness_report(
            samples, interval_hull(verdict.expanded_set))
    _write_json(out / "soundness.json", {
        "config": cfg.to_json(),
        "reports": reports,
        "notes": notes,
    })
    if args.plot:
        from .plots import plot_samples
        dims = problem.dims0
        plot_samples(node[:, :], resnet[:, :], out / "samples.png",
                     dims=(int(dims[0]), int(dims[1])))
    return EXIT_SAFE


_COMMANDS = {
    "errorbound": cmd_errorbound,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "sample": cmd_sample,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NoEnclosure as e:
        print(f"error: no validated enclosure: {e}", file=sys.stderr)
        return EXIT_NO_ENCLOSURE
    except (ModelError, ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
