"""Command-line surface: instance generation, mode solving, partition
estimation, offset-curve emission, chain diagnosis, and reference tables.

Every command takes --seed where randomness is involved, writes its outputs
with full round-trip float formatting (UTF-8, LF), and drops a run manifest
next to them; `rerun MANIFEST` replays a manifest byte-identically.

Exit codes: 0 success, 2 argument errors, 3 numeric validation failures,
4 I/O errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import lasso, mcmc, partition, problem, radial

EXIT_NUMERIC = 3
EXIT_IO = 4


def _fmt(x) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(x))


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise SystemExit(f"polarlasso: cannot write {path}: {exc}") from exc


def _write_json(path: str, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(command: str, args: argparse.Namespace, outputs: list[str]) -> None:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "outputs": [os.path.abspath(o) for o in outputs],
        "argv": [command] + _args_to_argv(cfg),
        "versions": f"polarlasso {__version__}",
    }
    base = outputs[0]
    root, _ = os.path.splitext(base)
    _write_json(root + ".manifest.json", manifest)


def _args_to_argv(cfg: dict) -> list[str]:
    argv: list[str] = []
    for key, value in sorted(cfg.items()):
        if value is None or key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    return argv


def _load_problem_or_exit(path: str) -> problem.ProblemInstance:
    try:
        return problem.load_problem(path)
    except FileNotFoundError:
        print(f"polarlasso: problem file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    except ValueError as exc:
        print(f"polarlasso: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_gen(args: argparse.Namespace) -> int:
    y = None
    if args.y_norm > 0.0:
        rng = np.random.default_rng(args.seed + 1)
        raw = rng.standard_normal(args.n)
        y = raw * (args.y_norm / np.linalg.norm(raw))
    prob = problem.gen_bernoulli_matrix(args.n, args.p, args.seed, y)
    try:
        problem.save_problem(prob, args.out, seed=args.seed)
    except OSError as exc:
        print(f"polarlasso: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    _write_manifest("gen", args, [args.out])
    print(f"wrote {args.out}: n={prob.n} p={prob.p} ||A||={prob.op_norm:.6f}")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    prob = _load_problem_or_exit(args.problem)
    out: dict = {"problem": os.path.abspath(args.problem)}
    if args.method in ("fista", "both"):
        sol = lasso.solve_fista(prob, args.max_iter, args.tol)
        out["fista"] = {"x": [float(v) for v in sol.x], "objective": sol.objective,
                        "meta": sol.meta}
    if args.method in ("polar", "both"):
        sol = lasso.solve_polar(prob, args.n_samples, args.seed)
        out["polar"] = {"x": [float(v) for v in sol.x], "objective": sol.objective,
                        "meta": sol.meta}
    _write_json(args.out, out)
    _write_manifest("solve", args, [args.out])
    print(f"wrote {args.out}")
    return 0


def cmd_partition(args: argparse.Namespace) -> int:
    prob = _load_problem_or_exit(args.problem)

    def as_dict(est):
        return {"z": est.z, "std_err": est.std_err, "z_min": est.z_min,
                "z_max": est.z_max, "method": est.method, "n_samples": est.n_samples}

    out: dict = {}
    failed = False
    if args.method in ("polar", "both"):
        est = partition.estimate_z_polar(prob, args.n_samples, args.seed)
        out["polar"] = as_dict(est)
        if not est.z_min <= est.z <= est.z_max:
            failed = True
    if args.method in ("naive", "both"):
        est = partition.estimate_z_naive(prob, args.n_samples, args.seed)
        out["naive"] = as_dict(est)
    if args.method != "both":
        # single-method runs use the flat schema directly
        out = {**out[args.method]}
    if args.shift:
        from . import shifted as shifted_mod

        sol = lasso.solve_fista(prob, 20000, 1e-10)
        l = sol.x
        rng = np.random.default_rng(args.seed + 7)
        logs = []
        count = 2048
        for _ in range(count):
            theta = problem.sample_sphere(rng, prob.p)
            ctx = shifted_mod.build_shift_context(prob, l, theta)
            logs.append(shifted_mod.shifted_radial_mass(ctx, prob.p))
        z_f = partition.sphere_surface(prob.p) * float(np.mean(logs))
        h0 = -0.5 * float(np.linalg.norm(prob.y - prob.A @ l) ** 2) - float(np.abs(l).sum())
        out["shift"] = {"z_f": z_f, "h0": h0, "z_from_shift": math.exp(h0) * z_f,
                        "l": [float(v) for v in l], "n_samples": count}
    _write_json(args.out, out)
    _write_manifest("partition", args, [args.out])
    print(f"wrote {args.out}")
    return EXIT_NUMERIC if failed else 0


def cmd_curves(args: argparse.Namespace) -> int:
    if not args.beta_min < args.beta_max:
        print("polarlasso: need --beta-min < --beta-max", file=sys.stderr)
        return 2
    p = args.p
    grid = np.linspace(args.beta_min, args.beta_max, args.steps)
    lines = ["beta,phi_beta,phi_beta_M,remainder_bound,mode_times_l1,phi_beta_trusted"]
    for b in grid:
        phi = radial.mass_closed_form(float(b), 0.0, 0.0, p) if b >= 0 else float("nan")
        if b > 0:
            exp_res = radial.mass_expansion(float(b), 0.0, 0.0, p, args.m_terms)
            phi_m, rem = exp_res.value, exp_res.remainder_bound
        else:
            phi_m, rem = float("nan"), float("nan")
        mode_l1 = radial.mode_radius_times_l1(float(b), p)
        trusted = 1 if b <= 13.8 else 0
        lines.append(
            f"{_fmt(b)},{_fmt(phi)},{_fmt(phi_m)},{_fmt(rem)},{_fmt(mode_l1)},{trusted}"
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    _write_manifest("curves", args, [args.out])
    print(f"wrote {args.out} ({args.steps} rows)")
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    prob = _load_problem_or_exit(args.problem)
    kind = mcmc.KIND_INDEPENDENT if args.sampler == "is" else mcmc.KIND_RANDOM_WALK
    cfg = mcmc.ChainConfig(kind=kind, n_iter=args.iters, rw_variance=args.rw_var,
                           q=args.q, seed=args.seed)
    z_est = None
    if args.sampler == "is":
        z_est = partition.estimate_z_polar(prob, args.z_samples, args.seed + 13).z
    trace, diag = mcmc.run_chain(prob, cfg, z_estimate=z_est)
    outputs = [args.out]
    if args.emit_series:
        rows = ["t,norm_x,q_times_r_theta,criterion"]
        for t in range(args.iters):
            rows.append(
                f"{t},{_fmt(trace.norm_x[t])},{_fmt(trace.q_r_theta[t])},{int(trace.criterion[t])}"
            )
        _write_text(args.emit_series, "\n".join(rows) + "\n")
        outputs.append(args.emit_series)
    summary = {
        "sampler": args.sampler,
        "iters": args.iters,
        "q": args.q,
        "first_hit": diag.first_hit,
        "last_violation": diag.last_violation,
        "permanent_hit": diag.permanent_hit,
        "satisfaction_rate": diag.satisfaction_rate,
        "mean": [float(v) for v in diag.running_mean],
        "mean_norm": diag.mean_norm,
        "acceptance_rate": diag.acceptance_rate,
        "tv_constant": diag.tv_constant,
    }
    _write_json(args.out, summary)
    _write_manifest("diagnose", args, outputs)
    print(f"wrote {args.out}")
    return 0


def cmd_tables(args: argparse.Namespace) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []

    # concentration bound P(q, p): exact formula, 4 decimals
    t2 = os.path.join(args.out_dir, "table2.csv")
    rows = ["q,P"]
    for q in (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0):
        rows.append(f"{q:g},{partition.concentration_prob(q, 7):.4f}")
    _write_text(t2, "\n".join(rows) + "\n")
    outputs.append(t2)

    # mode comparison on a fresh seeded instance with a nonzero observation
    rng = np.random.default_rng(args.seed + 1)
    raw = rng.standard_normal(4)
    prob = problem.gen_bernoulli_matrix(4, 7, args.seed, raw * (2.0 / np.linalg.norm(raw)))
    fista = lasso.solve_fista(prob, 20000, 1e-10)
    polar = lasso.solve_polar(prob, args.n_samples, args.seed + 2)
    t1 = os.path.join(args.out_dir, "table1.csv")
    hdr = "method," + ",".join(f"x{i}" for i in range(1, 8)) + ",objective"
    rows = [hdr,
            "fista," + ",".join(_fmt(v) for v in fista.x) + f",{_fmt(fista.objective)}",
            "polar," + ",".join(_fmt(v) for v in polar.x) + f",{_fmt(polar.objective)}"]
    _write_text(t1, "\n".join(rows) + "\n")
    outputs.append(t1)

    # mean estimators from both samplers on the y = 0 instance
    prob0 = problem.gen_bernoulli_matrix(4, 7, args.seed)
    t3 = os.path.join(args.out_dir, "table3.csv")
    rows = ["sampler," + ",".join(f"x{i}" for i in range(1, 8)) + ",mean_norm"]
    for name, kind in (("is", mcmc.KIND_INDEPENDENT), ("rw", mcmc.KIND_RANDOM_WALK)):
        cfg = mcmc.ChainConfig(kind=kind, n_iter=args.iters, seed=args.seed + 3)
        _, diag = mcmc.run_chain(prob0, cfg)
        rows.append(f"{name}," + ",".join(_fmt(v) for v in diag.running_mean)
                    + f",{_fmt(diag.mean_norm)}")
    _write_text(t3, "\n".join(rows) + "\n")
    outputs.append(t3)

    _write_manifest("tables", args, outputs)
    print(f"wrote {', '.join(outputs)}")
    return 0


def cmd_rerun(args: argparse.Namespace) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        print(f"polarlasso: cannot read {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"polarlasso: malformed manifest: {exc}", file=sys.stderr)
        return 2
    return main(manifest["argv"])


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarlasso",
                                 description="Polar geometry of the l1-penalized Gaussian posterior")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a Bernoulli design instance")
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--p", type=int, default=7)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--y-norm", type=float, default=0.0,
                   help="norm of a seeded random observation (0 means y = 0)")
    g.add_argument("--out", default="problem.json")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="compute the l1-penalized mode")
    s.add_argument("--problem", required=True)
    s.add_argument("--method", choices=("polar", "fista", "both"), default="both")
    s.add_argument("--n-samples", type=int, default=100000)
    s.add_argument("--max-iter", type=int, default=20000)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="solution.json")
    s.set_defaults(func=cmd_solve)

    z = sub.add_parser("partition", help="estimate the partition function")
    z.add_argument("--problem", required=True)
    z.add_argument("--method", choices=("polar", "naive", "both"), default="polar")
    z.add_argument("--n-samples", type=int, default=100000)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--shift", action="store_true",
                   help="also estimate through the recentered density")
    z.add_argument("--out", default="partition.json")
    z.set_defaults(func=cmd_partition)

    c = sub.add_parser("curves", help="offset curves: closed form, expansion, mode scale")
    c.add_argument("--beta-min", type=float, default=6.0)
    c.add_argument("--beta-max", type=float, default=45.0)
    c.add_argument("--steps", type=int, default=500)
    c.add_argument("--p", type=int, default=7)
    c.add_argument("--m-terms", type=int, default=17)
    c.add_argument("--out", default="curves.csv")
    c.set_defaults(func=cmd_curves)

    d = sub.add_parser("diagnose", help="run a chain and its convergence diagnosis")
    d.add_argument("--problem", required=True)
    d.add_argument("--sampler", choices=("is", "rw"), default="rw")
    d.add_argument("--iters", type=int, default=1000000)
    d.add_argument("--q", type=float, default=5.0)
    d.add_argument("--rw-var", type=float, default=0.5)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--z-samples", type=int, default=20000,
                   help="sweep size for the ergodicity constant (is sampler)")
    d.add_argument("--emit-series", default=None, metavar="FILE")
    d.add_argument("--out", default="diagnosis.json")
    d.set_defaults(func=cmd_diagnose)

    t = sub.add_parser("tables", help="write the reference tables")
    t.add_argument("--out-dir", default="tables")
    t.add_argument("--seed", type=int, default=1)
    t.add_argument("--n-samples", type=int, default=100000)
    t.add_argument("--iters", type=int, default=1000000)
    t.set_defaults(func=cmd_tables)

    r = sub.add_parser("rerun", help="replay a run manifest byte-identically")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_rerun)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except OSError as exc:
        print(f"polarlasso: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
