"""Batch command-line front end.

Commands
    admissible  --config <path>
    minimize    --config <path> [--out <dir>]
    certify     --config <path> --solution <file> [--out <dir>]
    verify      --config <path> --solution <file> [--out <dir>]
    sweep       --config <path> --axis "param=lo:hi:steps" [--out <dir>]

Exit codes: 0 ok, 1 usage/config error, 2 inadmissible, 3 non-convergence,
4 verification/certification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import degiorgi, inequalities
from .config import ConfigError, RunConfig, load_config
from .exponents import (
    Exponents,
    check_admissibility,
    derive,
    iteration_constants,
)
from .fields import Ball, GridFunction, read_gridfn, write_gridfn
from .minimize import random_perturbations, solve, verify_quasiminimality

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INADMISSIBLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_FAILED = 4


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _admissibility_lines(e: Exponents):
    d = derive(e)
    rep = check_admissibility(d, e)
    lines = [
        f"sigma_bar={_fmt(d.sigma_bar)}",
        f"sigma_star={_fmt(d.sigma_star) if d.sigma_star is not None else 'undefined'}",
        f"p_bar={_fmt(d.p_bar)}",
        f"s_prime={_fmt(d.s_prime)}",
        f"cond_i={rep.cond_i}",
        f"cond_ii={rep.cond_ii}",
        f"cond_iii={rep.cond_iii}",
        f"gamma_bound={_fmt(rep.gamma_bound) if rep.gamma_bound is not None else 'undefined'}",
    ]
    if rep.admissible:
        c = iteration_constants(d, e)
        lines += [
            f"theta1={_fmt(c.theta1)}",
            f"theta2={_fmt(c.theta2)}",
            f"delta1={_fmt(c.delta1)}",
            f"delta2={_fmt(c.delta2)}",
            f"alpha={_fmt(c.alpha)}",
            f"lambda_base={_fmt(c.lambda_base)}",
        ]
    return lines, rep.admissible


def cmd_admissible(args) -> int:
    cfg = load_config(args.config)
    lines, admissible = _admissibility_lines(cfg.exponents)
    print("\n".join(lines))
    return EXIT_OK if admissible else EXIT_INADMISSIBLE


def _out_path(args, cfg: RunConfig, filename: str) -> str:
    out_dir = args.out if args.out else cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, filename)


def cmd_minimize(args) -> int:
    cfg = load_config(args.config)
    init = cfg.initial_field()
    result = solve(cfg.model, cfg.grid, init, cfg.solver)
    sol_path = _out_path(args, cfg, f"{cfg.name}_solution.gridfn")
    write_gridfn(sol_path, result.u)
    phis = random_perturbations(cfg.grid, 32, seed=0)
    qrep = verify_quasiminimality(cfg.model, result.u, 1.0, phis)
    csv_path = _out_path(args, cfg, f"{cfg.name}_minimize.csv")
    with open(csv_path, "w") as fh:
        fh.write("energy,iterations,residual,converged,empirical_Q\n")
        fh.write(
            f"{_fmt(result.final_energy)},{result.iterations},"
            f"{_fmt(result.residual)},{int(result.converged)},{_fmt(qrep.empirical_Q)}\n"
        )
    print(f"solution: {sol_path}")
    print(f"summary: {csv_path}")
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _load_solution(cfg: RunConfig, path) -> GridFunction:
    u = read_gridfn(path)
    if u.grid != cfg.grid:
        raise ConfigError(f"solution grid in {path} does not match the config grid")
    return u


def cmd_certify(args) -> int:
    cfg = load_config(args.config)
    if cfg.certify is None:
        raise ConfigError("missing section [certify]")
    if not check_admissibility(derive(cfg.exponents), cfg.exponents).admissible:
        print("exponents are not admissible; nothing to certify", file=sys.stderr)
        return EXIT_INADMISSIBLE
    u = _load_solution(cfg, args.solution)
    spec = cfg.certify
    C_cal = spec.C_cal
    if C_cal is None:
        probe = degiorgi.certify(
            cfg.model, u, spec.x0, spec.R, cfg.exponents, C_cal=1.0, H=spec.H
        )
        C_cal = degiorgi.calibrate_C(probe.traces)
    cert = degiorgi.certify(
        cfg.model, u, spec.x0, spec.R, cfg.exponents, C_cal=C_cal, H=spec.H
    )
    cert_path = _out_path(args, cfg, f"{cfg.name}_certificate.csv")
    with open(cert_path, "w") as fh:
        fh.write(degiorgi.certificate_csv_header() + "\n")
        fh.write(degiorgi.certificate_csv_row(cert) + "\n")
    trace_path = _out_path(args, cfg, f"{cfg.name}_trace.csv")
    with open(trace_path, "w") as fh:
        fh.write(degiorgi.trace_csv_header() + "\n")
        for row in degiorgi.trace_csv_rows(cert):
            fh.write(row + "\n")
    print(f"certificate: {cert_path}")
    print(f"trace: {trace_path}")
    print(f"d={_fmt(cert.d)} sup_half_ball={_fmt(cert.sup_half_ball)} valid={cert.valid}")
    return EXIT_OK if cert.valid else EXIT_FAILED


def _bump_field(cfg: RunConfig) -> GridFunction:
    """Deterministic tensor-hat bump vanishing on the boundary."""
    grid = cfg.grid
    vals = np.ones(grid.shape)
    for i, axis in enumerate(grid.node_axes()):
        lo, hi = grid.lo[i], grid.hi[i]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        hat = np.clip(1.0 - np.abs(axis - mid) / half, 0.0, None)
        shape = [1] * grid.n
        shape[i] = len(axis)
        vals = vals * hat.reshape(shape)
    return GridFunction(grid, vals)


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if cfg.verify is None:
        raise ConfigError("missing section [verify]")
    u = _load_solution(cfg, args.solution)
    spec = cfg.verify
    d = derive(cfg.exponents)
    reports = []
    reports.append(inequalities.verify_lower_bound(cfg.model, u, spec.subbox))
    reports.append(inequalities.verify_weight_domination(cfg.model, cfg.grid))
    if d.sigma_star is not None:
        bump = _bump_field(cfg)
        reports.append(inequalities.verify_embedding(bump, d))
        reports.append(inequalities.verify_poincare_sobolev(cfg.model, bump, d))
    for k in spec.levels:
        for rho in spec.rhos:
            for R in spec.radii:
                if rho >= R:
                    continue
                reports.append(
                    inequalities.verify_caccioppoli(cfg.model, u, k, rho, R, spec.x0)
                )
    # higher integrability: finiteness of ||u||_{qs'} on the largest ball
    ball = Ball(spec.x0, max(spec.radii))
    hi_norm = inequalities.higher_integrability_norm(u, cfg.exponents, ball)
    hi_rep = inequalities.InequalityReport(
        "higher_integrability", hi_norm, 1.0, hi_norm, math.isfinite(hi_norm),
        {"R": max(spec.radii)},
    )
    reports.append(hi_rep)

    csv_path = _out_path(args, cfg, f"{cfg.name}_inequalities.csv")
    with open(csv_path, "w") as fh:
        fh.write(inequalities.report_csv_header() + "\n")
        for rep in reports:
            fh.write(inequalities.report_csv_row(rep) + "\n")
    print(f"report: {csv_path}")
    all_ok = all(rep.passed for rep in reports)
    return EXIT_OK if all_ok else EXIT_FAILED


_SWEEP_AXES = ("gamma", "q", "s", "r", "p")


def _sweep_exponents(e: Exponents, axis: str, value: float) -> Exponents | None:
    try:
        if axis == "gamma":
            return Exponents(e.n, e.p, e.q, value, e.r, e.s)
        if axis == "q":
            return Exponents(e.n, e.p, value, max(e.gamma, value), e.r, e.s)
        if axis == "s":
            return Exponents(e.n, e.p, e.q, e.gamma, e.r, value)
        if axis == "r":
            return Exponents(e.n, e.p, e.q, e.gamma, (value,) * e.n, e.s)
        if axis == "p":
            q = max(e.q, value)
            return Exponents(e.n, (value,) * e.n, q, max(e.gamma, q), e.r, e.s)
    except ValueError:
        return None
    return None


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    try:
        axis, rng = args.axis.split("=", 1)
        lo_s, hi_s, steps_s = rng.split(":")
        lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
    except ValueError:
        print(f"malformed axis spec {args.axis!r}; expected param=lo:hi:steps", file=sys.stderr)
        return EXIT_USAGE
    axis = axis.strip()
    if axis not in _SWEEP_AXES:
        print(f"unknown sweep axis {axis!r}; choose from {', '.join(_SWEEP_AXES)}", file=sys.stderr)
        return EXIT_USAGE
    if steps < 1:
        print("steps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    values = [lo] if steps == 1 else [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]

    rows = ["axis,value,cond_i,cond_ii,cond_iii,theta1,theta2,delta1,alpha"]
    for v in values:
        exps = _sweep_exponents(cfg.exponents, axis, v)
        if exps is None:
            rows.append(f"{axis},{_fmt(v)},0,0,0,nan,nan,nan,nan")
            continue
        d = derive(exps)
        rep = check_admissibility(d, exps)
        if rep.admissible:
            c = iteration_constants(d, exps)
            rows.append(
                f"{axis},{_fmt(v)},1,1,1,{_fmt(c.theta1)},{_fmt(c.theta2)},"
                f"{_fmt(c.delta1)},{_fmt(c.alpha)}"
            )
        else:
            rows.append(
                f"{axis},{_fmt(v)},{int(rep.cond_i)},{int(rep.cond_ii)},"
                f"{int(rep.cond_iii)},nan,nan,nan,nan"
            )
    text = "\n".join(rows)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{cfg.name}_sweep.csv")
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anibound",
        description="Quasi-minimizers of anisotropic energies and their L-infinity certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, solution=False, axis=False):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        if solution:
            p.add_argument("--solution", required=True)
        if axis:
            p.add_argument("--axis", required=True)
        p.set_defaults(func=func)

    add("admissible", cmd_admissible)
    add("minimize", cmd_minimize)
    add("certify", cmd_certify, solution=True)
    add("verify", cmd_verify, solution=True)
    add("sweep", cmd_sweep, axis=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
