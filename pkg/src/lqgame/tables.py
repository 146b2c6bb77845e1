"""CSV layouts for solutions, trajectories, bounds and sweeps.

Numbers are written with at most 12 significant digits so repeated runs are
byte-identical. Player columns are numbered from 1.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(header, rows))


def _stage_header(spec):
    mmax = max(spec.m)
    return (["t", "player"]
            + [f"K_{k}" for k in range(mmax * spec.n)]
            + [f"L_{k}" for k in range(mmax)]
            + [f"Pdiag_{k}" for k in range(spec.n)]
            + [f"S_{k}" for k in range(spec.n)]
            + ["w"])


def _stage_row(spec, t, i, K, L, P, S, w):
    mmax = max(spec.m)
    k = list(np.asarray(K).ravel()) + [""] * ((mmax - spec.m[i]) * spec.n)
    l = list(np.asarray(L).ravel()) + [""] * (mmax - spec.m[i])
    return [t, i + 1] + k + l + list(np.diag(P)) + list(np.asarray(S).ravel()) + [w]


def finite_solution_table(spec, sol):
    header = _stage_header(spec) + ["cond_H"]
    rows = []
    for t in range(1, sol.T + 1):
        for i in range(spec.N):
            rows.append(_stage_row(spec, t, i, sol.K[t - 1][i], sol.L[t - 1][i], sol.P[t - 1][i],
                                   sol.S[t - 1][i], sol.w[t - 1][i]) + [sol.cond[t - 1]])
    return header, rows


def stationary_table(spec, sol):
    header = _stage_header(spec)
    rows = [_stage_row(spec, "inf", i, sol.Kstar[i], sol.Lstar[i], sol.Pstar[i], sol.Sstar[i], sol.wstar[i])
            for i in range(spec.N)]
    return header, rows


def stationary_diagnostics(spec, sol):
    rows = [["iterations", sol.iterations], ["converged", sol.converged],
            ["lambda", sol.lam], ["stable", sol.stable],
            ["last_step", sol.history[-1] if sol.history else float("nan")]]
    for i, res in enumerate(sol.residuals):
        for key, val in res.items():
            rows.append([f"residual_{key}_{i + 1}", val])
    return ["key", "value"], rows


def trajectory_table(spec, traj):
    header = (["t"] + [f"x_{k}" for k in range(spec.n)] + [f"y_{k}" for k in range(spec.p)]
              + [f"u{i + 1}_{k}" for i in range(spec.N) for k in range(spec.m[i])]
              + [f"cost_{i + 1}" for i in range(spec.N)])
    rows = []
    for t in range(traj.tau):
        u = [v for i in range(spec.N) for v in traj.inputs[i][t]]
        rows.append([t + 1] + list(traj.states[t]) + list(traj.outputs[t]) + u + list(traj.stage_costs[t]))
    return header, rows


def totals_table(spec, traj):
    return (["player", "total", "tail_bound", "tau"],
            [[i + 1, traj.totals[i], traj.tail_bounds[i], traj.tau] for i in range(spec.N)])


def bound_table(report):
    header = (["player"] + [f"T_{i + 1}" for i in range(len(report.horizons))]
              + ["T_h", "epsilon", "b", "d", "lambda", "M", "g_eps", "G_i1", "G_i2", "theta", "bound",
                 "applicable"])
    rows = [[i + 1, *report.horizons, report.T_h, report.epsilon, report.b, report.d, report.lam,
             report.M, report.g_eps, report.G_i1[i], report.G_i2[i], report.theta[i], report.bound[i],
             report.applicable] for i in range(len(report.theta))]
    return header, rows


def sweep_table(spec, rows_in):
    N, n = spec.N, spec.n
    header = ["T"]
    for i in range(N):
        header += [f"K{i + 1}_{k}" for k in range(spec.m[i] * n)] + [f"L{i + 1}_{k}" for k in range(spec.m[i])]
    for i in range(N):
        header += [f"J_tilde_{i + 1}", f"J_{i + 1}", f"gap_{i + 1}", f"bound_{i + 1}"]
    rows = []
    for r in rows_in:
        row = [r.T]
        for i in range(N):
            row += list(r.gains[i].ravel()) + list(r.offsets[i].ravel())
        for i in range(N):
            bound = r.bound[i] if r.bound is not None else None
            row += [r.J_tilde[i], r.J[i], r.gap[i], bound]
        rows.append(row)
    return header, rows
