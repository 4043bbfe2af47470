"""Derivative-free Nelder-Mead minimisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray


@dataclass
class SimplexResult:
    x: NDArray[np.float64]
    fun: float
    evaluations: int
    iterations: int
    converged: bool
    reason: str


def nelder_mead(f: Callable[[NDArray[np.float64]], float], x0: ArrayLike, step: float | ArrayLike,
                *, f_goal: float = -np.inf, x_tol: float = 1e-10, max_evals: int = 2000,
                alpha: float = 1.0, gamma: float = 2.0, rho: float = 0.5,
                sigma: float = 0.5) -> SimplexResult:
    """Minimise ``f`` from ``x0`` with an axis-aligned initial simplex of edge ``step``.

    Stops when the best value drops below ``f_goal``, when the simplex
    diameter falls under ``x_tol``, or after ``max_evals`` evaluations
    (``converged=False``).
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    dim = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,))
    pts = np.vstack([x0] + [x0 + steps[i] * np.eye(dim)[i] for i in range(dim)])
    nev = 0

    def ev(x):
        nonlocal nev
        nev += 1
        return float(f(x))

    vals = np.array([ev(p) for p in pts])
    it = 0
    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        diam = max(np.abs(p - pts[0]).max() for p in pts[1:])
        if vals[0] < f_goal:
            return SimplexResult(pts[0].copy(), vals[0], nev, it, True, "f_goal")
        if diam < x_tol:
            return SimplexResult(pts[0].copy(), vals[0], nev, it, True, "x_tol")
        if nev >= max_evals:
            return SimplexResult(pts[0].copy(), vals[0], nev, it, False, "max_evals")
        it += 1
        centroid = pts[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - pts[-1])
        fr = ev(xr)
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = ev(xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = ev(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (pts[-1] - centroid)
            fc = ev(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        pts[1:] = pts[0] + sigma * (pts[1:] - pts[0])
        vals[1:] = [ev(p) for p in pts[1:]]
