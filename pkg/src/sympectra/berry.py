"""Berry phases of the minimum-variation BMD and degeneracy detection.

A closed loop returns the factors to themselves up to a diagonal phase
matrix; its arguments are the accrued phases. Over a family of loops sweeping
a sphere the phases are continued in the sweep angle, and a net change
between the two poles certifies a degeneracy inside (the converse does not
hold: a zero net phase proves nothing). For real couplings the holonomy is
``+-1`` and a sign flip around a planar loop plays the same role.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateSpectrum, LoopThroughDegeneracy, NoConvergence, NonContinuableTrace, NonConvergentStep
from .linalg import SymplecticMatrix
from .simplex import nelder_mead
from .smooth import BmdPath, MatrixPath, smooth_bmd

ParamEvaluator = Callable[[Sequence[float]], "SymplecticMatrix | np.ndarray"]


def wrap(phase: ArrayLike) -> NDArray[np.float64]:
    """Map angles to ``(-pi, pi]``."""
    p = np.asarray(phase, dtype=float)
    return np.pi - np.mod(np.pi - p, 2 * np.pi)


@dataclass(frozen=True)
class ParameterLoop:
    """Closed loop ``t in [0, 1] -> S(t)``."""

    evaluator: Callable[[float], "SymplecticMatrix | np.ndarray"]
    closure_tol: float = 1e-10

    def path(self) -> MatrixPath:
        return MatrixPath(self.evaluator, 0.0, 1.0)

    def check_closed(self) -> None:
        def mat(t):
            S = self.evaluator(t)
            return S.matrix if isinstance(S, SymplecticMatrix) else np.asarray(S)
        gap = np.linalg.norm(mat(0.0) - mat(1.0))
        if gap > self.closure_tol * max(1.0, np.linalg.norm(mat(0.0))):
            raise ValueError(f"loop is not closed (|S(0) - S(1)| = {gap:.2e})")


def circle_loop(evaluate: ParamEvaluator, center: Sequence[float], radius: float) -> ParameterLoop:
    """Circle in the plane of the first two parameters, counter-clockwise from ``+x``."""
    c = np.asarray(center, dtype=float)

    def ev(t):
        phi = 2 * np.pi * t
        return evaluate(c + radius * np.array([np.cos(phi), np.sin(phi)]))

    return ParameterLoop(ev)


def parallel_loop(evaluate: ParamEvaluator, center: Sequence[float], radius: float,
                  theta: float) -> ParameterLoop:
    """Parallel at polar angle ``theta`` of the sphere around ``center``."""
    c = np.asarray(center, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)

    def ev(t):
        phi = 2 * np.pi * t
        return evaluate(c + radius * np.array([np.cos(phi) * st, np.sin(phi) * st, ct]))

    return ParameterLoop(ev)


@dataclass
class LoopHolonomy:
    """End-to-start comparison of a loop continuation.

    ``U_hol = U(0)^H U(1)`` and ``V_hol = V(0)^H V(1)``; for distinct singular
    values both equal the same diagonal phase matrix. ``phases`` are its
    arguments in ``(-pi, pi]``, one per column (pairs duplicated).
    """

    U_hol: NDArray[np.complex128]
    V_hol: NDArray[np.complex128]
    phases: NDArray[np.float64]
    bmd: BmdPath | None = field(default=None, repr=False)

    @property
    def signs(self) -> NDArray[np.float64]:
        """Real parts of the holonomy diagonal (``+-1`` for real couplings)."""
        return np.real(np.diag(self.U_hol))


def loop_holonomy(loop: ParameterLoop, eta: float = 1e-2, k: int | None = None,
                  **kwargs) -> LoopHolonomy:
    try:
        bmd = smooth_bmd(loop.path(), eta, k, **kwargs)
    except (DegenerateSpectrum, NonConvergentStep) as exc:
        raise LoopThroughDegeneracy(f"loop continuation failed: {exc}") from exc
    first, last = bmd.factors[0], bmd.factors[-1]
    Uh = first.U.conj().T @ last.U
    Vh = first.V.conj().T @ last.V
    return LoopHolonomy(Uh, Vh, wrap(np.angle(np.diag(Uh))), bmd)


def loop_phase(loop: ParameterLoop, eta: float = 1e-2, k: int | None = None,
               **kwargs) -> NDArray[np.float64]:
    """Phases accrued by the ``2k`` factor columns around ``loop``."""
    return loop_holonomy(loop, eta, k, **kwargs).phases


@dataclass
class BerryTrace:
    """Accrued phases continued over the sphere's parallels.

    ``alphas`` has shape ``(len(thetas), 2k)``; ``alphas[0] == 0``.
    """

    thetas: NDArray[np.float64]
    alphas: NDArray[np.float64]

    def net(self) -> NDArray[np.float64]:
        return self.alphas[-1] - self.alphas[0]

    def flagged(self, tol: float = 1e-3) -> list[int]:
        """1-based indices ``j <= k`` whose phase does not return to zero."""
        k = self.alphas.shape[1] // 2
        return [j + 1 for j in range(k) if abs(self.net()[j]) > tol]

    def write_csv(self, path) -> None:
        m = self.alphas.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta[rad]"] + [f"alpha_{j + 1}[rad]" for j in range(m)])
            for t, a in zip(self.thetas, self.alphas):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in a])


@dataclass(frozen=True)
class SphereSpec:
    """Sphere ``center + radius (cos phi sin theta, sin phi sin theta, cos theta)``."""

    center: tuple[float, float, float]
    radius: float
    evaluator: ParamEvaluator
    theta_grid: NDArray[np.float64] = field(default_factory=lambda: np.linspace(0, np.pi, 41))
    phi_samples: int = 0  # unused: parallels are continued adaptively

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        g = np.asarray(self.theta_grid, dtype=float)
        if g[0] != 0.0 or g[-1] != np.pi or np.any(np.diff(g) <= 0):
            raise ValueError("theta grid must increase from 0 to pi")


def sphere_scan(spec: SphereSpec, eta: float = 1e-2, k: int | None = None, *,
                max_jump: float = np.pi / 2, max_depth: int = 8, workers: int = 1,
                **kwargs) -> BerryTrace:
    """Continue loop phases from the north pole (``theta = 0``) to the south pole.

    Adjacent parallels whose raw phases differ by more than ``max_jump`` are
    bisected until the step is resolved. With ``workers > 1`` the parallels
    of the initial grid are continued concurrently; the result is identical.
    """
    cache: dict[float, NDArray[np.float64]] = {}

    def raw(theta: float) -> NDArray[np.float64]:
        if theta not in cache:
            if np.sin(theta) < 1e-12:
                cache[theta] = None
            else:
                loop = parallel_loop(spec.evaluator, spec.center, spec.radius, theta)
                try:
                    cache[theta] = loop_phase(loop, eta, k, **kwargs)
                except LoopThroughDegeneracy as exc:
                    raise LoopThroughDegeneracy(str(exc), theta=theta) from exc
        return cache[theta]

    grid = list(np.asarray(spec.theta_grid, dtype=float))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(raw, grid))
    first = next(raw(t) for t in grid if raw(t) is not None)
    zero = np.zeros_like(first)

    def value(theta):
        r = raw(theta)
        return zero if r is None else r

    thetas, alphas = [grid[0]], [zero.copy()]
    queue = grid[1:]
    depth = {t: 0 for t in grid}
    while queue:
        t_next = queue[0]
        t_prev = thetas[-1]
        step = wrap(value(t_next) - value(t_prev))
        if np.abs(step).max() > max_jump:
            d = max(depth.get(t_prev, 0), depth.get(t_next, 0)) + 1
            if d > max_depth:
                raise NonContinuableTrace(
                    f"phase jump {np.abs(step).max():.3f} rad between theta={t_prev:.6g} "
                    f"and {t_next:.6g} persists after {max_depth} bisections")
            mid = 0.5 * (t_prev + t_next)
            depth[mid] = d
            queue.insert(0, mid)
            continue
        queue.pop(0)
        thetas.append(t_next)
        alphas.append(alphas[-1] + step)
    return BerryTrace(np.array(thetas), np.array(alphas))


@dataclass
class DegeneracyReport:
    """Result of a simplex search for coincident singular values.

    ``pair`` is the 1-based index ``j`` of ``(d_j, d_{j+1})``.
    """

    pair: int
    location: NDArray[np.float64]
    gap: float
    evaluations: int = 0
    converged: bool = True
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"pair": self.pair, "location": [float(x) for x in self.location],
                "gap": float(self.gap), "evaluations": int(self.evaluations)}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def singular_gap_fn(evaluate: ParamEvaluator, pair_index: int) -> Callable[[Sequence[float]], float]:
    """``p -> d_j(p) - d_{j+1}(p)`` for 1-based ``j``, memoised by parameter vector.

    Only singular values are needed, so the function stays defined at the
    degeneracy itself where the factors are not.
    """
    cache: dict[tuple, float] = {}

    def gap(p):
        key = tuple(float(x) for x in p)
        if key not in cache:
            S = evaluate(np.array(key))
            M = S.matrix if isinstance(S, SymplecticMatrix) else np.asarray(S)
            s = np.linalg.svd(M, compute_uv=False)
            cache[key] = float(s[pair_index - 1] - s[pair_index])
        return cache[key]

    return gap


def locate_degeneracy(gap_fn: Callable[[Sequence[float]], float], seed: Sequence[float],
                      pair_index: int, *, step: float | Sequence[float] = 0.025,
                      gap_goal: float = 1e-8, x_tol: float = 1e-10,
                      max_evals: int = 2000) -> DegeneracyReport:
    """Nelder-Mead search for ``gap_fn == 0`` starting at ``seed``.

    ``step`` is the initial simplex edge. Raises :class:`NoConvergence`
    (carrying the best report) when ``max_evals`` is exhausted.
    """
    res = nelder_mead(gap_fn, seed, step, f_goal=gap_goal, x_tol=x_tol, max_evals=max_evals)
    report = DegeneracyReport(pair_index, res.x, max(res.fun, 0.0), res.evaluations,
                              res.converged, {"stop": res.reason})
    if not res.converged:
        raise NoConvergence(f"no convergence after {res.evaluations} evaluations "
                            f"(best gap {res.fun:.3e})", report)
    return report
