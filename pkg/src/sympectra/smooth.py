"""Joint-minimum-variation Bloch-Messiah continuation along a real parameter.

The predictor is a fresh decomposition at the next sample; the corrector is
the diagonal phase gauge that brings both unitary factors as close as possible
to the previous ones. ``mvd_generators`` and ``integrate_mvd`` give the
continuous counterpart (skew-Hermitian generators ``H``, ``K``) used as an
independent check on the discrete scheme.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bmd import BmdFactors, bmd_from_svd
from .errors import (AmbiguousPhase, DegenerateSpectrum, NonConvergentStep,
                     NotComplexSymmetric, StructureViolation)
from .linalg import DEFAULT_GAP_TOL, ComplexMatrix, PhaseMatrix, SymplecticMatrix, swap_form

Evaluator = Callable[[float], "SymplecticMatrix | np.ndarray"]


@dataclass(frozen=True)
class MatrixPath:
    """``omega -> S(omega)`` on ``[a, b]``; ``derivative`` is optional."""

    evaluator: Evaluator
    a: float
    b: float
    derivative: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"empty parameter interval [{self.a}, {self.b}]")

    def __call__(self, omega: float) -> np.ndarray:
        S = self.evaluator(omega)
        return S.matrix if isinstance(S, SymplecticMatrix) else np.asarray(S, dtype=np.complex128)

    def dot(self, omega: float, rel_step: float = 1e-6) -> np.ndarray:
        """Derivative; central differences when no analytic one was supplied."""
        if self.derivative is not None:
            return np.asarray(self.derivative(omega), dtype=np.complex128)
        h = rel_step * max(1.0, abs(omega), self.b - self.a)
        return (self(omega + h) - self(omega - h)) / (2 * h)


@dataclass
class BmdPath:
    """Samples of a joint-minimum-variation BMD.

    ``step_stats[k]`` holds ``(||U_k - U_{k+1}||_F, ||V_k - V_{k+1}||_F,
    ||D_k - D_{k+1}||_inf)``; ``phases[k]`` the corrector phases applied at
    sample ``k`` (zero at the start).
    """

    omegas: NDArray[np.float64]
    factors: list[BmdFactors]
    step_stats: NDArray[np.float64]
    phases: NDArray[np.float64] = field(default=None)
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def d1(self) -> NDArray[np.float64]:
        return np.array([f.d1 for f in self.factors])

    @property
    def U(self) -> NDArray[np.complex128]:
        return np.array([f.U for f in self.factors])

    @property
    def V(self) -> NDArray[np.complex128]:
        return np.array([f.V for f in self.factors])

    def write_csv(self, path) -> None:
        k = self.factors[0].k
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega"] + [f"d_{j + 1}" for j in range(k)])
            for om, f in zip(self.omegas, self.factors):
                w.writerow([repr(float(om))] + [repr(float(x)) for x in f.d1])

    def to_json(self) -> dict:
        return {"omegas": [float(x) for x in self.omegas],
                "factors": [f.to_json() for f in self.factors]}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


def procrustes_phase(U_prev: ArrayLike, V_prev: ArrayLike,
                     U_hat: ArrayLike, V_hat: ArrayLike) -> PhaseMatrix:
    """Gauge minimising ``||U_prev - U_hat T||_F^2 + ||V_prev - V_hat T||_F^2``.

    Column ``j`` and its partner share one phase, so the optimum is
    ``theta_j = arg z_j`` with ``z_j`` the sum of the four column overlaps.
    """
    U_prev, V_prev = np.asarray(U_prev), np.asarray(V_prev)
    U_hat, V_hat = np.asarray(U_hat), np.asarray(V_hat)
    z = (np.einsum("ij,ij->j", U_hat.conj(), U_prev)
         + np.einsum("ij,ij->j", V_hat.conj(), V_prev))
    k = z.size // 2
    zj = z[:k] + z[k:]
    if np.any(np.abs(zj) < 1e-12):
        raise AmbiguousPhase(f"column pair {int(np.argmin(np.abs(zj)))} is orthogonal "
                             "to its predecessor")
    return PhaseMatrix(np.angle(zj))


def procrustes_objective(U_prev, V_prev, U_hat, V_hat, theta: PhaseMatrix) -> float:
    e = theta.diagonal()
    return float(np.linalg.norm(U_prev - U_hat * e) ** 2 + np.linalg.norm(V_prev - V_hat * e) ** 2)


def _variation(prev: BmdFactors, new: BmdFactors) -> NDArray[np.float64]:
    return np.array([np.linalg.norm(prev.U - new.U), np.linalg.norm(prev.V - new.V),
                     np.abs(prev.d - new.d).max()])


def smooth_bmd(path: MatrixPath, eta: float = 1e-2, k: int | None = None, *,
               gap_tol: float = DEFAULT_GAP_TOL, h0: float | None = None,
               h_min: float | None = None, initial: BmdFactors | None = None,
               max_steps: int = 2_000_000) -> BmdPath:
    """Minimum-variation BMD of ``path`` sampled adaptively on ``[a, b]``.

    Steps are halved while any of the three per-step variations exceeds
    ``eta`` and grown by 1.5 when all stay below ``eta / 4``. ``initial``
    overrides the decomposition at ``a`` (it fixes the constant gauge).

    Raises :class:`DegenerateSpectrum` (with ``omega`` and ``partial`` set)
    when tracked singular values collide, :class:`NonConvergentStep` when the
    step underflows ``h_min``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    span = path.b - path.a
    h = span / 1000 if h0 is None else h0
    h_min = 1e-12 * span if h_min is None else h_min

    def decompose(om: float) -> BmdFactors:
        try:
            return bmd_from_svd(path(om), gap_tol, k)
        except DegenerateSpectrum as exc:
            exc.omega = om
            raise

    prev = initial if initial is not None else decompose(path.a)
    omegas, factors, stats, phases = [path.a], [prev], [], [np.zeros(prev.k)]
    w, rejected = path.a, 0

    def partial() -> BmdPath:
        return BmdPath(np.array(omegas), list(factors), np.array(stats).reshape(-1, 3),
                       np.array(phases), rejected)

    while w < path.b:
        if len(omegas) > max_steps:
            raise NonConvergentStep(f"exceeded {max_steps} steps", partial())
        h = min(h, path.b - w)
        w_new = path.b if path.b - (w + h) <= 1e-14 * span else w + h
        try:
            hat = decompose(w_new)
            theta = procrustes_phase(prev.U, prev.V, hat.U, hat.V)
            new = hat.with_phase(theta)
            var = _variation(prev, new)
            ok = var.max() <= eta
        except DegenerateSpectrum as exc:
            exc.partial = partial()
            raise
        except (AmbiguousPhase, StructureViolation):
            ok = False
        if not ok:
            h *= 0.5
            rejected += 1
            if h < h_min:
                raise NonConvergentStep(f"step size underflow at omega={w:.12g}", partial())
            continue
        omegas.append(w_new)
        factors.append(new)
        stats.append(var)
        phases.append(theta.thetas)
        prev, w = new, w_new
        if var.max() < eta / 4:
            h *= 1.5
    return partial()


@dataclass(frozen=True)
class MvdGenerators:
    """Skew-Hermitian generators with ``dU/dw = U H`` and ``dV/dw = V K``."""

    H: ComplexMatrix
    K: ComplexMatrix


def mvd_generators(U: ArrayLike, V: ArrayLike, sigma: ArrayLike, A_dot: ArrayLike) -> MvdGenerators:
    """Generators of the joint-minimum-variation SVD flow.

    ``sigma`` need not be sorted but must be positive and distinct.
    """
    U, V = np.asarray(U), np.asarray(V)
    s = np.asarray(sigma, dtype=float)
    C = (U.conj().T @ np.asarray(A_dot) @ V).astype(np.complex128)
    s2 = s ** 2
    den = s2[None, :] - s2[:, None]  # sigma_l^2 - sigma_j^2 at [j, l]
    off = ~np.eye(s.size, dtype=bool)
    if np.any(np.abs(den[off]) < 1e-12 * s2.max()):
        j, l = np.argwhere((np.abs(den) < 1e-12 * s2.max()) & off)[0]
        raise DegenerateSpectrum(int(min(j, l)), float(abs(s[j] - s[l])))
    den = np.where(off, den, 1.0)
    Ch = C.conj().T
    H = (s[None, :] * C + s[:, None] * Ch) / den
    K = (s[None, :] * Ch + s[:, None] * C) / den
    diag = 0.5j * np.imag(np.diag(C)) / s
    H[~off] = diag
    K[~off] = -diag
    return MvdGenerators(H, K)


def integrate_mvd(path: MatrixPath, U0: ArrayLike, sigma0: ArrayLike, V0: ArrayLike,
                  a: float, b: float, h: float = 1e-4):
    """Classical RK4 on ``(U, V, sigma)`` from ``a`` to ``b``.

    Returns ``(U, sigma, V)`` at ``b``.
    """
    U = np.array(U0, dtype=np.complex128)
    V = np.array(V0, dtype=np.complex128)
    s = np.array(sigma0, dtype=float)
    steps = max(1, int(np.ceil(abs(b - a) / h - 1e-9)))
    dt = (b - a) / steps

    def rhs(w, U, V, s):
        Ad = path.dot(w)
        g = mvd_generators(U, V, s, Ad)
        C = U.conj().T @ Ad @ V
        return U @ g.H, V @ g.K, np.real(np.diag(C))

    w = a
    for _ in range(steps):
        k1 = rhs(w, U, V, s)
        k2 = rhs(w + dt / 2, U + dt / 2 * k1[0], V + dt / 2 * k1[1], s + dt / 2 * k1[2])
        k3 = rhs(w + dt / 2, U + dt / 2 * k2[0], V + dt / 2 * k2[1], s + dt / 2 * k2[2])
        k4 = rhs(w + dt, U + dt * k3[0], V + dt * k3[1], s + dt * k3[2])
        U = U + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        V = V + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        s = s + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        w += dt
    return U, s, V


def _swap_symmetry_defect(S: np.ndarray) -> float:
    A = S @ swap_form(S.shape[0] // 2)
    return float(np.linalg.norm(A - A.T) / max(np.linalg.norm(A), 1e-300))


def _pair_signs(k: int) -> NDArray[np.float64]:
    return np.concatenate([np.ones(k), -np.ones(k)])


def takagi_gauge(f: BmdFactors) -> BmdFactors:
    """Rephase ``f`` so that ``P V J = conj(U)`` with ``P = [[0, I], [I, 0]]``.

    ``J = diag(I_k, -I_k)`` is forced by the block structure of the factors:
    matching a tracked column fixes its partner up to that sign. Only
    meaningful when ``S P`` is complex symmetric; the gauge is then a square
    root of ``diag((P V J)^H conj(U))``.
    """
    P = swap_form(f.n)
    phi = np.einsum("ij,ij->j", (P @ f.V).conj(), f.U.conj()) * _pair_signs(f.k)
    k = f.k
    if np.any(np.abs(np.abs(phi) - 1) > 1e-6) or np.any(np.abs(phi[:k] - phi[k:]) > 1e-6):
        raise NotComplexSymmetric("factors do not admit a Takagi gauge")
    return f.with_phase(PhaseMatrix(0.5 * np.angle(phi[:k])))


def takagi_consistency_check(path: MatrixPath, bmd: BmdPath, tol: float = 1e-8,
                             sym_tol: float = 1e-9) -> bool:
    """True iff ``P V(w_k) J = conj(U(w_k))`` within ``tol`` at every sample.

    ``S(w) P`` must be complex symmetric along the path; its Takagi factor is
    then ``U`` and the right singular factor ``P V J`` (see :func:`takagi_gauge`).
    """
    P = swap_form(bmd.factors[0].n)
    J = _pair_signs(bmd.factors[0].k)
    worst = 0.0
    for om, f in zip(bmd.omegas, bmd.factors):
        defect = _swap_symmetry_defect(path(om))
        if defect > sym_tol:
            raise NotComplexSymmetric(f"S P is not symmetric at omega={om:.6g} "
                                      f"(relative defect {defect:.2e})")
        worst = max(worst, float(np.linalg.norm((P @ f.V) * J - f.U.conj())))
    return worst <= tol
