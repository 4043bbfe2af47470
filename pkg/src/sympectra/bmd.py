"""Bloch-Messiah decomposition of a conjugate-symplectic matrix from a plain SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateSpectrum, IllConditionedPhase, StructureViolation
from .linalg import (DEFAULT_GAP_TOL, ComplexMatrix, PhaseMatrix, SymplecticMatrix,
                     apply_phase, as_matrix, check_gaps, matrix_from_json, matrix_to_json)

PAIR_TOL = 1e-8
UNIT_TOL = 1e-12
PHASE_FLOOR = 1e-8
RELATION_TOL = 1e-6


@dataclass(frozen=True)
class BmdFactors:
    """``S = U diag(d1, 1/d1) V^dagger`` with unitary conjugate-symplectic U, V.

    Columns of ``U`` and ``V`` are laid out ``[tracked | partners]``: column
    ``j`` belongs to ``d1[j]`` and column ``k + j`` to ``1 / d1[j]``. For a full
    decomposition ``k == n`` and the factors are square; a reduced one keeps
    only the ``k`` dominant pairs.
    """

    U: ComplexMatrix
    d1: NDArray[np.float64]
    V: ComplexMatrix

    @property
    def n(self) -> int:
        return self.U.shape[0] // 2

    @property
    def k(self) -> int:
        return self.d1.size

    @property
    def reduced(self) -> bool:
        return self.k < self.n

    @property
    def d(self) -> NDArray[np.float64]:
        """Diagonal of ``D = diag(D1, D1^{-1})``."""
        return np.concatenate([self.d1, 1.0 / self.d1])

    def reconstruct(self) -> ComplexMatrix:
        """Rank-``2k`` product ``U D V^dagger`` (exact input when ``k == n``)."""
        return (self.U * self.d) @ self.V.conj().T

    def with_phase(self, theta: PhaseMatrix) -> "BmdFactors":
        return BmdFactors(apply_phase(self.U, theta), self.d1, apply_phase(self.V, theta))

    def to_json(self) -> dict:
        return {"U": matrix_to_json(self.U), "V": matrix_to_json(self.V),
                "d1": [float(x) for x in self.d1]}

    @classmethod
    def from_json(cls, obj: dict) -> "BmdFactors":
        return cls(matrix_from_json(obj["U"]), np.asarray(obj["d1"], dtype=float),
                   matrix_from_json(obj["V"]))


def extract_theta(U: ArrayLike) -> NDArray[np.float64]:
    """Pairing phases of a ``[tracked | partners]`` column layout.

    Returns ``theta`` in ``(-pi, pi]`` with
    ``[U11; -U21] = [U22; U12] diag(e^{i theta})``, read off the diagonal of
    ``U22^H U11 - U12^H U21``.
    """
    M = np.asarray(U, dtype=np.complex128)
    n = M.shape[0] // 2
    k = M.shape[1] // 2
    top, part = M[:, :k], M[:, k:]
    e = (np.einsum("ij,ij->j", part[n:].conj(), top[:n])
         - np.einsum("ij,ij->j", part[:n].conj(), top[n:]))
    small = np.abs(e) < PHASE_FLOOR
    if np.any(small):
        raise IllConditionedPhase(f"pairing phase undefined for column {int(np.argmax(small))} "
                                  f"(|e| = {np.abs(e).min():.2e})")
    theta = np.angle(e)
    theta[theta <= -np.pi] = np.pi
    return theta


def _partner_columns(s: NDArray[np.float64], n: int, k: int) -> NDArray[np.int64]:
    # Nearest reciprocal in log-space among the lower half.
    logs = np.log(s)
    lower = np.arange(n, 2 * n)
    partners = np.empty(k, dtype=np.int64)
    for j in range(k):
        i = lower[np.argmin(np.abs(logs[lower] + logs[j]))]
        if abs(s[j] * s[i] - 1.0) > PAIR_TOL * max(1.0, s[j] * s[i]):
            raise StructureViolation(
                f"singular value {s[j]:.12g} has no reciprocal partner "
                f"(closest {s[i]:.12g})")
        partners[j] = i
    if np.unique(partners).size != k:
        raise StructureViolation("reciprocal pairing is not one-to-one")
    return partners


def bmd_from_svd(S: SymplecticMatrix | ArrayLike, gap_tol: float = DEFAULT_GAP_TOL,
                 k: int | None = None) -> BmdFactors:
    """Bloch-Messiah factors of a conjugate-symplectic matrix.

    Any backend SVD is permuted to the ``diag(D1, D1^{-1})`` layout, then the
    pairing phases are split symmetrically between each column and its
    partner so both factors acquire the ``[[A, B], [-B, A]]`` block form.

    With ``k`` given only the ``k`` largest singular values (and their
    reciprocal partners) are returned and only they need to be distinct.
    """
    M = S.matrix if isinstance(S, SymplecticMatrix) else as_matrix(S, even=True)
    n = M.shape[0] // 2
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")

    Uall, s, Vh = np.linalg.svd(M)
    order = np.argsort(-s, kind="stable")
    Uall, s, Vall = Uall[:, order], s[order], Vh.conj().T[:, order]

    # The gap between the smallest tracked value and the next one is always
    # checked; with k == n that is d_n against 1/d_n.
    top = range(k)
    bottom = range(2 * n - 1 - k, 2 * n - 1)
    try:
        check_gaps(s, gap_tol, pairs=sorted(set(top) | set(bottom)))
    except DegenerateSpectrum as exc:
        # A collision among the reciprocals mirrors one among the d_j.
        if exc.pair >= n:
            exc.pair = 2 * n - 2 - exc.pair
        raise
    if s[k - 1] < 1.0 - UNIT_TOL:
        raise StructureViolation(f"tracked singular value {s[k - 1]:.12g} is below 1")

    cols = np.concatenate([np.arange(k), _partner_columns(s, n, k)])
    U, V = Uall[:, cols], Vall[:, cols]

    theta = extract_theta(U)
    half = np.exp(-0.5j * theta)
    gauge = np.concatenate([half, half.conj()])
    U = U * gauge
    V = V * gauge

    resid = max(np.abs(U[:n, :k] - U[n:, k:]).max(), np.abs(U[n:, :k] + U[:n, k:]).max(),
                np.abs(V[:n, :k] - V[n:, k:]).max(), np.abs(V[n:, :k] + V[:n, k:]).max())
    if resid > RELATION_TOL:
        raise StructureViolation(f"pairing relation violated by {resid:.2e}; "
                                 "input is not conjugate symplectic")
    d1 = np.maximum(s[:k], 1.0)
    return BmdFactors(U, d1, V)
