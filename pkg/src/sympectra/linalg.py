"""Dense complex linear algebra with conjugate-symplectic structure.

Conventions: a ``2n x 2n`` matrix is partitioned into ``n x n`` blocks,
quadratures ordered ``(x_1..x_n, y_1..y_n)``, and the symplectic form is
``Omega = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateSpectrum, DimensionError, StructureViolation

ComplexMatrix = NDArray[np.complex128]

DEFAULT_GAP_TOL = 1e-10


def as_matrix(A: ArrayLike, *, square: bool = False, even: bool = False) -> ComplexMatrix:
    """Coerce to a finite complex 2-D array, checking shape constraints."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if (square or even) and M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if even and M.shape[0] % 2:
        raise DimensionError(f"expected even dimension 2n, got {M.shape[0]}")
    return M


def symplectic_form(n: int) -> NDArray[np.int64]:
    """Return ``Omega = [[0, I_n], [-I_n, 0]]`` (integer entries)."""
    if n < 1:
        raise ValueError("mode count must be positive")
    eye = np.eye(n, dtype=np.int64)
    zero = np.zeros((n, n), dtype=np.int64)
    return np.block([[zero, eye], [-eye, zero]])


def swap_form(n: int) -> NDArray[np.int64]:
    """Return ``[[0, I_n], [I_n, 0]]``, the quadrature-swap permutation."""
    eye = np.eye(n, dtype=np.int64)
    zero = np.zeros((n, n), dtype=np.int64)
    return np.block([[zero, eye], [eye, zero]])


def symplectic_defect(A: ArrayLike) -> float:
    """Frobenius norm of ``A Omega A^dagger - Omega``."""
    M = as_matrix(A, even=True)
    Om = symplectic_form(M.shape[0] // 2)
    return float(np.linalg.norm(M @ Om @ M.conj().T - Om))


def is_conjugate_symplectic(A: ArrayLike, tol: float = 1e-9) -> bool:
    return symplectic_defect(A) <= tol


def _block_defect(W: ComplexMatrix) -> float:
    # Unitary conjugate-symplectic matrices commute with Omega: [[A, B], [-B, A]].
    n = W.shape[0] // 2
    return float(np.hypot(np.linalg.norm(W[:n, :n] - W[n:, n:]),
                          np.linalg.norm(W[n:, :n] + W[:n, n:])))


def is_unitary_conjugate_symplectic(W: ArrayLike, tol: float = 1e-10) -> bool:
    M = as_matrix(W, even=True)
    unit = np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]))
    return bool(unit <= tol and _block_defect(M) <= tol)


@dataclass(frozen=True)
class SymplecticMatrix:
    """A ``2n x 2n`` matrix verified conjugate symplectic at construction.

    ``defect`` records the measured ``||A Omega A^dagger - Omega||_F``; later
    consumers trust the tag instead of re-checking.
    """

    matrix: ComplexMatrix
    tol: float = 1e-9
    defect: float = field(default=0.0, compare=False)

    @classmethod
    def from_array(cls, A: ArrayLike, tol: float = 1e-9, *, check: bool = True) -> "SymplecticMatrix":
        M = as_matrix(A, even=True)
        M.setflags(write=False)
        defect = symplectic_defect(M) if check else 0.0
        if check and defect > tol:
            raise StructureViolation(
                f"matrix is not conjugate symplectic (defect {defect:.3e} > {tol:.1e})")
        return cls(M, tol, defect)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2


def as_symplectic(A: Any, tol: float = 1e-9) -> SymplecticMatrix:
    if isinstance(A, SymplecticMatrix):
        return A
    return SymplecticMatrix.from_array(A, tol)


@dataclass(frozen=True)
class PhaseMatrix:
    """Gauge ``diag(e^{i t_1}..e^{i t_n}, e^{i t_1}..e^{i t_n})``."""

    thetas: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "thetas", np.asarray(self.thetas, dtype=float).ravel())

    @classmethod
    def identity(cls, n: int) -> "PhaseMatrix":
        return cls(np.zeros(n))

    @property
    def n(self) -> int:
        return self.thetas.size

    def diagonal(self) -> NDArray[np.complex128]:
        e = np.exp(1j * self.thetas)
        return np.concatenate([e, e])

    def matrix(self) -> ComplexMatrix:
        return np.diag(self.diagonal())

    def inverse(self) -> "PhaseMatrix":
        return PhaseMatrix(-self.thetas)

    def __matmul__(self, other: "PhaseMatrix") -> "PhaseMatrix":
        return PhaseMatrix(self.thetas + other.thetas)


def apply_phase(W: ArrayLike, theta: PhaseMatrix) -> ComplexMatrix:
    """Return ``W @ Theta`` by column scaling.

    Works for full ``2n x 2n`` factors and for reduced ``2n x 2k`` column
    blocks laid out as ``[tracked | partners]``.
    """
    M = np.asarray(W, dtype=np.complex128)
    if M.ndim != 2 or M.shape[1] != 2 * theta.n:
        raise DimensionError(f"phase matrix of size {2 * theta.n} does not fit "
                             f"{M.shape[1]} columns")
    return M * theta.diagonal()[None, :]


@dataclass(frozen=True)
class OrderedSvd:
    U: ComplexMatrix
    sigma: NDArray[np.float64]
    V: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        return (self.U * self.sigma) @ self.V.conj().T


def check_gaps(sigma: NDArray[np.float64], gap_tol: float, pairs=None) -> None:
    """Raise :class:`DegenerateSpectrum` if any checked adjacent gap is too small.

    ``gap_tol`` is relative to ``sigma[0]``. ``pairs`` restricts the check to
    the given zero-based indices ``j`` of ``(sigma_j, sigma_{j+1})``.
    """
    if sigma.size < 2:
        return
    gaps = sigma[:-1] - sigma[1:]
    idx = np.arange(gaps.size) if pairs is None else np.asarray(list(pairs), dtype=int)
    if idx.size == 0:
        return
    thresh = gap_tol * max(sigma[0], np.finfo(float).tiny)
    bad = idx[gaps[idx] < thresh]
    if bad.size:
        j = int(bad[np.argmin(gaps[bad])])
        raise DegenerateSpectrum(j, float(gaps[j]))


def svd_ordered(A: ArrayLike, gap_tol: float = DEFAULT_GAP_TOL) -> OrderedSvd:
    """SVD with singular values strictly decreasing.

    Raises :class:`DegenerateSpectrum` when two adjacent singular values are
    closer than ``gap_tol * sigma_max``; ties are never broken silently.
    """
    M = as_matrix(A, square=True)
    U, s, Vh = np.linalg.svd(M)
    order = np.argsort(-s, kind="stable")
    U, s, V = U[:, order], s[order], Vh.conj().T[:, order]
    check_gaps(s, gap_tol)
    return OrderedSvd(U, s, V)


def matrix_to_json(A: ArrayLike) -> dict:
    """Row-major ``{"rows", "cols", "re", "im"}``; ``json`` writes floats with
    shortest round-trip repr so values survive exactly."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim == 1:
        M = M[None, :]
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "re": [float(x) for x in M.real.ravel()],
            "im": [float(x) for x in M.imag.ravel()]}


def matrix_from_json(obj: dict) -> ComplexMatrix:
    r, c = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(r * c)), dtype=float)
    if re.size != r * c or im.size != r * c:
        raise DimensionError(f"entry count does not match shape {r}x{c}")
    M = (re + 1j * im).reshape(r, c)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M
