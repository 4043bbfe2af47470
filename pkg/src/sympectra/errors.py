"""Exception hierarchy shared by all sympectra modules."""

from __future__ import annotations

from typing import Any


class SympectraError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(SympectraError, ValueError):
    """Matrix shape incompatible with the requested operation."""


class DegenerateSpectrum(SympectraError):
    """Two adjacent singular values are closer than the distinctness tolerance.

    Attributes
    ----------
    pair:
        Zero-based index ``j`` of the offending pair ``(sigma_j, sigma_{j+1})``.
    gap:
        The observed difference ``sigma_j - sigma_{j+1}``.
    omega:
        Path parameter at which the collision was met (``None`` for static calls).
    partial:
        Partial :class:`~sympectra.smooth.BmdPath` computed before the failure,
        when raised from a continuation.
    """

    def __init__(self, pair: int, gap: float, omega: float | None = None,
                 partial: Any = None):
        self.pair = pair
        self.gap = gap
        self.omega = omega
        self.partial = partial
        where = "" if omega is None else f" at parameter {omega:.10g}"
        super().__init__(f"singular values {pair} and {pair + 1} coincide "
                         f"(gap {gap:.3e}){where}")


class StructureViolation(SympectraError):
    """Input is not (numerically) conjugate symplectic."""


class IllConditionedPhase(SympectraError):
    """A pairing phase is numerically undefined (modulus below threshold)."""


class AmbiguousPhase(SympectraError):
    """Procrustes alignment is ill posed: predicted and previous columns are orthogonal."""


class NonConvergentStep(SympectraError):
    """Adaptive continuation step size fell below the minimum."""

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)


class NotComplexSymmetric(SympectraError):
    """``S @ [[0, I], [I, 0]]`` is not complex symmetric along the path."""


class LoopThroughDegeneracy(SympectraError):
    """A Berry loop passes through (or numerically touches) a degeneracy."""

    def __init__(self, message: str, theta: float | None = None):
        self.theta = theta
        super().__init__(message)


class NonContinuableTrace(SympectraError):
    """Grid refinement could not make the accrued phases continuous."""


class NoConvergence(SympectraError):
    """Simplex search hit its evaluation cap; ``report`` holds the best point."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class UnstableSystem(SympectraError):
    """Linearised dynamics are at or beyond the oscillation threshold."""
