"""Driven-dissipative bosonic systems and their quantum-noise transfer functions.

All rates and frequencies are in units of a reference damping rate ``gamma``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bmd import BmdFactors
from .errors import UnstableSystem
from .linalg import ComplexMatrix, SymplecticMatrix, matrix_from_json, matrix_to_json, symplectic_form
from .smooth import BmdPath, MatrixPath, smooth_bmd

STABILITY_MARGIN = 1e-10


@dataclass(frozen=True)
class BosonicSystem:
    """Quadratic couplings ``F`` (pair production), ``G`` (mode hopping), damping ``gamma``."""

    F: ComplexMatrix
    G: ComplexMatrix
    gamma: NDArray[np.float64]
    _stable: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        F = np.array(self.F, dtype=np.complex128)
        G = np.array(self.G, dtype=np.complex128)
        gamma = np.array(self.gamma, dtype=float).ravel()
        n = gamma.size
        if F.shape != (n, n) or G.shape != (n, n):
            raise ValueError(f"F {F.shape} and G {G.shape} must be {n}x{n}")
        if not np.allclose(F, F.T, rtol=0, atol=1e-12):
            raise ValueError("F must be symmetric")
        if not np.allclose(G, G.conj().T, rtol=0, atol=1e-12):
            raise ValueError("G must be Hermitian")
        if np.any(gamma <= 0):
            raise ValueError("damping rates must be positive")
        for a in (F, G, gamma):
            a.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.gamma.size

    @property
    def Gamma(self) -> NDArray[np.float64]:
        """Diagonal of the ``2n x 2n`` damping matrix."""
        return np.concatenate([self.gamma, self.gamma])

    def replace(self, **changes) -> "BosonicSystem":
        return dataclasses.replace(self, **changes)

    def is_real(self) -> bool:
        return not (np.any(self.F.imag) or np.any(self.G.imag))

    def to_json(self) -> dict:
        return {"n": self.n, "F": matrix_to_json(self.F), "G": matrix_to_json(self.G),
                "gamma": [float(x) for x in self.gamma]}


def interaction_matrix(sys: BosonicSystem) -> NDArray[np.float64]:
    """Real ``2n x 2n`` coupling matrix of the quadrature Langevin equations."""
    F, G = sys.F, sys.G
    return np.block([[np.imag(G + F), np.real(G - F)],
                     [-np.real(G + F), -np.imag(G + F).T]])


def check_stability(sys: BosonicSystem) -> None:
    """Raise :class:`UnstableSystem` unless every eigenvalue of ``M - Gamma``
    has real part below ``-1e-10 * min(gamma)``. Cached per system."""
    if sys._stable:
        return
    ev = np.linalg.eigvals(interaction_matrix(sys) - np.diag(sys.Gamma))
    worst = float(ev.real.max())
    if worst >= -STABILITY_MARGIN * sys.gamma.min():
        raise UnstableSystem(f"system is at or above threshold (max Re lambda = {worst:.3e})")
    sys._stable.append(True)


def _resolvent(sys: BosonicSystem, omega: float) -> ComplexMatrix:
    N = 2 * sys.n
    A = np.diag(1j * omega + sys.Gamma) - interaction_matrix(sys)
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise UnstableSystem(f"singular resolvent at omega={omega}") from exc


def transfer_function(sys: BosonicSystem, omega: float, *, verify: bool = False) -> SymplecticMatrix:
    """``S(w) = sqrt(2 Gamma) (i w + Gamma - M)^{-1} sqrt(2 Gamma) - I``."""
    check_stability(sys)
    r = np.sqrt(2 * sys.Gamma)
    S = r[:, None] * _resolvent(sys, omega) * r[None, :] - np.eye(2 * sys.n)
    return SymplecticMatrix.from_array(S, check=verify)


def transfer_derivative(sys: BosonicSystem, omega: float) -> ComplexMatrix:
    """Analytic ``dS/dw = -i sqrt(2 Gamma) R^2 sqrt(2 Gamma)``."""
    R = _resolvent(sys, omega)
    r = np.sqrt(2 * sys.Gamma)
    return -1j * r[:, None] * (R @ R) * r[None, :]


def transfer_path(sys: BosonicSystem, a: float, b: float) -> MatrixPath:
    check_stability(sys)
    return MatrixPath(lambda w: transfer_function(sys, w), a, b,
                      derivative=lambda w: transfer_derivative(sys, w))


# Four-mode array. G is real; F carries a small imaginary part on the
# anti-diagonal, dropped in the real-coupling variant.
_G4 = np.array([[1.35, 0.08, 0.65, 0.08],
                [0.08, 1.25, 0.08, 0.65],
                [0.65, 0.08, 1.35, 0.08],
                [0.08, 0.65, 0.08, 1.25]])
_F4 = np.array([[0.08, 0.25, 0.1, 0.5 + 0.05j],
                [0.25, 0.1, 0.5 + 0.05j, 0.1],
                [0.1, 0.5 + 0.05j, 0.1, 0.25],
                [0.5 + 0.05j, 0.1, 0.25, 0.08]])
_GAMMA4 = np.array([1.0, 1.5, 1.0, 1.5])

VARIANTS = ("codim3", "codim2")


def four_mode_system(variant: str = "codim3") -> BosonicSystem:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    F = _F4 if variant == "codim3" else _F4.real
    return BosonicSystem(F, _G4, _GAMMA4)


def four_mode_system_with(g11: float, g22: float, variant: str = "codim3") -> BosonicSystem:
    """Four-mode system with ``G[0, 0] = g11`` and ``G[1, 1] = g22``."""
    base = four_mode_system(variant)
    G = base.G.copy()
    G[0, 0], G[1, 1] = g11, g22
    return base.replace(G=G)


@dataclass(frozen=True)
class MicroringSpec:
    """Synchronously pumped ring: ``n`` signal modes, Gaussian pump comb.

    ``A0`` is in units of ``sqrt(gamma / g)``; only ``g * A0**2`` enters.
    ``j0`` defaults to the central index ``(n - 1) / 2``.
    """

    n: int = 51
    g: float = 1.0
    A0: float = 0.4
    sigma_pump: float = 3.0
    j0: float | None = None
    delta_s0: float = 0.0
    delta_Omega: float = 0.0
    Omega2: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError("microring mode count must be odd")
        if self.sigma_pump <= 0 or self.gamma <= 0:
            raise ValueError("sigma_pump and gamma must be positive")
        if self.j0 is None:
            object.__setattr__(self, "j0", (self.n - 1) / 2)

    def replace(self, **changes) -> "MicroringSpec":
        return dataclasses.replace(self, **changes)

    def pump(self) -> NDArray[np.float64]:
        j = np.arange(self.n)
        return self.A0 * np.exp(-(j - self.j0) ** 2 / (2 * self.sigma_pump ** 2))

    def detunings(self) -> NDArray[np.float64]:
        # Signal labels are symmetric about the centre: j -> j - (n - 1) / 2.
        q = 2 * (np.arange(self.n) - (self.n - 1) / 2) + 1
        return self.delta_s0 + self.delta_Omega * q + 0.5 * self.Omega2 * q ** 2


def microring_system(spec: MicroringSpec) -> BosonicSystem:
    """Hankel pair-production and Toeplitz cross-phase couplings from the pump.

    ``F[j, l] = g sum_m p[j - m + l + 1] p[m]`` and
    ``G[j, l] = Delta_j delta_jl + 2 g sum_m p[j + m - l] conj(p[m])``, with
    pump indices outside ``0..n-1`` contributing zero.
    """
    n = spec.n
    p = spec.pump()
    conv = np.convolve(p, p)               # conv[s] = sum_m p[s - m] p[m]
    corr = np.correlate(p, p, "full")      # corr[d + n - 1] = sum_m p[m + d] conj(p[m])
    j = np.arange(n)
    s = j[:, None] + j[None, :] + 1
    F = spec.g * np.where(s < conv.size, conv[np.minimum(s, conv.size - 1)], 0.0)
    G = 2 * spec.g * corr[j[:, None] - j[None, :] + n - 1] + np.diag(spec.detunings())
    return BosonicSystem(F, G, np.full(n, spec.gamma))


@dataclass
class SqueezingSpectra:
    """Anti-squeezing ``20 log10 d_j`` and squeezing (its negative), in dB.

    Arrays have shape ``(len(omegas), k)``.
    """

    omegas: NDArray[np.float64]
    anti_db: NDArray[np.float64]
    sq_db: NDArray[np.float64]
    bmd: BmdPath | None = None

    @classmethod
    def from_d1(cls, omegas: ArrayLike, d1: ArrayLike, bmd: BmdPath | None = None) -> "SqueezingSpectra":
        anti = 20 * np.log10(np.asarray(d1, dtype=float))
        return cls(np.asarray(omegas, dtype=float), anti, -anti, bmd)

    def write_csv(self, path) -> None:
        k = self.anti_db.shape[1]
        header = (["omega[gamma]"] + [f"anti_db_{j + 1}[dB]" for j in range(k)]
                  + [f"sq_db_{j + 1}[dB]" for j in range(k)])
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for om, a, s in zip(self.omegas, self.anti_db, self.sq_db):
                fh.write(",".join(repr(float(x)) for x in (om, *a, *s)) + "\n")


def squeezing_spectra(sys: BosonicSystem, omega_a: float, omega_b: float, eta: float = 1e-2,
                      k: int | None = None, **kwargs) -> SqueezingSpectra:
    bmd = smooth_bmd(transfer_path(sys, omega_a, omega_b), eta, k, **kwargs)
    return SqueezingSpectra.from_d1(bmd.omegas, bmd.d1, bmd)


def spectral_covariance(S: SymplecticMatrix | ArrayLike) -> ComplexMatrix:
    """Output covariance ``S S^dagger / 2`` for vacuum input."""
    M = S.matrix if isinstance(S, SymplecticMatrix) else np.asarray(S, dtype=np.complex128)
    return 0.5 * M @ M.conj().T


def hamiltonian_spectrum_check(sys: BosonicSystem) -> NDArray[np.float64]:
    """Sorted eigenvalue magnitudes of the Bogoliubov matrix ``[[G, F], [-F*, -G*]]``.

    Each normal-mode frequency appears twice (``+-`` pair).
    """
    B = np.block([[sys.G, sys.F], [-sys.F.conj(), -sys.G.conj()]])
    return np.sort(np.abs(np.linalg.eigvals(B)))


def hamiltonian_gap(mags: ArrayLike) -> float:
    """Smallest separation between distinct normal-mode frequencies."""
    m = np.sort(np.asarray(mags, dtype=float))
    freqs = 0.5 * (m[0::2] + m[1::2])
    return float(np.diff(freqs).min()) if freqs.size > 1 else float("inf")


# --- named systems and parameter families -------------------------------

BUILTIN_SYSTEMS = ("fourmode-codim3", "fourmode-codim2", "microring")

_ENTRY = re.compile(r"^([gf])(\d)(\d)$")


def builtin(name: str) -> BosonicSystem | MicroringSpec:
    if name == "fourmode-codim3":
        return four_mode_system("codim3")
    if name == "fourmode-codim2":
        return four_mode_system("codim2")
    if name == "microring":
        return MicroringSpec()
    raise ValueError(f"unknown system {name!r}; expected one of {BUILTIN_SYSTEMS}")


def _json_matrix(obj) -> np.ndarray:
    # Real matrices may also be given as plain nested lists.
    return matrix_from_json(obj) if isinstance(obj, dict) else np.asarray(obj, dtype=float)


def load_system(obj: dict) -> BosonicSystem | MicroringSpec:
    """Parse ``{"n", "F", "G", "gamma"}`` or ``{"microring": {...}}``.

    ``F`` and ``G`` are matrix JSON objects or, when real, nested lists.
    """
    try:
        if "microring" in obj:
            return MicroringSpec(**obj["microring"])
        F, G = _json_matrix(obj["F"]), _json_matrix(obj["G"])
        gamma = obj["gamma"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed system description: {exc!r}") from None
    sys = BosonicSystem(F, G, gamma)
    if "n" in obj and int(obj["n"]) != sys.n:
        raise ValueError(f"declared n={obj['n']} does not match matrices ({sys.n})")
    return sys


def as_system(source: BosonicSystem | MicroringSpec) -> BosonicSystem:
    return microring_system(source) if isinstance(source, MicroringSpec) else source


def with_params(source: BosonicSystem | MicroringSpec, names: Sequence[str],
                values: Sequence[float]) -> BosonicSystem:
    """Apply named overrides (``gIJ``/``fIJ`` 1-based entries, microring fields)."""
    if isinstance(source, MicroringSpec):
        fields = {f.name for f in dataclasses.fields(MicroringSpec)}
        bad = [nm for nm in names if nm not in fields]
        if bad:
            raise ValueError(f"unknown microring parameter(s) {bad}")
        return microring_system(source.replace(**dict(zip(names, values))))
    F, G = source.F.copy(), source.G.copy()
    for nm, v in zip(names, values):
        m = _ENTRY.match(nm.lower())
        if not m:
            raise ValueError(f"unknown parameter {nm!r}; use gIJ or fIJ (1-based)")
        i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
        if not (0 <= i < source.n and 0 <= j < source.n):
            raise ValueError(f"parameter {nm!r} out of range for n={source.n}")
        if m.group(1) == "g":
            G[i, j] = v
            G[j, i] = np.conj(v)
        else:
            F[i, j] = F[j, i] = v
    return source.replace(F=F, G=G)


def param_values(source: BosonicSystem | MicroringSpec, names: Sequence[str]) -> list[float]:
    """Current values of named parameters; raises ``ValueError`` for unknown names."""
    if isinstance(source, MicroringSpec):
        vals = []
        for nm in names:
            if nm not in {f.name for f in dataclasses.fields(MicroringSpec)}:
                raise ValueError(f"unknown microring parameter {nm!r}")
            vals.append(float(getattr(source, nm)))
        return vals
    vals = []
    for nm in names:
        m = _ENTRY.match(nm.lower())
        if not m:
            raise ValueError(f"unknown parameter {nm!r}; use gIJ or fIJ (1-based)")
        i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
        if not (0 <= i < source.n and 0 <= j < source.n):
            raise ValueError(f"parameter {nm!r} out of range for n={source.n}")
        vals.append(float(np.real((source.G if m.group(1) == "g" else source.F)[i, j])))
    return vals


def parametric_transfer(source: BosonicSystem | MicroringSpec,
                        names: Sequence[str]) -> Callable[[Sequence[float]], SymplecticMatrix]:
    """Map ``(omega, *params) -> S``; ``names`` excludes ``omega``."""
    names = list(names)
    cache: dict[tuple, BosonicSystem] = {}

    def evaluate(x: Sequence[float]) -> SymplecticMatrix:
        key = tuple(float(v) for v in x[1:])
        sys = cache.get(key)
        if sys is None:
            sys = with_params(source, names, key) if names else as_system(source)
            if len(cache) > 64:
                cache.clear()
            cache[key] = sys
        return transfer_function(sys, float(x[0]))

    return evaluate


def symplectic_generator_check(sys: BosonicSystem) -> tuple[float, float]:
    """Defects of ``(Omega M)^T = Omega M`` and ``(Omega Gamma)^T = -Omega Gamma``."""
    Om = symplectic_form(sys.n)
    OM = Om @ interaction_matrix(sys)
    OG = Om @ np.diag(sys.Gamma)
    return float(np.abs(OM.T - OM).max()), float(np.abs(OG.T + OG).max())
