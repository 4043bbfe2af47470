from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from sympectra.models import BosonicSystem, check_stability
from sympectra.errors import UnstableSystem


def random_unitary_symplectic(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """``expm`` of a generator ``[[A, B], [-B, A]]`` with ``A`` anti-Hermitian, ``B`` Hermitian."""
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Y = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = 0.5 * (X - X.conj().T)
    B = 0.5 * (Y + Y.conj().T)
    return expm(scale * np.block([[A, B], [-B, A]]))


def random_symplectic(n: int, rng: np.random.Generator, spread: float = 1.5) -> tuple:
    """``U diag(d, 1/d) V^H`` with well-separated ``d > 1``; returns ``(S, U, d, V)``."""
    d = np.sort(1.0 + spread * rng.uniform(0.1, 1.0, size=n) + np.arange(n)[::-1] * 0.7)[::-1]
    U = random_unitary_symplectic(n, rng)
    V = random_unitary_symplectic(n, rng)
    D = np.concatenate([d, 1 / d])
    return (U * D) @ V.conj().T, U, d, V


def random_stable_system(n: int, rng: np.random.Generator, strength: float = 0.4,
                         real: bool = False) -> BosonicSystem:
    while True:
        F = rng.normal(size=(n, n)) + (0 if real else 1j) * rng.normal(size=(n, n))
        G = rng.normal(size=(n, n)) + (0 if real else 1j) * rng.normal(size=(n, n))
        F = strength * (F + F.T) / 2
        G = (G + G.conj().T) / 2
        sys_ = BosonicSystem(F, G, rng.uniform(0.8, 1.6, size=n))
        try:
            check_stability(sys_)
            return sys_
        except UnstableSystem:
            strength *= 0.8


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
