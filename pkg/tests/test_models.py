from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_stable_system
from sympectra.bmd import bmd_from_svd
from sympectra.errors import UnstableSystem
from sympectra.linalg import is_conjugate_symplectic, swap_form, symplectic_form
from sympectra.models import (BosonicSystem, MicroringSpec, SqueezingSpectra, builtin,
                              four_mode_system, four_mode_system_with, hamiltonian_gap,
                              hamiltonian_spectrum_check, interaction_matrix, load_system,
                              microring_system, param_values, parametric_transfer,
                              spectral_covariance, squeezing_spectra, transfer_function,
                              transfer_path, with_params)


def _brute_force_microring(spec: MicroringSpec):
    n = spec.n
    j0 = (n - 1) / 2 if spec.j0 is None else spec.j0
    p = [spec.A0 * np.exp(-(j - j0) ** 2 / (2 * spec.sigma_pump ** 2)) for j in range(n)]

    def pump(i):
        return p[i] if 0 <= i < n else 0.0

    F = np.zeros((n, n))
    G = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            F[j, l] = spec.g * sum(pump(j - m + l + 1) * pump(m) for m in range(n))
            G[j, l] = 2 * spec.g * sum(pump(j + m - l) * pump(m) for m in range(n))
        q = 2 * (j - (n - 1) / 2) + 1
        G[j, j] += spec.delta_s0 + spec.delta_Omega * q + 0.5 * spec.Omega2 * q ** 2
    return F, G


# --- assembly -------------------------------------------------------------------

def test_interaction_matrix_examples():
    sys0 = BosonicSystem(np.zeros((2, 2)), np.zeros((2, 2)), [1.0, 1.0])
    assert np.array_equal(interaction_matrix(sys0), np.zeros((4, 4)))
    sys1 = BosonicSystem([[0.3]], [[0.0]], [1.0])
    assert np.allclose(interaction_matrix(sys1), [[0, -0.3], [-0.3, 0]])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_hamiltonian_structure(n, seed):
    sys_ = random_stable_system(n, np.random.default_rng(seed))
    Om = symplectic_form(n)
    M = interaction_matrix(sys_)
    assert np.array_equal((Om @ M).T, Om @ M)
    OG = Om @ np.diag(sys_.Gamma)
    assert np.array_equal(OG.T, -OG)


def test_four_mode_tables():
    c3, c2 = four_mode_system("codim3"), four_mode_system("codim2")
    assert c3.F[0, 3] == 0.5 + 0.05j and c3.G[0, 0] == 1.35 and c3.G[0, 2] == 0.65
    assert c2.F[0, 3] == 0.5 and c2.is_real()
    assert np.array_equal(c3.gamma, [1, 1.5, 1, 1.5])
    base = four_mode_system_with(1.35, 1.25)
    assert np.array_equal(base.F, c3.F) and np.array_equal(base.G, c3.G)


@pytest.mark.parametrize("variant,point", [
    ("codim3", (0.84582091, 1.4623127, 1.1179756)),
    ("codim2", (0.84764778, 1.5643801, None)),
])
def test_four_mode_degeneracy_points(variant, point):
    w, g11, g22 = point
    sys_ = four_mode_system_with(g11, 1.25 if g22 is None else g22, variant)
    s = np.sort(np.linalg.svd(transfer_function(sys_, w).matrix, compute_uv=False))[::-1]
    assert s[1] - s[2] < 1e-6


def test_transfer_function_examples():
    sys0 = BosonicSystem(np.zeros((2, 2)), np.zeros((2, 2)), [0.7, 1.9])
    assert np.allclose(transfer_function(sys0, 0.0).matrix, np.eye(4))
    assert np.allclose(transfer_function(sys0, 1e9).matrix, -np.eye(4), atol=1e-8)
    unstable = BosonicSystem([[2.0]], [[0.0]], [1.0])
    with pytest.raises(UnstableSystem):
        transfer_function(unstable, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1), st.floats(-20, 20))
def test_transfer_function_properties(n, seed, w):
    sys_ = random_stable_system(n, np.random.default_rng(seed))
    S = transfer_function(sys_, w).matrix
    Sm = transfer_function(sys_, -w).matrix
    assert np.linalg.norm(Sm - S.conj()) <= 1e-10 * np.linalg.norm(S)
    assert is_conjugate_symplectic(S, 1e-9)


def test_transfer_derivative_matches_differences():
    sys_ = four_mode_system("codim3")
    mp = transfer_path(sys_, 0.0, 1.0)
    h = 1e-6
    fd = (mp(0.4 + h) - mp(0.4 - h)) / (2 * h)
    assert np.allclose(mp.dot(0.4), fd, atol=1e-7)


def test_real_couplings_give_swap_symmetry(rng):
    sys_ = random_stable_system(3, rng, real=True)
    for w in (-1.0, 0.2, 3.0):
        A = transfer_function(sys_, w).matrix @ swap_form(3)
        assert np.linalg.norm(A - A.T) < 1e-12


# --- microring ------------------------------------------------------------------

@pytest.mark.parametrize("spec", [
    MicroringSpec(n=11, sigma_pump=1.5, A0=0.3),
    MicroringSpec(n=9, sigma_pump=2.0, A0=0.2, j0=3, delta_s0=0.1, delta_Omega=0.02, Omega2=-0.01),
])
def test_microring_matches_brute_force(spec):
    F, G = _brute_force_microring(spec)
    sys_ = microring_system(spec)
    assert np.allclose(sys_.F, F, atol=1e-15) and np.allclose(sys_.G, G, atol=1e-15)


def test_microring_reference_parameters():
    spec = MicroringSpec()
    sys_ = microring_system(spec)
    assert spec.n == 51 and spec.pump()[25] == spec.A0
    assert np.array_equal(sys_.F, sys_.F.T) and sys_.is_real()
    assert np.array_equal(sys_.G, sys_.G.T)


def test_passive_microring_is_identity_in_norm():
    sys_ = microring_system(MicroringSpec(n=7, A0=0.0))
    assert np.array_equal(sys_.F, np.zeros((7, 7)))
    assert np.allclose(np.linalg.svd(transfer_function(sys_, 0.8).matrix, compute_uv=False), 1)


def test_microring_spec_validation():
    with pytest.raises(ValueError):
        MicroringSpec(n=10)
    with pytest.raises(ValueError):
        MicroringSpec(sigma_pump=0.0)


def test_pump_increase_raises_top_singular_value():
    w = np.linspace(-10, 10, 401)

    def peak(A0):
        sys_ = microring_system(MicroringSpec(A0=A0))
        return max(np.linalg.svd(transfer_function(sys_, x).matrix, compute_uv=False)[0] for x in w)

    assert peak(0.44) > peak(0.4)


# --- spectra and covariance -------------------------------------------------------

def test_squeezing_db_convention():
    sp = SqueezingSpectra.from_d1([0.0, 1.0], [[1.0], [np.sqrt(10)]])
    assert np.allclose(sp.anti_db[:, 0], [0, 10]) and np.array_equal(sp.sq_db, -sp.anti_db)


def test_squeezing_spectra_invariants(tmp_path):
    sp = squeezing_spectra(four_mode_system("codim3"), 0.0, 2.0, eta=2e-2)
    assert np.all(sp.anti_db >= 0) and np.array_equal(sp.sq_db, -sp.anti_db)
    sp.write_csv(tmp_path / "s.csv")
    head = (tmp_path / "s.csv").read_text().splitlines()[0].split(",")
    assert head[0] == "omega[gamma]" and head[1] == "anti_db_1[dB]"


def test_spectral_covariance_examples(rng):
    assert np.allclose(spectral_covariance(np.eye(2)), 0.5 * np.eye(2))
    assert np.allclose(spectral_covariance(np.diag([2, 0.5])), np.diag([2, 0.125]))
    S = transfer_function(random_stable_system(3, rng), 0.4)
    sig = spectral_covariance(S)
    ev = np.sort(np.linalg.eigvalsh(2 * sig))
    assert np.allclose(ev, np.sort(np.linalg.svd(S.matrix, compute_uv=False) ** 2))
    f = bmd_from_svd(S)
    assert np.allclose(f.U.conj().T @ sig @ f.U, 0.5 * np.diag(f.d ** 2), atol=1e-12)


def test_hamiltonian_spectrum_examples():
    sys_ = BosonicSystem(np.zeros((3, 3)), np.diag([0.5, 1.0, 2.0]), [1, 1, 1])
    assert np.allclose(hamiltonian_spectrum_check(sys_), [0.5, 0.5, 1, 1, 2, 2])
    assert np.isclose(hamiltonian_gap(hamiltonian_spectrum_check(sys_)), 0.5)


# --- parameter families and serialisation ----------------------------------------

def test_parameter_overrides():
    base = builtin("fourmode-codim3")
    assert param_values(base, ["g11", "g22", "f14"]) == [1.35, 1.25, 0.5]
    sys_ = with_params(base, ["g11", "g12"], [1.5, 0.1])
    assert sys_.G[0, 0] == 1.5 and sys_.G[0, 1] == sys_.G[1, 0] == 0.1
    with pytest.raises(ValueError):
        param_values(base, ["g55"])
    with pytest.raises(ValueError):
        param_values(base, ["x11"])
    ring = builtin("microring")
    assert param_values(ring, ["delta_s0"]) == [0.0]
    ev = parametric_transfer(base, ["g11", "g22"])
    assert np.array_equal(ev([0.3, 1.35, 1.25]).matrix, transfer_function(base, 0.3).matrix)


def test_system_json_round_trip():
    sys_ = four_mode_system("codim3")
    back = load_system(json.loads(json.dumps(sys_.to_json())))
    assert np.array_equal(back.F, sys_.F) and np.array_equal(back.G, sys_.G)
    spec = load_system({"microring": {"n": 11, "A0": 0.2}})
    assert isinstance(spec, MicroringSpec) and spec.n == 11
