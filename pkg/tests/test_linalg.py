from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_symplectic, random_unitary_symplectic
from sympectra.errors import DegenerateSpectrum, DimensionError
from sympectra.linalg import (PhaseMatrix, SymplecticMatrix, apply_phase, is_conjugate_symplectic,
                              is_unitary_conjugate_symplectic, matrix_from_json, matrix_to_json,
                              svd_ordered, symplectic_form)


def test_symplectic_form_small():
    assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])
    Om = symplectic_form(2)
    assert np.array_equal(Om[:2, 2:], np.eye(2)) and np.array_equal(Om[2:, :2], -np.eye(2))


@given(st.integers(1, 40))
def test_symplectic_form_identities(n):
    Om = symplectic_form(n)
    assert np.array_equal(Om @ Om, -np.eye(2 * n))
    assert np.array_equal(Om.T, -Om)
    assert np.array_equal(Om @ Om.T, np.eye(2 * n))


def test_conjugate_symplectic_examples():
    assert is_conjugate_symplectic(np.eye(4))
    assert is_conjugate_symplectic(symplectic_form(3))
    assert is_conjugate_symplectic(np.diag([2.0, 0.5]))
    assert not is_conjugate_symplectic(np.diag([2.0, 2.0]))
    with pytest.raises(DimensionError):
        is_conjugate_symplectic(np.eye(3))


def test_unitary_symplectic_examples(rng):
    assert is_unitary_conjugate_symplectic(PhaseMatrix([0.3, -1.2]).matrix())
    assert is_unitary_conjugate_symplectic(symplectic_form(2))
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    assert not is_unitary_conjugate_symplectic(Q)
    W = random_unitary_symplectic(3, rng)
    assert is_unitary_conjugate_symplectic(W)
    assert not is_unitary_conjugate_symplectic(2 * W)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_phase_matrix_is_unitary_symplectic(thetas):
    assert is_unitary_conjugate_symplectic(PhaseMatrix(thetas).matrix(), tol=1e-14)


def test_symplectic_matrix_tag(rng):
    S, *_ = random_symplectic(2, rng)
    tagged = SymplecticMatrix.from_array(S)
    assert tagged.n == 2 and tagged.defect < 1e-9
    with pytest.raises(Exception):
        SymplecticMatrix.from_array(np.diag([2.0, 2.0]))


def test_svd_ordered_examples(rng):
    r = svd_ordered(np.diag([1.0, 3.0]))
    assert np.allclose(r.sigma, [3, 1])
    with pytest.raises(DegenerateSpectrum) as info:
        svd_ordered(symplectic_form(1))
    assert info.value.pair == 0
    Q1, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    Q2, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    A = (Q1 * [5, 2, 1, 0.3]) @ Q2.conj().T
    assert np.allclose(svd_ordered(A).sigma, [5, 2, 1, 0.3], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 128), st.integers(0, 2 ** 32 - 1))
def test_svd_round_trip(n, seed):
    g = np.random.default_rng(seed)
    A = g.normal(size=(n, n)) + 1j * g.normal(size=(n, n))
    r = svd_ordered(A, gap_tol=0.0)
    assert np.linalg.norm(A - r.reconstruct()) <= 1e-12 * np.linalg.norm(A)
    assert np.all(np.diff(r.sigma) <= 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_singular_values_come_in_reciprocal_pairs(n, seed):
    S, *_ = random_symplectic(n, np.random.default_rng(seed))
    s = np.sort(np.linalg.svd(S, compute_uv=False))
    assert np.allclose(s, np.sort(1 / s), rtol=1e-10, atol=0)


@given(st.lists(st.floats(-4, 4), min_size=2, max_size=2))
def test_apply_phase_inverse_and_norm(th):
    W = random_unitary_symplectic(2, np.random.default_rng(7))
    T = PhaseMatrix(th)
    assert np.allclose(apply_phase(apply_phase(W, T), PhaseMatrix([-x for x in th])), W)
    assert np.isclose(np.linalg.norm(apply_phase(W, T)), np.linalg.norm(W))
    assert np.array_equal(apply_phase(W, PhaseMatrix.identity(2)), W)
    with pytest.raises(DimensionError):
        apply_phase(W, PhaseMatrix([0.0]))


@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300),
                min_size=6, max_size=6))
def test_json_round_trip_is_exact(vals):
    A = np.array(vals).reshape(2, 3)
    B = matrix_from_json(json.loads(json.dumps(matrix_to_json(A))))
    assert np.array_equal(A, B)
