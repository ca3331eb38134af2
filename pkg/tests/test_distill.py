import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellnet.distill import hashing_bound, hashing_threshold, isotropic_hashing, isotropic_spectrum
from bellnet.states import isotropic, max_entangled
from bellnet.tensor import Operator, kron


def h2(vals):
    return -sum(v * math.log2(v) for v in vals if v > 0)


def test_hashing_bound_edges():
    assert abs(hashing_bound(max_entangled(2), [1]).value - 1) < 1e-12
    assert abs(hashing_bound(Operator(np.eye(4) / 4, (2, 2)), [1]).value + 1) < 1e-12


def test_hashing_isotropic_by_hand():
    expected = 1 - h2([0.925, 0.025, 0.025, 0.025])
    res = hashing_bound(isotropic(0.9, 2), [1])
    assert abs(res.value - expected) < 1e-12
    assert abs(res.entropies[0] - 1) < 1e-12


def test_hashing_cut_errors():
    with pytest.raises(ValueError):
        hashing_bound(max_entangled(2), [])
    with pytest.raises(ValueError):
        hashing_bound(max_entangled(2), [0, 1])
    with pytest.raises(ValueError):
        hashing_bound(max_entangled(2), [3])


def test_spectrum():
    vals, mult = isotropic_spectrum(0.5, 2)
    assert np.allclose(vals, [0.625, 0.125]) and np.allclose(mult, [1, 3])


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_closed_form_matches_materialized(d):
    for p in np.linspace(0, 1, 11):
        assert abs(isotropic_hashing(p, d) - hashing_bound(isotropic(p, d), [1]).value) < 1e-10


def test_closed_form_at_one():
    for d in (2, 16, 2**16):
        assert abs(isotropic_hashing(1.0, d) - math.log2(d)) < 1e-9


def test_threshold_qubit():
    p = hashing_threshold(2)
    assert abs(p - 0.7476) < 1e-3
    # same point expressed as a Phi+ fidelity
    assert abs((1 + 3 * p) / 4 - 0.8107) < 1e-3
    assert abs(isotropic_hashing(p, 2)) < 1e-12


def test_threshold_large_d_is_slow():
    # p* - 1/2 shrinks only like 1 / (2 log2 d)
    assert 0.54 < hashing_threshold(1024) < 0.56
    assert isotropic_hashing(0.51, 2**16) < 0
    assert 0.5 < hashing_threshold(2**16) < 0.54


def test_threshold_decreasing():
    ps = [hashing_threshold(2**k) for k in range(1, 17)]
    assert all(b < a for a, b in zip(ps, ps[1:]))
    assert all(0.5 < p < 1 for p in ps)


def test_threshold_error():
    with pytest.raises(ValueError):
        hashing_threshold(1)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 64), st.floats(0, 0.98))
def test_isotropic_hashing_increasing(d, p):
    assert isotropic_hashing(p + 0.01, d) > isotropic_hashing(p, d)


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_hashing_additive(p, q):
    a = isotropic(p, 2, labels=("A", "B"))
    b = isotropic(q, 2, labels=("A2", "B2"))
    joint = kron(a, b)
    # B side of the product cut is subsystems 1 and 3
    total = hashing_bound(joint, [1, 3]).value
    assert abs(total - hashing_bound(a, [1]).value - hashing_bound(b, [1]).value) < 1e-9
