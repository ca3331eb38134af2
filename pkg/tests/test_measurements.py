import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellnet.measurements import (
    MeasurementAssignment,
    Povm,
    bloch_observable,
    chsh_assignment,
    dichotomic_to_projective,
    measure_and_condition,
    observable_povm,
    projective,
)
from bellnet.bell import fourier_basis
from bellnet.states import compose_network, isotropic, lambda_layout, max_entangled, phi_ket, sigma_state
from bellnet.tensor import SX, partial_trace, projector, random_density


def random_effect(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    lam = rng.uniform(0, 1, size=d)
    return (vecs * lam) @ vecs.conj().T


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm([np.eye(2), np.eye(2)])
    with pytest.raises(ValueError):
        Povm([np.diag([1.5, 0]), np.diag([-0.5, 1])])
    with pytest.raises(ValueError):
        Povm([np.array([[0, 1], [0, 0]]), np.array([[1, -1], [0, 1]])])


def test_projective_bases():
    comp = projective(np.eye(2))
    assert np.allclose(comp.effects, [np.diag([1, 0]), np.diag([0, 1])])
    plus = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    xbasis = projective(plus)
    assert np.allclose(xbasis.effects[0], (np.eye(2) + SX) / 2)
    assert np.allclose(xbasis.effects[1], (np.eye(2) - SX) / 2)
    f3 = projective(fourier_basis(3, 0.0))
    assert np.max(np.abs(f3.effects.sum(axis=0) - np.eye(3))) < 1e-12
    assert all(np.linalg.matrix_rank(e, tol=1e-10) == 1 for e in f3.effects)
    with pytest.raises(ValueError):
        projective([[1, 0], [1, 0]])


def test_dichotomic_projective_identity():
    sim = dichotomic_to_projective(np.diag([1.0, 0.0]))
    assert set(np.round(sim.response, 12)) == {0.0, 1.0}


def test_dichotomic_diagonal():
    sim = dichotomic_to_projective(np.diag([0.8, 0.3]))
    assert np.allclose(sim.response, [0.8, 0.3])
    assert np.allclose(np.abs(sim.basis), np.eye(2))


def test_dichotomic_rejects_bad_effect():
    with pytest.raises(ValueError):
        dichotomic_to_projective(np.diag([1.2, 0.3]))


def test_condition_phi_on_zero():
    prob, cond = measure_and_condition(max_entangled(2), np.diag([1, 0]), on="A")
    assert abs(prob - 0.5) < 1e-12
    assert np.allclose(cond.matrix, np.diag([1, 0]))
    assert cond.labels == ("B",)


def test_entanglement_swap_identity():
    net, _ = compose_network(lambda_layout())
    prob, cond = measure_and_condition(net, projector(phi_ket(2)), on="A")
    assert abs(prob - 0.25) < 1e-12
    assert np.allclose(cond.matrix, max_entangled(2).matrix, atol=1e-12)


def test_sigma_flag_readout():
    s = sigma_state()
    flag = np.zeros((8, 8))
    flag[0, 0] = 1
    prob, cond = measure_and_condition(s, flag, on=["Af", "Bf", "Cf"])
    assert abs(prob - 0.5) < 1e-12
    psi1 = np.einsum("ab,c->abc", phi_ket(2).reshape(2, 2), [1, 0]).ravel()
    assert np.allclose(cond.matrix, projector(psi1), atol=1e-12)


def test_identity_effect_is_partial_trace(rng):
    rho = isotropic(0.6, 2)
    prob, cond = measure_and_condition(rho, np.eye(2), on=[0])
    assert abs(prob - 1) < 1e-12
    assert np.allclose(cond.matrix, partial_trace(rho, [1]).matrix)


def test_zero_probability_cutoff():
    rho = max_entangled(2)
    prob, cond = measure_and_condition(rho, np.zeros((4, 4)), on=[0, 1])
    assert prob == 0.0 and cond is None


def test_condition_errors():
    with pytest.raises(ValueError):
        measure_and_condition(max_entangled(2), np.eye(3), on="A")
    with pytest.raises(ValueError):
        measure_and_condition(max_entangled(2), np.eye(2), on="Q")
    with pytest.raises(IndexError):
        measure_and_condition(max_entangled(2), np.eye(2), on=[5])


def test_assignment_json_roundtrip():
    ma = chsh_assignment()
    back = MeasurementAssignment.from_json(ma.to_json())
    for i in range(2):
        assert np.allclose(back.stacked(i), ma.stacked(i))
    assert ma.settings == 2 and ma.outcomes == 2 and ma.party_dims() == [2, 2]


def test_assignment_shape_errors():
    with pytest.raises(ValueError):
        MeasurementAssignment([[observable_povm(SX)], [observable_povm(SX), observable_povm(SX)]])
    with pytest.raises(ValueError):
        MeasurementAssignment([])


def test_bloch_observable():
    assert np.allclose(bloch_observable([2, 0, 0]), SX)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_probabilities_sum_to_one(seed, d):
    rng = np.random.default_rng(seed)
    e = random_effect(d, rng)
    povm = Povm([e, np.eye(d) - e])
    assert abs(povm.probabilities(random_density(d, rng)).sum() - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_dichotomic_reduction_exact(seed, d):
    rng = np.random.default_rng(seed)
    e = random_effect(d, rng)
    rho = random_density(d, rng)
    sim = dichotomic_to_projective(e)
    direct = np.trace(e @ rho).real
    assert abs(sim.probability_zero(rho) - direct) < 1e-10
