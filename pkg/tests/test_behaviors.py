import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellnet.behaviors import (
    Behavior,
    Scenario,
    behavior_from_quantum,
    correlator,
    marginal,
    mix,
    no_signalling_residual,
    permute_parties,
    product_behavior,
    uniform,
)
from bellnet.bell import chsh, random_measurements
from bellnet.measurements import MeasurementAssignment, chsh_assignment, observable_povm
from bellnet.states import DensityState, max_entangled, maximally_mixed, product_state
from bellnet.tensor import SX, SZ, random_density

S2 = Scenario(2, 2, 2)


def random_assignment(dims, m, r, rng):
    return MeasurementAssignment.from_arrays([random_measurements(d, m, r, rng) for d in dims])


def signalling_table(gap):
    # B outputs 0 with probability 1/2 + gap when x_A = 1, 1/2 otherwise; A uniform
    t = np.zeros(S2.tensor_shape)
    for x in range(2):
        for y in range(2):
            pb = 0.5 + (gap if x == 1 else 0.0)
            t[x, y, :, 0] = 0.5 * pb
            t[x, y, :, 1] = 0.5 * (1 - pb)
    return Behavior(S2, t.reshape(S2.shape))


def test_scenario_shapes():
    s = Scenario(3, 2, 2)
    assert s.shape == (8, 8) and s.size == 64
    assert Scenario.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        Scenario(0, 2, 2)


def test_behavior_validation():
    with pytest.raises(ValueError):
        Behavior(S2, np.full(S2.shape, 0.3))
    t = np.full(S2.shape, 0.25)
    t[0, 0], t[0, 1] = -0.1, 0.6
    with pytest.raises(ValueError):
        Behavior(S2, t)


def test_json_roundtrip(rng):
    b = behavior_from_quantum(max_entangled(2), chsh_assignment())
    back = Behavior.from_json(b.to_json())
    assert back.scenario == b.scenario
    assert np.array_equal(back.table, b.table)


def test_index_convention():
    # party 0 most significant: row x = (x_A, x_B) -> 2 x_A + x_B
    t = np.zeros(S2.shape)
    t[:, 0] = 1
    t[1, :] = 0
    t[1, 2] = 1  # x = (0, 1), a = (1, 0)
    b = Behavior(S2, t)
    assert b((1, 0), (0, 1)) == 1.0


def test_product_state_factorizes(rng):
    a = DensityState(random_density(2, rng), labels=["A"])
    c = DensityState(random_density(3, rng), labels=["B"])
    rho = product_state(a, c)
    ma = random_assignment([2, 3], 2, 2, rng)
    b = behavior_from_quantum(rho, ma)
    pa = behavior_from_quantum(a, MeasurementAssignment([ma.povms[0]]))
    pc = behavior_from_quantum(c, MeasurementAssignment([ma.povms[1]]))
    assert np.max(np.abs(b.table - product_behavior(pa, pc).table)) < 1e-12


def test_chsh_tsirelson():
    b = behavior_from_quantum(max_entangled(2), chsh_assignment())
    assert abs(chsh()(b) - 2 * np.sqrt(2)) < 1e-12


def test_maximally_mixed_uniform(rng):
    b = behavior_from_quantum(maximally_mixed((2, 2)), random_assignment([2, 2], 2, 2, rng))
    assert np.allclose(b.table, 0.25, atol=1e-12)


def test_no_signalling_residual():
    assert no_signalling_residual(uniform(S2)) == 0
    assert abs(no_signalling_residual(signalling_table(0.1)) - 0.1) < 1e-12


def test_correlator():
    t = np.zeros(S2.shape)
    t[:, 0] = 0.5
    t[:, 3] = 0.5
    assert correlator(Behavior(S2, t), (0, 1)) == 1.0
    assert correlator(uniform(S2), (1, 1)) == 0.0
    zz = MeasurementAssignment([[observable_povm(SZ)] * 2] * 2)
    assert abs(correlator(behavior_from_quantum(max_entangled(2), zz), (0, 0)) - 1) < 1e-12


def test_mix():
    b = behavior_from_quantum(max_entangled(2), chsh_assignment())
    assert np.array_equal(mix([b], [1]).table, b.table)
    half = mix([b, uniform(S2)], [0.5, 0.5])
    assert np.allclose(half.table, (b.table + uniform(S2).table) / 2)
    with pytest.raises(ValueError):
        mix([b, b], [0.7, 0.7])
    with pytest.raises(ValueError):
        mix([b, uniform(Scenario(3, 2, 2))], [0.5, 0.5])


def test_marginals(rng):
    b = behavior_from_quantum(max_entangled(2), chsh_assignment())
    m = marginal(b, [0])
    assert np.allclose(m.table, 0.5)
    pa = behavior_from_quantum(DensityState(random_density(2, rng)), MeasurementAssignment([chsh_assignment().povms[0]]))
    pb = behavior_from_quantum(DensityState(random_density(2, rng)), MeasurementAssignment([chsh_assignment().povms[1]]))
    prod = product_behavior(pa, pb)
    assert np.allclose(marginal(prod, [1]).table, pb.table)
    sig = signalling_table(0.2)
    assert not np.allclose(marginal(sig, [1], [0]).table, marginal(sig, [1], [1]).table)


def test_permute_parties(rng):
    b = behavior_from_quantum(product_state(max_entangled(2), DensityState(random_density(2, rng), labels=["C"])),
                              random_assignment([2, 2, 2], 2, 2, rng))
    back = permute_parties(permute_parties(b, [2, 0, 1]), [1, 2, 0])
    assert np.allclose(back.table, b.table)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([(2, 2), (2, 3), (2, 2, 2)]), st.sampled_from([2, 3]))
def test_quantum_behaviors_are_no_signalling(seed, dims, m):
    rng = np.random.default_rng(seed)
    rho = DensityState(random_density(int(np.prod(dims)), rng), dims)
    b = behavior_from_quantum(rho, random_assignment(dims, m, 2, rng))
    assert np.max(np.abs(b.table.sum(axis=1) - 1)) < 1e-10
    assert no_signalling_residual(b) < 1e-10
    for x in np.ndindex(*(m,) * len(dims)):
        assert abs(correlator(b, x)) <= 1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0, 1))
def test_mix_stays_no_signalling(seed, w):
    rng = np.random.default_rng(seed)
    bs = [behavior_from_quantum(DensityState(random_density(4, rng), (2, 2)), random_assignment([2, 2], 2, 2, rng))
          for _ in range(2)]
    out = mix(bs, [w, 1 - w])
    assert no_signalling_residual(out) <= w * no_signalling_residual(bs[0]) + (1 - w) * no_signalling_residual(bs[1]) + 1e-12
