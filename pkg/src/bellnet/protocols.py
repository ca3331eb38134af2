"""Network protocols: star activation, Lambda swapping, flag-based many-copy activation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .behaviors import Behavior, Scenario, behavior_from_quantum, mix, uniform
from .bell import BellFunctional, chsh, mermin, seesaw
from .measurements import measure_and_condition
from .polytope import MembershipVerdict, hybrid_vertices_3party, membership
from .states import (
    DensityState,
    IsotropicParams,
    compose_network,
    ghz_ket,
    isotropic,
    lambda_layout,
    phi_ket,
    star_layout,
)
from .tensor import projector

# Known two-qubit isotropic noise levels, used only for comparison:
# best known Bell violation, local model for projective measurements, local model for POVMs.
BEST_KNOWN_VIOLATION = 0.705
PROJECTIVE_LOCAL_MODEL = 0.66
POVM_LOCAL_MODEL = 5 / 12

MAX_STAR_LEAVES = 5


@dataclass
class StarResult:
    p: float
    N: int
    success_prob: float
    conditional: DensityState


def star_conditional(p: float, N: int) -> StarResult:
    """Centre projects its N link qubits onto GHZ; return the leaves' state."""
    if not 1 <= N <= MAX_STAR_LEAVES:
        raise ValueError(f"star_conditional supports 1 <= N <= {MAX_STAR_LEAVES}, got {N}")
    layout = star_layout(N, {"state": "iso", "p": float(p), "d": 2})
    net, _ = compose_network(layout)
    prob, cond = measure_and_condition(net, projector(ghz_ket(N)), on="A")
    if cond is None:
        raise RuntimeError("GHZ projection has zero probability")
    return StarResult(float(p), N, prob, cond)


def lambda_swap(rho_ab: DensityState, rho_ac: DensityState):
    """Centre projects its two halves onto |Phi>; returns (probability, state of B and C)."""
    if rho_ab.dims != rho_ac.dims or len(rho_ab.dims) != 2 or rho_ab.dims[0] != rho_ab.dims[1]:
        raise ValueError(f"lambda_swap needs two d x d states, got {rho_ab.dims} and {rho_ac.dims}")
    d = rho_ab.dims[0]
    if d > 4:
        raise ValueError("lambda_swap supports d <= 4")
    net, _ = compose_network(lambda_layout(), [rho_ab.relabel(("A", "B")), rho_ac.relabel(("A", "C"))])
    prob, cond = measure_and_condition(net, projector(phi_ket(d)), on="A")
    return prob, cond


def star_threshold(N: int) -> float:
    if N < 1:
        raise ValueError("star_threshold needs N >= 1")
    return 2 / math.pi * 2 ** (1 / N)


@dataclass(frozen=True)
class FlagProtocolParams:
    L: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("need at least one copy")

    @property
    def p_eq(self) -> float:
        return 2.0 ** (1 - self.L)


def flag_distribution(params: FlagProtocolParams, p_psi: Behavior, junk_b: Behavior | None = None, junk_c: Behavior | None = None) -> Behavior:
    """Mixture reached from L flagged copies: target with weight 1 - p_eq, junk otherwise."""
    s = p_psi.scenario
    junk_b = uniform(s) if junk_b is None else junk_b
    junk_c = uniform(s) if junk_c is None else junk_c
    if s != Scenario(3, 2, 2) or junk_b.scenario != s or junk_c.scenario != s:
        raise ValueError("flag_distribution works on (3, 2, 2) behaviors")
    q = params.p_eq
    return mix([junk_b, junk_c, p_psi], [q / 2, q / 2, 1 - q])


def coverage_probability(L: int, N: int) -> float:
    """Probability that L uniform draws from N flag values hit every value."""
    if L < 1 or N < 1:
        raise ValueError("coverage_probability needs L, N >= 1")
    total = Fraction(0)
    for k in range(N + 1):
        total += (-1) ** k * math.comb(N, k) * Fraction(N - k, N) ** L
    return float(total)


def coverage_monte_carlo(L: int, N: int, samples: int = 10**6, seed: int | None = 0) -> tuple[float, float]:
    """Sampled coverage estimate and its standard error."""
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    chunk = 100_000
    while done < samples:
        n = min(chunk, samples - done)
        draws = rng.integers(0, N, size=(n, L))
        seen = np.zeros((n, N), dtype=bool)
        seen[np.arange(n)[:, None], draws] = True
        hits += int(seen.all(axis=1).sum())
        done += n
    est = hits / samples
    return est, math.sqrt(max(est * (1 - est), 1e-300) / samples)


# --- thresholds by search ------------------------------------------------------------


def star_functional(N: int) -> BellFunctional:
    return chsh() if N == 2 else mermin(N)


def seesaw_violation_threshold(
    state_at,
    f: BellFunctional,
    lo: float = 0.0,
    hi: float = 1.0,
    tol: float = 1e-5,
    restarts: int = 10,
    seed: int = 0,
) -> float:
    """Smallest p with seesaw value above the bound, by bisection.

    ``state_at(p)`` builds the state; the seesaw value is assumed
    nondecreasing in p.
    """
    s = f.scenario
    top = seesaw(state_at(hi), s, f, restarts=restarts, seed=seed)
    if top.value <= f.bound:
        return float("nan")
    init = [np.stack([p.effects for p in party]) for party in top.assignment.povms]

    def violated(p):
        res = seesaw(state_at(p), s, f, restarts=restarts, seed=seed, init=init)
        return res.value > f.bound + 1e-12

    while hi - lo > tol:
        mid = (lo + hi) / 2
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def star_seesaw_threshold(N: int, restarts: int = 10, seed: int = 0) -> float:
    """Noise level where the seesaw-optimised CHSH (N=2) / Mermin value of the star output crosses its local bound."""
    return seesaw_violation_threshold(
        lambda p: star_conditional(p, N).conditional, star_functional(N), restarts=restarts, seed=seed
    )


def plane_threshold(n: int, K: int) -> float:
    """Noise level at which the equatorial functional detects D_p^(x)n(GHZ_n).

    The GHZ value of the functional with equatorial settings is 1/2 and
    n-body correlators shrink as p**n under the link noise.
    """
    from .bell import plane, plane_angles
    from .measurements import MeasurementAssignment, observable_povm
    from .states import ghz
    from .tensor import SX, SY

    f = plane(n, K)
    povms = [observable_povm(np.cos(t) * SX + np.sin(t) * SY) for t in plane_angles(K)]
    top = f(behavior_from_quantum(ghz(n), MeasurementAssignment([povms] * n)))
    return (f.bound / top) ** (1 / n)


# --- Lambda network and flag activation --------------------------------------------


@dataclass
class ActivationStep:
    L: int
    p_eq: float
    verdict: MembershipVerdict


@dataclass
class SigmaActivation:
    target: Behavior
    target_verdict: MembershipVerdict
    steps: list = field(default_factory=list)

    @property
    def minimal_L(self) -> int | None:
        for step in self.steps:
            if not step.verdict.member:
                return step.L
        return None


def sigma_activation(p_psi: Behavior, L_max: int = 12) -> SigmaActivation:
    """Hybrid-polytope membership of the flagged mixture for L = 1..L_max."""
    hv = hybrid_vertices_3party()
    out = SigmaActivation(p_psi, membership(p_psi, hv))
    for L in range(1, L_max + 1):
        params = FlagProtocolParams(L)
        b = flag_distribution(params, p_psi)
        out.steps.append(ActivationStep(L, params.p_eq, membership(b, hv)))
    return out


@dataclass
class TauActivation:
    N: int
    p: float
    L: int
    coverage: float
    star_margin: float

    @property
    def certified_margin(self) -> float:
        return self.coverage * self.star_margin


def tau_activation(N: int, p: float, L: int, restarts: int = 10, seed: int = 0) -> TauActivation:
    """Reduce many-copy activation of the flagged star to the star protocol itself.

    The star margin is the seesaw violation of the star functional on the
    post-selected leaves, scaled by the GHZ success probability (the lifted
    violation); it counts only when all N flags have appeared.
    """
    f = star_functional(N)
    star = star_conditional(p, N)
    res = seesaw(star.conditional, f.scenario, f, restarts=restarts, seed=seed)
    margin = star.success_prob * (res.value - f.bound)
    return TauActivation(N, p, L, coverage_probability(L, N), margin)


# --- Lambda two-singlet behaviour ----------------------------------------------------


def lambda_state() -> DensityState:
    """Phi+ on A-B and on A-C; Alice holds both halves (party dims 4, 2, 2)."""
    net, _ = compose_network(lambda_layout())
    return net


def lambda_assignment():
    """Alice tests |Phi+> on her two halves; B and C use CHSH-optimal qubit settings."""
    from .measurements import MeasurementAssignment, Povm, chsh_assignment

    bell = projector(phi_ket(2))
    alice = Povm([bell, np.eye(4) - bell])
    chsh_ma = chsh_assignment()
    return MeasurementAssignment([[alice, alice], chsh_ma.povms[0], chsh_ma.povms[1]])


@dataclass
class LambdaSearch:
    behavior: Behavior
    verdict: MembershipVerdict
    svetlichny_value: float
    history: list


def lambda_behavior(seed: int = 0, restarts: int = 10, rounds: int = 20) -> Behavior:
    return lambda_search(seed, restarts, rounds).behavior


def lambda_search(seed: int = 0, restarts: int = 10, rounds: int = 20) -> LambdaSearch:
    """Look for Lambda two-singlet settings that leave the hybrid polytope.

    Starts from the Svetlichny seesaw optimum, then alternates between the
    hybrid LP and a seesaw on its dual functional, keeping the behaviour
    with the smallest critical visibility.
    """
    from .bell import svetlichny
    from .polytope import lp_dual_direction

    state = lambda_state()
    s = Scenario(3, 2, 2)
    hv = hybrid_vertices_3party()
    start = seesaw(state, s, svetlichny(), restarts=restarts, seed=seed)
    best_b = behavior_from_quantum(state, start.assignment)
    best_v = membership(best_b, hv)
    history = [best_v.v_star]
    init = [np.stack([p.effects for p in party]) for party in start.assignment.povms]
    b = best_b
    for k in range(rounds):
        coeffs = lp_dual_direction(b, hv)
        f = BellFunctional(s, coeffs.reshape(s.shape), float(np.max(hv.matrix @ coeffs)), "declared")
        res = seesaw(state, s, f, restarts=0, seed=seed + k + 1, init=init)
        init = [np.stack([p.effects for p in party]) for party in res.assignment.povms]
        b = behavior_from_quantum(state, res.assignment)
        verdict = membership(b, hv)
        history.append(verdict.v_star)
        if verdict.v_star < best_v.v_star - 1e-12:
            best_b, best_v = b, verdict
    return LambdaSearch(best_b, best_v, start.value, history)


def lambda_lift_demo(p: float = 1.0, ref_setting=(0, 0)) -> dict:
    """Lifted CHSH on the Lambda network of two isotropic(p) links.

    Alice post-selects outcome 0 of her |Phi+> test (setting 0); B and C
    play CHSH on what is left.
    """
    from .bell import PostSelection, lift

    IsotropicParams(p, 2)
    spec = {"state": "iso", "p": float(p), "d": 2}
    net, _ = compose_network(lambda_layout(spec))
    b = behavior_from_quantum(net, lambda_assignment())
    f = lift(chsh(), PostSelection((0,), (0,), (0,)), ref_setting)
    value = f(b)
    return {
        "p": float(p),
        "x0": list(ref_setting),
        "lifted_value": value,
        "expected": (2 * math.sqrt(2) * p**2 - 2) / 4,
        "violated": value > 1e-12,
    }
