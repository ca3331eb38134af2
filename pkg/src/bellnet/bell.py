"""Bell functionals, post-selection lifting, named inequalities and seesaw search."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .behaviors import Behavior, Scenario, behavior_from_quantum, parity_signs
from .measurements import MeasurementAssignment, Povm, projective
from .polytope import VertexSet, deterministic_vertices, hybrid_vertices_3party
from .states import DensityState, max_entangled

BOUND_KINDS = ("local", "hybrid-ns", "declared")


@dataclass
class BellFunctional:
    """Linear form ``sum coeffs[x, a] P(a|x)`` with an upper bound over some polytope."""

    scenario: Scenario
    coeffs: np.ndarray
    bound: float
    bound_kind: str = "local"
    name: str = ""

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(self.scenario.shape)
        if self.bound_kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.bound_kind!r}")

    @property
    def tensor(self) -> np.ndarray:
        return self.coeffs.reshape(self.scenario.tensor_shape)

    def __call__(self, b: Behavior) -> float:
        return evaluate(self, b)

    def violation(self, b: Behavior) -> float:
        return evaluate(self, b) - self.bound

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario.to_dict(),
                "table": self.coeffs.ravel().tolist(),
                "bound": self.bound,
                "bound_kind": self.bound_kind,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "BellFunctional":
        obj = json.loads(text)
        return cls(Scenario.from_dict(obj["scenario"]), obj["table"], float(obj["bound"]), obj["bound_kind"])


def evaluate(f: BellFunctional, b: Behavior) -> float:
    if f.scenario != b.scenario:
        raise ValueError(f"functional scenario {f.scenario} does not match behavior {b.scenario}")
    return float(np.sum(f.coeffs * b.table))


def bound_over(f: BellFunctional, v: VertexSet) -> float:
    if f.scenario != v.scenario:
        raise ValueError(f"functional scenario {f.scenario} does not match vertex set {v.scenario}")
    return float(np.max(v.matrix @ f.coeffs.ravel()))


def correlator_functional(n: int, terms: dict, m: int = 2, name: str = "") -> BellFunctional:
    """Functional ``sum_x terms[x] E(x)`` over +/-1 correlators; bound left at 0 for the caller."""
    s = Scenario(n, m, 2)
    t = np.zeros(s.tensor_shape)
    signs = parity_signs(n)
    for x, c in terms.items():
        t[tuple(x)] += c * signs
    return BellFunctional(s, t.reshape(s.shape), 0.0, "declared", name)


# --- post-selection lifting ----------------------------------------------------


@dataclass(frozen=True)
class PostSelection:
    """Fixed settings and outcomes of the parties that post-select.

    ``parties`` are positions in the full scenario.
    """

    parties: tuple
    settings: tuple
    outcomes: tuple

    def __post_init__(self):
        if not (len(self.parties) == len(self.settings) == len(self.outcomes)):
            raise ValueError("post-selection needs one setting and outcome per party")
        if len(set(self.parties)) != len(self.parties):
            raise ValueError("repeated post-selecting party")


def lift(f: BellFunctional, ps: PostSelection, ref_setting: Sequence[int] | None = None) -> BellFunctional:
    """Turn an inequality for the tested parties into one for the whole network.

    The result is ``sum c P(a, b'|x, y') - K P(b'|y')`` with the
    post-selection probability read at the tested parties' reference
    setting; it is nonpositive on every local behavior.
    """
    s = f.scenario
    k = len(ps.parties)
    n_full = s.N + k
    for p in ps.parties:
        if not 0 <= p < n_full:
            raise ValueError(f"post-selecting party {p} is outside a {n_full}-party scenario")
    tested = [i for i in range(n_full) if i not in ps.parties]
    if len(tested) != s.N:
        raise ValueError("post-selecting parties overlap the tested parties")
    x0 = (0,) * s.N if ref_setting is None else tuple(int(v) for v in ref_setting)
    if len(x0) != s.N:
        raise ValueError(f"reference setting needs {s.N} entries")

    full = Scenario(n_full, s.m, s.r)
    t = np.zeros(full.tensor_shape)
    c = f.tensor
    for xt in itertools.product(range(s.m), repeat=s.N):
        for at in itertools.product(range(s.r), repeat=s.N):
            x = [0] * n_full
            a = [0] * n_full
            for p, y, bb in zip(ps.parties, ps.settings, ps.outcomes):
                x[p], a[p] = y, bb
            for i, p in enumerate(tested):
                x[p], a[p] = xt[i], at[i]
            val = c[xt + at]
            if xt == x0:
                val -= f.bound
            t[tuple(x) + tuple(a)] += val
    return BellFunctional(full, t.reshape(full.shape), 0.0, "declared", f"lift({f.name})")


# --- catalog -----------------------------------------------------------------------


def _with_local_bound(f: BellFunctional) -> BellFunctional:
    f.bound = bound_over(f, deterministic_vertices(f.scenario))
    f.bound_kind = "local"
    return f


def chsh() -> BellFunctional:
    f = correlator_functional(2, {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}, name="chsh")
    return _with_local_bound(f)


def mabk_terms(n: int) -> tuple[dict, dict]:
    """Correlator coefficients of the MABK pair (M_n, M'_n), local bound 1."""
    if n < 1:
        raise ValueError("MABK polynomials need n >= 1")
    mn = {(0,): 1.0}
    mp = {(1,): 1.0}
    for _ in range(1, n):
        new, newp = {}, {}

        def add(dst, src, setting, w):
            for x, c in src.items():
                key = x + (setting,)
                dst[key] = dst.get(key, 0.0) + w * c

        # M_n = (M (A + A') + M' (A - A')) / 2
        add(new, mn, 0, 0.5)
        add(new, mn, 1, 0.5)
        add(new, mp, 0, 0.5)
        add(new, mp, 1, -0.5)
        # M'_n = (M' (A + A') + M (A' - A)) / 2
        add(newp, mp, 0, 0.5)
        add(newp, mp, 1, 0.5)
        add(newp, mn, 1, 0.5)
        add(newp, mn, 0, -0.5)
        mn = {x: c for x, c in new.items() if abs(c) > 1e-15}
        mp = {x: c for x, c in newp.items() if abs(c) > 1e-15}
    return mn, mp


def mermin(n: int) -> BellFunctional:
    """Twice the MABK polynomial: CHSH for n=2, the usual Mermin form for n=3."""
    if n < 2:
        raise ValueError("mermin needs n >= 2")
    mn, _ = mabk_terms(n)
    f = correlator_functional(n, {x: 2 * c for x, c in mn.items()}, name=f"mermin{n}")
    return _with_local_bound(f)


def svetlichny() -> BellFunctional:
    """Mermin(3) plus its all-settings-swapped copy, bounded over hybrid models."""
    base = mermin(3)
    t = base.tensor
    swapped = t[::-1, ::-1, ::-1]
    s = base.scenario
    f = BellFunctional(s, (t + swapped).reshape(s.shape), 0.0, "hybrid-ns", "svetlichny")
    f.bound = bound_over(f, hybrid_vertices_3party())
    return f


def cglmp(d: int) -> BellFunctional:
    """Two-setting, d-outcome CGLMP expression; local bound 2 (recomputed)."""
    if d < 2:
        raise ValueError("cglmp needs d >= 2")
    s = Scenario(2, 2, d)
    t = np.zeros(s.tensor_shape)  # [x, y, a, b]
    a_idx, b_idx = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")

    def eq(shift, first_is_a):
        # indicator of A = B + shift (or B = A + shift)
        if first_is_a:
            return ((a_idx - b_idx - shift) % d == 0).astype(float)
        return ((b_idx - a_idx - shift) % d == 0).astype(float)

    for k in range(d // 2):
        w = 1 - 2 * k / (d - 1)
        t[0, 0] += w * eq(k, True)
        t[1, 0] += w * eq(k + 1, False)
        t[1, 1] += w * eq(k, True)
        t[0, 1] += w * eq(k, False)
        t[0, 0] -= w * eq(-k - 1, True)
        t[1, 0] -= w * eq(-k, False)
        t[1, 1] -= w * eq(-k - 1, True)
        t[0, 1] -= w * eq(-k - 1, False)
    f = BellFunctional(s, t.reshape(s.shape), 0.0, "declared", f"cglmp{d}")
    return _with_local_bound(f)


def fourier_basis(d: int, shift: float, sign: int = 1) -> np.ndarray:
    """Rows exp(sign 2 pi i j (k + shift) / d) / sqrt d, k = 0..d-1."""
    j = np.arange(d)
    return np.array([np.exp(sign * 2j * np.pi * j * (k + shift) / d) for k in range(d)]) / np.sqrt(d)


def cglmp_fourier_assignment(d: int) -> MeasurementAssignment:
    """Fourier-type settings that are optimal for cglmp(d) on the maximally entangled state."""
    alice = [projective(fourier_basis(d, a, 1)) for a in (0.0, 0.5)]
    bob = [projective(fourier_basis(d, b, -1)) for b in (-0.25, 0.25)]
    return MeasurementAssignment([alice, bob])


def cglmp_threshold(d: int, restarts: int = 5, seed: int = 0) -> tuple[float, float]:
    """Isotropic visibility above which cglmp(d) is violated, as (Fourier, seesaw) estimates.

    Uniform noise contributes zero to the functional, so the threshold is
    bound / value on the maximally entangled state.
    """
    f = cglmp(d)
    rho = max_entangled(d)
    fourier = f(behavior_from_quantum(rho, cglmp_fourier_assignment(d)))
    init = [np.stack([p.effects for p in party]) for party in cglmp_fourier_assignment(d).povms]
    refined = seesaw(rho, f.scenario, f, restarts=restarts, seed=seed, init=init).value
    return f.bound / fourier, f.bound / refined


def plane_angles(K: int) -> np.ndarray:
    return np.pi * np.arange(K) / K


def plane(n: int, K: int) -> BellFunctional:
    """Equatorial correlator functional: ``K**-n sum_x cos(sum_i theta_{x_i}) E(x)``.

    Settings are the angles ``pi k / K``. The local bound is found by
    exhaustive search over sign strategies.
    """
    if n < 1 or K < 1:
        raise ValueError("plane needs n >= 1 and K >= 1")
    th = plane_angles(K)
    terms = {x: np.cos(th[list(x)].sum()) / K**n for x in itertools.product(range(K), repeat=n)}
    f = correlator_functional(n, terms, m=K, name=f"plane{n},{K}")
    f.bound = plane_local_bound(n, K)
    f.bound_kind = "local"
    return f


def plane_local_bound(n: int, K: int) -> float:
    """max over sign strategies of Re prod_i z_i with z = K^-1 sum_k s_k e^{i theta_k}."""
    if K > 16:
        raise ValueError("exhaustive sign search limited to K <= 16")
    th = plane_angles(K)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=K)))
    z = signs @ np.exp(1j * th) / K
    z = _dedupe(z)
    acc = z
    for _ in range(1, n - 1):
        acc = _dedupe(np.multiply.outer(acc, z).ravel())
    if n == 1:
        return float(acc.real.max())
    best = -np.inf
    for chunk in np.array_split(acc, max(1, len(acc) // 4096)):
        best = max(best, float(np.multiply.outer(chunk, z).real.max()))
    return best


def _dedupe(z: np.ndarray) -> np.ndarray:
    key = np.round(z.real, 12) + 1j * np.round(z.imag, 12)
    return np.unique(key)


def catalog(name: str, **params) -> BellFunctional:
    if name == "chsh":
        return chsh()
    if name == "mermin":
        return mermin(int(params.get("n", 3)))
    if name == "svetlichny":
        if int(params.get("n", 3)) != 3:
            raise ValueError("svetlichny is implemented for n = 3 only")
        return svetlichny()
    if name == "cglmp":
        return cglmp(int(params.get("d", 3)))
    if name == "plane":
        return plane(int(params.get("n", 2)), int(params.get("K", 4)))
    raise ValueError(f"unknown inequality {name!r}")


# --- seesaw --------------------------------------------------------------------------


def _party_tensor(state: DensityState) -> tuple[np.ndarray, list[int]]:
    pdims = state.party_dims()
    return state.matrix.reshape(tuple(pdims) * 2), pdims


def effective_operators(rho_t: np.ndarray, effects: Sequence[np.ndarray], coeffs_t: np.ndarray, j: int) -> np.ndarray:
    """Operators W[x_j, a_j] with functional value ``sum tr(M_{a_j|x_j} W[x_j, a_j])``."""
    n = len(effects)
    operands = [rho_t, list(range(2 * n))]
    for i in range(n):
        if i != j:
            operands += [effects[i], [2 * n + i, 3 * n + i, n + i, i]]
    operands += [coeffs_t, list(range(2 * n, 4 * n))]
    w = np.einsum(*operands, [2 * n + j, 3 * n + j, j, n + j], optimize=True)
    return (w + np.conj(np.swapaxes(w, -1, -2))) / 2


def functional_value(rho_t: np.ndarray, effects: Sequence[np.ndarray], coeffs_t: np.ndarray) -> float:
    w = effective_operators(rho_t, effects, coeffs_t, 0)
    return float(np.einsum("xaij,xaji->", effects[0], w).real)


def _best_response(w: np.ndarray) -> np.ndarray:
    """Optimal POVM per setting for fixed effective operators W[x, a]."""
    m, r, d, _ = w.shape
    out = np.zeros_like(w)
    for x in range(m):
        if r == 2:
            vals, vecs = np.linalg.eigh(w[x, 0] - w[x, 1])
            pos = vecs[:, vals > 0]
            p0 = pos @ pos.conj().T
            out[x, 0] = p0
            out[x, 1] = np.eye(d) - p0
        else:
            out[x] = _sdp_best_povm(w[x])
    return out


def _sdp_best_povm(w: np.ndarray) -> np.ndarray:
    import cvxpy as cp

    r, d, _ = w.shape
    ms = [cp.Variable((d, d), hermitian=True) for _ in range(r)]
    cons = [m >> 0 for m in ms] + [sum(ms) == np.eye(d)]
    obj = cp.Maximize(cp.real(sum(cp.trace(m @ w[a]) for a, m in enumerate(ms))))
    cp.Problem(obj, cons).solve(solver=cp.SCS, eps=1e-9, max_iters=20000)
    out = np.array([m.value for m in ms])
    # project back onto valid POVMs against solver slack
    out = (out + np.conj(np.swapaxes(out, -1, -2))) / 2
    fixed = []
    for e in out:
        vals, vecs = np.linalg.eigh(e)
        fixed.append((vecs * np.clip(vals, 0, None)) @ vecs.conj().T)
    fixed = np.array(fixed)
    s = fixed.sum(axis=0)
    vals, vecs = np.linalg.eigh(s)
    inv_root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return np.array([inv_root @ e @ inv_root for e in fixed])


def random_measurements(d: int, m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Random projective measurements, shape (m, r, d, d), from Haar-random bases."""
    out = np.zeros((m, r, d, d), dtype=complex)
    for x in range(m):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, _ = np.linalg.qr(g)
        if r == 2:
            # balanced +/-1 observable; trivial ones are seesaw fixed points
            pos = q[:, : max(1, d // 2)]
            out[x, 0] = pos @ pos.conj().T
            out[x, 1] = np.eye(d) - out[x, 0]
        else:
            for k in range(d):
                out[x, k % r] += np.outer(q[:, k], q[:, k].conj())
    return out


@dataclass
class SeesawResult:
    assignment: MeasurementAssignment
    value: float
    history: list

    def __iter__(self):
        return iter((self.assignment, self.value))


def seesaw(
    state: DensityState,
    scenario: Scenario,
    f: BellFunctional,
    restarts: int = 20,
    seed: int | None = 0,
    tol: float = 1e-8,
    max_iter: int = 500,
    init: Sequence[np.ndarray] | None = None,
) -> SeesawResult:
    """Alternating per-party optimization of the measurements for ``f`` on ``state``.

    Each sweep replaces one party's POVMs by the exact best response given
    the others, so the objective never decreases. Returns the best of
    ``restarts`` random starts (plus ``init`` when supplied).
    """
    if f.scenario != scenario:
        raise ValueError("functional and scenario disagree")
    rho_t, pdims = _party_tensor(state)
    if len(pdims) != scenario.N:
        raise ValueError(f"state has {len(pdims)} parties, scenario needs {scenario.N}")
    rng = np.random.default_rng(seed)
    coeffs_t = f.tensor
    # SDP steps carry solver slack
    slack = 1e-9 if scenario.r == 2 else 1e-6

    starts = []
    if init is not None:
        starts.append([np.array(e, dtype=complex) for e in init])
    for _ in range(restarts):
        starts.append([random_measurements(d, scenario.m, scenario.r, rng) for d in pdims])

    best = None
    for effects in starts:
        value = functional_value(rho_t, effects, coeffs_t)
        history = [value]
        for _ in range(max_iter):
            previous = value
            for j in range(scenario.N):
                w = effective_operators(rho_t, effects, coeffs_t, j)
                effects[j] = _best_response(w)
                new = functional_value(rho_t, effects, coeffs_t)
                assert new >= value - slack, f"seesaw decreased: {value} -> {new}"
                value = new
            history.append(value)
            if value - previous < tol:
                break
        if best is None or value > best.value:
            ma = MeasurementAssignment([[Povm(e, check=False) for e in effects[i]] for i in range(scenario.N)])
            best = SeesawResult(ma, value, history)
    return best
