"""Conditional probability tables P(a|x) and their basic algebra.

Tables are stored as arrays of shape ``(m**N, r**N)``: row ``x`` and
column ``a`` are lexicographic multi-indices with party 0 most
significant. The same layout, flattened row-major, is the JSON format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measurements import MeasurementAssignment
from .states import DensityState

NORM_TOL = 1e-10
NEG_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    N: int
    m: int
    r: int

    def __post_init__(self):
        if min(self.N, self.m, self.r) < 1:
            raise ValueError(f"scenario parameters must be positive: {self}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.m**self.N, self.r**self.N

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return (self.m,) * self.N + (self.r,) * self.N

    @property
    def size(self) -> int:
        return (self.m * self.r) ** self.N

    def to_dict(self) -> dict:
        return {"parties": self.N, "settings": self.m, "outcomes": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(int(d["parties"]), int(d["settings"]), int(d["outcomes"]))


class Behavior:
    __slots__ = ("scenario", "table")

    def __init__(self, scenario: Scenario, table, check=True):
        t = np.array(table, dtype=float).reshape(scenario.shape)
        t.setflags(write=False)
        self.scenario = scenario
        self.table = t
        if check:
            if t.min() < -NEG_TOL:
                raise ValueError(f"negative probability {t.min():.3e}")
            resid = np.max(np.abs(t.sum(axis=1) - 1))
            if resid > NORM_TOL:
                raise ValueError(f"rows are not normalized (residual {resid:.3e})")

    @property
    def tensor(self) -> np.ndarray:
        """View indexed ``[x_1, ..., x_N, a_1, ..., a_N]``."""
        return self.table.reshape(self.scenario.tensor_shape)

    @property
    def vector(self) -> np.ndarray:
        return self.table.ravel()

    def __call__(self, a: Sequence[int], x: Sequence[int]) -> float:
        return float(self.tensor[tuple(x) + tuple(a)])

    def to_json(self) -> str:
        return json.dumps({"scenario": self.scenario.to_dict(), "table": self.vector.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Behavior":
        obj = json.loads(text)
        return cls(Scenario.from_dict(obj["scenario"]), obj["table"])

    def __repr__(self):
        s = self.scenario
        return f"Behavior(N={s.N}, m={s.m}, r={s.r})"


def uniform(scenario: Scenario) -> Behavior:
    return Behavior(scenario, np.full(scenario.shape, 1.0 / scenario.r**scenario.N), check=False)


def behavior_from_quantum(state: DensityState, ma: MeasurementAssignment) -> Behavior:
    """Born-rule table tr(rho M_{a_1|x_1} (x) ... (x) M_{a_N|x_N})."""
    pdims = state.party_dims()
    if pdims != ma.party_dims():
        raise ValueError(f"state party dimensions {pdims} do not match measurements {ma.party_dims()}")
    n = len(pdims)
    scen = Scenario(n, ma.settings, ma.outcomes)
    rho = state.matrix.reshape(tuple(pdims) * 2)
    operands = [rho, list(range(2 * n))]
    for i in range(n):
        operands += [ma.stacked(i), [2 * n + i, 3 * n + i, n + i, i]]
    out = list(range(2 * n, 4 * n))
    t = np.einsum(*operands, out, optimize=True).real
    t = np.where(np.abs(t) < 1e-15, 0.0, t)
    return Behavior(scen, t.reshape(scen.shape))


def no_signalling_residual(b: Behavior) -> float:
    """Largest change of the other parties' marginal when one party switches setting."""
    s = b.scenario
    t = b.tensor
    worst = 0.0
    for i in range(s.N):
        marg = t.sum(axis=s.N + i)  # sum over a_i; x_i axis remains at position i
        spread = marg.max(axis=i) - marg.min(axis=i)
        worst = max(worst, float(spread.max()))
    return worst


def correlator(b: Behavior, x: Sequence[int]) -> float:
    """Expectation of the product of +/-1 outcomes (a=0 -> +1, a=1 -> -1)."""
    s = b.scenario
    if s.r != 2:
        raise ValueError("correlators need two outcomes per setting")
    if len(x) != s.N:
        raise ValueError(f"need {s.N} settings, got {len(x)}")
    row = b.tensor[tuple(x)]
    return float(np.sum(parity_signs(s.N) * row))


def parity_signs(n: int) -> np.ndarray:
    """Tensor of (-1)^(a_1 + ... + a_n) over n binary outcomes."""
    grids = np.indices((2,) * n).sum(axis=0)
    return np.where(grids % 2 == 0, 1.0, -1.0)


def mix(behaviors: Sequence[Behavior], weights: Sequence[float]) -> Behavior:
    if len(behaviors) != len(weights) or not behaviors:
        raise ValueError("need one weight per behavior")
    w = np.asarray(weights, dtype=float)
    if w.min() < 0 or abs(w.sum() - 1) > 1e-12:
        raise ValueError(f"weights must be a probability vector, got {list(w)}")
    s = behaviors[0].scenario
    for b in behaviors[1:]:
        if b.scenario != s:
            raise ValueError(f"scenario mismatch: {b.scenario} vs {s}")
    t = sum(wi * b.table for wi, b in zip(w, behaviors))
    return Behavior(s, t)


def marginal(b: Behavior, parties: Sequence[int], fixed: Sequence[int] | None = None) -> Behavior:
    """Reduced behavior of ``parties`` with the others' settings fixed to ``fixed``.

    ``fixed`` lists one setting per excluded party (ascending party order);
    it defaults to all zeros. For no-signalling tables the choice is
    immaterial.
    """
    s = b.scenario
    keep = sorted(int(p) for p in parties)
    if not keep:
        raise ValueError("marginal needs at least one party")
    others = [i for i in range(s.N) if i not in keep]
    fixed = [0] * len(others) if fixed is None else [int(v) for v in fixed]
    if len(fixed) != len(others):
        raise ValueError(f"need {len(others)} fixed settings, got {len(fixed)}")
    t = b.tensor
    index = [slice(None)] * (2 * s.N)
    for i, xv in zip(others, fixed):
        index[i] = xv
    t = t[tuple(index)]
    # remaining axes: kept x's, then all a's
    k = len(keep)
    drop_a = tuple(k + i for i in others)
    t = t.sum(axis=drop_a) if drop_a else t
    sub = Scenario(k, s.m, s.r)
    return Behavior(sub, t.reshape(sub.shape))


def product_behavior(*behaviors: Behavior) -> Behavior:
    """Behavior of independent groups of parties, concatenated in order."""
    s0 = behaviors[0].scenario
    out = behaviors[0].tensor
    n = s0.N
    for b in behaviors[1:]:
        s = b.scenario
        if (s.m, s.r) != (s0.m, s0.r):
            raise ValueError("product needs matching settings/outcomes")
        t = np.multiply.outer(out, b.tensor)
        # axes: x(n), a(n), y(k), b(k)  ->  x, y, a, b
        k = s.N
        order = list(range(n)) + list(range(2 * n, 2 * n + k)) + list(range(n, 2 * n)) + list(range(2 * n + k, 2 * n + 2 * k))
        out = t.transpose(order)
        n += k
    scen = Scenario(n, s0.m, s0.r)
    return Behavior(scen, out.reshape(scen.shape), check=False)


def permute_parties(b: Behavior, order: Sequence[int]) -> Behavior:
    """New party ``j`` is old party ``order[j]``."""
    s = b.scenario
    order = list(order)
    t = b.tensor.transpose(order + [s.N + i for i in order])
    return Behavior(s, t.reshape(s.shape), check=False)
