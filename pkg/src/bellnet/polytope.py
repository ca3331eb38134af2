"""Local, no-signalling and hybrid polytopes, and LP membership with dual certificates."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .behaviors import Behavior, Scenario, product_behavior, permute_parties, uniform

MAX_DETERMINISTIC = 10**5
MAX_LP_COEFFS = 10**8
MEMBER_TOL = 1e-9
CERT_TOL = 1e-9


@dataclass(frozen=True)
class VertexSet:
    """Vertices stored as rows of a matrix over flattened behavior tables."""

    scenario: Scenario
    matrix: np.ndarray
    kind: str  # "local", "hybrid-ns" or "ns"

    def __len__(self):
        return self.matrix.shape[0]

    @property
    def vertices(self) -> list[Behavior]:
        return [Behavior(self.scenario, row, check=False) for row in self.matrix]


def single_party_deterministic(m: int, r: int) -> np.ndarray:
    """All response functions of one party, shape (r**m, m, r)."""
    funcs = list(itertools.product(range(r), repeat=m))
    out = np.zeros((len(funcs), m, r))
    for k, f in enumerate(funcs):
        out[k, np.arange(m), list(f)] = 1.0
    return out


def deterministic_vertices(s: Scenario) -> VertexSet:
    count = (s.r**s.m) ** s.N
    if count > MAX_DETERMINISTIC:
        raise ValueError(f"{count} deterministic vertices exceed the guard of {MAX_DETERMINISTIC}")
    single = single_party_deterministic(s.m, s.r)
    k = single.shape[0]
    # build product tensors party by party: shape (k^n, m^n, r^n) in (x, a) layout
    acc = single.reshape(k, s.m, s.r)
    for _ in range(1, s.N):
        acc = np.einsum("ixa,jyb->ijxyab", acc, single)
        n_prev = acc.shape[2]
        acc = acc.reshape(acc.shape[0] * k, n_prev * s.m, acc.shape[4] * s.r)
    return VertexSet(s, acc.reshape(count, -1), "local")


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Behavior:
    """P(ab|xy) = 1/2 iff a xor b = xy xor alpha x xor beta y xor gamma."""
    t = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma):
            t[x, y, a, b] = 0.5
    return Behavior(Scenario(2, 2, 2), t.reshape(4, 4))


def ns_vertices_222() -> VertexSet:
    """16 deterministic boxes plus the 8 PR-box relabellings."""
    s = Scenario(2, 2, 2)
    det = deterministic_vertices(s).matrix
    prs = np.array([pr_box(a, b, g).vector for a, b, g in itertools.product(range(2), repeat=3)])
    return VertexSet(s, np.vstack([det, prs]), "ns")


def hybrid_vertices_3party() -> VertexSet:
    """Products of a deterministic single party with a bipartite no-signalling vertex.

    One block of 4 x 24 products per choice of the isolated party, 288 rows
    in total. The hull of products of polytopes is spanned by the products of
    their vertices, so this generates the full hybrid polytope.
    """
    s1 = Scenario(1, 2, 2)
    singles = [Behavior(s1, row, check=False) for row in deterministic_vertices(s1).matrix]
    pairs = ns_vertices_222().vertices
    rows = []
    for alone in range(3):
        rest = [i for i in range(3) if i != alone]
        # product order is (alone, rest[0], rest[1]); map back to (0, 1, 2)
        current = [alone] + rest
        order = [current.index(j) for j in range(3)]
        for d in singles:
            for p in pairs:
                rows.append(permute_parties(product_behavior(d, p), order).vector)
    return VertexSet(Scenario(3, 2, 2), np.array(rows), "hybrid-ns")


@dataclass
class Certificate:
    """Separating functional: coeffs . P <= bound on every vertex."""

    coeffs: np.ndarray
    bound: float

    def value(self, b: Behavior) -> float:
        return float(self.coeffs @ b.vector)

    def to_dict(self) -> dict:
        return {"coeffs": self.coeffs.tolist(), "bound": self.bound}


@dataclass
class MembershipVerdict:
    v_star: float
    member: bool
    certificate: Optional[Certificate] = None
    kind: str = "local"

    @property
    def margin(self) -> float:
        """How far the behavior is outside the polytope (0 for members)."""
        return 0.0 if self.member else 1.0 - self.v_star

    def to_json(self) -> str:
        cert = None if self.certificate is None else self.certificate.to_dict()
        v = self.v_star if np.isfinite(self.v_star) else "inf"
        return json.dumps({"v_star": v, "member": self.member, "certificate": cert})


def _visibility_lp(b: Behavior, v: VertexSet):
    """Solve max t s.t. t b + (1 - t) u = sum_i w_i V_i, w >= 0, sum w = 1."""
    s = b.scenario
    if s != v.scenario:
        raise ValueError(f"behavior scenario {s} does not match vertex set {v.scenario}")
    V = v.matrix
    n_v, size = V.shape
    if n_v * size > MAX_LP_COEFFS:
        raise ValueError(f"LP with {n_v * size} coefficients exceeds the guard")
    u = uniform(s).vector
    a_eq = np.zeros((size + 1, n_v + 1))
    a_eq[:size, 0] = b.vector - u
    a_eq[:size, 1:] = -V.T
    a_eq[size, 1:] = 1.0
    b_eq = np.concatenate([-u, [1.0]])
    c = np.zeros(n_v + 1)
    c[0] = -1.0
    return linprog(
        c,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * (n_v + 1),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9},
    )


def lp_dual_direction(b: Behavior, v: VertexSet) -> np.ndarray:
    """Dual functional of the visibility LP, also for members (a tight face through the boundary point)."""
    res = _visibility_lp(b, v)
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return -np.asarray(res.eqlin.marginals)[: b.scenario.size]


def membership(b: Behavior, v: VertexSet) -> MembershipVerdict:
    """Critical visibility of ``b`` against the polytope spanned by ``v``.

    Solves max t s.t. t b + (1 - t) u = sum_i w_i V_i, w >= 0, sum w = 1,
    with u the uniform behavior. Non-member verdicts carry the dual
    functional, re-checked against every vertex.
    """
    if b.scenario != v.scenario:
        raise ValueError(f"behavior scenario {b.scenario} does not match vertex set {v.scenario}")
    if np.max(np.abs(b.vector - uniform(b.scenario).vector)) < 1e-14:
        return MembershipVerdict(float("inf"), True, None, v.kind)
    res = _visibility_lp(b, v)
    if res.status == 3:
        return MembershipVerdict(float("inf"), True, None, v.kind)
    if res.status == 2:
        raise ValueError("membership LP infeasible at zero visibility: malformed behavior")
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")

    v_star = float(-res.fun)
    if v_star >= 1 - MEMBER_TOL:
        return MembershipVerdict(v_star, True, None, v.kind)

    coeffs = -np.asarray(res.eqlin.marginals)[: b.scenario.size]
    bound = float(np.max(v.matrix @ coeffs))
    cert = Certificate(coeffs, bound)
    if cert.value(b) > bound + CERT_TOL:
        return MembershipVerdict(v_star, False, cert, v.kind)
    if v_star < 1 - 1e-6:
        raise RuntimeError(f"LP reports v*={v_star} but its dual functional does not separate")
    # deficit is within solver noise and cannot be certified
    return MembershipVerdict(v_star, True, None, v.kind)


def is_extremal(k: int, v: VertexSet) -> bool:
    """True when vertex ``k`` lies outside the hull of the remaining ones."""
    others = VertexSet(v.scenario, np.delete(v.matrix, k, axis=0), v.kind)
    target = Behavior(v.scenario, v.matrix[k], check=False)
    return not membership(target, others).member
