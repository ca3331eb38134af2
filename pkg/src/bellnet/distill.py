"""Hashing lower bound on one-way distillable entanglement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import IsotropicParams
from .tensor import as_matrix, entropy, partial_trace, shannon, Operator

BISECT_LO = 1e-6
BISECT_HI = 1 - 1e-6
BISECT_ITERS = 60


@dataclass(frozen=True)
class HashingResult:
    value: float
    entropies: tuple[float, float]  # (S_B, S_AB)


def hashing_bound(state, cut: Sequence[int]) -> HashingResult:
    """S(B) - S(AB) in bits, where ``cut`` lists the subsystems forming B."""
    op = state if isinstance(state, Operator) else Operator(as_matrix(state))
    n = len(op.dims)
    b_side = sorted(set(int(i) for i in cut))
    if not b_side or len(b_side) == n or any(not 0 <= i < n for i in b_side):
        raise ValueError(f"{list(cut)} is not a proper bipartition of {n} subsystems")
    s_b = entropy(partial_trace(op, b_side))
    s_ab = entropy(op)
    return HashingResult(s_b - s_ab, (s_b, s_ab))


def isotropic_spectrum(p: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct eigenvalues of the isotropic state and their multiplicities."""
    IsotropicParams(p, d)
    dd = float(d) ** 2
    return np.array([p + (1 - p) / dd, (1 - p) / dd]), np.array([1.0, dd - 1])


def isotropic_hashing(p: float, d: int) -> float:
    """Closed-form hashing bound of the isotropic state; no operator is built."""
    vals, mult = isotropic_spectrum(p, d)
    return float(np.log2(d) - shannon(vals, mult))


def hashing_threshold(d: int) -> float:
    """Noise level above which the isotropic hashing bound is positive."""
    if d < 2:
        raise ValueError("hashing_threshold needs d >= 2")
    lo, hi = BISECT_LO, BISECT_HI
    f_lo, f_hi = isotropic_hashing(lo, d), isotropic_hashing(hi, d)
    if f_lo > 0 or f_hi < 0:
        raise RuntimeError(f"no sign change of the hashing bound on [{lo}, {hi}] for d={d}")
    for _ in range(BISECT_ITERS):
        mid = (lo + hi) / 2
        if isotropic_hashing(mid, d) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2
