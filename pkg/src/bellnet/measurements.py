"""Local measurements: POVMs, the dichotomic-to-projective reduction, post-selection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityState
from .tensor import Operator, as_matrix, hermitian_eig, partial_trace, permute_subsystems

POVM_TOL = 1e-10
ZERO_PROB = 1e-12


class Povm:
    """Measurement on one party, stored as an array of effects with shape (r, d, d)."""

    __slots__ = ("effects",)

    def __init__(self, effects, check=True):
        e = np.array([as_matrix(x) for x in effects], dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise ValueError(f"effects must be square matrices, got shape {e.shape}")
        e.setflags(write=False)
        self.effects = e
        if check:
            self._check()

    def _check(self):
        e = self.effects
        for k, m in enumerate(e):
            if np.max(np.abs(m - m.conj().T)) > POVM_TOL:
                raise ValueError(f"effect {k} is not Hermitian")
            lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
            if lo < -POVM_TOL:
                raise ValueError(f"effect {k} is not positive (min eigenvalue {lo:.3e})")
        resid = np.max(np.abs(e.sum(axis=0) - np.eye(e.shape[1])))
        if resid > POVM_TOL:
            raise ValueError(f"effects do not sum to identity (residual {resid:.3e})")

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def probabilities(self, rho) -> np.ndarray:
        m = as_matrix(rho)
        return np.einsum("kij,ji->k", self.effects, m).real

    def __repr__(self):
        return f"Povm(outcomes={self.outcomes}, dim={self.dim})"


def projective(basis: Sequence) -> Povm:
    """Rank-1 POVM from an orthonormal basis (vectors given as rows)."""
    b = np.array(basis, dtype=complex)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("basis must be a complete list of vectors")
    gram = b.conj() @ b.T
    if np.max(np.abs(gram - np.eye(len(b)))) > POVM_TOL:
        raise ValueError("basis vectors are not orthonormal")
    return Povm([np.outer(v, v.conj()) for v in b], check=False)


def observable_povm(obs) -> Povm:
    """Two-outcome projective POVM of a +/-1 observable; outcome 0 is the +1 eigenspace."""
    o = as_matrix(obs)
    d = o.shape[0]
    return Povm([(np.eye(d) + o) / 2, (np.eye(d) - o) / 2])


def bloch_observable(direction) -> np.ndarray:
    """n . sigma for a 3-vector (normalized here)."""
    from .tensor import SX, SY, SZ

    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return n[0] * SX + n[1] * SY + n[2] * SZ


@dataclass
class MeasurementAssignment:
    """``povms[i][x]`` is party ``i``'s measurement for setting ``x``."""

    povms: list[list[Povm]]

    def __post_init__(self):
        if not self.povms or not self.povms[0]:
            raise ValueError("empty measurement assignment")
        m = len(self.povms[0])
        r = self.povms[0][0].outcomes
        for i, party in enumerate(self.povms):
            if len(party) != m:
                raise ValueError(f"party {i} has {len(party)} settings, expected {m}")
            for x, povm in enumerate(party):
                if povm.outcomes != r:
                    raise ValueError(f"party {i} setting {x} has {povm.outcomes} outcomes, expected {r}")
                if povm.dim != party[0].dim:
                    raise ValueError(f"party {i} uses inconsistent effect dimensions")

    @property
    def parties(self) -> int:
        return len(self.povms)

    @property
    def settings(self) -> int:
        return len(self.povms[0])

    @property
    def outcomes(self) -> int:
        return self.povms[0][0].outcomes

    def party_dims(self) -> list[int]:
        return [party[0].dim for party in self.povms]

    def stacked(self, i: int) -> np.ndarray:
        """Effects of party ``i`` as an array (m, r, d, d)."""
        return np.stack([p.effects for p in self.povms[i]])

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], check=True) -> "MeasurementAssignment":
        return cls([[Povm(e, check=check) for e in a] for a in arrays])

    def to_json(self) -> str:
        def enc(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return json.dumps([[[enc(e) for e in povm.effects] for povm in party] for party in self.povms])

    @classmethod
    def from_json(cls, text: str) -> "MeasurementAssignment":
        def dec(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        data = json.loads(text)
        return cls([[Povm([dec(e) for e in povm]) for povm in party] for party in data])


# --- two-outcome POVMs as projective measurements plus coin flips -----------------


@dataclass(frozen=True)
class DichotomicSimulation:
    """Projective measurement in ``basis`` (columns) followed by outputting 0 w.p. ``response[i]``."""

    basis: np.ndarray
    response: np.ndarray

    def probability_zero(self, rho) -> float:
        m = as_matrix(rho)
        pops = np.einsum("ji,jk,ki->i", self.basis.conj(), m, self.basis).real
        return float(pops @ self.response)


def dichotomic_to_projective(m0) -> DichotomicSimulation:
    spec = hermitian_eig(m0)
    lam = spec.eigenvalues
    if lam.min() < -POVM_TOL or lam.max() > 1 + POVM_TOL:
        raise ValueError(f"{{m0, 1 - m0}} is not a valid POVM: eigenvalues in [{lam.min()}, {lam.max()}]")
    return DichotomicSimulation(spec.eigenvectors, np.clip(lam, 0.0, 1.0))


# --- post-selection ------------------------------------------------------------


def _resolve_subsystems(state: DensityState, on) -> list[int]:
    if isinstance(on, (str, int, np.integer)):
        on = [on]
    out: list[int] = []
    for item in on:
        if isinstance(item, str):
            idx = state.subsystems_of(item)
            if not idx:
                raise ValueError(f"no subsystem carries label {item!r}")
            out.extend(idx)
        else:
            out.append(int(item))
    if len(set(out)) != len(out):
        raise ValueError(f"repeated subsystem in {on}")
    return out


def measure_and_condition(state: DensityState, effect, on):
    """Apply an effect to the subsystems ``on`` and keep the rest.

    ``on`` lists subsystem indices or party labels; the effect's tensor
    factors follow that order. Returns ``(probability, conditional_state)``,
    with ``None`` as the state when the probability is below 1e-12. The
    post-measurement state uses the square-root (Lüders) update.
    """
    sub = _resolve_subsystems(state, on)
    n = len(state.dims)
    for s in sub:
        if not 0 <= s < n:
            raise IndexError(f"subsystem {s} out of range")
    e = as_matrix(effect)
    d_on = int(np.prod([state.dims[s] for s in sub]))
    if e.shape != (d_on, d_on):
        raise ValueError(f"effect of shape {e.shape} does not act on subsystems {sub} (dim {d_on})")

    rest = [i for i in range(n) if i not in sub]
    moved = permute_subsystems(state, sub + rest)
    d_rest = moved.dim // d_on
    rho = moved.matrix
    prob = float(np.real(np.trace(np.kron(e, np.eye(d_rest)) @ rho)))
    if prob < ZERO_PROB:
        return 0.0, None

    spec = hermitian_eig(e)
    root = (spec.eigenvectors * np.sqrt(np.clip(spec.eigenvalues, 0, None))) @ spec.eigenvectors.conj().T
    k = np.kron(root, np.eye(d_rest))
    post = Operator(k @ rho @ k.conj().T, moved.dims)
    kept = partial_trace(post, range(len(sub), n))
    labels = [state.labels[i] for i in rest]
    if not rest:
        return prob, None
    m = kept.matrix / prob
    m = (m + m.conj().T) / 2
    return prob, DensityState(m, kept.dims, labels, check=False)


def chsh_assignment() -> MeasurementAssignment:
    """A: Z, X; B: (Z + X)/sqrt2, (Z - X)/sqrt2 -- optimal for CHSH on |Phi+>."""
    from .tensor import SX, SZ

    a = [observable_povm(SZ), observable_povm(SX)]
    b = [observable_povm((SZ + SX) / np.sqrt(2)), observable_povm((SZ - SX) / np.sqrt(2))]
    return MeasurementAssignment([a, b])
