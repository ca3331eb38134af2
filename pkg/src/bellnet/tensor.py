"""Dense operators on small tensor-product Hilbert spaces.

Subsystem ordering is lexicographic: the first subsystem is the most
significant digit of the flat basis index.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_SLACK = 1e-8
ZERO_EIG = 1e-15


class Operator:
    """Complex square matrix tagged with its subsystem dimensions."""

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        dims = (m.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive: {dims}")
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix side {m.shape[0]}")
        m.setflags(write=False)
        self.matrix = m
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def __repr__(self):
        return f"{type(self).__name__}(dims={list(self.dims)})"


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(a) -> np.ndarray:
    return a.matrix if isinstance(a, Operator) else np.asarray(a, dtype=complex)


def kron(*ops: Operator) -> Operator:
    """Tensor product; dims are concatenated in argument order."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    m = ops[0].matrix
    dims = list(ops[0].dims)
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
        dims.extend(op.dims)
    return Operator(m, dims)


def kron_vectors(*vecs) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, np.asarray(v, dtype=complex))
    return out


def partial_trace(op: Operator, keep: Sequence[int]) -> Operator:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems appear in ascending index order.
    """
    n = len(op.dims)
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"subsystem {k} out of range for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    t = op.matrix.reshape(op.dims + op.dims)
    # repeatedly trace the highest remaining dropped axis so indices stay valid
    cur = n
    for i in sorted(drop, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + cur)
        cur -= 1
    kept_dims = tuple(op.dims[i] for i in keep)
    side = int(np.prod(kept_dims)) if kept_dims else 1
    return Operator(t.reshape(side, side), kept_dims or (1,))


def permute_subsystems(op: Operator, order: Sequence[int]) -> Operator:
    """Reorder subsystems so that new subsystem ``j`` is old subsystem ``order[j]``."""
    n = len(op.dims)
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} subsystems")
    t = op.matrix.reshape(op.dims + op.dims)
    t = t.transpose(order + [n + i for i in order])
    dims = tuple(op.dims[i] for i in order)
    return Operator(t.reshape(op.dim, op.dim), dims)


def hermitian_eig(a) -> Spectrum:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending."""
    m = as_matrix(a)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("hermitian_eig: input is not Hermitian within 1e-10")
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    idx = np.argsort(w)[::-1]
    return Spectrum(w[idx].real, v[:, idx])


def shannon(probs, multiplicities=None) -> float:
    """Shannon entropy in bits; ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    mult = np.ones_like(p) if multiplicities is None else np.asarray(multiplicities, dtype=float)
    mask = p > ZERO_EIG
    return float(-np.sum(mult[mask] * p[mask] * np.log2(p[mask])))


def entropy(state) -> float:
    """Von Neumann entropy in bits."""
    m = as_matrix(state)
    if abs(np.trace(m).real - 1) > PSD_SLACK:
        raise ValueError("entropy: state does not have unit trace")
    w = hermitian_eig(m).eigenvalues
    if w.min() < -PSD_SLACK:
        raise ValueError(f"entropy: negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return shannon(w)


def fidelity_pure(state, ket) -> float:
    """Overlap ``<ket|state|ket>`` with a normalized pure state."""
    m = as_matrix(state)
    psi = np.asarray(ket, dtype=complex).ravel()
    if psi.shape[0] != m.shape[0]:
        raise ValueError(f"ket of length {psi.shape[0]} does not match state side {m.shape[0]}")
    if abs(np.vdot(psi, psi).real - 1) > 1e-10:
        raise ValueError("fidelity_pure: ket is not normalized")
    f = np.vdot(psi, m @ psi).real
    return float(min(1.0, max(0.0, f)))


def projector(ket) -> np.ndarray:
    psi = np.asarray(ket, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# Pauli matrices
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
