"""State families and network composition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (
    PSD_SLACK,
    Operator,
    kron,
    kron_vectors,
    permute_subsystems,
    projector,
)

MAX_NETWORK_DIM = 2**12


class DensityState(Operator):
    """Positive, unit-trace operator whose subsystems carry party labels.

    ``labels[i]`` names the party holding subsystem ``i``. Parties are
    identified with contiguous runs of equal labels when behaviors are
    computed.
    """

    __slots__ = ("labels",)

    def __init__(self, matrix, dims=None, labels=None, check=True):
        super().__init__(matrix, dims)
        if labels is None:
            labels = tuple(_default_label(i) for i in range(len(self.dims)))
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(self.dims):
            raise ValueError(f"{len(labels)} labels for {len(self.dims)} subsystems")
        self.labels = labels
        if check:
            _check_state(self.matrix)

    @classmethod
    def from_operator(cls, op: Operator, labels=None, check=True) -> "DensityState":
        return cls(op.matrix, op.dims, labels, check)

    def relabel(self, labels) -> "DensityState":
        return DensityState(self.matrix, self.dims, labels, check=False)

    @property
    def parties(self) -> list[str]:
        """Party labels in order of first appearance."""
        out = []
        for lab in self.labels:
            if lab not in out:
                out.append(lab)
        return out

    def party_dims(self) -> list[int]:
        """Hilbert-space dimension of each party; requires contiguous labels."""
        dims = []
        prev = None
        seen = set()
        for lab, d in zip(self.labels, self.dims):
            if lab == prev:
                dims[-1] *= d
                continue
            if lab in seen:
                raise ValueError(f"subsystems of party {lab!r} are not contiguous: {self.labels}")
            seen.add(lab)
            dims.append(d)
            prev = lab
        return dims

    def subsystems_of(self, party: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == party]

    def __repr__(self):
        return f"DensityState(dims={list(self.dims)}, labels={list(self.labels)})"


def _default_label(i: int) -> str:
    return chr(ord("A") + i) if i < 26 else f"P{i}"


def _check_state(m: np.ndarray) -> None:
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10:
        raise ValueError("state is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1) > PSD_SLACK:
        raise ValueError(f"state trace is {tr}, expected 1")
    lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
    if lo < -PSD_SLACK:
        raise ValueError(f"state has negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class IsotropicParams:
    p: float
    d: int = 2

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise weight p must lie in [0, 1], got {self.p}")
        if self.d < 2:
            raise ValueError(f"local dimension must be at least 2, got {self.d}")


def phi_ket(d: int = 2) -> np.ndarray:
    """(1/sqrt d) sum_i |ii>."""
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return v


def ghz_ket(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def max_entangled(d: int = 2, labels=("A", "B")) -> DensityState:
    if d < 2:
        raise ValueError(f"max_entangled needs d >= 2, got {d}")
    return DensityState(projector(phi_ket(d)), (d, d), labels)


def ghz(n: int, labels=None) -> DensityState:
    if n < 1:
        raise ValueError(f"ghz needs n >= 1, got {n}")
    return DensityState(projector(ghz_ket(n)), (2,) * n, labels)


def maximally_mixed(dims: Sequence[int], labels=None) -> DensityState:
    side = int(np.prod(dims))
    return DensityState(np.eye(side) / side, dims, labels)


def isotropic(params: IsotropicParams | float, d: int | None = None, labels=("A", "B")) -> DensityState:
    """p |Phi><Phi| + (1 - p) 1/d^2.

    Accepts either an ``IsotropicParams`` or a bare ``p`` (with ``d``).
    """
    if not isinstance(params, IsotropicParams):
        params = IsotropicParams(float(params), 2 if d is None else int(d))
    p, d = params.p, params.d
    m = p * projector(phi_ket(d)) + (1 - p) * np.eye(d * d) / (d * d)
    return DensityState(m, (d, d), labels)


def product_state(*states: DensityState) -> DensityState:
    op = kron(*states)
    labels = [lab for s in states for lab in s.labels]
    return DensityState(op.matrix, op.dims, labels, check=False)


def sigma_state() -> DensityState:
    """Flagged mixture of a Bell pair on AB (flags 000) or on AC (flags 111).

    Subsystems are ordered A, B, C, A_f, B_f, C_f; the idle qubit is |0>.
    """
    zero = np.array([1, 0], dtype=complex)
    one = np.array([0, 1], dtype=complex)
    phi = phi_ket(2).reshape(2, 2)
    # |Phi>_AB |0>_C
    psi1 = np.einsum("ab,c->abc", phi, zero).ravel()
    # |Phi>_AC |0>_B
    psi2 = np.einsum("ac,b->abc", phi, zero).ravel()
    branch1 = kron_vectors(psi1, zero, zero, zero)
    branch2 = kron_vectors(psi2, one, one, one)
    m = (projector(branch1) + projector(branch2)) / 2
    return DensityState(m, (2,) * 6, ("A", "B", "C", "Af", "Bf", "Cf"))


@dataclass(frozen=True)
class TauDescriptor:
    """Symbolic handle on the flagged star state shared by a centre and N leaves.

    Nothing is materialized; ``copy_dimension`` is exact integer arithmetic.
    """

    N: int
    p: float
    L: int = 1
    filler: str = "maximally mixed qubit"

    def __post_init__(self):
        if self.N < 1 or self.L < 1:
            raise ValueError("tau descriptor needs N >= 1 and L >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def n_parties(self) -> int:
        return self.N + 1

    @property
    def copy_dimension(self) -> int:
        # one qubit + one N-level flag per party
        return (2 * self.N) ** (self.N + 1)

    @property
    def total_dimension(self) -> int:
        return self.copy_dimension**self.L


def tau_descriptor(N: int, p: float, L: int = 1) -> TauDescriptor:
    return TauDescriptor(int(N), float(p), int(L))


# --- networks -----------------------------------------------------------------


@dataclass
class Link:
    assign: list[str]
    spec: dict = field(default_factory=dict)


@dataclass
class NetworkLayout:
    parties: list[str]
    links: list[Link]

    def __post_init__(self):
        known = set(self.parties)
        if len(known) != len(self.parties):
            raise ValueError(f"duplicate party labels in {self.parties}")
        for k, link in enumerate(self.links):
            for party in link.assign:
                if party not in known:
                    raise ValueError(f"link {k} assigns a subsystem to unknown party {party!r}")

    def to_json(self) -> str:
        links = [dict(link.spec, assign=list(link.assign)) for link in self.links]
        return json.dumps({"parties": list(self.parties), "links": links})

    @classmethod
    def from_json(cls, text: str) -> "NetworkLayout":
        obj = json.loads(text)
        links = []
        for entry in obj["links"]:
            entry = dict(entry)
            assign = entry.pop("assign")
            links.append(Link(list(assign), entry))
        return cls(list(obj["parties"]), links)


def state_from_spec(spec: dict) -> DensityState:
    """Build a link state from a JSON spec like ``{"state": "iso", "p": 0.8, "d": 2}``."""
    kind = spec.get("state", "iso")
    if kind == "iso":
        return isotropic(IsotropicParams(float(spec["p"]), int(spec.get("d", 2))))
    if kind == "phi":
        return max_entangled(int(spec.get("d", 2)))
    if kind == "ghz":
        return ghz(int(spec["n"]))
    if kind == "mixed":
        d = int(spec.get("d", 2))
        return maximally_mixed((d, d))
    raise ValueError(f"unknown link state kind {kind!r}")


def lambda_layout(spec: dict | None = None) -> NetworkLayout:
    """Centre A shares one link with B and one with C."""
    spec = {"state": "phi", "d": 2} if spec is None else spec
    return NetworkLayout(["A", "B", "C"], [Link(["A", "B"], dict(spec)), Link(["A", "C"], dict(spec))])


def star_layout(n: int, spec: dict | None = None) -> NetworkLayout:
    """Centre A linked to leaves B1..Bn."""
    spec = {"state": "phi", "d": 2} if spec is None else spec
    leaves = [f"B{i + 1}" for i in range(n)]
    return NetworkLayout(["A"] + leaves, [Link(["A", b], dict(spec)) for b in leaves])


def compose_network(layout: NetworkLayout, states: Sequence[DensityState] | None = None):
    """Tensor the link states together and group subsystems by party.

    Returns the composed state (parties contiguous, in ``layout.parties``
    order) and a map from party to the subsystem indices it owns in the
    link-ordered product before regrouping.
    """
    if states is None:
        states = [state_from_spec(link.spec) for link in layout.links]
    if len(states) != len(layout.links):
        raise ValueError(f"{len(states)} states for {len(layout.links)} links")
    dims: list[int] = []
    owners: list[str] = []
    for k, (link, st) in enumerate(zip(layout.links, states)):
        if len(link.assign) != len(st.dims):
            raise ValueError(
                f"link {k}: {len(st.dims)} subsystems but {len(link.assign)} assignments"
            )
        dims.extend(st.dims)
        owners.extend(link.assign)
    total = int(np.prod(dims))
    if total > MAX_NETWORK_DIM:
        raise ValueError(f"network dimension {total} exceeds guard {MAX_NETWORK_DIM}")

    ownership = {party: [i for i, o in enumerate(owners) if o == party] for party in layout.parties}
    op = kron(*states)
    order = [i for party in layout.parties for i in ownership[party]]
    op = permute_subsystems(op, order)
    labels = [owners[i] for i in order]
    return DensityState(op.matrix, op.dims, labels, check=False), ownership
