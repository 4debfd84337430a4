"""Quantum d-PORAC protocols: Born-rule evaluation and parity obliviousness.

A protocol assigns a pure state to each of the d**2 input strings and holds
two d-outcome measurements, one per dit Bob may be asked for.  Outcome b of
measurement y is Bob's guess for x_y.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .game import Dits, parity_partitions, string_label, strings
from .linalg import TOL, as_vector, hermiticity_deviation


class InvalidProtocol(ValueError):
    """A protocol or measurement breaks one of its invariants."""


@dataclass(frozen=True, eq=False)
class Measurement:
    """A d-outcome POVM.

    Rank-one elements are stored as vectors ``v_b`` (element ``|v_b><v_b|``);
    general elements as full matrices.  ``vectors`` is set in the first case
    and ``None`` otherwise.
    """

    vectors: np.ndarray | None = None
    povm: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.vectors is None) == (self.povm is None):
            raise InvalidProtocol("a measurement needs either vectors or matrices, not both")
        if self.vectors is not None:
            v = np.array(self.vectors, dtype=complex)
            if v.ndim != 2:
                raise InvalidProtocol(f"measurement vectors must form a 2-d array, got shape {v.shape}")
            v.setflags(write=False)
            object.__setattr__(self, "vectors", v)
        else:
            m = np.array(self.povm, dtype=complex)
            if m.ndim != 3 or m.shape[1] != m.shape[2]:
                raise InvalidProtocol(f"POVM elements must be square matrices, got shape {m.shape}")
            m.setflags(write=False)
            object.__setattr__(self, "povm", m)

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> "Measurement":
        return cls(vectors=np.array([as_vector(v) for v in vectors]))

    @classmethod
    def from_matrices(cls, matrices: Sequence) -> "Measurement":
        return cls(povm=np.array(matrices, dtype=complex))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "Measurement":
        """Projective measurement onto the columns of ``u``; column b is outcome b."""
        return cls(vectors=np.asarray(u, dtype=complex).T)

    @property
    def rank_one(self) -> bool:
        return self.vectors is not None

    @property
    def n_outcomes(self) -> int:
        return len(self.vectors) if self.rank_one else len(self.povm)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1] if self.rank_one else self.povm.shape[1]

    @property
    def matrices(self) -> np.ndarray:
        if self.rank_one:
            return np.einsum("bi,bj->bij", self.vectors, self.vectors.conj())
        return self.povm

    def completeness_deviation(self) -> float:
        return float(np.abs(self.matrices.sum(axis=0) - np.eye(self.dim)).max())

    def validate(self, tol: float = TOL) -> None:
        if self.rank_one:
            norms = np.abs(np.einsum("bi,bi->b", self.vectors.conj(), self.vectors).real - 1.0)
            if norms.max() > tol:
                b = int(norms.argmax())
                raise InvalidProtocol(
                    f"measurement vector {b} is not normalized (deviation {norms[b]:.3e} > {tol:g})"
                )
        else:
            for b, e in enumerate(self.povm):
                herm = hermiticity_deviation(e)
                if herm > tol:
                    raise InvalidProtocol(f"POVM element {b} is not Hermitian (deviation {herm:.3e})")
                low = float(np.linalg.eigvalsh((e + e.conj().T) / 2).min())
                if low < -tol:
                    raise InvalidProtocol(f"POVM element {b} is not positive (eigenvalue {low:.3e})")
        dev = self.completeness_deviation()
        if dev > tol:
            raise InvalidProtocol(f"POVM completeness violated: max|sum E_b - I| = {dev:.3e} > {tol:g}")

    def probabilities(self, states: np.ndarray) -> np.ndarray:
        """Born probabilities for one state (shape (dim,)) or a stack (n, dim)."""
        s = np.asarray(states, dtype=complex)
        if s.shape[-1] != self.dim:
            raise InvalidProtocol(f"state dimension {s.shape[-1]} does not match measurement dimension {self.dim}")
        if self.rank_one:
            return np.abs(s @ self.vectors.conj().T) ** 2
        return np.einsum("...i,bij,...j->...b", s.conj(), self.povm, s).real

    def transformed(self, u: np.ndarray) -> "Measurement":
        if self.rank_one:
            return Measurement(vectors=self.vectors @ u.T)
        return Measurement(povm=u @ self.povm @ u.conj().T)


@dataclass(frozen=True, eq=False)
class QuantumProtocol:
    """Pure-state encoding of every string plus Bob's two measurements.

    ``tol`` is the tolerance the protocol is validated against; it is loose
    (5e-3) for protocols typed in from short decimal tables.
    """

    d: int
    dim: int
    states: Mapping[Dits, np.ndarray]
    measurements: tuple[Measurement, Measurement]
    tol: float = TOL

    def __post_init__(self):
        if self.d < 2 or self.dim < 1:
            raise InvalidProtocol(f"need d >= 2 and dim >= 1, got d={self.d}, dim={self.dim}")
        want = set(strings(self.d))
        have = set(self.states)
        if have != want:
            missing = sorted(string_label(x) for x in want - have)
            extra = sorted(map(str, have - want))
            raise InvalidProtocol(f"states must cover every string; missing {missing}, unexpected {extra}")
        states = {}
        for x in strings(self.d):
            v = np.array(self.states[x], dtype=complex)
            if v.shape != (self.dim,):
                raise InvalidProtocol(f"state {string_label(x)} has shape {v.shape}, expected ({self.dim},)")
            v.setflags(write=False)
            states[x] = v
        object.__setattr__(self, "states", states)
        if len(self.measurements) != 2:
            raise InvalidProtocol("a protocol needs exactly two measurements")
        for y, m in enumerate(self.measurements, start=1):
            if m.dim != self.dim:
                raise InvalidProtocol(f"measurement {y} acts on dimension {m.dim}, expected {self.dim}")
            if m.n_outcomes != self.d:
                raise InvalidProtocol(f"measurement {y} has {m.n_outcomes} outcomes, expected {self.d}")
        object.__setattr__(self, "measurements", tuple(self.measurements))

    def state_matrix(self) -> np.ndarray:
        """States as rows, in string index order."""
        return np.array([self.states[x] for x in strings(self.d)])

    def validate(self, tol: float | None = None) -> None:
        tol = self.tol if tol is None else tol
        for x, v in self.states.items():
            dev = abs(np.vdot(v, v).real - 1.0)
            if dev > tol:
                raise InvalidProtocol(f"state {string_label(x)} is not normalized (deviation {dev:.3e} > {tol:g})")
        for y, m in enumerate(self.measurements, start=1):
            try:
                m.validate(tol)
            except InvalidProtocol as exc:
                raise InvalidProtocol(f"measurement {y}: {exc}") from None

    def transformed(self, u: np.ndarray) -> "QuantumProtocol":
        """Apply ``|psi> -> U|psi>`` and ``E -> U E U^dag`` everywhere."""
        u = np.asarray(u, dtype=complex)
        return QuantumProtocol(
            self.d,
            self.dim,
            {x: u @ v for x, v in self.states.items()},
            tuple(m.transformed(u) for m in self.measurements),
            self.tol,
        )


def born_probabilities(state, m: Measurement) -> np.ndarray:
    """``Tr(|psi><psi| E_b)`` for every outcome b."""
    psi = as_vector(state)
    if psi.size != m.dim:
        raise InvalidProtocol(f"state dimension {psi.size} does not match measurement dimension {m.dim}")
    return m.probabilities(psi)


def outcome_table(p: QuantumProtocol) -> np.ndarray:
    """Array ``t[y-1, i, b]``: probability of outcome b of measurement y on string i."""
    s = p.state_matrix()
    return np.stack([m.probabilities(s) for m in p.measurements])


def success_probability(p: QuantumProtocol, tol: float | None = None) -> float:
    """Average probability that Bob's guess equals x_y, over x and y uniformly."""
    p.validate(tol)
    d = p.d
    table = outcome_table(p)
    idx = np.arange(d * d)
    hits = table[0, idx, idx // d].sum() + table[1, idx, idx % d].sum()
    return float(hits / (2 * d * d))


def per_string_success(p: QuantumProtocol) -> dict[str, tuple[float, float]]:
    """For each string, the probabilities of guessing x1 and x2 correctly."""
    table = outcome_table(p)
    out = {}
    for i, x in enumerate(strings(p.d)):
        out[string_label(x)] = (float(table[0, i, x[0]]), float(table[1, i, x[1]]))
    return out


@dataclass(frozen=True)
class ParityReport:
    """``max_deviation`` is entrywise; ``norm_deviation`` is the largest
    spectral norm of a pairwise difference and is unitarily invariant."""

    ok: bool
    max_deviation: float
    norm_deviation: float
    partition_sums: tuple[np.ndarray, ...] = field(repr=False, compare=False)

    def __bool__(self) -> bool:
        return self.ok


def parity_sums(p: QuantumProtocol) -> tuple[np.ndarray, ...]:
    """``sum_{x in P_l} |psi_x><psi_x|`` for l = 0..d-1."""
    table = parity_partitions(p.d)
    sums = []
    for members in table.classes:
        vs = np.array([p.states[x] for x in members])
        sums.append(vs.T @ vs.conj())
    return tuple(sums)


def check_parity_oblivious(p: QuantumProtocol, tol: float | None = None) -> ParityReport:
    """Check that the d parity-class mixtures are the same operator.

    Equal class sums make every measurement statistic independent of the
    parity, which is the operational parity-obliviousness condition.
    """
    tol = p.tol if tol is None else tol
    p.validate(tol)
    sums = parity_sums(p)
    pairs = list(combinations(sums, 2))
    dev = max((float(np.abs(a - b).max()) for a, b in pairs), default=0.0)
    norm = max((float(np.linalg.norm(a - b, 2)) for a, b in pairs), default=0.0)
    return ParityReport(dev <= tol, dev, norm, sums)


@dataclass(frozen=True, eq=False)
class OverlapTable:
    """``values[i, j] = |<psi_i|psi_j>|`` with states ordered by parity class."""

    d: int
    labels: tuple[str, ...]
    classes: tuple[int, ...]
    values: np.ndarray

    def block(self, l: int, m: int) -> np.ndarray:
        rows = [i for i, c in enumerate(self.classes) if c == l]
        cols = [j for j, c in enumerate(self.classes) if c == m]
        return self.values[np.ix_(rows, cols)]

    def distinct_values(self, decimals: int = 9) -> list[float]:
        return sorted(set(np.round(self.values, decimals).ravel().tolist()))


def mabb_overlap_table(p: QuantumProtocol) -> OverlapTable:
    """Overlap magnitudes between all encoding states, grouped by parity class.

    For mutually unbiased bases every cross-class entry is ``1/sqrt(d)``; the
    d=3 built-in protocol instead shows the asymmetric pattern 1/3, 2/3, 2/3.
    """
    table = parity_partitions(p.d)
    order = [x for members in table.classes for x in members]
    vs = np.array([p.states[x] for x in order])
    return OverlapTable(
        p.d,
        tuple(string_label(x) for x in order),
        tuple(table.class_of(x) for x in order),
        np.abs(vs.conj() @ vs.T),
    )


def violation_ratio(quantum: float, classical: Fraction | float) -> float:
    if classical <= 0:
        raise ValueError(f"classical value must be positive, got {classical}")
    return float(quantum) / float(classical)


# -- JSON ------------------------------------------------------------------


def _enc_vec(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def _dec_vec(data, what: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise InvalidProtocol(f"{what}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidProtocol(f"{what}: expected a list of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def protocol_to_dict(p: QuantumProtocol) -> dict:
    meas = []
    for m in p.measurements:
        if m.rank_one:
            elems = [{"vector": _enc_vec(v)} for v in m.vectors]
        else:
            elems = [{"matrix": [_enc_vec(row) for row in e]} for e in m.povm]
        meas.append({"elements": elems})
    return {
        "d": p.d,
        "dim": p.dim,
        "states": {string_label(x): _enc_vec(p.states[x]) for x in strings(p.d)},
        "measurements": meas,
    }


def protocol_from_dict(data: dict, tol: float = TOL) -> QuantumProtocol:
    """Parse the protocol JSON structure.  Structural problems raise InvalidProtocol."""
    try:
        d = int(data["d"])
        dim = int(data["dim"])
        raw_states = data["states"]
        raw_meas = data["measurements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidProtocol(f"protocol JSON is missing or has a malformed field: {exc}") from None
    states = {}
    for key, vec in raw_states.items():
        if len(key) != 2 or not key.isdigit():
            raise InvalidProtocol(f"state key {key!r} is not a two-dit string")
        states[(int(key[0]), int(key[1]))] = _dec_vec(vec, f"state {key}")
    if len(raw_meas) != 2:
        raise InvalidProtocol(f"expected 2 measurements, got {len(raw_meas)}")
    measurements = []
    for y, m in enumerate(raw_meas, start=1):
        elems = m.get("elements") if isinstance(m, dict) else None
        if not elems:
            raise InvalidProtocol(f"measurement {y} has no elements")
        if all("vector" in e for e in elems):
            measurements.append(
                Measurement.from_vectors([_dec_vec(e["vector"], f"measurement {y}") for e in elems])
            )
        elif all("matrix" in e for e in elems):
            mats = [
                np.array([_dec_vec(row, f"measurement {y}") for row in e["matrix"]]) for e in elems
            ]
            measurements.append(Measurement.from_matrices(mats))
        else:
            raise InvalidProtocol(f"measurement {y} mixes vector and matrix elements")
    return QuantumProtocol(d, dim, states, tuple(measurements), tol)


def dumps_protocol(p: QuantumProtocol) -> str:
    # float repr is the shortest string that round-trips, at most 17 digits
    return json.dumps(protocol_to_dict(p), indent=1) + "\n"


def save_protocol(p: QuantumProtocol, path: str | Path) -> None:
    Path(path).write_text(dumps_protocol(p))


def load_protocol(path: str | Path, tol: float = TOL) -> QuantumProtocol:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidProtocol(f"{path}: not valid JSON ({exc})") from None
    return protocol_from_dict(data, tol)
