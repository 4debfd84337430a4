"""Search for good parity-oblivious quantum protocols by Riemannian ascent.

A search point is a list of d "partition" unitaries and two "measurement"
unitaries.  Column k of partition unitary ``U_l`` is the state of the k-th
string of parity class l (members ordered by x1); column b of measurement
unitary ``V_y`` is the vector for outcome b.  Since each class is an
orthonormal basis, every class sums to the identity and parity
obliviousness holds exactly at every point, so the ascent is unconstrained
on the product of unitary groups.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .game import parity_partitions
from .linalg import child_rng, qr_retract, random_unitary, unitarity_deviation
from .quantum import Measurement, QuantumProtocol, dumps_protocol

log = logging.getLogger(__name__)

UNITARY_TOL = 1e-9
IMPROVEMENT_EPS = 1e-12
MIN_STEP = 1e-14


@dataclass(frozen=True, eq=False)
class SearchPoint:
    partition_unitaries: np.ndarray  # (d, dim, dim)
    measurement_unitaries: np.ndarray  # (2, dim, dim)

    @property
    def d(self) -> int:
        return self.partition_unitaries.shape[0]

    def max_unitarity_deviation(self) -> float:
        mats = list(self.partition_unitaries) + list(self.measurement_unitaries)
        return max(unitarity_deviation(m) for m in mats)

    def validate(self, tol: float = UNITARY_TOL) -> None:
        u, v = self.partition_unitaries, self.measurement_unitaries
        if u.ndim != 3 or v.ndim != 3 or v.shape[0] != 2:
            raise ValueError(f"bad search point shapes {u.shape}, {v.shape}")
        if u.shape[1:] != (u.shape[0], u.shape[0]) or v.shape[1:] != u.shape[1:]:
            raise ValueError("all unitaries must be d x d")
        dev = self.max_unitarity_deviation()
        if dev > tol:
            raise ValueError(f"search point is not unitary (deviation {dev:.3e} > {tol:g})")


@dataclass(frozen=True)
class OptConfig:
    """Settings for :func:`seesaw_optimize`.

    The defaults are the documented configuration used by the test suite
    and the ``optimize`` command.
    """

    d: int
    restarts: int = 20
    max_iters: int = 5000
    step_init: float = 0.1
    grad_tol: float = 1e-8
    stall_iters: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be >= 1")
        if self.step_init <= 0 or self.grad_tol <= 0:
            raise ValueError("step_init and grad_tol must be positive")
        if self.stall_iters < 1:
            raise ValueError("stall_iters must be >= 1")


@dataclass
class OptResult:
    best_value: float
    best_protocol: QuantumProtocol
    per_restart_values: list[float]
    iterations_used: list[int]
    converged_flags: list[bool]
    config: OptConfig
    best_restart: int = 0
    best_point: SearchPoint | None = field(default=None, repr=False)

    def sidecar(self) -> dict:
        return {
            "best_value": self.best_value,
            "per_restart_values": self.per_restart_values,
            "iterations_used": self.iterations_used,
            "converged_flags": self.converged_flags,
            "best_restart": self.best_restart,
            "config": asdict(self.config),
        }

    def save(self, protocol_path: str | Path, sidecar_path: str | Path | None = None) -> Path:
        """Write the protocol JSON and the sidecar (default ``<stem>.meta.json``)."""
        protocol_path = Path(protocol_path)
        protocol_path.write_text(dumps_protocol(self.best_protocol))
        if sidecar_path is None:
            sidecar_path = protocol_path.with_suffix(".meta.json")
        sidecar_path = Path(sidecar_path)
        sidecar_path.write_text(json.dumps(self.sidecar(), indent=1) + "\n")
        return sidecar_path


def _index_tables(d: int) -> tuple[np.ndarray, np.ndarray]:
    """``x1[l, k]`` and ``x2[l, k]`` of the k-th member of class l."""
    table = parity_partitions(d)
    x1 = np.array([[x[0] for x in members] for members in table.classes])
    x2 = np.array([[x[1] for x in members] for members in table.classes])
    return x1, x2


def protocol_from_point(p: SearchPoint, d: int | None = None) -> QuantumProtocol:
    """Unpack a search point into a projective protocol."""
    d = p.d if d is None else d
    if p.d != d:
        raise ValueError(f"point has {p.d} partition unitaries, expected {d}")
    p.validate()
    table = parity_partitions(d)
    states = {}
    for l, members in enumerate(table.classes):
        for k, x in enumerate(members):
            states[x] = p.partition_unitaries[l][:, k]
    meas = tuple(Measurement.from_unitary(v) for v in p.measurement_unitaries)
    return QuantumProtocol(d, d, states, meas)


def point_from_protocol(proto: QuantumProtocol) -> SearchPoint:
    """Inverse of :func:`protocol_from_point` for projective protocols with dim = d."""
    if proto.dim != proto.d:
        raise ValueError("search points need dim == d")
    if not all(m.rank_one for m in proto.measurements):
        raise ValueError("search points need rank-one measurements")
    table = parity_partitions(proto.d)
    u = np.array([np.column_stack([proto.states[x] for x in members]) for members in table.classes])
    v = np.array([m.vectors.T for m in proto.measurements])
    return SearchPoint(u, v)


def random_point(d: int, rng: np.random.Generator) -> SearchPoint:
    u = np.array([random_unitary(d, rng) for _ in range(d)])
    v = np.array([random_unitary(d, rng) for _ in range(2)])
    return SearchPoint(u, v)


def _value_and_egrad(u: np.ndarray, v: np.ndarray, x1: np.ndarray, x2: np.ndarray):
    """Success probability and its Euclidean gradient in (U, V).

    With ``a = <e|psi>`` each term is ``|a|^2``; its gradient is ``2 a e``
    for psi and ``2 conj(a) psi`` for e (real inner product Re tr(A^dag B)).
    """
    d = u.shape[0]
    c = 1.0 / (2 * d * d)
    rows = np.arange(d)[:, None]
    cols = np.arange(d)[None, :]
    # overlaps[y, l, k, b] = <V_y[:, b] | U_l[:, k]>
    overlaps = np.einsum("yib,lik->ylkb", v.conj(), u)
    a1 = overlaps[0, rows, cols, x1]
    a2 = overlaps[1, rows, cols, x2]
    value = c * (np.sum(np.abs(a1) ** 2) + np.sum(np.abs(a2) ** 2))

    # dU_l[:, k] = 2c (V_1[:, x1] a1 + V_2[:, x2] a2)
    gu = 2 * c * (v[0][:, x1] * a1 + v[1][:, x2] * a2)  # (dim, l, k)
    gu = np.transpose(gu, (1, 0, 2))
    # dV_y[:, b] = 2c sum over strings with x_y == b of psi conj(a)
    gv = np.empty_like(v)
    for y, (a, xs) in enumerate(((a1, x1), (a2, x2))):
        onehot = (xs[:, :, None] == np.arange(d)).astype(float)  # (l, k, b)
        gv[y] = 2 * c * np.einsum("lik,lk,lkb->ib", u, a.conj(), onehot)
    return float(value), gu, gv


def _riemannian(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space: ``U skew(U^dag G)``."""
    a = np.swapaxes(u.conj(), -1, -2) @ g
    return u @ ((a - np.swapaxes(a.conj(), -1, -2)) / 2)


@dataclass(frozen=True)
class Gradient:
    partition: np.ndarray
    measurement: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.partition) ** 2) + np.sum(np.abs(self.measurement) ** 2)))

    def inner(self, other: "Gradient") -> float:
        """Real Frobenius inner product Re tr(A^dag B), summed over blocks."""
        return float(
            np.vdot(self.partition, other.partition).real + np.vdot(self.measurement, other.measurement).real
        )


def euclidean_gradient(p: SearchPoint) -> tuple[float, Gradient]:
    x1, x2 = _index_tables(p.d)
    value, gu, gv = _value_and_egrad(p.partition_unitaries, p.measurement_unitaries, x1, x2)
    return value, Gradient(gu, gv)


def objective_and_gradient(p: SearchPoint, d: int | None = None) -> tuple[float, Gradient]:
    """Success probability at ``p`` and its Riemannian gradient."""
    if d is not None and d != p.d:
        raise ValueError(f"point has d={p.d}, expected {d}")
    value, g = euclidean_gradient(p)
    return value, Gradient(
        _riemannian(p.partition_unitaries, g.partition),
        _riemannian(p.measurement_unitaries, g.measurement),
    )


def retract(p: SearchPoint, direction: Gradient, t: float) -> SearchPoint:
    return SearchPoint(
        qr_retract(p.partition_unitaries + t * direction.partition),
        qr_retract(p.measurement_unitaries + t * direction.measurement),
    )


def _ascend(p: SearchPoint, cfg: OptConfig, callback=None) -> tuple[SearchPoint, float, bool, int]:
    x1, x2 = _index_tables(p.d)
    u, v = p.partition_unitaries, p.measurement_unitaries
    value, gu, gv = _value_and_egrad(u, v, x1, x2)
    if callback is not None:
        callback(p, value)
    step = cfg.step_init
    stalled = 0
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        ru, rv = _riemannian(u, gu), _riemannian(v, gv)
        gnorm = np.sqrt(np.sum(np.abs(ru) ** 2) + np.sum(np.abs(rv) ** 2))
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        iterations += 1
        t = step
        while t >= MIN_STEP:
            u_new, v_new = qr_retract(u + t * ru), qr_retract(v + t * rv)
            new_value, gu_new, gv_new = _value_and_egrad(u_new, v_new, x1, x2)
            if new_value > value:
                break
            t /= 2
        else:
            log.debug("line search failed at iteration %d (value %.15f)", iterations, value)
            break
        stalled = stalled + 1 if new_value - value <= IMPROVEMENT_EPS else 0
        u, v, value, gu, gv = u_new, v_new, new_value, gu_new, gv_new
        if callback is not None:
            callback(SearchPoint(u, v), value)
        step = 2 * t
        if stalled >= cfg.stall_iters:
            break
    return SearchPoint(u, v), value, converged, iterations


def ascend(p: SearchPoint, cfg: OptConfig, callback=None) -> tuple[SearchPoint, float, bool]:
    """Riemannian gradient ascent with backtracking and QR retraction.

    Each iteration tries a step of twice the previously accepted length
    (``cfg.step_init`` on the first) and halves it until the objective
    increases.  Stops when the gradient norm drops below ``cfg.grad_tol``
    (converged), after ``cfg.stall_iters`` consecutive steps gaining at most
    1e-12, when no step down to 1e-14 increases the objective, or after
    ``cfg.max_iters`` iterations.

    ``callback(point, value)`` is called on the start point and after every
    accepted step.
    """
    point, value, converged, _ = _ascend(p, cfg, callback)
    return point, value, converged


def _run_restart(args) -> tuple[int, float, int, bool, SearchPoint]:
    cfg, index = args
    rng = child_rng(cfg.seed, index)
    start = random_point(cfg.d, rng)
    point, value, converged, iterations = _ascend(start, cfg)
    return index, value, iterations, converged, point


def seesaw_optimize(cfg: OptConfig, workers: int = 1) -> OptResult:
    """Best of ``cfg.restarts`` ascents from Haar-random starting points.

    Restart i draws its start from ``child_rng(cfg.seed, i)``, so the result
    does not depend on ``workers``; ties go to the lowest restart index.
    """
    jobs = [(cfg, i) for i in range(cfg.restarts)]
    if workers <= 1:
        runs = [_run_restart(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_restart, jobs))
    values = [r[1] for r in runs]
    best = max(range(len(runs)), key=lambda i: (values[i], -i))
    point = runs[best][4]
    log.info("d=%d best %.10f from restart %d", cfg.d, values[best], best)
    return OptResult(
        best_value=values[best],
        best_protocol=protocol_from_point(point, cfg.d),
        per_restart_values=values,
        iterations_used=[r[2] for r in runs],
        converged_flags=[r[3] for r in runs],
        config=cfg,
        best_restart=best,
        best_point=point,
    )

