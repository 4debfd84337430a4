import json

import numpy as np
import pytest

from porac.game import noncontextual_bound, parity_partitions
from porac.linalg import make_rng, qr_retract
from porac.optimizer import (
    OptConfig,
    SearchPoint,
    ascend,
    euclidean_gradient,
    objective_and_gradient,
    point_from_protocol,
    protocol_from_point,
    random_point,
    seesaw_optimize,
)
from porac.protocols import builtin_protocol
from porac.quantum import check_parity_oblivious, load_protocol, success_probability


def loop_objective(u, v):
    """Success probability written out term by term; independent of the vectorised code."""
    d = u.shape[0]
    total = 0.0
    for l, members in enumerate(parity_partitions(d).classes):
        for k, (x1, x2) in enumerate(members):
            psi = u[l][:, k]
            total += abs(np.vdot(v[0][:, x1], psi)) ** 2 + abs(np.vdot(v[1][:, x2], psi)) ** 2
    return total / (2 * d * d)


def identity_point(d):
    eye = np.eye(d, dtype=complex)
    return SearchPoint(np.array([eye] * d), np.array([eye, eye]))


def test_identity_point_d2():
    p = protocol_from_point(identity_point(2))
    value = success_probability(p)
    assert 0 <= value <= 1
    assert objective_and_gradient(identity_point(2))[0] == value
    assert {tuple(np.round(p.states[x].real, 12)) for x in [(0, 0), (1, 1)]} == {(1, 0), (0, 1)}


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_identity_point_objective_matches_quantum(d):
    pt = identity_point(d)
    assert objective_and_gradient(pt)[0] == success_probability(protocol_from_point(pt))


def test_round_trip_builtin3():
    p = builtin_protocol(3)
    pt = point_from_protocol(p)
    q = protocol_from_point(pt, 3)
    assert success_probability(q) == pytest.approx(7 / 9, abs=1e-12)
    assert objective_and_gradient(pt)[0] == pytest.approx(7 / 9, abs=1e-12)


def test_random_point_is_parity_oblivious():
    p = protocol_from_point(random_point(3, make_rng(123)), 3)
    assert check_parity_oblivious(p, 1e-9).ok


def test_invalid_point_rejected():
    pt = random_point(3, make_rng(1))
    bad = SearchPoint(pt.partition_unitaries * 1.01, pt.measurement_unitaries)
    with pytest.raises(ValueError, match="not unitary"):
        protocol_from_point(bad)
    with pytest.raises(ValueError):
        protocol_from_point(pt, 4)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_euclidean_gradient_finite_differences(d):
    h = 1e-6
    for seed in range(10):
        pt = random_point(d, make_rng(1000 * d + seed))
        _, g = euclidean_gradient(pt)
        u, v = pt.partition_unitaries, pt.measurement_unitaries
        worst = 0.0
        for arr_name, grad in (("u", g.partition), ("v", g.measurement)):
            base = {"u": u, "v": v}
            fd = np.zeros_like(grad)
            for idx in np.ndindex(grad.shape):
                for unit, part in ((1.0, "re"), (1j, "im")):
                    plus = {k: a.copy() for k, a in base.items()}
                    minus = {k: a.copy() for k, a in base.items()}
                    plus[arr_name][idx] += unit * h
                    minus[arr_name][idx] -= unit * h
                    diff = (loop_objective(plus["u"], plus["v"]) - loop_objective(minus["u"], minus["v"])) / (2 * h)
                    fd[idx] += diff if part == "re" else 1j * diff
            worst = max(worst, np.abs(fd - grad).max() / np.abs(grad).max())
        assert worst <= 1e-4


@pytest.mark.parametrize("d", [2, 3, 4])
def test_riemannian_gradient_directional_derivatives(d):
    h = 1e-6
    for seed in range(10):
        rng = make_rng(5000 + 100 * d + seed)
        pt = random_point(d, rng)
        _, g = objective_and_gradient(pt)
        for _ in range(3):
            def skew(n):
                a = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
                return (a - np.swapaxes(a.conj(), -1, -2)) / 2

            xu = pt.partition_unitaries @ skew(d)
            xv = pt.measurement_unitaries @ skew(2)

            def f(t):
                return loop_objective(
                    qr_retract(pt.partition_unitaries + t * xu), qr_retract(pt.measurement_unitaries + t * xv)
                )

            fd = (f(h) - f(-h)) / (2 * h)
            an = np.vdot(g.partition, xu).real + np.vdot(g.measurement, xv).real
            assert abs(fd - an) <= 1e-4 * abs(an)


def test_builtin3_is_stationary():
    _, g = objective_and_gradient(point_from_protocol(builtin_protocol(3)))
    assert g.norm() <= 1e-6


def test_ascend_from_builtin3_keeps_value():
    pt = point_from_protocol(builtin_protocol(3))
    _, value, _ = ascend(pt, OptConfig(3, max_iters=200))
    assert value >= 7 / 9 - 1e-9


@pytest.mark.parametrize("d", [2, 3, 4])
def test_ascend_monotone_and_unitary(d):
    values, devs = [], []

    def record(point, value):
        values.append(value)
        devs.append(point.max_unitarity_deviation())

    cfg = OptConfig(d, max_iters=300)
    final, value, _ = ascend(random_point(d, make_rng(77 + d)), cfg, callback=record)
    assert len(values) > 1
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert max(devs) <= 1e-9
    assert value == values[-1]
    assert check_parity_oblivious(protocol_from_point(final), 1e-9).ok


def test_ascend_returns_converged_flag():
    _, _, converged = ascend(random_point(2, make_rng(3)), OptConfig(2))
    assert converged
    _, _, converged = ascend(random_point(3, make_rng(3)), OptConfig(3, max_iters=2))
    assert not converged


def test_d2_best_of_20():
    result = seesaw_optimize(OptConfig(2, restarts=20, seed=0))
    assert result.best_value >= 0.8535 - 1e-3
    # the d=2 optimum is (1 + 1/sqrt 2) / 2
    assert result.best_value == pytest.approx((1 + 2**-0.5) / 2, abs=1e-9)


def test_seesaw_d3():
    result = seesaw_optimize(OptConfig(3, restarts=20, seed=7))
    assert result.best_value >= 7 / 9 - 1e-4
    assert result.best_value <= 1
    assert result.best_value == max(result.per_restart_values)
    assert check_parity_oblivious(result.best_protocol, 1e-9).ok
    assert success_probability(result.best_protocol) == pytest.approx(result.best_value, abs=1e-12)
    assert result.best_value > noncontextual_bound(3)


def test_seesaw_deterministic_across_workers():
    cfg = OptConfig(3, restarts=4, max_iters=100, seed=11)
    a = seesaw_optimize(cfg)
    b = seesaw_optimize(cfg, workers=2)
    c = seesaw_optimize(cfg)
    assert np.array(a.per_restart_values).tobytes() == np.array(b.per_restart_values).tobytes()
    assert a.per_restart_values == c.per_restart_values
    assert a.iterations_used == b.iterations_used
    assert a.best_point.partition_unitaries.tobytes() == b.best_point.partition_unitaries.tobytes()


def test_seesaw_seed_changes_starts():
    a = seesaw_optimize(OptConfig(3, restarts=2, max_iters=3, seed=1))
    b = seesaw_optimize(OptConfig(3, restarts=2, max_iters=3, seed=2))
    assert a.per_restart_values != b.per_restart_values


def test_result_save(tmp_path):
    result = seesaw_optimize(OptConfig(2, restarts=2, seed=5))
    sidecar = result.save(tmp_path / "best.json")
    meta = json.loads(sidecar.read_text())
    assert meta["best_value"] == result.best_value
    assert meta["per_restart_values"] == result.per_restart_values
    assert meta["config"]["d"] == 2 and meta["config"]["seed"] == 5
    proto = load_protocol(tmp_path / "best.json")
    assert success_probability(proto) == pytest.approx(result.best_value, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        OptConfig(3, restarts=0)
    with pytest.raises(ValueError):
        OptConfig(3, step_init=0)
    with pytest.raises(ValueError):
        OptConfig(1)
