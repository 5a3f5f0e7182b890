import math

import numpy as np
import pytest

from pframe.bounds import applicable_bounds
from pframe.optimize import (
    OptimizerConfig,
    brute_force_2d,
    conjecture_evidence,
    default_eps_schedule,
    descend,
    figure1_closed_form,
    figure1_curve,
    figure1_grid,
    initial_configuration,
    minimize_fp,
    round_to_orthogonal_structure,
)
from pframe.potentials import fp
from pframe.sphere import Configuration


def certificate(res, kind):
    return next(c for c in res.certificates if c.kind == kind)


def offdiag(res):
    g = np.abs(res.gram())
    return g[~np.eye(g.shape[0], dtype=bool)]


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(d=2, N=3, p=0)
    with pytest.raises(ValueError):
        OptimizerConfig(d=2, N=3, p=1, restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(d=2, N=3, p=1, eps_schedule=[1e-3, 1e-2])
    with pytest.raises(ValueError):
        OptimizerConfig(d=2, N=3, p=0.5, eps_schedule=[1e-2, 0.0])
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"d": 2, "N": 3, "p": 1, "bogus": 1})
    cfg = OptimizerConfig(d=2, N=3, p=1.5)
    assert cfg.eps_schedule == default_eps_schedule(1.5) and cfg.final_eps == 0.0
    assert OptimizerConfig.from_dict(cfg.to_dict()) == cfg
    assert OptimizerConfig(d=2, N=3, p=0.5).final_eps > 0


def test_initial_configuration_streams():
    a = initial_configuration(3, 4, 7, 2)
    assert np.array_equal(a, initial_configuration(3, 4, 7, 2))
    assert not np.array_equal(a, initial_configuration(3, 4, 7, 3))
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)


def test_descend_decreases():
    x = np.stack([initial_configuration(3, 5, 0, r) for r in range(4)])
    from pframe.potentials import offdiag_potential

    before = offdiag_potential(x, 3.0)
    y, it = descend(x, 3.0, 0.0, 200, 1e-9, 0.1)
    assert np.all(offdiag_potential(y, 3.0) <= before) and np.all(it > 0)
    assert np.allclose(np.linalg.norm(y, axis=-1), 1.0)


def test_minimize_examples():
    res = minimize_fp(OptimizerConfig(d=2, N=3, p=2, restarts=16))
    assert abs(res.value - 4.5) <= 1e-6 and certificate(res, "funtf").holds
    res = minimize_fp(OptimizerConfig(d=2, N=4, p=1, restarts=16))
    assert abs(res.value - 8) <= 1e-5
    assert np.all(np.minimum(offdiag(res), np.abs(offdiag(res) - 1)) <= 1e-4)
    res = minimize_fp(OptimizerConfig(d=2, N=3, p=3, restarts=16))
    assert abs(res.value - 3.75) <= 1e-6 and certificate(res, "equiangular_funtf").holds


@pytest.mark.parametrize("threads", [2, 3, 5])
def test_thread_count_does_not_change_result(threads):
    cfg = OptimizerConfig(d=3, N=5, p=1.5, restarts=7, seed=42)
    a = minimize_fp(cfg, threads=1)
    b = minimize_fp(cfg, threads=threads)
    assert a.value == b.value and a.restart_index == b.restart_index
    assert np.array_equal(a.best.points, b.best.points)
    assert a.restart_values == b.restart_values


def test_seed_changes_streams():
    a = minimize_fp(OptimizerConfig(d=3, N=5, p=3, restarts=2, seed=1))
    b = minimize_fp(OptimizerConfig(d=3, N=5, p=3, restarts=2, seed=2))
    assert not np.array_equal(a.best.points, b.best.points)


@pytest.mark.parametrize("d,n,p", [(2, 3, 0.5), (2, 5, 1.2), (3, 4, 3), (3, 5, 2.5), (4, 5, 4), (3, 3, 1)])
def test_minimum_respects_bounds(d, n, p):
    res = minimize_fp(OptimizerConfig(d=d, N=n, p=p, restarts=8))
    for b in applicable_bounds(d, n, p):
        if b.applicable and b.name not in ("phase_p0", "onb_plus_repeat"):
            assert res.value >= b.value - 1e-7, b.name


@pytest.mark.parametrize("d,k,p", [(2, 2, 1.5), (3, 2, 1), (2, 3, 0.7)])
def test_kcopies_structure(d, k, p):
    res = minimize_fp(OptimizerConfig(d=d, N=k * d, p=p, restarts=16))
    assert abs(res.value - k * k * d) <= 1e-4
    assert np.all(np.minimum(offdiag(res), np.abs(offdiag(res) - 1)) <= 1e-4)


@pytest.mark.parametrize("d,n", [(2, 5), (3, 5), (4, 7)])
def test_p2_minimizers_are_funtf(d, n):
    res = minimize_fp(OptimizerConfig(d=d, N=n, p=2, restarts=8))
    assert res.converged and abs(res.value - n * n / d) <= 1e-6
    assert certificate(res, "funtf").holds


def test_rounding_candidate():
    x = np.array([[1.0, 1e-9], [1e-9, -1.0], [0.999, 0.01]])
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = round_to_orthogonal_structure(x)
    assert np.array_equal(np.abs(r), [[1, 0], [0, 1], [1, 0]])
    # each group representative goes to +e_c; signs within a group follow it
    assert np.array_equal(r, [[1, 0], [0, 1], [1, 0]])
    assert round_to_orthogonal_structure(Configuration.from_angles([0, 2, 4]).points) is None


def test_brute_force_examples():
    res = brute_force_2d(3, 1.0)
    assert abs(res.value - 5.0) <= 1e-8
    g = np.round(np.abs(res.gram()), 8)
    assert sorted(g[np.triu_indices(3, 1)]) == [0.0, 0.0, 1.0]
    res = brute_force_2d(3, 4.0)
    assert abs(res.value - 3.375) <= 1e-8
    assert np.allclose(np.abs(res.gram())[np.triu_indices(3, 1)], 0.5, atol=1e-6)
    res = brute_force_2d(2, 2.0)
    assert res.value == 2.0 and abs(res.gram()[0, 1]) <= 1e-15


def test_brute_force_guards():
    with pytest.raises(ValueError):
        brute_force_2d(6, 1.0)
    with pytest.raises(ValueError):
        brute_force_2d(3, 1.0, grid=361)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
def test_oracle_equivalence_small(n, p):
    opt = minimize_fp(OptimizerConfig(d=2, N=n, p=p, restarts=16))
    assert abs(opt.value - brute_force_2d(n, p).value) <= 1e-5


def test_oracle_equivalence_four_points_p15():
    opt = minimize_fp(OptimizerConfig(d=2, N=4, p=1.5, restarts=16))
    assert abs(opt.value - brute_force_2d(4, 1.5).value) <= 1e-5


def test_figure1_closed_form():
    p0 = math.log(3) / math.log(2)
    assert figure1_closed_form(1) == 5.0
    assert abs(figure1_closed_form(p0) - 5.0) <= 1e-12
    assert figure1_closed_form(10) == 3.005859375
    assert figure1_closed_form(0.05) == 5.0


def test_figure1_grid():
    g = figure1_grid()
    assert len(g) == 200 and g[0] == 0.05 and g[-1] == 10.0 and g[19] == 1.0


def test_figure1_curve_samples():
    rows = figure1_curve([1.0, 4.0, 10.0], restarts=16)
    assert [r.closed_form for r in rows] == [5.0, 3.375, 3.005859375]
    assert all(abs(r.closed_form - r.optimized) <= 1e-5 for r in rows)
    with pytest.raises(ValueError):
        figure1_curve([10.5])


def test_conjecture_evidence_label():
    out = conjecture_evidence(3, [1.0], restarts=8)
    assert out[0]["label"] == "conjectural evidence"
    assert out[0]["best_found"] >= 6 - 1e-4 and out[0]["conjectured_minimum"] == 6.0


def test_result_serializes():
    res = minimize_fp(OptimizerConfig(d=2, N=3, p=2, restarts=2))
    d = res.to_dict()
    assert d["N"] == 3 and len(d["points"]) == 3 and d["certificates"][0]["kind"] == "funtf"
    assert fp(Configuration(d["points"]), 2).value == pytest.approx(d["value"], abs=1e-12)
