import pytest
import numpy as np
import scipy.sparse as sp
from numpy.testing import assert_allclose

import dpq2p1.newton
from dpq2p1.assembly import (DiscreteState, SaddleSystem, TractionSpec,
                             assemble_system, assemble_f, assemble_g)
from dpq2p1.datasets import geometric_layers, table1_layers
from dpq2p1.exceptions import (SingularMatrixError, DampingFloorReachedError,
                               MaxIterationsExceededError, ContinuationError,
                               InadmissibleStartError)
from dpq2p1.fem_space import build_dof_map
from dpq2p1.mesh import build_annulus_mesh, build_rectangle_mesh
from dpq2p1.newton import (check_C1, check_C2, linear_solve, DampedNewton,
                           newton_solve, continuation_solve, TRACE_COLUMNS)
from dpq2p1.verify import AnalyticCavitation


def perturbed_state(mesh, seed=0, scale=.01, **kwargs):
    rng = np.random.RandomState(seed)
    state = DiscreteState.identity(mesh, **kwargs)
    state.u += scale * rng.randn(len(state.u))
    return state


def scaled_identity(mesh, scale):
    return DiscreteState.interpolate(mesh, lambda x: x * scale)


def test_check_C1():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    result = check_C1(DiscreteState.identity(mesh), .5, .1, 10.)
    assert result
    assert_allclose([result.stats['min_det'], result.stats['max_det']], 1.)
    assert_allclose([result.stats['min_sv'], result.stats['max_sv']], 1.)
    result = check_C1(scaled_identity(mesh, 3.), .5, .1, 10.)
    assert not result
    assert (result.element, result.point) == (0, 0)
    assert result.quantity == 'max_sv'
    assert_allclose(result.value, 3.)
    result = check_C1(scaled_identity(mesh, .4), .5, .1, 10.)
    assert result.quantity == 'min_sv'
    result = check_C1(scaled_identity(mesh, 4.), .1, .1, 10.)
    assert result.quantity == 'det'
    assert_allclose(result.value, 16.)
    assert "passed=False" in repr(result)


def test_check_C2():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    result = check_C2(DiscreteState.identity(mesh), 10.)
    assert result
    assert result.stats['c2'] <= 1e-10
    state = DiscreteState.interpolate(
        mesh, lambda x: x + .3 * x[:, :1] ** 2 * [1., 0.])
    c2 = check_C2(state, np.inf).stats['c2']
    assert c2 > 0
    assert check_C2(state, 2 * c2)
    result = check_C2(state, c2 / 2)
    assert not result
    assert result.quantity == 'c2'


def test_linear_solve_matches_dense():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    dof_map = build_dof_map(mesh, pin_rotation=True)
    state = perturbed_state(mesh, seed=1, dof_map=dof_map)
    system = assemble_system(state, TractionSpec('radial', .1))
    w, dp, m = linear_solve(system)
    x = np.linalg.solve(system.matrix().toarray(), system.rhs())
    expected_w, pi, expected_m = system.split(x)
    assert_allclose(w, expected_w, atol=1e-10)
    assert_allclose(dp, -pi, atol=1e-10)
    assert_allclose(m, expected_m, atol=1e-10)
    assert_allclose(system.A @ w - system.B.T @ dp + system.C.T @ m,
                    system.f, atol=1e-9)
    assert_allclose(system.B @ w, system.g, atol=1e-10)


def test_linear_solve_singular():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 1)
    state = DiscreteState.identity(mesh)
    system = assemble_system(state)
    duplicate = sp.vstack([system.C[:1], system.C[:1]]).tocsr()
    with pytest.raises(SingularMatrixError):
        linear_solve(SaddleSystem(system.A, system.B, duplicate, system.f,
                                  system.g, system.dof_map))
    with pytest.raises(SingularMatrixError):
        linear_solve(SaddleSystem(0 * system.A, 0 * system.B, system.C,
                                  system.f, system.g, system.dof_map))


def test_newton_identity_is_fixed_point():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    solver = DampedNewton(pin_rotation=True).fit(DiscreteState.identity(mesh))
    assert solver.n_iter_ == 1
    assert list(solver.trace_.columns) == TRACE_COLUMNS
    assert solver.sigma_ == .5
    assert solver.C_bar_ == 10.
    assert_allclose(solver.state_.u, mesh.nodes.ravel(), atol=1e-10)


def test_newton_converges_from_perturbation():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    state = perturbed_state(mesh, seed=2)
    u0 = state.u.copy()
    solver = DampedNewton(pin_rotation=True, max_iter=20).fit(state)
    # the initial iterate is left untouched
    assert np.array_equal(state.u, u0)
    final = solver.state_
    free = final.dof_map.free_u_dofs
    assert np.abs(assemble_f(final)[free]).max() <= 1e-8
    assert np.abs(assemble_g(final)).max() <= 1e-10
    trace = solver.trace_
    assert len(trace) == solver.n_iter_
    assert trace['inc_u'].iloc[-1] <= solver.tol
    # every accepted iterate satisfies the stretch and determinant bounds
    assert np.all(trace['min_det'] >= solver.c_det)
    assert np.all(trace['max_det'] <= solver.C_det)
    assert np.all(trace['min_sv'] >= solver.sigma_)
    assert np.all(trace['max_sv'] <= 1 / solver.sigma_)


def test_newton_rejects_inadmissible_start():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    with pytest.raises(InadmissibleStartError) as excinfo:
        DampedNewton(sigma=.5, pin_rotation=True).fit(
            scaled_identity(mesh, 3.))
    assert excinfo.value.check.quantity == 'max_sv'
    assert_allclose(excinfo.value.check.value, 3.)


def test_newton_halves_from_compressed_start():
    # homogeneous Newton steps map a I to (a^2 + 1) / (2 a) I; from a = 0.12
    # the full step has det 17.9 > C_det, half of it has det 4.7
    mesh = build_rectangle_mesh([-1., -1.], [1., 1.], 2)
    solver = DampedNewton(sigma=.1, c_det=.01, C_det=10., pin_rotation=True,
                          max_iter=20)
    solver.fit(scaled_identity(mesh, .12))
    trace = solver.trace_
    assert trace['halvings'].iloc[0] == 1
    assert trace['alpha'].iloc[0] == .5
    assert_allclose(trace['max_sv'].iloc[0], .12 + .5 * (4.22667 - .12),
                    rtol=1e-4)
    assert trace['alpha'].iloc[1] == 1.
    assert (trace['halvings'].iloc[1:] == 0).all()
    for column in ['min_det', 'max_det', 'min_sv', 'max_sv']:
        assert_allclose(trace[column].iloc[-1], 1., atol=1e-8)
    assert np.all(trace['min_det'] >= solver.c_det)
    assert np.all(trace['max_det'] <= solver.C_det)
    assert np.all(trace['min_sv'] >= solver.sigma_)
    assert np.all(trace['max_sv'] <= 1 / solver.sigma_)
    assert check_C1(solver.state_, solver.sigma_, solver.c_det, solver.C_det)


def test_newton_identity_on_curved_mesh():
    # the interpolated identity is not exact on ring sectors, so it leaves a
    # small residual; without the rotation pin Newton crawls along the
    # nearly free rotation
    layers, n_sectors = table1_layers(.01, .05)
    mesh = build_annulus_mesh(.01, layers, n_sectors, h=.05)
    state = DiscreteState.identity(mesh)
    pinned = DampedNewton(pin_rotation=True).fit(state)
    res_u = pinned.trace_['res_u'].iloc[0]
    assert 1e-4 < res_u < 5e-3
    assert pinned.n_iter_ <= 5
    free = DampedNewton(pin_rotation=False).fit(state)
    assert free.n_iter_ > pinned.n_iter_
    assert_allclose(free.trace_['res_u'].iloc[0], res_u, rtol=1e-10)
    for solver in [pinned, free]:
        assert_allclose(solver.trace_['max_det'].iloc[-1], 1., atol=1e-2)


def test_newton_halves_inadmissible_steps(monkeypatch):
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    state = DiscreteState.identity(mesh)

    def stretching_solve(system):
        # trial gradients (1 + 3 alpha) I
        return 3 * mesh.nodes.ravel(), np.zeros(system.dof_map.n_p), None

    monkeypatch.setattr(dpq2p1.newton, 'linear_solve', stretching_solve)
    with pytest.raises(MaxIterationsExceededError) as excinfo:
        DampedNewton(max_iter=1).fit(state)
    trace = excinfo.value.trace
    assert len(trace) == 1
    assert trace['alpha'].iloc[0] == .25
    assert trace['halvings'].iloc[0] == 2
    assert_allclose(trace['max_sv'].iloc[0], 1.75)


def test_newton_damping_floor(monkeypatch):
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    state = DiscreteState.identity(mesh)

    def folding_solve(system):
        direction = np.zeros_like(mesh.nodes)
        direction[:, 0] = -1e7 * mesh.nodes[:, 0]
        return direction.ravel(), np.zeros(system.dof_map.n_p), None

    monkeypatch.setattr(dpq2p1.newton, 'linear_solve', folding_solve)
    with pytest.raises(DampingFloorReachedError) as excinfo:
        DampedNewton(alpha_min=1e-6).fit(state)
    assert len(excinfo.value.trace) == 0
    assert list(excinfo.value.trace.columns) == TRACE_COLUMNS


def test_newton_max_iter():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    with pytest.raises(MaxIterationsExceededError) as excinfo:
        DampedNewton(pin_rotation=True, max_iter=1).fit(
            perturbed_state(mesh, seed=3))
    assert len(excinfo.value.trace) == 1


@pytest.mark.parametrize("params", [
    {'alpha0': 0.}, {'alpha0': 1.5}, {'alpha_min': 2.}, {'tol': 0.},
    {'sigma': 1.}, {'c_det': 1.}, {'C_det': .5}, {'C_bar': 1.},
    {'max_iter': 0}, {'max_iter': 2.5}])
def test_damped_newton_check_params(params):
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 1)
    with pytest.raises(ValueError):
        DampedNewton(**params).fit(DiscreteState.identity(mesh))


def test_newton_solve_config():
    mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    state, trace = newton_solve(DiscreteState.identity(mesh),
                                config={'pin_rotation': False},
                                pin_rotation=True)
    assert state.dof_map.pin_rotation
    assert len(trace) == 1
    solver = DampedNewton(max_iter=5)
    state, _ = newton_solve(DiscreteState.identity(mesh), config=solver,
                            pin_rotation=True)
    assert solver.pin_rotation
    assert state is solver.state_


def test_continuation_rejects():
    mesh = build_annulus_mesh(.5, [(.5, .5)], 4)
    with pytest.raises(ValueError):
        continuation_solve(mesh, TractionSpec('radial', 1.), steps=0)
    with pytest.raises(ValueError):
        continuation_solve(build_rectangle_mesh([0., 0.], [1., 1.], 1),
                           TractionSpec('radial', 1.))


def test_continuation_reaches_cavitation_load():
    rho, lam = .5, 1.3
    mesh = build_annulus_mesh(rho, geometric_layers(rho, 2), 8)
    oracle = AnalyticCavitation(rho, lam)
    state, trace = continuation_solve(mesh, oracle.traction_spec(), steps=2,
                                      lam0=1.2)
    assert sorted(trace['step'].unique()) == [1, 2]
    outer = np.isclose(np.hypot(*mesh.nodes.T), 1.)
    radii = np.hypot(*state.u.reshape(-1, 2)[outer].T)
    assert_allclose(radii, lam, rtol=1e-2)
    assert np.all(trace['min_det'] >= .1)


def test_continuation_fixes_C_bar_once(monkeypatch):
    rho = .5
    mesh = build_annulus_mesh(rho, geometric_layers(rho, 2), 8)
    bounds = []

    def recording_solve(state, traction, config):
        bounds.append(config.C_bar)
        return newton_solve(state, traction, config)

    monkeypatch.setattr(dpq2p1.newton, 'newton_solve', recording_solve)
    solver = DampedNewton()
    continuation_solve(mesh, AnalyticCavitation(rho, 1.3).traction_spec(),
                       steps=3, config=solver)
    assert len(bounds) == 3
    assert all(isinstance(C_bar, float) for C_bar in bounds)
    assert bounds == [bounds[0]] * 3
    assert bounds[0] >= 10.
    # the caller's solver keeps its setting
    assert solver.C_bar == 'auto'


def test_continuation_wraps_inadmissible_start():
    # the analytic start stretches the cavity by 1.66
    rho = .5
    mesh = build_annulus_mesh(rho, geometric_layers(rho, 2), 8)
    traction = AnalyticCavitation(rho, 1.3).traction_spec()
    with pytest.raises(ContinuationError) as excinfo:
        continuation_solve(mesh, traction, steps=2, config={'sigma': .7},
                           lam0=1.2)
    assert excinfo.value.step == 1
    assert isinstance(excinfo.value.__cause__, InadmissibleStartError)
