"""Damped Newton iteration for the mixed equations and load continuation."""
import numpy as np
import pandas as pd
from scipy.sparse.linalg import splu, norm as sparse_norm
from sklearn.base import BaseEstimator, clone

from .assembly import DiscreteState, assemble_system, total_energy
from .exceptions import (SingularMatrixError, DampingFloorReachedError,
                         MaxIterationsExceededError, ContinuationError,
                         InadmissibleStartError, Dpq2p1Error)
from .fem_space import build_dof_map

__all__ = ['CriterionResult', 'check_C1', 'check_C2', 'linear_solve',
           'DampedNewton', 'newton_solve', 'continuation_solve',
           'TRACE_COLUMNS']

TRACE_COLUMNS = ['iter', 'alpha', 'halvings', 'res_u', 'res_p', 'inc_u',
                 'inc_p', 'min_det', 'max_det', 'min_sv', 'max_sv', 'energy']


class CriterionResult:
    """Outcome of an admissibility check.

    Truthy when the check passed. On failure ``element``, ``point``,
    ``quantity`` and ``value`` describe the first violation in element
    order.
    """
    def __init__(self, passed, element=None, point=None, quantity=None,
                 value=None, stats=None):
        self.passed = passed
        self.element = element
        self.point = point
        self.quantity = quantity
        self.value = value
        self.stats = {} if stats is None else stats

    def __bool__(self):
        return bool(self.passed)

    def __repr__(self):
        if self.passed:
            return "CriterionResult(passed=True)"
        return ("CriterionResult(passed=False, element={}, point={}, "
                "quantity={!r}, value={:.6g})".format(
                    self.element, self.point, self.quantity, self.value))


def _first_violation(names, values, masks):
    # masks have shape (n_elements, n_points); first failure in element order
    combined = np.zeros_like(masks[0])
    for mask in masks:
        combined |= mask
    if not combined.any():
        return None
    element, point = np.unravel_index(np.argmax(combined), combined.shape)
    for name, value, mask in zip(names, values, masks):
        if mask[element, point]:
            return (int(element), int(point), name,
                    float(value[element, point]))


def check_C1(state, sigma, c, C):
    """Principal stretch and determinant bounds at all quadrature points.

    Passes when ``sigma <= s_1 <= s_2 <= 1 / sigma`` for the singular values
    of ``grad u_h`` and ``c <= det grad u_h <= C``.

    Returns
    -------
    result : CriterionResult
        ``stats`` holds ``min_det``, ``max_det``, ``min_sv`` and ``max_sv``.
    """
    F = state.gradient()
    J = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    sv = np.linalg.svd(F, compute_uv=False)
    smax, smin = sv[..., 0], sv[..., 1]
    stats = {'min_det': float(J.min()), 'max_det': float(J.max()),
             'min_sv': float(smin.min()), 'max_sv': float(smax.max())}
    violation = _first_violation(
        ['min_sv', 'max_sv', 'det', 'det'], [smin, smax, J, J],
        [~(smin >= sigma), ~(smax <= 1. / sigma), ~(J >= c), ~(J <= C)])
    if violation is None:
        return CriterionResult(True, stats=stats)
    return CriterionResult(False, *violation, stats=stats)


def _scaled_second_derivatives(state):
    hess = state.hessian()
    value = np.abs(hess).reshape(hess.shape[:2] + (-1,)).max(axis=-1)
    return state.mesh.h_T[:, None] * value


def check_C2(state, C_bar):
    """Scaled second derivative bound ``h_T |u_h|_{2, inf, T} <= C_bar``.

    Second derivatives are taken at the quadrature points through the
    curved maps and measured in the max norm over components.

    Returns
    -------
    result : CriterionResult
        ``stats['c2']`` is the largest scaled value.
    """
    scaled = _scaled_second_derivatives(state)
    stats = {'c2': float(scaled.max())}
    violation = _first_violation(['c2'], [scaled], [~(scaled <= C_bar)])
    if violation is None:
        return CriterionResult(True, stats=stats)
    return CriterionResult(False, *violation, stats=stats)


def linear_solve(system, rtol=1e-10):
    """Solve the saddle point system by sparse LU.

    Parameters
    ----------
    system : SaddleSystem

    rtol : float, default=1e-10
        Bound on ``|K x - r| / (|K| |x| + |r|)`` in the max norm.

    Returns
    -------
    w : ndarray, shape (n_u,)
        Deformation increment, zero on Dirichlet dofs.

    dp : ndarray, shape (n_p,)
        Pressure increment.

    multipliers : ndarray, shape (n_constraints,)
    """
    if system.C is not None:
        C = system.C[:, system.dof_map.free_u_dofs].toarray()
        if np.linalg.matrix_rank(C @ C.T) < C.shape[0]:
            raise SingularMatrixError(
                "Constraint rows are linearly dependent.")
    K = system.matrix().tocsc()
    r = system.rhs()
    try:
        x = splu(K).solve(r)
    except RuntimeError as e:
        raise SingularMatrixError(
            "Saddle point matrix is singular: {}".format(e)) from e
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("Saddle point solve produced non-finite "
                                  "values.")
    residual = np.abs(K @ x - r).max()
    scale = sparse_norm(K, np.inf) * np.abs(x).max() + np.abs(r).max()
    if residual > rtol * max(scale, np.finfo(float).tiny):
        raise SingularMatrixError(
            "Saddle point solve is inaccurate: relative residual {:.3g}."
            .format(residual / scale))
    w, pi, multipliers = system.split(x)
    return w, -pi, multipliers


def _auto_C_bar(state):
    return max(10., 10. * check_C2(state, np.inf).stats['c2'])


def _trial_state(state, w, dp, alpha):
    trial = state.copy()
    trial.u += alpha * w
    trial.p += alpha * dp
    return trial


class DampedNewton(BaseEstimator):
    """Damped Newton iteration with admissibility based step halving.

    Each iteration solves the Newton system at the current iterate, tries
    the step ``alpha`` and halves it until the trial deformation satisfies
    the stretch, determinant and second derivative bounds. Accepted steps
    double ``alpha`` up to ``alpha0``.

    Parameters
    ----------
    alpha0 : float, default=1.
        Initial and largest damping parameter, in (0, 1].

    tol : float, default=1e-8
        Stop when the max norm of the deformation increment is at most
        ``tol``...

    tol_p : float, default=1e-8
        ...and the max norm of the pressure increment is below ``tol_p``.

    sigma : float or 'auto', default='auto'
        Principal stretch bound in (0, 1). ``'auto'`` uses ``rho / 2`` on
        annulus meshes and 0.5 otherwise.

    c_det : float, default=0.1
        Lower determinant bound, in (0, 1).

    C_det : float, default=10.
        Upper determinant bound, larger than 1.

    C_bar : float or 'auto', default='auto'
        Bound of the scaled second derivatives, larger than 1. ``'auto'``
        uses ``max(10, 10 * v0)`` where ``v0`` is the value of the initial
        iterate, which must itself satisfy all bounds.

    alpha_min : float, default=1e-6
        Damping floor.

    max_iter : int, default=50
        Maximum number of Newton iterations.

    quadrature : int, default=3
        Gauss points per direction.

    pin_rotation : bool, default=False
        Remove the infinitesimal rotation with a third multiplier. Needed for
        pure traction problems at zero load, where rotations are an exact
        kernel of the Newton matrix.

    verbose : int, default=0
        Verbosity level.

    Attributes
    ----------
    state_ : DiscreteState
        Converged iterate.

    trace_ : DataFrame
        One row per accepted iteration with the columns of
        ``TRACE_COLUMNS``.

    n_iter_ : int

    sigma_, C_bar_ : float
        Resolved bounds.
    """
    def __init__(self, alpha0=1., tol=1e-8, tol_p=1e-8, sigma='auto',
                 c_det=.1, C_det=10., C_bar='auto', alpha_min=1e-6,
                 max_iter=50, quadrature=3, pin_rotation=False, verbose=0):
        self.alpha0 = alpha0
        self.tol = tol
        self.tol_p = tol_p
        self.sigma = sigma
        self.c_det = c_det
        self.C_det = C_det
        self.C_bar = C_bar
        self.alpha_min = alpha_min
        self.max_iter = max_iter
        self.quadrature = quadrature
        self.pin_rotation = pin_rotation
        self.verbose = verbose

    def _check_params(self):
        if not 0 < self.alpha0 <= 1:
            raise ValueError("alpha0 should be in (0, 1], got {}.".format(
                self.alpha0))
        if not 0 < self.alpha_min < self.alpha0:
            raise ValueError("alpha_min should be in (0, alpha0), got "
                             "{}.".format(self.alpha_min))
        if not (self.tol > 0 and self.tol_p > 0):
            raise ValueError("tol and tol_p should be positive, got {} and "
                             "{}.".format(self.tol, self.tol_p))
        if self.sigma != 'auto' and not 0 < self.sigma < 1:
            raise ValueError("sigma should be in (0, 1) or 'auto', got "
                             "{!r}.".format(self.sigma))
        if not 0 < self.c_det < 1 < self.C_det:
            raise ValueError("Need 0 < c_det < 1 < C_det, got c_det={} and "
                             "C_det={}.".format(self.c_det, self.C_det))
        if self.C_bar != 'auto' and not self.C_bar > 1:
            raise ValueError("C_bar should be larger than 1 or 'auto', got "
                             "{!r}.".format(self.C_bar))
        if not (isinstance(self.max_iter, (int, np.integer))
                and self.max_iter >= 1):
            raise ValueError("max_iter should be a positive integer, got "
                             "{!r}.".format(self.max_iter))

    def _resolve_bounds(self, state):
        if self.sigma == 'auto':
            sigma = state.mesh.rho / 2 if state.mesh.rho is not None else .5
        else:
            sigma = self.sigma
        if self.C_bar == 'auto':
            C_bar = _auto_C_bar(state)
        else:
            C_bar = self.C_bar
        return sigma, C_bar

    def _admissible(self, state):
        c1 = check_C1(state, self.sigma_, self.c_det, self.C_det)
        if not c1:
            return c1
        c2 = check_C2(state, self.C_bar_)
        if not c2:
            return c2
        c1.stats.update(c2.stats)
        return c1

    def _prepare(self, state):
        dof_map = state.dof_map
        if (dof_map.boundary == 'traction'
                and dof_map.pin_rotation != self.pin_rotation):
            dof_map = build_dof_map(state.mesh,
                                    pin_rotation=self.pin_rotation)
        return DiscreteState(state.mesh, state.u, state.p, state.params,
                             dof_map, self.quadrature)

    def fit(self, state, traction=None):
        """Run the iteration from ``state``.

        Parameters
        ----------
        state : DiscreteState
            Initial iterate. It is not modified.

        traction : TractionSpec, optional
            Dead load on the outer boundary, zero by default.

        Returns
        -------
        self : DampedNewton
        """
        self._check_params()
        state = self._prepare(state)
        self.sigma_, self.C_bar_ = self._resolve_bounds(state)
        initial = self._admissible(state)
        if not initial:
            raise InadmissibleStartError(
                "Initial iterate violates the admissibility bounds: {!r}"
                .format(initial), check=initial)
        rows = []
        alpha = self.alpha0

        def trace():
            return pd.DataFrame(rows, columns=TRACE_COLUMNS)

        for k in range(1, self.max_iter + 1):
            system = assemble_system(state, traction)
            res_u = float(np.abs(system.f[state.dof_map.free_u_dofs]).max())
            res_p = float(np.abs(system.g).max())
            try:
                w, dp, _ = linear_solve(system)
            except SingularMatrixError as e:
                e.trace = trace()
                raise
            halvings = 0
            while True:
                trial = _trial_state(state, w, dp, alpha)
                check = self._admissible(trial)
                if check:
                    break
                if self.verbose > 1:
                    print("  alpha={:.3g} rejected: {!r}".format(alpha, check))
                alpha /= 2
                halvings += 1
                if alpha < self.alpha_min:
                    raise DampingFloorReachedError(
                        "Damping fell below alpha_min={} at iteration {}."
                        .format(self.alpha_min, k), trace=trace())
            inc_u = alpha * float(np.abs(w).max())
            inc_p = alpha * float(np.abs(dp).max()) if len(dp) else 0.
            stats = check.stats
            rows.append([k, alpha, halvings, res_u, res_p, inc_u, inc_p,
                         stats['min_det'], stats['max_det'], stats['min_sv'],
                         stats['max_sv'], total_energy(trial, traction)])
            if self.verbose > 0:
                print("iter {:3d} alpha={:.3g} halvings={} res_u={:.3e} "
                      "res_p={:.3e} inc_u={:.3e} inc_p={:.3e}".format(
                          k, alpha, halvings, res_u, res_p, inc_u, inc_p))
            state = trial
            if inc_u <= self.tol and inc_p < self.tol_p:
                self.state_ = state
                self.trace_ = trace()
                self.n_iter_ = k
                return self
            alpha = min(self.alpha0, 2 * alpha)
        raise MaxIterationsExceededError(
            "Newton did not converge in {} iterations.".format(self.max_iter),
            trace=trace())


def newton_solve(state, traction=None, config=None, **params):
    """Functional interface to ``DampedNewton``.

    Parameters
    ----------
    state : DiscreteState

    traction : TractionSpec, optional

    config : DampedNewton or dict, optional
        Solver parameters; keyword arguments override them.

    Returns
    -------
    state : DiscreteState

    trace : DataFrame
    """
    if isinstance(config, DampedNewton):
        solver = config.set_params(**params) if params else config
    else:
        settings = dict(config or {})
        settings.update(params)
        solver = DampedNewton(**settings)
    solver.fit(state, traction)
    return solver.state_, solver.trace_


def continuation_solve(mesh, traction, steps=8, config=None, lam0=1.2,
                       params=None, verbose=0):
    """Reach a target load by linear ramping from an analytic start.

    The start is the interpolant of the radial cavitation map with cavity
    parameter ``lam0`` under its equilibrium radial load ``t0``, with the
    matching pressure projected onto the pressure space. The load is then
    ramped linearly from ``t0 n`` to ``traction`` in ``steps`` Newton
    solves, each warm-started from the previous one. A ``C_bar='auto'``
    solver gets its bound once, from the start, for all steps.

    Parameters
    ----------
    mesh : Mesh
        Annulus mesh; its ``rho`` is the defect radius.

    traction : TractionSpec
        Target load.

    steps : int, default=8

    config : DampedNewton or dict, optional

    lam0 : float, default=1.2

    params : MaterialParams, optional

    Returns
    -------
    state : DiscreteState

    trace : DataFrame
        Concatenated Newton traces with an added ``step`` column.
    """
    from .verify.analytic import AnalyticCavitation

    if not (isinstance(steps, (int, np.integer)) and steps >= 1):
        raise ValueError("steps should be a positive integer, got {!r}."
                         .format(steps))
    if mesh.rho is None:
        raise ValueError("continuation_solve needs an annulus mesh.")
    if isinstance(config, DampedNewton):
        solver = clone(config)
    else:
        solver = DampedNewton(**dict(config or {}))
    oracle = AnalyticCavitation(mesh.rho, lam0, params=params)
    dof_map = build_dof_map(mesh, pin_rotation=solver.pin_rotation)
    state = DiscreteState.interpolate(
        mesh, oracle.deformation, oracle.pressure_field, params=oracle.params,
        dof_map=dof_map, quadrature=solver.quadrature)
    # one bound for the whole load path, fixed by the analytic start
    if solver.C_bar == 'auto':
        solver.set_params(C_bar=_auto_C_bar(state))
    t0 = oracle.traction
    traces = []
    for step in range(1, steps + 1):
        load = traction.ramp(t0, step / steps)
        if verbose > 0:
            print("step {}/{}: {!r}".format(step, steps, load))
        try:
            state, trace = newton_solve(state, load, solver)
        except Dpq2p1Error as e:
            partial = getattr(e, 'trace', None)
            raise ContinuationError(
                "Load step {} of {} failed: {}".format(step, steps, e),
                step=step, trace=partial) from e
        traces.append(trace.assign(step=step))
    return state, pd.concat(traces, ignore_index=True)
