"""Convergence studies over mesh sequences."""
import os
import warnings

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..assembly import TractionSpec
from ..exceptions import StudyWarning
from ..newton import DampedNewton, continuation_solve
from .analytic import AnalyticCavitation, traction_for
from .errors import ReferenceSolution, error_norms

__all__ = ['ConvergenceTable', 'fit_loglog', 'dof_slope',
           'convergence_study', 'solve_reference', 'ERROR_COLUMNS']

ERROR_COLUMNS = ['dE', 'W1s', 'detL1', 'detL2', 'pL2']

_FIGURES = {'energy': ['dE'], 'w1s': ['W1s'], 'det': ['detL1', 'detL2'],
            'pressure': ['pL2']}


def fit_loglog(x, y):
    """Least squares slope of ``log(y)`` against ``log(x)``.

    Examples
    --------
    >>> round(fit_loglog([1., 2., 4.], [1., 4., 16.]), 10)
    2.0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("At least two points are needed for a slope.")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def dof_slope(meshes):
    """Slope of ``log(N_d)`` against ``log(h)`` of a mesh sequence."""
    h = [mesh.h for mesh in meshes]
    n_dofs = [2 * mesh.n_nodes for mesh in meshes]
    return fit_loglog(h, n_dofs)


class ConvergenceTable:
    """Errors along a mesh sequence with fitted rates.

    Attributes
    ----------
    rows : DataFrame
        Columns ``h``, ``N_d`` and the error columns, finest mesh last.

    slopes : Series
        Slope of each error against ``h`` in log-log scale.

    nd_slope : float
        Slope of ``N_d`` against ``h``.

    label : str
        ``'sym'`` for the radial load, ``'nonsym'`` for the modulated one.
    """
    def __init__(self, rows, label='sym'):
        self.rows = rows.reset_index(drop=True)
        self.label = label
        self.slopes = pd.Series({col: fit_loglog(rows.h, rows[col])
                                 for col in ERROR_COLUMNS
                                 if np.all(rows[col] > 0)})
        self.nd_slope = fit_loglog(rows.h, rows.N_d)

    def decreasing(self):
        """Whether every error decreases strictly under refinement."""
        ordered = self.rows.sort_values('h', ascending=False)
        return {col: bool(np.all(np.diff(ordered[col].values) < 0))
                for col in ERROR_COLUMNS}

    def summary_row(self):
        row = {'h': 'slope', 'N_d': self.nd_slope}
        row.update(self.slopes.to_dict())
        return row

    def to_csv(self, path, header_lines=()):
        """Write rows plus a trailing ``slope`` row, ``#`` header first."""
        columns = ['h', 'N_d'] + ERROR_COLUMNS
        summary = self.summary_row()
        with open(path, 'w') as f:
            for line in header_lines:
                f.write("# {}\n".format(line))
            self.rows[columns].to_csv(f, index=False, float_format='%.10g')
            f.write(",".join(
                ["slope"] + ["{:.10g}".format(summary[col])
                             if col in summary else "" for col in columns[1:]]
            ) + "\n")

    def write_figures(self, directory, header_lines=()):
        """Per-figure data files ``fig_<name>_<label>.csv``."""
        paths = []
        for name, columns in sorted(_FIGURES.items()) + [('dofs', [])]:
            path = os.path.join(directory, "fig_{}_{}.csv".format(
                name, self.label))
            with open(path, 'w') as f:
                for line in header_lines:
                    f.write("# {}\n".format(line))
                self.rows[['h', 'N_d'] + columns].to_csv(
                    f, index=False, float_format='%.10g')
            paths.append(path)
        return paths

    def __repr__(self):
        return "ConvergenceTable(label={!r}, n_meshes={})".format(
            self.label, len(self.rows))


def _solve_and_measure(mesh, traction, oracle, newton, steps, lam0, params,
                       quadrature):
    state, trace = continuation_solve(mesh, traction, steps=steps,
                                      config=newton, lam0=lam0, params=params)
    report = error_norms(state, oracle, quadrature)
    row = report.as_series()
    row['N_d'] = row.pop('n_dofs')
    row['newton_iter'] = len(trace)
    return row


def solve_reference(mesh, traction, newton=None, steps=8, lam0=1.2,
                    params=None):
    """Solve on a fine mesh and wrap the state as a ReferenceSolution."""
    state, _ = continuation_solve(mesh, traction, steps=steps, config=newton,
                                  lam0=lam0, params=params)
    return ReferenceSolution(state, traction)


def convergence_study(meshes, lam=2., kind='radial', eta=.1, params=None,
                      newton=None, steps=8, lam0=1.2, reference=None,
                      quadrature=None, n_jobs=None, verbose=0):
    """Solve on every mesh and tabulate errors and rates.

    Parameters
    ----------
    meshes : list of Mesh
        Annulus meshes with a common ``rho``, at least three.

    lam : float, default=2.
        Cavity parameter fixing the load ``t_{rho, lam}``.

    kind : {'radial', 'modulated'}, default='radial'
        Radial errors are measured against the exact solution, modulated
        ones against ``reference``.

    eta : float, default=0.1
        Modulation amplitude of ``'modulated'`` loads.

    params : MaterialParams, optional

    newton : DampedNewton or dict, optional

    steps : int, default=8
        Continuation steps per solve.

    lam0 : float, default=1.2
        Cavity parameter of the analytic start.

    reference : ReferenceSolution or Mesh, optional
        Required for ``'modulated'`` loads. A mesh is solved first.

    quadrature : int, optional
        Error quadrature, defaults to two more points than the solver.

    n_jobs : int, optional
        Number of parallel solves, see ``joblib.Parallel``.

    Returns
    -------
    table : ConvergenceTable
    """
    if len(meshes) < 3:
        raise ValueError("A study needs at least three meshes, got {}.".format(
            len(meshes)))
    rho = meshes[0].rho
    if rho is None or any(mesh.rho != rho for mesh in meshes):
        raise ValueError("Study meshes must be annuli with a common rho.")
    if kind not in ('radial', 'modulated'):
        raise ValueError("kind should be 'radial' or 'modulated', got {!r}."
                         .format(kind))
    if not isinstance(newton, DampedNewton):
        newton = DampedNewton(**dict(newton or {}))
    t = traction_for(rho, lam, params)
    traction = TractionSpec(kind, t, eta)
    if kind == 'radial':
        oracle = AnalyticCavitation(rho, lam, params)
        label = 'sym'
    else:
        if reference is None:
            raise ValueError("Modulated loads need a reference solution.")
        if not isinstance(reference, ReferenceSolution):
            if verbose > 0:
                print("solving reference on {!r}".format(reference))
            reference = solve_reference(reference, traction, newton, steps,
                                        lam0, params)
        oracle = reference
        label = 'nonsym'
    rows = Parallel(n_jobs=n_jobs, verbose=verbose)(
        delayed(_solve_and_measure)(mesh, traction, oracle, newton, steps,
                                    lam0, params, quadrature)
        for mesh in meshes)
    table = ConvergenceTable(pd.DataFrame(rows), label)
    for col, ok in table.decreasing().items():
        if not ok:
            warnings.warn("{} does not decrease strictly under "
                          "refinement.".format(col), StudyWarning)
    if verbose > 0:
        print(table.rows)
    return table
