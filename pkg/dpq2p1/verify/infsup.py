"""Numerical estimate of the discrete inf-sup constant."""
import numpy as np
import pandas as pd
import scipy.linalg

from ..assembly import (DiscreteState, assemble_b, assemble_constraints,
                        _scatter_matrix)
from ..exceptions import EigenSolveFailedError
from ..fem_space import build_dof_map, element_geometry
from .analytic import AnalyticCavitation

__all__ = ['InfSupReport', 'infsup_constant', 'infsup_sweep',
           'h1_matrix', 'pressure_mass_matrix']


class InfSupReport:
    """Estimated inf-sup constant of one state.

    Attributes
    ----------
    beta : float

    h : float

    n_dofs, n_pressure : int

    residual : float
        Relative residual of the eigenpair (``'eigh'``) or 0 (``'svd'``).

    method : str

    state : str
        Description of the linearization point.
    """
    def __init__(self, beta, h, n_dofs, n_pressure, residual, method, state):
        self.beta = beta
        self.h = h
        self.n_dofs = n_dofs
        self.n_pressure = n_pressure
        self.residual = residual
        self.method = method
        self.state = state

    def as_series(self):
        return pd.Series({'h': self.h, 'n_dofs': self.n_dofs,
                          'n_pressure': self.n_pressure, 'beta': self.beta,
                          'residual': self.residual, 'method': self.method,
                          'state': self.state})

    def __repr__(self):
        return "InfSupReport(beta={:.6g}, h={:.4g}, n_dofs={})".format(
            self.beta, self.h, self.n_dofs)


def h1_matrix(state):
    """H^1 inner product ``int grad v : grad w + v . w`` on deformations."""
    geom = element_geometry(state.mesh, state.quadrature)
    stiffness = np.einsum('eq,eqkj,eqlj->ekl', geom.JxW, geom.dN, geom.dN)
    mass = np.einsum('eq,qk,ql->ekl', geom.JxW, geom.phi, geom.phi)
    scalar = stiffness + mass
    local = np.einsum('ekl,cd->ekcld', scalar, np.eye(2)).reshape(-1, 18, 18)
    dofs = state.dof_map.element_u_dofs
    n_u = state.dof_map.n_u
    return _scatter_matrix(local, dofs, dofs, (n_u, n_u))


def pressure_mass_matrix(state):
    """L^2 inner product on the pressure space, block diagonal."""
    geom = element_geometry(state.mesh, state.quadrature)
    local = np.einsum('eq,qr,qs->ers', geom.JxW, geom.psi, geom.psi)
    dofs = state.dof_map.element_p_dofs
    n_p = state.dof_map.n_p
    return _scatter_matrix(local, dofs, dofs, (n_p, n_p))


def infsup_constant(state, method='eigh'):
    """Discrete inf-sup constant of ``b(v, q; u_h)`` at ``state``.

    Deformations are restricted to the mean-zero space and measured in
    ``H^1``, pressures in ``L^2``. The constant is the square root of the
    smallest eigenvalue of ``B M_u^{-1} B^T`` relative to ``M_p``.

    Parameters
    ----------
    state : DiscreteState
        Linearization point; dense matrices are formed, so keep the mesh
        small.

    method : {'eigh', 'svd'}, default='eigh'
        ``'eigh'`` solves the generalized symmetric eigenproblem,
        ``'svd'`` takes the smallest singular value of
        ``L_u^{-1} B^T L_p^{-T}`` with Cholesky factors ``L``.

    Returns
    -------
    report : InfSupReport
    """
    if method not in ('eigh', 'svd'):
        raise ValueError("method should be 'eigh' or 'svd', got {!r}."
                         .format(method))
    state = DiscreteState(state.mesh, state.u, state.p, state.params,
                          build_dof_map(state.mesh), state.quadrature)
    C = assemble_constraints(state).toarray()
    Z = scipy.linalg.null_space(C)
    Mu = Z.T @ (h1_matrix(state) @ Z)
    Mp = pressure_mass_matrix(state).toarray()
    Bt = assemble_b(state) @ Z
    residual = 0.
    try:
        if method == 'eigh':
            S = Bt @ scipy.linalg.solve(Mu, Bt.T, assume_a='pos')
            S = (S + S.T) / 2
            values, vectors = scipy.linalg.eigh(S, Mp, subset_by_index=[0, 0])
            value, vector = values[0], vectors[:, 0]
            residual = (np.linalg.norm(S @ vector - value * (Mp @ vector))
                        / max(np.linalg.norm(S @ vector),
                              np.finfo(float).tiny))
            beta = np.sqrt(max(value, 0.))
        else:
            Lu = scipy.linalg.cholesky(Mu, lower=True)
            Lp = scipy.linalg.cholesky(Mp, lower=True)
            X = scipy.linalg.solve_triangular(Lu, Bt.T, lower=True)
            Y = scipy.linalg.solve_triangular(Lp, X.T, lower=True).T
            beta = scipy.linalg.svdvals(Y).min()
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolveFailedError(
            "Inf-sup eigenproblem failed: {}".format(e)) from e
    if not np.isfinite(beta):
        raise EigenSolveFailedError("Inf-sup constant is not finite.")
    return InfSupReport(float(beta), state.mesh.h, state.dof_map.n_dofs,
                        state.dof_map.n_p, float(residual), method,
                        _describe(state))


def _describe(state):
    return "n_u={}, n_p={}".format(state.dof_map.n_u, state.dof_map.n_p)


def infsup_sweep(meshes, lam=1., params=None, method='eigh', verbose=0):
    """Inf-sup constants along a sequence of annulus meshes.

    Parameters
    ----------
    meshes : list of Mesh

    lam : float, default=1.
        Linearization point: the identity for ``lam = 1``, otherwise the
        interpolant of the radial cavitation map with this ``lam``.

    Returns
    -------
    sweep : DataFrame
        Columns ``rho``, ``layers``, ``N``, ``h``, ``sigma``, ``n_dofs``,
        ``n_pressure``, ``beta`` and ``residual``.
    """
    rows = []
    for mesh in meshes:
        if lam == 1:
            state = DiscreteState.identity(mesh, params)
        else:
            oracle = AnalyticCavitation(mesh.rho, lam, params)
            state = DiscreteState.interpolate(mesh, oracle.deformation,
                                              params=oracle.params)
        report = infsup_constant(state, method=method)
        if verbose > 0:
            print("{!r}: beta={:.6g}".format(mesh, report.beta))
        rows.append({'rho': mesh.rho, 'layers': len(mesh.layers),
                     'N': mesh.n_sectors, 'h': mesh.h, 'sigma': mesh.rho / 2,
                     'n_dofs': report.n_dofs, 'n_pressure': report.n_pressure,
                     'beta': report.beta, 'residual': report.residual})
    return pd.DataFrame(rows)
