"""Error norms of discrete states against exact or reference fields."""
import numpy as np
import pandas as pd

from ..assembly import total_energy
from ..fem_space import element_geometry

__all__ = ['ErrorReport', 'ReferenceSolution', 'error_norms']


class ErrorReport:
    """Errors of one discrete state.

    Attributes
    ----------
    dE : float
        ``|E(u_h) - E(u)|``.

    W1s : float
        ``W^{1, s}`` seminorm of ``u_h - u``.

    detL1, detL2 : float
        ``L^1`` and ``L^2`` norms of ``det grad u_h - 1``.

    pL2 : float
        ``L^2`` norm of ``p_h - p``.

    n_dofs : int
        Deformation dofs ``N_d``.

    h : float
        Nominal mesh size.
    """
    fields = ['h', 'n_dofs', 'dE', 'W1s', 'detL1', 'detL2', 'pL2']

    def __init__(self, dE, W1s, detL1, detL2, pL2, n_dofs, h, energy_h=None,
                 energy=None, area=None):
        self.dE = dE
        self.W1s = W1s
        self.detL1 = detL1
        self.detL2 = detL2
        self.pL2 = pL2
        self.n_dofs = n_dofs
        self.h = h
        self.energy_h = energy_h
        self.energy = energy
        self.area = area

    def as_series(self):
        return pd.Series({name: getattr(self, name) for name in self.fields})

    def __repr__(self):
        return "ErrorReport({})".format(", ".join(
            "{}={:.4g}".format(name, getattr(self, name))
            for name in self.fields))


class ReferenceSolution:
    """Fine-mesh discrete state used in place of an exact solution.

    Exposes the same interface as ``AnalyticCavitation`` for
    ``error_norms``: ``deformation``, ``gradient``, ``pressure_field``,
    ``energy`` and ``traction_spec``.

    Parameters
    ----------
    state : DiscreteState
        Converged state on an annulus mesh finer than the studied ones.

    traction : TractionSpec
        Load the state is in equilibrium with.
    """
    def __init__(self, state, traction):
        self.state = state
        self.traction = traction
        self.rho = state.mesh.rho
        self.params = state.params
        self._energy = None

    def deformation(self, x):
        return self.state.evaluate(x)[0]

    def gradient(self, x):
        return self.state.evaluate(x)[1]

    def pressure_field(self, x):
        return self.state.evaluate(x)[2]

    def traction_spec(self):
        return self.traction

    def energy(self):
        if self._energy is None:
            self._energy = total_energy(self.state, self.traction,
                                        n=self.state.quadrature + 2)
        return self._energy

    def __repr__(self):
        return "ReferenceSolution({!r})".format(self.state.mesh)


def error_norms(state, oracle, quadrature=None):
    """Errors of ``state`` against ``oracle``.

    Parameters
    ----------
    state : DiscreteState

    oracle : AnalyticCavitation or ReferenceSolution

    quadrature : int, optional
        Gauss points per direction, defaults to ``state.quadrature + 2``.

    Returns
    -------
    report : ErrorReport
    """
    n = state.quadrature + 2 if quadrature is None else quadrature
    geom = element_geometry(state.mesh, n)
    F = state.gradient(n)
    J = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    exact_grad = oracle.gradient(geom.x)
    s = state.params.s
    difference = np.sqrt(np.sum((F - exact_grad) ** 2, axis=(-2, -1)))
    W1s = np.sum(geom.JxW * difference ** s) ** (1 / s)
    detL1 = np.sum(geom.JxW * np.abs(J - 1))
    detL2 = np.sqrt(np.sum(geom.JxW * (J - 1) ** 2))
    dp = state.pressure(n) - oracle.pressure_field(geom.x)
    pL2 = np.sqrt(np.sum(geom.JxW * dp ** 2))
    energy_h = total_energy(state, oracle.traction_spec(), n=n)
    energy = oracle.energy()
    return ErrorReport(dE=abs(energy_h - energy), W1s=float(W1s),
                       detL1=float(detL1), detL2=float(detL2),
                       pL2=float(pL2), n_dofs=state.dof_map.n_dofs,
                       h=state.mesh.h, energy_h=energy_h, energy=energy,
                       area=float(np.sum(geom.JxW)))
