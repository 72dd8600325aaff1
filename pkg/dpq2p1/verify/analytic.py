"""Radially symmetric cavitation solution.

The family ``u(x) = f(R) / R x`` with ``f(R) = sqrt(R^2 + lam^2 - 1)`` and
``R = |x|`` is incompressible and opens the defect of radius ``rho`` to the
radius ``f(rho)``. Its principal stretches are ``lam_r = R / f`` and
``lam_t = f / R``. On ``det F = 1`` the stress reduces to
``P = kappa F - (1 + p) cof F`` with ``kappa = mu s / 2 |F|^(s - 2)`` and the
radial balance becomes

    dP_rr / dR = (kappa (lam_t - lam_r^3) + P_rr (lam_r^2 - 1)) / R

with a traction-free cavity, ``P_rr(rho) = 0``. The dead load is
``t = P_rr(1)`` and the multiplier ``p = (kappa lam_r - P_rr) / lam_t - 1``.
"""
import numpy as np
from scipy.integrate import solve_ivp, quad

from ..assembly import TractionSpec
from ..datasets import load_published_tractions
from ..exceptions import (InsideDefectError, OutOfRangeError,
                          NonPositiveRadiusError)
from ..material import MaterialParams

__all__ = ['AnalyticCavitation', 'analytic_u', 'analytic_grad',
           'analytic_pressure', 'traction_for', 'compare_tractions']

_RADIUS_TOL = 1e-12


class AnalyticCavitation:
    """Exact radial cavitation field, multiplier and load.

    Parameters
    ----------
    rho : float
        Defect radius in (0, 1).

    lam : float
        Radius of the deformed outer boundary, ``lam >= 1``. ``lam = 1`` is
        the identity.

    params : MaterialParams, optional

    Attributes
    ----------
    traction : float
        Radial dead load holding the field in equilibrium.

    Examples
    --------
    >>> oracle = AnalyticCavitation(0.1, 2.)
    >>> oracle.deformation(np.array([0.1, 0.])).round(6)
    array([1.734935, 0.      ])
    """
    def __init__(self, rho, lam, params=None):
        if not 0 < rho < 1:
            raise NonPositiveRadiusError(
                "rho should be in (0, 1), got {}.".format(rho))
        if not lam >= 1:
            raise ValueError("lam should be at least 1, got {}.".format(lam))
        self.rho = float(rho)
        self.lam = float(lam)
        self.params = MaterialParams() if params is None else params
        self._solve_radial_stress()

    def f(self, R):
        return np.sqrt(R ** 2 + self.lam ** 2 - 1)

    def stretches(self, R):
        """Radial and circumferential principal stretches at ``R``."""
        f = self.f(R)
        return R / f, f / R

    def _kappa(self, lam_r, lam_t):
        mu, s = self.params.mu, self.params.s
        return mu * s / 2 * (lam_r ** 2 + lam_t ** 2) ** ((s - 2) / 2)

    def _solve_radial_stress(self):
        # integrate in log R
        def rhs(log_R, P):
            R = np.exp(log_R)
            lam_r, lam_t = self.stretches(R)
            kappa = self._kappa(lam_r, lam_t)
            return kappa * (lam_t - lam_r ** 3) + P * (lam_r ** 2 - 1)

        sol = solve_ivp(rhs, (np.log(self.rho), 0.), [0.], method='DOP853',
                        rtol=1e-12, atol=1e-14, dense_output=True)
        if not sol.success:
            raise RuntimeError("Radial stress integration failed: {}".format(
                sol.message))
        self._radial = sol.sol
        self.traction = float(sol.y[0, -1])

    def _check_points(self, x):
        x = np.asarray(x, dtype=float)
        R = np.hypot(x[..., 0], x[..., 1])
        if np.any(R < self.rho * (1 - _RADIUS_TOL)):
            raise InsideDefectError(
                "Points inside the defect of radius {}.".format(self.rho))
        return x, R

    def _check_radius(self, R):
        R = np.asarray(R, dtype=float)
        if (np.any(R < self.rho * (1 - _RADIUS_TOL))
                or np.any(R > 1 + _RADIUS_TOL)):
            raise OutOfRangeError(
                "Radius must lie in [{}, 1].".format(self.rho))
        return np.clip(R, self.rho, 1.)

    def deformation(self, x):
        """Deformed position of reference points ``x`` (..., 2)."""
        x, R = self._check_points(x)
        return (self.f(R) / R)[..., None] * x

    def gradient(self, x):
        """Deformation gradient at ``x``, shape (..., 2, 2)."""
        x, R = self._check_points(x)
        f = self.f(R)
        e = x / R[..., None]
        radial = e[..., :, None] * e[..., None, :]
        return ((f / R)[..., None, None] * np.eye(2)
                + (R / f - f / R)[..., None, None] * radial)

    def _radial_stress(self, R):
        # the dense ODE output only evaluates 1-D arrays
        R = np.asarray(R)
        return self._radial(np.log(R).ravel())[0].reshape(R.shape)[()]

    def radial_stress(self, R):
        """Radial Piola stress ``P_rr`` on ``[rho, 1]``."""
        return self._radial_stress(self._check_radius(R))

    def pressure(self, R):
        """Exact multiplier ``p(R)`` on ``[rho, 1]``."""
        R = self._check_radius(R)
        lam_r, lam_t = self.stretches(R)
        P = self._radial_stress(R)
        return (self._kappa(lam_r, lam_t) * lam_r - P) / lam_t - 1

    def pressure_field(self, x):
        """Exact multiplier at points ``x`` (..., 2)."""
        x = np.asarray(x, dtype=float)
        return self.pressure(np.hypot(x[..., 0], x[..., 1]))

    def traction_spec(self):
        return TractionSpec('radial', self.traction)

    def traction_virtual_work(self):
        """Load from stationarity of the energy along the family.

        ``t = int_rho^1 dW/dlam R dR``, independent of the radial stress
        integration.
        """
        mu, s, lam = self.params.mu, self.params.s, self.lam

        def integrand(log_R):
            R = np.exp(log_R)
            lam_r, lam_t = self.stretches(R)
            S = lam_r ** 2 + lam_t ** 2
            return (mu * s * lam / 2 * S ** (s / 2 - 1)
                    * (1 - lam_r ** 4))

        value, _ = quad(integrand, np.log(self.rho), 0., epsabs=1e-14,
                        epsrel=1e-13, limit=200)
        return value

    def energy(self):
        """Exact total energy ``2 pi int W R dR - 2 pi t lam``."""
        mu, s = self.params.mu, self.params.s

        def integrand(log_R):
            R = np.exp(log_R)
            lam_r, lam_t = self.stretches(R)
            S = lam_r ** 2 + lam_t ** 2
            return (mu / 2 * S ** (s / 2) + 1) * R ** 2

        value, _ = quad(integrand, np.log(self.rho), 0., epsabs=1e-14,
                        epsrel=1e-13, limit=200)
        return 2 * np.pi * (value - self.traction * self.lam)

    def __repr__(self):
        return "AnalyticCavitation(rho={}, lam={})".format(self.rho, self.lam)


def analytic_u(oracle, x):
    """Deformed position, see ``AnalyticCavitation.deformation``."""
    return oracle.deformation(x)


def analytic_grad(oracle, x):
    """Deformation gradient, see ``AnalyticCavitation.gradient``."""
    return oracle.gradient(x)


def analytic_pressure(oracle, R):
    """Exact multiplier, see ``AnalyticCavitation.pressure``."""
    return oracle.pressure(R)


def traction_for(rho, lam, params=None):
    """Radial dead load ``t_{rho, lam}`` opening the defect to ``f(rho)``.

    Parameters
    ----------
    rho : float
        Defect radius.

    lam : float
        Deformed outer radius, ``lam >= 1``.

    params : MaterialParams, optional

    Returns
    -------
    t : float
    """
    return AnalyticCavitation(rho, lam, params).traction


def compare_tractions(params=None):
    """Oracle loads next to the published ones.

    With ``mu = 2`` and ``s = 1.5`` the oracle matches ``t_{0.1, 2}``; the
    two smaller defects then come out larger than published.

    Parameters
    ----------
    params : MaterialParams, optional

    Returns
    -------
    table : DataFrame
        Columns ``rho``, ``lam``, ``t_published``, ``t`` and ``deviation``
        (oracle minus published).
    """
    table = load_published_tractions().rename(columns={'t': 't_published'})
    table['t'] = [traction_for(rho, lam, params)
                  for rho, lam in zip(table.rho, table.lam)]
    table['deviation'] = table.t - table.t_published
    return table
