import numpy as np
import pandas as pd
from os.path import dirname, join
from scipy.optimize import brentq

from ..exceptions import NonPositiveRadiusError

__all__ = ['load_table1', 'load_published_tractions', 'graded_layers',
           'table1_layers', 'geometric_layers', 'data_path']


def load_table1():
    """Load the two families of graded annulus meshes.

    Returns
    -------
    data : DataFrame
        One row per mesh with columns ``rho``, ``h``, ``min_tau``,
        ``max_tau``, ``layers`` and ``N``.
    """
    return pd.read_csv(data_path('table1.csv'))


def load_published_tractions():
    """Load the published radial dead-load tractions.

    Returns
    -------
    data : DataFrame
        Columns ``rho``, ``lam`` and ``t``.
    """
    return pd.read_csv(data_path('published_tractions.csv'))


def _layers_from_thickness(rho, tau):
    radii = rho + np.concatenate([[0.], np.cumsum(tau)[:-1]])
    return [(float(r), float(t)) for r, t in zip(radii, tau)]


def graded_layers(rho, n_layers, min_tau, max_tau):
    """Layers growing from ``min_tau`` to about ``max_tau`` over ``[rho, 1]``.

    Thicknesses follow ``tau_i = min_tau + (max_tau - min_tau) *
    (i / (L - 1)) ** q`` with the exponent ``q`` chosen so that the layers
    exactly fill the annulus.

    Parameters
    ----------
    rho : float
        Defect radius.

    n_layers : int
        Number of layers, at least two.

    min_tau, max_tau : float
        Innermost and outermost thickness, ``0 < min_tau < max_tau``.

    Returns
    -------
    layers : list of (float, float)
        Inner radius and thickness of every layer, innermost first.
    """
    if rho <= 0 or rho >= 1:
        raise NonPositiveRadiusError(
            "rho must be in (0, 1), got {}.".format(rho))
    if n_layers < 2:
        raise ValueError("n_layers must be at least 2, got {}.".format(
            n_layers))
    if not 0 < min_tau < max_tau:
        raise ValueError("Need 0 < min_tau < max_tau, got {} and {}.".format(
            min_tau, max_tau))
    i = np.arange(n_layers) / (n_layers - 1)
    spread = max_tau - min_tau
    target = 1. - rho

    def excess(q):
        return n_layers * min_tau + spread * np.sum(i ** q) - target

    if not excess(1e3) < 0 < excess(1e-3):
        raise ValueError("{} layers between {} and {} cannot fill [{}, 1]."
                         .format(n_layers, min_tau, max_tau, rho))
    q = brentq(excess, 1e-3, 1e3, xtol=1e-14)
    tau = min_tau + spread * i ** q
    # absorb the root finding residual in the outermost layer
    tau[-1] += target - tau.sum()
    return _layers_from_thickness(rho, tau)


def table1_layers(rho, h):
    """Reconstruct the layer list of a published graded mesh.

    The table only lists the number of layers and the extreme thicknesses,
    which are filled in by ``graded_layers``.

    Parameters
    ----------
    rho : float
        Defect radius, 0.01 or 0.0001.

    h : float
        Nominal mesh size of the row.

    Returns
    -------
    layers : list of (float, float)
        Inner radius and thickness of every layer, innermost first.

    n_sectors : int
        Number of elements per layer.

    Examples
    --------
    >>> layers, n_sectors = table1_layers(0.01, 0.05)
    >>> len(layers), n_sectors
    (8, 20)
    """
    table = load_table1()
    row = table[np.isclose(table.rho, rho) & np.isclose(table.h, h)]
    if len(row) != 1:
        raise ValueError("No published mesh for rho={} and h={}.".format(
            rho, h))
    row = row.iloc[0]
    layers = graded_layers(rho, int(row.layers), row.min_tau, row.max_tau)
    return layers, int(row.N)


def geometric_layers(rho, n_layers, gamma=1.):
    """Geometrically graded layers filling the annulus ``[rho, 1]``.

    Parameters
    ----------
    rho : float
        Defect radius.

    n_layers : int
        Number of layers.

    gamma : float, default=1.
        Ratio between the thicknesses of consecutive layers, ``gamma >= 1``.

    Returns
    -------
    layers : list of (float, float)
        Inner radius and thickness of every layer, innermost first.

    Examples
    --------
    >>> geometric_layers(0.5, 2)
    [(0.5, 0.25), (0.75, 0.25)]
    """
    if rho <= 0 or rho >= 1:
        raise NonPositiveRadiusError(
            "rho must be in (0, 1), got {}.".format(rho))
    if n_layers < 1:
        raise ValueError("n_layers must be positive, got {}.".format(n_layers))
    if gamma < 1:
        raise ValueError("gamma must be >= 1, got {}.".format(gamma))
    tau = gamma ** np.arange(n_layers, dtype=float)
    tau *= (1. - rho) / tau.sum()
    return _layers_from_thickness(rho, tau)


def data_path(filename):
    module_path = dirname(__file__)
    return join(module_path, filename)
