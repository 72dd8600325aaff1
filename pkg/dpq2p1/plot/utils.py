import numpy as np
import matplotlib.pyplot as plt
from seaborn.utils import despine

from ..fem_space import edge_reference_points
from ..mesh import eval_map
from ..verify.study import ERROR_COLUMNS, fit_loglog

_LABELS = {'dE': r'$|E(u_h) - E(u)|$', 'W1s': r'$|u_h - u|_{1,s}$',
           'detL1': r'$\|\det\nabla u_h - 1\|_{L^1}$',
           'detL2': r'$\|\det\nabla u_h - 1\|_{L^2}$',
           'pL2': r'$\|p_h - p\|_{L^2}$'}


def find_pretty_grid(n_plots, max_cols=5):
    """Determine a good grid shape for n_plots subplots.

    Prefers the widest grid with at most ``max_cols`` columns that leaves
    the fewest cells empty.

    Parameters
    ----------
    n_plots : int
        Number of plots to arrange.
    max_cols : int, default=5
        Maximum number of columns.

    Returns
    -------
    n_rows : int
    n_cols : int

    Examples
    --------
    >>> find_pretty_grid(5, 3)
    (2, 3)
    >>> find_pretty_grid(4, 3)
    (2, 2)
    >>> find_pretty_grid(6, 3)
    (2, 3)
    """
    min_rows = int(np.ceil(n_plots / max_cols))
    best_empty, best_cols = max_cols, max_cols
    for cols in range(max_cols, 0, -1):
        if cols * min_rows < n_plots:
            break
        empty = -n_plots % cols
        if empty < best_empty:
            best_empty, best_cols = empty, cols
        if empty == 0:
            break
    return int(np.ceil(n_plots / best_cols)), best_cols


def _make_subplots(n_plots, max_cols=3, row_height=3):
    n_rows, n_cols = find_pretty_grid(n_plots, max_cols=max_cols)
    fig, axes = plt.subplots(n_rows, n_cols,
                             figsize=(4 * n_cols, row_height * n_rows),
                             constrained_layout=True)
    axes = np.atleast_2d(axes)
    return fig, axes


def plot_mesh(mesh, n_points=12, show_nodes=False, ax=None):
    """Draw the curved element edges of ``mesh``.

    Parameters
    ----------
    mesh : Mesh

    n_points : int, default=12
        Samples along every edge.

    show_nodes : bool, default=False
        Also mark the Q2 nodes.

    ax : matplotlib axes, optional

    Returns
    -------
    ax : matplotlib axes
    """
    if ax is None:
        ax = plt.gca()
    t = np.linspace(-1, 1, n_points)
    for element in mesh.elements:
        for edge in range(4):
            xi, _ = edge_reference_points(edge, t)
            x = eval_map(element.map, xi)
            ax.plot(x[:, 0], x[:, 1], c='k', lw=.5)
    if show_nodes:
        ax.scatter(mesh.nodes[:, 0], mesh.nodes[:, 1], s=4, c='C0')
    ax.set_aspect('equal')
    despine(ax=ax)
    return ax


def plot_convergence(table, columns=None):
    """Log-log error panels against ``N_d`` with fitted slopes.

    Parameters
    ----------
    table : ConvergenceTable

    columns : list of str, optional
        Error columns to draw, all of them by default.

    Returns
    -------
    fig : matplotlib figure
    """
    columns = ERROR_COLUMNS if columns is None else columns
    rows = table.rows.sort_values('N_d')
    fig, axes = _make_subplots(len(columns))
    for col, ax in zip(columns, axes.ravel()):
        values = rows[col].values
        ax.loglog(rows.N_d, values, 'o-')
        if np.all(values > 0):
            ax.set_title("slope {:.2f}".format(fit_loglog(rows.N_d, values)))
        ax.set_xlabel(r'$N_d$')
        ax.set_ylabel(_LABELS.get(col, col))
        despine(ax=ax)
    for ax in axes.ravel()[len(columns):]:
        ax.set_visible(False)
    fig.suptitle("{} ({})".format(table.label, len(rows)))
    return fig
