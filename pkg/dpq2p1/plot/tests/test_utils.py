import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

from dpq2p1.mesh import build_annulus_mesh
from dpq2p1.plot.utils import find_pretty_grid, plot_mesh, plot_convergence
from dpq2p1.verify import ConvergenceTable


def test_find_pretty_grid():
    # test that the grid is big enough:
    rng = np.random.RandomState(0)
    for i in range(100):
        n_plots = rng.randint(1, 34)
        max_cols = rng.randint(1, 12)
        rows, cols = find_pretty_grid(n_plots=n_plots, max_cols=max_cols)
        assert rows * cols >= n_plots
        assert cols <= max_cols
        # no empty row
        assert (rows - 1) * cols < n_plots


def test_plot_mesh():
    mesh = build_annulus_mesh(.3, [(.3, .3), (.6, .4)], 6)
    plt.figure()
    ax = plot_mesh(mesh, n_points=5, show_nodes=True)
    assert len(ax.lines) == 4 * mesh.n_elements
    assert len(ax.collections) == 1
    x, y = ax.lines[0].get_data()
    radius = np.hypot(x, y)
    assert np.all((radius > .3 - 1e-12) & (radius < 1 + 1e-12))


def test_plot_convergence():
    h = np.array([.05, .04, .03])
    rows = pd.DataFrame({'h': h, 'N_d': 10 / h ** 2, 'dE': h ** 2,
                         'W1s': h, 'detL1': h ** 2, 'detL2': h ** 2,
                         'pL2': h ** 1.5})
    fig = plot_convergence(ConvergenceTable(rows, label='sym'))
    visible = [ax for ax in fig.axes if ax.get_visible()]
    assert len(visible) == 5
    assert visible[1].get_title() == "slope -0.50"
    fig = plot_convergence(ConvergenceTable(rows), columns=['W1s'])
    assert len([ax for ax in fig.axes if ax.get_visible()]) == 1
