from .utils import find_pretty_grid, plot_mesh, plot_convergence

__all__ = ['find_pretty_grid', 'plot_mesh', 'plot_convergence']
