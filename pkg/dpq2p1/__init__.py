__version__ = "0.1.0"

from .material import MaterialParams
from .mesh import build_annulus_mesh, check_regularity, Mesh
from .assembly import DiscreteState, TractionSpec, assemble_system
from .newton import DampedNewton, newton_solve, continuation_solve
from .config import RunConfig
from . import datasets, verify

__all__ = ['MaterialParams', 'Mesh', 'build_annulus_mesh', 'check_regularity',
           'DiscreteState', 'TractionSpec', 'assemble_system', 'DampedNewton',
           'newton_solve', 'continuation_solve', 'RunConfig', 'datasets',
           'verify']
