from .analytic import (AnalyticCavitation, analytic_u, analytic_grad,
                       analytic_pressure, traction_for, compare_tractions)
from .errors import ErrorReport, ReferenceSolution, error_norms
from .infsup import InfSupReport, infsup_constant, infsup_sweep
from .study import (ConvergenceTable, convergence_study, fit_loglog,
                    dof_slope, solve_reference)

__all__ = ['AnalyticCavitation', 'analytic_u', 'analytic_grad',
           'analytic_pressure', 'traction_for', 'compare_tractions',
           'ErrorReport', 'ReferenceSolution', 'error_norms', 'InfSupReport',
           'infsup_constant', 'infsup_sweep', 'ConvergenceTable',
           'convergence_study', 'fit_loglog', 'dof_slope', 'solve_reference']
