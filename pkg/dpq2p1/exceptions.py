"""Exceptions and warnings raised by dpq2p1.

Every error carries a short ``code`` used by the command line driver to
print ``ERROR <code> <detail>``.
"""

__all__ = ['Dpq2p1Error', 'NonPositiveRadiusError', 'LayerSumMismatchError',
           'DegenerateSectorError', 'NonConformingMeshError',
           'NonPositiveMapJacobianError', 'UnsupportedOrderError',
           'SingularGeometryJacobianError', 'NonPositiveJacobianError',
           'SingularMatrixError', 'DampingFloorReachedError',
           'MaxIterationsExceededError', 'ContinuationError',
           'InadmissibleStartError', 'InsideDefectError', 'OutOfRangeError',
           'EigenSolveFailedError', 'ConfigError', 'MeshQualityWarning',
           'StudyWarning']


class Dpq2p1Error(Exception):
    """Base class of all errors raised by dpq2p1."""
    code = 'error'


class NonPositiveRadiusError(Dpq2p1Error, ValueError):
    """Raised when a defect or layer radius is not strictly positive."""
    code = 'mesh'


class LayerSumMismatchError(Dpq2p1Error, ValueError):
    """Raised when the layer thicknesses do not fill the annulus."""
    code = 'mesh'


class DegenerateSectorError(Dpq2p1Error, ValueError):
    """Raised when a ring sector spans more than a quarter turn."""
    code = 'mesh'


class NonConformingMeshError(Dpq2p1Error, ValueError):
    """Raised when neighbouring elements do not share edge nodes."""
    code = 'mesh'


class NonPositiveMapJacobianError(Dpq2p1Error, ValueError):
    """Raised when a geometry map is not orientation preserving."""
    code = 'mesh'


class UnsupportedOrderError(Dpq2p1Error, ValueError):
    """Raised for Gauss-Legendre orders outside of [1, 10]."""
    code = 'quadrature'


class SingularGeometryJacobianError(Dpq2p1Error, RuntimeError):
    """Raised when the reference-to-physical Jacobian cannot be inverted."""
    code = 'geometry'


class NonPositiveJacobianError(Dpq2p1Error, RuntimeError):
    """Raised when a deformation gradient has det F <= 0.

    Parameters
    ----------
    message : str
        Description of the failure.

    element : int or None
        Offending element when raised from an assembly loop.

    point : int or None
        Offending quadrature point of ``element``.
    """
    code = 'jacobian'

    def __init__(self, message, element=None, point=None):
        super().__init__(message)
        self.element = element
        self.point = point


class _TracedError(Dpq2p1Error, RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SingularMatrixError(_TracedError):
    """Raised when the saddle point system cannot be solved."""
    code = 'linear_solve'


class DampingFloorReachedError(_TracedError):
    """Raised when the damping parameter falls below its floor."""
    code = 'damping'


class MaxIterationsExceededError(_TracedError):
    """Raised when Newton does not converge within ``max_iter``."""
    code = 'max_iter'


class ContinuationError(_TracedError):
    """Raised when a load step of a continuation fails.

    The original Newton error is chained as ``__cause__``.
    """
    code = 'continuation'

    def __init__(self, message, step=None, trace=None):
        super().__init__(message, trace=trace)
        self.step = step


class InadmissibleStartError(Dpq2p1Error, ValueError):
    """Raised when the Newton start fails the admissibility bounds.

    The failed check is kept as ``check``.
    """
    code = 'admissibility'

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class InsideDefectError(Dpq2p1Error, ValueError):
    """Raised when the analytic field is evaluated inside the cavity."""
    code = 'oracle'


class OutOfRangeError(Dpq2p1Error, ValueError):
    """Raised when a radial oracle is queried outside [rho, 1]."""
    code = 'oracle'


class EigenSolveFailedError(Dpq2p1Error, RuntimeError):
    """Raised when the inf-sup eigenproblem cannot be solved."""
    code = 'eigensolve'


class ConfigError(Dpq2p1Error, ValueError):
    """Raised for malformed or inconsistent run configurations."""
    code = 'config'


class MeshQualityWarning(UserWarning):
    """Warning for meshes failing a quasi-uniformity or regularity check."""


class StudyWarning(UserWarning):
    """Warning for convergence studies with non-monotone errors."""
