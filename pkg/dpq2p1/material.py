"""Stored energy of the cavitation experiments and its derivatives.

All functions accept a single 2 x 2 deformation gradient or a stack of them
with shape ``(..., 2, 2)``. Fourth order tensors are returned as 4 x 4
matrices using the row-major component ordering ``(i, j) -> 2 * i + j``;
``A.reshape(..., 2, 2, 2, 2)`` recovers the index form ``A[i, j, k, l]``.
"""
import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import NonPositiveJacobianError

__all__ = ['MaterialParams', 'cofactor', 'energy_density', 'first_piola',
           'tangent_tensor', 'principal_stretches', 'identity_pressure',
           'COFACTOR_DERIVATIVE']


# d(cof F)_ij / dF_kl, constant in 2-D
COFACTOR_DERIVATIVE = np.zeros((2, 2, 2, 2))
COFACTOR_DERIVATIVE[0, 0, 1, 1] = 1.
COFACTOR_DERIVATIVE[1, 1, 0, 0] = 1.
COFACTOR_DERIVATIVE[0, 1, 1, 0] = -1.
COFACTOR_DERIVATIVE[1, 0, 0, 1] = -1.
COFACTOR_DERIVATIVE.setflags(write=False)


class MaterialParams(BaseEstimator):
    """Parameters of ``W(F) = mu / 2 |F|^s + (det F - 1)^2 / 2 + 1 / det F``.

    Parameters
    ----------
    mu : float, default=1.
        Shear-like modulus, strictly positive.

    s : float, default=1.5
        Growth exponent of the isochoric term, ``1 < s < 2``.

    Examples
    --------
    >>> MaterialParams(mu=2.)
    MaterialParams(mu=2.0)
    """
    def __init__(self, mu=1., s=1.5):
        self.mu = mu
        self.s = s
        self._check_params()

    def _check_params(self):
        if not self.mu > 0:
            raise ValueError("mu should be positive, got {}.".format(self.mu))
        if not 1 < self.s < 2:
            raise ValueError(
                "s should be in the open interval (1, 2), got {}.".format(
                    self.s))

    def __repr__(self):
        changed = []
        if self.mu != 1.:
            changed.append("mu={!r}".format(float(self.mu)))
        if self.s != 1.5:
            changed.append("s={!r}".format(float(self.s)))
        return "MaterialParams({})".format(", ".join(changed))


def cofactor(F):
    """Cofactor matrix ``det(F) F^{-T}`` of 2 x 2 matrices.

    Examples
    --------
    >>> cofactor(np.array([[1., 2.], [3., 4.]]))
    array([[ 4., -3.],
           [-2.,  1.]])
    """
    F = np.asarray(F, dtype=float)
    cof = np.empty_like(F)
    cof[..., 0, 0] = F[..., 1, 1]
    cof[..., 0, 1] = -F[..., 1, 0]
    cof[..., 1, 0] = -F[..., 0, 1]
    cof[..., 1, 1] = F[..., 0, 0]
    return cof


def _determinant(F):
    return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]


def _check_jacobian(J):
    bad = ~(J > 0)
    if np.any(bad):
        index = np.unravel_index(np.argmax(bad), np.shape(J))
        raise NonPositiveJacobianError(
            "det F must be positive, got {} at index {}.".format(
                np.asarray(J)[index], index))


def _kinematics(F):
    F = np.asarray(F, dtype=float)
    J = _determinant(F)
    _check_jacobian(J)
    norm = np.sqrt(np.sum(F ** 2, axis=(-2, -1)))
    return F, J, cofactor(F), norm


def energy_density(params, F):
    """Stored energy density ``W(F)``.

    Parameters
    ----------
    params : MaterialParams
        Material constants.

    F : ndarray, shape (..., 2, 2)
        Deformation gradients with positive determinant.

    Returns
    -------
    W : ndarray, shape (...)

    Examples
    --------
    >>> round(float(energy_density(MaterialParams(), np.eye(2))), 7)
    1.8408964
    """
    F, J, _, norm = _kinematics(F)
    return (params.mu / 2 * norm ** params.s + .5 * (J - 1) ** 2 + 1. / J)


def first_piola(params, F):
    """First Piola stress ``dW/dF``.

    Returns
    -------
    P : ndarray, shape (..., 2, 2)
    """
    F, J, cof, norm = _kinematics(F)
    kappa = params.mu * params.s / 2 * norm ** (params.s - 2)
    return (kappa[..., None, None] * F
            + (J - 1 - J ** -2)[..., None, None] * cof)


def tangent_tensor(params, F):
    """Second derivative ``d^2 W / dF^2`` as a symmetric 4 x 4 matrix.

    Returns
    -------
    A : ndarray, shape (..., 4, 4)
        ``A[..., 2 * i + j, 2 * k + l]`` is ``d^2 W / dF_ij dF_kl``.
    """
    F, J, cof, norm = _kinematics(F)
    mu, s = params.mu, params.s
    batch = F.shape[:-2]
    f = F.reshape(batch + (4,))
    c = cof.reshape(batch + (4,))
    outer_f = f[..., :, None] * f[..., None, :]
    outer_c = c[..., :, None] * c[..., None, :]
    A = (mu * s / 2 * (s - 2) * norm ** (s - 4))[..., None, None] * outer_f
    A += (mu * s / 2 * norm ** (s - 2))[..., None, None] * np.eye(4)
    A += (1 + 2 * J ** -3)[..., None, None] * outer_c
    A += ((J - 1 - J ** -2)[..., None, None]
          * COFACTOR_DERIVATIVE.reshape(4, 4))
    return A


def principal_stretches(F):
    """Singular values of ``F`` in increasing order, shape (..., 2)."""
    sv = np.linalg.svd(np.asarray(F, dtype=float), compute_uv=False)
    return sv[..., ::-1]


def identity_pressure(params):
    """Multiplier making the identity deformation stress free.

    ``first_piola(I) - p cof(I)`` vanishes for
    ``p = mu s / 2 * 2 ** ((s - 2) / 2) - 1``.

    Examples
    --------
    >>> round(identity_pressure(MaterialParams()), 5)
    -0.36933
    """
    return float(params.mu * params.s / 2 * 2 ** ((params.s - 2) / 2) - 1)
