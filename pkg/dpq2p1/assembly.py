"""Newton step forms, residuals and energy of the mixed formulation.

With the Lagrangian

    L(u, p) = int W(grad u) - p (det grad u - 1) dx - int_outer t . u ds

the assembled vectors are ``f = -dL/du`` and ``g = dL/dp`` and the blocks
are ``A = d^2 L / du^2`` and ``B = d^2 L / dp du`` (the pressure enters
``A`` through ``-p d(cof F)/dF``). All element contributions are
accumulated through coordinate triplets in element order.
"""
import numpy as np
import scipy.sparse as sp

from .exceptions import NonPositiveJacobianError
from .fem_space import (build_dof_map, element_geometry, edge_geometry,
                        q2_eval, q2_grad, p1_eval, _invert_jacobian)
from .material import (MaterialParams, cofactor, energy_density, first_piola,
                       tangent_tensor, identity_pressure, COFACTOR_DERIVATIVE)
from .mesh import _polar_jacobian

__all__ = ['DiscreteState', 'TractionSpec', 'SaddleSystem', 'assemble_a',
           'assemble_b', 'assemble_f', 'assemble_g', 'assemble_traction',
           'assemble_constraints', 'assemble_system', 'total_energy',
           'project_pressure', 'save_solution', 'load_solution']


class TractionSpec:
    """Dead load on the outer boundary.

    Parameters
    ----------
    kind : {'radial', 'modulated'}, default='radial'
        ``'radial'`` applies ``t n``; ``'modulated'`` applies
        ``(1 + eta |cos(theta)|) t n``.

    t : float, default=0.
        Traction magnitude.

    eta : float, default=0.
        Modulation amplitude, only used by ``'modulated'``.
    """
    def __init__(self, kind='radial', t=0., eta=0.):
        if kind not in ('radial', 'modulated'):
            raise ValueError("kind should be 'radial' or 'modulated', got "
                             "{!r}.".format(kind))
        self.kind = kind
        self.t = float(t)
        self.eta = float(eta) if kind == 'modulated' else 0.

    def __call__(self, x, normal):
        """Traction vectors at boundary points ``x`` with normals."""
        x = np.asarray(x, dtype=float)
        magnitude = self.t * np.ones(x.shape[:-1])
        if self.kind == 'modulated':
            cos = x[..., 0] / np.hypot(x[..., 0], x[..., 1])
            magnitude = magnitude * (1 + self.eta * np.abs(cos))
        return magnitude[..., None] * normal

    def ramp(self, t_start, fraction):
        """Load ``(1 - fraction) t_start n + fraction * self``.

        A blend of a radial load with this load is again of the same kind.
        """
        t = (1 - fraction) * t_start + fraction * self.t
        eta = 0. if t == 0 else fraction * self.t * self.eta / t
        return TractionSpec(self.kind, t, eta)

    def __repr__(self):
        if self.kind == 'modulated':
            return "TractionSpec('modulated', t={!r}, eta={!r})".format(
                self.t, self.eta)
        return "TractionSpec('radial', t={!r})".format(self.t)


def _zero_traction(traction):
    return TractionSpec() if traction is None else traction


class DiscreteState:
    """Iterate ``(u_h, p_h)`` of the mixed method.

    Parameters
    ----------
    mesh : Mesh

    u : ndarray, shape (2 * n_nodes,)
        Nodal deformation, interleaved by component.

    p : ndarray, shape (3 * n_elements,)
        Pressure coefficients of ``{1, xi_1, xi_2}`` per element.

    params : MaterialParams, optional

    dof_map : DofMap, optional
        Defaults to the pure traction numbering.

    quadrature : int, default=3
        Gauss points per direction for every element integral.
    """
    def __init__(self, mesh, u, p, params=None, dof_map=None, quadrature=3):
        self.mesh = mesh
        self.params = MaterialParams() if params is None else params
        self.dof_map = build_dof_map(mesh) if dof_map is None else dof_map
        self.quadrature = quadrature
        self.u = np.array(u, dtype=float)
        self.p = np.array(p, dtype=float)
        if self.u.shape != (self.dof_map.n_u,):
            raise ValueError("u should have length {}, got {}.".format(
                self.dof_map.n_u, self.u.shape))
        if self.p.shape != (self.dof_map.n_p,):
            raise ValueError("p should have length {}, got {}.".format(
                self.dof_map.n_p, self.p.shape))

    @classmethod
    def interpolate(cls, mesh, deformation, pressure=None, **kwargs):
        """Nodal interpolant of ``deformation`` with an optional pressure.

        Parameters
        ----------
        deformation : callable
            Maps points of shape (m, 2) to deformed points (m, 2).

        pressure : callable, float or None
            Scalar field of points projected element-wise onto the pressure
            space, or a constant. Defaults to 0.
        """
        u = np.asarray(deformation(mesh.nodes), dtype=float).ravel()
        state = cls(mesh, u, np.zeros(3 * mesh.n_elements), **kwargs)
        if callable(pressure):
            state.p = project_pressure(state, pressure)
        elif pressure is not None:
            state.p[::3] = pressure
        return state

    @classmethod
    def identity(cls, mesh, params=None, pressure='identity', **kwargs):
        """Identity deformation.

        With ``pressure='identity'`` the constant multiplier that makes the
        identity stress free is used.
        """
        params = MaterialParams() if params is None else params
        if isinstance(pressure, str) and pressure == 'identity':
            pressure = identity_pressure(params)
        return cls.interpolate(mesh, lambda x: x, pressure, params=params,
                               **kwargs)

    def copy(self):
        return DiscreteState(self.mesh, self.u.copy(), self.p.copy(),
                             self.params, self.dof_map, self.quadrature)

    def with_quadrature(self, n):
        state = self.copy()
        state.quadrature = n
        return state

    def element_u(self):
        """Nodal deformation per element, shape (n_elements, 9, 2)."""
        return self.u[self.dof_map.element_u_dofs].reshape(-1, 9, 2)

    def element_p(self):
        """Pressure coefficients per element, shape (n_elements, 3)."""
        return self.p.reshape(-1, 3)

    def gradient(self, n=None):
        """Deformation gradient at the quadrature points.

        Returns
        -------
        F : ndarray, shape (n_elements, n_points, 2, 2)
        """
        geom = element_geometry(self.mesh, self.quadrature if n is None else n)
        return np.einsum('ekc,eqkj->eqcj', self.element_u(), geom.dN)

    def pressure(self, n=None):
        """Pressure at the quadrature points, shape (n_elements, n_points)."""
        geom = element_geometry(self.mesh, self.quadrature if n is None else n)
        return self.element_p() @ geom.psi.T

    def hessian(self, n=None):
        """Second ``x`` derivatives of ``u_h``, shape (n_elements, n_points,
        2, 2, 2) indexed by component and two directions."""
        geom = element_geometry(self.mesh, self.quadrature if n is None else n)
        return np.einsum('ekc,eqkij->eqcij', self.element_u(),
                         geom.basis_hessians())

    def evaluate(self, points):
        """Deformation, gradient and pressure at physical points.

        Points are located with ``Mesh.locate``, so the mesh must be an
        annulus of polar elements.

        Returns
        -------
        u : ndarray, shape (m, 2)

        grad : ndarray, shape (m, 2, 2)

        p : ndarray, shape (m,)
        """
        points = np.asarray(points, dtype=float)
        shape = points.shape[:-1]
        elements, xi = self.mesh.locate(points.reshape(-1, 2))
        jac, _ = _polar_jacobian(self.mesh.polar_params[elements], xi)
        inv, _ = _invert_jacobian(jac)
        dN = np.einsum('mka,mai->mki', q2_grad(xi), inv)
        u_e = self.element_u()[elements]
        u = np.einsum('mk,mkc->mc', q2_eval(xi), u_e)
        grad = np.einsum('mkc,mkj->mcj', u_e, dN)
        p = np.sum(p1_eval(xi) * self.element_p()[elements], axis=1)
        return (u.reshape(shape + (2,)), grad.reshape(shape + (2, 2)),
                p.reshape(shape))

    def __repr__(self):
        return "DiscreteState({!r}, n_u={}, n_p={})".format(
            self.mesh, self.dof_map.n_u, self.dof_map.n_p)


def _checked_gradient(state, n=None):
    F = state.gradient(n)
    J = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    bad = ~(J > 0)
    if np.any(bad):
        element, point = np.unravel_index(np.argmax(bad), J.shape)
        raise NonPositiveJacobianError(
            "det grad u_h = {} at element {}, quadrature point {}.".format(
                J[element, point], element, point),
            element=int(element), point=int(point))
    return F, J


def _scatter_vector(values, dofs, size):
    return np.bincount(dofs.ravel(), weights=values.ravel(), minlength=size)


def _scatter_matrix(values, row_dofs, col_dofs, shape):
    rows = np.broadcast_to(row_dofs[:, :, None], values.shape)
    cols = np.broadcast_to(col_dofs[:, None, :], values.shape)
    matrix = sp.coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())),
                           shape=shape)
    return matrix.tocsr()


def assemble_a(state, params=None):
    """Deformation block ``A`` of the Newton system.

    The integrand is ``(A(F) : grad w) : grad v - p cof(grad w) : grad v``
    at the current iterate.

    Parameters
    ----------
    state : DiscreteState

    params : MaterialParams, optional
        Overrides ``state.params``.

    Returns
    -------
    A : sparse matrix, shape (n_u, n_u)
    """
    params = state.params if params is None else params
    geom = element_geometry(state.mesh, state.quadrature)
    F, _ = _checked_gradient(state)
    C = tangent_tensor(params, F).reshape(F.shape[:2] + (2, 2, 2, 2))
    C = C - state.pressure()[..., None, None, None, None] * COFACTOR_DERIVATIVE
    # K[e, k, i, l, m] = sum_q JxW C_ijmn dN_kj dN_ln
    K = np.einsum('eq,eqijmn,eqkj,eqln->ekilm', geom.JxW, C, geom.dN, geom.dN,
                  optimize=True)
    K = K.reshape(-1, 18, 18)
    dofs = state.dof_map.element_u_dofs
    n_u = state.dof_map.n_u
    return _scatter_matrix(K, dofs, dofs, (n_u, n_u))


def _element_b(state, geom, F):
    cof = cofactor(F)
    Be = np.einsum('eq,qr,eqij,eqkj->erki', geom.JxW, geom.psi, cof, geom.dN,
                   optimize=True)
    return Be.reshape(-1, 3, 18)


def assemble_b(state):
    """Pressure block ``B`` with ``B[q, v] = int q cof(grad u) : grad v``.

    Returns
    -------
    B : sparse matrix, shape (n_p, n_u)
    """
    geom = element_geometry(state.mesh, state.quadrature)
    F, _ = _checked_gradient(state)
    dm = state.dof_map
    return _scatter_matrix(_element_b(state, geom, F), dm.element_p_dofs,
                           dm.element_u_dofs, (dm.n_p, dm.n_u))


def assemble_traction(state, traction):
    """Boundary work vector ``int_outer t . v ds``.

    Traction is a dead load integrated on the exact curved edges with the
    state's 1-D Gauss order.
    """
    n_u = state.dof_map.n_u
    if traction is None:
        return np.zeros(n_u)
    edges = edge_geometry(state.mesh, state.quadrature, 'outer')
    if len(edges) == 0:
        return np.zeros(n_u)
    values = traction(edges.x, edges.normal)
    local = np.einsum('gq,gqk,gqc->gkc', edges.ds, edges.phi, values)
    dofs = state.dof_map.element_u_dofs[edges.elements]
    return _scatter_vector(local.reshape(-1, 18), dofs, n_u)


def assemble_f(state, traction=None):
    """Right-hand side ``f = t . v - (P(F) - p cof F) : grad v``."""
    geom = element_geometry(state.mesh, state.quadrature)
    F, _ = _checked_gradient(state)
    stress = (first_piola(state.params, F)
              - state.pressure()[..., None, None] * cofactor(F))
    local = np.einsum('eq,eqcj,eqkj->ekc', geom.JxW, stress, geom.dN)
    internal = _scatter_vector(local.reshape(-1, 18),
                               state.dof_map.element_u_dofs,
                               state.dof_map.n_u)
    return assemble_traction(state, traction) - internal


def assemble_g(state):
    """Right-hand side ``g = -int q (det grad u - 1)``."""
    geom = element_geometry(state.mesh, state.quadrature)
    _, J = _checked_gradient(state)
    local = -np.einsum('eq,qr,eq->er', geom.JxW, geom.psi, J - 1)
    return local.ravel()


def assemble_constraints(state):
    """Multiplier rows ``int v_1``, ``int v_2`` and optionally
    ``int x_1 v_2 - x_2 v_1`` over the reference domain.

    Returns
    -------
    C : sparse matrix, shape (n_constraints, n_u) or None
    """
    dm = state.dof_map
    if dm.n_constraints == 0:
        return None
    geom = element_geometry(state.mesh, state.quadrature)
    mean = np.einsum('eq,qk->ek', geom.JxW, geom.phi)
    rows = [np.zeros(dm.element_u_dofs.shape) for _ in range(dm.n_constraints)]
    rows[0][:, 0::2] = mean
    rows[1][:, 1::2] = mean
    if dm.n_constraints == 3:
        moment = np.einsum('eq,qk,eqc->eck', geom.JxW, geom.phi, geom.x)
        rows[2][:, 0::2] = -moment[:, 1]
        rows[2][:, 1::2] = moment[:, 0]
    C = sp.vstack([
        sp.csr_matrix(_scatter_vector(r, dm.element_u_dofs, dm.n_u)[None, :])
        for r in rows])
    return C.tocsr()


class SaddleSystem:
    """Symmetric indefinite Newton system

        [[A, B^T, C^T], [B, 0, 0], [C, 0, 0]] [w; pi; m] = [f; g; 0]

    whose pressure unknown ``pi`` is the negated pressure increment.

    Attributes
    ----------
    A, B : sparse matrices

    C : sparse matrix or None

    f, g : ndarray

    dof_map : DofMap
    """
    def __init__(self, A, B, C, f, g, dof_map):
        self.A = A
        self.B = B
        self.C = C
        self.f = f
        self.g = g
        self.dof_map = dof_map

    @property
    def n_constraints(self):
        return 0 if self.C is None else self.C.shape[0]

    def _blocks(self):
        free = self.dof_map.free_u_dofs
        A = self.A[free][:, free]
        B = self.B[:, free]
        C = None if self.C is None else self.C[:, free]
        return A, B, C, self.f[free]

    def matrix(self):
        """Full saddle matrix on the free deformation dofs, CSR."""
        A, B, C, _ = self._blocks()
        if C is None:
            blocks = [[A, B.T], [B, None]]
        else:
            blocks = [[A, B.T, C.T], [B, None, None], [C, None, None]]
        return sp.bmat(blocks, format='csr')

    def rhs(self):
        _, _, _, f = self._blocks()
        return np.concatenate([f, self.g, np.zeros(self.n_constraints)])

    @property
    def shape(self):
        n = self.dof_map.n_total
        return (n, n)

    def split(self, x):
        """Split a solution vector into ``(w, pi, m)`` with ``w`` on all
        deformation dofs (zero on fixed ones)."""
        dm = self.dof_map
        w = np.zeros(dm.n_u)
        w[dm.free_u_dofs] = x[:dm.n_free]
        pi = x[dm.n_free:dm.n_free + dm.n_p]
        return w, pi, x[dm.n_free + dm.n_p:]


def assemble_system(state, traction=None):
    """Newton system at ``state``.

    Returns
    -------
    system : SaddleSystem
    """
    return SaddleSystem(assemble_a(state), assemble_b(state),
                        assemble_constraints(state),
                        assemble_f(state, traction), assemble_g(state),
                        state.dof_map)


def total_energy(state, traction=None, n=None):
    """Lagrangian ``int W - p (det - 1) dx - int t . u ds``.

    Parameters
    ----------
    n : int, optional
        Quadrature order, defaults to ``state.quadrature``.
    """
    if n is not None and n != state.quadrature:
        state = state.with_quadrature(n)
    geom = element_geometry(state.mesh, state.quadrature)
    F, J = _checked_gradient(state)
    density = energy_density(state.params, F) - state.pressure() * (J - 1)
    work = assemble_traction(state, _zero_traction(traction)) @ state.u
    return float(np.sum(geom.JxW * density) - work)


def project_pressure(state, pressure, n=None):
    """Element-wise L2 projection of a scalar field onto the pressure space.

    Parameters
    ----------
    pressure : callable
        Maps physical points (..., 2) to values (...).

    Returns
    -------
    p : ndarray, shape (3 * n_elements,)
    """
    geom = element_geometry(state.mesh, state.quadrature + 2 if n is None
                            else n)
    values = pressure(geom.x)
    mass = np.einsum('eq,qr,qs->ers', geom.JxW, geom.psi, geom.psi)
    load = np.einsum('eq,qr,eq->er', geom.JxW, geom.psi, values)
    return np.linalg.solve(mass, load[..., None])[..., 0].ravel()


def save_solution(state, path):
    """Write ``state`` in the ``dpq2p1-sol v1`` text format."""
    lines = ["dpq2p1-sol v1"]
    for i, (ux, uy) in enumerate(state.u.reshape(-1, 2)):
        lines.append("u {} {:.17g} {:.17g}".format(i, ux, uy))
    for e, c in enumerate(state.element_p()):
        lines.append("p {} {:.17g} {:.17g} {:.17g}".format(e, *c))
    with open(path, 'w') as f:
        f.write("\n".join(lines) + "\n")


def load_solution(path, mesh, params=None, **kwargs):
    """Read a state written by ``save_solution`` on ``mesh``."""
    u = np.zeros((mesh.n_nodes, 2))
    p = np.zeros((mesh.n_elements, 3))
    with open(path) as f:
        if f.readline().split() != ['dpq2p1-sol', 'v1']:
            raise ValueError("Not a dpq2p1-sol v1 file: {}".format(path))
        for line in f:
            fields = line.split()
            if not fields:
                continue
            if fields[0] == 'u':
                u[int(fields[1])] = [float(v) for v in fields[2:4]]
            elif fields[0] == 'p':
                p[int(fields[1])] = [float(v) for v in fields[2:5]]
    return DiscreteState(mesh, u.ravel(), p.ravel(), params, **kwargs)
