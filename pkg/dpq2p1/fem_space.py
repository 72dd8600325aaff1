"""Reference basis, quadrature and degrees of freedom of the Q2-P1 pair.

The deformation is continuous vector Q2 with nodes ordered as

    a3 -- a6 -- a2
    |            |
    a7    a8    a5
    |            |
    a0 -- a4 -- a1

on the reference square ``[-1, 1]^2``. The pressure is discontinuous and
affine in the reference coordinates of each element, stored as the
coefficients of ``{1, xi_1, xi_2}``. Deformation dofs are interleaved,
``2 * node + component``; pressure dofs of element ``e`` are
``3 * e + r``.
"""
import numpy as np

from .exceptions import UnsupportedOrderError, SingularGeometryJacobianError

__all__ = ['REFERENCE_NODES', 'QuadratureRule', 'gauss_rule', 'gauss_rule_1d',
           'q2_eval', 'q2_grad', 'q2_hessian', 'p1_eval', 'physical_gradient',
           'physical_hessian', 'ElementGeometry', 'element_geometry',
           'EdgeGeometry', 'edge_geometry', 'DofMap', 'build_dof_map',
           'EDGE_NODES', 'edge_reference_points']


# 1-D node index (0: -1, 1: 0, 2: +1) of each Q2 node along xi_1 and xi_2
_NODE_INDEX = np.array([[0, 0], [2, 0], [2, 2], [0, 2],
                        [1, 0], [2, 1], [1, 2], [0, 1], [1, 1]])
REFERENCE_NODES = _NODE_INDEX - 1.
REFERENCE_NODES.setflags(write=False)

# local nodes of the four edges, anticlockwise: xi_2 = -1, xi_1 = +1,
# xi_2 = +1, xi_1 = -1
EDGE_NODES = np.array([[0, 4, 1], [1, 5, 2], [2, 6, 3], [3, 7, 0]])


class QuadratureRule:
    """Tensor Gauss-Legendre rule on the reference square.

    Attributes
    ----------
    points : ndarray, shape (n ** 2, 2)

    weights : ndarray, shape (n ** 2,)

    order : int
        Number of points per direction.
    """
    def __init__(self, points, weights, order):
        self.points = points
        self.weights = weights
        self.order = order

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return "QuadratureRule(order={})".format(self.order)


def _check_order(n):
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 10:
        raise UnsupportedOrderError(
            "Quadrature order must be an integer in [1, 10], got {!r}.".format(
                n))


def gauss_rule_1d(n):
    """Gauss-Legendre points and weights on ``[-1, 1]``."""
    _check_order(n)
    return np.polynomial.legendre.leggauss(n)


def gauss_rule(n):
    """Tensor Gauss-Legendre rule with ``n x n`` points.

    Parameters
    ----------
    n : int
        Points per direction, ``1 <= n <= 10``. Monomials
        ``xi_1^a xi_2^b`` with ``a, b <= 2 n - 1`` are integrated exactly.

    Returns
    -------
    rule : QuadratureRule

    Examples
    --------
    >>> rule = gauss_rule(1)
    >>> rule.points, rule.weights
    (array([[0., 0.]]), array([4.]))
    """
    t, w = gauss_rule_1d(n)
    # xi_1 varies fastest
    x1, x2 = np.meshgrid(t, t)
    w1, w2 = np.meshgrid(w, w)
    points = np.column_stack([x1.ravel(), x2.ravel()])
    weights = (w1 * w2).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points, weights, n)


def _lagrange_1d(t):
    t = np.asarray(t, dtype=float)
    values = np.stack([(t * t - t) / 2, 1 - t * t, (t * t + t) / 2],
                      axis=-1)
    first = np.stack([t - .5, -2 * t, t + .5], axis=-1)
    second = np.broadcast_to(np.array([1., -2., 1.]), values.shape)
    return values, first, second


def _tensor_parts(xi):
    xi = np.asarray(xi, dtype=float)
    v1, d1, s1 = _lagrange_1d(xi[..., 0])
    v2, d2, s2 = _lagrange_1d(xi[..., 1])
    i, j = _NODE_INDEX[:, 0], _NODE_INDEX[:, 1]
    return (v1[..., i], d1[..., i], s1[..., i],
            v2[..., j], d2[..., j], s2[..., j])


def q2_eval(xi):
    """Values of the nine Q2 shape functions.

    Parameters
    ----------
    xi : array-like, shape (..., 2)
        Reference points.

    Returns
    -------
    values : ndarray, shape (..., 9)

    Examples
    --------
    >>> q2_eval([0., 0.])
    array([0., 0., 0., 0., 0., 0., 0., 0., 1.])
    """
    v1, _, _, v2, _, _ = _tensor_parts(xi)
    return v1 * v2


def q2_grad(xi):
    """Reference gradients of the Q2 shape functions, shape (..., 9, 2)."""
    v1, d1, _, v2, d2, _ = _tensor_parts(xi)
    return np.stack([d1 * v2, v1 * d2], axis=-1)


def q2_hessian(xi):
    """Reference Hessians of the Q2 shape functions, shape (..., 9, 2, 2)."""
    v1, d1, s1, v2, d2, s2 = _tensor_parts(xi)
    mixed = d1 * d2
    return np.stack([np.stack([s1 * v2, mixed], axis=-1),
                     np.stack([mixed, v1 * s2], axis=-1)], axis=-2)


def p1_eval(xi):
    """Pressure basis ``{1, xi_1, xi_2}``, shape (..., 3)."""
    xi = np.asarray(xi, dtype=float)
    return np.concatenate([np.ones(xi.shape[:-1] + (1,)), xi], axis=-1)


def edge_reference_points(edge, t):
    """Reference points of local ``edge`` at parameters ``t`` in [-1, 1].

    Edges are traversed anticlockwise. Returns the points and the constant
    derivative ``d xi / d t``.
    """
    t = np.asarray(t, dtype=float)
    one = np.ones_like(t)
    if edge == 0:
        return np.stack([t, -one], axis=-1), np.array([1., 0.])
    elif edge == 1:
        return np.stack([one, t], axis=-1), np.array([0., 1.])
    elif edge == 2:
        return np.stack([-t, one], axis=-1), np.array([-1., 0.])
    elif edge == 3:
        return np.stack([-one, -t], axis=-1), np.array([0., -1.])
    raise ValueError("edge must be 0, 1, 2 or 3, got {}.".format(edge))


def _invert_jacobian(jac):
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    scale = np.sum(jac ** 2, axis=(-2, -1))
    singular = ~(np.abs(det) > 1e-14 * scale)
    if np.any(singular):
        raise SingularGeometryJacobianError(
            "Geometry Jacobian is singular at {} point(s).".format(
                int(np.sum(singular))))
    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1]
    inv[..., 0, 1] = -jac[..., 0, 1]
    inv[..., 1, 0] = -jac[..., 1, 0]
    inv[..., 1, 1] = jac[..., 0, 0]
    return inv / det[..., None, None], det


def physical_gradient(geometry_map, xi, ref_grad=None):
    """Gradients of the shape functions with respect to ``x``.

    Applies ``grad_x phi = (dx / dxi)^{-T} grad_xi phi``.

    Parameters
    ----------
    geometry_map : DualParametricMap
        Map of the element.

    xi : array-like, shape (..., 2)
        Reference points.

    ref_grad : ndarray, shape (..., k, 2), optional
        Reference gradients; defaults to the Q2 basis.

    Returns
    -------
    grad : ndarray, shape (..., k, 2)
    """
    if ref_grad is None:
        ref_grad = q2_grad(xi)
    jac, _ = geometry_map.jacobian(xi)
    inv, _ = _invert_jacobian(jac)
    # grad_x[k, i] = sum_a grad_xi[k, a] inv[a, i]
    return np.einsum('...ka,...ai->...ki', ref_grad, inv)


def physical_hessian(geometry_map, xi):
    """Second ``x`` derivatives of the Q2 basis through a curved map.

    Includes the curvature of the map:
    ``d2 phi / dx_i dx_j = phi_ab G_ai G_bj - g_k H_klc G_li G_cj`` with
    ``G = (dx / dxi)^{-1}``, ``g`` the physical gradient and ``H`` the
    second derivatives of the map.

    Returns
    -------
    hessian : ndarray, shape (..., 9, 2, 2)
    """
    jac, _ = geometry_map.jacobian(xi)
    inv, _ = _invert_jacobian(jac)
    return _physical_hessian(q2_grad(xi), q2_hessian(xi), inv,
                             geometry_map.hessian(xi))


def _physical_hessian(ref_grad, ref_hess, inv, map_hess):
    grad = np.einsum('...ka,...ai->...ki', ref_grad, inv)
    hess = np.einsum('...kab,...ai,...bj->...kij', ref_hess, inv, inv)
    curvature = np.einsum('...mlc,...li,...cj->...mij', map_hess, inv, inv)
    return hess - np.einsum('...km,...mij->...kij', grad, curvature)


class ElementGeometry:
    """Quadrature data of every element of a mesh for one rule.

    Attributes
    ----------
    rule : QuadratureRule

    phi : ndarray, shape (n_points, 9)
        Q2 values at the quadrature points.

    psi : ndarray, shape (n_points, 3)
        Pressure basis at the quadrature points.

    x : ndarray, shape (n_elements, n_points, 2)
        Physical quadrature points.

    det : ndarray, shape (n_elements, n_points)
        Geometry Jacobian determinants.

    JxW : ndarray, shape (n_elements, n_points)
        Weights times determinants.

    dN : ndarray, shape (n_elements, n_points, 9, 2)
        Physical gradients of the Q2 basis.
    """
    def __init__(self, mesh, rule):
        self.rule = rule
        xi = rule.points
        self.phi = q2_eval(xi)
        self.psi = p1_eval(xi)
        ref_grad = q2_grad(xi)
        x, jac = [], []
        for element in mesh.elements:
            x.append(element.map(xi))
            jac.append(element.map.jacobian(xi)[0])
        self.x = np.array(x)
        self.jacobian = np.array(jac)
        self.inverse, self.det = _invert_jacobian(self.jacobian)
        self.JxW = self.det * rule.weights
        self.dN = np.einsum('qka,eqai->eqki', ref_grad, self.inverse)
        self._mesh_elements = mesh.elements
        self._hessian = None
        for value in (self.phi, self.psi, self.x, self.jacobian, self.inverse,
                      self.det, self.JxW, self.dN):
            value.setflags(write=False)

    @property
    def n_points(self):
        return len(self.rule)

    def basis_hessians(self):
        """Physical Hessians of the Q2 basis, shape (n_elements, n_points, 9,
        2, 2). Computed on first use."""
        if self._hessian is None:
            xi = self.rule.points
            ref_grad = q2_grad(xi)
            ref_hess = q2_hessian(xi)
            map_hess = np.array([element.map.hessian(xi)
                                 for element in self._mesh_elements])
            self._hessian = _physical_hessian(ref_grad, ref_hess,
                                              self.inverse, map_hess)
            self._hessian.setflags(write=False)
        return self._hessian


def element_geometry(mesh, n=3):
    """Cached quadrature geometry of ``mesh`` for the ``n x n`` Gauss rule.

    Returns
    -------
    geometry : ElementGeometry
    """
    key = ('elements', n)
    if key not in mesh._geometry:
        mesh._geometry[key] = ElementGeometry(mesh, gauss_rule(n))
    return mesh._geometry[key]


class EdgeGeometry:
    """1-D quadrature data on a set of boundary edges.

    Attributes
    ----------
    elements : ndarray of int, shape (n_edges,)

    local_edges : ndarray of int, shape (n_edges,)

    phi : ndarray, shape (n_edges, n_points, 9)
        Q2 values of the owning element at the edge quadrature points.

    x : ndarray, shape (n_edges, n_points, 2)

    normal : ndarray, shape (n_edges, n_points, 2)
        Outward unit normals.

    ds : ndarray, shape (n_edges, n_points)
        Quadrature weights times the arc length element.
    """
    def __init__(self, mesh, edges, n):
        t, w = gauss_rule_1d(n)
        elements, local_edges = [], []
        phi, x, normal, ds = [], [], [], []
        for e, edge in edges:
            element = mesh.elements[e]
            xi, dxi = edge_reference_points(edge, t)
            jac, _ = element.map.jacobian(xi)
            tangent = jac @ dxi
            speed = np.linalg.norm(tangent, axis=-1)
            elements.append(e)
            local_edges.append(edge)
            phi.append(q2_eval(xi))
            x.append(element.map(xi))
            normal.append(np.column_stack([tangent[:, 1], -tangent[:, 0]])
                          / speed[:, None])
            ds.append(w * speed)
        self.elements = np.array(elements, dtype=int)
        self.local_edges = np.array(local_edges, dtype=int)
        shape = (-1, n)
        self.phi = np.array(phi).reshape(shape + (9,))
        self.x = np.array(x).reshape(shape + (2,))
        self.normal = np.array(normal).reshape(shape + (2,))
        self.ds = np.array(ds).reshape(shape)

    def __len__(self):
        return len(self.elements)


def edge_geometry(mesh, n=3, kind='outer'):
    """Cached edge quadrature on the ``kind`` boundary of ``mesh``.

    Parameters
    ----------
    kind : {'outer', 'inner'}
        Which boundary edges to use, see ``Mesh.boundary_edges``.
    """
    key = (kind, n)
    if key not in mesh._geometry:
        mesh._geometry[key] = EdgeGeometry(
            mesh, mesh.boundary_edges()[kind], n)
    return mesh._geometry[key]


class DofMap:
    """Degrees of freedom of the mixed Q2-P1 space on a mesh.

    Attributes
    ----------
    n_nodes, n_elements : int

    n_u : int
        Deformation dofs, two per node.

    n_p : int
        Pressure dofs, three per element.

    n_constraints : int
        Global multipliers: 2 for the mean-zero condition of a pure traction
        problem, 3 when rotations are pinned as well, 0 with Dirichlet data.

    element_u_dofs : ndarray of int, shape (n_elements, 18)
        Entry ``2 * k + c`` is the global dof of component ``c`` of local
        node ``k``.

    element_p_dofs : ndarray of int, shape (n_elements, 3)

    fixed_u_dofs, free_u_dofs : ndarray of int
        Partition of the deformation dofs by the Dirichlet data.
    """
    def __init__(self, element_nodes, n_nodes, boundary='traction',
                 fixed_nodes=None, pin_rotation=False):
        self.boundary = boundary
        self.pin_rotation = pin_rotation
        self.n_nodes = n_nodes
        self.n_elements = len(element_nodes)
        self.n_u = 2 * n_nodes
        self.n_p = 3 * self.n_elements
        self.element_u_dofs = (2 * element_nodes[:, :, None]
                               + np.arange(2)).reshape(self.n_elements, 18)
        self.element_p_dofs = (3 * np.arange(self.n_elements)[:, None]
                               + np.arange(3))
        if boundary == 'traction':
            self.n_constraints = 3 if pin_rotation else 2
            fixed_nodes = np.zeros(0, dtype=int)
        else:
            self.n_constraints = 0
            fixed_nodes = np.unique(np.asarray(fixed_nodes, dtype=int))
        self.fixed_u_dofs = (2 * fixed_nodes[:, None]
                             + np.arange(2)).ravel()
        self.free_u_dofs = np.setdiff1d(np.arange(self.n_u),
                                        self.fixed_u_dofs)
        for value in (self.element_u_dofs, self.element_p_dofs,
                      self.fixed_u_dofs, self.free_u_dofs):
            value.setflags(write=False)

    @property
    def n_dofs(self):
        """Deformation dof count ``N_d``."""
        return self.n_u

    @property
    def n_free(self):
        return len(self.free_u_dofs)

    @property
    def n_total(self):
        """Size of the saddle point system."""
        return self.n_free + self.n_p + self.n_constraints

    def __repr__(self):
        return ("DofMap(n_u={}, n_p={}, n_constraints={}, boundary={!r})"
                .format(self.n_u, self.n_p, self.n_constraints,
                        self.boundary))


def build_dof_map(mesh, boundary='traction', fixed_nodes=None,
                  pin_rotation=False):
    """Number the dofs of the mixed space on ``mesh``.

    Parameters
    ----------
    mesh : Mesh

    boundary : {'traction', 'dirichlet'}, default='traction'
        With ``'traction'`` the whole boundary carries Neumann data and
        the mean of the deformation is fixed by Lagrange multipliers.
        With ``'dirichlet'`` the dofs of ``fixed_nodes`` are held fixed.

    fixed_nodes : array-like of int, optional
        Nodes with prescribed deformation, required for ``'dirichlet'``.

    pin_rotation : bool, default=False
        Add a third multiplier removing the infinitesimal rotation.

    Returns
    -------
    dof_map : DofMap
    """
    if boundary not in ('traction', 'dirichlet'):
        raise ValueError("boundary should be 'traction' or 'dirichlet', "
                         "got {!r}.".format(boundary))
    if boundary == 'dirichlet':
        if fixed_nodes is None:
            raise ValueError("fixed_nodes is required for Dirichlet data.")
        if pin_rotation:
            raise ValueError("pin_rotation only applies to traction problems.")
    return DofMap(mesh.element_nodes, mesh.n_nodes, boundary=boundary,
                  fixed_nodes=fixed_nodes, pin_rotation=pin_rotation)
