"""Annular meshes of curved quadrilateral elements."""
import warnings

import numpy as np
import pandas as pd

from .exceptions import (NonPositiveRadiusError, LayerSumMismatchError,
                         DegenerateSectorError, NonConformingMeshError,
                         NonPositiveMapJacobianError, OutOfRangeError,
                         MeshQualityWarning)
from .fem_space import (REFERENCE_NODES, EDGE_NODES, gauss_rule,
                        gauss_rule_1d, edge_reference_points, q2_eval,
                        q2_grad, q2_hessian)

__all__ = ['DualParametricMap', 'PolarMap', 'BilinearMap', 'BiquadraticMap',
           'Element', 'Mesh', 'MeshQualityReport', 'build_annulus_mesh',
           'eval_map', 'eval_map_jacobian', 'check_regularity',
           'check_conformity', 'save_mesh', 'load_mesh',
           'build_rectangle_mesh']


class DualParametricMap:
    """Smooth map from the reference square onto a physical element.

    Subclasses implement ``__call__``, ``jacobian`` and ``hessian``, all
    vectorized over reference points of shape ``(..., 2)``.
    """
    kind = None

    def _validate(self):
        jac, det = self.jacobian(gauss_rule(3).points)
        if not np.all(det > 0):
            raise NonPositiveMapJacobianError(
                "{} map is not orientation preserving: min det = {}.".format(
                    self.kind, det.min()))

    def parameters(self):
        raise NotImplementedError()


def _polar_parts(params, xi):
    params = np.asarray(params, dtype=float)
    R0, R1, th0, th3 = np.moveaxis(params, -1, 0)
    a = (R1 - R0) / 2
    b = (th3 - th0) / 2
    R = R0 + (xi[..., 0] + 1) * a
    theta = th0 + (xi[..., 1] + 1) * b
    return a, b, R, theta


def _polar_eval(params, xi):
    _, _, R, theta = _polar_parts(params, xi)
    return np.stack([R * np.cos(theta), R * np.sin(theta)], axis=-1)


def _polar_jacobian(params, xi):
    a, b, R, theta = _polar_parts(params, xi)
    a = a * np.ones_like(R)
    c, s = np.cos(theta), np.sin(theta)
    jac = np.empty(R.shape + (2, 2))
    jac[..., 0, 0] = a * c
    jac[..., 0, 1] = -R * b * s
    jac[..., 1, 0] = a * s
    jac[..., 1, 1] = R * b * c
    return jac, a * b * R


def _polar_hessian(params, xi):
    a, b, R, theta = _polar_parts(params, xi)
    c, s = np.cos(theta), np.sin(theta)
    hess = np.zeros(R.shape + (2, 2, 2))
    hess[..., 0, 0, 1] = hess[..., 0, 1, 0] = -a * b * s
    hess[..., 1, 0, 1] = hess[..., 1, 1, 0] = a * b * c
    hess[..., 0, 1, 1] = -R * b ** 2 * c
    hess[..., 1, 1, 1] = -R * b ** 2 * s
    return hess


class PolarMap(DualParametricMap):
    """Ring sector ``R0 <= R <= R1``, ``th0 <= theta <= th3``.

    ``R`` is affine in ``xi_1`` and ``theta`` affine in ``xi_2``, and the
    point is ``(R cos(theta), R sin(theta))``.

    Parameters
    ----------
    R0, R1 : float
        Inner and outer radius, ``0 < R0 < R1``.

    th0, th3 : float
        Angular span in radians, ``0 < th3 - th0 <= pi / 2``.

    Examples
    --------
    >>> PolarMap(1., 2., 0., np.pi / 2)([-1., -1.])
    array([1., 0.])
    """
    kind = 'polar'

    def __init__(self, R0, R1, th0, th3):
        if not R0 > 0:
            raise NonPositiveRadiusError(
                "Inner radius must be positive, got {}.".format(R0))
        if not R1 > R0 or not th3 > th0:
            raise NonPositiveMapJacobianError(
                "Polar map needs R1 > R0 and th3 > th0, got {}.".format(
                    (R0, R1, th0, th3)))
        if th3 - th0 > np.pi / 2 * (1 + 1e-12):
            raise DegenerateSectorError(
                "Sector spans {} rad, more than pi / 2.".format(th3 - th0))
        self.R0, self.R1, self.th0, self.th3 = map(float, (R0, R1, th0, th3))
        self._params = np.array([self.R0, self.R1, self.th0, self.th3])
        self._validate()

    def parameters(self):
        return self._params.copy()

    def __call__(self, xi):
        return _polar_eval(self._params, np.asarray(xi, dtype=float))

    def jacobian(self, xi):
        return _polar_jacobian(self._params, np.asarray(xi, dtype=float))

    def hessian(self, xi):
        return _polar_hessian(self._params, np.asarray(xi, dtype=float))

    def __repr__(self):
        return "PolarMap(R0={}, R1={}, th0={}, th3={})".format(
            self.R0, self.R1, self.th0, self.th3)


class _NodalMap(DualParametricMap):
    n_control = None

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.shape != (self.n_control, 2):
            raise ValueError("{} map needs {} control points, got shape "
                             "{}.".format(self.kind, self.n_control,
                                          points.shape))
        self.points = points
        self._validate()

    def parameters(self):
        return self.points.ravel().copy()

    def __call__(self, xi):
        return self._shape(xi) @ self.points

    def jacobian(self, xi):
        jac = np.einsum('...ka,kc->...ca', self._shape_grad(xi), self.points)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        return jac, det

    def hessian(self, xi):
        return np.einsum('...kab,kc->...cab', self._shape_hessian(xi),
                         self.points)

    def __repr__(self):
        return "{}({})".format(self.__class__.__name__,
                               self.points.tolist())


class BilinearMap(_NodalMap):
    """Bilinear quadrilateral through 4 vertices ordered anticlockwise."""
    kind = 'bilinear'
    n_control = 4

    def _shape(self, xi):
        xi = np.asarray(xi, dtype=float)
        sx = REFERENCE_NODES[:4, 0] * xi[..., 0, None]
        sy = REFERENCE_NODES[:4, 1] * xi[..., 1, None]
        return (1 + sx) * (1 + sy) / 4

    def _shape_grad(self, xi):
        xi = np.asarray(xi, dtype=float)
        cx, cy = REFERENCE_NODES[:4, 0], REFERENCE_NODES[:4, 1]
        sx = 1 + cx * xi[..., 0, None]
        sy = 1 + cy * xi[..., 1, None]
        return np.stack([cx * sy, sx * cy], axis=-1) / 4

    def _shape_hessian(self, xi):
        xi = np.asarray(xi, dtype=float)
        cx, cy = REFERENCE_NODES[:4, 0], REFERENCE_NODES[:4, 1]
        hess = np.zeros(xi.shape[:-1] + (4, 2, 2))
        hess[..., 0, 1] = hess[..., 1, 0] = cx * cy / 4
        return hess


class BiquadraticMap(_NodalMap):
    """Biquadratic quadrilateral through 9 points in Q2 node order."""
    kind = 'biquadratic'
    n_control = 9

    def _shape(self, xi):
        return q2_eval(xi)

    def _shape_grad(self, xi):
        return q2_grad(xi)

    def _shape_hessian(self, xi):
        return q2_hessian(xi)


def eval_map(geometry_map, xi):
    """Physical point ``F_T(xi)``.

    Examples
    --------
    >>> eval_map(PolarMap(1., 2., 0., np.pi / 2), [0., 0.]).round(5)
    array([1.06066, 1.06066])
    """
    return geometry_map(xi)


def eval_map_jacobian(geometry_map, xi):
    """Jacobian ``dx / dxi`` and its determinant.

    Examples
    --------
    >>> _, det = eval_map_jacobian(PolarMap(1., 2., 0., np.pi / 2), [0., 0.])
    >>> round(float(det), 5)
    0.58905
    """
    return geometry_map.jacobian(xi)


class Element:
    """Curved element: geometry map, nine global node ids and layer."""
    def __init__(self, geometry_map, node_ids, layer_index=0):
        self.map = geometry_map
        self.node_ids = np.asarray(node_ids, dtype=int)
        if self.node_ids.shape != (9,):
            raise ValueError("An element has 9 nodes, got {}.".format(
                self.node_ids.shape))
        self.layer_index = layer_index

    def __repr__(self):
        return "Element({!r}, layer_index={})".format(self.map,
                                                      self.layer_index)


def _edge_lengths(geometry_map, n=6):
    t, w = gauss_rule_1d(n)
    lengths = []
    for edge in range(4):
        xi, dxi = edge_reference_points(edge, t)
        jac, _ = geometry_map.jacobian(xi)
        lengths.append(np.sum(w * np.linalg.norm(jac @ dxi, axis=-1)))
    return np.array(lengths)


class Mesh:
    """Conforming mesh of curved quadrilateral Q2 elements.

    Parameters
    ----------
    nodes : ndarray, shape (n_nodes, 2)
        Node coordinates.

    elements : list of Element

    rho : float or None
        Defect radius of an annulus mesh.

    layers : list of (float, float) or None
        Inner radius and thickness of each layer.

    n_sectors : int or None
        Elements per layer.

    h : float or None
        Nominal mesh size. Defaults to the largest ``h_T``.

    Attributes
    ----------
    element_nodes : ndarray of int, shape (n_elements, 9)

    h_T : ndarray, shape (n_elements,)
        Largest curved edge length of every element.
    """
    def __init__(self, nodes, elements, rho=None, layers=None, n_sectors=None,
                 h=None, validate=True):
        nodes = np.array(nodes, dtype=float)
        nodes.setflags(write=False)
        self.nodes = nodes
        self.elements = list(elements)
        self.rho = rho
        self.outer_radius = None if rho is None else 1.
        self.layers = None if layers is None else [
            (float(r), float(t)) for r, t in layers]
        self.n_sectors = n_sectors
        self.element_nodes = np.array([e.node_ids for e in self.elements],
                                      dtype=int).reshape(-1, 9)
        self.element_nodes.setflags(write=False)
        self._edge_lengths = np.array(
            [_edge_lengths(e.map) for e in self.elements]).reshape(-1, 4)
        self.h_T = self._edge_lengths.max(axis=1)
        self.h = float(self.h_T.max()) if h is None else float(h)
        self._geometry = {}
        if validate:
            self._check_nodes()
            check_conformity(self)

    @classmethod
    def from_elements(cls, nodes, elements, **kwargs):
        """Build a mesh from node coordinates and ``(map, node_ids)`` pairs.

        Examples
        --------
        >>> square = BilinearMap([[0, 0], [1, 0], [1, 1], [0, 1]])
        >>> nodes = square(REFERENCE_NODES)
        >>> mesh = Mesh.from_elements(nodes, [(square, range(9))])
        >>> mesh.n_elements, mesh.n_nodes
        (1, 9)
        """
        elements = [e if isinstance(e, Element) else Element(*e)
                    for e in elements]
        return cls(nodes, elements, **kwargs)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def is_annulus(self):
        return self.rho is not None and self.n_sectors is not None

    @property
    def polar_params(self):
        """Polar map parameters, shape (n_elements, 4), or None."""
        if 'polar' not in self._geometry:
            params = None
            if all(isinstance(e.map, PolarMap) for e in self.elements):
                params = np.array([e.map.parameters()
                                   for e in self.elements]).reshape(-1, 4)
                params.setflags(write=False)
            self._geometry['polar'] = params
        return self._geometry['polar']

    def _check_nodes(self):
        for index, element in enumerate(self.elements):
            expected = element.map(REFERENCE_NODES)
            actual = self.nodes[element.node_ids]
            scale = max(1., np.abs(expected).max())
            if np.abs(expected - actual).max() > 1e-12 * scale:
                raise NonConformingMeshError(
                    "Node coordinates of element {} do not match its "
                    "map.".format(index))

    def area(self, n=3):
        """Sum of the element areas by ``n x n`` Gauss quadrature."""
        rule = gauss_rule(n)
        return float(sum(np.sum(rule.weights * e.map.jacobian(rule.points)[1])
                         for e in self.elements))

    def boundary_edges(self):
        """Edges owned by a single element.

        Returns
        -------
        edges : dict
            ``'inner'`` and ``'outer'`` map to lists of ``(element,
            local_edge)``. On annulus meshes edges on the defect are inner
            and edges on the unit circle outer; on other meshes every
            boundary edge is outer.
        """
        count = {}
        for e, nodes in enumerate(self.element_nodes):
            for edge, local in enumerate(EDGE_NODES):
                key = tuple(sorted(nodes[local]))
                count.setdefault(key, []).append((e, edge))
        boundary = sorted(owners[0] for owners in count.values()
                          if len(owners) == 1)
        edges = {'inner': [], 'outer': []}
        for e, edge in boundary:
            kind = 'outer'
            if self.rho is not None:
                mid = self.nodes[self.element_nodes[e, EDGE_NODES[edge, 1]]]
                if np.hypot(*mid) < (self.rho + 1.) / 2:
                    kind = 'inner'
            edges[kind].append((e, edge))
        return edges

    def locate(self, points):
        """Element and reference coordinates of physical points.

        Uses the closed-form inverse of the polar maps of an annulus mesh.

        Parameters
        ----------
        points : array-like, shape (m, 2)

        Returns
        -------
        elements : ndarray of int, shape (m,)

        xi : ndarray, shape (m, 2)
        """
        if not self.is_annulus or self.polar_params is None:
            raise ValueError("locate requires an annulus mesh of polar "
                             "elements.")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        R = np.hypot(points[:, 0], points[:, 1])
        tol = 1e-12
        if np.any(R < self.rho * (1 - tol)) or np.any(R > 1 + tol):
            raise OutOfRangeError("Points must satisfy rho <= |x| <= 1.")
        theta = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
        inner = np.array([r for r, _ in self.layers])
        layer = np.clip(np.searchsorted(inner, R, side='right') - 1, 0,
                        len(inner) - 1)
        width = 2 * np.pi / self.n_sectors
        sector = np.clip(np.floor(theta / width).astype(int), 0,
                         self.n_sectors - 1)
        elements = layer * self.n_sectors + sector
        params = self.polar_params[elements]
        R0, R1, th0, th3 = params.T
        xi = np.column_stack([2 * (R - R0) / (R1 - R0) - 1,
                              2 * (theta - th0) / (th3 - th0) - 1])
        return elements, np.clip(xi, -1., 1.)

    def __repr__(self):
        if self.is_annulus:
            return "Mesh(rho={}, layers={}, N={}, h={:.4g})".format(
                self.rho, len(self.layers), self.n_sectors, self.h)
        return "Mesh(n_elements={}, n_nodes={})".format(self.n_elements,
                                                        self.n_nodes)


def _check_layers(rho, layers):
    if not rho > 0:
        raise NonPositiveRadiusError(
            "rho must be positive, got {}.".format(rho))
    if len(layers) == 0:
        raise LayerSumMismatchError("At least one layer is needed.")
    radii = np.array([r for r, _ in layers], dtype=float)
    tau = np.array([t for _, t in layers], dtype=float)
    if np.any(radii <= 0):
        raise NonPositiveRadiusError(
            "Layer radii must be positive, got {}.".format(radii.min()))
    if np.any(tau <= 0):
        raise LayerSumMismatchError(
            "Layer thicknesses must be positive, got {}.".format(tau.min()))
    if abs(tau.sum() - (1 - rho)) > 1e-10:
        raise LayerSumMismatchError(
            "Layer thicknesses sum to {!r}, expected 1 - rho = {!r}.".format(
                tau.sum(), 1 - rho))
    expected = rho + np.concatenate([[0.], np.cumsum(tau)[:-1]])
    if np.abs(radii - expected).max() > 1e-10:
        raise LayerSumMismatchError(
            "Layers must be contiguous starting at rho.")
    return tau


def build_annulus_mesh(rho, layers, n_sectors, h=None):
    """Mesh of the annulus ``rho <= |x| <= 1`` by ring sector elements.

    Node ``(i, j)`` sits at radial index ``i`` (layer boundaries and
    mid-radii, innermost first) and angular index ``j`` (multiples of
    ``pi / N``) and has id ``i * 2 N + j``; element ``(l, k)`` has id
    ``l * N + k``.

    Parameters
    ----------
    rho : float
        Defect radius.

    layers : list of (float, float)
        Inner radius and thickness of each layer, innermost first. The
        thicknesses must sum to ``1 - rho``.

    n_sectors : int
        Elements per layer. Each sector spans ``2 pi / N`` and must not
        exceed a quarter turn.

    h : float, optional
        Nominal mesh size recorded on the mesh.

    Returns
    -------
    mesh : Mesh

    Examples
    --------
    >>> mesh = build_annulus_mesh(0.5, [(0.5, 0.5)], 4)
    >>> mesh.n_elements, mesh.n_nodes
    (4, 24)
    """
    tau = _check_layers(rho, layers)
    if n_sectors < 3:
        raise DegenerateSectorError(
            "N must be at least 3, got {}.".format(n_sectors))
    if 2 * np.pi / n_sectors > np.pi / 2 * (1 + 1e-12):
        raise DegenerateSectorError(
            "N = {} gives sectors wider than pi / 2; increase N.".format(
                n_sectors))
    n_layers = len(tau)
    bounds = rho + np.concatenate([[0.], np.cumsum(tau)])
    bounds[-1] = 1.
    radii = np.empty(2 * n_layers + 1)
    radii[::2] = bounds
    radii[1::2] = (bounds[:-1] + bounds[1:]) / 2
    n_angles = 2 * n_sectors
    angles = np.arange(n_angles) * np.pi / n_sectors
    R, T = np.meshgrid(radii, angles, indexing='ij')
    nodes = np.column_stack([(R * np.cos(T)).ravel(),
                             (R * np.sin(T)).ravel()])
    # (radial, angular) offsets of the 9 element nodes
    offsets = REFERENCE_NODES.astype(int) + 1
    elements = []
    width = 2 * np.pi / n_sectors
    for layer in range(n_layers):
        for k in range(n_sectors):
            i = 2 * layer + offsets[:, 0]
            j = np.mod(2 * k + offsets[:, 1], n_angles)
            polar = PolarMap(bounds[layer], bounds[layer + 1], k * width,
                             (k + 1) * width)
            elements.append(Element(polar, i * n_angles + j, layer))
    layer_list = list(zip(bounds[:-1], np.diff(bounds)))
    return Mesh(nodes, elements, rho=rho, layers=layer_list,
                n_sectors=n_sectors, h=h)


def build_rectangle_mesh(lower, upper, nx, ny=None):
    """Structured mesh of the rectangle ``[lower, upper]`` by affine squares.

    Node ``(i, j)`` of the ``(2 nx + 1) x (2 ny + 1)`` lattice has id
    ``j * (2 nx + 1) + i``.

    Examples
    --------
    >>> mesh = build_rectangle_mesh([0., 0.], [1., 1.], 2)
    >>> mesh.n_elements, mesh.n_nodes
    (4, 25)
    """
    ny = nx if ny is None else ny
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if nx < 1 or ny < 1 or np.any(upper <= lower):
        raise ValueError("Need nx, ny >= 1 and upper > lower, got {}, {}, "
                         "{}, {}.".format(lower, upper, nx, ny))
    xs = np.linspace(lower[0], upper[0], 2 * nx + 1)
    ys = np.linspace(lower[1], upper[1], 2 * ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    offsets = REFERENCE_NODES.astype(int) + 1
    elements = []
    for ey in range(ny):
        for ex in range(nx):
            ids = ((2 * ey + offsets[:, 1]) * (2 * nx + 1)
                   + 2 * ex + offsets[:, 0])
            corners = nodes[ids[:4]]
            elements.append(Element(BilinearMap(corners), ids))
    return Mesh(nodes, elements)


class MeshQualityReport:
    """Regularity measures of a mesh.

    Attributes
    ----------
    elements : DataFrame
        One row per element with the four edge lengths ``edge0`` ..
        ``edge3``, ``h_T``, ``edge_ratio``, the components of ``l1`` and
        ``l2`` and ``ratio = |l1 ^ l2| / h_T ** 2``.

    c_min : float

    m1_pass, m2_pass : bool
        Outcome of the quasi-uniformity and minimum angle checks.

    max_edge_ratio, h_ratio, min_ratio : float
        Largest edge ratio inside an element, ``max h_T / min h_T`` and the
        smallest angle ratio.
    """
    max_allowed_ratio = 4.

    def __init__(self, elements, c_min):
        self.elements = elements
        self.c_min = c_min
        self.max_edge_ratio = float(elements.edge_ratio.max())
        self.h_ratio = float(elements.h_T.max() / elements.h_T.min())
        self.min_ratio = float(elements.ratio.min())
        self.m1_pass = bool(self.max_edge_ratio <= self.max_allowed_ratio
                            and self.h_ratio <= self.max_allowed_ratio)
        self.m2_pass = bool(self.min_ratio >= c_min)

    @property
    def passed(self):
        return self.m1_pass and self.m2_pass

    def summary(self):
        """Global measures as a Series."""
        return pd.Series({
            'n_elements': len(self.elements),
            'min_h_T': self.elements.h_T.min(),
            'max_h_T': self.elements.h_T.max(),
            'max_edge_ratio': self.max_edge_ratio,
            'h_ratio': self.h_ratio,
            'min_ratio': self.min_ratio,
            'max_ratio': self.elements.ratio.max(),
            'm1_pass': self.m1_pass,
            'm2_pass': self.m2_pass})

    def warn(self):
        """Emit a MeshQualityWarning for every failed check."""
        if not self.m1_pass:
            warnings.warn(
                "Mesh is not quasi-uniform: edge ratio {:.3g}, h_T ratio "
                "{:.3g} (limit {}).".format(self.max_edge_ratio, self.h_ratio,
                                            self.max_allowed_ratio),
                MeshQualityWarning)
        if not self.m2_pass:
            warnings.warn(
                "Minimum angle condition fails: min ratio {:.3g} < {}."
                .format(self.min_ratio, self.c_min), MeshQualityWarning)


def check_regularity(mesh, c_min=1.):
    """Quasi-uniformity and minimum angle measures of every element.

    Parameters
    ----------
    mesh : Mesh

    c_min : float, default=1.
        Lower bound for ``|l1 ^ l2| / h_T ** 2``.

    Returns
    -------
    report : MeshQualityReport
    """
    a = mesh.nodes[mesh.element_nodes]
    l1 = (a[:, 1] - a[:, 0]) + (a[:, 2] - a[:, 3]) + 8 * (a[:, 5] - a[:, 7])
    l2 = (a[:, 3] - a[:, 0]) + (a[:, 2] - a[:, 1]) + 8 * (a[:, 6] - a[:, 4])
    wedge = np.abs(l1[:, 0] * l2[:, 1] - l1[:, 1] * l2[:, 0])
    lengths = mesh._edge_lengths
    with np.errstate(divide='ignore'):
        edge_ratio = lengths.max(axis=1) / lengths.min(axis=1)
    elements = pd.DataFrame(lengths, columns=['edge0', 'edge1', 'edge2',
                                              'edge3'])
    elements['h_T'] = mesh.h_T
    elements['edge_ratio'] = edge_ratio
    elements['l1_x'], elements['l1_y'] = l1[:, 0], l1[:, 1]
    elements['l2_x'], elements['l2_y'] = l2[:, 0], l2[:, 1]
    elements['ratio'] = wedge / mesh.h_T ** 2
    return MeshQualityReport(elements, c_min)


def check_conformity(mesh):
    """Raise NonConformingMeshError unless elements share edges by node ids.

    Every edge must be shared by at most two elements, elements sharing the
    vertices of an edge must share its midpoint, and two boundary edges may
    not coincide geometrically.
    """
    owners = {}
    for e, nodes in enumerate(mesh.element_nodes):
        for local in EDGE_NODES:
            ends = frozenset((nodes[local[0]], nodes[local[2]]))
            owners.setdefault(ends, []).append(nodes[local[1]])
    single = []
    for ends, mids in owners.items():
        if len(mids) > 2:
            raise NonConformingMeshError(
                "Edge {} is shared by {} elements.".format(sorted(ends),
                                                           len(mids)))
        if len(mids) == 2 and mids[0] != mids[1]:
            raise NonConformingMeshError(
                "Elements sharing edge {} use different midpoints {}.".format(
                    sorted(ends), mids))
        if len(mids) == 1:
            single.append(mids[0])
    if not single:
        return
    mid = mesh.nodes[single]
    scale = max(1., np.abs(mesh.nodes).max())
    keys = np.round(mid / (1e-9 * scale)).astype(np.int64)
    _, counts = np.unique(keys, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise NonConformingMeshError(
            "Boundary edges coincide geometrically: duplicated nodes.")


def save_mesh(mesh, path):
    """Write ``mesh`` in the ``dpq2p1-mesh v1`` text format."""
    lines = ["dpq2p1-mesh v1 rho={!r} layers={} N={}".format(
        mesh.rho, 0 if mesh.layers is None else len(mesh.layers),
        mesh.n_sectors)]
    for i, (x, y) in enumerate(mesh.nodes):
        lines.append("n {} {:.17g} {:.17g}".format(i, x, y))
    for i, element in enumerate(mesh.elements):
        params = " ".join("{:.17g}".format(v)
                          for v in element.map.parameters())
        lines.append("e {} {} {} {}".format(
            i, " ".join(str(n) for n in element.node_ids), element.map.kind,
            params))
    with open(path, 'w') as f:
        f.write("\n".join(lines) + "\n")


_MAPS = {'polar': lambda v: PolarMap(*v),
         'bilinear': lambda v: BilinearMap(np.reshape(v, (4, 2))),
         'biquadratic': lambda v: BiquadraticMap(np.reshape(v, (9, 2)))}


def load_mesh(path):
    """Read a mesh written by ``save_mesh``."""
    with open(path) as f:
        header = f.readline().split()
        if header[:2] != ['dpq2p1-mesh', 'v1']:
            raise ValueError("Not a dpq2p1-mesh v1 file: {}".format(path))
        meta = dict(item.split('=') for item in header[2:])
        nodes, elements = [], []
        for line in f:
            fields = line.split()
            if not fields:
                continue
            if fields[0] == 'n':
                nodes.append((float(fields[2]), float(fields[3])))
            elif fields[0] == 'e':
                node_ids = [int(v) for v in fields[2:11]]
                values = [float(v) for v in fields[12:]]
                elements.append((_MAPS[fields[11]](values), node_ids))
    rho = None if meta['rho'] == 'None' else float(meta['rho'])
    n_sectors = None if meta['N'] == 'None' else int(meta['N'])
    layers = None
    if rho is not None and all(m.kind == 'polar' for m, _ in elements):
        radii = sorted({(m.R0, m.R1) for m, _ in elements})
        layers = [(r0, r1 - r0) for r0, r1 in radii]
        index = {r0: i for i, (r0, _) in enumerate(radii)}
        elements = [Element(m, ids, index[m.R0]) for m, ids in elements]
    return Mesh.from_elements(nodes, elements, rho=rho, layers=layers,
                              n_sectors=n_sectors)
