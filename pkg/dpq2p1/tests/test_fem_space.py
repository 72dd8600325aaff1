import pytest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from dpq2p1.exceptions import UnsupportedOrderError
from dpq2p1.fem_space import (REFERENCE_NODES, EDGE_NODES, gauss_rule,
                              q2_eval, q2_grad, q2_hessian, p1_eval,
                              physical_gradient, physical_hessian,
                              element_geometry, edge_geometry, build_dof_map)
from dpq2p1.mesh import (BilinearMap, PolarMap, Mesh, build_annulus_mesh)


def monomial_integral(a):
    return 0. if a % 2 else 2. / (a + 1)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
def test_gauss_rule_exactness(n):
    rule = gauss_rule(n)
    assert len(rule) == n ** 2
    for a in range(2 * n):
        for b in range(2 * n):
            value = np.sum(rule.weights * rule.points[:, 0] ** a
                           * rule.points[:, 1] ** b)
            expected = monomial_integral(a) * monomial_integral(b)
            assert abs(value - expected) <= 1e-13


def test_gauss_rule_small_orders():
    rule = gauss_rule(2)
    assert_allclose(np.abs(rule.points), 1 / np.sqrt(3))
    assert_allclose(rule.weights, 1.)
    rule = gauss_rule(3)
    value = np.sum(rule.weights * rule.points[:, 0] ** 4
                   * rule.points[:, 1] ** 4)
    assert_allclose(value, .16, rtol=1e-14)


@pytest.mark.parametrize("n", [0, 11, 2.5])
def test_gauss_rule_unsupported(n):
    with pytest.raises(UnsupportedOrderError):
        gauss_rule(n)


def test_q2_lagrange_property():
    assert_allclose(q2_eval(REFERENCE_NODES), np.eye(9), atol=1e-15)
    assert_allclose(q2_eval([-1., -1.]), np.eye(9)[0])


def test_q2_partition_of_unity():
    rng = np.random.RandomState(0)
    xi = rng.uniform(-1, 1, size=(1000, 2))
    assert_allclose(q2_eval(xi).sum(axis=-1), 1., atol=1e-14)
    assert_allclose(q2_grad(xi).sum(axis=-2), 0., atol=1e-13)
    assert_allclose(q2_hessian(xi).sum(axis=-3), 0., atol=1e-12)
    # Q2 reproduces the coordinates
    assert_allclose(q2_eval(xi) @ REFERENCE_NODES, xi, atol=1e-14)


def test_q2_derivatives_match_differences():
    rng = np.random.RandomState(1)
    eps = 1e-6
    for xi in rng.uniform(-1, 1, size=(20, 2)):
        for a in range(2):
            step = np.zeros(2)
            step[a] = eps
            fd = (q2_eval(xi + step) - q2_eval(xi - step)) / (2 * eps)
            assert_allclose(q2_grad(xi)[:, a], fd, atol=1e-8)
            fd = (q2_grad(xi + step) - q2_grad(xi - step)) / (2 * eps)
            assert_allclose(q2_hessian(xi)[:, :, a], fd, atol=1e-8)


def test_p1_eval():
    assert_allclose(p1_eval([[.5, -.25]]), [[1., .5, -.25]])


def test_physical_gradient_affine_square():
    h = .3
    square = BilinearMap([[0, 0], [h, 0], [h, h], [0, h]])
    xi = np.array([[.2, -.7], [0., 0.]])
    assert_allclose(physical_gradient(square, xi), 2 / h * q2_grad(xi),
                    rtol=1e-14)


def test_physical_gradient_polar_differences():
    # derivative of a random Q2 function along the map, chain rule in x
    rng = np.random.RandomState(2)
    polar = PolarMap(.3, .7, .2, 1.)
    values = rng.randn(9)
    eps = 1e-6
    for xi in rng.uniform(-.9, .9, size=(10, 2)):
        grad = values @ physical_gradient(polar, xi)
        jac, _ = polar.jacobian(xi)
        for a in range(2):
            step = np.zeros(2)
            step[a] = eps
            fd = (values @ q2_eval(xi + step)
                  - values @ q2_eval(xi - step)) / (2 * eps)
            assert_allclose(grad @ jac[:, a], fd, rtol=1e-6, atol=1e-9)


def test_physical_hessian_polar_differences():
    rng = np.random.RandomState(3)
    polar = PolarMap(.3, .7, .2, 1.)
    eps = 1e-6
    for xi in rng.uniform(-.9, .9, size=(10, 2)):
        hess = physical_hessian(polar, xi)
        jac, _ = polar.jacobian(xi)
        for a in range(2):
            step = np.zeros(2)
            step[a] = eps
            fd = (physical_gradient(polar, xi + step)
                  - physical_gradient(polar, xi - step)) / (2 * eps)
            assert_allclose(np.einsum('kij,j->ki', hess, jac[:, a]), fd,
                            rtol=1e-5, atol=1e-6)


def test_physical_hessian_vanishes_on_linear_fields():
    square = BilinearMap([[0, 0], [1, .1], [1.2, 1], [.1, .9]])
    nodes = square(REFERENCE_NODES)
    M = np.array([[2., -1.], [.5, 3.]])
    u = nodes @ M.T
    xi = gauss_rule(3).points
    hess = np.einsum('kc,qkij->qcij', u, physical_hessian(square, xi))
    assert_allclose(hess, 0, atol=1e-11)


def test_element_geometry_annulus_area():
    mesh = build_annulus_mesh(.5, [(.5, .5)], 4)
    geom = element_geometry(mesh, 3)
    assert_allclose(geom.JxW.sum(), np.pi * (1 - .25), rtol=1e-12)
    assert element_geometry(mesh, 3) is geom
    assert not geom.JxW.flags.writeable
    assert geom.dN.shape == (4, 9, 9, 2)


def test_element_geometry_interpolates_identity():
    square = BilinearMap([[0, 0], [1, .1], [1.2, 1], [.1, .9]])
    mesh = Mesh.from_elements(square(REFERENCE_NODES), [(square, range(9))])
    geom = element_geometry(mesh, 3)
    grad = np.einsum('kc,eqkj->eqcj', mesh.nodes, geom.dN)
    assert_allclose(grad, np.broadcast_to(np.eye(2), grad.shape), atol=1e-12)


def test_edge_geometry_annulus():
    rho = .4
    mesh = build_annulus_mesh(rho, [(rho, .3), (.7, .3)], 8)
    outer = edge_geometry(mesh, 3, 'outer')
    inner = edge_geometry(mesh, 3, 'inner')
    assert len(outer) == len(inner) == 8
    assert_array_equal(outer.local_edges, 1)
    assert_array_equal(inner.local_edges, 3)
    assert_allclose(outer.ds.sum(), 2 * np.pi, rtol=1e-12)
    assert_allclose(inner.ds.sum(), 2 * np.pi * rho, rtol=1e-12)
    radial = outer.x / np.linalg.norm(outer.x, axis=-1, keepdims=True)
    assert_allclose(outer.normal, radial, atol=1e-14)
    radial = inner.x / np.linalg.norm(inner.x, axis=-1, keepdims=True)
    assert_allclose(inner.normal, -radial, atol=1e-14)


def test_dof_map_counts():
    mesh = build_annulus_mesh(.5, [(.5, .25), (.75, .25)], 4)
    dof_map = build_dof_map(mesh)
    assert dof_map.n_u == 2 * (2 * 2 + 1) * 2 * 4
    assert dof_map.n_p == 3 * 8
    assert dof_map.n_constraints == 2
    assert dof_map.n_total == dof_map.n_u + dof_map.n_p + 2
    assert build_dof_map(mesh, pin_rotation=True).n_constraints == 3


def test_dof_map_shared_edges():
    mesh = build_annulus_mesh(.5, [(.5, .5)], 4)
    dofs = build_dof_map(mesh).element_u_dofs
    for e in range(4):
        right = (e + 1) % 4
        # edge 2 of element e is edge 0 of its anticlockwise neighbour
        shared = dofs[e].reshape(9, 2)[EDGE_NODES[2]]
        assert_array_equal(shared, dofs[right].reshape(9, 2)[
            EDGE_NODES[0][::-1]])
    # every global dof recovers its node and component
    node, comp = np.divmod(dofs.reshape(-1, 9, 2), 2)
    assert_array_equal(node[:, :, 0], mesh.element_nodes)
    assert_array_equal(comp[:, :, 1], 1)


def test_dof_map_dirichlet():
    square = BilinearMap([[0, 0], [1, 0], [1, 1], [0, 1]])
    mesh = Mesh.from_elements(square(REFERENCE_NODES), [(square, range(9))])
    dof_map = build_dof_map(mesh, boundary='dirichlet', fixed_nodes=range(9))
    assert dof_map.n_free == 0
    assert dof_map.n_constraints == 0
    with pytest.raises(ValueError):
        build_dof_map(mesh, boundary='dirichlet')
    with pytest.raises(ValueError):
        build_dof_map(mesh, boundary='dirichlet', fixed_nodes=[0],
                      pin_rotation=True)
