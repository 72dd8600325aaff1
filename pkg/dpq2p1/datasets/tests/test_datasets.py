import pytest
import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from dpq2p1.datasets import (load_table1, load_published_tractions,
                             graded_layers, table1_layers, geometric_layers,
                             data_path)
from dpq2p1.exceptions import NonPositiveRadiusError


def test_loading():
    # smoke test
    table = load_table1()
    assert table.shape == (8, 6)
    assert set(table.rho) == {.01, .0001}
    tractions = load_published_tractions()
    assert tractions.shape == (3, 3)
    assert (tractions.lam == 2.).all()

    pd.read_csv(data_path("table1.csv"))


@pytest.mark.parametrize("row", range(8))
def test_table1_layers(row):
    entry = load_table1().iloc[row]
    layers, n_sectors = table1_layers(entry.rho, entry.h)
    assert n_sectors == entry.N
    assert len(layers) == entry.layers
    radii, tau = np.array(layers).T
    assert_allclose(radii[0], entry.rho)
    assert_allclose(radii[1:], radii[:-1] + tau[:-1])
    assert_allclose(radii[-1] + tau[-1], 1., rtol=1e-12)
    assert_allclose(tau[0], entry.min_tau)
    assert np.all(np.diff(tau[:-1]) > 0)


def test_table1_layers_unknown_row():
    with pytest.raises(ValueError):
        table1_layers(.1, .05)
    with pytest.raises(ValueError):
        table1_layers(.01, .1)


def test_geometric_layers():
    layers = geometric_layers(.2, 4, 2.)
    radii, tau = np.array(layers).T
    assert_allclose(tau[1:] / tau[:-1], 2.)
    assert_allclose(radii[-1] + tau[-1], 1.)
    assert geometric_layers(.5, 2) == [(.5, .25), (.75, .25)]
    with pytest.raises(NonPositiveRadiusError):
        geometric_layers(1., 2)
    with pytest.raises(ValueError):
        geometric_layers(.5, 0)
    with pytest.raises(ValueError):
        geometric_layers(.5, 2, .5)


def test_graded_layers():
    layers = graded_layers(.1, 8, .03, .19)
    radii, tau = np.array(layers).T
    assert_allclose(tau[0], .03)
    assert_allclose(radii[-1] + tau[-1], 1., rtol=1e-12)
    assert np.all(np.diff(tau[:-1]) > 0)
    assert tau[:-1].max() < .19
    with pytest.raises(ValueError, match="cannot fill"):
        graded_layers(.1, 3, .03, .19)
    with pytest.raises(ValueError):
        graded_layers(.1, 8, .19, .03)
    with pytest.raises(ValueError):
        graded_layers(.1, 1, .03, .19)
    with pytest.raises(NonPositiveRadiusError):
        graded_layers(0., 8, .03, .19)
