"""
Timing the assembly of the Newton system on the published mesh families
=======================================================================

Assembles the saddle-point system at the interpolant of the analytic
cavitation map on every mesh of the chosen family and prints the number of
deformation dofs with the assembly and solve times.
"""
from time import time
import argparse

from dpq2p1 import build_annulus_mesh, assemble_system, DiscreteState
from dpq2p1.datasets import load_table1, table1_layers
from dpq2p1.newton import linear_solve
from dpq2p1.verify import AnalyticCavitation, traction_for
from dpq2p1.assembly import TractionSpec


parser = argparse.ArgumentParser()
parser.add_argument('--rho', type=float, default=.01,
                    help='defect radius of the mesh family')
parser.add_argument('--lam', type=float, default=2.,
                    help='cavity parameter of the analytic state')
parser.add_argument('--quadrature', type=int, default=3,
                    help='Gauss points per direction')
args = parser.parse_args()

table = load_table1()
oracle = AnalyticCavitation(args.rho, args.lam)
traction = TractionSpec('radial', traction_for(args.rho, args.lam))

print("{:>6} {:>8} {:>12} {:>12}".format("h", "N_d", "assembly", "solve"))
for h in sorted(table[table.rho == args.rho].h, reverse=True):
    layers, n_sectors = table1_layers(args.rho, h)
    mesh = build_annulus_mesh(args.rho, layers, n_sectors, h=h)
    state = DiscreteState.interpolate(mesh, oracle.deformation,
                                      oracle.pressure_field,
                                      quadrature=args.quadrature)
    tick = time()
    system = assemble_system(state, traction)
    assembly = time() - tick
    tick = time()
    linear_solve(system)
    solve = time() - tick
    print("{:6.2f} {:8d} {:10.3f} s {:10.3f} s".format(
        h, 2 * mesh.n_nodes, assembly, solve))
