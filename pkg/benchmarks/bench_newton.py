"""
Damped Newton with load continuation on a single published mesh
================================================================

Runs the continuation solve and prints the wall time, the number of Newton
iterations per load step and the errors against the analytic solution.
Use ``--jobs`` with ``--convergence`` to time the parallel study instead.
"""
from time import time
import argparse

from dpq2p1 import build_annulus_mesh, continuation_solve
from dpq2p1.assembly import TractionSpec
from dpq2p1.datasets import table1_layers
from dpq2p1.verify import (AnalyticCavitation, convergence_study, error_norms,
                           traction_for)


parser = argparse.ArgumentParser()
parser.add_argument('--rho', type=float, default=.01)
parser.add_argument('--h', type=float, default=.05)
parser.add_argument('--lam', type=float, default=2.)
parser.add_argument('--steps', type=int, default=8)
parser.add_argument('--convergence', action="store_true", default=False,
                    help='time the study on the three coarsest meshes')
parser.add_argument('--jobs', type=int, default=None)
args = parser.parse_args()

layers, n_sectors = table1_layers(args.rho, args.h)
mesh = build_annulus_mesh(args.rho, layers, n_sectors, h=args.h)

if args.convergence:
    meshes = [mesh]
    for h in [round(args.h - .01, 2), round(args.h - .02, 2)]:
        layers, n_sectors = table1_layers(args.rho, h)
        meshes.append(build_annulus_mesh(args.rho, layers, n_sectors, h=h))
    print("Start convergence study")
    tick = time()
    table = convergence_study(meshes, lam=args.lam, steps=args.steps,
                              n_jobs=args.jobs)
    print("Study time", time() - tick)
    print(table.rows)
else:
    oracle = AnalyticCavitation(args.rho, args.lam)
    traction = TractionSpec('radial', traction_for(args.rho, args.lam))
    print("Start continuation")
    tick = time()
    state, trace = continuation_solve(mesh, traction, steps=args.steps)
    print("Solve time", time() - tick)
    print("Newton iterations per step:")
    print(trace.groupby('step').size().to_string())
    print(error_norms(state, oracle).as_series().to_string())
