"""Command line driver: ``dpq2p1 {mesh,solve,convergence,infsup}``.

Every subcommand reads a TOML run configuration and writes its outputs to
the output directory. CSV outputs start with ``#`` lines holding the
resolved configuration.
"""
import argparse
import os
import sys

from . import __version__
from .assembly import save_solution
from .config import RunConfig
from .exceptions import (Dpq2p1Error, ConfigError, NonPositiveRadiusError,
                         LayerSumMismatchError, DegenerateSectorError)
from .mesh import check_regularity, check_conformity, save_mesh
from .newton import continuation_solve
from .verify.analytic import AnalyticCavitation, compare_tractions
from .verify.errors import error_norms
from .verify.infsup import infsup_sweep
from .verify.study import convergence_study

__all__ = ['main', 'cmd_mesh', 'cmd_solve', 'cmd_convergence', 'cmd_infsup']

# bad input rather than a failed computation
_INPUT_ERRORS = (ConfigError, NonPositiveRadiusError, LayerSumMismatchError,
                 DegenerateSectorError)


def _header(config, command):
    return ["dpq2p1 {} {}".format(__version__, command)] + config.to_lines()


def _output_dir(config):
    directory = config.output['directory']
    os.makedirs(directory, exist_ok=True)
    return directory


def _write_csv(frame, path, header_lines):
    with open(path, 'w') as f:
        for line in header_lines:
            f.write("# {}\n".format(line))
        frame.to_csv(f, index=False, float_format='%.10g')
    return path


def cmd_mesh(config):
    """Write the mesh dump and its per-element quality measures."""
    directory = _output_dir(config)
    mesh = config.build_mesh()
    check_conformity(mesh)
    report = check_regularity(mesh)
    report.warn()
    paths = [os.path.join(directory, 'mesh.txt')]
    save_mesh(mesh, paths[0])
    paths.append(_write_csv(report.elements,
                            os.path.join(directory, 'mesh_quality.csv'),
                            _header(config, 'mesh')))
    print(report.summary().to_string())
    return paths


def cmd_solve(config):
    """Solve by load continuation; write the state and the Newton trace.

    Radial loads resolved from ``lam`` are also measured against the exact
    solution in ``errors.csv``, and ``tractions.csv`` sets the oracle loads
    of the material next to the published ones.
    """
    directory = _output_dir(config)
    params = config.build_params()
    mesh = config.build_mesh()
    traction = config.build_traction()
    newton = config.build_newton()
    state, trace = continuation_solve(
        mesh, traction, steps=config.continuation['steps'], config=newton,
        lam0=config.continuation['lam0'], params=params,
        verbose=newton.verbose)
    header = _header(config, 'solve')
    paths = [os.path.join(directory, 'mesh.txt'),
             os.path.join(directory, 'solution.txt')]
    save_mesh(mesh, paths[0])
    save_solution(state, paths[1])
    paths.append(_write_csv(trace, os.path.join(directory, 'trace.csv'),
                            header))
    print("converged after {} Newton iterations in {} load steps".format(
        len(trace), config.continuation['steps']))
    if traction.kind == 'radial' and config.traction['t'] == 'auto':
        oracle = AnalyticCavitation(config.rho, config.traction['lam'],
                                    params)
        report = error_norms(state, oracle)
        paths.append(_write_csv(report.as_series().to_frame().T,
                                os.path.join(directory, 'errors.csv'),
                                header))
        paths.append(_write_csv(compare_tractions(params),
                                os.path.join(directory, 'tractions.csv'),
                                header))
        print(report)
    return paths


def cmd_convergence(config):
    """Convergence table over ``study.meshes`` plus per-figure data."""
    directory = _output_dir(config)
    meshes = config.build_study_meshes()
    if len(meshes) < 3:
        raise ConfigError("study.meshes needs at least three meshes")
    lam = config.study['lam']
    if lam is None:
        lam = config.traction['lam']
    kind = config.traction['kind']
    reference = config.build_reference_mesh()
    if kind == 'modulated' and reference is None:
        raise ConfigError("study.reference is required for modulated loads")
    newton = config.build_newton()
    table = convergence_study(
        meshes, lam=lam, kind=kind, eta=config.traction['eta'],
        params=config.build_params(), newton=newton,
        steps=config.continuation['steps'],
        lam0=config.continuation['lam0'], reference=reference,
        n_jobs=config.n_jobs, verbose=newton.verbose)
    header = _header(config, 'convergence')
    path = os.path.join(directory, 'convergence.csv')
    table.to_csv(path, header)
    print(table.rows.to_string())
    return [path] + table.write_figures(directory, header)


def cmd_infsup(config):
    """Inf-sup constants of ``study.meshes``, or of the single mesh."""
    directory = _output_dir(config)
    meshes = config.build_study_meshes() or [config.build_mesh()]
    lam = config.study['lam']
    sweep = infsup_sweep(meshes, lam=1. if lam is None else lam,
                         params=config.build_params(),
                         verbose=config.newton['verbose'])
    print(sweep.to_string())
    return [_write_csv(sweep, os.path.join(directory, 'infsup.csv'),
                       _header(config, 'infsup'))]


COMMANDS = {'mesh': cmd_mesh, 'solve': cmd_solve,
            'convergence': cmd_convergence, 'infsup': cmd_infsup}


def get_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True,
                        help='TOML run configuration')
    common.add_argument('--out', default=None,
                        help='output directory, overrides [output]')
    common.add_argument('--jobs', type=int, default=None,
                        help='parallel solves of a study')
    common.add_argument('--quadrature', type=int, default=None,
                        help='Gauss points per direction')
    common.add_argument('--pin-rotation', action='store_true',
                        help='remove the infinitesimal rotation')
    parser = argparse.ArgumentParser(
        prog='dpq2p1', description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[common],
                              help=command.__doc__.splitlines()[0])
    return parser


def main(argv=None):
    """Run the driver, returning the process exit code.

    0 on success, 2 for configuration errors and invalid mesh parameters,
    1 for any other library error. Errors are reported as
    ``ERROR <code> <detail>`` on stderr.
    """
    args = get_parser().parse_args(argv)
    try:
        config = RunConfig.from_file(args.config).override(
            out=args.out, jobs=args.jobs, quadrature=args.quadrature,
            pin_rotation=args.pin_rotation)
        paths = COMMANDS[args.command](config)
    except Dpq2p1Error as e:
        print("ERROR {} {}".format(e.code, e), file=sys.stderr)
        return 2 if isinstance(e, _INPUT_ERRORS) else 1
    for path in paths:
        print("wrote {}".format(path))
    return 0


if __name__ == '__main__':
    sys.exit(main())
