"""Run configurations read from TOML files."""
import numbers

try:
    import tomllib
except ImportError:
    # python < 3.11
    import tomli as tomllib

from .assembly import TractionSpec
from .datasets import table1_layers, geometric_layers, graded_layers
from .exceptions import ConfigError
from .material import MaterialParams
from .mesh import build_annulus_mesh
from .newton import DampedNewton

__all__ = ['RunConfig', 'load_config']

_DEFAULTS = {
    'material': {'mu': 1., 's': 1.5},
    'geometry': {},
    'traction': {'kind': 'radial', 't': 'auto', 'lam': 2., 'eta': .1},
    'newton': DampedNewton().get_params(),
    'continuation': {'steps': 8, 'lam0': 1.2},
    'study': {'meshes': [], 'lam': None, 'reference': None},
    'output': {'directory': 'out'},
}

_GEOMETRY_KEYS = {'rho', 'N', 'layers', 'table1_h', 'gamma', 'n_layers',
                  'min_tau', 'max_tau'}


def _is_number(value):
    return (isinstance(value, numbers.Real)
            and not isinstance(value, bool))


def _number(section, key, value):
    if not _is_number(value):
        raise ConfigError("{}.{} should be a number, got {!r}".format(
            section, key, value))
    return value


def _layers_from_list(rho, thicknesses):
    layers = []
    start = rho
    for tau in thicknesses:
        layers.append((start, tau))
        start += tau
    return layers


class RunConfig:
    """Fully resolved run configuration.

    Parameters
    ----------
    sections : dict
        Parsed TOML document. Missing keys take their defaults; unknown
        sections or keys raise ``ConfigError``.

    Attributes
    ----------
    material, geometry, traction, newton, continuation, study, output : dict
        Resolved sections.

    seed : int
        Reserved, the solvers are deterministic.

    n_jobs : int or None
        Parallel solves of a study, only set from the command line.

    Examples
    --------
    >>> config = RunConfig({'material': {'s': 1.8}, 'geometry': {'rho': 0.1}})
    >>> config.material
    {'mu': 1.0, 's': 1.8}
    >>> RunConfig({'material': {'s': 2.5}})
    Traceback (most recent call last):
    ...
    dpq2p1.exceptions.ConfigError: s out of (1,2)
    """
    def __init__(self, sections=None):
        sections = dict(sections or {})
        self.seed = sections.pop('seed', 0)
        self.n_jobs = None
        unknown = set(sections) - set(_DEFAULTS)
        if unknown:
            raise ConfigError("unknown section(s) {}".format(
                ", ".join(sorted(unknown))))
        for name, defaults in _DEFAULTS.items():
            values = sections.get(name, {})
            if not isinstance(values, dict):
                raise ConfigError("[{}] should be a table".format(name))
            allowed = _GEOMETRY_KEYS if name == 'geometry' else set(defaults)
            unknown = set(values) - allowed
            if unknown:
                raise ConfigError("unknown key(s) {} in [{}]".format(
                    ", ".join(sorted(unknown)), name))
            resolved = dict(defaults)
            resolved.update(values)
            setattr(self, name, resolved)
        self._check()

    @classmethod
    def from_file(cls, path):
        """Parse the TOML file at ``path``."""
        try:
            with open(path, 'rb') as f:
                sections = tomllib.load(f)
        except OSError as e:
            raise ConfigError("cannot read {}: {}".format(path, e.strerror))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError("malformed TOML in {}: {}".format(path, e))
        return cls(sections)

    def _check(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed should be an integer")
        mu = _number('material', 'mu', self.material['mu'])
        s = _number('material', 's', self.material['s'])
        if not mu > 0:
            raise ConfigError("mu out of (0,inf)")
        if not 1 < s < 2:
            raise ConfigError("s out of (1,2)")
        self.material = {'mu': float(mu), 's': float(s)}

        geometry = self.geometry
        if 'rho' in geometry:
            rho = _number('geometry', 'rho', geometry['rho'])
            if not 0 < rho < 1:
                raise ConfigError("rho out of (0,1)")
        if set(geometry) - {'rho'}:
            self._check_geometry(geometry, 'geometry')

        traction = self.traction
        if traction['kind'] not in ('radial', 'modulated'):
            raise ConfigError("traction.kind should be 'radial' or "
                              "'modulated', got {!r}".format(traction['kind']))
        if traction['t'] != 'auto':
            _number('traction', 't', traction['t'])
        if not _number('traction', 'lam', traction['lam']) >= 1:
            raise ConfigError("lam out of [1,inf)")
        _number('traction', 'eta', traction['eta'])

        try:
            DampedNewton(**self.newton)._check_params()
        except (TypeError, ValueError) as e:
            raise ConfigError("[newton] {}".format(e))
        quadrature = self.newton['quadrature']
        if not (isinstance(quadrature, int) and 1 <= quadrature <= 10):
            raise ConfigError("quadrature out of 1..10")

        steps = self.continuation['steps']
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
            raise ConfigError("continuation.steps should be a positive "
                              "integer")
        if not _number('continuation', 'lam0', self.continuation['lam0']) >= 1:
            raise ConfigError("lam0 out of [1,inf)")

        study = self.study
        if not isinstance(study['meshes'], list):
            raise ConfigError("study.meshes should be a list")
        for entry in study['meshes']:
            self._check_mesh_entry(entry)
        if study['reference'] is not None:
            self._check_mesh_entry(study['reference'])
        if study['lam'] is not None:
            if not _number('study', 'lam', study['lam']) >= 1:
                raise ConfigError("study.lam out of [1,inf)")
        if not isinstance(self.output['directory'], str):
            raise ConfigError("output.directory should be a string")

    def _check_geometry(self, table, where):
        given = [key for key in ('layers', 'table1_h', 'n_layers')
                 if key in table]
        if len(given) != 1:
            raise ConfigError(
                "{} needs exactly one of layers, table1_h or n_layers"
                .format(where))
        if 'gamma' in table and 'n_layers' not in table:
            raise ConfigError("{}.gamma needs n_layers".format(where))
        graded = {'min_tau', 'max_tau'} & set(table)
        if graded and (len(graded) != 2 or 'n_layers' not in table
                       or 'gamma' in table):
            raise ConfigError("{}.min_tau and max_tau go together with "
                              "n_layers and without gamma".format(where))
        for key in sorted(graded):
            _number(where, key, table[key])
        if 'table1_h' not in table and 'N' not in table:
            raise ConfigError("{}.N is required".format(where))
        if 'N' in table and not isinstance(table['N'], int):
            raise ConfigError("{}.N should be an integer".format(where))
        if 'layers' in table:
            if not (isinstance(table['layers'], list)
                    and all(_is_number(v) for v in table['layers'])):
                raise ConfigError("{}.layers should be a list of "
                                  "thicknesses".format(where))

    def _check_mesh_entry(self, entry):
        if 'rho' not in self.geometry:
            raise ConfigError("study meshes need geometry.rho")
        if _is_number(entry):
            return
        if not isinstance(entry, dict):
            raise ConfigError("study mesh entries should be a table1 h or a "
                              "geometry table, got {!r}".format(entry))
        unknown = set(entry) - (_GEOMETRY_KEYS - {'rho'})
        if unknown:
            raise ConfigError("unknown key(s) {} in study mesh".format(
                ", ".join(sorted(unknown))))
        self._check_geometry(entry, 'study mesh')

    @property
    def rho(self):
        if 'rho' not in self.geometry:
            raise ConfigError("geometry.rho is required")
        return float(self.geometry['rho'])

    def override(self, out=None, jobs=None, quadrature=None,
                 pin_rotation=False):
        """Apply command line flags, then check the result again."""
        if out is not None:
            self.output['directory'] = out
        if jobs is not None:
            self.n_jobs = jobs
        if quadrature is not None:
            self.newton['quadrature'] = quadrature
        if pin_rotation:
            self.newton['pin_rotation'] = True
        self._check()
        return self

    def build_params(self):
        return MaterialParams(**self.material)

    def _build_mesh(self, table):
        rho = self.rho
        h = None
        if 'table1_h' in table:
            h = float(table['table1_h'])
            try:
                layers, n_sectors = table1_layers(rho, h)
            except ValueError as e:
                raise ConfigError(str(e))
            n_sectors = table.get('N', n_sectors)
        elif 'layers' in table:
            layers = _layers_from_list(rho, table['layers'])
            n_sectors = table['N']
        elif 'min_tau' in table:
            try:
                layers = graded_layers(rho, table['n_layers'],
                                       table['min_tau'], table['max_tau'])
            except ValueError as e:
                raise ConfigError(str(e))
            n_sectors = table['N']
        else:
            layers = geometric_layers(rho, table['n_layers'],
                                      table.get('gamma', 1.))
            n_sectors = table['N']
        return build_annulus_mesh(rho, layers, n_sectors, h=h)

    def build_mesh(self):
        """Annulus mesh of the ``[geometry]`` section."""
        if not set(self.geometry) - {'rho'}:
            raise ConfigError("[geometry] needs rho, N and a layer spec")
        return self._build_mesh(self.geometry)

    def build_study_meshes(self):
        """Meshes of ``study.meshes``, coarsest first as listed."""
        return [self._study_mesh(entry) for entry in self.study['meshes']]

    def build_reference_mesh(self):
        entry = self.study['reference']
        return None if entry is None else self._study_mesh(entry)

    def _study_mesh(self, entry):
        if _is_number(entry):
            return self._build_mesh({'table1_h': entry})
        return self._build_mesh(entry)

    def resolved_traction(self):
        """Load magnitude, ``'auto'`` resolved from ``rho`` and ``lam``."""
        from .verify.analytic import traction_for

        t = self.traction['t']
        if t == 'auto':
            t = traction_for(self.rho, self.traction['lam'],
                             self.build_params())
        return float(t)

    def build_traction(self):
        return TractionSpec(self.traction['kind'], self.resolved_traction(),
                            float(self.traction['eta']))

    def build_newton(self):
        return DampedNewton(**self.newton)

    def to_lines(self):
        """The resolved configuration as ``key = value`` lines."""
        lines = ["seed = {!r}".format(self.seed)]
        for name in _DEFAULTS:
            section = getattr(self, name)
            for key in sorted(section):
                lines.append("{}.{} = {!r}".format(name, key, section[key]))
        return lines

    def __repr__(self):
        return "RunConfig({})".format(self.output['directory'])


def load_config(path):
    """Read a ``RunConfig`` from a TOML file."""
    return RunConfig.from_file(path)
