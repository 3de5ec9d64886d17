'''
Run configuration files
=======================

INI files read with `configparser`::

    [general]
    version = 1
    seed = 0

    [experiment]
    preset = strip
    volume_factor = 1.05

    [optimizer]
    max_iterations = 200

Every section and key is declared in `SCHEMA` with its parser and
default; anything else is rejected with `ConfigError`, as are
physically inconsistent values. Keys left out keep the default, or
the value of the `[experiment]` preset.
'''
import logging
import math

import configparser

from nrepshell.bench import ExperimentSpec
from nrepshell.bench import presets
from nrepshell.exceptions import ConfigError
from nrepshell.exceptions import ModelError
from nrepshell.exceptions import NetworkError
from nrepshell.nrep import ACTIVATIONS
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import TrainingConfig
from nrepshell.shell import SUPPORT_KINDS

log = logging.getLogger(__name__)

VERSIONS = ('1', )


def _bool(value):
    value = value.strip().lower()
    if value in ('1', 'yes', 'true', 'on'):
        return True
    if value in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError('not a boolean: %r' % value)


def _floats(value):
    return tuple(float(x) for x in value.replace(',', ' ').split())


def _ints(value):
    return tuple(int(x) for x in value.replace(',', ' ').split())


def _words(value):
    return tuple(x.strip() for x in value.split(',') if x.strip())


def _rects(value):
    # "0.4 0.4 0.6 0.6; 0.1 0.1 0.2 0.2"
    if value.strip().lower() == 'none':
        return None
    return tuple(_floats(x) for x in value.split(';') if x.strip())


def _holes(value):
    return tuple(_ints(x) for x in value.split(';') if x.strip())


def _optional(parser):
    def parse(value):
        if value.strip().lower() in ('', 'none'):
            return None
        return parser(value)
    return parse


# section -> key -> (parser, default); default None = not set
SCHEMA = {'general': {'version': (str, None),
                      'seed': (int, 0),
                      'deterministic': (_bool, False),
                      'threads': (int, 1)},
          'experiment': {'preset': (str, None),
                         'name': (str, None),
                         'nx': (int, None),
                         'ny': (int, None),
                         'holes': (_holes, None),
                         'extents': (_floats, None),
                         'thickness': (float, None),
                         'youngs_modulus': (float, None),
                         'poisson': (float, None),
                         'load': (float, None),
                         'load_regions': (_rects, None),
                         'load_direction': (_floats, None),
                         'supports': (str, None),
                         'volume_factor': (float, None),
                         'initial_rise': (float, None),
                         'rise_shape': (str, None),
                         'reference': (_optional(str), None),
                         'fit_tolerance': (float, None),
                         'initial_compliance': (float, None)},
          'network': {'layers': (_ints, None),
                      'activations': (_words, None),
                      'omega': (float, 1.0),
                      'delta': (float, math.pi / 4)},
          'training': {'epochs': (int, None),
                       'learning_rate': (float, None),
                       'polish': (_bool, None),
                       'report_every': (int, 100)},
          'optimizer': {'max_iterations': (int, None),
                        'rel_tol': (float, None),
                        'kkt_tol': (float, None),
                        'move': (float, None),
                        'patience': (int, None)},
          'fit': {'nx': (int, 64),
                  'ny': (int, 64),
                  'extents': (_floats, (20.0, 20.0)),
                  'amplitude': (float, 5.0),
                  'frequency': (float, 0.5)},
          'gradcheck': {'directions': (int, 8),
                        'step': (float, 1e-4),
                        'tolerance': (float, 1e-3),
                        'corrupt': (float, 0.0)},
          'lattice': {'network': (str, None),
                      'offset': (float, 1.0),
                      'nx': (int, None),
                      'ny': (int, None),
                      'layers': (int, 2),
                      'diameter': (float, 0.04),
                      'corner_edges': (_bool, False),
                      'map_layers': (_ints, (3, 20, 20, 3)),
                      'levels': (int, 5)},
          'output': {'directory': (str, 'out')}}


class RunConfig(object):
    '''
    Parsed configuration, one dict per section::

        cfg = load_config('strip.ini')
        cfg['optimizer']['max_iterations']
        cfg.get('experiment', 'preset')

    Every declared key is present, unset ones hold their default.
    '''

    def __init__(self, sections, path=None):
        self.sections = sections
        self.path = path

    def __getitem__(self, section):
        return self.sections[section]

    def __repr__(self):
        return '<RunConfig %s>' % (self.path, )

    def get(self, section, key):
        return self.sections[section][key]

    def set(self, section, key, value):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError('unknown option', '%s.%s' % (section, key))
        self.sections[section][key] = value


def defaults():
    return dict((section, dict((k, v[1]) for k, v in keys.items()))
                for section, keys in SCHEMA.items())


def parse(parser, path=None):
    '''
    Validate a `ConfigParser` against `SCHEMA`.
    '''
    sections = defaults()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError('unknown section', section)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError('unknown option', '%s.%s' % (section, key))
            func = SCHEMA[section][key][0]
            try:
                sections[section][key] = func(raw)
            except (ValueError, TypeError) as e:
                raise ConfigError('invalid value %r (%s)' % (raw, e),
                                  '%s.%s' % (section, key))
    version = sections['general']['version']
    if version is None:
        raise ConfigError('missing', 'general.version')
    if version not in VERSIONS:
        raise ConfigError('unsupported version %r, expected one of %s'
                          % (version, ', '.join(VERSIONS)),
                          'general.version')
    ret = RunConfig(sections, path)
    validate(ret)
    return ret


def loads(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError('malformed configuration: %s' % e)
    return parse(parser)


def load_config(path):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, 'r') as f:
            parser.read_file(f)
    except (IOError, OSError) as e:
        raise ConfigError('can not read %s: %s' % (path, e))
    except configparser.Error as e:
        raise ConfigError('malformed configuration %s: %s' % (path, e))
    log.debug('loaded configuration %s', path)
    return parse(parser, path)


def _positive(cfg, section, key, strict=True):
    value = cfg.get(section, key)
    if value is None:
        return
    if (strict and not value > 0) or (not strict and not value >= 0):
        raise ConfigError('must be %s 0, got %r'
                          % ('>' if strict else '>=', value),
                          '%s.%s' % (section, key))


def validate(cfg):
    '''
    Physical and structural consistency checks.
    '''
    for key in ('thickness', 'youngs_modulus', 'volume_factor', 'nx', 'ny',
                'fit_tolerance', 'initial_compliance'):
        _positive(cfg, 'experiment', key)
    for key in ('epochs', 'report_every'):
        _positive(cfg, 'training', key)
    _positive(cfg, 'training', 'learning_rate', strict=False)
    for key in ('max_iterations', 'rel_tol', 'kkt_tol', 'patience'):
        _positive(cfg, 'optimizer', key, strict=False)
    for key in ('directions', 'step', 'tolerance'):
        _positive(cfg, 'gradcheck', key)
    for key in ('nx', 'ny', 'layers', 'diameter', 'levels'):
        _positive(cfg, 'lattice', key)
    for key in ('nx', 'ny', 'frequency'):
        _positive(cfg, 'fit', key)
    _positive(cfg, 'general', 'threads')

    poisson = cfg.get('experiment', 'poisson')
    if poisson is not None and not 0.0 <= poisson < 0.5:
        raise ConfigError('must be in [0, 0.5), got %r' % poisson,
                          'experiment.poisson')
    move = cfg.get('optimizer', 'move')
    if move is not None and not 0 < move <= 1:
        raise ConfigError('must be in (0, 1], got %r' % move,
                          'optimizer.move')
    supports = cfg.get('experiment', 'supports')
    if supports is not None and supports not in SUPPORT_KINDS:
        raise ConfigError('unknown support kind %r, expected one of %s'
                          % (supports, ', '.join(SUPPORT_KINDS)),
                          'experiment.supports')
    for kind in cfg.get('network', 'activations') or ():
        if kind not in ACTIVATIONS:
            raise ConfigError('unknown activation %r' % kind,
                              'network.activations')
    for key in ('extents', ):
        value = cfg.get('experiment', key)
        if value is not None and (len(value) != 2 or min(value) <= 0):
            raise ConfigError('must be two positive lengths',
                              'experiment.%s' % key)
    extents = cfg.get('fit', 'extents')
    if len(extents) != 2 or min(extents) <= 0:
        raise ConfigError('must be two positive lengths', 'fit.extents')
    direction = cfg.get('experiment', 'load_direction')
    if direction is not None and (len(direction) != 3 or
                                  not any(direction)):
        raise ConfigError('must be a nonzero 3-vector',
                          'experiment.load_direction')
    if cfg.get('lattice', 'offset') == 0:
        raise ConfigError('must be nonzero', 'lattice.offset')


def activations(cfg, hidden):
    '''
    `ActivationSpec` list from `[network]`, `None` if unset.
    '''
    kinds = cfg.get('network', 'activations')
    if kinds is None:
        return None
    if len(kinds) == 1:
        kinds = kinds * hidden
    if len(kinds) != hidden:
        raise ConfigError('%i hidden layers need %i activations, got %i'
                          % (hidden, hidden, len(kinds)),
                          'network.activations')
    omega = cfg.get('network', 'omega')
    delta = cfg.get('network', 'delta')
    try:
        return [ActivationSpec(x, omega, delta) if x == 'sinusoidal'
                else ActivationSpec(x) for x in kinds]
    except NetworkError as e:
        raise ConfigError(str(e), 'network.activations')


def training_config(cfg, base=None):
    '''
    `TrainingConfig` from `[training]` over `base`.
    '''
    base = base or TrainingConfig()
    section = cfg['training']

    def pick(key, default):
        value = section.get(key)
        return default if value is None else value

    return TrainingConfig(pick('epochs', base.epochs),
                          pick('learning_rate', base.learning_rate),
                          cfg.get('general', 'seed'),
                          pick('polish', base.polish),
                          pick('report_every', base.report_every),
                          base.beta1, base.beta2, base.epsilon)


EXPERIMENT_KEYS = ('name', 'nx', 'ny', 'holes', 'extents', 'thickness',
                   'youngs_modulus', 'poisson', 'load', 'load_regions',
                   'load_direction', 'supports', 'volume_factor',
                   'initial_rise', 'rise_shape', 'fit_tolerance',
                   'initial_compliance')
OPTIMIZER_KEYS = ('max_iterations', 'rel_tol', 'kkt_tol', 'move', 'patience')


def experiment_spec(cfg, require_supports=True):
    '''
    `ExperimentSpec` from the preset in `[experiment]` with the
    configured overrides, seeded from `[general]`. Without a preset
    `supports` must be set unless `require_supports` is false.
    '''
    seed = cfg.get('general', 'seed')
    name = cfg.get('experiment', 'preset')
    try:
        spec = presets.preset(name, seed) if name else ExperimentSpec()
    except ModelError as e:
        raise ConfigError(str(e), 'experiment.preset')
    if require_supports and name is None and \
            cfg.get('experiment', 'supports') is None:
        raise ConfigError('an experiment without preset needs supports',
                          'experiment.supports')
    changes = {'seed': seed}
    for key in EXPERIMENT_KEYS:
        value = cfg.get('experiment', key)
        if value is not None:
            changes[key] = value
    if cfg.get('experiment', 'reference') is not None:
        changes['reference'] = cfg.get('experiment', 'reference')
    layers = cfg.get('network', 'layers')
    if layers is not None:
        changes['layers'] = layers
    hidden = len(changes.get('layers', spec.layers)) - 2
    acts = activations(cfg, hidden)
    if acts is not None:
        changes['activations'] = acts
    elif layers is not None and len(layers) != len(spec.layers):
        raise ConfigError('new layer count needs activations',
                          'network.activations')
    for key in OPTIMIZER_KEYS:
        value = cfg.get('optimizer', key)
        if value is not None:
            changes[key] = value
    changes['training'] = training_config(cfg, spec.training)
    try:
        return spec.replace(**changes)
    except ModelError as e:
        raise ConfigError(str(e), 'experiment')
