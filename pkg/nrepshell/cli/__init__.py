'''
Command line interface::

    nrepshell fit --config surface.ini --out run/fit
    nrepshell optimize --config strip.ini --seed 3 --deterministic
    nrepshell gradcheck --config strip.ini
    nrepshell lattice --config lattice.ini --out run/lattice

Exit codes:

* 0 -- success
* 2 -- invalid configuration or missing input file
* 3 -- the optimiser stopped at the iteration limit
* 4 -- any other failure
* 5 -- gradient check above tolerance
'''
import csv
import logging
import os
import sys
from argparse import ArgumentParser

from nrepshell import config
from nrepshell.bench import fit_surface
from nrepshell.bench import initial_design
from nrepshell.bench import run_experiment
from nrepshell.bench import surface_target
from nrepshell.bench import write_summary
from nrepshell.bench import presets
from nrepshell.config.schema import activations
from nrepshell.config.schema import experiment_spec
from nrepshell.config.schema import load_config
from nrepshell.config.schema import training_config
from nrepshell.exceptions import ConfigError
from nrepshell.exceptions import NRepError
from nrepshell.geometry.export import write_obj
from nrepshell.lattice import build_map3d_net
from nrepshell.lattice import generate_bcc_lattice
from nrepshell.lattice import map_lattice
from nrepshell.lattice import offset_shell
from nrepshell.lattice import write_lattice
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import TrainingConfig
from nrepshell.nrep import forward
from nrepshell.nrep import init_params
from nrepshell.nrep import load_network
from nrepshell.nrep import save_network
from nrepshell.sensitivity import ShapeEvaluator
from nrepshell.sensitivity import directional_check

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MAX_ITER = 3
EXIT_FAILURE = 4
EXIT_GRADIENT = 5

LEVELS = ('debug', 'info', 'warning', 'error')


def _write_rows(path, header, rows):
    with open(path, 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, (int, str))
                             else '%.17g' % x for x in row])


def cmd_fit(cfg, out):
    '''
    Fit a heightfield network to `amplitude cos(f x) cos(f y)`.
    '''
    seed = cfg.get('general', 'seed')
    extents = cfg.get('fit', 'extents')
    layers = cfg.get('network', 'layers')
    if layers is None:
        net, nx, ny, training = presets.surface_fit(cfg.get('network',
                                                            'omega'), seed)
        net = net.replace(extents=extents)
    else:
        acts = activations(cfg, len(layers) - 2) or \
            ActivationSpec('sinusoidal', cfg.get('network', 'omega'),
                           cfg.get('network', 'delta'))
        net = MLPNetwork(layers, acts, 'heightfield', extents)
        training = TrainingConfig(20000, 0.01, seed)
    nx = cfg.get('fit', 'nx')
    ny = cfg.get('fit', 'ny')
    training = training_config(cfg, training)
    net = init_params(net, seed)
    target = surface_target(cfg.get('fit', 'amplitude'),
                            cfg.get('fit', 'frequency'))
    trace = []
    net, mse = fit_surface(net, nx, ny, target, training, trace)
    save_network(net, os.path.join(out, 'network.txt'))
    _write_rows(os.path.join(out, 'fit_report.csv'), ('epoch', 'mse'), trace)
    write_summary(os.path.join(out, 'summary.txt'),
                  {'status': 'success',
                   'params': net.nparams,
                   'epochs': training.epochs,
                   'final_mse': mse})
    log.info('fit finished, mse %.6g', mse)
    return EXIT_OK


def cmd_optimize(cfg, out):
    '''
    Fit the initial shape and run the shape optimisation.
    '''
    result = run_experiment(experiment_spec(cfg), out)
    status = result.summary['status']
    if status == 'converged':
        return EXIT_OK
    if status == 'max_iter':
        return EXIT_MAX_ITER
    return EXIT_FAILURE


def cmd_gradcheck(cfg, out):
    '''
    Directional finite difference check of dJ/dtheta and dV/dtheta
    at the initial design.
    '''
    spec = experiment_spec(cfg)
    flat, net, _ = initial_design(spec)
    evaluate = ShapeEvaluator(net, flat)
    theta = net.theta
    J, dJ, V, dV = evaluate(theta)
    corrupt = cfg.get('gradcheck', 'corrupt')
    if corrupt:
        log.warning('gradient corrupted by factor %g', 1.0 + corrupt)
        dJ = dJ * (1.0 + corrupt)
    kwarg = {'directions': cfg.get('gradcheck', 'directions'),
             'step': cfg.get('gradcheck', 'step'),
             'seed': cfg.get('general', 'seed')}
    header = ('direction', 'analytic', 'finite_difference', 'relative_error')
    rows = directional_check(lambda x: evaluate.values(x)[0], dJ, theta,
                             **kwarg)
    _write_rows(os.path.join(out, 'gradcheck.csv'), header, rows)
    volume = directional_check(lambda x: evaluate.values(x)[1], dV, theta,
                               **kwarg)
    _write_rows(os.path.join(out, 'gradcheck_volume.csv'), header, volume)

    worst = max(x.relative_error for x in rows + volume)
    tolerance = cfg.get('gradcheck', 'tolerance')
    write_summary(os.path.join(out, 'summary.txt'),
                  {'status': 'success' if worst <= tolerance else 'failure',
                   'compliance': J,
                   'volume': V,
                   'directions': len(rows),
                   'max_relative_error': worst})
    if worst > tolerance:
        log.error('gradient check failed: relative error %.3g > %.3g',
                  worst, tolerance)
        return EXIT_GRADIENT
    log.info('gradient check passed, max relative error %.3g', worst)
    return EXIT_OK


def cmd_lattice(cfg, out):
    '''
    Lattice-skin geometry from a saved shell network.
    '''
    path = cfg.get('lattice', 'network')
    if path is None:
        raise ConfigError('missing', 'lattice.network')
    if not os.path.isfile(path):
        raise ConfigError('no such file %s' % path, 'lattice.network')
    net = load_network(path)
    spec = experiment_spec(cfg, require_supports=False)
    mesh = spec.mesh()
    lower = spec.model(mesh, forward(net, mesh.vertices))
    offset = cfg.get('lattice', 'offset')
    upper = lower.with_coords(offset_shell(lower, offset))

    training = training_config(cfg, TrainingConfig(2000, 0.01,
                                                   polish=True))
    map3d, mse = build_map3d_net(lower, offset, training,
                                 cfg.get('lattice', 'map_layers'),
                                 levels=cfg.get('lattice', 'levels'))
    nx = cfg.get('lattice', 'nx') or max(mesh.nx // 2, 1)
    ny = cfg.get('lattice', 'ny') or max(mesh.ny // 2, 1)
    lattice = generate_bcc_lattice(nx, ny, cfg.get('lattice', 'layers'),
                                   lower.extents,
                                   cfg.get('lattice', 'corner_edges'))
    geometry = map_lattice(lattice, map3d, lower, upper,
                           cfg.get('lattice', 'diameter'))

    write_obj(os.path.join(out, 'lower.obj'), mesh, lower.coords, 'lower')
    write_obj(os.path.join(out, 'upper.obj'), mesh, upper.coords, 'upper')
    write_lattice(os.path.join(out, 'lattice.txt'), geometry)
    save_network(map3d, os.path.join(out, 'map_network.txt'))
    write_summary(os.path.join(out, 'summary.txt'),
                  {'status': 'success',
                   'nodes': len(geometry.nodes),
                   'struts': len(geometry.struts),
                   'couplings': len(geometry.couplings),
                   'map_mse': mse,
                   'coupling_residual': geometry.coupling_residual()})
    return EXIT_OK


COMMANDS = {'fit': cmd_fit,
            'optimize': cmd_optimize,
            'gradcheck': cmd_gradcheck,
            'lattice': cmd_lattice}


def get_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', required=True,
                        help='run configuration, INI')
    common.add_argument('-o', '--out', default=None,
                        help='output directory, overrides [output]')
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--deterministic', action='store_true',
                        default=None)
    common.add_argument('--threads', type=int, default=None)
    common.add_argument('-v', '--verbose', action='count', default=0)
    common.add_argument('--log-level', choices=LEVELS, default=None)

    parser = ArgumentParser(prog='nrepshell',
                            description='shape optimisation of thin shells '
                                        'with neural parametric '
                                        'representations')
    sub = parser.add_subparsers(dest='command')
    sub.required = True
    for name, func in sorted(COMMANDS.items()):
        sub.add_parser(name, parents=[common],
                       help=func.__doc__.strip().splitlines()[0])
    return parser


def _log_level(args):
    if args.log_level is not None:
        return getattr(logging, args.log_level.upper())
    return (logging.WARNING,
            logging.INFO,
            logging.DEBUG)[min(args.verbose, 2)]


def _apply(cfg, args):
    if args.seed is not None:
        cfg.set('general', 'seed', args.seed)
    if args.deterministic:
        cfg.set('general', 'deterministic', True)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError('must be >= 1', 'threads')
        cfg.set('general', 'threads', args.threads)
    if args.out is not None:
        cfg.set('output', 'directory', args.out)
    config.threads = cfg.get('general', 'threads')
    config.deterministic = cfg.get('general', 'deterministic')


def main(argv=None):
    args = get_parser().parse_args(argv)
    logging.basicConfig(level=_log_level(args),
                        format='%(asctime)s %(levelname)s %(name)s: '
                               '%(message)s')
    try:
        cfg = load_config(args.config)
        _apply(cfg, args)
        out = cfg.get('output', 'directory')
        if not os.path.isdir(out):
            os.makedirs(out)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        log.error('configuration: %s', e)
        return EXIT_CONFIG
    except NRepError as e:
        log.error('%s failed: %s', args.command, e)
        return EXIT_FAILURE
    except (IOError, OSError) as e:
        log.error('%s', e)
        return EXIT_CONFIG


def run():
    sys.exit(main())
