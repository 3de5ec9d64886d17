'''
Benchmarks and reference solutions
==================================

* `catenary_reference()`, `mse_to_catenary()` -- the optimal arch
  of a strip under a uniform vertical load
* `navier_center_deflection()` -- simply supported square plate
* `ExperimentSpec`, `run_experiment()`, `sweep()` -- the whole
  pipeline: grid, initial fit, optimisation, exports
* `fit_surface()` -- network fitting study on a known surface

Built-in configurations live in `nrepshell.bench.presets`.
'''
import logging
import math
import os
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.optimize import bisect
from scipy.optimize import brentq

from nrepshell.exceptions import FitToleranceError
from nrepshell.exceptions import ModelError
from nrepshell.exceptions import NRepError
from nrepshell.geometry import build_structured_grid
from nrepshell.geometry.export import write_obj
from nrepshell.geometry.export import write_vtk
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import forward
from nrepshell.nrep import init_bounds
from nrepshell.nrep import init_params
from nrepshell.nrep import fit
from nrepshell.nrep import save_network
from nrepshell.nrep import TrainingConfig
from nrepshell.optimizer import OptProblem
from nrepshell.optimizer import run
from nrepshell.sensitivity import ShapeEvaluator
from nrepshell.shell import Load
from nrepshell.shell import ShellModel
from nrepshell.shell import area_and_volume
from nrepshell.shell import assemble_and_solve
from nrepshell.shell import compliance
from nrepshell.shell import support_mask

log = logging.getLogger(__name__)

FIT_ROUNDS = 8
FIT_DECAY = 0.7
CALIBRATION_STEPS = 8


class CatenaryReference(namedtuple('CatenaryReference',
                                   ('a', 'span', 'arc_length',
                                    'x', 'z'))):
    '''
    Arch-oriented catenary through (0, 0) and (span, 0)::

        z(x) = a (cosh(L / 2a) - cosh((x - L / 2) / a))
    '''

    def height(self, x):
        x = np.asarray(x, dtype=float)
        L = self.span
        return self.a * (np.cosh(L / (2.0 * self.a)) -
                         np.cosh((x - L / 2.0) / self.a))


def catenary_reference(span, arc_length, samples=101):
    '''
    Solve `2 a sinh(L / 2a) = S` for `a` by bisection and sample the
    curve at `samples` equispaced points.
    '''
    L = float(span)
    S = float(arc_length)
    if not S > L > 0:
        raise ModelError('a catenary needs arc length > span > 0, '
                         'got S=%r L=%r' % (S, L))

    def residual(a):
        return 2.0 * a * math.sinh(L / (2.0 * a)) - S

    lo = L / 100.0
    hi = 100.0 * L
    while residual(hi) > 0:
        lo, hi = hi, hi * 10.0
        if hi > 1e30 * L:
            raise ModelError('catenary bracket expansion failed')
    a = bisect(residual, lo, hi, xtol=1e-12 * L, rtol=1e-15, maxiter=2000)
    x = np.linspace(0.0, L, int(samples))
    ref = CatenaryReference(a, L, S, x, np.zeros_like(x))
    return ref._replace(z=ref.height(x))


def centreline(model):
    '''
    Vertices on the row closest to eta2 = 0.5.
    '''
    eta2 = model.mesh.vertices[:, 1]
    d = np.abs(eta2 - 0.5)
    return np.nonzero(np.isclose(d, d.min()))[0]


def mse_to_catenary(model, reference):
    '''
    Mean squared vertical deviation of the centreline vertices from
    the catenary at their x positions. Heights are measured from the
    centreline ends, a rigid vertical shift does not count.
    '''
    rows = centreline(model)
    x = model.coords[rows, 0]
    z = model.coords[rows, 2]
    ends = [np.argmin(x), np.argmax(x)]
    z = z - z[ends].mean()
    return float(np.mean((z - reference.height(x)) ** 2))


def navier_center_deflection(q, L, D, terms=100):
    '''
    Centre deflection of a simply supported square plate of side `L`
    and bending stiffness `D` under uniform pressure `q`, Navier
    double series with `terms` odd terms per direction.
    '''
    m = np.arange(1, 2 * terms, 2, dtype=float)
    mm, nn = np.meshgrid(m, m, indexing='ij')
    sign = np.sin(mm * np.pi / 2.0) * np.sin(nn * np.pi / 2.0)
    series = sign / (mm * nn * (mm ** 2 + nn ** 2) ** 2)
    return 16.0 * q * L ** 4 / (np.pi ** 6 * D) * series.sum()


class ExperimentSpec(object):
    '''
    One shape optimisation run. Use `replace()` to derive variants::

        spec = presets.strip().replace(seed=3, name='strip-3')

    Attributes:

    * `nx`, `ny`, `holes`, `extents` -- grid and projected size
    * `thickness`, `youngs_modulus`, `poisson` -- shell
    * `load`, `load_regions`, `load_direction` -- load intensity,
      parametric rectangles (`None` = everywhere), direction
    * `supports` -- support preset, see `shell.support_mask()`
    * `volume_factor` -- `V_max = volume_factor * V_flat`
    * `layers`, `activations` -- network; `activations` is a list of
      `ActivationSpec`, one per hidden layer
    * `initial_rise`, `rise_shape` -- initial height `initial_rise`
      times `sin(pi eta1)` (`arch`) or `sin(pi eta1) sin(pi eta2)`
      (`dome`)
    * `training` -- `TrainingConfig` of the initial fit
    * `fit_tolerance` -- initial fit MSE target, default
      1e-6 max(extents)^2
    * `initial_compliance` -- if set, the fitted initial heights are
      scaled to reach this compliance
    * `max_iterations`, `rel_tol`, `kkt_tol`, `move`, `patience` --
      optimiser
    * `reference` -- `catenary` to compare the result with the arch
    '''
    fields = ('name', 'nx', 'ny', 'holes', 'extents', 'thickness',
              'youngs_modulus', 'poisson', 'load', 'load_regions',
              'load_direction', 'supports', 'volume_factor', 'layers',
              'activations', 'seed', 'initial_rise', 'rise_shape',
              'training', 'fit_tolerance', 'initial_compliance',
              'max_iterations', 'rel_tol', 'kkt_tol', 'move', 'patience',
              'reference')

    def __init__(self, name='experiment', nx=8, ny=8, holes=(),
                 extents=(20.0, 20.0), thickness=0.1,
                 youngs_modulus=7e7, poisson=0.35, load=10.0,
                 load_regions=None, load_direction=(0.0, 0.0, -1.0),
                 supports='mid-edges', volume_factor=1.2,
                 layers=(2, 5, 5, 1), activations=None, seed=0,
                 initial_rise=0.0, rise_shape='dome', training=None,
                 fit_tolerance=None, initial_compliance=None,
                 max_iterations=500, rel_tol=1e-6,
                 kkt_tol=1e-6, move=0.2, patience=5, reference=None):
        if activations is None:
            activations = [ActivationSpec('sinusoidal', 1.0, math.pi / 4)] \
                * (len(layers) - 2)
        if rise_shape not in ('arch', 'dome'):
            raise ModelError('rise shape must be arch or dome, got %r'
                             % rise_shape)
        if reference not in (None, 'catenary'):
            raise ModelError('unknown reference %r' % (reference, ))
        if not volume_factor > 0:
            raise ModelError('volume factor must be > 0')
        self.name = name
        self.nx = nx
        self.ny = ny
        self.holes = tuple(tuple(x) for x in holes)
        self.extents = tuple(extents)
        self.thickness = thickness
        self.youngs_modulus = youngs_modulus
        self.poisson = poisson
        self.load = load
        self.load_regions = load_regions
        self.load_direction = tuple(load_direction)
        self.supports = supports
        self.volume_factor = volume_factor
        self.layers = tuple(layers)
        self.activations = tuple(activations)
        self.seed = seed
        self.initial_rise = initial_rise
        self.rise_shape = rise_shape
        self.training = training or TrainingConfig(2000, 0.01, seed,
                                                   polish=True)
        self.fit_tolerance = fit_tolerance
        if initial_compliance is not None and not initial_compliance > 0:
            raise ModelError('initial compliance must be > 0')
        self.initial_compliance = initial_compliance
        self.max_iterations = max_iterations
        self.rel_tol = rel_tol
        self.kkt_tol = kkt_tol
        self.move = move
        self.patience = patience
        self.reference = reference

    def __repr__(self):
        return '<ExperimentSpec %s %ix%i>' % (self.name, self.nx, self.ny)

    def replace(self, **kwarg):
        args = dict((x, getattr(self, x)) for x in self.fields)
        for key in kwarg:
            if key not in self.fields:
                raise ModelError('unknown experiment field %r' % key)
        args.update(kwarg)
        return ExperimentSpec(**args)

    def mesh(self):
        return build_structured_grid(self.nx, self.ny, self.holes)

    def model(self, mesh, coords=None):
        Lx, Ly = self.extents
        if coords is None:
            coords = flat_coords(mesh, self.extents)
        return ShellModel(mesh, coords,
                          self.thickness,
                          self.youngs_modulus,
                          self.poisson,
                          load=Load(self.load, self.load_direction,
                                    self.load_regions),
                          supports=support_mask(mesh, self.supports),
                          extents=(Lx, Ly))

    def network(self):
        net = MLPNetwork(self.layers, self.activations, 'heightfield',
                         self.extents)
        return init_params(net, self.seed)


def flat_coords(mesh, extents):
    eta = mesh.vertices
    return np.stack((eta[:, 0] * extents[0],
                     eta[:, 1] * extents[1],
                     np.zeros(len(eta))), axis=-1)


def initial_heights(spec, eta):
    eta = np.asarray(eta)
    z = spec.initial_rise * np.sin(np.pi * eta[:, 0])
    if spec.rise_shape == 'dome':
        z = z * np.sin(np.pi * eta[:, 1])
    return z


def _scale_heights(net, factor):
    weights = list(net.weights)
    biases = list(net.biases)
    weights[-1] = weights[-1] * factor
    biases[-1] = biases[-1] * factor
    return net.replace(weights=weights, biases=biases)


def calibrate(flat, net, target):
    '''
    Scale the heights of the heightfield `net` so that the shape has
    compliance `target`. Returns the scaled network and the factor.

    The output layer is affine, scaling its weights and bias scales
    every height by the same factor.
    '''
    eta = flat.mesh.vertices

    def residual(factor):
        model = flat.with_coords(forward(_scale_heights(net, factor), eta))
        return math.log(compliance(assemble_and_solve(model)) / target)

    lo = hi = 1.0
    r = residual(1.0)
    if r == 0:
        return net, 1.0
    for _ in range(CALIBRATION_STEPS):
        if r > 0:
            lo, hi = hi, hi * 1.5
            r = residual(hi)
            if r <= 0:
                break
        else:
            hi, lo = lo, lo / 1.5
            r = residual(lo)
            if r >= 0:
                break
    else:
        raise ModelError('compliance %.6g can not be bracketed by '
                         'scaling the initial heights' % target)
    factor = brentq(residual, lo, hi, xtol=1e-10, rtol=1e-10)
    log.info('initial heights scaled by %.9g for compliance %.6g',
             factor, target)
    return _scale_heights(net, factor), factor


def initial_design(spec):
    '''
    Flat template model and the network fitted to the initial rise,
    returns `(model, net, fit_mse)`.

    Training continues from the fitted parameters, the learning rate
    scaled by `FIT_DECAY` every round, until the MSE is within
    `spec.fit_tolerance`; otherwise `FitToleranceError`. With
    `spec.initial_compliance` set the fitted heights are scaled to
    reach that compliance, see `calibrate()`.
    '''
    mesh = spec.mesh()
    eta = mesh.vertices
    heights = initial_heights(spec, eta)
    training = spec.training
    net, fit_mse = fit(spec.network(), eta, heights, training)
    tol = spec.fit_tolerance
    if tol is None:
        tol = 1e-6 * max(spec.extents) ** 2
    for attempt in range(FIT_ROUNDS):
        if fit_mse <= tol:
            break
        log.info('%s: fit MSE %.3g above %.3g, training round %i',
                 spec.name, fit_mse, tol, attempt + 1)
        training = TrainingConfig(training.epochs,
                                  training.learning_rate * FIT_DECAY,
                                  training.seed, True,
                                  training.report_every,
                                  training.beta1, training.beta2,
                                  training.epsilon)
        net, fit_mse = fit(net, eta, heights, training)
    if fit_mse > tol:
        raise FitToleranceError('%s: initial fit MSE %.3g above %.3g '
                                'after %i rounds' % (spec.name, fit_mse,
                                                     tol, FIT_ROUNDS + 1),
                                mse=fit_mse, tolerance=tol)
    flat = spec.model(mesh)
    if spec.initial_compliance is not None:
        net, factor = calibrate(flat, net, spec.initial_compliance)
        fit_mse *= factor ** 2
    return flat, net, fit_mse


def parameter_spans(net):
    '''
    Per-parameter scale for the optimiser: the initialisation range
    of the parameter or its current magnitude, whichever is larger.
    '''
    return np.maximum(init_bounds(net), np.abs(net.theta))


ExperimentResult = namedtuple('ExperimentResult', ('model',
                                                   'net',
                                                   'history',
                                                   'summary'))


def write_summary(path, summary):
    with open(path, 'w') as f:
        for key, value in summary.items():
            if isinstance(value, float):
                value = '%.17g' % value
            f.write('%s=%s\n' % (key, value))


def run_experiment(spec, out=None):
    '''
    Fit the initial shape, optimise, report. With `out` set, the
    directory receives `shape.obj`, `shape.vtk`, `history.csv`,
    `network.txt` and `summary.txt`.
    '''
    summary = {'name': spec.name, 'seed': spec.seed}
    if out is not None and not os.path.isdir(out):
        os.makedirs(out)
    try:
        flat, net, fit_mse = initial_design(spec)
        mesh = flat.mesh
        eta = mesh.vertices
        V_flat = area_and_volume(flat)[1]
        v_max = spec.volume_factor * V_flat
        summary['params'] = net.nparams
        summary['fit_mse'] = fit_mse

        evaluator = ShapeEvaluator(net, flat)
        problem = OptProblem(evaluator, v_max,
                             max_iterations=spec.max_iterations,
                             rel_tol=spec.rel_tol,
                             kkt_tol=spec.kkt_tol,
                             move=spec.move,
                             patience=spec.patience,
                             spans=parameter_spans(net))
        theta, history = run(problem, net.theta)
        net = net.with_params(theta)
        model = flat.with_coords(forward(net, eta))
        system = assemble_and_solve(model)
        J = compliance(system)
        A, V = area_and_volume(model)
        summary.update({'status': history.status,
                        'iterations': len(history) - 1,
                        'initial_compliance': history[0].compliance,
                        'final_compliance': J,
                        'initial_volume': history[0].volume,
                        'flat_volume': V_flat,
                        'v_max': v_max,
                        'final_volume': V,
                        'final_area': A,
                        'volume_ratio': V / V_flat})
        if spec.reference == 'catenary':
            ref = catenary_reference(spec.extents[0],
                                     spec.volume_factor * spec.extents[0])
            summary['catenary_a'] = ref.a
            summary['mse_to_catenary'] = mse_to_catenary(model, ref)
    except NRepError as e:
        summary['status'] = 'failure'
        summary['error'] = str(e)
        if out is not None:
            write_summary(os.path.join(out, 'summary.txt'), summary)
        raise

    if out is not None:
        write_obj(os.path.join(out, 'shape.obj'), mesh, model.coords,
                  spec.name)
        write_vtk(os.path.join(out, 'shape.vtk'), mesh, model.coords,
                  system.displacements, spec.name)
        history.write_csv(os.path.join(out, 'history.csv'))
        save_network(net, os.path.join(out, 'network.txt'))
        write_summary(os.path.join(out, 'summary.txt'), summary)
    log.info('%s: %s, J %.6g -> %.6g', spec.name, summary['status'],
             summary['initial_compliance'], J)
    return ExperimentResult(model, net, history, summary)


def _run_seed(args):
    spec, out = args
    return run_experiment(spec, out).summary


def sweep(spec, seeds, out=None, workers=1):
    '''
    Run `spec` once per seed, each run in `out/seed-<n>` if `out` is
    set. Returns the run summaries and the medians of the final
    compliance and, for strips, the MSE to the catenary.
    '''
    jobs = []
    for seed in seeds:
        path = None if out is None else os.path.join(out, 'seed-%s' % seed)
        jobs.append((spec.replace(seed=seed,
                                  name='%s-seed-%s' % (spec.name, seed),
                                  training=_reseed(spec.training, seed)),
                     path))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_seed, jobs))
    else:
        summaries = [_run_seed(x) for x in jobs]
    medians = {'median_compliance':
               float(np.median([x['final_compliance'] for x in summaries]))}
    if all('mse_to_catenary' in x for x in summaries):
        medians['median_mse_to_catenary'] = \
            float(np.median([x['mse_to_catenary'] for x in summaries]))
    return summaries, medians


def _reseed(training, seed):
    return TrainingConfig(training.epochs, training.learning_rate, seed,
                          training.polish, training.report_every,
                          training.beta1, training.beta2, training.epsilon)


def surface_target(amplitude=5.0, frequency=0.5):
    '''
    `z = amplitude cos(frequency x) cos(frequency y)`
    '''
    def target(x, y):
        return amplitude * np.cos(frequency * x) * np.cos(frequency * y)
    return target


def fit_surface(net, nx, ny, target, training, trace=None):
    '''
    Fit a heightfield `net` to `target(x, y)` sampled at the vertices
    of an `nx` x `ny` grid over the network extents. Returns the
    trained network and its MSE.
    '''
    mesh = build_structured_grid(nx, ny)
    eta = mesh.vertices
    x = eta[:, 0] * net.extents[0]
    y = eta[:, 1] * net.extents[1]
    return fit(net, eta, target(x, y), training, trace)


def omega_study(omegas, seeds, layers=(2, 10, 10, 10, 1), delta=math.pi / 4,
                nx=64, ny=64, extents=(20.0, 20.0), target=None,
                training=None):
    '''
    Mean fit MSE over `seeds` for every sinusoidal `omega`.
    '''
    target = target or surface_target()
    training = training or TrainingConfig(20000, 0.01)
    ret = {}
    for omega in omegas:
        errors = []
        for seed in seeds:
            spec = ActivationSpec('sinusoidal', omega, delta)
            net = MLPNetwork(layers, spec, 'heightfield', extents)
            net = init_params(net, seed)
            errors.append(fit_surface(net, nx, ny, target, training)[1])
        ret[omega] = float(np.mean(errors))
        log.info('omega %g: mean MSE %.6g', omega, ret[omega])
    return ret


__all__ = ['CatenaryReference',
           'ExperimentSpec',
           'ExperimentResult',
           'catenary_reference',
           'mse_to_catenary',
           'navier_center_deflection',
           'initial_design',
           'initial_heights',
           'flat_coords',
           'run_experiment',
           'write_summary',
           'sweep',
           'fit_surface',
           'surface_target',
           'omega_study']
