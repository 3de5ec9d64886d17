'''
Constrained shape optimisation driver
=====================================

Solves::

    min J(theta)  s.t.  V(theta) <= v_max

with the moving asymptotes method of `nrepshell.optimizer.mma`::

    problem = OptProblem(evaluate, v_max=1.05 * V0)
    theta, history = run(problem, theta0)
    history.status  # converged | max_iter | line_failure

`evaluate(theta)` returns `(J, dJ, V, dV)`. If it raises
`EvaluationError` the step is halved, up to 10 times per iteration.
A point whose values exceed the MMA approximations is not accepted:
the approximations are tightened and the subproblem solved again, up
to 20 times. Starting from a feasible design the iterates stay
feasible and the objective does not grow.

Termination: the iterate is feasible (violation <= 1e-6 v_max) and
either the relative objective change stayed below `rel_tol` for
`patience` consecutive iterations or the KKT residual fell below
`kkt_tol`. The best feasible iterate is returned.
'''
import csv
import logging
from collections import namedtuple

import numpy as np

from nrepshell.exceptions import EvaluationError
from nrepshell.exceptions import OptimizationError
from nrepshell.optimizer.mma import MMAState
from nrepshell.optimizer.mma import kkt_residual
from nrepshell.optimizer.mma import mma_step
from nrepshell.optimizer.mma import tighten

log = logging.getLogger(__name__)

STATUSES = ('converged', 'max_iter', 'line_failure')
FEASIBILITY = 1e-6
BACKTRACK = 10
INNER = 20

HistoryRecord = namedtuple('HistoryRecord', ('iteration',
                                             'compliance',
                                             'volume',
                                             'violation',
                                             'theta_norm',
                                             'step_norm',
                                             'kkt',
                                             'feasible'))


class OptProblem(object):
    '''
    Problem definition for `run()`.

    * `evaluate` -- theta -> (J, dJ, V, dV), deterministic
    * `v_max` -- volume bound, > 0
    * `bounds` -- optional (lower, upper) parameter box
    * `move` -- per-iteration move limit as a fraction of the span
    * `spans` -- optional per-parameter scale of asymptotes and moves
    '''

    def __init__(self, evaluate, v_max, max_iterations=500,
                 rel_tol=1e-6, kkt_tol=1e-6, move=0.2, bounds=None,
                 patience=5, spans=None):
        if not v_max > 0:
            raise OptimizationError('v_max must be > 0, got %r' % v_max)
        if int(max_iterations) < 0:
            raise OptimizationError('max_iterations must be >= 0')
        if not 0 < move <= 1:
            raise OptimizationError('move limit must be in (0, 1]')
        self.evaluate = evaluate
        self.v_max = float(v_max)
        self.max_iterations = int(max_iterations)
        self.rel_tol = float(rel_tol)
        self.kkt_tol = float(kkt_tol)
        self.move = float(move)
        self.bounds = bounds
        self.patience = int(patience)
        self.spans = spans


class OptHistory(object):
    '''
    Per-iteration record and terminal status of a run.
    '''

    def __init__(self, v_max):
        self.v_max = v_max
        self.records = []
        self.status = None
        self.best = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, key):
        return self.records[key]

    def __repr__(self):
        return '<OptHistory %i records status=%s>' % (len(self.records),
                                                      self.status)

    def append(self, record):
        self.records.append(record)

    @property
    def compliance(self):
        return np.array([x.compliance for x in self.records])

    @property
    def volume(self):
        return np.array([x.volume for x in self.records])

    def write_csv(self, path):
        with open(path, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(('iter', 'compliance', 'volume', 'violation',
                             'step_norm'))
            for x in self.records:
                writer.writerow((x.iteration,
                                 '%.17g' % x.compliance,
                                 '%.17g' % x.volume,
                                 '%.17g' % x.violation,
                                 '%.17g' % x.step_norm))


def _record(history, iteration, theta, J, V, step, kkt):
    violation = max(0.0, V - history.v_max)
    record = HistoryRecord(iteration, J, V, violation,
                           float(np.linalg.norm(theta)),
                           step, kkt,
                           violation <= FEASIBILITY * history.v_max)
    history.append(record)
    log.debug('iteration %i: J %.9g V %.9g violation %.3g step %.3g '
              'kkt %.3g', iteration, J, V, violation, step, kkt)
    return record


def _accept(problem, state, iteration, theta, candidate):
    failures = 0
    while True:
        try:
            result = problem.evaluate(candidate)
        except EvaluationError as e:
            failures += 1
            if failures > BACKTRACK:
                return None
            log.warning('iteration %i: evaluation failed (%s), '
                        'halving the step', iteration, e)
            candidate = theta + 0.5 * (candidate - theta)
            continue
        if state.inner >= INNER:
            log.debug('iteration %i: approximation still not conservative '
                      'after %i inner iterations', iteration, INNER)
            return candidate, result
        retry = tighten(state, candidate, result[0], result[2])
        if retry is None:
            return candidate, result
        candidate = retry


def run(problem, theta0):
    '''
    Optimise from `theta0`, returns the best feasible parameters and
    the `OptHistory`. If no iterate is feasible, the last one is
    returned.
    '''
    theta = np.array(theta0, dtype=float)
    try:
        J, dJ, V, dV = problem.evaluate(theta)
    except EvaluationError as e:
        raise OptimizationError('initial design can not be evaluated: %s'
                                % e)
    history = OptHistory(problem.v_max)
    state = MMAState(theta, problem.v_max, abs(J), problem.move,
                     problem.bounds, problem.spans)
    record = _record(history, 0, theta, J, V, 0.0,
                     kkt_residual(state, theta, dJ, dV))
    best = (J, theta.copy()) if record.feasible else None
    last = theta.copy()
    calm = 0

    if record.feasible and record.kkt < problem.kkt_tol:
        history.status = 'converged'
    for iteration in range(1, problem.max_iterations + 1):
        if history.status is not None:
            break
        candidate, state = mma_step(state, theta, J, dJ, V, dV)
        result = _accept(problem, state, iteration, theta, candidate)
        if result is None:
            history.status = 'line_failure'
            break
        candidate, result = result
        step = candidate - theta
        J_prev = J
        J, dJ, V, dV = result
        theta = candidate
        last = theta.copy()
        record = _record(history, iteration, theta, J, V,
                         float(np.linalg.norm(step)),
                         kkt_residual(state, theta, dJ, dV))
        if record.feasible and (best is None or J < best[0]):
            best = (J, theta.copy())
        change = abs(J - J_prev) / max(abs(J_prev), 1e-300)
        calm = calm + 1 if change < problem.rel_tol else 0
        if record.feasible and (calm >= problem.patience or
                                record.kkt < problem.kkt_tol):
            history.status = 'converged'
    if history.status is None:
        history.status = 'max_iter'

    if best is None:
        log.warning('no feasible iterate, returning the last one')
        theta_best = last
    else:
        theta_best = best[1]
        for record in history.records:
            if record.feasible and record.compliance == best[0]:
                history.best = record.iteration
                break
    log.info('optimisation %s after %i iterations, J %.9g',
             history.status, len(history) - 1,
             best[0] if best else J)
    return theta_best, history


__all__ = ['OptProblem',
           'OptHistory',
           'HistoryRecord',
           'MMAState',
           'STATUSES',
           'mma_step',
           'run']
