'''
Method of moving asymptotes, one constraint
===========================================

Every iteration replaces the objective and the constraint by convex
separable approximations::

    f(x) ~ r + sum_j p_j / (U_j - x_j) + q_j / (x_j - L_j)

around the current point, with the asymptotes `L`, `U` moved by
the usual oscillation heuristic: they shrink by 0.7 when a variable
oscillates and widen by 1.2 when it moves monotonically.

With a single constraint the subproblem has a closed form primal
solution for every multiplier; the multiplier is found by bisection
on the dual.

The approximations carry a curvature term `rho / span` per function.
When the value at the new point exceeds its approximation, `tighten()`
raises that `rho` and solves the subproblem again with the same
asymptotes, so an accepted point is feasible whenever the
approximation says so and the objective never grows::

    x, state = mma_step(state, theta, J, dJ, V, dV)
    J1, dJ1, V1, dV1 = evaluate(x)
    x = tighten(state, x, J1, V1)   # None once conservative
'''
import logging
from collections import namedtuple

import numpy as np

from nrepshell.exceptions import OptimizationError

log = logging.getLogger(__name__)

ASY_INIT = 0.5
ASY_INCR = 1.2
ASY_DECR = 0.7
ASY_MIN = 0.01
ASY_MAX = 10.0
ALBEFA = 0.1
RHO_MIN = 1e-6
RHO_GROW = 1.1
RHO_JUMP = 10.0
CONSERVATIVE = 1e-10
DUAL_TOL = 1e-12
DUAL_MAX = 1e12

Subproblem = namedtuple('Subproblem', ('x',
                                       'f',
                                       'grad',
                                       'low',
                                       'upp',
                                       'alpha',
                                       'beta'))


class MMAState(object):
    '''
    Iteration state: previous iterates, asymptotes, the multiplier of
    the last subproblem and the fixed problem scaling.

    * `span` -- per-variable design range driving asymptotes and the
      move limit: `spans` when given, the bound range with `bounds`,
      `range(theta0) + 1` otherwise
    * `scale` -- objective scaling, |J0|
    * `v_max` -- constraint bound, the constraint is `V / v_max - 1`
    * `rho` -- curvature of the objective and constraint approximations
    '''

    def __init__(self, theta0, v_max, scale=1.0, move=0.2, bounds=None,
                 spans=None):
        theta0 = np.asarray(theta0, dtype=float)
        if not v_max > 0:
            raise OptimizationError('v_max must be > 0, got %r' % v_max)
        if not np.all(np.isfinite(theta0)):
            raise OptimizationError('non-finite initial parameters')
        self.n = theta0.size
        if bounds is None:
            self.lower = np.full(self.n, -np.inf)
            self.upper = np.full(self.n, np.inf)
            width = np.ptp(theta0) if self.n else 0.0
            self.span = np.full(self.n, width + 1.0)
        else:
            lower, upper = bounds
            self.lower = np.broadcast_to(np.asarray(lower, dtype=float),
                                         (self.n, )).copy()
            self.upper = np.broadcast_to(np.asarray(upper, dtype=float),
                                         (self.n, )).copy()
            if np.any(self.upper <= self.lower):
                raise OptimizationError('empty parameter bounds')
            self.span = self.upper - self.lower
        if spans is not None:
            spans = np.broadcast_to(np.asarray(spans, dtype=float),
                                    (self.n, )).copy()
            if not np.all(np.isfinite(spans) & (spans > 0)):
                raise OptimizationError('spans must be finite and > 0')
            self.span = spans
        self.v_max = float(v_max)
        self.scale = float(scale) if scale else 1.0
        self.move = float(move)
        self.iteration = 0
        self.x1 = None
        self.x2 = None
        self.low = None
        self.upp = None
        self.lam = 0.0
        self.rho = np.full(2, RHO_MIN)
        self.sub = None
        self.inner = 0

    def __repr__(self):
        return '<MMAState n=%i iteration=%i lambda=%.3g>' % \
            (self.n, self.iteration, self.lam)


def asymptotes(state, x):
    span = state.span
    if state.iteration < 2:
        low = x - ASY_INIT * span
        upp = x + ASY_INIT * span
    else:
        osc = (x - state.x1) * (state.x1 - state.x2)
        factor = np.ones_like(x)
        factor[osc > 0] = ASY_INCR
        factor[osc < 0] = ASY_DECR
        low = x - factor * (state.x1 - state.low)
        upp = x + factor * (state.upp - state.x1)
        low = np.clip(low, x - ASY_MAX * span, x - ASY_MIN * span)
        upp = np.clip(upp, x + ASY_MIN * span, x + ASY_MAX * span)
    return low, upp


def approximation(grad, x, low, upp, span, rho=RHO_MIN):
    '''
    MMA coefficients p, q of a function with gradient `grad` at `x`,
    with curvature `rho`.
    '''
    ux2 = (upp - x) ** 2
    xl2 = (x - low) ** 2
    plus = np.maximum(grad, 0.0)
    minus = np.maximum(-grad, 0.0)
    extra = rho / np.maximum(span, 1e-5)
    p = (1.001 * plus + 0.001 * minus + extra) * ux2
    q = (0.001 * plus + 1.001 * minus + extra) * xl2
    return p, q


def _value(p, q, low, upp, y):
    return np.sum(p / (upp - y) + q / (y - low))


def _primal(lam, p0, q0, p1, q1, low, upp, alpha, beta):
    P = np.sqrt(p0 + lam * p1)
    Q = np.sqrt(q0 + lam * q1)
    x = (P * low + Q * upp) / (P + Q)
    return np.clip(x, alpha, beta)


def _coefficients(state):
    sub = state.sub
    return [approximation(sub.grad[i], sub.x, sub.low, sub.upp,
                          state.span, state.rho[i]) for i in (0, 1)]


def _solve(state):
    sub = state.sub
    (p0, q0), (p1, q1) = _coefficients(state)
    b = _value(p1, q1, sub.low, sub.upp, sub.x) - sub.f[1]

    def residual(lam):
        xl = _primal(lam, p0, q0, p1, q1, sub.low, sub.upp,
                     sub.alpha, sub.beta)
        return _value(p1, q1, sub.low, sub.upp, xl) - b

    lam = 0.0
    if residual(0.0) > 0:
        lo, hi = 0.0, 1.0
        while residual(hi) > 0 and hi < DUAL_MAX:
            lo, hi = hi, hi * 2.0
        if residual(hi) > 0:
            log.warning('linearised volume constraint unreachable inside '
                        'the move limits')
            lam = hi
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if residual(mid) > 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= DUAL_TOL * max(1.0, hi):
                    break
            lam = hi
    state.lam = lam
    return _primal(lam, p0, q0, p1, q1, sub.low, sub.upp,
                   sub.alpha, sub.beta)


def mma_step(state, theta, J, dJ, V, dV):
    '''
    One MMA update. `J`, `dJ` is the objective with its gradient,
    `V`, `dV` the constrained quantity. Returns the next parameters
    and the updated state (the same object).
    '''
    x = np.asarray(theta, dtype=float)
    dJ = np.asarray(dJ, dtype=float)
    dV = np.asarray(dV, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(dJ)) and
            np.all(np.isfinite(dV)) and np.isfinite(J) and np.isfinite(V)):
        raise OptimizationError('non-finite values passed to the MMA step')

    low, upp = asymptotes(state, x)
    span = state.span
    alpha = np.maximum.reduce([low + ALBEFA * (x - low),
                               x - state.move * span,
                               state.lower])
    beta = np.minimum.reduce([upp - ALBEFA * (upp - x),
                              x + state.move * span,
                              state.upper])

    grad = (dJ / state.scale, dV / state.v_max)
    f = (J / state.scale, V / state.v_max - 1.0)
    state.sub = Subproblem(x.copy(), f, grad, low, upp, alpha, beta)
    n = max(state.n, 1)
    state.rho = np.array([max(RHO_MIN, 0.1 / n * np.sum(np.abs(g) * span))
                          for g in grad])
    state.inner = 0
    x_new = _solve(state)

    state.x2 = state.x1
    state.x1 = x.copy()
    state.low = low
    state.upp = upp
    state.iteration += 1
    return x_new, state


def approximate(state, y):
    '''
    Scaled objective and constraint approximations of the last
    subproblem, evaluated at `y`.
    '''
    sub = state.sub
    y = np.asarray(y, dtype=float)
    ret = []
    for i, (p, q) in enumerate(_coefficients(state)):
        ret.append(sub.f[i] + _value(p, q, sub.low, sub.upp, y) -
                   _value(p, q, sub.low, sub.upp, sub.x))
    return np.array(ret)


def tighten(state, y, J, V):
    '''
    Check the approximations of the last subproblem at `y`, where the
    true values are `J` and `V`. Returns None if both are conservative,
    otherwise raises the curvature of the failing ones and returns the
    solution of the tightened subproblem.
    '''
    sub = state.sub
    if sub is None:
        raise OptimizationError('no subproblem to tighten')
    y = np.asarray(y, dtype=float)
    f = np.array([J / state.scale, V / state.v_max - 1.0])
    gap = f - approximate(state, y)
    if np.all(gap <= CONSERVATIVE):
        return None
    d = np.sum((sub.upp - sub.low) * (y - sub.x) ** 2 /
               ((sub.upp - y) * (y - sub.low) * state.span))
    if not d > 0:
        return None
    for i in (0, 1):
        if gap[i] > CONSERVATIVE:
            delta = gap[i] / d
            state.rho[i] = min(RHO_GROW * (state.rho[i] + delta),
                               RHO_JUMP * state.rho[i])
    state.inner += 1
    log.debug('inner iteration %i, rho %s', state.inner, state.rho)
    return _solve(state)


def kkt_residual(state, theta, dJ, dV, lam=None):
    '''
    Scaled stationarity residual `|dJ + lambda dg|_inf / (1 + |dJ|_inf)`
    of the scaled problem; components pinned at a bound are skipped
    when the gradient pushes outwards.
    '''
    lam = state.lam if lam is None else lam
    gJ = np.asarray(dJ, dtype=float) / state.scale
    r = gJ + lam * np.asarray(dV, dtype=float) / state.v_max
    x = np.asarray(theta, dtype=float)
    r = np.where((x <= state.lower) & (r > 0), 0.0, r)
    r = np.where((x >= state.upper) & (r < 0), 0.0, r)
    if r.size == 0:
        return 0.0
    return float(np.abs(r).max() / (1.0 + np.abs(gJ).max()))
