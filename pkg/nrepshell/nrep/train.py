'''
Full-batch network fitting, mean squared error and Adam.
'''
import logging

import numpy as np

from nrepshell.exceptions import DimensionError
from nrepshell.exceptions import FitDivergenceError
from nrepshell.exceptions import NetworkError
from nrepshell.nrep import backward
from nrepshell.nrep import propagate

log = logging.getLogger(__name__)


class TrainingConfig(object):
    '''
    Fit settings.

    * `epochs` -- full-batch Adam steps, >= 1
    * `learning_rate` -- Adam step size, 0 freezes the parameters
    * `seed` -- used by the callers to initialise the network
    * `polish` -- solve the affine output layer by least squares
      after the Adam steps
    * `report_every` -- loss trace interval, epochs
    '''

    def __init__(self, epochs=2000, learning_rate=0.01, seed=0,
                 polish=False, report_every=100,
                 beta1=0.9, beta2=0.999, epsilon=1e-8):
        if int(epochs) < 1:
            raise NetworkError('epochs must be >= 1, got %r' % epochs)
        if not float(learning_rate) >= 0:
            raise NetworkError('learning rate must be >= 0, got %r'
                               % learning_rate)
        if int(report_every) < 1:
            raise NetworkError('report_every must be >= 1')
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.seed = seed
        self.polish = bool(polish)
        self.report_every = int(report_every)
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon

    def __repr__(self):
        return '<TrainingConfig epochs=%i lr=%g seed=%r polish=%s>' % \
            (self.epochs, self.learning_rate, self.seed, self.polish)


class Adam(object):
    '''
    Adam over one flat parameter vector.
    '''

    def __init__(self, size, lr, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta, grad):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        denom = np.sqrt(self.v / bc2) + self.epsilon
        return theta - (self.lr / bc1) * self.m / denom


def _targets(net, inputs, targets):
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if targets.shape != (len(inputs), net.n_out):
        raise DimensionError('targets must be (%i, %i), got %s'
                             % (len(inputs), net.n_out, targets.shape))
    return targets


def mse(net, inputs, targets):
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = propagate(net, inputs)[0]
    r = y - _targets(net, inputs, targets)
    return float(np.mean(r * r))


def polish(net, inputs, targets):
    '''
    Least-squares solve of the output layer with the hidden layers
    fixed.
    '''
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = _targets(net, inputs, targets)
    hidden = propagate(net, inputs)[1][-1]
    A = np.hstack((hidden, np.ones((len(hidden), 1))))
    sol = np.linalg.lstsq(A, targets, rcond=None)[0]
    weights = list(net.weights)
    biases = list(net.biases)
    weights[-1] = sol[:-1].T
    biases[-1] = sol[-1]
    return net.replace(weights=weights, biases=biases)


def fit(net, inputs, targets, config=None, trace=None):
    '''
    Fit the raw outputs of `net` to `targets` (B, n_out), returns the
    trained network and its final MSE. For heightfield networks the
    targets are the heights.

    `trace`, if given, is a list receiving `(epoch, mse)` pairs every
    `config.report_every` steps and after the last one.

    Raises `FitDivergenceError` when the loss becomes non-finite.
    '''
    config = config or TrainingConfig()
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    if inputs.shape[1] != net.n_in:
        raise DimensionError('%r takes (batch, %i) inputs, got %s'
                             % (net, net.n_in, inputs.shape))
    targets = _targets(net, inputs, targets)
    if config.learning_rate == 0:
        log.warning('learning rate is 0, parameters stay unchanged')

    theta = net.theta
    adam = Adam(theta.size, config.learning_rate,
                config.beta1, config.beta2, config.epsilon)
    losses = []
    current = net
    for epoch in range(config.epochs):
        y, layers, slopes = propagate(current, inputs)
        r = y - targets
        loss = float(np.mean(r * r))
        losses.append(loss)
        if not np.isfinite(loss):
            raise FitDivergenceError('loss diverged at epoch %i' % epoch,
                                     losses=losses)
        if trace is not None and epoch % config.report_every == 0:
            trace.append((epoch, loss))
        grad = backward(current, layers, slopes, 2.0 * r / r.size)
        theta = adam.step(theta, grad)
        current = net.with_params(theta)

    if config.polish:
        current = polish(current, inputs, targets)
    final = mse(current, inputs, targets)
    if not np.isfinite(final):
        raise FitDivergenceError('loss diverged after %i epochs'
                                 % config.epochs, losses=losses + [final])
    if trace is not None:
        trace.append((config.epochs, final))
    log.info('fit %r: %i epochs, mse %.6g', net, config.epochs, final)
    return current, final
