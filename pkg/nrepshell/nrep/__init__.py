'''
Neural parametric representation
================================

A small multilayer perceptron maps parametric coordinates to the
physical mid-surface::

    c_i = W_i h_(i-1) + b_i
    h_i = act_i(c_i)          # hidden layers
    y = c_L                   # affine output layer

Hidden activations are fixed, sinusoidal ones read
`sin(omega * c + delta)`.

Output modes:

* `heightfield` -- 2 inputs, 1 output; the physical point is
  `(Lx * eta1, Ly * eta2, y)` with the extents stored in the network
* `surface3d` -- 2 inputs, 3 outputs, the output is the point
* `map3d` -- 3 inputs, 3 outputs, volume maps for lattices

Parameters flatten layer by layer, weights first (row-major,
`W_i` is fan_out x fan_in), then biases. `MLPNetwork.theta` and
`MLPNetwork.with_params()` convert both ways, every vector-valued
API of the package uses that order.
'''
import logging
import math
from collections import namedtuple

import numpy as np

from nrepshell.exceptions import DimensionError
from nrepshell.exceptions import NetworkError

log = logging.getLogger(__name__)

ACTIVATIONS = ('sinusoidal', 'relu', 'tanh', 'identity')
OUTPUT_MODES = {'heightfield': (2, 1),
                'surface3d': (2, 3),
                'map3d': (3, 3)}


class ActivationSpec(namedtuple('ActivationSpec',
                                ('kind', 'omega', 'delta'))):
    '''
    Fixed activation of a hidden layer. `omega` and `delta` are used
    by the sinusoidal kind only.
    '''

    def __new__(cls, kind, omega=1.0, delta=0.0):
        if kind not in ACTIVATIONS:
            raise NetworkError('unknown activation %r, expected one of %s'
                               % (kind, ', '.join(ACTIVATIONS)))
        omega = float(omega)
        delta = float(delta)
        if kind == 'sinusoidal' and not omega > 0:
            raise NetworkError('sinusoidal activation needs omega > 0, '
                               'got %r' % omega)
        return super(ActivationSpec, cls).__new__(cls, kind, omega, delta)

    def __call__(self, c):
        '''
        Return activation values and derivatives at `c`.
        '''
        if self.kind == 'sinusoidal':
            arg = self.omega * c + self.delta
            return np.sin(arg), self.omega * np.cos(arg)
        if self.kind == 'relu':
            return np.maximum(c, 0.0), (c > 0).astype(float)
        if self.kind == 'tanh':
            h = np.tanh(c)
            return h, 1.0 - h * h
        return c, np.ones_like(c)


def count_params(net):
    '''
    Number of trainable parameters of a network or a list of layer
    sizes.
    '''
    sizes = net.layer_sizes if isinstance(net, MLPNetwork) else list(net)
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


class MLPNetwork(object):
    '''
    Immutable network description and parameters.

    `activations` is one `ActivationSpec` per hidden layer, or a
    single spec used for all of them. Missing weights and biases are
    zeros, see `init_params()`.
    '''

    def __init__(self, layer_sizes, activations,
                 output_mode='heightfield',
                 extents=(1.0, 1.0),
                 weights=None,
                 biases=None):
        sizes = [int(x) for x in layer_sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise NetworkError('invalid layer sizes %r' % (layer_sizes, ))
        if output_mode not in OUTPUT_MODES:
            raise NetworkError('unknown output mode %r' % (output_mode, ))
        if (sizes[0], sizes[-1]) != OUTPUT_MODES[output_mode]:
            raise NetworkError('%s networks need %i inputs and %i outputs, '
                               'got %r' % ((output_mode, ) +
                                           OUTPUT_MODES[output_mode] +
                                           (sizes, )))
        if isinstance(activations, ActivationSpec):
            activations = [activations] * (len(sizes) - 2)
        activations = tuple(activations)
        if len(activations) != len(sizes) - 2:
            raise NetworkError('%i hidden layers need %i activations, got %i'
                               % (len(sizes) - 2, len(sizes) - 2,
                                  len(activations)))
        for spec in activations:
            if not isinstance(spec, ActivationSpec):
                raise NetworkError('activation %r is not an ActivationSpec'
                                   % (spec, ))
        extents = tuple(float(x) for x in extents)
        if len(extents) != 2 or min(extents) <= 0:
            raise NetworkError('extents must be two positive lengths')

        shapes = list(zip(sizes[1:], sizes[:-1]))
        if weights is None:
            weights = [np.zeros(s) for s in shapes]
        if biases is None:
            biases = [np.zeros(s[0]) for s in shapes]
        weights = [np.array(w, dtype=float) for w in weights]
        biases = [np.array(b, dtype=float) for b in biases]
        if [w.shape for w in weights] != shapes or \
                [b.shape for b in biases] != [(s[0], ) for s in shapes]:
            raise NetworkError('parameter shapes do not match layers %r'
                               % (sizes, ))
        for x in weights + biases:
            x.setflags(write=False)
        self.layer_sizes = sizes
        self.activations = activations
        self.output_mode = output_mode
        self.extents = extents
        self.weights = weights
        self.biases = biases

    def __repr__(self):
        return '<MLPNetwork %s %s %s>' % (self.layer_sizes,
                                          self.output_mode,
                                          '/'.join(a.kind for a in
                                                   self.activations))

    @property
    def n_in(self):
        return self.layer_sizes[0]

    @property
    def n_out(self):
        return self.layer_sizes[-1]

    @property
    def nparams(self):
        return count_params(self)

    @property
    def theta(self):
        '''
        Flattened parameters.
        '''
        ret = []
        for w, b in zip(self.weights, self.biases):
            ret.append(w.ravel())
            ret.append(b)
        return np.concatenate(ret)

    def with_params(self, theta):
        '''
        Same network with the flattened parameters `theta`.
        '''
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape != (self.nparams, ):
            raise DimensionError('expected %i parameters, got %i'
                                 % (self.nparams, theta.size))
        weights = []
        biases = []
        offset = 0
        for fan_out, fan_in in zip(self.layer_sizes[1:],
                                   self.layer_sizes[:-1]):
            size = fan_out * fan_in
            weights.append(theta[offset:offset + size]
                           .reshape(fan_out, fan_in))
            offset += size
            biases.append(theta[offset:offset + fan_out])
            offset += fan_out
        return self.replace(weights=weights, biases=biases)

    def replace(self, **kwarg):
        args = {'layer_sizes': self.layer_sizes,
                'activations': self.activations,
                'output_mode': self.output_mode,
                'extents': self.extents,
                'weights': self.weights,
                'biases': self.biases}
        args.update(kwarg)
        return MLPNetwork(**args)


def _inputs(net, inputs):
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[None, :]
    if inputs.ndim != 2 or inputs.shape[1] != net.n_in:
        raise DimensionError('%r takes (batch, %i) inputs, got %s'
                             % (net, net.n_in, inputs.shape))
    return inputs


def propagate(net, inputs):
    '''
    Raw forward pass. Returns the outputs (B, n_out), the layer
    inputs h_(i-1) and the activation derivatives of every hidden
    layer, the latter two are needed by the backward passes.
    '''
    h = _inputs(net, inputs)
    layers = []
    slopes = []
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        layers.append(h)
        c = h.dot(w.T) + b
        if i == last:
            h = c
        else:
            h, slope = net.activations[i](c)
            slopes.append(slope)
    return h, layers, slopes


def forward(net, inputs):
    '''
    Physical coordinates of parametric `inputs` (B, n_in), (B, 3)
    for the surface modes.
    '''
    inputs = _inputs(net, inputs)
    y = propagate(net, inputs)[0]
    if net.output_mode == 'heightfield':
        Lx, Ly = net.extents
        return np.stack((inputs[:, 0] * Lx, inputs[:, 1] * Ly, y[:, 0]),
                        axis=-1)
    return y


def backward(net, layers, slopes, grad):
    '''
    Parameter gradient of `sum(grad * y)` over the batch for upstream
    gradients `grad` (B, n_out) or (B, K, n_out). The extra K axis
    keeps one gradient per sample and row: the result is then
    (B, K, P), otherwise (P, ).
    '''
    batched = grad.ndim == 3
    parts = []
    for i in range(len(net.weights) - 1, -1, -1):
        h = layers[i]
        if batched:
            dw = np.einsum('bko,bi->bkoi', grad, h)
            parts.append((dw.reshape(grad.shape[:2] + (-1, )), grad))
        else:
            parts.append((grad.T.dot(h).ravel(), grad.sum(axis=0)))
        if i > 0:
            grad = grad.dot(net.weights[i])
            grad = grad * (slopes[i - 1][:, None, :] if batched
                           else slopes[i - 1])
    parts.reverse()
    flat = []
    for dw, db in parts:
        flat.append(dw)
        flat.append(db)
    return np.concatenate(flat, axis=-1)


def jacobian_wrt_params(net, inputs):
    '''
    Exact derivatives of the raw outputs w.r.t. the flattened
    parameters, (B * n_out, P). Rows are sample-major: row
    `b * n_out + k` is output `k` of sample `b`. For heightfield
    networks these are the z rows.
    '''
    y, layers, slopes = propagate(net, inputs)
    B, K = y.shape
    seed = np.broadcast_to(np.eye(K), (B, K, K))
    return backward(net, layers, slopes, seed).reshape(B * K, -1)


def _bound(net, layer, fan_in):
    spec = net.activations[layer] if layer < len(net.activations) else None
    if spec is not None and spec.kind == 'sinusoidal':
        return math.sqrt(6.0 / fan_in) / spec.omega
    if spec is not None and spec.kind == 'relu':
        return math.sqrt(6.0 / fan_in)
    return math.sqrt(3.0 / fan_in)


def init_params(net, seed):
    '''
    Random parameters, reproducible from `seed`.

    Weights and biases of a layer feeding a sinusoidal activation are
    uniform in +-sqrt(6 / fan_in) / omega, ReLU layers use
    +-sqrt(6 / fan_in), tanh and affine output layers
    +-sqrt(3 / fan_in).
    '''
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for i, (fan_out, fan_in) in enumerate(zip(net.layer_sizes[1:],
                                              net.layer_sizes[:-1])):
        bound = _bound(net, i, fan_in)
        weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, fan_out))
    return net.replace(weights=weights, biases=biases)


def init_bounds(net):
    '''
    Per-parameter bounds used by `init_params()`, flattened.
    '''
    ret = []
    for i, (fan_out, fan_in) in enumerate(zip(net.layer_sizes[1:],
                                              net.layer_sizes[:-1])):
        ret.append(np.full(fan_out * fan_in + fan_out,
                           _bound(net, i, fan_in)))
    return np.concatenate(ret)


from nrepshell.nrep.train import TrainingConfig  # noqa: E402
from nrepshell.nrep.train import fit  # noqa: E402
from nrepshell.nrep.io import save_network  # noqa: E402
from nrepshell.nrep.io import load_network  # noqa: E402

__all__ = ['ActivationSpec',
           'MLPNetwork',
           'TrainingConfig',
           'ACTIVATIONS',
           'OUTPUT_MODES',
           'count_params',
           'forward',
           'jacobian_wrt_params',
           'init_params',
           'init_bounds',
           'fit',
           'save_network',
           'load_network']
