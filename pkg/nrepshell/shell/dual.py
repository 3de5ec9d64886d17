'''
Forward-mode dual arrays
========================

A `Dual` carries a value array and a bundle of tangents, the
tangent direction axis goes first::

    value.shape == V
    tangent.shape == (T, ) + V

Only the operations the shell kernel uses are implemented. The
module level helpers (`einsum`, `cross`, `dot`, `sqrt`, `stack`)
accept plain ndarrays and duals alike, so the same kernel code
computes stiffness matrices and their derivatives.

Example, derivative of the area density w.r.t. all coordinates of
an element::

    x = seed_local(coords)    # tangents (S * 3, ...)
    density = kernel.metrics(x, d1, d2).sqrt_a
    density.tangent           # (S * 3, ) + density.value.shape
'''
import numpy as np


def _spread(tangent, ndim):
    # left-pad the value part of a tangent to `ndim` dimensions
    extra = ndim - (tangent.ndim - 1)
    if extra <= 0:
        return tangent
    shape = tangent.shape
    return tangent.reshape(shape[:1] + (1, ) * extra + shape[1:])


class Dual(object):
    '''
    Value with tangents. Arithmetic with ndarrays and scalars
    follows numpy broadcasting on the value part.
    '''
    __array_ufunc__ = None
    __slots__ = ('value', 'tangent')

    def __init__(self, value, tangent):
        value = np.asarray(value, dtype=float)
        tangent = np.asarray(tangent, dtype=float)
        tangent = _spread(tangent, value.ndim)
        if tangent.shape[1:] != value.shape:
            tangent = np.broadcast_to(tangent,
                                      tangent.shape[:1] + value.shape)
        self.value = value
        self.tangent = tangent

    def __repr__(self):
        return '<Dual value%s tangent%s>' % (self.value.shape,
                                             self.tangent.shape)

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    @property
    def directions(self):
        return self.tangent.shape[0]

    def __neg__(self):
        return Dual(-self.value, -self.tangent)

    def __add__(self, other):
        if isinstance(other, Dual):
            value = self.value + other.value
            return Dual(value,
                        _spread(self.tangent, value.ndim) +
                        _spread(other.tangent, value.ndim))
        value = self.value + other
        return Dual(value, _spread(self.tangent, value.ndim))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            value = self.value * other.value
            n = value.ndim
            return Dual(value,
                        _spread(self.tangent, n) * other.value +
                        self.value * _spread(other.tangent, n))
        value = self.value * other
        return Dual(value, _spread(self.tangent, value.ndim) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            value = self.value / other.value
            n = value.ndim
            return Dual(value,
                        (_spread(self.tangent, n) -
                         value * _spread(other.tangent, n)) / other.value)
        value = self.value / other
        return Dual(value, _spread(self.tangent, value.ndim) / other)

    def __rtruediv__(self, other):
        value = other / self.value
        return Dual(value,
                    -_spread(self.tangent, value.ndim) * value / self.value)

    __div__ = __truediv__
    __rdiv__ = __rtruediv__

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key, )
        return Dual(self.value[key], self.tangent[(slice(None), ) + key])

    def sum(self, axis):
        if axis is None or axis >= 0:
            raise ValueError('Dual.sum() takes negative axes only')
        return Dual(self.value.sum(axis), self.tangent.sum(axis))

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        value = self.value.reshape(shape)
        return Dual(value,
                    self.tangent.reshape((self.directions, ) + value.shape))


def value_of(x):
    return x.value if isinstance(x, Dual) else np.asarray(x)


def einsum(spec, *operands):
    '''
    `numpy.einsum` with dual operands, explicit output subscripts
    required, no ellipsis. The letter `Z` is reserved.
    '''
    inputs, output = spec.replace(' ', '').split('->')
    inputs = inputs.split(',')
    values = [value_of(x) for x in operands]
    optimize = len(operands) > 2
    value = np.einsum(spec, *values, optimize=optimize)
    tangent = None
    for k, x in enumerate(operands):
        if not isinstance(x, Dual):
            continue
        subs = list(inputs)
        subs[k] = 'Z' + subs[k]
        args = list(values)
        args[k] = x.tangent
        term = np.einsum('%s->Z%s' % (','.join(subs), output), *args,
                         optimize=optimize)
        tangent = term if tangent is None else tangent + term
    if tangent is None:
        return value
    return Dual(value, tangent)


def dot(a, b):
    '''
    Inner product over the last axis with broadcasting.
    '''
    return (a * b).sum(-1)


def cross(a, b):
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.cross(a, b)
    av, bv = value_of(a), value_of(b)
    value = np.cross(av, bv)
    tangent = 0.0
    if isinstance(a, Dual):
        tangent = tangent + np.cross(_spread(a.tangent, value.ndim), bv)
    if isinstance(b, Dual):
        tangent = tangent + np.cross(av, _spread(b.tangent, value.ndim))
    return Dual(value, tangent)


def sqrt(x):
    if not isinstance(x, Dual):
        return np.sqrt(x)
    value = np.sqrt(x.value)
    return Dual(value, x.tangent / (2.0 * value))


def stack(items, axis):
    '''
    `numpy.stack` along a negative axis.
    '''
    if axis >= 0:
        raise ValueError('stack() takes negative axes only')
    duals = [x for x in items if isinstance(x, Dual)]
    values = [value_of(x) for x in items]
    if not duals:
        return np.stack(values, axis=axis)
    shape = np.broadcast_shapes(*[v.shape for v in values])
    count = duals[0].directions
    values = [np.broadcast_to(v, shape) for v in values]
    tangents = []
    for x in items:
        if isinstance(x, Dual):
            t = np.broadcast_to(_spread(x.tangent, len(shape)),
                                (count, ) + shape)
        else:
            t = np.zeros((count, ) + shape)
        tangents.append(t)
    return Dual(np.stack(values, axis=axis), np.stack(tangents, axis=axis))


def seed_local(coords):
    '''
    Seed the vertex coordinates of a chunk of elements, (C, S, 3),
    with one tangent per local coordinate: the tangent axis has
    S * 3 directions ordered vertex-major.
    '''
    coords = np.asarray(coords, dtype=float)
    C, S, D = coords.shape
    eye = np.eye(S * D).reshape(S * D, 1, S, D)
    return Dual(coords, np.broadcast_to(eye, (S * D, C, S, D)))


def seed_direction(coords, direction):
    '''
    Seed `coords` with a single tangent `direction` of the same shape.
    '''
    coords = np.asarray(coords, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return Dual(coords, direction.reshape((1, ) + coords.shape))
