'''
Tensor-product Gauss rules on the element reference square [0, 1]^2.
'''
import math
from collections import namedtuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from nrepshell.exceptions import MeshError

QuadratureRule = namedtuple('QuadratureRule', ('points', 'weights', 'order'))

_cache = {}


def quadrature(order):
    '''
    Gauss rule exact for polynomials of degree `order` in each
    direction. Weights sum to the reference area, 1.
    '''
    if order < 1:
        raise MeshError('quadrature order must be >= 1, got %s' % order)
    order = int(order)
    if order in _cache:
        return _cache[order]
    count = int(math.ceil((order + 1) / 2.0))
    x, w = leggauss(count)
    x = (x + 1.0) / 2.0
    w = w / 2.0
    # t1 runs fastest
    t2, t1 = np.meshgrid(x, x, indexing='ij')
    w2, w1 = np.meshgrid(w, w, indexing='ij')
    points = np.stack((t1.ravel(), t2.ravel()), axis=-1)
    weights = (w1 * w2).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    rule = QuadratureRule(points, weights, order)
    _cache[order] = rule
    return rule
