'''
Built-in experiment configurations.

All shells are aluminium-like (E = 7e7, nu = 0.35) with thickness
0.1 under a gravity load of intensity 10 per unit projected area.

* `strip()` -- 20 x 1 strip, 32 x 2 elements, short edges pinned,
  V <= 1.05 V_flat, compared with the catenary
* `roof()` -- 20 x 20 roof, 8 x 8 elements, mid-edge supports,
  V <= 1.2 V_flat, the initial dome scaled to compliance 130.444
* `roof_variant()` -- roofs on 16 x 16 grids with corner or
  mid-edge supports, with or without a central opening, under a
  uniform or a regional load
* `surface_fit()` -- network fitting of `5 cos(x / 2) cos(y / 2)`
'''
import math

from nrepshell.bench import ExperimentSpec
from nrepshell.exceptions import ModelError
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import TrainingConfig

PHASE = math.pi / 4
ROOF_COMPLIANCE = 130.444

STRIP_ACTIVATIONS = {'relu,relu': ('relu', 'relu'),
                     'sinusoidal,relu': ('sinusoidal', 'relu'),
                     'sinusoidal,sinusoidal': ('sinusoidal', 'sinusoidal')}
LOADS = ('uniform', 'regional')
SUPPORTS = ('corners', 'mid-edges')


def activation(kind, omega=1.0, delta=PHASE):
    if kind == 'sinusoidal':
        return ActivationSpec(kind, omega, delta)
    return ActivationSpec(kind)


def strip(activations='sinusoidal,sinusoidal', width=5, seed=0):
    '''
    Arch strip. `activations` is one of `STRIP_ACTIVATIONS`, `width`
    the size of both hidden layers.
    '''
    if activations not in STRIP_ACTIVATIONS:
        raise ModelError('unknown strip activations %r, expected one of %s'
                         % (activations, ', '.join(STRIP_ACTIVATIONS)))
    return ExperimentSpec(name='strip',
                          nx=32, ny=2,
                          extents=(20.0, 1.0),
                          supports='short-edges',
                          volume_factor=1.05,
                          layers=(2, width, width, 1),
                          activations=[activation(x) for x in
                                       STRIP_ACTIVATIONS[activations]],
                          seed=seed,
                          initial_rise=1.0,
                          rise_shape='arch',
                          reference='catenary')


def roof(nx=8, seed=0):
    '''
    Square roof with supports at the edge midpoints. `nx` elements per
    side; 8, 16 and 32 make the mesh independence study.
    The initial dome is scaled so that its compliance is
    `ROOF_COMPLIANCE`.
    '''
    return ExperimentSpec(name='roof-%i' % nx,
                          nx=nx, ny=nx,
                          extents=(20.0, 20.0),
                          supports='mid-edges',
                          volume_factor=1.2,
                          layers=(2, 5, 5, 1),
                          activations=[activation('sinusoidal'),
                                       activation('relu')],
                          seed=seed,
                          initial_rise=1.0,
                          rise_shape='dome',
                          initial_compliance=ROOF_COMPLIANCE)


# central opening of the 16 x 16 variants, eta in [0.375, 0.625]^2
OPENING = (6, 6, 10, 10)


def _regions(opening):
    size = 0.1
    if not opening:
        # next to the four edge midpoints
        centres = ((0.5, size / 2), (1 - size / 2, 0.5),
                   (0.5, 1 - size / 2), (size / 2, 0.5))
    else:
        lo, hi = OPENING[0] / 16.0, OPENING[2] / 16.0
        centres = ((lo - size / 2, lo - size / 2),
                   (hi + size / 2, lo - size / 2),
                   (hi + size / 2, hi + size / 2),
                   (lo - size / 2, hi + size / 2))
    return [(max(x - size / 2, 0.0), max(y - size / 2, 0.0),
             min(x + size / 2, 1.0), min(y + size / 2, 1.0))
            for x, y in centres]


def roof_variant(supports='corners', opening=False, load='uniform',
                 seed=0):
    '''
    Roof on a 16 x 16 grid. Regional loads act on four 0.1 x 0.1
    parametric squares next to the edge midpoints, or next to the
    opening corners when there is an opening.
    '''
    if supports not in SUPPORTS:
        raise ModelError('roof supports must be one of %s'
                         % ', '.join(SUPPORTS))
    if load not in LOADS:
        raise ModelError('roof load must be one of %s' % ', '.join(LOADS))
    name = 'roof-%s-%s%s' % (load, supports, '-opening' if opening else '')
    return roof(16, seed).replace(name=name,
                                  supports=supports,
                                  holes=(OPENING, ) if opening else (),
                                  initial_compliance=None,
                                  load_regions=_regions(opening)
                                  if load == 'regional' else None)


# the three layouts run under both loads
VARIANTS = (('corners', False), ('corners', True), ('mid-edges', True))


def roof_variants(seed=0):
    return [roof_variant(s, o, l, seed) for l in LOADS for s, o in VARIANTS]


def surface_fit(omega=0.5, seed=0, epochs=20000):
    '''
    Network, sampling grid and training settings of the surface
    fitting study; returns `(net, nx, ny, training)`.
    '''
    net = MLPNetwork((2, 10, 10, 10, 1),
                     activation('sinusoidal', omega),
                     'heightfield',
                     (20.0, 20.0))
    return net, 64, 64, TrainingConfig(epochs, 0.01, seed)


PRESETS = {'strip': strip,
           'roof': roof}
for _load in LOADS:
    for _supports, _opening in VARIANTS:
        PRESETS[roof_variant(_supports, _opening, _load).name] = \
            (lambda s=_supports, o=_opening, l=_load, seed=0:
             roof_variant(s, o, l, seed))


def preset(name, seed=0):
    '''
    Experiment by preset name, see `PRESETS`.
    '''
    if name not in PRESETS:
        raise ModelError('unknown preset %r, expected one of %s'
                         % (name, ', '.join(sorted(PRESETS))))
    return PRESETS[name](seed=seed)
