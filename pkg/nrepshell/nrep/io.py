'''
Self-describing text format for networks::

    # nrepshell network
    layers 2 5 5 1
    activation sinusoidal 0.5 0.78539816339744828
    activation sinusoidal 0.5 0.78539816339744828
    output heightfield
    extents 20 1
    params 51
    0.12345678901234566
    ...

One parameter per line in the flattening order of `MLPNetwork.theta`,
17 significant digits, so a saved network loads back bit-exact.
'''
import logging

from nrepshell.exceptions import NetworkError
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork

log = logging.getLogger(__name__)

HEADER = '# nrepshell network'


def dumps(net):
    lines = [HEADER,
             'layers %s' % ' '.join(str(x) for x in net.layer_sizes)]
    for spec in net.activations:
        lines.append('activation %s %.17g %.17g' % spec)
    lines.append('output %s' % net.output_mode)
    lines.append('extents %.17g %.17g' % net.extents)
    theta = net.theta
    lines.append('params %i' % theta.size)
    lines.extend('%.17g' % x for x in theta)
    return '\n'.join(lines) + '\n'


def loads(text):
    lines = [x.strip() for x in text.splitlines()]
    if not lines or lines[0] != HEADER:
        raise NetworkError('not a network file, header %r'
                           % (lines[0] if lines else '', ))
    layers = None
    activations = []
    output = None
    extents = None
    params = None
    it = iter(lines[1:])
    for line in it:
        if not line or line.startswith('#'):
            continue
        key, _, value = line.partition(' ')
        try:
            if key == 'layers':
                layers = [int(x) for x in value.split()]
            elif key == 'activation':
                kind, omega, delta = value.split()
                activations.append(ActivationSpec(kind, float(omega),
                                                  float(delta)))
            elif key == 'output':
                output = value.strip()
            elif key == 'extents':
                extents = [float(x) for x in value.split()]
            elif key == 'params':
                count = int(value)
                params = [float(next(it)) for _ in range(count)]
                break
            else:
                raise NetworkError('unknown network record %r' % key)
        except (ValueError, StopIteration):
            raise NetworkError('malformed network record %r' % line)
    if None in (layers, output, extents, params):
        raise NetworkError('incomplete network file')
    net = MLPNetwork(layers, activations, output, extents)
    return net.with_params(params)


def save_network(net, path):
    with open(path, 'w') as f:
        f.write(dumps(net))
    log.debug('saved %r to %s', net, path)


def load_network(path):
    with open(path, 'r') as f:
        return loads(f.read())
