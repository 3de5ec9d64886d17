import csv
import os

from nrepshell import config
from nrepshell.bench import presets
from nrepshell.cli import EXIT_CONFIG
from nrepshell.cli import EXIT_FAILURE
from nrepshell.cli import EXIT_GRADIENT
from nrepshell.cli import EXIT_MAX_ITER
from nrepshell.cli import EXIT_OK
from nrepshell.cli import get_parser
from nrepshell.cli import main
from nrepshell.nrep import save_network

STRIP = '''
[general]
version = 1
seed = 1

[experiment]
preset = strip
nx = 8
fit_tolerance = 1

[network]
layers = 2 3 3 1

[training]
epochs = 50
'''


def write(tmpdir, text, name='run.ini'):
    path = tmpdir.join(name)
    path.write(text)
    return str(path)


def rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def summary(path):
    with open(os.path.join(path, 'summary.txt')) as f:
        return dict(x.split('=', 1) for x in f.read().splitlines())


class TestParser(object):

    def test_commands(self):
        args = get_parser().parse_args(['optimize', '-c', 'x.ini', '-vv',
                                        '--seed', '4', '--threads', '2'])
        assert args.command == 'optimize'
        assert args.config == 'x.ini'
        assert args.verbose == 2
        assert args.seed == 4
        assert args.threads == 2
        assert args.deterministic is None


class TestMain(object):

    def setup_method(self):
        self.saved = (config.threads, config.deterministic)

    def teardown_method(self):
        config.threads, config.deterministic = self.saved

    def test_missing_config(self, tmpdir):
        assert main(['optimize', '-c', str(tmpdir.join('none.ini')),
                     '-o', str(tmpdir)]) == EXIT_CONFIG

    def test_malformed_config(self, tmpdir):
        path = write(tmpdir, '[general\nversion = 1\n')
        assert main(['optimize', '-c', path, '-o', str(tmpdir)]) == \
            EXIT_CONFIG
        path = write(tmpdir, '[general]\nversion = 1\n[experiment]\n'
                             'poisson = 0.7\n')
        assert main(['optimize', '-c', path, '-o', str(tmpdir)]) == \
            EXIT_CONFIG

    def test_bad_threads(self, tmpdir):
        path = write(tmpdir, STRIP)
        assert main(['gradcheck', '-c', path, '-o', str(tmpdir),
                     '--threads', '0']) == EXIT_CONFIG

    def test_gradcheck(self, tmpdir):
        out = str(tmpdir.join('check'))
        path = write(tmpdir, STRIP + '[gradcheck]\ndirections = 3\n')
        assert main(['gradcheck', '-c', path, '-o', out,
                     '--deterministic']) == EXIT_OK
        assert config.deterministic is True
        table = rows(os.path.join(out, 'gradcheck.csv'))
        assert table[0] == ['direction', 'analytic', 'finite_difference',
                            'relative_error']
        assert len(table) == 4
        assert len(rows(os.path.join(out, 'gradcheck_volume.csv'))) == 4
        assert summary(out)['status'] == 'success'

    def test_gradcheck_corrupted(self, tmpdir):
        out = str(tmpdir.join('check'))
        path = write(tmpdir, STRIP + '[gradcheck]\ndirections = 2\n'
                                     'corrupt = 0.5\n')
        assert main(['gradcheck', '-c', path, '-o', out]) == EXIT_GRADIENT
        table = rows(os.path.join(out, 'gradcheck.csv'))
        assert all(float(x[3]) > 0.3 for x in table[1:])
        assert summary(out)['status'] == 'failure'

    def test_optimize(self, tmpdir):
        out = str(tmpdir.join('strip'))
        path = write(tmpdir, STRIP + '[optimizer]\nmax_iterations = 2\n')
        assert main(['optimize', '-c', path, '-o', out]) in (EXIT_OK,
                                                             EXIT_MAX_ITER)
        assert os.path.isfile(os.path.join(out, 'shape.obj'))
        assert summary(out)['seed'] == '1'

    def test_fit_tolerance_missed(self, tmpdir):
        out = str(tmpdir.join('strip'))
        path = write(tmpdir, STRIP.replace('fit_tolerance = 1',
                                           'fit_tolerance = 1e-30'))
        assert main(['optimize', '-c', path, '-o', out]) == EXIT_FAILURE
        result = summary(out)
        assert result['status'] == 'failure'
        assert 'fit MSE' in result['error']
        assert not os.path.isfile(os.path.join(out, 'shape.obj'))

    def test_fit(self, tmpdir):
        out = str(tmpdir.join('fit'))
        path = write(tmpdir, '''
[general]
version = 1

[network]
layers = 2 4 1

[training]
epochs = 10
report_every = 10

[fit]
nx = 4
ny = 4
''')
        assert main(['fit', '-c', path, '-o', out]) == EXIT_OK
        report = rows(os.path.join(out, 'fit_report.csv'))
        assert report[0] == ['epoch', 'mse']
        assert [x[0] for x in report[1:]] == ['0', '10']
        assert summary(out)['params'] == '17'
        assert os.path.isfile(os.path.join(out, 'network.txt'))

    def test_lattice_without_network(self, tmpdir):
        path = write(tmpdir, '[general]\nversion = 1\n[experiment]\n'
                             'preset = roof\n')
        assert main(['lattice', '-c', path, '-o', str(tmpdir)]) == \
            EXIT_CONFIG
        path = write(tmpdir, '[general]\nversion = 1\n[experiment]\n'
                             'preset = roof\n[lattice]\nnetwork = %s\n'
                     % tmpdir.join('missing.txt'))
        assert main(['lattice', '-c', path, '-o', str(tmpdir)]) == \
            EXIT_CONFIG

    def test_lattice(self, tmpdir):
        network = str(tmpdir.join('roof.txt'))
        save_network(presets.roof().network(), network)
        out = str(tmpdir.join('lattice'))
        path = write(tmpdir, '''
[general]
version = 1

[experiment]
preset = roof

[training]
epochs = 20

[lattice]
network = %s
map_layers = 3 6 3
levels = 1
''' % network)
        assert main(['lattice', '-c', path, '-o', out]) == EXIT_OK
        result = summary(out)
        assert result['nodes'] == '107'
        assert result['struts'] == str(8 * 4 * 4 * 2)
        assert result['couplings'] == '50'
        assert float(result['coupling_residual']) < 1e-9
        for name in ('lower.obj', 'upper.obj', 'lattice.txt',
                     'map_network.txt'):
            assert os.path.isfile(os.path.join(out, name))

    def test_lattice_without_supports(self, tmpdir):
        network = str(tmpdir.join('roof.txt'))
        save_network(presets.roof().network(), network)
        out = str(tmpdir.join('lattice'))
        path = write(tmpdir, '''
[general]
version = 1

[experiment]
nx = 8
ny = 8

[training]
epochs = 20

[lattice]
network = %s
map_layers = 3 6 3
levels = 1
''' % network)
        assert main(['lattice', '-c', path, '-o', out]) == EXIT_OK
        assert summary(out)['nodes'] == '107'
