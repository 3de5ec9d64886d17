import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nrepshell.bench import ExperimentSpec
from nrepshell.bench import calibrate
from nrepshell.bench import catenary_reference
from nrepshell.bench import centreline
from nrepshell.bench import fit_surface
from nrepshell.bench import initial_design
from nrepshell.bench import mse_to_catenary
from nrepshell.bench import navier_center_deflection
from nrepshell.bench import omega_study
from nrepshell.bench import run_experiment
from nrepshell.bench import surface_target
from nrepshell.bench import sweep
from nrepshell.bench import presets
from nrepshell.exceptions import FitToleranceError
from nrepshell.exceptions import ModelError
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import TrainingConfig
from nrepshell.nrep import forward
from nrepshell.nrep import init_params
from nrepshell.sensitivity import ShapeEvaluator
from nrepshell.sensitivity import directional_check
from nrepshell.shell import assemble_and_solve
from nrepshell.shell import compliance
from nrepshell.shell import surface_metrics


def tiny_strip(iterations=3):
    return presets.strip().replace(nx=8,
                                   layers=(2, 3, 3, 1),
                                   max_iterations=iterations,
                                   training=TrainingConfig(50, 0.01,
                                                           polish=True),
                                   fit_tolerance=1.0)


def read_summary(path):
    with open(path) as f:
        return dict(x.split('=', 1) for x in f.read().splitlines())


class TestReferences(object):

    def test_catenary(self):
        ref = catenary_reference(20.0, 21.0)
        a = ref.a
        assert_allclose(2.0 * a * math.sinh(10.0 / a), 21.0, rtol=1e-10)
        assert_allclose(ref.z[[0, -1]], 0.0, atol=1e-10)
        assert ref.z.argmax() == 50
        assert np.all(ref.z >= -1e-10)
        # arc length of the sampled curve
        fine = catenary_reference(20.0, 21.0, samples=20001)
        length = np.hypot(np.diff(fine.x), np.diff(fine.z)).sum()
        assert_allclose(length, 21.0, rtol=1e-6)

    def test_catenary_invalid(self):
        with pytest.raises(ModelError):
            catenary_reference(20.0, 20.0)
        with pytest.raises(ModelError):
            catenary_reference(-1.0, 2.0)

    def test_navier(self):
        assert_allclose(navier_center_deflection(1.0, 1.0, 1.0), 0.00406235,
                        rtol=1e-5)
        assert_allclose(navier_center_deflection(2.0, 2.0, 4.0),
                        0.00406235 * 8.0, rtol=1e-5)

    def test_mse_to_catenary(self):
        spec = presets.strip()
        model = spec.model(spec.mesh())
        ref = catenary_reference(20.0, 21.0)
        coords = model.coords.copy()
        coords[:, 2] = ref.height(coords[:, 0])
        assert mse_to_catenary(model.with_coords(coords), ref) < 1e-24
        coords[:, 2] += 5.0
        assert mse_to_catenary(model.with_coords(coords), ref) < 1e-24
        assert_allclose(mse_to_catenary(model, ref),
                        np.mean(ref.height(model.coords[centreline(model),
                                                        0]) ** 2))

    def test_centreline(self):
        spec = presets.strip()
        model = spec.model(spec.mesh())
        rows = centreline(model)
        assert len(rows) == 33
        assert_allclose(model.mesh.vertices[rows, 1], 0.5)


class TestPresets(object):

    def test_strip(self):
        spec = presets.strip()
        assert (spec.nx, spec.ny) == (32, 2)
        assert spec.network().nparams == 51
        assert spec.supports == 'short-edges'
        assert spec.volume_factor == 1.05
        relu = presets.strip('relu,relu', width=10)
        assert [x.kind for x in relu.activations] == ['relu', 'relu']
        assert relu.layers == (2, 10, 10, 1)
        with pytest.raises(ModelError):
            presets.strip('tanh,tanh')

    def test_roof(self):
        spec = presets.roof()
        assert spec.name == 'roof-8'
        assert spec.network().nparams == 51
        assert [x.kind for x in spec.activations] == ['sinusoidal', 'relu']
        assert presets.roof(32).nx == 32

    def test_variants(self):
        variants = presets.roof_variants()
        names = set(x.name for x in variants)
        assert len(names) == 6
        assert names <= set(presets.PRESETS)
        for spec in variants:
            mesh = spec.mesh()
            assert mesh.nx == 16
            for region in spec.load_regions or ():
                x0, y0, x1, y1 = region
                assert 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1
                assert_allclose((x1 - x0, y1 - y0), 0.1)
        opening = presets.roof_variant('mid-edges', True, 'regional')
        assert opening.holes == (presets.OPENING, )
        assert opening.name == 'roof-regional-mid-edges-opening'
        with pytest.raises(ModelError):
            presets.roof_variant('edges')

    def test_preset(self):
        spec = presets.preset('roof-uniform-corners', seed=4)
        assert spec.seed == 4
        assert spec.supports == 'corners'
        with pytest.raises(ModelError):
            presets.preset('dome')

    def test_surface_fit(self):
        net, nx, ny, training = presets.surface_fit()
        assert net.nparams == 261
        assert (nx, ny) == (64, 64)
        assert training.epochs == 20000
        assert net.activations[0].omega == 0.5


class TestExperimentSpec(object):

    def test_replace(self):
        spec = presets.roof()
        other = spec.replace(seed=3)
        assert other.seed == 3
        assert spec.seed == 0
        assert other.layers == spec.layers
        with pytest.raises(ModelError):
            spec.replace(colour='red')

    def test_invalid(self):
        with pytest.raises(ModelError):
            ExperimentSpec(rise_shape='cone')
        with pytest.raises(ModelError):
            ExperimentSpec(reference='parabola')
        with pytest.raises(ModelError):
            ExperimentSpec(volume_factor=0.0)

    def test_initial_design(self):
        spec = tiny_strip()
        flat, net, mse = initial_design(spec)
        assert_allclose(flat.coords[:, 2], 0.0)
        assert net.nparams == 25
        assert mse < 0.5 ** 2

    def test_fit_tolerance_missed(self):
        spec = tiny_strip().replace(training=TrainingConfig(5, 0.01),
                                    fit_tolerance=1e-30)
        with pytest.raises(FitToleranceError) as e:
            initial_design(spec)
        assert e.value.mse > e.value.tolerance == 1e-30


def roof_design():
    spec = presets.roof().replace(training=TrainingConfig(200, 0.01,
                                                          polish=True),
                                  fit_tolerance=1.0)
    return spec, initial_design(spec)


def shape(flat, net):
    return flat.with_coords(forward(net, flat.mesh.vertices))


class TestInitialRoof(object):

    def test_flat(self):
        spec = presets.roof()
        flat = spec.model(spec.mesh())
        assert_allclose(compliance(assemble_and_solve(flat)), 3581.05,
                        rtol=1e-4)

    def test_calibrated(self):
        spec, (flat, net, mse) = roof_design()
        J0 = compliance(assemble_and_solve(shape(flat, net)))
        assert abs(J0 - 130.444) / 130.444 < 0.05
        assert_allclose(J0, presets.ROOF_COMPLIANCE, rtol=1e-6)

    def test_calibrate_unreachable(self):
        spec, (flat, net, mse) = roof_design()
        with pytest.raises(ModelError):
            calibrate(flat, net, 1e-12)


class TestGradients(object):

    @pytest.mark.parametrize('name', ['strip', 'roof'])
    def test_presets(self, name):
        if name == 'roof':
            spec, (flat, net, mse) = roof_design()
        else:
            spec = presets.strip().replace(fit_tolerance=1.0)
            flat, net, mse = initial_design(spec)
        evaluate = ShapeEvaluator(net, flat)
        theta = net.theta
        J, dJ, V, dV = evaluate(theta)
        for k, grad in ((0, dJ), (1, dV)):
            checks = directional_check(lambda x: evaluate.values(x)[k],
                                       grad, theta, directions=20)
            assert len(checks) == 20
            assert max(x.relative_error for x in checks) <= 1e-3


class TestRun(object):

    def test_run_experiment(self, tmpdir):
        out = str(tmpdir.join('strip'))
        result = run_experiment(tiny_strip(), out)
        for name in ('shape.obj', 'shape.vtk', 'history.csv',
                     'network.txt', 'summary.txt'):
            assert os.path.isfile(os.path.join(out, name))
        summary = read_summary(os.path.join(out, 'summary.txt'))
        assert summary['status'] in ('converged', 'max_iter')
        assert summary['params'] == '25'
        assert float(summary['final_volume']) <= \
            float(summary['v_max']) * (1 + 1e-6)
        assert 'mse_to_catenary' in summary
        assert result.summary['iterations'] <= 3
        history = result.history
        assert len(history) == result.summary['iterations'] + 1
        assert all(x.feasible for x in history)
        J = history.compliance
        assert np.all(np.diff(J) <= 1e-9 * J[:-1])
        assert result.summary['final_compliance'] <= \
            result.summary['initial_compliance']

    def test_strip(self):
        result = run_experiment(presets.strip())
        summary = result.summary
        assert summary['status'] == 'converged'
        assert summary['final_compliance'] <= 0.25
        assert summary['mse_to_catenary'] <= 1e-3
        assert all(x.feasible for x in result.history)
        J = result.history.compliance
        assert np.all(np.diff(J) <= 1e-9 * J[:-1])

    def test_roof(self):
        result = run_experiment(presets.roof())
        summary = result.summary
        assert summary['status'] == 'converged'
        assert_allclose(summary['initial_compliance'],
                        presets.ROOF_COMPLIANCE, rtol=1e-6)
        assert summary['initial_compliance'] >= \
            20.0 * summary['final_compliance']
        assert summary['final_volume'] <= summary['v_max'] + 1e-6

    @pytest.mark.parametrize('spec', presets.roof_variants(),
                             ids=lambda x: x.name)
    def test_variants(self, spec):
        spec = spec.replace(max_iterations=3,
                            training=TrainingConfig(100, 0.01, polish=True),
                            fit_tolerance=1.0)
        result = run_experiment(spec)
        model = result.model
        assert np.isfinite(model.coords).all()
        assert result.net.nparams == 51
        for element in range(model.mesh.nelements):
            assert surface_metrics(model, element, (0.5, 0.5)).sqrt_a > 0
        assert all(x.feasible for x in result.history)

    def test_sweep(self):
        summaries, medians = sweep(tiny_strip(1), [0, 1])
        assert [x['seed'] for x in summaries] == [0, 1]
        assert medians['median_compliance'] == \
            np.median([x['final_compliance'] for x in summaries])
        assert 'median_mse_to_catenary' in medians


class TestSurfaceFit(object):

    def test_fit_surface(self):
        net = MLPNetwork((2, 6, 1), ActivationSpec('sinusoidal', 0.5),
                         'heightfield', (20.0, 20.0))
        net = init_params(net, 0)
        trace = []
        fitted, mse = fit_surface(net, 6, 6, surface_target(),
                                  TrainingConfig(40, 0.01, report_every=20),
                                  trace)
        assert len(trace) == 3
        assert mse < trace[0][1]

    def test_target(self):
        target = surface_target()
        assert_allclose(target(0.0, 0.0), 5.0)
        assert_allclose(target(np.pi, 0.0), 0.0, atol=1e-15)

    def test_omega_study(self):
        ret = omega_study([0.5, 1.0], [0, 1], layers=(2, 4, 1), nx=4, ny=4,
                          training=TrainingConfig(5))
        assert sorted(ret) == [0.5, 1.0]
        assert all(np.isfinite(x) for x in ret.values())
