#!/usr/bin/env python
u"""
test_importance.py
Verify perturbation importance of characteristics and macro states
"""
import pytest
import numpy as np
from numpy.testing import assert_array_equal, assert_allclose
from pandas.testing import assert_frame_equal
from snap_toolkit.errors import InputError
from snap_toolkit.data import synthesize, SyntheticSpec, panel_tensor, \
    window_batch, split_months
from snap_toolkit.snap import SnapHyper, init_model, prediction_panel
from snap_toolkit.importance import scope_features, perturb_importance, \
    importance_report

#-- prediction c*z_j from the current month of one characteristic
class LinearModel(object):
    def __init__(self, c, feature):
        self.c = c
        self.feature = feature

    def predict_split(self, tensor, split):
        batch = window_batch(tensor, split_months(tensor, split), 1)
        z = batch.stock_seq[-1,:,self.feature]
        return prediction_panel(tensor.stock_ids[batch.stock_idx],
            np.asarray(tensor.months)[batch.month_idx[batch.month_pos]],
            batch.target, self.c*z)

#-- true linear expected returns of the synthetic panel from the inputs
class OracleModel(object):
    def __init__(self, tensor, spec):
        self.spec = spec
        self.macro = tensor.common_names.index('macro_0')

    def predict_split(self, tensor, split):
        batch = window_batch(tensor, split_months(tensor, split), 1)
        z = batch.stock_seq[-1]
        m = batch.common_seq[-1,batch.month_pos,self.macro]
        alpha = self.spec.alpha_scale*z[:,1]
        beta = 1.0 + self.spec.beta_scale*z[:,3]
        lam = self.spec.lambda_mean + self.spec.lambda_scale*m
        return prediction_panel(tensor.stock_ids[batch.stock_idx],
            np.asarray(tensor.months)[batch.month_idx[batch.month_pos]],
            batch.target, alpha + beta*lam)

@pytest.fixture(scope='module')
def tensor():
    dataset = synthesize(SyntheticSpec(n_stocks=100, n_months=120, n_chars=5,
        n_macro=2, seed=3))
    return panel_tensor(dataset)

def test_linear_rms(tensor):
    model = LinearModel(-2.0, 1)
    rms = perturb_importance(model, tensor, 'train', 1, seed=0, scale=0.2)
    assert_allclose(rms, 2.0*0.2, rtol=0.05)
    #-- perturbation noise scales linearly
    double = perturb_importance(model, tensor, 'train', 1, seed=0, scale=0.4)
    assert_allclose(double, 2.0*rms, rtol=1e-6)
    assert perturb_importance(model, tensor, 'train', 1, scale=0.0) == 0.0
    #-- features the model ignores have no importance
    assert perturb_importance(model, tensor, 'train', 2) == 0.0

def test_input_checks(tensor):
    model = LinearModel(1.0, 0)
    original = tensor.chars.copy()
    perturb_importance(model, tensor, 'test', 0, repetitions=2)
    assert_array_equal(tensor.chars, original)
    with pytest.raises(InputError):
        perturb_importance(model, tensor, 'test', 5)
    with pytest.raises(InputError):
        perturb_importance(model, tensor, 'test', 0, scope='branch')

def test_importance_report(tensor):
    report = importance_report(LinearModel(1.0, 3), tensor, split='test',
        model_name='linear')
    frame = report.frame
    assert len(report) == len(scope_features(tensor, 'characteristic'))
    assert sorted(frame['rank']) == list(range(1, 6))
    assert report.top(1) == ['char_3']
    assert (frame['rms'] >= 0.0).all()
    assert (frame['model_name'] == 'linear').all()
    assert list(frame.columns) == ['feature','feature_id','scope','rms','rank',
        'model_name']
    #-- a model ignoring every input ranks by feature order
    dead = importance_report(LinearModel(0.0, 0), tensor, split='test')
    assert_array_equal(dead.frame['rms'], 0.0)
    assert_array_equal(dead.frame['rank'], np.arange(1, 6))

def test_dead_input_column(tensor):
    hyper = SnapHyper(hidden_dim=3, window=3, seed=2)
    model = init_model(tensor.chars.shape[2], tensor.common.shape[1], hyper)
    for key in ('alpha','beta'):
        model.branches[key].stack[0].W[2,:] = 0.0
    assert perturb_importance(model, tensor, 'test', 2) == 0.0
    assert perturb_importance(model, tensor, 'test', 1) > 0.0

def test_macro_scope_and_workers(tensor):
    hyper = SnapHyper(hidden_dim=3, window=3, seed=4)
    model = init_model(tensor.chars.shape[2], tensor.common.shape[1], hyper)
    report = importance_report(model, tensor, split='validate', scope='macro',
        seed=7)
    assert len(report) == len(tensor.common_names)
    assert list(report.frame['feature']) == tensor.common_names
    assert (report.frame['scope'] == 'macro').all()
    #-- worker processes reproduce the serial report
    parallel = importance_report(model, tensor, split='validate',
        scope='macro', seed=7, THREADS=2)
    assert_frame_equal(report.frame, parallel.frame)

def test_oracle_ranking(tensor):
    oracle = OracleModel(tensor, SyntheticSpec(n_chars=5, n_macro=2))
    report = importance_report(oracle, tensor, split='test')
    assert set(report.top(2)) == {'char_1','char_3'}
    assert_array_equal(report.frame.sort_values('rank')['rms'].values[2:], 0.0)
    #-- the single macro driver of the factor premium ranks first
    report = importance_report(oracle, tensor, split='test', scope='macro')
    assert report.top(1) == ['macro_0']
    assert (report.frame['rms'] > 0.0).sum() == 1
