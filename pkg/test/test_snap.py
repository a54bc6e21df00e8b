#!/usr/bin/env python
u"""
test_snap.py
Verify the pseudo-Siamese network: loss, gradients, Adam, masking,
    alpha estimation and seeded training
"""
import pytest
import numpy as np
import pandas as pd
from numpy.testing import assert_array_equal, assert_allclose
from pandas.testing import assert_frame_equal
from snap_toolkit.errors import ConfigError, InputError, AlignmentError, \
    NumericError
from snap_toolkit.numerics import new_rng, finite_diff_grad
from snap_toolkit.data import synthesize, SyntheticSpec, panel_tensor, \
    window_batch
from snap_toolkit.snap import SnapHyper, init_model, forward, predict, \
    weighted_loss, loss, loss_and_gradient, AdamState, adam_step, \
    EarlyStopping, predict_split, prediction_panel, estimate_alpha, train, \
    expand_grid
from snap_toolkit.portfolio import r2_predictive, sharpe, long_short_series
from snap_toolkit.stats import mispricing_test
from snap_toolkit.benchmarks import fit_benchmarks
from snap_toolkit.importance import importance_report

#-- micro panel of 4 stocks and 6 months
@pytest.fixture(scope='module')
def micro():
    dataset = synthesize(SyntheticSpec(n_stocks=4, n_months=6, n_chars=4,
        n_macro=1, train_frac=0.5, validate_frac=0.17, seed=1))
    return panel_tensor(dataset)

@pytest.fixture(scope='module')
def small():
    dataset = synthesize(SyntheticSpec(n_stocks=20, n_months=48, n_chars=4,
        n_macro=1, seed=2))
    return panel_tensor(dataset)

#-- model whose heads output constants
def constant_model(tensor, alpha, beta, lam, hyper):
    model = init_model(tensor.chars.shape[2], tensor.common.shape[1], hyper)
    for key,val in [('alpha',alpha),('beta',beta),('lambda',lam)]:
        model.branches[key].w[:] = 0.0
        model.branches[key].b[:] = val
    return model

def test_weighted_loss():
    assert weighted_loss([1.0, -1.0], [0.0, 0.0], [7, 7]) == 1.0
    #-- the single-month stock weighs as much as the two-month stock
    assert_allclose(weighted_loss([2.0, 1.0, 1.0], [0.0, 0.0, 0.0],
        [0, 1, 1]), 2.5)
    assert weighted_loss([0.1, 0.2], [0.1, 0.2], [0, 1]) == 0.0
    with pytest.raises(InputError):
        weighted_loss([], [], [])

def test_adam_first_step():
    hyper = SnapHyper(learning_rate=0.001)
    params, state = adam_step(np.zeros(1), np.array([0.3]), AdamState(1), hyper)
    assert_allclose(params, [-0.001], rtol=1e-6)
    assert state.step == 1
    params, _ = adam_step(np.zeros(1), np.array([-0.3]), AdamState(1), hyper)
    assert_allclose(params, [0.001], rtol=1e-6)
    #-- zero gradient leaves the parameters in place
    params, state = adam_step(np.ones(2), np.zeros(2), AdamState(2), hyper)
    assert_array_equal(params, np.ones(2))
    assert state.step == 1

def test_adam_clipping():
    hyper = SnapHyper(learning_rate=0.001, grad_clip=5.0)
    state = AdamState(2)
    params, state = adam_step(np.zeros(2), [np.array([30.0, 40.0])], state,
        hyper)
    assert_allclose(params, [-0.001, -0.001], rtol=1e-6)
    with pytest.raises(NumericError):
        adam_step(np.zeros(2), np.array([np.nan, 1.0]), AdamState(2), hyper)

def test_early_stopping():
    stopper = EarlyStopping(0)
    assert not stopper.update(1, 1.0, np.zeros(1))
    assert stopper.update(2, 1.1, np.ones(1))
    assert stopper.best_epoch == 1
    assert_array_equal(stopper.best_params, np.zeros(1))
    stopper = EarlyStopping(2)
    assert not any(stopper.update(e, v, np.zeros(1)) for e,v in
        enumerate([1.0, 0.9, 0.95, 0.92], start=1))
    assert stopper.update(5, 0.91, np.zeros(1))

def test_hyperparameters():
    hyper = SnapHyper()
    assert hyper.resolved_hidden(10) == 6
    assert hyper.resolved_hidden(3) == 4
    assert SnapHyper(hidden_dim=2).resolved_hidden(10) == 2
    assert hyper.replace(window=3).window == 3
    for kwargs in [dict(window=0), dict(dropout_keep=0.0), dict(gate='tanh'),
        dict(learning_rate=0.0), dict(unknown=1)]:
        with pytest.raises(ConfigError):
            SnapHyper(**kwargs)
    grid = expand_grid(dict(window=[3, 6], hidden_dim=2, seed=[0, 1]))
    assert len(grid) == 4
    assert all(point['hidden_dim'] == 2 for point in grid)

def test_predict_arithmetic(micro):
    hyper = SnapHyper(hidden_dim=2, window=3)
    model = constant_model(micro, 0.01, 1.5, 0.02, hyper)
    z = micro.chars[:3,0,:]
    m = micro.common[:3,:]
    result = predict(model, z, m)
    assert_allclose(result['prediction'], 0.04)
    assert_allclose(predict(model, z, m, MASKED=True)['prediction'], 0.03)
    assert_allclose(result['alpha'], 0.01)
    #-- windows shorter than W are accepted
    assert_allclose(predict(model, z[-1:], m[-1:])['prediction'], 0.04)
    with pytest.raises(InputError):
        predict(model, z, m[:2])

def test_masking_identity(micro):
    hyper = SnapHyper(hidden_dim=2, window=3, seed=4)
    model = init_model(micro.chars.shape[2], micro.common.shape[1], hyper)
    rng = new_rng(11)
    for trial in range(20):
        batch = window_batch(micro, [3, 4, 5], 3)
        batch.stock_seq = rng.uniform(-1, 1, size=batch.stock_seq.shape)
        batch.common_seq = rng.standard_normal(batch.common_seq.shape)
        unmasked, outputs, _ = forward(model, batch, MASKED=False)
        masked, _, _ = forward(model, batch, MASKED=True)
        assert_allclose(unmasked - masked, outputs['alpha'], rtol=0,
            atol=1e-15)
    #-- loss is non-negative
    assert loss(model, batch) >= 0.0

@pytest.mark.parametrize("MASKED,TRAINING", [(False,False), (True,False),
    (False,True)])
def test_gradient_check(micro, MASKED, TRAINING):
    hyper = SnapHyper(hidden_dim=2, window=3, gate='sigmoid', dropout_keep=0.8,
        seed=3)
    model = init_model(micro.chars.shape[2], micro.common.shape[1], hyper,
        MASKED=MASKED)
    #-- move the biases away from zero
    theta = model.get_flat() + 0.1*new_rng(8).standard_normal(
        model.get_flat().size)
    model.set_flat(theta)
    batch = window_batch(micro, [2, 3, 4, 5], 3)
    def f(x):
        trial = model.copy()
        trial.set_flat(x)
        value, _ = loss_and_gradient(trial, batch, rng=new_rng(9),
            TRAINING=TRAINING)
        return value
    value, grads = loss_and_gradient(model, batch, rng=new_rng(9),
        TRAINING=TRAINING)
    analytic = np.concatenate([g.ravel() for g in grads])
    assert analytic.size == theta.size
    numeric = finite_diff_grad(f, theta, h=1e-6)
    assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)
    assert_allclose(value, f(theta))

def test_estimate_alpha():
    unmasked = prediction_panel([1, 2], ['2000-01','2000-01'], [0.10, 0.0],
        [0.08, 0.0])
    masked = prediction_panel([2, 1], ['2000-01','2000-01'], [0.0, 0.10],
        [0.0, 0.05])
    out = estimate_alpha(unmasked, masked)
    assert_allclose(out['alpha_hat'], [0.03, 0.0])
    assert_allclose(out['residual_masked'], [0.05, 0.0])
    identical = estimate_alpha(unmasked, unmasked)
    assert_array_equal(identical['alpha_hat'], 0.0)
    with pytest.raises(AlignmentError):
        estimate_alpha(unmasked, masked.iloc[:1])
    other = masked.copy()
    other.loc[0, 'stock_id'] = 3
    with pytest.raises(AlignmentError):
        estimate_alpha(unmasked, other)

def test_predict_split(small):
    hyper = SnapHyper(hidden_dim=3, window=3, seed=1)
    model = init_model(small.chars.shape[2], small.common.shape[1], hyper)
    panel = predict_split(model, small, 'validate')
    assert list(panel.columns[:5]) == ['stock_id','month','realized',
        'predicted','residual']
    assert_allclose(panel['residual'], panel['realized'] - panel['predicted'])
    assert_allclose(panel['predicted'], panel['alpha_branch'] +
        panel['beta']*panel['lambda'])
    #-- chunking does not change predictions
    chunked = predict_split(model, small, 'validate', CHUNK=1)
    assert_frame_equal(panel, chunked)

def test_train_determinism(small):
    hyper = SnapHyper(hidden_dim=3, window=3, batch_months=8, max_epochs=3,
        seed=5)
    model, log = train(small, hyper)
    again, log_again = train(small, hyper)
    assert_frame_equal(log, log_again)
    assert_array_equal(model.get_flat(), again.get_flat())
    assert len(log) <= 3
    assert log.attrs['best_epoch'] == log['epoch'][log['val_loss'].idxmin()]
    assert (log['seed'] == 5).all()

def test_masked_training_freezes_alpha(small):
    hyper = SnapHyper(hidden_dim=3, window=3, batch_months=8, max_epochs=2,
        seed=6)
    model, _ = train(small, hyper, MASKED=True)
    initial = init_model(small.chars.shape[2], small.common.shape[1], hyper)
    assert model.masked
    for (name,p),(_,q) in zip(model.branches['alpha'].parameters('alpha'),
        initial.branches['alpha'].parameters('alpha')):
        assert_array_equal(p, q)

def test_train_requires_splits(small):
    tensor = small.copy()
    tensor.split[:] = 'train'
    with pytest.raises(InputError):
        train(tensor, SnapHyper(hidden_dim=2, window=3, max_epochs=1))

#-- residuals of the true unmasked and alpha-free models
def oracle_panels(dataset):
    truth = dataset.truth
    realized = dataset.panel['excess_return'].values
    unmasked = prediction_panel(truth['stock_id'], truth['month'], realized,
        truth['expected'])
    masked = prediction_panel(truth['stock_id'], truth['month'], realized,
        truth['beta']*truth['lambda'])
    return unmasked, masked

def test_planted_alpha_oracle():
    spec = SyntheticSpec(n_stocks=50, n_months=24, n_chars=4, n_macro=1,
        alpha_mean=0.02, alpha_scale=0.01, noise_sd=0.05, seed=9)
    dataset = synthesize(spec)
    out = estimate_alpha(*oracle_panels(dataset))
    assert_allclose(out['alpha_hat'], dataset.truth['alpha'], atol=1e-12)
    assert np.corrcoef(out['alpha_hat'], dataset.truth['alpha'])[0,1] > 0.0
    result = mispricing_test(out['residual'], out['residual_masked'])
    assert result.p_value < 0.01

@pytest.mark.slow
def test_null_calibration():
    #-- true-model residuals of independent panels without alpha
    rejected = []
    for i in range(400):
        residuals = []
        for j in range(2):
            spec = SyntheticSpec(n_stocks=30, n_months=10, n_chars=4,
                n_macro=1, alpha_scale=0.0, noise_sd=0.05, seed=2*i + j)
            unmasked, _ = oracle_panels(synthesize(spec))
            residuals.append(unmasked['residual'].values)
        rejected.append(mispricing_test(*residuals).reject(0.05))
    assert 0.01 <= np.mean(rejected) <= 0.12

def test_unbalanced_training():
    dataset = synthesize(SyntheticSpec(n_stocks=40, n_months=48, n_chars=4,
        n_macro=1, missing_rate=0.3, seed=4))
    assert abs(len(dataset.panel)/(40.0*48.0) - 0.7) < 0.05
    tensor = panel_tensor(dataset)
    hyper = SnapHyper(hidden_dim=3, window=3, batch_months=8, max_epochs=3,
        seed=2)
    model, log = train(tensor, hyper)
    assert np.all(np.isfinite(log['train_loss']))
    assert np.all(np.isfinite(log['val_loss']))
    panel = predict_split(model, tensor, 'test')
    test = dataset.split.index[dataset.split == 'test']
    assert len(panel) == np.count_nonzero(dataset.panel['month'].isin(test))
    assert np.all(np.isfinite(panel['predicted']))

@pytest.mark.slow
def test_masked_matches_unmasked_without_alpha():
    spec = SyntheticSpec(n_stocks=100, n_months=120, n_chars=4, n_macro=1,
        alpha_scale=0.0, seed=11)
    tensor = panel_tensor(synthesize(spec))
    hyper = SnapHyper(hidden_dim=4, window=6, learning_rate=0.005,
        max_epochs=20, patience=3, seed=0)
    _, log = train(tensor, hyper)
    _, log_masked = train(tensor, hyper, MASKED=True)
    unmasked, masked = log['val_loss'].min(), log_masked['val_loss'].min()
    assert abs(masked - unmasked) <= 0.05*unmasked

@pytest.mark.slow
def test_synthetic_recovery():
    spec = SyntheticSpec(n_stocks=200, n_months=240, n_chars=10, n_macro=5,
        oracle_r2=0.1, seed=0)
    dataset = synthesize(spec)
    tensor = panel_tensor(dataset)
    hyper = SnapHyper(window=6, learning_rate=0.005, max_epochs=40,
        patience=5, seed=0)
    model, log = train(tensor, hyper)
    panel = predict_split(model, tensor, 'test')
    assert r2_predictive(panel) >= 0.5*spec.oracle_r2
    #-- estimated alphas follow the planted alphas
    masked, _ = train(tensor, hyper, MASKED=True)
    out = estimate_alpha(panel, predict_split(masked, tensor, 'test'))
    out = out.merge(dataset.truth[['stock_id','month','alpha']],
        on=['stock_id','month'])
    assert np.corrcoef(out['alpha_hat'], out['alpha'])[0,1] > 0.0
    #-- the characteristics driving alpha and beta rank in the top 20%
    report = importance_report(model, tensor, split='test', seed=0)
    assert set(report.top(2)) == {'char_1','char_3'}

@pytest.mark.slow
def test_model_ordering():
    wins = 0
    for seed in range(5):
        spec = SyntheticSpec(n_stocks=100, n_months=120, n_chars=4,
            n_macro=1, form='additive', lambda_mean=0.0, lambda_scale=0.02,
            oracle_r2=0.3, seed=seed)
        tensor = panel_tensor(synthesize(spec))
        hyper = SnapHyper(window=6, learning_rate=0.005, max_epochs=30,
            patience=5, seed=seed)
        model, _ = train(tensor, hyper)
        panel = predict_split(model, tensor, 'test')
        r2 = r2_predictive(panel)
        ratio = sharpe(long_short_series(panel))
        fitted = fit_benchmarks(tensor, models=('ridge','lasso','elastic',
            'ffn'), n_lambda=20, ffn=dict(seed=seed))
        better = True
        for name,benchmark in fitted.items():
            other = benchmark.predict_split(tensor, 'test')
            better &= (r2 > r2_predictive(other)) and \
                (ratio > sharpe(long_short_series(other)))
        wins += int(better)
    assert wins >= 4
