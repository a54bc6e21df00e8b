#!/usr/bin/env python
u"""
test_lstm.py
Verify the regularized LSTM cell, stacks and backpropagation-through-time
"""
import pytest
import numpy as np
from numpy.testing import assert_array_equal, assert_allclose
from snap_toolkit.errors import InputError, ShapeError
from snap_toolkit.numerics import new_rng, finite_diff_grad
from snap_toolkit.lstm import LstmLayerParams, LstmState, init_params, \
    init_stack, dropout_masks, lstm_step, lstm_forward, lstm_backward

#-- bias-only layer with one hidden unit
def bias_layer(b, input_dim=2):
    return LstmLayerParams(np.zeros((input_dim + 1, 4)), b)

def test_zero_parameters():
    params = LstmLayerParams(np.zeros((5, 12)), np.zeros(12))
    state = lstm_step(params, np.ones(2), LstmState.zeros(3))
    assert_array_equal(state.h, np.zeros(3))
    assert_array_equal(state.c, np.zeros(3))

def test_scalar_step():
    params = bias_layer([1.0, 0.0, 1.0, np.arctanh(0.5)])
    state = lstm_step(params, np.zeros(2), LstmState.zeros(1))
    assert_allclose(state.c, [0.5])
    assert_allclose(state.h, [np.tanh(0.5)])
    assert_allclose(state.h, [0.4621], atol=1e-4)
    #-- forget-only transition with ReLU gates above 1
    params = bias_layer([0.0, 2.0, 1.0, 0.0])
    state = lstm_step(params, np.zeros(2), LstmState([0.0], [0.3]))
    assert_allclose(state.c, [0.6])
    assert_allclose(state.h, [0.5370], atol=1e-4)

def test_forward_reduces_to_step():
    rng = new_rng(5)
    params = init_params(rng, 3, 4)
    x = rng.standard_normal(3)
    h, _ = lstm_forward([params], x[np.newaxis,:])
    state = lstm_step(params, x, LstmState.zeros(4))
    assert_array_equal(h, state.h)

def test_zero_input_gate():
    #-- input gate preactivation is zero so the cell never fills
    rng = new_rng(6)
    W = rng.standard_normal((3, 4))
    W[:,0] = 0.0
    params = LstmLayerParams(W, [0.0, 1.0, 1.0, 0.5])
    h, _ = lstm_forward([params], rng.standard_normal((2, 2)))
    assert_array_equal(h, [0.0])

def test_dropout_identity():
    rng = new_rng(8)
    stack = init_stack(rng, 3, 4, 2)
    seq = rng.standard_normal((5, 6, 3))
    masks = dropout_masks(rng, stack, 5, 6, 1.0)
    h0, _ = lstm_forward(stack, seq)
    h1, _ = lstm_forward(stack, seq, MASKS=masks)
    assert_array_equal(h0, h1)
    masks = dropout_masks(new_rng(9), stack, 5, 6, 0.8)
    values = np.unique(masks[0].mask)
    assert set(values).issubset({0.0, 1.0/0.8})

def test_left_padding_starts_from_zero_state():
    rng = new_rng(10)
    stack = init_stack(rng, 3, 4, 2)
    seq = rng.standard_normal((5, 1, 3))
    valid = np.ones((5, 1), dtype=bool)
    valid[:2] = False
    h_short, _ = lstm_forward(stack, seq[2:])
    h_padded, _ = lstm_forward(stack, seq, VALID=valid)
    assert_allclose(h_padded, h_short, rtol=0, atol=1e-15)

def test_hidden_bounded_by_output_gate():
    rng = new_rng(12)
    params = init_params(rng, 3, 4)
    prev = LstmState(rng.standard_normal(4), rng.standard_normal(4))
    state, step = lstm_step(params, rng.standard_normal(3), prev, CACHE=True)
    assert np.all(np.abs(state.h) <= np.abs(step['o'][0]) + 1e-15)

def test_init_params():
    rng = new_rng(13)
    a = init_params(new_rng(1), 5, 3)
    b = init_params(new_rng(1), 5, 3)
    assert_array_equal(a.W, b.W)
    assert_array_equal(a.b[3:6], np.ones(3))
    assert_array_equal(np.delete(a.b, np.arange(3, 6)), np.zeros(9))
    W = init_params(rng, 60, 40).W
    limit = np.sqrt(6.0/(100 + 160))
    assert np.all(np.abs(W) <= limit)
    se = limit/np.sqrt(3.0)/np.sqrt(W.size)
    assert abs(np.mean(W)) < 3.0*se

def test_errors():
    stack = init_stack(new_rng(1), 3, 2, 1)
    with pytest.raises(InputError):
        lstm_forward(stack, np.zeros((0, 1, 3)))
    with pytest.raises(ShapeError):
        lstm_forward(stack, np.zeros((2, 1, 4)))

#-- flatten and rebuild the parameters of a stack
def flatten(stack):
    return np.concatenate([np.concatenate([p.W.ravel(), p.b]) for p in stack])

def rebuild(stack, theta):
    out, offset = [], 0
    for p in stack:
        W = theta[offset:offset+p.W.size].reshape(p.W.shape)
        offset += p.W.size
        b = theta[offset:offset+p.b.size]
        offset += p.b.size
        out.append(LstmLayerParams(W, b))
    return out

@pytest.mark.parametrize('gate', ['sigmoid', 'relu'])
def test_gradient_check(gate):
    rng = new_rng(20)
    for trial in range(20):
        d = int(rng.integers(1, 5))
        layers = int(rng.integers(1, 3))
        T = int(rng.integers(1, 6))
        B, K = 2, 3
        stack = init_stack(rng, K, d, layers)
        seq = rng.standard_normal((T, B, K))
        valid = rng.random((T, B)) < 0.8
        masks = dropout_masks(rng, stack, T, B, 0.7)
        upstream = rng.standard_normal((B, d))
        h, cache = lstm_forward(stack, seq, MASKS=masks, VALID=valid, GATE=gate)
        grads, d_input = lstm_backward(stack, cache, upstream)
        analytic = np.concatenate([np.concatenate([g['W'].ravel(), g['b']])
            for g in grads])
        def f(theta):
            h, _ = lstm_forward(rebuild(stack, theta), seq, MASKS=masks,
                VALID=valid, GATE=gate)
            return np.sum(h*upstream)
        numeric = finite_diff_grad(f, flatten(stack), h=1e-6)
        atol = 1e-8 if (gate == 'sigmoid') else 1e-6
        assert_allclose(analytic, numeric, rtol=1e-5, atol=atol)
        #-- gradient with respect to the inputs
        def g(x):
            h, _ = lstm_forward(stack, x.reshape(seq.shape), MASKS=masks,
                VALID=valid, GATE=gate)
            return np.sum(h*upstream)
        numeric = finite_diff_grad(g, seq.ravel(), h=1e-6)
        assert_allclose(d_input.ravel(), numeric, rtol=1e-5, atol=atol)

def test_zero_upstream_and_masked_input():
    rng = new_rng(21)
    stack = init_stack(rng, 3, 2, 2)
    seq = rng.standard_normal((4, 2, 3))
    masks = dropout_masks(rng, stack, 4, 2, 1.0)
    masks[0].mask[:,:,1] = 0.0
    _, cache = lstm_forward(stack, seq, MASKS=masks)
    grads, _ = lstm_backward(stack, cache, np.zeros((2, 2)))
    for g in grads:
        assert_array_equal(g['W'], 0.0)
        assert_array_equal(g['b'], 0.0)
    _, d_input = lstm_backward(stack, cache, rng.standard_normal((2, 2)))
    assert_array_equal(d_input[:,:,1], 0.0)
