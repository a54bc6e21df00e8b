#!/usr/bin/env python
u"""
lstm.py
Regularized long short-term memory cells and multi-layer stacks with
    dropout on the non-recurrent inputs and backpropagation-through-time

    (i,f,o,g) = (act,act,act,tanh)(W'[D(h^{l-1}_t); h^l_{t-1}] + b)
    c^l_t = f*c^l_{t-1} + i*g
    h^l_t = o*tanh(c^l_t)

CALLING SEQUENCE:
    stack = init_stack(rng, input_dim, hidden_dim, layers)
    masks = dropout_masks(rng, stack, T, B, keep_prob)
    h_T, cache = lstm_forward(stack, sequence, MASKS=masks)
    grads, d_input = lstm_backward(stack, cache, dh_T)

INPUTS:
    sequence: input array with shape (T, B, K) or (T, K)

OPTIONS:
    MASKS: list of DropoutMask for each layer (None in evaluation mode)
    VALID: boolean array (T, B) of active timesteps.  Inactive timesteps
        carry the previous states forward unchanged so that left-padded
        windows start from a zero state at the first active month
    GATE: gate activation ('relu' or 'sigmoid')
    CAP: optional upper cap on gate outputs

OUTPUTS:
    h_T: top-layer hidden state at the last timestep
    cache: activations needed for backpropagation

NOTES:
    Gate blocks of W and b are ordered [input | forget | output | g]
    The derivative of ReLU at exactly zero is taken as zero
    Dropout masks use inverted scaling (entries 0 or 1/keep_prob)

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html

PROGRAM DEPENDENCIES:
    numerics.py: dense matrix helpers and random number generation

UPDATE HISTORY:
    Written 10/2026
"""
import numpy as np
from snap_toolkit.errors import ShapeError, InputError, NumericError, \
    ParameterError

#-- gate activations available to the cell
GATES = ('relu', 'sigmoid')

class LstmLayerParams(object):
    """
    Affine weights and biases of one LSTM layer

    W has shape (input_dim + hidden_dim, 4*hidden_dim)
    b has shape (4*hidden_dim)
    """
    def __init__(self, W, b):
        self.W = np.array(W, dtype=np.float64)
        self.b = np.array(b, dtype=np.float64).ravel()
        if (self.b.size % 4) or (self.W.ndim != 2):
            raise ShapeError('LSTM bias length must be a multiple of 4')
        self.hidden_dim = self.b.size//4
        self.input_dim = self.W.shape[0] - self.hidden_dim
        if (self.W.shape[1] != 4*self.hidden_dim) or (self.input_dim < 1):
            raise ShapeError('LSTM weights of shape {0} do not match '
                'hidden dimension {1:d}'.format(self.W.shape,self.hidden_dim))
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise NumericError('LSTM parameters must be finite')

    def copy(self):
        return LstmLayerParams(self.W.copy(), self.b.copy())

    def __repr__(self):
        return 'LstmLayerParams(input_dim={0:d}, hidden_dim={1:d})'.format(
            self.input_dim, self.hidden_dim)

class LstmState(object):
    """
    Hidden and cell states of one layer at one timestep
    """
    def __init__(self, h, c):
        self.h = np.array(h, dtype=np.float64)
        self.c = np.array(c, dtype=np.float64)
        if (self.h.shape != self.c.shape):
            raise ShapeError('hidden and cell states differ in shape')

    @classmethod
    def zeros(cls, hidden_dim, batch=None):
        shape = (hidden_dim,) if batch is None else (batch, hidden_dim)
        return cls(np.zeros(shape), np.zeros(shape))

class DropoutMask(object):
    """
    Inverted dropout mask for the non-recurrent input of one layer
    """
    def __init__(self, keep_prob, mask):
        if not (0.0 < keep_prob <= 1.0):
            raise ParameterError('keep probability must be in (0,1]')
        self.keep_prob = keep_prob
        self.mask = np.array(mask, dtype=np.float64)

#-- PURPOSE: Glorot-uniform initialization of a single layer
def init_params(rng, input_dim, hidden_dim, FORGET_BIAS=1.0):
    if (input_dim < 1) or (hidden_dim < 1):
        raise ParameterError('LSTM dimensions must be positive')
    fan_in = input_dim + hidden_dim
    fan_out = 4*hidden_dim
    limit = np.sqrt(6.0/(fan_in + fan_out))
    W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
    b = np.zeros((fan_out))
    #-- forget gate block
    b[hidden_dim:2*hidden_dim] = FORGET_BIAS
    return LstmLayerParams(W, b)

#-- PURPOSE: initialize a stack of layers for an input dimension
def init_stack(rng, input_dim, hidden_dim, layers, FORGET_BIAS=1.0):
    stack = []
    for l in range(layers):
        d_in = input_dim if (l == 0) else hidden_dim
        stack.append(init_params(rng, d_in, hidden_dim,
            FORGET_BIAS=FORGET_BIAS))
    return stack

#-- PURPOSE: sample inverted dropout masks for every layer and timestep
def dropout_masks(rng, stack, T, B, keep_prob):
    if not (0.0 < keep_prob <= 1.0):
        raise ParameterError('keep probability must be in (0,1]')
    masks = []
    for params in stack:
        if (keep_prob == 1.0):
            mask = np.ones((T, B, params.input_dim))
        else:
            keep = rng.random((T, B, params.input_dim)) < keep_prob
            mask = keep.astype(np.float64)/keep_prob
        masks.append(DropoutMask(keep_prob, mask))
    return masks

#-- PURPOSE: gate nonlinearity and its derivative
def gate_activation(pre, GATE='relu', CAP=None):
    if (GATE == 'relu'):
        act = np.maximum(pre, 0.0)
        deriv = (pre > 0.0).astype(np.float64)
    elif (GATE == 'sigmoid'):
        act = 1.0/(1.0 + np.exp(-pre))
        deriv = act*(1.0 - act)
    else:
        raise ParameterError('unknown gate activation {0}'.format(GATE))
    if CAP is not None:
        capped = (act >= CAP)
        act = np.where(capped, CAP, act)
        deriv = np.where(capped, 0.0, deriv)
    return act, deriv

#-- PURPOSE: single transition of one layer
def lstm_step(params, x, prev, GATE='relu', CAP=None, CACHE=False):
    x = np.array(x, dtype=np.float64)
    single = (x.ndim == 1)
    X_in = np.atleast_2d(x)
    h_prev = np.atleast_2d(prev.h)
    c_prev = np.atleast_2d(prev.c)
    if (X_in.shape[1] != params.input_dim):
        raise ShapeError('input length {0:d} does not match layer input '
            'dimension {1:d}'.format(X_in.shape[1], params.input_dim))
    if (h_prev.shape[1] != params.hidden_dim):
        raise ShapeError('state length does not match hidden dimension')
    d = params.hidden_dim
    X = np.concatenate([X_in, h_prev], axis=1)
    pre = np.dot(X, params.W) + params.b
    if not np.all(np.isfinite(pre)):
        raise NumericError('non-finite LSTM preactivation',
            diagnostics=dict(max_abs_input=float(np.max(np.abs(X)))))
    i, di = gate_activation(pre[:,0:d], GATE=GATE, CAP=CAP)
    f, df = gate_activation(pre[:,d:2*d], GATE=GATE, CAP=CAP)
    o, do = gate_activation(pre[:,2*d:3*d], GATE=GATE, CAP=CAP)
    g = np.tanh(pre[:,3*d:4*d])
    c = f*c_prev + i*g
    tc = np.tanh(c)
    h = o*tc
    if not np.all(np.isfinite(c)):
        raise NumericError('LSTM cell state overflowed')
    state = LstmState(h[0], c[0]) if single else LstmState(h, c)
    if CACHE:
        step = dict(X=X, i=i, f=f, o=o, g=g, di=di, df=df, do=do,
            c_prev=c_prev, tc=tc)
        return state, step
    return state

#-- PURPOSE: run a stack of layers over an input sequence
def lstm_forward(stack, sequence, MASKS=None, VALID=None, GATE='relu',
    CAP=None):
    seq = np.array(sequence, dtype=np.float64)
    if (seq.ndim == 2):
        seq = seq[:,np.newaxis,:]
        squeeze = True
    else:
        squeeze = False
    if (seq.ndim != 3) or (seq.shape[0] == 0):
        raise InputError('LSTM input sequence is empty')
    T, B, K = seq.shape
    if (stack[0].input_dim != K):
        raise ShapeError('feature dimension {0:d} does not match layer 1 '
            'input dimension {1:d}'.format(K, stack[0].input_dim))
    for l in range(1, len(stack)):
        if (stack[l].input_dim != stack[l-1].hidden_dim):
            raise ShapeError('layer {0:d} input does not match layer {1:d} '
                'hidden dimension'.format(l+1, l))
    if VALID is None:
        valid = np.ones((T, B), dtype=bool)
    else:
        valid = np.array(VALID, dtype=bool).reshape(T, B)
    cache = dict(layers=[], valid=valid, squeeze=squeeze, shape=seq.shape,
        GATE=GATE, CAP=CAP)
    layer_input = seq
    for l, params in enumerate(stack):
        mask = None if MASKS is None else MASKS[l].mask
        #-- dropout only touches the non-recurrent input
        x_drop = layer_input if (mask is None) else layer_input*mask
        state = LstmState.zeros(params.hidden_dim, batch=B)
        H = np.zeros((T, B, params.hidden_dim))
        steps = []
        for t in range(T):
            new, step = lstm_step(params, x_drop[t], state, GATE=GATE,
                CAP=CAP, CACHE=True)
            v = valid[t][:,np.newaxis]
            state = LstmState(np.where(v, new.h, state.h),
                np.where(v, new.c, state.c))
            H[t] = state.h
            steps.append(step)
        cache['layers'].append(dict(steps=steps, mask=mask))
        layer_input = H
    h_T = layer_input[-1]
    return (h_T[0] if squeeze else h_T), cache

#-- PURPOSE: backpropagation-through-time for a gradient on h^L_T
def lstm_backward(stack, cache, dh_T):
    if (len(cache['layers']) != len(stack)):
        raise ShapeError('cache does not match the LSTM stack')
    T, B, K = cache['shape']
    valid = cache['valid']
    dh_T = np.array(dh_T, dtype=np.float64).reshape(B, stack[-1].hidden_dim)
    #-- gradient on the hidden outputs of the layer above at each timestep
    dH_above = np.zeros((T, B, stack[-1].hidden_dim))
    dH_above[-1] = dh_T
    grads = [None]*len(stack)
    for l in reversed(range(len(stack))):
        params = stack[l]
        layer = cache['layers'][l]
        d = params.hidden_dim
        d_in = params.input_dim
        dW = np.zeros_like(params.W)
        db = np.zeros_like(params.b)
        dx = np.zeros((T, B, d_in))
        dh_next = np.zeros((B, d))
        dc_next = np.zeros((B, d))
        for t in reversed(range(T)):
            s = layer['steps'][t]
            v = valid[t][:,np.newaxis]
            dh = dH_above[t] + dh_next
            dh_act = np.where(v, dh, 0.0)
            dc_act = np.where(v, dc_next, 0.0)
            do = dh_act*s['tc']
            dct = dc_act + dh_act*s['o']*(1.0 - s['tc']**2)
            dpre = np.concatenate([dct*s['g']*s['di'],
                dct*s['c_prev']*s['df'], do*s['do'],
                dct*s['i']*(1.0 - s['g']**2)], axis=1)
            dW += np.dot(s['X'].T, dpre)
            db += np.sum(dpre, axis=0)
            dX = np.dot(dpre, params.W.T)
            dx[t] = dX[:,:d_in]
            #-- inactive timesteps pass gradients straight through
            dh_next = np.where(v, dX[:,d_in:], dh)
            dc_next = np.where(v, dct*s['f'], dc_next)
        grads[l] = dict(W=dW, b=db)
        mask = layer['mask']
        dH_above = dx if (mask is None) else dx*mask
    d_input = dH_above[:,0,:] if cache['squeeze'] else dH_above
    return grads, d_input
