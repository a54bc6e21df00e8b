#!/usr/bin/env python
u"""
snap.py
Pseudo-Siamese network for conditional asset pricing: deep alpha, deep
    beta and deep factor premium branches built from regularized LSTM stacks

    R^e_{i,t+1} = alpha(z_it) + beta(z_it)*lambda(zbar_t, m_t) + e_{i,t+1}

The masked variant drops the alpha branch and predicts beta*lambda only

CALLING SEQUENCE:
    hyper = SnapHyper(window=12, max_epochs=50, seed=0)
    model, log = train(tensor, hyper, MASKED=False)
    panel = predict_split(model, tensor, 'test')
    alphas = estimate_alpha(panel, masked_panel)

INPUTS:
    tensor: PanelTensor from data.panel_tensor
    hyper: SnapHyper training hyperparameters

OPTIONS:
    MASKED: train the masked (alpha-free) model
    VERBOSE: log each training epoch

OUTPUTS:
    model: SnapModel at the best-validation epoch
    log: pandas DataFrame of epoch, train_loss, val_loss, lr, seed

NOTES:
    Mini-batches are formed by month: every stock in a sampled month with
        its rolling window of the previous W months of characteristics
    The factor premium branch is evaluated once per month in each batch
    The loss weights stocks equally and months within a stock equally
    The alpha and beta branches share hyperparameters but not weights

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

PROGRAM DEPENDENCIES:
    numerics.py: random number generation and gradient clipping
    lstm.py: regularized LSTM stacks
    data.py: panel tensors and month window batches

UPDATE HISTORY:
    Written 10/2026
"""
import copy
import logging
import itertools
import numpy as np
import pandas as pd
from snap_toolkit.errors import ConfigError, InputError, NumericError, \
    AlignmentError, ShapeError
from snap_toolkit.numerics import new_rng, clip_global_norm
from snap_toolkit.lstm import GATES, init_stack, dropout_masks, \
    lstm_forward, lstm_backward
from snap_toolkit.data import window_batch, split_months

#-- branches of the pseudo-Siamese network
BRANCHES = ('alpha', 'beta', 'lambda')

class SnapHyper(object):
    """
    Training hyperparameters shared by the three branches
    """
    defaults = dict(hidden_dim=None, layers=1, window=12, dropout_keep=0.95,
        learning_rate=1e-3, adam_beta1=0.9, adam_beta2=0.999, adam_eps=1e-8,
        batch_months=12, max_epochs=50, patience=5, grad_clip=5.0, seed=0,
        gate='relu', gate_cap=None, forget_bias=1.0)

    def __init__(self, **kwargs):
        unknown = set(kwargs.keys()) - set(self.defaults.keys())
        if unknown:
            raise ConfigError('unknown hyperparameters: {0}'.format(
                ','.join(sorted(unknown))))
        for key,val in self.defaults.items():
            setattr(self, key, kwargs.get(key, val))
        self.validate()

    def validate(self):
        if (self.window < 1):
            raise ConfigError('window must be at least one month')
        if not (0.0 < self.dropout_keep <= 1.0):
            raise ConfigError('dropout_keep must be in (0,1]')
        if not (0.0 < self.adam_beta1 < 1.0) or not (0.0 < self.adam_beta2 < 1.0):
            raise ConfigError('Adam decay rates must be in (0,1)')
        if (self.learning_rate <= 0) or (self.adam_eps <= 0):
            raise ConfigError('learning rate and epsilon must be positive')
        if (self.layers < 1) or (self.batch_months < 1) or (self.max_epochs < 1):
            raise ConfigError('layers, batch_months and max_epochs must be '
                'positive')
        if (self.patience < 0):
            raise ConfigError('patience must be non-negative')
        if (self.hidden_dim is not None) and (self.hidden_dim < 1):
            raise ConfigError('hidden_dim must be positive')
        if self.gate not in GATES:
            raise ConfigError('gate must be one of {0}'.format(GATES))

    #-- PURPOSE: hidden width for a branch input dimension
    #-- rule of thumb: 2/3 of the input feature dimension
    def resolved_hidden(self, input_dim):
        if self.hidden_dim is not None:
            return int(self.hidden_dim)
        return max(4, int(np.floor(2.0*input_dim/3.0)))

    def as_dict(self):
        return {key:getattr(self, key) for key in self.defaults.keys()}

    def replace(self, **kwargs):
        params = self.as_dict()
        params.update(kwargs)
        return SnapHyper(**params)

class SnapBranch(object):
    """
    LSTM stack with an affine head from h^L_T to a scalar
    """
    def __init__(self, stack, w, b):
        self.stack = stack
        self.w = np.array(w, dtype=np.float64).ravel()
        self.b = np.array(b, dtype=np.float64).reshape(1)
        if (self.w.size != stack[-1].hidden_dim):
            raise ShapeError('head width does not match the hidden dimension')

    @property
    def input_dim(self):
        return self.stack[0].input_dim

    @property
    def hidden_dim(self):
        return self.stack[0].hidden_dim

    def parameters(self, prefix):
        params = []
        for l,layer in enumerate(self.stack):
            params.append(('{0}/layer{1:d}/W'.format(prefix,l), layer.W))
            params.append(('{0}/layer{1:d}/b'.format(prefix,l), layer.b))
        params.append(('{0}/head/w'.format(prefix), self.w))
        params.append(('{0}/head/b'.format(prefix), self.b))
        return params

class SnapModel(object):
    """
    Deep alpha, deep beta and deep factor premium branches
    """
    def __init__(self, alpha, beta, lambda_, hyper, MASKED=False):
        self.branches = dict(alpha=alpha, beta=beta)
        self.branches['lambda'] = lambda_
        self.hyper = hyper
        self.masked = bool(MASKED)
        if (alpha.input_dim != beta.input_dim):
            raise ShapeError('alpha and beta branches must share inputs')

    @property
    def stock_dim(self):
        return self.branches['beta'].input_dim

    @property
    def common_dim(self):
        return self.branches['lambda'].input_dim

    #-- PURPOSE: ordered (name, array) pairs of the parameters
    #-- the alpha branch is frozen in the masked model
    def parameters(self, TRAINABLE=True):
        params = []
        for key in BRANCHES:
            if TRAINABLE and self.masked and (key == 'alpha'):
                continue
            params.extend(self.branches[key].parameters(key))
        return params

    def get_flat(self, TRAINABLE=True):
        return np.concatenate([p.ravel() for _,p in self.parameters(TRAINABLE)])

    def set_flat(self, flat, TRAINABLE=True):
        flat = np.asarray(flat, dtype=np.float64)
        offset = 0
        for _,p in self.parameters(TRAINABLE):
            p[...] = flat[offset:offset+p.size].reshape(p.shape)
            offset += p.size
        if (offset != flat.size):
            raise ShapeError('flat parameter vector has the wrong length')

    def copy(self):
        return copy.deepcopy(self)

    def predict_split(self, tensor, split):
        return predict_split(self, tensor, split)

#-- PURPOSE: initialize a model for stock and common input dimensions
def init_model(stock_dim, common_dim, hyper, MASKED=False):
    branches = {}
    for j,key in enumerate(BRANCHES):
        input_dim = common_dim if (key == 'lambda') else stock_dim
        d = hyper.resolved_hidden(input_dim)
        rng = new_rng(hyper.seed, 100, j)
        stack = init_stack(rng, input_dim, d, hyper.layers,
            FORGET_BIAS=hyper.forget_bias)
        limit = np.sqrt(6.0/(d + 1.0))
        w = rng.uniform(-limit, limit, size=d)
        branches[key] = SnapBranch(stack, w, np.zeros(1))
    return SnapModel(branches['alpha'], branches['beta'], branches['lambda'],
        hyper, MASKED=MASKED)

#-- PURPOSE: forward pass of one branch with its head
def _branch_forward(branch, seq, valid, masks, hyper):
    h, cache = lstm_forward(branch.stack, seq, MASKS=masks, VALID=valid,
        GATE=hyper.gate, CAP=hyper.gate_cap)
    return np.dot(h, branch.w) + branch.b[0], (h, cache)

#-- PURPOSE: forward pass over a month window batch
def forward(model, batch, rng=None, TRAINING=False, MASKED=None):
    masked = model.masked if MASKED is None else MASKED
    hyper = model.hyper
    W, B, K = batch.stock_seq.shape
    M = batch.common_seq.shape[1]
    outputs, caches = {}, {}
    for key in BRANCHES:
        branch = model.branches[key]
        if (key == 'lambda'):
            seq, valid, n = batch.common_seq, batch.common_valid, M
        else:
            seq, valid, n = batch.stock_seq, batch.stock_valid, B
        masks = None
        if TRAINING and (hyper.dropout_keep < 1.0):
            masks = dropout_masks(rng, branch.stack, W, n, hyper.dropout_keep)
        outputs[key], caches[key] = _branch_forward(branch, seq, valid,
            masks, hyper)
    lam = outputs['lambda'][batch.month_pos]
    prediction = outputs['beta']*lam
    if not masked:
        prediction = prediction + outputs['alpha']
    return prediction, outputs, caches

#-- PURPOSE: prediction for a single stock window and common window
def predict(model, stock_window, common_window, MASKED=None):
    """
    Predicted excess return with the branch outputs

    Arguments
    ---------
    stock_window: characteristics for months t-W+1..t, shape (W, K)
    common_window: average characteristics and macro states, shape (W, F)
    """
    z = np.atleast_2d(np.array(stock_window, dtype=np.float64))
    m = np.atleast_2d(np.array(common_window, dtype=np.float64))
    if (z.shape[0] < 1) or (m.shape[0] != z.shape[0]):
        raise InputError('stock and common windows must cover the same '
            'months (at least one)')
    batch = SingleWindow(z, m)
    prediction, outputs, _ = forward(model, batch, MASKED=MASKED)
    result = dict(prediction=float(prediction[0]))
    for key in BRANCHES:
        result[key] = float(outputs[key][0])
    return result

#-- one stock window and its common window as a batch of size one
class SingleWindow(object):
    def __init__(self, z, m):
        W = z.shape[0]
        self.stock_seq = z[:,np.newaxis,:]
        self.stock_valid = np.ones((W,1), dtype=bool)
        self.common_seq = m[:,np.newaxis,:]
        self.common_valid = np.ones((W,1), dtype=bool)
        self.month_pos = np.zeros((1), dtype=int)

#-- PURPOSE: loss weights giving each stock equal weight and each month
#-- within a stock equal weight
def equal_stock_weights(stock_idx):
    _, inverse, counts = np.unique(stock_idx, return_inverse=True,
        return_counts=True)
    return 1.0/(len(counts)*counts[inverse])

#-- PURPOSE: average of per-stock mean squared prediction errors
def loss(model, batch, MASKED=None):
    if (len(batch.target) == 0):
        raise InputError('loss requires at least one sample')
    prediction, _, _ = forward(model, batch, MASKED=MASKED)
    return weighted_loss(batch.target, prediction, batch.stock_idx)

def weighted_loss(target, prediction, stock_idx):
    if (len(target) == 0):
        raise InputError('loss requires at least one sample')
    w = equal_stock_weights(stock_idx)
    return float(np.sum(w*(np.asarray(target) - np.asarray(prediction))**2))

#-- PURPOSE: loss and gradients with respect to the trainable parameters
def loss_and_gradient(model, batch, rng=None, TRAINING=False):
    if (len(batch.target) == 0):
        raise InputError('loss requires at least one sample')
    prediction, outputs, caches = forward(model, batch, rng=rng,
        TRAINING=TRAINING)
    w = equal_stock_weights(batch.stock_idx)
    error = batch.target - prediction
    value = float(np.sum(w*error**2))
    #-- gradient of the loss on each prediction
    dr = -2.0*w*error
    lam = outputs['lambda'][batch.month_pos]
    upstream = {}
    upstream['alpha'] = dr
    upstream['beta'] = dr*lam
    upstream['lambda'] = np.bincount(batch.month_pos, weights=dr*outputs['beta'],
        minlength=batch.common_seq.shape[1])
    grads = []
    for key in BRANCHES:
        if model.masked and (key == 'alpha'):
            continue
        branch = model.branches[key]
        h, cache = caches[key]
        dout = upstream[key]
        dw = np.dot(h.T, dout)
        db = np.array([np.sum(dout)])
        dh = np.outer(dout, branch.w)
        layer_grads, _ = lstm_backward(branch.stack, cache, dh)
        for g in layer_grads:
            grads.extend([g['W'], g['b']])
        grads.extend([dw, db])
    return value, grads

class AdamState(object):
    """
    First and second moment estimates of the Adam optimizer
    """
    def __init__(self, n):
        self.m = np.zeros((n))
        self.v = np.zeros((n))
        self.step = 0

#-- PURPOSE: one Adam update with bias correction after clipping the
#-- gradient to a maximum global norm
def adam_step(params, grads, state, hyper):
    params = np.asarray(params, dtype=np.float64)
    if isinstance(grads, (list, tuple)):
        grads, norm = clip_global_norm(list(grads), hyper.grad_clip)
        g = np.concatenate([np.ravel(x) for x in grads])
    else:
        (g,), norm = clip_global_norm([np.asarray(grads, dtype=np.float64)],
            hyper.grad_clip)
    if (g.shape != params.shape) or (state.m.shape != params.shape):
        raise ShapeError('parameter, gradient and moment shapes differ')
    if not np.all(np.isfinite(g)):
        raise NumericError('non-finite gradient after clipping',
            diagnostics=dict(step=state.step+1, grad_norm=float(norm),
            n_nonfinite=int(np.count_nonzero(~np.isfinite(g)))))
    state.step += 1
    state.m = hyper.adam_beta1*state.m + (1.0 - hyper.adam_beta1)*g
    state.v = hyper.adam_beta2*state.v + (1.0 - hyper.adam_beta2)*g**2
    m_hat = state.m/(1.0 - hyper.adam_beta1**state.step)
    v_hat = state.v/(1.0 - hyper.adam_beta2**state.step)
    update = -hyper.learning_rate*m_hat/(np.sqrt(v_hat) + hyper.adam_eps)
    return params + update, state

class EarlyStopping(object):
    """
    Tracks the best validation loss and the parameters that reached it
    """
    def __init__(self, patience):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = None
        self.best_params = None
        self.bad_epochs = 0

    #-- PURPOSE: record an epoch and return True when training should stop
    def update(self, epoch, val_loss, params):
        if (val_loss < self.best_loss):
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.best_params = np.copy(params)
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return (self.bad_epochs > self.patience)

#-- PURPOSE: predicted excess returns for every sample in a split
def predict_split(model, tensor, split, MASKED=None, CHUNK=24):
    """
    Returns a PredictionPanel for a split name or a list of month indices
    """
    months = split_months(tensor, split) if isinstance(split, str) else \
        np.asarray(split, dtype=int)
    frames = []
    for k in range(0, len(months), CHUNK):
        batch = window_batch(tensor, months[k:k+CHUNK], model.hyper.window)
        if (len(batch.target) == 0):
            continue
        prediction, outputs, _ = forward(model, batch, MASKED=MASKED)
        frames.append(prediction_panel(tensor.stock_ids[batch.stock_idx],
            np.asarray(tensor.months)[batch.month_idx[batch.month_pos]],
            batch.target, prediction, alpha_branch=outputs['alpha'],
            beta=outputs['beta'], lambda_=outputs['lambda'][batch.month_pos]))
    if not frames:
        raise InputError('split contains no samples')
    return pd.concat(frames, ignore_index=True)

#-- PURPOSE: build a PredictionPanel with residual = realized - predicted
def prediction_panel(stock_id, month, realized, predicted, alpha_branch=None,
    beta=None, lambda_=None, alpha_hat=None):
    realized = np.asarray(realized, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    n = len(realized)
    panel = pd.DataFrame(dict(stock_id=np.asarray(stock_id),
        month=np.asarray(month), realized=realized, predicted=predicted,
        residual=realized - predicted))
    for key,val in [('alpha_branch',alpha_branch),('beta',beta),
        ('lambda',lambda_),('alpha_hat',alpha_hat)]:
        panel[key] = np.full((n), np.nan) if val is None else np.asarray(val)
    return panel

#-- PURPOSE: equal-stock-weighted loss of a PredictionPanel
def panel_loss(panel):
    return weighted_loss(panel['realized'].values, panel['predicted'].values,
        panel['stock_id'].values)

#-- PURPOSE: estimate alphas as the difference of masked and unmasked residuals
def estimate_alpha(unmasked, masked):
    keys = ['stock_id','month']
    left = unmasked.set_index(keys)
    right = masked.set_index(keys)
    if left.index.has_duplicates or right.index.has_duplicates:
        raise AlignmentError('prediction panels contain duplicate keys')
    if (len(left) != len(right)) or not left.index.sort_values().equals(
        right.index.sort_values()):
        raise AlignmentError('masked and unmasked panels cover different '
            '(stock, month) keys')
    right = right.reindex(left.index)
    out = left.copy()
    out['predicted_masked'] = right['predicted']
    out['residual_masked'] = right['residual']
    out['alpha_hat'] = right['residual'] - left['residual']
    return out.reset_index()

#-- PURPOSE: train a model with month mini-batches, Adam and early stopping
def train(tensor, hyper, MASKED=False, VERBOSE=False):
    logger = logging.getLogger(__name__)
    train_idx = split_months(tensor, 'train')
    valid_idx = split_months(tensor, 'validate')
    if (len(train_idx) == 0) or (len(valid_idx) == 0):
        raise InputError('training and validation splits must not be empty')
    model = init_model(tensor.chars.shape[2], tensor.common.shape[1], hyper,
        MASKED=MASKED)
    state = AdamState(model.get_flat().size)
    stopper = EarlyStopping(hyper.patience)
    mask_rng = new_rng(hyper.seed, 200)
    order_rng = new_rng(hyper.seed, 300)
    #-- month batches are rebuilt each epoch from a fresh permutation
    rows = []
    for epoch in range(1, hyper.max_epochs+1):
        order = order_rng.permutation(train_idx)
        for k in range(0, len(order), hyper.batch_months):
            batch = window_batch(tensor, np.sort(order[k:k+hyper.batch_months]),
                hyper.window)
            if (len(batch.target) == 0):
                continue
            value, grads = loss_and_gradient(model, batch, rng=mask_rng,
                TRAINING=True)
            if not np.isfinite(value):
                raise NumericError('non-finite training loss',
                    diagnostics=dict(epoch=epoch, step=state.step))
            flat, state = adam_step(model.get_flat(), grads, state, hyper)
            model.set_flat(flat)
        train_loss = panel_loss(predict_split(model, tensor, train_idx))
        val_loss = panel_loss(predict_split(model, tensor, valid_idx))
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NumericError('non-finite loss after epoch {0:d}'.format(epoch),
                diagnostics=dict(train_loss=train_loss, val_loss=val_loss))
        rows.append(dict(epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            lr=hyper.learning_rate, seed=hyper.seed))
        if VERBOSE:
            logger.info('epoch {0:d}: train {1:.6e} validate {2:.6e}'.format(
                epoch, train_loss, val_loss))
        if stopper.update(epoch, val_loss, model.get_flat()):
            logger.info('early stop at epoch {0:d} (best {1:d})'.format(epoch,
                stopper.best_epoch))
            break
    model.set_flat(stopper.best_params)
    log = pd.DataFrame(rows, columns=['epoch','train_loss','val_loss','lr','seed'])
    log.attrs['best_epoch'] = stopper.best_epoch
    return model, log

#-- PURPOSE: expand list-valued hyperparameters into a grid
def expand_grid(params):
    keys = sorted(params.keys())
    values = [v if isinstance(v, (list, tuple)) else [v] for v in
        (params[k] for k in keys)]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]

#-- PURPOSE: train each grid point and keep the best validation loss
def train_grid(tensor, params, MASKED=False, VERBOSE=False):
    best = None
    for point in expand_grid(params):
        hyper = SnapHyper(**point)
        model, log = train(tensor, hyper, MASKED=MASKED, VERBOSE=VERBOSE)
        val_loss = log['val_loss'].min()
        if (best is None) or (val_loss < best[2]):
            best = (model, log, val_loss)
    return best[0], best[1]
