#!/usr/bin/env python
u"""
benchmarks.py
Comparison models for the pseudo-Siamese network: penalized linear
    regressions (ridge, LASSO, elastic net) fit by coordinate descent, a
    single-hidden-layer feedforward network and time-series factor
    regressions on user-supplied factor returns

CALLING SEQUENCE:
    model = fit_regularized(X, y, penalty='l1', lambda_=1e-3)
    model, path = regularization_path(X, y, X_valid, y_valid, penalty='elastic')
    model, log = fit_ffn(X, y, X_valid, y_valid, FfnHyper(hidden=16))
    fits = factor_regression(returns, factors)

NOTES:
    Penalized fits minimize
        1/(2n)*||y - b0 - Xw||^2 + lambda*(mix*|w|_1 + (1-mix)/2*||w||^2)
        with an unpenalized intercept
    Ridge and unpenalized fits use the closed form, LASSO and elastic net
        use cyclic coordinate descent with soft-thresholding on the Gram
        matrix until the largest coefficient change is below 1e-8
    Benchmarks see the characteristics of month t together with the
        common inputs (average characteristics, macro states and market
        return) of month t
    Factor model predictions use expanding-window betas estimated from the
        earlier months of each stock and the realized factors of the
        return month (alpha excluded).  Rows with fewer than 24 earlier
        months or singular factor moments have no prediction

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

PROGRAM DEPENDENCIES:
    numerics.py: random number generation
    data.py: panel tensors
    snap.py: Adam optimizer, early stopping and prediction panels
    stats.py: least squares with robust standard errors

UPDATE HISTORY:
    Written 10/2026
"""
import logging
import numpy as np
import pandas as pd
from snap_toolkit.errors import ConfigError, InputError, AlignmentError, \
    NumericError
from snap_toolkit.numerics import new_rng
from snap_toolkit.data import split_months
from snap_toolkit.snap import AdamState, adam_step, EarlyStopping, \
    prediction_panel, equal_stock_weights
from snap_toolkit.stats import ols_robust, add_intercept

PENALTIES = ('none','l1','l2','elastic')
ACTIVATIONS = ('relu','linear')

class LinearModel(object):
    """
    Penalized linear regression with an unpenalized intercept
    """
    def __init__(self, weights, intercept, penalty='none', lambda_=0.0,
        mix=1.0, objective_path=None, n_sweeps=0, converged=True):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercept = float(intercept)
        self.penalty = penalty
        self.lambda_ = float(lambda_)
        self.mix = float(mix)
        self.objective_path = objective_path or []
        self.n_sweeps = n_sweeps
        self.converged = converged
        if not (np.all(np.isfinite(self.weights)) and
            np.isfinite(self.intercept)):
            raise NumericError('linear model weights are not finite')

    def predict(self, X):
        return np.dot(np.asarray(X, dtype=np.float64), self.weights) + \
            self.intercept

#-- PURPOSE: penalty mixing weight of a penalty name
def _mixing(penalty, mix):
    if penalty not in PENALTIES:
        raise ConfigError('penalty must be one of {0}'.format(PENALTIES))
    if (penalty == 'l1'):
        return 1.0
    elif (penalty in ('l2','none')):
        return 0.0
    if not (0.0 <= mix <= 1.0):
        raise ConfigError('elastic net mixing must be in [0,1]')
    return float(mix)

#-- PURPOSE: penalized objective of centered data
def objective(G, c, yy, n, w, lambda_, mix):
    loss = (yy - 2.0*np.dot(c, w) + np.dot(w, np.dot(G, w)))/(2.0*n)
    penalty = lambda_*(mix*np.sum(np.abs(w)) + 0.5*(1.0 - mix)*np.dot(w, w))
    return loss + penalty

#-- PURPOSE: smallest lambda with all LASSO weights at zero
def lambda_max(X, y, mix=1.0):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c = np.dot((X - X.mean(axis=0)).T, y - y.mean())
    return np.max(np.abs(c))/(len(y)*max(mix, 1e-3))

#-- PURPOSE: fit a penalized linear regression
def fit_regularized(X, y, penalty='l1', lambda_=0.0, mix=0.5, tol=1e-8,
    max_sweeps=10000, WARM_START=None):
    logger = logging.getLogger(__name__)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n, p = X.shape
    if (len(y) != n) or (n < 2):
        raise InputError('features and targets must share at least two rows')
    if (lambda_ < 0):
        raise ConfigError('penalty weight must be non-negative')
    mix = _mixing(penalty, mix)
    xbar, ybar = X.mean(axis=0), y.mean()
    Xc = X - xbar
    G = np.dot(Xc.T, Xc)
    c = np.dot(Xc.T, y - ybar)
    yy = np.dot(y - ybar, y - ybar)
    lam = 0.0 if (penalty == 'none') else lambda_
    if (mix == 0.0):
        #-- closed form ridge (or least squares)
        A = G/n + lam*np.eye(p)
        try:
            w = np.linalg.solve(A, c/n)
        except np.linalg.LinAlgError:
            if (lam > 0):
                raise
            w = np.linalg.lstsq(G, c, rcond=None)[0]
        path = [objective(G, c, yy, n, w, lam, mix)]
        return LinearModel(w, ybar - np.dot(xbar, w), penalty=penalty,
            lambda_=lam, mix=mix, objective_path=path)
    #-- cyclic coordinate descent with soft-thresholding
    w = np.zeros(p) if WARM_START is None else np.array(WARM_START, float)
    diag = np.diag(G)/n + lam*(1.0 - mix)
    threshold = lam*mix
    path = [objective(G, c, yy, n, w, lam, mix)]
    converged = False
    for sweep in range(1, max_sweeps+1):
        change = 0.0
        for j in range(p):
            if (diag[j] <= 0):
                continue
            rho = (c[j] - np.dot(G[j], w) + G[j,j]*w[j])/n
            wj = np.sign(rho)*max(abs(rho) - threshold, 0.0)/diag[j]
            change = max(change, abs(wj - w[j]))
            w[j] = wj
        path.append(objective(G, c, yy, n, w, lam, mix))
        if (change < tol):
            converged = True
            break
    if not converged:
        logger.warning('coordinate descent stopped after {0:d} sweeps '
            '(lambda={1:g})'.format(sweep, lam))
    return LinearModel(w, ybar - np.dot(xbar, w), penalty=penalty,
        lambda_=lam, mix=mix, objective_path=path, n_sweeps=sweep,
        converged=converged)

#-- PURPOSE: select the penalty weight on a validation split
def regularization_path(X, y, X_valid, y_valid, penalty='l1', mix=0.5,
    n_lambda=100, eps=1e-4, WEIGHTS=None):
    """
    Fits a log-spaced grid from lambda_max down to eps*lambda_max with warm
        starts and keeps the lowest validation loss

    WEIGHTS: optional validation sample weights (equal-stock weights)
    """
    lmax = lambda_max(X, y, mix=_mixing(penalty, mix) or 1.0)
    grid = np.geomspace(lmax, eps*lmax, n_lambda) if (lmax > 0) else \
        np.zeros((1))
    weights = np.full(len(y_valid), 1.0/len(y_valid)) if WEIGHTS is None \
        else np.asarray(WEIGHTS)
    best, rows, warm = None, [], None
    for lam in grid:
        model = fit_regularized(X, y, penalty=penalty, lambda_=lam, mix=mix,
            WARM_START=warm)
        warm = model.weights
        val_loss = np.sum(weights*(y_valid - model.predict(X_valid))**2)
        rows.append(dict(lambda_=lam, val_loss=val_loss,
            nonzero=int(np.count_nonzero(model.weights))))
        if (best is None) or (val_loss < best[1]):
            best = (model, val_loss)
    return best[0], pd.DataFrame(rows)

class FfnHyper(object):
    """
    Feedforward network hyperparameters with the Adam settings of SnapHyper
    """
    defaults = dict(hidden=16, activation='relu', learning_rate=1e-3,
        adam_beta1=0.9, adam_beta2=0.999, adam_eps=1e-8, grad_clip=5.0,
        batch_size=256, max_epochs=100, patience=5, seed=0)

    def __init__(self, **kwargs):
        unknown = set(kwargs.keys()) - set(self.defaults.keys())
        if unknown:
            raise ConfigError('unknown FFN hyperparameters: {0}'.format(
                ','.join(sorted(unknown))))
        for key,val in self.defaults.items():
            setattr(self, key, kwargs.get(key, val))
        if (self.hidden is None) or (self.hidden < 1):
            raise ConfigError('FFN hidden width must be positive')
        if self.activation not in ACTIVATIONS:
            raise ConfigError('activation must be one of {0}'.format(
                ACTIVATIONS))
        if (self.batch_size < 1) or (self.max_epochs < 1):
            raise ConfigError('batch_size and max_epochs must be positive')

class FfnModel(object):
    """
    One hidden layer network with a scalar output
    """
    def __init__(self, W1, b1, w2, b2, activation='relu'):
        self.W1 = np.array(W1, dtype=np.float64)
        self.b1 = np.array(b1, dtype=np.float64)
        self.w2 = np.array(w2, dtype=np.float64)
        self.b2 = np.array(b2, dtype=np.float64).reshape(1)
        self.activation = activation

    def parameters(self):
        return [self.W1, self.b1, self.w2, self.b2]

    def get_flat(self):
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat):
        offset = 0
        for p in self.parameters():
            p[...] = flat[offset:offset+p.size].reshape(p.shape)
            offset += p.size

    def forward(self, X):
        pre = np.dot(X, self.W1) + self.b1
        if (self.activation == 'relu'):
            h = np.maximum(pre, 0.0)
        else:
            h = pre
        return np.dot(h, self.w2) + self.b2[0], (pre, h)

    def predict(self, X):
        return self.forward(np.asarray(X, dtype=np.float64))[0]

#-- PURPOSE: initialize a feedforward network
def init_ffn(input_dim, hyper):
    rng = new_rng(hyper.seed, 400)
    limit = np.sqrt(6.0/(input_dim + hyper.hidden))
    W1 = rng.uniform(-limit, limit, size=(input_dim, hyper.hidden))
    limit = np.sqrt(6.0/(hyper.hidden + 1.0))
    w2 = rng.uniform(-limit, limit, size=hyper.hidden)
    return FfnModel(W1, np.zeros(hyper.hidden), w2, np.zeros(1),
        activation=hyper.activation)

#-- PURPOSE: weighted squared loss and gradients of a feedforward network
def ffn_loss_and_gradient(model, X, y, weights=None):
    n = len(y)
    weights = np.full(n, 1.0/n) if weights is None else weights
    prediction, (pre, h) = model.forward(X)
    error = y - prediction
    value = float(np.sum(weights*error**2))
    dr = -2.0*weights*error
    dw2 = np.dot(h.T, dr)
    db2 = np.array([np.sum(dr)])
    dh = np.outer(dr, model.w2)
    if (model.activation == 'relu'):
        dh = dh*(pre > 0)
    dW1 = np.dot(X.T, dh)
    db1 = np.sum(dh, axis=0)
    return value, [dW1, db1, dw2, db2]

#-- PURPOSE: train a feedforward network with Adam and early stopping
def fit_ffn(X, y, X_valid, y_valid, hyper, VALID_WEIGHTS=None, VERBOSE=False):
    logger = logging.getLogger(__name__)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if (len(y) == 0) or (len(y_valid) == 0):
        raise InputError('training and validation sets must not be empty')
    model = init_ffn(X.shape[1], hyper)
    state = AdamState(model.get_flat().size)
    stopper = EarlyStopping(hyper.patience)
    rng = new_rng(hyper.seed, 300)
    weights = np.full(len(y_valid), 1.0/len(y_valid)) if VALID_WEIGHTS is None \
        else VALID_WEIGHTS
    rows = []
    for epoch in range(1, hyper.max_epochs+1):
        order = rng.permutation(len(y))
        for k in range(0, len(y), hyper.batch_size):
            rows_k = order[k:k+hyper.batch_size]
            value, grads = ffn_loss_and_gradient(model, X[rows_k], y[rows_k])
            if not np.isfinite(value):
                raise NumericError('non-finite FFN loss',
                    diagnostics=dict(epoch=epoch, step=state.step))
            flat, state = adam_step(model.get_flat(), grads, state, hyper)
            model.set_flat(flat)
        train_loss = float(np.mean((y - model.predict(X))**2))
        val_loss = float(np.sum(weights*(y_valid - model.predict(X_valid))**2))
        rows.append(dict(epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            lr=hyper.learning_rate, seed=hyper.seed))
        if VERBOSE:
            logger.info('FFN epoch {0:d}: train {1:.6e} validate {2:.6e}'.format(
                epoch, train_loss, val_loss))
        if stopper.update(epoch, val_loss, model.get_flat()):
            break
    model.set_flat(stopper.best_params)
    log = pd.DataFrame(rows, columns=['epoch','train_loss','val_loss','lr',
        'seed'])
    log.attrs['best_epoch'] = stopper.best_epoch
    return model, log

#-- PURPOSE: benchmark design matrix of stock and common inputs
def benchmark_features(tensor, months):
    months = np.asarray(months, dtype=int)
    samples = tensor.present & np.isfinite(tensor.target)
    mi, si = np.nonzero(samples[months])
    mi = months[mi]
    X = np.concatenate([tensor.chars[mi,si,:], tensor.common[mi,:]], axis=1)
    return X, tensor.target[mi,si], mi, si

class BenchmarkPredictor(object):
    """
    Fitted benchmark producing PredictionPanels from panel tensors
    """
    def __init__(self, name, model):
        self.name = name
        self.model = model

    def predict_split(self, tensor, split):
        months = split_months(tensor, split) if isinstance(split, str) else \
            np.asarray(split, dtype=int)
        X, y, mi, si = benchmark_features(tensor, months)
        if (len(y) == 0):
            raise InputError('split contains no samples')
        return prediction_panel(tensor.stock_ids[si],
            np.asarray(tensor.months)[mi], y, self.model.predict(X))

#-- PURPOSE: fit the configured benchmark models on a panel tensor
def fit_benchmarks(tensor, models=('ols','ridge','lasso','elastic','ffn'),
    mix=0.5, n_lambda=100, ffn=None, VERBOSE=False):
    logger = logging.getLogger(__name__)
    X, y, _, si = benchmark_features(tensor, split_months(tensor, 'train'))
    Xv, yv, _, sv = benchmark_features(tensor, split_months(tensor,
        'validate'))
    wv = equal_stock_weights(sv)
    fitted = {}
    for name in models:
        if (name == 'ols'):
            model = fit_regularized(X, y, penalty='none')
        elif (name in ('ridge','lasso','elastic')):
            penalty = dict(ridge='l2', lasso='l1', elastic='elastic')[name]
            model, _ = regularization_path(X, y, Xv, yv, penalty=penalty,
                mix=mix, n_lambda=n_lambda, WEIGHTS=wv)
        elif (name == 'ffn'):
            hyper = ffn if isinstance(ffn, FfnHyper) else FfnHyper(**(ffn or {}))
            model, _ = fit_ffn(X, y, Xv, yv, hyper, VALID_WEIGHTS=wv,
                VERBOSE=VERBOSE)
        else:
            raise ConfigError('unknown benchmark {0}'.format(name))
        logger.info('fitted benchmark {0}'.format(name))
        fitted[name] = BenchmarkPredictor(name, model)
    return fitted

#-- PURPOSE: months of a factor table aligned with requested months
def _factor_rows(factors, months, columns=None):
    columns = list(factors.columns) if columns is None else list(columns)
    unknown = set(columns) - set(factors.columns)
    if unknown:
        raise AlignmentError('unknown factor columns: {0}'.format(
            ','.join(sorted(unknown))))
    missing = sorted(set(months) - set(factors.index))
    if missing:
        raise AlignmentError('factors missing for months {0}'.format(
            ','.join(missing[:5])))
    rows = factors.loc[list(months), columns]
    if rows.isna().any().any():
        raise AlignmentError('factor table has missing values')
    return rows.values.astype(np.float64), columns

#-- PURPOSE: time-series regressions of excess returns on factors
def factor_regression(returns, factors, columns=None):
    """
    Arguments
    ---------
    returns: Series or DataFrame of excess returns indexed by month
    factors: DataFrame of factor returns indexed by month

    Returns
    -------
    dictionary of asset name to OlsFit with the intercept as alpha
    """
    frame = returns.to_frame() if isinstance(returns, pd.Series) else returns
    fits = {}
    for asset in frame.columns:
        y = frame[asset].dropna()
        F, names = _factor_rows(factors, y.index, columns)
        fits[asset] = ols_robust(y.values, add_intercept(F),
            names=['alpha'] + names)
    return fits

#-- PURPOSE: next calendar month of ISO months
def next_months(months):
    return list((pd.PeriodIndex(list(months), freq='M') + 1).strftime('%Y-%m'))

#-- PURPOSE: regress arbitrage portfolio returns on each factor model
def arbitrage_regression(series, factors, factor_models):
    """
    series: PortfolioSeries of arbitrage returns realized after each month
    factor_models: dictionary of model name to list of factor columns
    """
    returns = pd.Series(series.returns, index=next_months(series.months),
        name=series.name)
    return {name:factor_regression(returns, factors, columns)[series.name]
        for name,columns in factor_models.items()}

#-- PURPOSE: stock predictions from expanding-window factor betas
def factor_model_predictions(panel, factors, columns, min_obs=24):
    """
    panel: DataFrame with stock_id, month and realized columns where the
        realized return of month t is earned over month t+1

    Rows with fewer than min_obs earlier months of the same stock, or with
    singular factor moments, have no prediction and are left out
    """
    panel = panel.sort_values(['stock_id','month'], kind='mergesort')
    F, _ = _factor_rows(factors, next_months(panel['month'].unique()),
        columns)
    lookup = {m:F[i] for i,m in enumerate(panel['month'].unique())}
    predicted = np.full((len(panel)), np.nan)
    k = len(columns) + 1
    position = 0
    for _,group in panel.groupby('stock_id', sort=False):
        D = add_intercept(np.array([lookup[m] for m in group['month']]))
        y = group['realized'].values
        #-- sums over strictly earlier months
        XtX = np.cumsum(D[:,:,np.newaxis]*D[:,np.newaxis,:], axis=0)
        Xty = np.cumsum(D*y[:,np.newaxis], axis=0)
        for r in range(len(y)):
            if (r < max(min_obs, k+1)):
                continue
            try:
                b = np.linalg.solve(XtX[r-1], Xty[r-1])
            except np.linalg.LinAlgError:
                continue
            predicted[position + r] = np.dot(D[r,1:], b[1:])
        position += len(y)
    covered = np.isfinite(predicted)
    return prediction_panel(panel['stock_id'].values[covered],
        panel['month'].values[covered], panel['realized'].values[covered],
        predicted[covered])
