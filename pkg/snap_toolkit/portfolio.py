#!/usr/bin/env python
u"""
portfolio.py
Predictive R^2, decile long-short zero-net-investment portfolios,
    annualized Sharpe ratios, alpha-weighted arbitrage portfolios and
    out-of-sample performance decay tables

CALLING SEQUENCE:
    r2 = r2_predictive(panel)
    series = long_short_series(panel, WEIGHTING='value', MKTCAP=caps)
    SR = sharpe(series)
    report = eval_report(dict(snap=panels, lasso=lasso_panels))

INPUTS:
    panel: PredictionPanel (pandas DataFrame) with columns stock_id, month,
        realized, predicted, residual and optionally alpha_hat

NOTES:
    Predictive R^2 uses the uncentered sum of squared realized returns
    Decile breakpoints come from the evaluated cross-section with ties
        broken by stock_id, position p of n sorted stocks is in decile
        floor(10*p/n)
    Value weights use the market caps at the end of the prediction month
    Sharpe ratios use the sample standard deviation and are annualized
        by sqrt(12)
    Arbitrage weights are alpha_hat/N without demeaning
    Portfolios are rebalanced monthly

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

UPDATE HISTORY:
    Written 10/2026
"""
import json
import numpy as np
import pandas as pd
from snap_toolkit.errors import InputError, DegenerateInputError

#-- months per year for annualization
PERIODS_PER_YEAR = 12
WEIGHTINGS = ('equal','value')

class PortfolioSeries(object):
    """
    Monthly returns of one portfolio construction
    """
    def __init__(self, months, returns, weighting='equal',
        construction='decile_long_short', name=None):
        self.months = list(months)
        self.returns = np.asarray(returns, dtype=np.float64)
        self.weighting = weighting
        self.construction = construction
        self.name = name or '{0}_{1}'.format(construction, weighting)
        if (len(self.months) != len(self.returns)):
            raise InputError('one return is required per month')
        if any(a >= b for a,b in zip(self.months[:-1], self.months[1:])):
            raise InputError('portfolio months must be strictly increasing')

    def __len__(self):
        return len(self.returns)

    def scale(self, c):
        return PortfolioSeries(self.months, c*self.returns, self.weighting,
            self.construction, self.name)

    def to_frame(self):
        return pd.DataFrame(dict(month=self.months, series_name=self.name,
            value=self.returns))

#-- PURPOSE: out-of-sample predictive R^2 of a prediction panel
def r2_predictive(panel):
    if (len(panel) == 0):
        raise InputError('prediction panel is empty')
    realized = np.asarray(panel['realized'], dtype=np.float64)
    residual = realized - np.asarray(panel['predicted'], dtype=np.float64)
    denominator = np.sum(realized**2)
    if (denominator <= 0):
        raise DegenerateInputError('realized returns are all zero')
    return 1.0 - np.sum(residual**2)/denominator

#-- PURPOSE: decile assignment of a cross-section by prediction
def decile_assignment(predicted, stock_id):
    predicted = np.asarray(predicted, dtype=np.float64)
    n = len(predicted)
    order = np.lexsort((np.asarray(stock_id), predicted))
    decile = np.empty((n), dtype=int)
    decile[order] = (10*np.arange(n))//n
    return decile

#-- PURPOSE: weighted mean of realized returns in one portfolio leg
def _leg_return(realized, weights):
    if weights is None:
        return np.mean(realized)
    return np.sum(weights*realized)/np.sum(weights)

#-- PURPOSE: long the top prediction decile and short the bottom decile
def decile_long_short(predicted, realized, stock_id=None, mktcap=None,
    WEIGHTING='equal'):
    predicted = np.asarray(predicted, dtype=np.float64)
    realized = np.asarray(realized, dtype=np.float64)
    n = len(predicted)
    if (n < 10):
        raise InputError('decile portfolios need at least 10 stocks')
    if WEIGHTING not in WEIGHTINGS:
        raise InputError('weighting must be one of {0}'.format(WEIGHTINGS))
    stock_id = np.arange(n) if stock_id is None else stock_id
    decile = decile_assignment(predicted, stock_id)
    weights = None
    if (WEIGHTING == 'value'):
        if mktcap is None:
            raise InputError('value weighting requires market caps')
        weights = np.asarray(mktcap, dtype=np.float64)
        if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
            raise InputError('value weighting requires positive market caps')
    legs = {}
    for d in (0, 9):
        members = (decile == d)
        w = None if weights is None else weights[members]
        legs[d] = _leg_return(realized[members], w)
    return legs[9] - legs[0]

#-- PURPOSE: monthly decile long-short returns of a prediction panel
def long_short_series(panel, WEIGHTING='equal', MKTCAP=None, name=None):
    """
    MKTCAP: market caps aligned with the rows of panel (value weighting)
    """
    frame = panel[['stock_id','month','predicted','realized']].copy()
    if (WEIGHTING == 'value'):
        if MKTCAP is None:
            raise InputError('value weighting requires market caps')
        frame['mktcap'] = np.asarray(MKTCAP, dtype=np.float64)
    months, returns = [], []
    for month,group in frame.groupby('month', sort=True):
        if (len(group) < 10):
            continue
        caps = group['mktcap'].values if (WEIGHTING == 'value') else None
        months.append(month)
        returns.append(decile_long_short(group['predicted'].values,
            group['realized'].values, stock_id=group['stock_id'].values,
            mktcap=caps, WEIGHTING=WEIGHTING))
    return PortfolioSeries(months, returns, weighting=WEIGHTING,
        construction='decile_long_short', name=name)

#-- PURPOSE: annualized Sharpe ratio of monthly returns
def sharpe(series):
    returns = series.returns if isinstance(series, PortfolioSeries) else \
        np.asarray(series, dtype=np.float64)
    if (len(returns) < 2):
        raise InputError('Sharpe ratio needs at least two months')
    sd = np.std(returns, ddof=1)
    if (sd == 0) or not np.isfinite(sd):
        raise DegenerateInputError('Sharpe ratio undefined for zero dispersion')
    return np.mean(returns)/sd*np.sqrt(PERIODS_PER_YEAR)

#-- PURPOSE: return of the alpha-weighted arbitrage portfolio
def arbitrage_portfolio(alpha_hat, realized):
    alpha_hat = np.asarray(alpha_hat, dtype=np.float64)
    realized = np.asarray(realized, dtype=np.float64)
    N = len(alpha_hat)
    if (N == 0):
        raise InputError('arbitrage portfolio needs at least one stock')
    if (len(realized) != N):
        raise InputError('alphas and returns must cover the same stocks')
    if not np.all(np.isfinite(alpha_hat)):
        raise InputError('estimated alphas must be finite')
    return np.sum(alpha_hat/N*realized)

#-- PURPOSE: monthly arbitrage portfolio returns of an alpha panel
def arbitrage_series(panel, name='arbitrage'):
    months, returns = [], []
    for month,group in panel.groupby('month', sort=True):
        months.append(month)
        returns.append(arbitrage_portfolio(group['alpha_hat'].values,
            group['realized'].values))
    return PortfolioSeries(months, returns, weighting='alpha',
        construction='arbitrage', name=name)

#-- PURPOSE: long-format (month, series_name, value) frame for plotting
def tidy_series(*series):
    frames = [s.to_frame() for s in series]
    if not frames:
        return pd.DataFrame(columns=['month','series_name','value'])
    return pd.concat(frames, ignore_index=True)

#-- PURPOSE: percentage decay of a metric relative to the training split
def decay(train_value, split_value):
    if (train_value == 0):
        return np.nan
    return (train_value - split_value)/train_value*100.0

class EvalReport(object):
    """
    Predictive R^2 and Sharpe ratios per model and split with decay
    """
    decay_definition = '(train - split)/train * 100'
    def __init__(self, metrics):
        self.metrics = metrics

    def to_frame(self):
        rows = []
        for model,splits in self.metrics.items():
            for split,values in splits.items():
                rows.append(dict(model=model, split=split, **values))
        return pd.DataFrame(rows)

    def as_dict(self):
        return dict(decay_definition=self.decay_definition,
            metrics=self.metrics)

    def to_json(self, FILENAME):
        with open(FILENAME, mode='w') as fid:
            json.dump(self.as_dict(), fid, indent=2, sort_keys=True,
                default=_json_default)

def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(repr(obj))

#-- PURPOSE: metric guarded against degenerate inputs
def _metric(function, *args):
    try:
        return float(function(*args))
    except InputError:
        return None

#-- PURPOSE: assemble R^2, Sharpe ratios and decay for every model
def eval_report(outputs, MKTCAP=None):
    """
    Arguments
    ---------
    outputs: dictionary of model name to dictionary of split name to
        PredictionPanel
    MKTCAP: optional function mapping a PredictionPanel to row-aligned caps
    """
    metrics = {}
    for model,panels in outputs.items():
        metrics[model] = {}
        for split,panel in panels.items():
            values = dict(r2=_metric(r2_predictive, panel))
            values['sharpe'] = _metric(lambda p: sharpe(long_short_series(p)),
                panel)
            if MKTCAP is not None:
                caps = MKTCAP(panel)
                values['sharpe_vw'] = _metric(lambda p: sharpe(
                    long_short_series(p, WEIGHTING='value', MKTCAP=caps)),
                    panel)
            else:
                values['sharpe_vw'] = None
            metrics[model][split] = values
        #-- decay of each metric from the training split
        train = metrics[model].get('train')
        for split,values in metrics[model].items():
            for key in ('r2','sharpe','sharpe_vw'):
                ok = train and (train[key] is not None) and \
                    (values[key] is not None)
                d = decay(train[key], values[key]) if ok else None
                values['{0}_decay'.format(key)] = None if (d is None) or \
                    not np.isfinite(d) else d
    return EvalReport(metrics)
