#!/usr/bin/env python
u"""
importance.py
Feature importance from the change of predictions when one input feature
    is perturbed by Gaussian noise

CALLING SEQUENCE:
    rms = perturb_importance(model, tensor, 'test', 3, scope='characteristic')
    report = importance_report(model, tensor, split='test', scope='macro')

INPUTS:
    model: object with predict_split(tensor, split) returning a
        PredictionPanel (SnapModel or a benchmark model)
    tensor: PanelTensor from data.panel_tensor

OPTIONS:
    scope: characteristic (stock inputs of the alpha and beta branches) or
        macro (average characteristics, macro states and market return
        of the factor premium branch)
    scale: standard deviation of the perturbation
    repetitions: number of independent perturbations averaged per feature
    THREADS: number of worker processes

NOTES:
    Noise is drawn for every stock-month (or month) from a child stream
        keyed by the scope, the feature index and the repetition
    Perturbed characteristics do not change the average characteristics
        seen by the factor premium branch

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

PROGRAM DEPENDENCIES:
    numerics.py: child random streams

UPDATE HISTORY:
    Written 10/2026
"""
import logging
import multiprocessing
import numpy as np
import pandas as pd
from snap_toolkit.errors import InputError, ParameterError
from snap_toolkit.numerics import new_rng, sample_normal

#-- input scopes and their stream keys
SCOPES = dict(characteristic=1, macro=2)

#-- PURPOSE: names of the features in a scope
def scope_features(tensor, scope):
    if (scope == 'characteristic'):
        return list(tensor.char_names)
    elif (scope == 'macro'):
        return list(tensor.common_names)
    raise InputError('unknown importance scope {0}'.format(scope))

#-- PURPOSE: copy of a tensor with noise added to one feature column
def perturb_tensor(tensor, feature, scope, rng, scale=0.2):
    perturbed = tensor.copy()
    if (scope == 'characteristic'):
        M, S, _ = tensor.chars.shape
        noise = sample_normal(rng, 0.0, scale, M*S).reshape(M, S)
        perturbed.chars[:,:,feature] += np.where(tensor.present, noise, 0.0)
    else:
        M = tensor.common.shape[0]
        perturbed.common[:,feature] += sample_normal(rng, 0.0, scale, M)
    return perturbed

#-- PURPOSE: root-mean-square prediction change from perturbing a feature
def perturb_importance(model, tensor, split, feature, scope='characteristic',
    seed=0, scale=0.2, repetitions=1, BASELINE=None):
    n_features = len(scope_features(tensor, scope))
    if not (0 <= feature < n_features):
        raise InputError('feature index {0} outside 0..{1:d}'.format(feature,
            n_features-1))
    if (scale < 0):
        raise ParameterError('perturbation scale must be non-negative')
    if (repetitions < 1):
        raise ParameterError('repetitions must be positive')
    baseline = model.predict_split(tensor, split) if BASELINE is None \
        else BASELINE
    rms = []
    for rep in range(repetitions):
        rng = new_rng(seed, SCOPES[scope], feature, rep)
        perturbed = perturb_tensor(tensor, feature, scope, rng, scale=scale)
        panel = model.predict_split(perturbed, split)
        diff = baseline['predicted'].values - panel['predicted'].values
        rms.append(np.sqrt(np.mean(diff**2)))
    return float(np.mean(rms))

class ImportanceReport(object):
    """
    Perturbation importance of every feature in a scope

    frame: DataFrame of feature, feature_id, scope, rms, rank, model_name
    """
    def __init__(self, frame):
        self.frame = frame

    def __len__(self):
        return len(self.frame)

    def top(self, n):
        return list(self.frame.sort_values('rank')['feature'][:n])

    def to_csv(self, FILENAME):
        self.frame.to_csv(FILENAME, index=False)

def _worker(args):
    model, tensor, split, feature, scope, seed, scale, repetitions, \
        baseline = args
    return perturb_importance(model, tensor, split, feature, scope=scope,
        seed=seed, scale=scale, repetitions=repetitions, BASELINE=baseline)

#-- PURPOSE: rank every feature of a scope by perturbation importance
def importance_report(model, tensor, split='test', scope='characteristic',
    seed=0, scale=0.2, repetitions=1, THREADS=1, model_name='snap'):
    logger = logging.getLogger(__name__)
    names = scope_features(tensor, scope)
    baseline = model.predict_split(tensor, split)
    args = [(model, tensor, split, j, scope, seed, scale, repetitions,
        baseline) for j in range(len(names))]
    if (THREADS > 1):
        with multiprocessing.Pool(processes=THREADS) as pool:
            rms = pool.map(_worker, args)
    else:
        rms = [_worker(a) for a in args]
    frame = pd.DataFrame(dict(feature=names, feature_id=np.arange(len(names)),
        scope=scope, rms=np.asarray(rms, dtype=np.float64),
        model_name=model_name))
    #-- descending RMS with ties in feature order
    order = np.lexsort((frame['feature_id'].values, -frame['rms'].values))
    rank = np.empty(len(names), dtype=int)
    rank[order] = np.arange(1, len(names)+1)
    frame['rank'] = rank
    logger.info('{0} importance: {1}'.format(scope, ', '.join(
        frame.sort_values('rank')['feature'][:5])))
    return ImportanceReport(frame[['feature','feature_id','scope','rms',
        'rank','model_name']])
