#!/usr/bin/env python
u"""
clustering.py
K-Means clustering of monthly (estimated alpha, realized excess return)
    pairs of the arbitrage portfolio, elbow selection of the cluster
    count and time trends of the highest, median and lowest cluster
    Sharpe ratios

CALLING SEQUENCE:
    result = kmeans(points, 5, seed=0)
    k, inertia = elbow_detect(points, range(2,16), seed=0)
    clusters = monthly_cluster_sharpes(alpha_panel, 5, seed=0)
    fits = sharpe_trend(clusters.series)

NOTES:
    Lloyd iterations start from k-means++ seeding with n_init restarts
    An empty cluster is refilled with the point farthest from its centroid
    Monthly points are standardized to zero mean and unit variance
    Points farther than OUTLIER_IQR interquartile ranges from the monthly
        median are removed before clustering
    The cluster Sharpe ratio is the cross-sectional mean over standard
        deviation of the member excess returns within one month
    Clusters with fewer than two members or no dispersion are not ranked
    The elbow is the largest second difference of the inertia curve,
        which is computed one count beyond each end of the requested range

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    scipy: Scientific Tools for Python
        https://docs.scipy.org/doc/
    scikit-learn: Machine Learning in Python
        https://scikit-learn.org/stable/
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

PROGRAM DEPENDENCIES:
    numerics.py: child seeds
    stats.py: least squares with robust standard errors

UPDATE HISTORY:
    Written 10/2026
"""
import logging
import numpy as np
import pandas as pd
import scipy.spatial.distance
from sklearn.cluster import kmeans_plusplus
from snap_toolkit.errors import InputError
from snap_toolkit.numerics import child_seed
from snap_toolkit.stats import ols_robust, add_intercept

#-- cluster ranks tracked each month
RANKS = ('highest','median','lowest')

class KMeansResult(object):
    """
    Centroids, assignments and inertia of a K-Means fit

    inertia_path: inertia after each assignment step of the kept run
    """
    def __init__(self, centroids, assignments, inertia, inertia_path,
        n_iter):
        self.centroids = centroids
        self.assignments = assignments
        self.inertia = float(inertia)
        self.inertia_path = list(inertia_path)
        self.n_iter = n_iter

    @property
    def k(self):
        return len(self.centroids)

#-- PURPOSE: assign points to the nearest centroid
def _assign(X, centers):
    d = scipy.spatial.distance.cdist(X, centers, 'sqeuclidean')
    labels = np.argmin(d, axis=1)
    return labels, d

#-- PURPOSE: refill empty clusters with the farthest points
def _repair(X, centers, labels, d):
    logger = logging.getLogger(__name__)
    k = len(centers)
    for j in range(k):
        if np.any(labels == j):
            continue
        counts = np.bincount(labels, minlength=k)
        cost = d[np.arange(len(X)),labels]
        cost[counts[labels] < 2] = -np.inf
        idx = int(np.argmax(cost))
        logger.debug('refilling empty cluster {0:d} with point {1:d}'.format(
            j, idx))
        labels[idx] = j
        centers[j] = X[idx]
        d[idx,j] = 0.0
    return centers, labels

#-- PURPOSE: one run of Lloyd's algorithm from given centers
def _lloyd(X, centers, max_iter, tol):
    centers = np.array(centers, dtype=np.float64)
    path = []
    for n_iter in range(1, max_iter+1):
        labels, d = _assign(X, centers)
        centers, labels = _repair(X, centers, labels, d)
        path.append(np.sum((X - centers[labels])**2))
        updated = np.array([X[labels == j].mean(axis=0) for j in
            range(len(centers))])
        shift = np.max(np.abs(updated - centers))
        centers = updated
        if (shift <= tol):
            break
    #-- final assignment so that every point sits with its nearest centroid
    labels, d = _assign(X, centers)
    centers, labels = _repair(X, centers, labels, d)
    inertia = np.sum((X - centers[labels])**2)
    path.append(inertia)
    return centers, labels, inertia, path, n_iter

#-- PURPOSE: K-Means with k-means++ seeding and restarts
def kmeans(points, k, seed=0, max_iter=300, n_init=10, tol=1e-10):
    X = np.asarray(points, dtype=np.float64)
    if (X.ndim == 1):
        X = X[:,np.newaxis]
    if (k < 1):
        raise InputError('number of clusters must be positive')
    distinct = len(np.unique(X, axis=0)) if len(X) else 0
    if (k > distinct):
        raise InputError('{0:d} clusters requested for {1:d} distinct '
            'points'.format(k, distinct))
    best = None
    for run in range(n_init):
        centers, _ = kmeans_plusplus(X, k,
            random_state=child_seed(seed, run) % (2**31))
        fit = _lloyd(X, centers, max_iter, tol)
        if (best is None) or (fit[2] < best[2]):
            best = fit
    centers, labels, inertia, path, n_iter = best
    return KMeansResult(centers, labels, inertia, path, n_iter)

#-- PURPOSE: cluster count with the largest second difference of an
#-- inertia curve
def elbow_from_inertia(ks, inertia, candidates=None):
    """
    Arguments
    ---------
    ks: increasing cluster counts
    inertia: within-cluster sum of squares for each count
    candidates: counts that may be selected (default every interior count)

    The first and last counts have no second difference and are never
        selected
    """
    ks = list(ks)
    inertia = np.asarray(inertia, dtype=np.float64)
    if (len(ks) < 3):
        raise InputError('elbow detection needs at least three cluster counts')
    curvature = inertia[:-2] - 2.0*inertia[1:-1] + inertia[2:]
    interior = ks[1:-1]
    if candidates is not None:
        allowed = np.isin(interior, list(candidates))
        if not np.any(allowed):
            raise InputError('no candidate cluster count has a second '
                'difference')
        curvature = np.where(allowed, curvature, -np.inf)
    #-- np.argmax keeps the smallest k on ties
    return interior[int(np.argmax(curvature))]

#-- PURPOSE: choose the cluster count from the inertia curve
def elbow_detect(points, k_range=range(2,16), seed=0, n_init=10):
    """
    The inertia curve is extended by one count on each side of k_range
        so that its first and last counts can be selected
    """
    X = np.asarray(points, dtype=np.float64)
    distinct = len(np.unique(X, axis=0))
    ks = [k for k in k_range if (k <= distinct)]
    if not ks:
        raise InputError('fewer distinct points than the smallest k')
    padded = list(ks)
    if (ks[0] > 1):
        padded.insert(0, ks[0] - 1)
    if (ks[-1] < distinct):
        padded.append(ks[-1] + 1)
    inertia = [kmeans(X, k, seed=child_seed(seed, k), n_init=n_init).inertia
        for k in padded]
    k = elbow_from_inertia(padded, inertia, candidates=ks)
    series = pd.Series(inertia, index=padded, name='inertia')
    return k, series.loc[ks]

#-- PURPOSE: mask of points within a multiple of the IQR of the median
def outlier_mask(X, OUTLIER_IQR=8.0):
    keep = np.ones(len(X), dtype=bool)
    if OUTLIER_IQR is None:
        return keep
    median = np.median(X, axis=0)
    q75, q25 = np.percentile(X, [75, 25], axis=0)
    iqr = q75 - q25
    for j in range(X.shape[1]):
        if (iqr[j] > 0):
            keep &= np.abs(X[:,j] - median[j]) <= OUTLIER_IQR*iqr[j]
    return keep

class ClusterSharpeSeries(object):
    """
    Highest, median and lowest cluster Sharpe ratios per month

    series: DataFrame of month, highest, median, lowest, the member
        counts of each ranked cluster and the number of ranked clusters
    assignments: DataFrame of stock_id, month, cluster, cluster Sharpe
    centroids: DataFrame of month, cluster and centroid coordinates
    """
    def __init__(self, series, assignments, centroids):
        self.series = series
        self.assignments = assignments
        self.centroids = centroids

    def tidy(self):
        return self.series.melt(id_vars='month', value_vars=list(RANKS),
            var_name='series_name', value_name='value')

#-- PURPOSE: cluster each month and rank clusters by Sharpe ratio
def monthly_cluster_sharpes(panel, k, seed=0, STANDARDIZE=True,
    OUTLIER_IQR=8.0, n_init=10):
    """
    Arguments
    ---------
    panel: DataFrame with stock_id, month, alpha_hat and realized columns
    k: number of clusters per month
    """
    logger = logging.getLogger(__name__)
    rows, members, centers = [], [], []
    months = sorted(panel['month'].unique())
    for t,month in enumerate(months):
        group = panel[panel['month'] == month]
        X = group[['alpha_hat','realized']].values.astype(np.float64)
        keep = outlier_mask(X, OUTLIER_IQR=OUTLIER_IQR)
        if not np.all(keep):
            logger.info('{0}: dropped {1:d} outliers'.format(month,
                int(np.count_nonzero(~keep))))
        X, group = X[keep], group[keep]
        if (len(X) < k):
            raise InputError('{0} has fewer than {1:d} points'.format(month,k))
        if STANDARDIZE:
            sd = X.std(axis=0)
            Y = (X - X.mean(axis=0))/np.where(sd > 0, sd, 1.0)
        else:
            Y = X
        fit = kmeans(Y, k, seed=child_seed(seed, t), n_init=n_init)
        realized = X[:,1]
        sharpes = np.full((k), np.nan)
        for j in range(k):
            r = realized[fit.assignments == j]
            sd = np.std(r, ddof=1) if (len(r) >= 2) else 0.0
            if (len(r) < 2) or (sd == 0):
                logger.warning('{0}: cluster {1:d} with {2:d} members has no '
                    'Sharpe ratio'.format(month, j, len(r)))
                continue
            sharpes[j] = np.mean(r)/sd
        ranked, = np.nonzero(np.isfinite(sharpes))
        members.append(pd.DataFrame(dict(stock_id=group['stock_id'].values,
            month=month, cluster=fit.assignments,
            sharpe=sharpes[fit.assignments])))
        centers.append(pd.DataFrame(dict(month=month, cluster=np.arange(k),
            alpha_hat=fit.centroids[:,0], realized=fit.centroids[:,1])))
        if (len(ranked) == 0):
            logger.warning('{0}: no cluster could be ranked'.format(month))
            continue
        #-- descending Sharpe ratio with the lower middle as median
        order = ranked[np.argsort(-sharpes[ranked], kind='mergesort')]
        chosen = dict(highest=order[0], median=order[(len(order)-1)//2],
            lowest=order[-1])
        row = dict(month=month, n_ranked=len(ranked))
        for key in RANKS:
            row[key] = sharpes[chosen[key]]
            row['n_{0}'.format(key)] = int(np.sum(fit.assignments ==
                chosen[key]))
        rows.append(row)
    columns = ['month','highest','median','lowest','n_highest','n_median',
        'n_lowest','n_ranked']
    return ClusterSharpeSeries(pd.DataFrame(rows, columns=columns),
        pd.concat(members, ignore_index=True) if members else None,
        pd.concat(centers, ignore_index=True) if centers else None)

#-- PURPOSE: linear time trends of the ranked cluster Sharpe ratios
def sharpe_trend(series):
    """
    OLS of each rank's Sharpe ratio and of the highest-minus-lowest spread
        on the month index with HC1 standard errors
    """
    if (len(series) < 3):
        raise InputError('trend regression needs at least three months')
    first = pd.Period(series['month'].iloc[0], freq='M')
    t = np.array([(pd.Period(m, freq='M') - first).n
        for m in series['month']], dtype=np.float64)
    X = add_intercept(t)
    fits = {}
    for key in RANKS:
        fits[key] = ols_robust(series[key].values, X,
            names=['intercept','month_index'])
    spread = series['highest'].values - series['lowest'].values
    fits['spread'] = ols_robust(spread, X, names=['intercept','month_index'])
    return fits
