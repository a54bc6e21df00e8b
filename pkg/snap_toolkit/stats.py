#!/usr/bin/env python
u"""
stats.py
Normality screens, two-sample location tests and the mispricing testing
    procedure comparing masked and unmasked model residuals, with ordinary
    least squares and heteroskedasticity-robust (HC1) standard errors

CALLING SEQUENCE:
    result = mispricing_test(unmasked_residuals, masked_residuals)
    fit = ols_robust(y, X)

NOTES:
    The normality screen uses Shapiro-Wilk for 3 <= n <= 5000 and a
        Kolmogorov-Smirnov distance to a fitted normal otherwise
    Screens and the group test are run at the 5% level
    Mann-Whitney p-values are exact for n1*n2 <= 20 and use the normal
        approximation with tie and continuity corrections otherwise
    Mann-Whitney tests a location shift of the two distributions rather
        than a difference of means: the chosen path is always reported
        together with the other group test and both normality tests
    Welch t of two constant samples with different means is infinite
        with p = 0

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    scipy: Scientific Tools for Python
        https://docs.scipy.org/doc/

UPDATE HISTORY:
    Written 10/2026
"""
import json
import itertools
import numpy as np
import scipy.stats
from snap_toolkit.errors import InputError, DegenerateInputError, \
    SingularityError

#-- significance level of the normality screens
SCREEN_LEVEL = 0.05
#-- largest sample accepted by the Shapiro-Wilk approximation
SHAPIRO_MAX = 5000
#-- largest n1*n2 with exact Mann-Whitney enumeration
EXACT_MAX = 20

class TestResult(object):
    """
    Statistic and p-value of a hypothesis test
    """
    def __init__(self, statistic, p_value, method, n1, n2=None):
        self.statistic = float(statistic)
        self.p_value = float(np.clip(p_value, 0.0, 1.0))
        self.method = method
        self.n1 = int(n1)
        self.n2 = None if n2 is None else int(n2)

    def as_dict(self):
        return dict(method=self.method, statistic=self.statistic,
            p_value=self.p_value, n1=self.n1, n2=self.n2)

    def __repr__(self):
        return 'TestResult({0}: statistic={1:.6g}, p={2:.6g})'.format(
            self.method, self.statistic, self.p_value)

class OlsFit(object):
    """
    Least-squares coefficients with HC1 robust standard errors
    """
    def __init__(self, coefficients, robust_se, r_squared, dof, names=None):
        self.coefficients = np.asarray(coefficients)
        self.robust_se = np.asarray(robust_se)
        with np.errstate(divide='ignore', invalid='ignore'):
            self.t_stats = np.where(self.robust_se > 0,
                self.coefficients/self.robust_se, 0.0)
        self.p_values = 2.0*scipy.stats.t.sf(np.abs(self.t_stats), dof)
        self.r_squared = float(r_squared)
        self.dof = int(dof)
        self.names = names or ['x{0:d}'.format(j) for j in
            range(len(self.coefficients))]

    @property
    def stars(self):
        return [significance_stars(p) for p in self.p_values]

    def as_dict(self):
        return dict(names=list(self.names),
            coefficients=self.coefficients.tolist(),
            robust_se=self.robust_se.tolist(), t_stats=self.t_stats.tolist(),
            p_values=self.p_values.tolist(), stars=self.stars,
            r_squared=self.r_squared, dof=self.dof)

#-- PURPOSE: regression table stars
def significance_stars(p):
    return '***' if (p < 0.01) else '**' if (p < 0.05) else \
        '*' if (p < 0.1) else ''

#-- PURPOSE: check a one-dimensional finite sample
def _sample(x, minimum=1, NAME='sample'):
    x = np.asarray(x, dtype=np.float64).ravel()
    if (len(x) < minimum):
        raise InputError('{0} needs at least {1:d} values'.format(NAME,minimum))
    if not np.all(np.isfinite(x)):
        raise InputError('{0} contains non-finite values'.format(NAME))
    return x

#-- PURPOSE: Shapiro-Wilk normality test
def shapiro_wilk(sample):
    x = _sample(sample, minimum=3)
    if (len(x) > SHAPIRO_MAX):
        raise InputError('Shapiro-Wilk is limited to {0:d} values'.format(
            SHAPIRO_MAX))
    if (np.ptp(x) == 0):
        raise DegenerateInputError('constant sample has no normality test')
    W, p = scipy.stats.shapiro(x)
    return TestResult(W, p, 'shapiro_wilk', len(x))

#-- PURPOSE: Kolmogorov-Smirnov distance to a normal with the sample moments
#-- p-values come from the asymptotic distribution (Lilliefors-style)
def ks_normality(sample):
    x = _sample(sample, minimum=8)
    sd = np.std(x, ddof=1)
    if (sd == 0):
        raise DegenerateInputError('constant sample has no normality test')
    D, p = scipy.stats.kstest(x, 'norm', args=(np.mean(x), sd),
        method='asymp')
    return TestResult(D, p, 'ks', len(x))

#-- PURPOSE: normality screen choosing the test by sample size
def normality_test(sample):
    n = np.size(sample)
    if (3 <= n <= SHAPIRO_MAX):
        return shapiro_wilk(sample)
    return ks_normality(sample)

#-- PURPOSE: exact two-sided Mann-Whitney p-value by enumerating every
#-- assignment of the pooled midranks to the first sample
def _exact_mann_whitney(ranks, n1, U):
    n2 = len(ranks) - n1
    center = n1*n2/2.0
    observed = abs(U - center)
    count, total = 0, 0
    for combo in itertools.combinations(range(len(ranks)), n1):
        u = np.sum(ranks[list(combo)]) - n1*(n1 + 1)/2.0
        total += 1
        count += (abs(u - center) >= observed - 1e-9)
    return count/float(total)

#-- PURPOSE: Mann-Whitney U test with midranks for ties
def mann_whitney_u(sample1, sample2):
    x = _sample(sample1, NAME='first sample')
    y = _sample(sample2, NAME='second sample')
    n1, n2 = len(x), len(y)
    ranks = scipy.stats.rankdata(np.concatenate([x, y]), method='average')
    U = np.sum(ranks[:n1]) - n1*(n1 + 1)/2.0
    if (n1*n2 <= EXACT_MAX):
        p = _exact_mann_whitney(ranks, n1, U)
        return TestResult(U, p, 'mann_whitney_u', n1, n2)
    #-- normal approximation with tie-corrected variance
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    ties = np.sum(counts**3 - counts)
    var = n1*n2/12.0*((n + 1) - ties/(n*(n - 1.0)))
    if (var <= 0):
        return TestResult(U, 1.0, 'mann_whitney_u', n1, n2)
    z = max(abs(U - n1*n2/2.0) - 0.5, 0.0)/np.sqrt(var)
    p = 2.0*scipy.stats.norm.sf(z)
    return TestResult(U, p, 'mann_whitney_u', n1, n2)

#-- PURPOSE: Welch t test with Satterthwaite degrees of freedom
def welch_t(sample1, sample2):
    x = _sample(sample1, minimum=2, NAME='first sample')
    y = _sample(sample2, minimum=2, NAME='second sample')
    if (np.ptp(x) == 0) and (np.ptp(y) == 0):
        #-- zero variance: the means are either identical or certainly apart
        if (x[0] == y[0]):
            return TestResult(0.0, 1.0, 'welch_t', len(x), len(y))
        t = np.copysign(np.inf, x[0] - y[0])
        return TestResult(t, 0.0, 'welch_t', len(x), len(y))
    t, p = scipy.stats.ttest_ind(x, y, equal_var=False)
    return TestResult(t, p, 'welch_t', len(x), len(y))

#-- PURPOSE: result of a test or None for too small or degenerate samples
def _optional(function, *args):
    try:
        return function(*args)
    except InputError:
        return None

class MispricingResult(object):
    """
    Normality screens and the group test of the mispricing procedure

    Attributes
    ----------
    screens: normality screen of each residual group chosen by sample size
    test: group test selected by the screens
    path: screen methods, group test and the joint normality decision
    alternative: the group test that was not selected
    normality: Shapiro-Wilk and Kolmogorov-Smirnov results of each group
    """
    def __init__(self, screens, test, path, alternative=None,
        normality=None):
        self.screens = screens
        self.test = test
        self.path = path
        self.alternative = alternative
        self.normality = normality or {}

    @property
    def p_value(self):
        return self.test.p_value

    def reject(self, level=0.05):
        return (self.test.p_value < level)

    def as_dict(self):
        alternative = None if self.alternative is None else \
            self.alternative.as_dict()
        normality = {group:{k:None if v is None else v.p_value
            for k,v in tests.items()} for group,tests in self.normality.items()}
        return dict(path=self.path, screen_level=SCREEN_LEVEL,
            screens={k:None if v is None else v.as_dict()
                for k,v in self.screens.items()},
            test=self.test.as_dict(), p_value=self.p_value,
            alternative=alternative, normality_p_values=normality)

    def to_json(self, FILENAME):
        with open(FILENAME, mode='w') as fid:
            json.dump(self.as_dict(), fid, indent=2, sort_keys=True)

#-- PURPOSE: test whether masked and unmasked residuals share a location
def mispricing_test(unmasked, masked):
    """
    Screens both residual groups for normality at 5% and compares them
        with Welch t when both pass and Mann-Whitney U otherwise

    The unselected group test and both normality tests of each group are
        reported alongside the selected path
    """
    x = _sample(unmasked, NAME='unmasked residuals')
    y = _sample(masked, NAME='masked residuals')
    screens = {}
    normality = {}
    normal = True
    for key,sample in [('unmasked',x),('masked',y)]:
        normality[key] = dict(shapiro_wilk=_optional(shapiro_wilk, sample),
            ks=_optional(ks_normality, sample))
        try:
            screens[key] = normality_test(sample)
        except InputError:
            #-- too small or degenerate: no evidence of normality
            screens[key] = None
            normal = False
        else:
            normal &= (screens[key].p_value >= SCREEN_LEVEL)
    if normal:
        test = welch_t(x, y)
        alternative = _optional(mann_whitney_u, x, y)
    else:
        test = mann_whitney_u(x, y)
        alternative = _optional(welch_t, x, y)
    path = dict(unmasked=getattr(screens['unmasked'], 'method', None),
        masked=getattr(screens['masked'], 'method', None),
        group_test=test.method, normal=bool(normal))
    return MispricingResult(screens, test, path, alternative=alternative,
        normality=normality)

#-- PURPOSE: least squares with HC1 robust standard errors
def ols_robust(y, X, names=None):
    y = np.asarray(y, dtype=np.float64).ravel()
    X = np.asarray(X, dtype=np.float64)
    if (X.ndim == 1):
        X = X[:,np.newaxis]
    n, k = X.shape
    if (len(y) != n):
        raise InputError('response and regressors have different lengths')
    if (n <= k):
        raise InputError('regression needs more rows than regressors')
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError('regression inputs must be finite')
    if (np.linalg.matrix_rank(X) < k):
        raise SingularityError('regressors are rank deficient')
    XtX = np.dot(X.T, X)
    beta = np.linalg.solve(XtX, np.dot(X.T, y))
    resid = y - np.dot(X, beta)
    XtX_inv = np.linalg.inv(XtX)
    meat = np.dot(X.T*resid**2, X)
    cov = n/float(n - k)*np.dot(XtX_inv, np.dot(meat, XtX_inv))
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    #-- centered R^2 when an intercept column is present
    intercept = np.any(np.all(X == X[0,:], axis=0) & (X[0,:] != 0))
    tss = np.sum((y - np.mean(y))**2) if intercept else np.sum(y**2)
    rss = np.sum(resid**2)
    r2 = 1.0 - rss/tss if (tss > 0) else 1.0
    return OlsFit(beta, se, np.clip(r2, 0.0, 1.0), n - k, names=names)

#-- PURPOSE: add an intercept column to regressors
def add_intercept(X):
    X = np.asarray(X, dtype=np.float64)
    if (X.ndim == 1):
        X = X[:,np.newaxis]
    return np.column_stack([np.ones(len(X)), X])
