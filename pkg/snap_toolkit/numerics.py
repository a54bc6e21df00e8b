#!/usr/bin/env python
u"""
numerics.py
Dense matrix helpers, seeded random number generation and the central
    finite-difference gradient used to check every analytic gradient

CALLING SEQUENCE:
    C = matmul(A, B)
    rng = new_rng(seed)
    x = sample_normal(rng, 0.0, 0.2, 1000)
    g = finite_diff_grad(f, x, h=1e-5)

NOTES:
    Matrices are C-ordered (row-major) float64 numpy arrays
    Random streams use the counter-based Philox generator seeded through
        numpy SeedSequence so streams are bit-exact across platforms
    Normal variates come from the numpy ziggurat sampler: tests across
        implementations should compare distributions, not bits
    Child streams are keyed as SeedSequence([seed, *keys]) so that parallel
        work (months, features) draws from independent, reproducible streams

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html

UPDATE HISTORY:
    Written 10/2026
"""
import numpy as np
from snap_toolkit.errors import ShapeError, ParameterError, NumericError

#-- PURPOSE: convert input to a finite row-major matrix
def as_matrix(data, NAME='matrix'):
    A = np.ascontiguousarray(data, dtype=np.float64)
    if (A.ndim == 1):
        A = A[np.newaxis,:]
    if (A.ndim != 2):
        raise ShapeError('{0} must be two-dimensional'.format(NAME))
    if not np.all(np.isfinite(A)):
        raise NumericError('{0} contains non-finite entries'.format(NAME))
    return A

#-- PURPOSE: matrix product with a dimension check
def matmul(a, b):
    A = as_matrix(a, NAME='a')
    B = as_matrix(b, NAME='b')
    if (A.shape[1] != B.shape[0]):
        raise ShapeError('cannot multiply {0} by {1}'.format(A.shape, B.shape))
    C = np.dot(A, B)
    if not np.all(np.isfinite(C)):
        raise NumericError('matrix product overflowed')
    return C

#-- PURPOSE: create a reproducible random number generator
def new_rng(seed, *keys):
    """
    Philox generator for a seed and optional integer keys
    """
    ss = np.random.SeedSequence([int(seed)] + [int(k) for k in keys])
    return np.random.Generator(np.random.Philox(ss))

#-- PURPOSE: derive an integer seed for code that expects one
#-- (scikit-learn random_state, child processes)
def child_seed(seed, *keys):
    ss = np.random.SeedSequence([int(seed)] + [int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint32)[0])

#-- PURPOSE: draw normal variates with mean and standard deviation
def sample_normal(rng, mean, scale, n):
    if (scale < 0):
        raise ParameterError('normal scale must be non-negative')
    if (scale == 0):
        return np.full((n), mean, dtype=np.float64)
    return rng.normal(loc=mean, scale=scale, size=n)

#-- PURPOSE: central finite-difference gradient of a scalar function
def finite_diff_grad(f, x, h=1e-5):
    """
    Central difference gradient (f(x+h*e_i) - f(x-h*e_i))/(2h)

    Arguments
    ---------
    f: scalar function of a parameter vector
    x: parameter vector
    h: step size
    """
    if (h <= 0):
        raise ParameterError('finite-difference step must be positive')
    x0 = np.array(x, dtype=np.float64).ravel()
    grad = np.zeros_like(x0)
    xi = x0.copy()
    for i in range(len(x0)):
        xi[i] = x0[i] + h
        fplus = f(xi)
        xi[i] = x0[i] - h
        fminus = f(xi)
        xi[i] = x0[i]
        if not (np.isfinite(fplus) and np.isfinite(fminus)):
            raise NumericError('non-finite function value at coordinate '
                '{0:d}'.format(i))
        grad[i] = (fplus - fminus)/(2.0*h)
    return grad

#-- PURPOSE: largest relative difference between two gradients
def max_relative_error(analytic, numeric, floor=1e-8):
    a = np.ravel(analytic)
    n = np.ravel(numeric)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return np.max(np.abs(a - n)/denom) if len(a) else 0.0

#-- PURPOSE: rescale a list of gradient arrays to a maximum global norm
def clip_global_norm(grads, max_norm):
    total = np.sqrt(np.sum([np.sum(g**2) for g in grads]))
    if (max_norm is None) or (max_norm <= 0) or (total <= max_norm):
        return grads, total
    scale = max_norm/total
    return [g*scale for g in grads], total
