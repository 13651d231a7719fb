"""numba-compiled versions of the kernels in ``_numpy``; same signatures."""
import math

import numpy as np
from numba import njit

from ._numpy import GOLDEN, PATH_MULT, STREAM_MULT, _M1, _M2

_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_ONE = np.uint64(1)
_TO_UNIT = 2.0**-53


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _unit(key, ctr):
    return np.float64(_mix(key + (ctr + _ONE) * GOLDEN) >> _S11) * _TO_UNIT


@njit(cache=True)
def _stream_keys(seed, paths, stream):
    out = np.empty(paths.shape[0], dtype=np.uint64)
    k0 = _mix(seed + GOLDEN)
    s = (np.uint64(stream) + _ONE) * STREAM_MULT
    for i in range(paths.shape[0]):
        k = _mix(k0 ^ ((paths[i] + _ONE) * PATH_MULT))
        out[i] = _mix(k ^ s)
    return out


def stream_keys(seed, paths, stream):
    return _stream_keys(np.uint64(seed), np.asarray(paths, dtype=np.uint64), stream)


@njit(cache=True, nogil=True)
def _uniforms(keys, start, count):
    out = np.empty((keys.shape[0], count))
    for i in range(keys.shape[0]):
        for j in range(count):
            out[i, j] = _unit(keys[i], np.uint64(start + j))
    return out


def uniforms(keys, start, count):
    return _uniforms(np.asarray(keys, dtype=np.uint64), start, count)


@njit(cache=True, nogil=True)
def _normals(keys, count):
    out = np.empty((keys.shape[0], count))
    for i in range(keys.shape[0]):
        for j in range(count):
            u1 = _unit(keys[i], np.uint64(2 * j))
            u2 = _unit(keys[i], np.uint64(2 * j + 1))
            out[i, j] = math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)
    return out


def normals(keys, count):
    return _normals(np.asarray(keys, dtype=np.uint64), count)


@njit(cache=True, nogil=True)
def _poisson_levels(keys, total):
    n = keys.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    if total <= 0.0:
        return counts, np.zeros(0)
    for i in range(n):
        level = 0.0
        j = 0
        while True:
            level += -math.log1p(-_unit(keys[i], np.uint64(j)))
            if level >= total:
                break
            j += 1
        counts[i] = j
    levels = np.empty(counts.sum())
    pos = 0
    for i in range(n):
        level = 0.0
        for j in range(counts[i]):
            level += -math.log1p(-_unit(keys[i], np.uint64(j)))
            levels[pos] = level
            pos += 1
    return counts, levels


def poisson_levels(keys, total):
    return _poisson_levels(np.asarray(keys, dtype=np.uint64), float(total))


@njit(cache=True, nogil=True)
def _poly_eval(exps, coefs, points):
    n = points.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for t in range(exps.shape[0]):
            term = coefs[t]
            for v in range(exps.shape[1]):
                e = exps[t, v]
                if e:
                    term *= points[i, v] ** e
            acc += term
        out[i] = acc
    return out


def poly_eval(exps, coefs, points):
    return _poly_eval(exps, coefs, np.ascontiguousarray(points, dtype=np.float64))


@njit(cache=True, nogil=True)
def _grid_accumulate(rows, cols, weights, nrows, ncols):
    acc = np.zeros((nrows, ncols))
    for k in range(rows.shape[0]):
        if cols[k] < ncols:
            acc[rows[k], cols[k]] += weights[k]
    for i in range(nrows):
        for j in range(1, ncols):
            acc[i, j] += acc[i, j - 1]
    return acc


def grid_accumulate(rows, cols, weights, nrows, ncols):
    return _grid_accumulate(
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(weights, dtype=np.float64),
        nrows,
        ncols,
    )
