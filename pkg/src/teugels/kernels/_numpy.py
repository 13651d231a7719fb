"""Pure-numpy kernels. Reference path, and the fallback when numba is off."""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
PATH_MULT = np.uint64(0xD1B54A32D192ED03)
STREAM_MULT = np.uint64(0xAEF17502108EF2D9)
_TO_UNIT = 2.0**-53


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed, paths, stream):
    """Key of the random stream ``stream`` of each path in ``paths``."""
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = mix64(np.uint64(seed) + GOLDEN)
        k = mix64(k ^ ((paths + np.uint64(1)) * PATH_MULT))
        return mix64(k ^ (np.uint64(stream + 1) * STREAM_MULT))


def uniforms(keys, start, count):
    """``(len(keys), count)`` uniforms on [0, 1) from counters start..start+count-1."""
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64(keys[:, None] + ctr[None, :] * GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def normals(keys, count):
    u = uniforms(keys, 0, 2 * count)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
    return r * np.cos(2.0 * np.pi * u[:, 1::2])


def poisson_levels(keys, total):
    """Arrival levels below ``total`` of a unit-rate Poisson stream per key.

    Returns ``(counts, levels)`` with ``levels`` concatenated in key order.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    n = len(keys)
    if total <= 0.0 or n == 0:
        return np.zeros(n, dtype=np.int64), np.zeros(0)
    block = int(total + 6.0 * np.sqrt(total) + 8)
    chunks = []
    last = np.zeros(n)
    active = np.arange(n)
    start = 0
    while active.size:
        e = -np.log1p(-uniforms(keys[active], start, block))
        lv = last[active, None] + np.cumsum(e, axis=1)
        chunks.append((active, lv))
        last[active] = lv[:, -1]
        active = active[lv[:, -1] < total]
        start += block
    counts = np.zeros(n, dtype=np.int64)
    pieces = [[] for _ in range(n)]
    for act, lv in chunks:
        below = lv < total
        counts[act] += below.sum(axis=1)
        for row, p in enumerate(act):
            pieces[p].append(lv[row, below[row]])
    flat = [np.concatenate(pc) for pc in pieces if pc]
    levels = np.concatenate(flat) if flat else np.zeros(0)
    return counts, levels


def poly_eval(exps, coefs, points):
    """Evaluate ``sum_t coefs[t] prod_v points[:, v]**exps[t, v]`` per row."""
    points = np.asarray(points, dtype=np.float64)
    out = np.zeros(points.shape[0])
    for t in range(exps.shape[0]):
        term = np.full(points.shape[0], coefs[t])
        for v in range(exps.shape[1]):
            if exps[t, v]:
                term = term * points[:, v] ** exps[t, v]
        out += term
    return out


def grid_accumulate(rows, cols, weights, nrows, ncols):
    """Dense ``(nrows, ncols)`` running sums along axis 1 of scattered weights."""
    acc = np.zeros((nrows, ncols))
    keep = cols < ncols
    np.add.at(acc, (rows[keep], cols[keep]), weights[keep])
    return np.cumsum(acc, axis=1)
