"""Exact-jump simulation of centered additive processes.

Paths follow the Levy-Ito form ``X_t = G_t + sum_{s<=t} dX_s - sum_i x_i Lambda_i(t)``.
The Gaussian part is sampled on the grid only. Jumps of atom ``i`` come from a
unit-rate Poisson stream mapped through ``Lambda_i^{-1}``, so jump records do
not depend on the grid.

Every path has its own counter-based random streams keyed by
``(seed, path_index, stream)``: stream 0 drives the Gaussian part, stream
``i + 1`` drives atom ``i``. Batches can therefore be split and scheduled in
any way without changing a single value.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .process_model import SpecError, cumulant_fn, drift_fn

__all__ = [
    "BLOCK_PATHS",
    "SimulationError",
    "PathRecord",
    "PathBatch",
    "TeugelsSet",
    "uniform_grid",
    "simulate_batch",
    "simulate_path",
    "variations",
    "teugels",
    "jump_increments",
    "optional_covariation_check",
    "x_at",
]

# fixed so that results never depend on the worker count
BLOCK_PATHS = 4096


class SimulationError(ValueError):
    pass


def uniform_grid(horizon=1.0, cells_per_unit=2**10, cells=None):
    """Uniform grid on ``[0, horizon]``; default 1024 cells per unit time."""
    if cells is None:
        cells = max(1, int(round(cells_per_unit * horizon)))
    return np.linspace(0.0, float(horizon), int(cells) + 1)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise SimulationError("grid must start at 0 and be strictly increasing with >= 2 points")
    return grid


@dataclass
class PathBatch:
    """Consecutive paths ``first_path .. first_path + num_paths - 1``.

    Jumps are stored flat, sorted by (path, time); ``jump_offsets[p]`` is the
    start of path ``p``'s slice.
    """

    grid: np.ndarray
    seed: int
    first_path: int
    gaussian: np.ndarray
    jump_offsets: np.ndarray
    jump_times: np.ndarray
    jump_atoms: np.ndarray
    jump_sizes: np.ndarray
    x_values: np.ndarray

    @property
    def num_paths(self):
        return self.gaussian.shape[0]

    @property
    def jump_rows(self):
        return np.repeat(np.arange(self.num_paths), np.diff(self.jump_offsets))

    def path(self, p):
        """:class:`PathRecord` of the ``p``-th path of the batch (0-based)."""
        lo, hi = self.jump_offsets[p], self.jump_offsets[p + 1]
        return PathRecord(
            grid=self.grid,
            seed=self.seed,
            path_index=self.first_path + p,
            gaussian_values=self.gaussian[p],
            jump_times=self.jump_times[lo:hi],
            jump_atoms=self.jump_atoms[lo:hi],
            jump_sizes=self.jump_sizes[lo:hi],
            x_values=self.x_values[p],
        )

    def jump_counts(self, n_atoms):
        """``(num_paths, n_atoms)`` number of jumps of each atom per path."""
        out = np.zeros((self.num_paths, n_atoms), dtype=np.int64)
        np.add.at(out, (self.jump_rows, self.jump_atoms), 1)
        return out


@dataclass
class PathRecord:
    grid: np.ndarray
    seed: int
    path_index: int
    gaussian_values: np.ndarray
    jump_times: np.ndarray
    jump_atoms: np.ndarray
    jump_sizes: np.ndarray
    x_values: np.ndarray

    @property
    def jumps(self):
        return list(zip(self.jump_times.tolist(), self.jump_atoms.tolist(), self.jump_sizes.tolist()))

    def as_batch(self):
        return PathBatch(
            grid=self.grid,
            seed=self.seed,
            first_path=self.path_index,
            gaussian=self.gaussian_values[None, :],
            jump_offsets=np.array([0, len(self.jump_times)]),
            jump_times=self.jump_times,
            jump_atoms=self.jump_atoms,
            jump_sizes=self.jump_sizes,
            x_values=self.x_values[None, :],
        )

    def recompute_x(self, spec):
        """X on the grid rebuilt from the stored Gaussian values and jumps."""
        jump_part = np.array([self.jump_sizes[self.jump_times <= t].sum() for t in self.grid])
        return self.gaussian_values + jump_part - drift_fn(spec, self.grid)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# path", self.path_index, "seed", self.seed])
        w.writerow(["# grid"])
        w.writerow(["t", "gaussian", "x"])
        for t, g, x in zip(self.grid, self.gaussian_values, self.x_values):
            w.writerow([f"{t:.17g}", f"{g:.17g}", f"{x:.17g}"])
        w.writerow(["# jumps"])
        w.writerow(["time", "atom", "size"])
        for s, a, z in self.jumps:
            w.writerow([f"{s:.17g}", a, f"{z:.17g}"])
        return buf.getvalue()

    def to_dict(self):
        return {
            "path_index": self.path_index,
            "seed": self.seed,
            "grid": self.grid.tolist(),
            "gaussian": self.gaussian_values.tolist(),
            "x": self.x_values.tolist(),
            "jumps": [{"time": s, "atom": a, "size": z} for s, a, z in self.jumps],
        }

    def to_json(self):
        return json.dumps(self.to_dict())


# ------------------------------------------------------------- simulation
def _simulate_block(spec, grid, seed, paths):
    n = len(paths)
    horizon = grid[-1]
    if spec.pure_jump:
        gauss = np.zeros((n, grid.size))
    else:
        var = spec.sigma2(grid)
        dvar = np.diff(var)
        if var[0] != 0.0 or np.any(dvar < 0):
            raise SimulationError("sigma2 decreases on the grid (or is nonzero at 0)")
        z = kernels.normals(kernels.stream_keys(seed, paths, 0), grid.size - 1)
        gauss = np.zeros((n, grid.size))
        np.cumsum(z * np.sqrt(dvar), axis=1, out=gauss[:, 1:])

    rows, times, atoms, sizes = [], [], [], []
    for i, atom in enumerate(spec.atoms):
        total = float(atom.intensity(horizon))
        counts, levels = kernels.poisson_levels(kernels.stream_keys(seed, paths, i + 1), total)
        if levels.size:
            try:
                t = np.asarray(atom.intensity.inverse(levels), dtype=np.float64)
            except SpecError as exc:
                raise SpecError(f"atom {i}: intensity is not invertible ({exc})") from None
            t = np.minimum(t, horizon)
        else:
            t = np.zeros(0)
        rows.append(np.repeat(np.arange(n), counts))
        times.append(t)
        atoms.append(np.full(t.size, i, dtype=np.int64))
        sizes.append(np.full(t.size, atom.size))
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    times = np.concatenate(times) if times else np.zeros(0)
    atoms = np.concatenate(atoms) if atoms else np.zeros(0, dtype=np.int64)
    sizes = np.concatenate(sizes) if sizes else np.zeros(0)
    order = np.lexsort((atoms, times, rows))
    rows, times, atoms, sizes = rows[order], times[order], atoms[order], sizes[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])

    cols = np.searchsorted(grid, times, side="left")
    jump_part = kernels.grid_accumulate(rows, cols, sizes, n, grid.size)
    x = gauss + jump_part - drift_fn(spec, grid)[None, :]
    return gauss, offsets, times, atoms, sizes, x


def simulate_batch(spec, grid, seed, num_paths, first_path=0, workers=1):
    """Simulate paths ``first_path .. first_path + num_paths - 1`` on ``grid``.

    Work is cut into fixed blocks of :data:`BLOCK_PATHS` paths and run on
    ``workers`` threads; the output does not depend on ``workers``.
    """
    grid = _check_grid(grid)
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise SimulationError("seed must fit in 64 unsigned bits")
    starts = list(range(first_path, first_path + num_paths, BLOCK_PATHS))
    blocks = [np.arange(s, min(s + BLOCK_PATHS, first_path + num_paths)) for s in starts]

    def run(paths):
        return _simulate_block(spec, grid, seed, paths)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    if not parts:
        raise SimulationError("num_paths must be positive")

    offsets = [np.zeros(1, dtype=np.int64)]
    base = 0
    for p in parts:
        offsets.append(p[1][1:] + base)
        base += p[1][-1]
    return PathBatch(
        grid=grid,
        seed=seed,
        first_path=first_path,
        gaussian=np.concatenate([p[0] for p in parts]),
        jump_offsets=np.concatenate(offsets),
        jump_times=np.concatenate([p[2] for p in parts]),
        jump_atoms=np.concatenate([p[3] for p in parts]),
        jump_sizes=np.concatenate([p[4] for p in parts]),
        x_values=np.concatenate([p[5] for p in parts]),
    )


def simulate_path(spec, grid, seed, path_index):
    """One path; identical to row ``path_index`` of any batch containing it."""
    return simulate_batch(spec, grid, seed, 1, first_path=path_index).path(0)


# --------------------------------------------- variations and Teugels sets
@dataclass
class TeugelsSet:
    order: int
    variation_values: np.ndarray
    teugels_values: np.ndarray


def _as_batch(path):
    return path.as_batch() if isinstance(path, PathRecord) else path


def _shape_like(path, arr):
    return arr[0] if isinstance(path, PathRecord) else arr


def variations(path, spec, n):
    """``X^(n)`` on the grid: ``X`` for n = 1, else the jump power sums.

    For n = 2 the Gaussian variance ``sigma2(t)`` is added.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    b = _as_batch(path)
    if n == 1:
        var = b.x_values
    else:
        var = kernels.grid_accumulate(
            b.jump_rows,
            np.searchsorted(b.grid, b.jump_times, side="left"),
            b.jump_sizes**n,
            b.num_paths,
            b.grid.size,
        )
        if n == 2:
            var = var + spec.sigma2(b.grid)[None, :]
    var = _shape_like(path, var)
    return TeugelsSet(n, var, var if n == 1 else var - cumulant_fn(spec, n, b.grid))


def teugels(path, spec, n):
    """Teugels martingale ``Y^(n) = X^(n) - F_n`` (``Y^(1) = X``)."""
    return variations(path, spec, n)


def jump_increments(path, spec, n):
    """``Y^(n)_s - Y^(n)_{s-}`` at every recorded jump, in storage order.

    Both sides are evaluated from the jump record: the running jump sum of
    ``x^n`` (or ``x`` for n = 1) minus the continuous compensator at ``s``.
    """
    b = _as_batch(path)
    z = b.jump_sizes if n == 1 else b.jump_sizes**n
    after = np.cumsum(z)
    start = b.jump_offsets[:-1][b.jump_rows]
    base = np.where(start > 0, after[np.maximum(start - 1, 0)], 0.0)
    after = after - base
    before = after - z
    comp = drift_fn(spec, b.jump_times) if n == 1 else cumulant_fn(spec, n, b.jump_times)
    return (after - comp) - (before - comp)


def optional_covariation_check(path, spec, n, m):
    """Max over paths and grid of ``|[Y^(n), Y^(m)]_t - X^(n+m)_t|``.

    The bracket is summed from jump increments, plus ``sigma2(t)`` when
    ``n = m = 1``.
    """
    if n < 1 or m < 1:
        raise ValueError("orders must be >= 1")
    b = _as_batch(path)
    prod = jump_increments(b, spec, n) * jump_increments(b, spec, m)
    bracket = kernels.grid_accumulate(
        b.jump_rows, np.searchsorted(b.grid, b.jump_times, side="left"), prod, b.num_paths, b.grid.size
    )
    if n == 1 and m == 1:
        bracket = bracket + spec.sigma2(b.grid)[None, :]
    target = variations(b, spec, n + m).variation_values
    return float(np.max(np.abs(bracket - target)))


def x_at(path, spec, times):
    """``X`` at arbitrary times for a pure-jump path (jump record is exact)."""
    if not spec.pure_jump:
        raise SimulationError("off-grid X values need a pure-jump spec")
    times = np.asarray(times, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(path.jump_sizes)])
    idx = np.searchsorted(path.jump_times, times, side="right")
    return csum[idx] - drift_fn(spec, times)
