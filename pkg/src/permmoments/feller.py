"""Feller coupling of cycle counts with independent Poisson variables.

Let ``xi_1 = 1`` and ``xi_t ~ Bernoulli(1/t)`` independently.  An
``m``-spacing is a pattern ``1 0...0 1`` with ``m - 1`` zeros.  The number of
``m``-spacings in ``1 xi_2 ... xi_n 1`` has the law of the number of
``m``-cycles of a uniform permutation of size ``n``; the number of
``m``-spacings in the whole infinite sequence is Poisson(1/m), independently
over ``m``.

The sequence is simulated sparsely.  From a one at position ``t`` the next one
sits after ``u`` with probability ``prod_{j=t+1..u} (1 - 1/j) = t/u``, so it
is ``floor(t/U) + 1`` for ``U`` uniform on (0, 1].  A draw therefore costs
``O(log horizon)`` steps, and the horizon at which ``Y_m`` is cut off can be
large.  Truncating at horizon ``H`` lowers ``E[Y_m]`` by exactly ``1/H``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

import numpy as np

from .errors import QueryError
from .partitions import MomentQuery, _cycle_weights

__all__ = [
    "DEFAULT_SEED",
    "MIN_HORIZON",
    "make_rng",
    "spawn_rngs",
    "default_horizon",
    "CoupledCounts",
    "CouplingBatch",
    "MonteCarloEstimate",
    "simulate_coupling",
    "simulate_coupling_batch",
    "sample_cycle_counts",
    "sample_cycle_counts_batch",
    "mc_moment",
    "poisson_inversion",
    "z_infty_truncation",
    "sample_Z_infty",
    "sample_Z_infty_batch",
    "mc_Z_infty",
    "boundary_statistics",
    "CouplingReport",
    "coupling_distribution_check",
    "write_coupling_csv",
]

DEFAULT_SEED = 20100531
MIN_HORIZON = 1 << 20


def make_rng(seed: int | None = DEFAULT_SEED) -> np.random.Generator:
    """PCG64 generator seeded through a SeedSequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child streams of one seed, indexed 0..count-1."""
    return [
        np.random.Generator(np.random.PCG64(child))
        for child in np.random.SeedSequence(seed).spawn(count)
    ]


def default_horizon(n: int) -> int:
    return max(8 * n, MIN_HORIZON)


def _next_one(pos: np.ndarray, rng: np.random.Generator, cap: int) -> np.ndarray:
    u = 1.0 - rng.random(pos.shape)
    nxt = np.floor(pos / u) + 1.0
    return np.minimum(nxt, cap).astype(np.int64)


@dataclass(frozen=True)
class CoupledCounts:
    """One coupled draw.  ``C[m-1]`` and ``Y[m-1]`` hold the counts for m = 1..M.

    ``B`` is the ``m`` whose boundary event holds (the last spacing of the
    length-``n`` prefix is closed only by the artificial trailing one), or None.
    ``truncated`` marks that ``Y`` only counts spacings ending by ``horizon``.
    """

    n: int
    M: int
    horizon: int
    C: np.ndarray
    Y: np.ndarray
    B: int | None
    truncated: bool = True


@dataclass(frozen=True)
class CouplingBatch:
    n: int
    M: int
    horizon: int
    C: np.ndarray  # (draws, M)
    Y: np.ndarray  # (draws, M)
    B: np.ndarray  # (draws,), 0 where no boundary event
    seed: int | None = None

    @property
    def draws(self) -> int:
        return self.C.shape[0]

    def draw(self, i: int) -> CoupledCounts:
        b = int(self.B[i])
        return CoupledCounts(self.n, self.M, self.horizon, self.C[i].copy(), self.Y[i].copy(), b or None)


def _check_coupling_args(n: int, M: int, horizon: int) -> None:
    if n < 1:
        raise QueryError(f"n must be at least 1, got {n}")
    if not 1 <= M <= n:
        raise QueryError(f"need 1 <= M <= n, got M={M}, n={n}")
    if horizon < n:
        raise QueryError(f"horizon must be >= n, got {horizon} < {n}")


def simulate_coupling_batch(
    n: int, M: int, horizon: int | None, draws: int, rng: np.random.Generator
) -> CouplingBatch:
    """``draws`` independent coupled draws of ``(C^(n)_m, Y_m)_{m <= M}``."""
    if horizon is None:
        horizon = default_horizon(n)
    _check_coupling_args(n, M, horizon)
    cap = max(horizon, n + 1) + 1
    C = np.zeros((draws, M + 1), dtype=np.int64)
    Y = np.zeros((draws, M + 1), dtype=np.int64)
    B = np.zeros(draws, dtype=np.int64)
    pos = np.ones(draws, dtype=np.int64)
    idx = np.arange(draws)
    while idx.size:
        cur = pos[idx]
        nxt = _next_one(cur, rng, cap)
        d = nxt - cur

        real_c = (nxt <= n) & (d <= M)
        np.add.at(C, (idx[real_c], d[real_c]), 1)

        crossing = (cur <= n) & (nxt > n)
        last = n + 1 - cur
        art = crossing & (last <= M)
        np.add.at(C, (idx[art], last[art]), 1)
        boundary = crossing & (nxt > n + 1)
        B[idx[boundary]] = last[boundary]

        real_y = (nxt <= horizon) & (d <= M)
        np.add.at(Y, (idx[real_y], d[real_y]), 1)

        pos[idx] = nxt
        idx = idx[nxt <= horizon]
    return CouplingBatch(n, M, horizon, C[:, 1:], Y[:, 1:], B)


def simulate_coupling(
    n: int, M: int, horizon: int | None = None, rng: np.random.Generator | None = None
) -> CoupledCounts:
    """One draw of the coupling; C and Y come from the same xi sequence."""
    rng = make_rng() if rng is None else rng
    return simulate_coupling_batch(n, M, horizon, 1, rng).draw(0)


def _cycle_spacings(n: int, size: int, rng: np.random.Generator) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(draw indices, spacing lengths)`` for the spacings of ``1 xi_2..xi_n 1``."""
    pos = np.ones(size, dtype=np.int64)
    idx = np.arange(size)
    while idx.size:
        cur = pos[idx]
        nxt = _next_one(cur, rng, n + 1)
        yield idx, nxt - cur
        pos[idx] = nxt
        idx = idx[nxt <= n]


def sample_cycle_counts_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``(size, n)`` array; row ``i`` holds ``C_1..C_n`` of a uniform permutation."""
    if n < 1:
        raise QueryError(f"n must be at least 1, got {n}")
    counts = np.zeros((size, n + 1), dtype=np.int64)
    for idx, d in _cycle_spacings(n, size, rng):
        np.add.at(counts, (idx, d), 1)
    return counts[:, 1:]


def sample_cycle_counts(n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    rng = make_rng() if rng is None else rng
    return sample_cycle_counts_batch(n, 1, rng)[0]


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with standard error ``max(sd(Re), sd(Im)) / sqrt(samples)``."""

    mean: complex
    stderr: float
    samples: int
    seed: int | None

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int | None) -> "MonteCarloEstimate":
        values = np.asarray(values, dtype=complex)
        N = values.size
        if N < 2:
            raise QueryError("need at least two samples")
        sd = max(values.real.std(ddof=1), values.imag.std(ddof=1))
        return cls(complex(values.mean()), float(sd / math.sqrt(N)), N, seed)

    def zscore(self, target: complex) -> float:
        diff = abs(self.mean - target)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.stderr


def mc_moment(q: MomentQuery, samples: int, seed: int | None = DEFAULT_SEED) -> MonteCarloEstimate:
    """Monte Carlo estimate of ``E[prod_k Z_n(x_k)**s_k]`` from sampled cycle counts."""
    if q.n < 1:
        return MonteCarloEstimate(1.0 + 0j, 0.0, samples, seed)
    w = np.asarray(_cycle_weights(q), dtype=complex)
    rng = make_rng(seed)
    vals = np.ones(samples, dtype=complex)
    for idx, d in _cycle_spacings(q.n, samples, rng):
        vals[idx] *= w[d]
    return MonteCarloEstimate.from_values(vals, seed)


def poisson_inversion(lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Poisson(lam) variates by sequential search of the CDF."""
    u = rng.random(size)
    out = np.zeros(size, dtype=np.int64)
    p = math.exp(-lam)
    cdf = p
    active = u > cdf
    k = 0
    while active.any() and p > 0:
        out[active] += 1
        k += 1
        p *= lam / k
        cdf += p
        active &= u > cdf
    return out


def z_infty_truncation(x: complex, s: complex, tol: float) -> int:
    """Smallest ``M`` with ``|s| c sum_{m>M} |x|**m / m < tol``, ``c = 4/(1-|x|)``.

    The tail is bounded by ``|x|**(M+1) / ((M+1)(1-|x|))``.
    """
    r = abs(x)
    if r >= 1:
        raise QueryError(f"Z_infinity needs |x| < 1, got {r}")
    if tol <= 0:
        raise QueryError("tol must be positive")
    if r == 0 or s == 0:
        return 0
    c = 4.0 / (1.0 - r)
    M = 0
    while abs(s) * c * r ** (M + 1) / ((M + 1) * (1 - r)) >= tol:
        M += 1
    return M


def sample_Z_infty_batch(
    x: complex, s: complex, size: int, rng: np.random.Generator, tol: float = 1e-12
) -> np.ndarray:
    """``size`` draws of ``prod_{m <= M(tol)} (1 - x**m)**(s Y_m)``, ``Y_m ~ Poisson(1/m)``."""
    x = complex(x)
    M = z_infty_truncation(x, s, tol)
    logz = np.zeros(size, dtype=complex)
    for m in range(1, M + 1):
        y = poisson_inversion(1.0 / m, size, rng)
        logz += y * np.log(1 - x**m)
    return np.exp(complex(s) * logz)


def sample_Z_infty(
    x: complex, s: complex, tol: float = 1e-12, rng: np.random.Generator | None = None
) -> complex:
    rng = make_rng() if rng is None else rng
    return complex(sample_Z_infty_batch(x, s, 1, rng, tol)[0])


def mc_Z_infty(
    x: complex, s: complex, samples: int, seed: int | None = DEFAULT_SEED, tol: float = 1e-12
) -> MonteCarloEstimate:
    vals = sample_Z_infty_batch(x, s, samples, make_rng(seed), tol)
    return MonteCarloEstimate.from_values(vals, seed)


def boundary_statistics(batch: CouplingBatch, m: int) -> dict[str, float]:
    """Empirical ``P(B_m)`` and ``E|C_m - Y_m|`` with standard errors."""
    if not 1 <= m <= batch.M:
        raise QueryError(f"m must lie in 1..{batch.M}")
    N = batch.draws
    hit = (batch.B == m).astype(float)
    diff = np.abs(batch.C[:, m - 1] - batch.Y[:, m - 1]).astype(float)
    return {
        "p_boundary": float(hit.mean()),
        "p_boundary_stderr": float(hit.std(ddof=1) / math.sqrt(N)),
        "mean_abs_diff": float(diff.mean()),
        "mean_abs_diff_stderr": float(diff.std(ddof=1) / math.sqrt(N)),
    }


@dataclass
class CouplingReport:
    """Mismatch probabilities ``P((C_1..C_b) != (Y_1..Y_b))`` over a grid of ``n``
    and Poisson diagnostics for ``Y_1..Y_mmax``."""

    b: int
    samples: int
    seed: int
    ns: list[int] = field(default_factory=list)
    mismatch: list[float] = field(default_factory=list)
    mismatch_stderr: list[float] = field(default_factory=list)
    y_mean: np.ndarray | None = None
    y_mean_stderr: np.ndarray | None = None
    y_var: np.ndarray | None = None

    @property
    def y_expected(self) -> np.ndarray:
        return 1.0 / np.arange(1, len(self.y_mean) + 1)


def coupling_distribution_check(
    ns: int | Sequence[int],
    b: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    mmax: int = 10,
    horizon: int | None = None,
) -> CouplingReport:
    """Run the coupling at each ``n`` (one child RNG stream per grid point).

    The ``Y`` diagnostics come from the draws at the largest ``n``.
    """
    ns = [ns] if isinstance(ns, int) else list(ns)
    if any(b > n for n in ns):
        raise QueryError("need b <= n for every grid point")
    report = CouplingReport(b=b, samples=samples, seed=seed)
    rngs = spawn_rngs(seed, len(ns))
    top = max(ns)
    for n, rng in zip(ns, rngs):
        M = min(max(b, mmax), n)
        batch = simulate_coupling_batch(n, M, horizon, samples, rng)
        miss = np.any(batch.C[:, :b] != batch.Y[:, :b], axis=1).astype(float)
        report.ns.append(n)
        report.mismatch.append(float(miss.mean()))
        report.mismatch_stderr.append(float(miss.std(ddof=1) / math.sqrt(samples)))
        if n == top:
            Yk = batch.Y[:, : min(mmax, M)].astype(float)
            report.y_mean = Yk.mean(axis=0)
            report.y_var = Yk.var(axis=0, ddof=1)
            report.y_mean_stderr = Yk.std(axis=0, ddof=1) / math.sqrt(samples)
    return report


def write_coupling_csv(batch: CouplingBatch, fh: TextIO) -> None:
    """Columns ``draw, m, C_m, Y_m, B``; ``B`` is empty when no boundary event holds."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["draw", "m", "C_m", "Y_m", "B"])
    for i in range(batch.draws):
        b = int(batch.B[i])
        for m in range(1, batch.M + 1):
            writer.writerow([i, m, int(batch.C[i, m - 1]), int(batch.Y[i, m - 1]), b if b else ""])
