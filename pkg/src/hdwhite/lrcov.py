"""Long-run covariance machinery behind the max-correlation critical value.

The lag-product panel ``f_t`` stacks vec(x_{t+k} x_t^T) for k = 1..K and
t = 1..n-K. Its kernel long-run covariance, rescaled by the inverse
standard deviations, is the covariance of the Gaussian vector whose sup-norm
approximates the null distribution of the test statistic. Drawing from that
Gaussian never forms the (p^2 K)^2 covariance: a multiplier vector
eta ~ N(0, Theta) with Theta_{st} = kernel((s - t) / bandwidth) is drawn in
time, and the draw is the eta-weighted sum of the f_t.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy import linalg

from .errors import SamplerError
from .moments import AutocovSet
from .tsdata import TimeSeriesPanel

ANDREWS_CONSTANT = 1.3221
RHO_CLIP = 0.97
DEFAULT_BLOCK_ROWS = 4096
DEFAULT_DRAW_BATCH = 500
# panels above this many bytes are generated block by block instead of cached
MATERIALIZE_LIMIT_BYTES = 256 * 2**20
ORACLE_MAX_ROWS = 5000
# rows per GEMM call; every f row is multiplied inside a tile of exactly this
# height at a fixed offset, so draws are bitwise independent of block_rows
GEMM_TILE = 128

# |z| below which the series expansion replaces the closed form (z = 6 pi x / 5)
_QS_SERIES_Z = 0.05


def qs_kernel(x):
    """Quadratic spectral kernel, vectorised; ``qs_kernel(0) == 1``."""
    x = np.asarray(x, dtype=float)
    z = np.abs(6.0 * np.pi * x / 5.0)
    out = np.empty_like(z)
    small = z < _QS_SERIES_Z
    z2 = z[small] ** 2
    out[small] = 1.0 - z2 / 10.0 + z2**2 / 280.0 - z2**3 / 15120.0
    zl = z[~small]
    out[~small] = 3.0 / zl**2 * (np.sin(zl) / zl - np.cos(zl))
    return float(out) if out.ndim == 0 else out


class FPanel:
    """The (p^2 K) x (n - K) panel of lag products.

    Row ``(k - 1) * p**2 + j * p + i`` at column ``t`` holds
    ``x[i, t + k] * x[j, t]`` (0-based t), i.e. column t is
    ``[vec(x_{t+1} x_t^T); ...; vec(x_{t+K} x_t^T)]`` with column-major vec.

    Parameters
    ----------
    panel : TimeSeriesPanel
    K : int
        Number of lags.
    storage : {"auto", "materialized", "lazy"}
        ``"materialized"`` builds the whole array once; ``"lazy"`` regenerates
        row blocks on demand so memory stays at one block.
    block_rows : int
        Height of the row blocks yielded by :meth:`iter_blocks`.
    """

    def __init__(self, panel: TimeSeriesPanel, K: int, storage: str = "auto",
                 block_rows: int = DEFAULT_BLOCK_ROWS):
        p, n = panel.p, panel.n
        if K < 1:
            raise ValueError("K must be >= 1")
        if n - K < 2:
            raise ValueError(f"need n - K >= 2, got n={n}, K={K}")
        if block_rows < 1:
            raise ValueError("block_rows must be positive")
        if storage not in ("auto", "materialized", "lazy"):
            raise ValueError(f"unknown storage mode {storage!r}")
        self.p, self.K, self.n = p, K, n
        self.n_tilde = n - K
        self.block_rows = int(block_rows)
        # row-major copy: each series contiguous in time
        self._x = np.ascontiguousarray(panel.values)
        if storage == "auto":
            nbytes = self.n_rows * self.n_tilde * 8
            storage = "materialized" if nbytes <= MATERIALIZE_LIMIT_BYTES else "lazy"
        self.storage = storage
        self._full = None
        if storage == "materialized":
            self._full = self.rows(0, self.n_rows)

    @property
    def n_rows(self) -> int:
        return self.p * self.p * self.K

    def row_index(self, k: int, i: int, j: int) -> int:
        """Row holding x[i, t + k] * x[j, t] (k is 1-based)."""
        return (k - 1) * self.p * self.p + j * self.p + i

    def rows(self, start: int, stop: int) -> np.ndarray:
        if self._full is not None:
            return self._full[start:stop]
        p, m = self.p, self.n_tilde
        x = self._x
        out = np.empty((stop - start, m))
        # each (k, j) group is a contiguous run of p rows indexed by i
        for g in range(start // p, (stop - 1) // p + 1 if stop > start else 0):
            k, j = g // p + 1, g % p
            lo, hi = max(start, g * p), min(stop, (g + 1) * p)
            out[lo - start:hi - start] = x[lo - g * p:hi - g * p, k:k + m] * x[j, :m]
        return out

    def iter_blocks(self, block_rows: int | None = None) -> Iterator[tuple[int, np.ndarray]]:
        height = block_rows or self.block_rows
        for start in range(0, self.n_rows, height):
            yield start, self.rows(start, min(start + height, self.n_rows))

    def materialize(self) -> np.ndarray:
        return self.rows(0, self.n_rows)


def clip_rho(rho):
    return np.clip(rho, -RHO_CLIP, RHO_CLIP)


def andrews_a2(rho, sigma2) -> float:
    """Plug-in a(2) from per-row AR(1) coefficients and innovation variances."""
    rho = clip_rho(np.asarray(rho, dtype=float))
    s4 = np.asarray(sigma2, dtype=float) ** 2
    den = np.sum(s4 / (1.0 - rho) ** 4)
    if den <= 0.0:
        return 0.0
    return float(np.sum(4.0 * rho**2 * s4 / (1.0 - rho) ** 8) / den)


def ar1_fit_rows(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares AR(1) without intercept on each demeaned row.

    Returns the clipped coefficients and innovation variances
    (1 - rho^2) * var(row).
    """
    x = block - block.mean(axis=1, keepdims=True)
    num = np.einsum("ij,ij->i", x[:, 1:], x[:, :-1])
    den = np.einsum("ij,ij->i", x[:, :-1], x[:, :-1])
    rho = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    rho = clip_rho(rho)
    sigma2 = (1.0 - rho**2) * np.mean(x**2, axis=1)
    return rho, sigma2


def andrews_bandwidth(f_panel: FPanel) -> float:
    """Andrews (1991) AR(1) plug-in bandwidth 1.3221 * (a(2) * n_tilde)^(1/5) for the QS kernel."""
    if f_panel.n_tilde < 4:
        raise ValueError("bandwidth selection needs n - K >= 4")
    fits = [ar1_fit_rows(block) for _, block in f_panel.iter_blocks()]
    rho = np.concatenate([r for r, _ in fits])
    sigma2 = np.concatenate([s for _, s in fits])
    return ANDREWS_CONSTANT * (andrews_a2(rho, sigma2) * f_panel.n_tilde) ** 0.2


def theta_matrix(n_tilde: int, bandwidth: float,
                 kernel: Callable = qs_kernel) -> np.ndarray:
    """Toeplitz multiplier covariance; the identity when ``bandwidth == 0``."""
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    col = np.zeros(n_tilde)
    if bandwidth == 0:
        col[0] = 1.0
    else:
        col[:] = kernel(np.arange(n_tilde) / bandwidth)
    return linalg.toeplitz(col)


def _cholesky_with_jitter(theta, tries=3, start=1e-10):
    try:
        return linalg.cholesky(theta, lower=True), 0.0
    except linalg.LinAlgError:
        pass
    jitter = start
    for _ in range(tries):
        try:
            return linalg.cholesky(theta + jitter * np.eye(len(theta)), lower=True), jitter
        except linalg.LinAlgError:
            jitter *= 10.0
    lam = float(linalg.eigvalsh(theta, subset_by_index=[0, 0])[0])
    raise SamplerError(
        f"Cholesky of the multiplier covariance failed after jitter {jitter / 10:.0e}; "
        f"smallest eigenvalue {lam:.3e}"
    )


@dataclass(eq=False)
class MultiplierSampler:
    """Draws G = diag(scale) * n_tilde^{-1/2} * sum_t eta_t f_t with eta ~ N(0, Theta).

    ``scale[row] = 1 / (sd_i * sd_j)`` realises (I_K kron W) without a
    Kronecker matrix. Draw ``b`` comes from batch ``b // draw_batch``, whose
    generator is seeded by ``SeedSequence(seed, spawn_key=(batch,))``, so the
    sequence does not depend on how batches are scheduled.
    """

    bandwidth: float
    theta_chol: np.ndarray
    scale: np.ndarray
    f_panel: FPanel
    seed: int
    jitter: float = 0.0
    draw_batch: int = DEFAULT_DRAW_BATCH
    kernel: Callable = field(default=qs_kernel, repr=False)

    @property
    def n_tilde(self) -> int:
        return self.f_panel.n_tilde

    def theta(self) -> np.ndarray:
        return theta_matrix(self.n_tilde, self.bandwidth, self.kernel)

    def batch_rng(self, batch: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(batch,)))

    def multipliers(self, batch: int, size: int) -> np.ndarray:
        """Correlated multipliers for one batch, shape (size, n_tilde), one draw per row."""
        z = self.batch_rng(batch).standard_normal((size, self.n_tilde))
        return z @ self.theta_chol.T

    def _batch_max(self, batch: int, size: int, block_rows: int | None) -> np.ndarray:
        h = self.multipliers(batch, size).T * (1.0 / math.sqrt(self.n_tilde))
        height = block_rows or self.f_panel.block_rows
        height = GEMM_TILE * math.ceil(height / GEMM_TILE)
        tile = np.zeros((GEMM_TILE, self.n_tilde))
        best = np.zeros(size)
        for start, block in self.f_panel.iter_blocks(height):
            scaled = block * self.scale[start:start + len(block), None]
            for s in range(0, len(scaled), GEMM_TILE):
                rows = scaled[s:s + GEMM_TILE]
                tile[:len(rows)] = rows
                tile[len(rows):] = 0.0
                g = tile @ h
                np.maximum(best, np.abs(g[:len(rows)]).max(axis=0), out=best)
        return best

    def draw_vectors(self, B: int) -> np.ndarray:
        """Full draws as a (B, p^2 K) array; small instances only."""
        out = []
        f = self.f_panel.materialize() * self.scale[:, None]
        for batch, size in _batches(B, self.draw_batch):
            h = self.multipliers(batch, size).T * (1.0 / math.sqrt(self.n_tilde))
            out.append((f @ h).T)
        return np.concatenate(out, axis=0)

    def xi_diag(self) -> np.ndarray:
        """Diagonal of the estimated covariance of G."""
        return xi_diagonal(self.f_panel, self.scale, self.bandwidth, self.kernel)


def _batches(B, size):
    return [(c, min(size, B - c * size)) for c in range(math.ceil(B / size))]


def weight_vector(autocov: AutocovSet, K: int) -> np.ndarray:
    inv = 1.0 / autocov.sd
    return np.tile(np.outer(inv, inv).ravel(), K)


def build_sampler(autocov: AutocovSet, f_panel: FPanel, bandwidth: float, seed: int,
                  draw_batch: int = DEFAULT_DRAW_BATCH,
                  kernel: Callable = qs_kernel) -> MultiplierSampler:
    """Factorize Theta once; each later draw costs O(n_tilde^2) plus one panel product."""
    if bandwidth < 0 or not np.isfinite(bandwidth):
        raise ValueError(f"bandwidth must be finite and >= 0, got {bandwidth}")
    if autocov.p != f_panel.p:
        raise ValueError("autocovariances and f panel disagree on p")
    theta = theta_matrix(f_panel.n_tilde, bandwidth, kernel)
    chol, jitter = _cholesky_with_jitter(theta)
    return MultiplierSampler(
        bandwidth=float(bandwidth), theta_chol=chol,
        scale=weight_vector(autocov, f_panel.K), f_panel=f_panel,
        seed=int(seed), jitter=jitter, draw_batch=int(draw_batch), kernel=kernel,
    )


def draw_max_abs(sampler: MultiplierSampler, B: int, workers: int = 1,
                 block_rows: int | None = None) -> np.ndarray:
    """Sup-norms |G_b|_inf for b = 1..B.

    Batches run on ``workers`` threads; output does not depend on the
    worker count.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    jobs = _batches(B, sampler.draw_batch)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: sampler._batch_max(*job, block_rows), jobs))
    else:
        parts = [sampler._batch_max(c, m, block_rows) for c, m in jobs]
    return np.concatenate(parts)


def oracle_jhat(f_panel: FPanel, bandwidth: float,
                kernel: Callable = qs_kernel) -> np.ndarray:
    """Kernel long-run covariance sum_j K(j / b) H(j), built lag by lag.

    Test oracle only: it materializes a (p^2 K)^2 matrix.
    """
    if f_panel.n_rows > ORACLE_MAX_ROWS:
        raise ValueError(
            f"oracle limited to p^2 K <= {ORACLE_MAX_ROWS}, got {f_panel.n_rows}"
        )
    f = f_panel.materialize()
    m = f_panel.n_tilde
    jhat = f @ f.T / m
    if bandwidth == 0:
        return jhat
    for j in range(1, m):
        w = kernel(j / bandwidth)
        h = f[:, j:] @ f[:, :m - j].T / m
        jhat += w * (h + h.T)
    return jhat


def xi_diagonal(f_panel: FPanel, scale: np.ndarray, bandwidth: float,
                kernel: Callable = qs_kernel) -> np.ndarray:
    """scale^2 * diag(F Theta F^T) / n_tilde, computed block by block."""
    theta = theta_matrix(f_panel.n_tilde, bandwidth, kernel)
    out = np.empty(f_panel.n_rows)
    for start, block in f_panel.iter_blocks():
        q = np.einsum("ij,ij->i", block @ theta, block)
        out[start:start + len(block)] = q / f_panel.n_tilde
    return out * scale**2


def estimate_varrho(panel: TimeSeriesPanel, autocov: AutocovSet, K: int,
                    bandwidth: float | None = None) -> float:
    """Largest diagonal entry of the estimated covariance of G."""
    fp = FPanel(panel, K)
    bw = andrews_bandwidth(fp) if bandwidth is None else bandwidth
    return float(xi_diagonal(fp, weight_vector(autocov, K), bw).max())
