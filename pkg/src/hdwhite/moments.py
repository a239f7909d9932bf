"""Sample autocovariance and autocorrelation matrices.

Both use divisor ``n`` at every lag and uncentered cross products, so the
caller is expected to pass a centered panel when the data are not known to
be mean zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateComponentError
from .tsdata import TimeSeriesPanel


@dataclass(frozen=True, eq=False)
class AutocovSet:
    """Autocovariances ``sigma[k]`` and autocorrelations ``gamma[k]`` for k = 0..K.

    ``sigma`` and ``gamma`` are arrays of shape (K + 1, p, p); ``sd`` holds
    the component standard deviations sqrt(diag(sigma[0])).
    """

    K: int
    n: int
    sigma: np.ndarray
    gamma: np.ndarray
    sd: np.ndarray

    @property
    def p(self) -> int:
        return self.sd.shape[0]


def sample_autocov(panel: TimeSeriesPanel, k: int) -> np.ndarray:
    """(1/n) * sum_{t=1}^{n-k} x_{t+k} x_t^T."""
    n = panel.n
    if not 0 <= k <= n - 1:
        raise ValueError(f"lag must satisfy 0 <= k <= n - 1 = {n - 1}, got {k}")
    x = panel.values
    return x[:, k:] @ x[:, : n - k].T / n


def sample_autocorr_set(panel: TimeSeriesPanel, K: int) -> AutocovSet:
    n = panel.n
    if K < 1 or K > n - 2:
        raise ValueError(f"max lag must satisfy 1 <= K <= n - 2 = {n - 2}, got {K}")
    sigma = np.stack([sample_autocov(panel, k) for k in range(K + 1)])
    var = np.diag(sigma[0]).copy()
    zero = np.flatnonzero(var <= 0.0)
    if zero.size:
        raise DegenerateComponentError(int(zero[0]))
    sd = np.sqrt(var)
    inv = 1.0 / sd
    gamma = sigma * inv[None, :, None] * inv[None, None, :]
    for arr in (sigma, gamma, sd):
        arr.setflags(write=False)
    return AutocovSet(K=K, n=n, sigma=sigma, gamma=gamma, sd=sd)
