"""Constant linear pre-transforms applied before the max-correlation test.

Two constructions are available. ``"whiten"`` (the default) is the
symmetric prewhitening Q = S(0)^{-1/2}: it removes contemporaneous
correlation while staying as close to the identity as possible, so sparse
serial dependence stays in few components. ``"spectral"`` standardizes each
series, accumulates sum_{k=0}^{k0} S(k) S(k)^T over the standardized
autocovariances S(k) and rotates onto its eigenvectors. Either map is
constant in time, so the transformed series is white noise exactly when the
original is.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateComponentError, InfeasibleMethodError
from .moments import sample_autocov
from .tsdata import TimeSeriesPanel

DEFAULT_K0 = 5
TRANSFORMS = ("whiten", "spectral")


@dataclass(frozen=True, eq=False)
class LinearTransform:
    q: np.ndarray
    k0: int

    def __post_init__(self):
        q = np.array(self.q, dtype=float, ndmin=2)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"transform must be square, got {q.shape}")
        sv = np.linalg.svd(q, compute_uv=False)
        if not sv[-1] > 1e-10 * sv[0]:
            raise ValueError("transform matrix is numerically singular")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    def inverse(self) -> LinearTransform:
        return LinearTransform(np.linalg.inv(self.q), self.k0)


def _sign_fix(v):
    # first significant coordinate of each column made positive
    v = v.copy()
    for c in range(v.shape[1]):
        col = v[:, c]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
        if col[idx] < 0:
            v[:, c] = -col
    return v


def fit_transform(panel: TimeSeriesPanel, k0: int = DEFAULT_K0,
                  method: str = "whiten") -> LinearTransform:
    """Estimate the pre-transform from a (centered) panel.

    Parameters
    ----------
    panel : TimeSeriesPanel
    k0 : int
        Lag horizon of the spectral construction; recorded but unused by
        ``"whiten"``.
    method : {"whiten", "spectral"}
    """
    if method not in TRANSFORMS:
        raise ValueError(f"unknown transform {method!r}; choose from {', '.join(TRANSFORMS)}")
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    if k0 > panel.n - 1:
        raise ValueError(f"k0={k0} exceeds n - 1 = {panel.n - 1}")
    var = np.einsum("ij,ij->i", panel.values, panel.values) / panel.n
    zero = np.flatnonzero(var <= 0.0)
    if zero.size:
        raise DegenerateComponentError(int(zero[0]))
    d_inv_half = 1.0 / np.sqrt(var)
    y = TimeSeriesPanel(panel.values * d_inv_half[:, None], centered=panel.centered)
    if method == "whiten":
        lam, u = np.linalg.eigh(sample_autocov(y, 0))
        if lam[0] <= 1e-10 * lam[-1]:
            raise InfeasibleMethodError(
                f"sample covariance is singular (p={panel.p}, n={panel.n}); cannot prewhiten"
            )
        return LinearTransform((u / np.sqrt(lam)) @ u.T * d_inv_half[None, :], k0)
    w = np.zeros((panel.p, panel.p))
    for k in range(k0 + 1):
        s = sample_autocov(y, k)
        w += s @ s.T
    lam, v = np.linalg.eigh((w + w.T) / 2.0)
    v = _sign_fix(v[:, np.argsort(lam)[::-1]])
    return LinearTransform(v.T * d_inv_half[None, :], k0)


def apply(transform: LinearTransform, panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Map every time point x_t to q @ x_t."""
    if transform.q.shape[1] != panel.p:
        raise ValueError(
            f"transform expects p={transform.q.shape[1]}, panel has p={panel.p}"
        )
    return TimeSeriesPanel(transform.q @ panel.values, centered=panel.centered)


def save_csv(transform: LinearTransform, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# k0={transform.k0}\n")
        writer = csv.writer(fh)
        for row in transform.q:
            writer.writerow([repr(float(v)) for v in row])


def load_csv(path) -> LinearTransform:
    k0 = DEFAULT_K0
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                if line[1:].strip().startswith("k0="):
                    k0 = int(line[1:].strip()[3:])
                continue
            if line:
                rows.append([float(c) for c in line.split(",")])
    return LinearTransform(np.asarray(rows), k0)
