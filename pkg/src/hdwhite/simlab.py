"""Data generators and a Monte-Carlo runner for empirical size and power.

Models 1-3 are white noise eps_t = A z_t with z_t Gaussian or ARCH(1);
Models 4 and 5 are serially dependent alternatives with t_8 innovations.

Replication ``r`` draws its data from ``SeedSequence(master_seed,
spawn_key=(r, 0))`` and its multiplier seed from ``spawn_key=(r, 1)``, so
any replication can be rerun in isolation and results do not depend on how
replications are distributed over worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import linalg

from .errors import ConfigError, InfeasibleMethodError
from .runner import canonical_method, run_test
from .tsdata import TimeSeriesPanel
from .tspca import TRANSFORMS

MODELS = ("m1", "m2", "m3", "m4", "m5")
NOISES = ("gaussian", "arch")
ARCH_BURN_IN = 100
VAR_BURN_IN = 200
MAX_SPECTRAL_RADIUS = 0.95
T_DOF = 8
_LOADING_KEY = (0,)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def psd_sqrt(s: np.ndarray) -> np.ndarray:
    """Symmetric square root through the eigendecomposition."""
    lam, v = np.linalg.eigh(s)
    return (v * np.sqrt(np.clip(lam, 0.0, None))) @ v.T


def model1_cov(p: int) -> np.ndarray:
    idx = np.arange(p)
    return 0.995 ** np.abs(idx[:, None] - idx[None, :])


def model2_cov(p: int) -> np.ndarray:
    """Unit diagonal, 0.8 inside blocks of size ceil(p / 2.5); trailing coordinates unblocked."""
    r = -(-2 * p // 5)
    s = np.eye(p)
    for q in range(p // r):
        s[q * r:(q + 1) * r, q * r:(q + 1) * r] = 0.8
    np.fill_diagonal(s, 1.0)
    return s


def model3_loading(p: int, rng) -> np.ndarray:
    return _rng(rng).uniform(-1.0, 1.0, size=(p, p))


def model4_coef(p: int, rng) -> np.ndarray:
    """Sparse VAR(1) coefficient: U(-0.25, 0.25) in the leading k0 x k0 block.

    Redrawn until the spectral radius is below 0.95.
    """
    rng = _rng(rng)
    k0 = power_k0(p)
    a = np.zeros((p, p))
    while True:
        block = rng.uniform(-0.25, 0.25, size=(k0, k0))
        if np.abs(np.linalg.eigvals(block)).max() < MAX_SPECTRAL_RADIUS:
            a[:k0, :k0] = block
            return a


def model5_loading(p: int, rng) -> np.ndarray:
    rng = _rng(rng)
    keep = rng.uniform(size=(p, p)) < 1.0 / 3.0
    a = np.where(keep, rng.uniform(-1.0, 1.0, size=(p, p)), 0.0)
    np.fill_diagonal(a, 0.8)
    return a


def power_k0(p: int) -> int:
    """Number of serially dependent components in Models 4 and 5: min(ceil(p / 5), 12)."""
    return min(-(-p // 5), 12)


def model5_time_cov(n: int) -> np.ndarray:
    """n x n Toeplitz: 1 on the diagonal, 0.5 |d|^-0.6 for 1 <= |d| <= 7, zero beyond."""
    col = np.zeros(n)
    col[0] = 1.0
    d = np.arange(1, min(7, n - 1) + 1)
    col[d] = 0.5 * d**-0.6
    return linalg.toeplitz(col)


@lru_cache(maxsize=8)
def _model5_chol(n):
    c = linalg.cholesky(model5_time_cov(n), lower=True)
    c.setflags(write=False)
    return c


def gen_arch_noise(p: int, n: int, seed=None, gamma0=None, gamma1=None,
                   burn_in: int = ARCH_BURN_IN) -> np.ndarray:
    """p independent ARCH(1) series u_t = sigma_t e_t, sigma_t^2 = g0 + g1 u_{t-1}^2.

    Per-series g0 ~ U(0.25, 0.5) and g1 ~ U(0, 0.5) unless given. The
    recursion starts from the stationary variance g0 / (1 - g1) and the
    first ``burn_in`` steps are discarded. Returns a p x n array.
    """
    rng = _rng(seed)
    g0 = rng.uniform(0.25, 0.5, size=p) if gamma0 is None else np.broadcast_to(gamma0, p)
    g1 = rng.uniform(0.0, 0.5, size=p) if gamma1 is None else np.broadcast_to(gamma1, p)
    e = rng.standard_normal((burn_in + n, p))
    out = np.empty((burn_in + n, p))
    u2 = g0 / (1.0 - g1)
    for t in range(burn_in + n):
        out[t] = np.sqrt(g0 + g1 * u2) * e[t]
        u2 = out[t] ** 2
    return out[burn_in:].T.copy()


def white_noise(p: int, n: int, noise: str, rng) -> np.ndarray:
    if noise == "gaussian":
        return _rng(rng).standard_normal((p, n))
    if noise == "arch":
        return gen_arch_noise(p, n, rng)
    raise ValueError(f"unknown noise {noise!r}")


def gen_model1(p, n, noise="gaussian", seed=None) -> TimeSeriesPanel:
    rng = _rng(seed)
    return TimeSeriesPanel(psd_sqrt(model1_cov(p)) @ white_noise(p, n, noise, rng))


def gen_model2(p, n, noise="gaussian", seed=None) -> TimeSeriesPanel:
    rng = _rng(seed)
    return TimeSeriesPanel(psd_sqrt(model2_cov(p)) @ white_noise(p, n, noise, rng))


def gen_model3(p, n, noise="gaussian", seed=None, loading=None) -> TimeSeriesPanel:
    rng = _rng(seed)
    a = model3_loading(p, rng) if loading is None else loading
    return TimeSeriesPanel(a @ white_noise(p, n, noise, rng))


def gen_model4(p, n, seed=None, coef=None, burn_in: int = VAR_BURN_IN) -> TimeSeriesPanel:
    rng = _rng(seed)
    a = model4_coef(p, rng) if coef is None else coef
    e = rng.standard_t(T_DOF, size=(burn_in + n, p))
    x = np.zeros((burn_in + n, p))
    x[0] = e[0]
    for t in range(1, burn_in + n):
        x[t] = a @ x[t - 1] + e[t]
    return TimeSeriesPanel(x[burn_in:].T)


def gen_model5(p, n, seed=None, loading=None) -> TimeSeriesPanel:
    rng = _rng(seed)
    a = model5_loading(p, rng) if loading is None else loading
    k0 = power_k0(p)
    z = np.empty((p, n))
    z[:k0] = rng.standard_normal((k0, n)) @ _model5_chol(n).T
    z[k0:] = rng.standard_t(T_DOF, size=(p - k0, n))
    return TimeSeriesPanel(a @ z)


def draw_loading(model, p, rng):
    """Random loading/coefficient matrix of a model, or None for Models 1 and 2."""
    return {"m3": model3_loading, "m4": model4_coef, "m5": model5_loading}.get(
        model, lambda p, rng: None)(p, rng)


def generate(model, p, n, noise="gaussian", seed=None, loading=None) -> TimeSeriesPanel:
    rng = _rng(seed)
    if model == "m1":
        return gen_model1(p, n, noise, rng)
    if model == "m2":
        return gen_model2(p, n, noise, rng)
    if model == "m3":
        return gen_model3(p, n, noise, rng, loading)
    if model == "m4":
        return gen_model4(p, n, rng, loading)
    if model == "m5":
        return gen_model5(p, n, rng, loading)
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class SimConfig:
    model: str = "m1"
    noise: str = "gaussian"
    p: int = 3
    n: int = 300
    K_list: tuple = (2,)
    alpha: float = 0.05
    reps: int = 500
    B: int = 2000
    master_seed: int = 0
    methods: tuple = ("maxcorr", "q1", "q2", "q3", "lm", "tiao_box")
    # shorthand for adding maxcorr_tspca to the methods
    pretransform: bool = False
    # draw the random loading matrix of Models 3-5 once instead of per replication
    fix_loadings: bool = False
    k0: int = 5
    # pre-transform construction behind maxcorr_tspca
    transform: str = "whiten"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}", "model")
        if self.noise not in NOISES:
            raise ConfigError(f"unknown noise {self.noise!r}", "noise")
        if self.model in ("m4", "m5") and self.noise != "gaussian":
            raise ConfigError("noise applies to models m1-m3 only", "noise")
        if self.p < 1 or self.n < 3:
            raise ConfigError("need p >= 1 and n >= 3", "p")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1", "reps")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)", "alpha")
        if not self.K_list or min(self.K_list) < 1:
            raise ConfigError("lags must be positive integers", "K_list")
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.transform!r}", "transform")
        if self.master_seed < 0:
            raise ConfigError("seed must be nonnegative", "master_seed")
        try:
            methods = tuple(dict.fromkeys(canonical_method(m) for m in self.methods))
        except ValueError as exc:
            raise ConfigError(str(exc), "methods") from None
        if self.pretransform and "maxcorr_tspca" not in methods:
            methods += ("maxcorr_tspca",)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "K_list", tuple(int(k) for k in self.K_list))
        if any(m.startswith("maxcorr") for m in methods) and self.B < math.ceil(1 / self.alpha):
            raise ConfigError("B must be at least ceil(1/alpha)", "B")

    def cells(self):
        """(method, K) pairs in report order; Tiao-Box has the single cell K = 0."""
        out = []
        for m in self.methods:
            out.extend([(m, 0)] if m == "tiao_box" else [(m, k) for k in self.K_list])
        return out


_KEY_ALIASES = {
    "K": "K_list", "k": "K_list", "lags": "K_list", "k_list": "K_list",
    "draws": "B", "b": "B", "seed": "master_seed", "tspca": "pretransform",
}


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text):
    return [s.strip() for s in text.replace(";", ",").split(",") if s.strip()]


_PARSERS = {
    "model": str.strip, "noise": str.strip, "p": int, "n": int,
    "K_list": lambda s: tuple(int(v) for v in _list(s)), "alpha": float,
    "reps": int, "B": int, "master_seed": int, "methods": lambda s: tuple(_list(s)),
    "pretransform": _parse_bool, "fix_loadings": _parse_bool, "k0": int,
    "transform": str.strip,
}


def config_from_mapping(items: dict) -> SimConfig:
    """Build a config from string values keyed by field name or alias."""
    kwargs = {}
    for key, value in items.items():
        name = _KEY_ALIASES.get(key, key)
        if name not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}", key)
        if isinstance(value, str):
            try:
                value = _PARSERS[name](value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", key) from None
        kwargs[name] = value
    return SimConfig(**kwargs)


def parse_config_text(text: str) -> dict:
    items = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line)
        key, value = (s.strip() for s in line.split("=", 1))
        items[key] = value
    return items


def load_config(path) -> SimConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text(encoding="utf-8")))


def dump_config(config: SimConfig) -> str:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


@dataclass
class SimRow:
    method: str
    K: int
    rejections: int = 0
    reps: int = 0
    skipped: int = 0
    seconds: float = 0.0

    @property
    def reject_rate(self) -> float:
        return self.rejections / self.reps if self.reps else math.nan

    @property
    def mc_se(self) -> float:
        r = self.reject_rate
        return math.sqrt(r * (1.0 - r) / self.reps) if self.reps else math.nan


@dataclass
class SimReport:
    config: SimConfig
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def row(self, method: str, K: int = None) -> SimRow:
        method = canonical_method(method)
        if method == "tiao_box":
            K = 0
        for r in self.rows:
            if r.method == method and (K is None or r.K == K):
                return r
        raise KeyError((method, K))

    def rate(self, method: str, K: int = None) -> float:
        return self.row(method, K).reject_rate

    def to_csv(self, timing: bool = False) -> str:
        """CSV with columns method, K, reject_rate, mc_se, reps, seconds.

        ``seconds`` is left empty unless ``timing`` is set, so the default
        output is byte-for-byte reproducible. Skipped cells have empty rate
        and standard error and reps = 0.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "K", "reject_rate", "mc_se", "reps", "seconds"])
        for r in self.rows:
            rate = "" if not r.reps else f"{r.reject_rate:.6f}"
            se = "" if not r.reps else f"{r.mc_se:.6f}"
            w.writerow([r.method, r.K, rate, se, r.reps, f"{r.seconds:.3f}" if timing else ""])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"# {self.config.model} {self.config.noise} p={self.config.p} "
                 f"n={self.config.n} reps={self.config.reps}"]
        for r in self.rows:
            rate = "skipped" if not r.reps else f"{100 * r.reject_rate:5.1f}%"
            lines.append(f"{r.method:>14s} K={r.K:<3d} {rate}")
        return "\n".join(lines)


def replication_seeds(master_seed: int, r: int) -> tuple[np.random.SeedSequence, int]:
    """Data seed sequence and multiplier seed for replication ``r``."""
    data = np.random.SeedSequence(master_seed, spawn_key=(r, 0))
    test_seed = int(np.random.SeedSequence(master_seed, spawn_key=(r, 1))
                    .generate_state(1, dtype=np.uint32)[0])
    return data, test_seed


def fixed_loading(config: SimConfig):
    if not config.fix_loadings:
        return None
    rng = np.random.default_rng(np.random.SeedSequence(config.master_seed, spawn_key=_LOADING_KEY))
    return draw_loading(config.model, config.p, rng)


def run_replication(config: SimConfig, r: int, loading=None) -> dict:
    """Outcome of every (method, K) cell for one replication.

    Values are (reject, seconds) pairs, or (None, seconds) when the method
    is infeasible for the dimensions.
    """
    data_seq, test_seed = replication_seeds(config.master_seed, r)
    panel = generate(config.model, config.p, config.n, config.noise,
                     np.random.default_rng(data_seq), loading)
    out = {}
    for method, K in config.cells():
        t0 = time.perf_counter()
        try:
            res = run_test(panel, method, max(K, 1), config.alpha, config.B, test_seed,
                           **_tspca_options(config, method))
            outcome = bool(res.reject)
        except InfeasibleMethodError:
            outcome = None
        out[(method, K)] = (outcome, time.perf_counter() - t0)
    return out


def _tspca_options(config, method):
    if method != "maxcorr_tspca":
        return {}
    return {"k0": config.k0, "transform": config.transform}


def _run_chunk(args):
    config, reps, loading = args
    return [run_replication(config, r, loading) for r in reps]


def run_experiment(config: SimConfig, jobs: int = 1, progress=None) -> SimReport:
    """Monte-Carlo rejection frequencies for every (method, K) cell.

    ``jobs > 1`` spreads replications over worker processes; tallies are
    integers, so the report does not depend on ``jobs``. ``progress`` is an
    optional callable receiving the number of finished replications.
    """
    t0 = time.perf_counter()
    loading = fixed_loading(config)
    rows = {cell: SimRow(*cell) for cell in config.cells()}

    def absorb(outcomes):
        for cell, (outcome, secs) in outcomes.items():
            row = rows[cell]
            row.seconds += secs
            if outcome is None:
                row.skipped += 1
            else:
                row.reps += 1
                row.rejections += int(outcome)

    done = 0
    if jobs <= 1:
        for r in range(config.reps):
            absorb(run_replication(config, r, loading))
            done += 1
            if progress:
                progress(done)
    else:
        size = max(1, math.ceil(config.reps / (4 * jobs)))
        chunks = [(config, range(s, min(s + size, config.reps)), loading)
                  for s in range(0, config.reps, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch in pool.map(_run_chunk, chunks):
                for outcomes in batch:
                    absorb(outcomes)
                    done += 1
                    if progress:
                        progress(done)
    return SimReport(config, list(rows.values()), time.perf_counter() - t0)


def stderr_progress(total):
    def report(done):
        print(f"\rreplication {done}/{total}", end="" if done < total else "\n",
              file=sys.stderr, flush=True)
    return report

