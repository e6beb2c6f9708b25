"""Realized power variation and the realized-volatility numerical schemes.

The model is a continuous martingale ``M = B o A`` with business time
``A(t) = int_0^t sigma(s)^2 ds`` independent of ``B``, observed on a
uniform grid of step ``1/n`` and possibly perturbed by a drift
``N(t) = mu t + beta A(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy.signal import lfilter

from .streams import SeedLike, as_generator

if TYPE_CHECKING:
    from .paths import SamplePath

FAMILIES = ("constant", "deterministic_grid", "log_ou")
_ALIGN_TOL = 1e-9


def gaussian_abs_moment(p: float) -> float:
    """``E|Z|^p`` for a standard normal ``Z``."""
    p = float(p)
    if not math.isfinite(p) or p < 0:
        raise ValueError(f"moment order must be finite and >= 0, got {p}")
    return math.exp(0.5 * p * math.log(2.0) + math.lgamma(0.5 * (p + 1)) - math.lgamma(0.5)) \
        if p > 170 else 2.0 ** (0.5 * p) * math.gamma(0.5 * (p + 1)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class VolModelSpec:
    """Volatility model for ``R = M + mu t + beta A``.

    ``family`` selects how ``sigma`` is generated on the refined grid of
    step ``1 / (n * refine)``:

    * ``constant``: ``sigma = sigma0``;
    * ``deterministic_grid``: ``sigma_fn(s)`` if given, otherwise linear
      interpolation of ``sigma_grid`` placed at equally spaced knots on
      ``[0, horizon]``;
    * ``log_ou``: ``log sigma = log sigma0 + X`` with ``X`` an
      Ornstein-Uhlenbeck process (rate ``kappa``, volatility ``nu``,
      ``X(0) = 0``) sampled exactly on the refined grid.
    """

    family: str = "constant"
    sigma0: float = 1.0
    kappa: float = 0.0
    nu: float = 0.0
    mu_drift: float = 0.0
    beta: float = 0.0
    refine: int = 1
    horizon: float = 1.0
    sigma_grid: Optional[Sequence[float]] = None
    sigma_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        for name in ("sigma0", "kappa", "nu", "mu_drift", "beta", "horizon"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be > 0")
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        if int(self.refine) != self.refine or self.refine < 1:
            raise ValueError("refine must be an integer >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.family == "log_ou" and (self.kappa < 0 or self.nu < 0):
            raise ValueError("log_ou requires kappa >= 0 and nu >= 0")
        if self.family == "deterministic_grid":
            if self.sigma_fn is None and self.sigma_grid is None:
                raise ValueError("deterministic_grid needs sigma_grid or sigma_fn")
            if self.sigma_grid is not None:
                grid = np.asarray(self.sigma_grid, dtype=float)
                if grid.ndim != 1 or grid.size < 2 or not np.all(np.isfinite(grid)) or np.any(grid < 0):
                    raise ValueError("sigma_grid needs >= 2 finite nonnegative knots")
                object.__setattr__(self, "sigma_grid", tuple(grid.tolist()))

    def steps(self, n: int) -> int:
        m = n * self.horizon
        if abs(m - round(m)) > _ALIGN_TOL * max(1.0, m):
            raise ValueError(f"n * horizon = {m} is not an integer")
        return int(round(m))

    def sigma_on_grid(self, times: np.ndarray, seed: SeedLike = None) -> np.ndarray:
        """``sigma`` at the given equally spaced ``times`` (starting at 0)."""
        times = np.asarray(times, dtype=float)
        if self.family == "constant":
            return np.full(times.shape, self.sigma0)
        if self.family == "deterministic_grid":
            if self.sigma_fn is not None:
                return np.asarray(self.sigma_fn(times), dtype=float) * np.ones_like(times)
            knots = np.linspace(0.0, self.horizon, len(self.sigma_grid))
            return np.interp(times, knots, self.sigma_grid)
        h = times[1] - times[0] if times.size > 1 else 0.0
        rng = as_generator(seed)
        eps = rng.standard_normal(times.size - 1)
        if self.kappa > 0:
            phi = math.exp(-self.kappa * h)
            sd = self.nu * math.sqrt(-math.expm1(-2 * self.kappa * h) / (2 * self.kappa))
        else:
            phi, sd = 1.0, self.nu * math.sqrt(h)
        x = np.empty(times.size)
        x[0] = 0.0
        x[1:] = lfilter([sd], [1.0, -phi], eps)
        return self.sigma0 * np.exp(x)

    def integrated_sigma_power(self, p: float, n: int, t: Optional[float] = None) -> float:
        """``int_0^t sigma^p`` for non-random families, by the left Riemann sum used for ``A``."""
        if self.family == "log_ou":
            raise ValueError("integrated power of a random sigma is not deterministic")
        t = self.horizon if t is None else t
        h = 1.0 / (n * self.refine)
        k = int(round(t / h))
        return float(h * np.sum(self.sigma_on_grid(h * np.arange(k)) ** p))


def _grid_stride(coarse: float, fine: float) -> int:
    r = coarse / fine
    k = int(round(r))
    if k < 1 or abs(r - k) > _ALIGN_TOL * max(1.0, r):
        raise ValueError(f"step {coarse} is not an integer multiple of the grid step {fine}")
    return k


def _block_sums(x: np.ndarray, stride: int) -> np.ndarray:
    k = x.size // stride
    return x[:k * stride].reshape(k, stride).sum(axis=1)


def realized_power_variation(m: "SamplePath", p: float, delta: float) -> "SamplePath":
    """``V_{p,delta}(k delta) = delta^(1-p/2) sum_{j<=k} |M(j delta) - M((j-1) delta)|^p``."""
    from .paths import SamplePath

    if p < 2:
        raise ValueError("power variation needs p >= 2")
    stride = _grid_stride(delta, m.delta)
    sub = np.asarray(m.values)[::stride]
    terms = np.abs(np.diff(sub)) ** p
    return SamplePath(delta, np.concatenate(([0.0], delta ** (1 - p / 2) * np.cumsum(terms))))


def compensator_power_variation(a_increments, p: float, delta: float, step: float) -> "SamplePath":
    """``U_{p,delta}(k delta) = delta^(1-p/2) sum_{j<=k} {A(j delta) - A((j-1) delta)}^(p/2)``.

    ``a_increments[i]`` is ``A((i+1) step) - A(i step)``.
    """
    from .paths import SamplePath

    if p < 2:
        raise ValueError("power variation needs p >= 2")
    a = np.asarray(a_increments, dtype=float)
    if np.any(a < 0):
        raise ValueError("compensator increments must be nonnegative")
    blocks = _block_sums(a, _grid_stride(delta, step))
    return SamplePath(delta, np.concatenate(([0.0], delta ** (1 - p / 2) * np.cumsum(blocks ** (p / 2)))))


@dataclass(frozen=True)
class SchemeSeries:
    """Scheme statistics on the observation grid ``t_j = j / n``.

    ``x_n`` is the centred power sum, ``bracket`` its realized compensator,
    ``v_n`` the realized ``p``-th power variation and ``y_n`` the centred
    sum computed from drift-perturbed returns (only when a drift is given).
    """

    t_grid: np.ndarray
    x_n: np.ndarray
    bracket: np.ndarray
    v_n: np.ndarray
    y_n: Optional[np.ndarray] = None

    def at_end(self) -> dict:
        out = {"x_n": float(self.x_n[-1]), "bracket": float(self.bracket[-1]), "v_n": float(self.v_n[-1])}
        if self.y_n is not None:
            out["y_n"] = float(self.y_n[-1])
        return out


def _cum0(x: np.ndarray) -> np.ndarray:
    return np.concatenate(([0.0], np.cumsum(x)))


def scheme_series(m: "SamplePath", a_increments, n: int, p: float = 4,
                  drift: Optional[tuple[float, float]] = None) -> SchemeSeries:
    """Centred power sums of the increments of ``m`` against the compensator increments.

    With ``dM_j = M(j/n) - M((j-1)/n)`` and ``dA_j`` the matching increment of
    ``A``, for ``p >= 2``:

    * ``x_n(t) = n^((p-2)/4) sum_{j<=nt} [|dM_j|^(p/2) - mu_{p/2} dA_j^(p/4)]``
    * ``bracket(t) = (mu_p - mu_{p/2}^2) n^(p/2-1) sum_{j<=nt} dA_j^(p/2)``
    * ``v_n(t) = n^(p/2-1) sum_{j<=nt} |dM_j|^p``

    ``p = 4`` is the realized-variance scheme ``n^(1/2) sum (dM^2 - dA)``
    with bracket ``2 n sum dA^2``.  For that case a ``drift=(mu, beta)``
    adds ``y_n``, the same centred sum computed from ``R = M + mu t + beta A``.
    The bracket is the realized one; its difference from the predictable
    compensator is a martingale that vanishes as ``n`` grows.
    """
    if p < 2:
        raise ValueError("scheme needs p >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    if abs(m.delta * n - 1) > _ALIGN_TOL:
        raise ValueError(f"path step {m.delta} does not match 1/n = {1 / n}")
    dM = np.diff(np.asarray(m.values, dtype=float))
    k = dM.size
    dA = np.asarray(a_increments, dtype=float)
    if dA.size < k:
        raise ValueError(f"need {k} compensator increments, got {dA.size}")
    dA = dA[:k]
    if np.any(dA < 0):
        raise ValueError("compensator increments must be nonnegative")
    half = gaussian_abs_moment(p / 2)
    x = n ** ((p - 2) / 4) * _cum0(np.abs(dM) ** (p / 2) - half * dA ** (p / 4))
    bracket = (gaussian_abs_moment(p) - half ** 2) * n ** (p / 2 - 1) * _cum0(dA ** (p / 2))
    v = n ** (p / 2 - 1) * _cum0(np.abs(dM) ** p)
    y = None
    if drift is not None:
        if p != 4:
            raise ValueError("drift-perturbed series is defined for the p = 4 scheme only")
        mu, beta = drift
        dR = dM + mu / n + beta * dA
        y = np.sqrt(n) * _cum0(dR ** 2 - dA)
    return SchemeSeries(np.arange(k + 1) / n, x, bracket, v, y)


def drift_perturbation_check(a_increments, n: int, mu: float, beta: float) -> tuple[float, float]:
    """``(n^(1/2) sum dN^2, n sum dN^2 dA)`` for ``N = mu t + beta A``; both must vanish as ``n`` grows."""
    dA = np.asarray(a_increments, dtype=float)
    dN2 = (mu / n + beta * dA) ** 2
    return float(np.sqrt(n) * np.sum(dN2)), float(n * np.sum(dN2 * dA))
