"""Exact samplers for the limit laws and their moments.

* ``l_t(0) =law= sqrt(t) |Z|``: Brownian local time at 0 (Mittag-Leffler
  law of index 1/2);
* ``W(c l_t(0)) =law= sqrt(c l_t(0)) Z'`` with ``Z'`` independent of the
  local time: the mixture of a Brownian motion with its clock;
* ``tau_t =law= t^2 / Z^2``: inverse local time, the positive 1/2-stable
  law with Laplace transform ``exp(-t sqrt(2 lambda))``.

The density of ``tau_t`` is ``t / sqrt(2 pi) * y^(-3/2) exp(-t^2 / (2y))``.
The sampler is validated against the Laplace transform, which carries no
normalization ambiguity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .powervar import gaussian_abs_moment
from .streams import SeedLike, as_generator, substreams


@dataclass(frozen=True)
class MixtureLawSpec:
    """Law of ``W(scale_c * l_t(0))`` at ``t = horizon_t``."""

    scale_c: float = 1.0
    horizon_t: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.scale_c) and self.scale_c >= 0):
            raise ValueError("scale_c must be finite and >= 0")
        if not (math.isfinite(self.horizon_t) and self.horizon_t > 0):
            raise ValueError("horizon_t must be finite and > 0")


def _check_t(t: float) -> None:
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"t must be finite and > 0, got {t}")


def sample_local_time(t: float, seed: SeedLike = None, size: Optional[int] = None):
    """Draws of ``l_t(0)``, i.e. ``sqrt(t) |Z|``."""
    _check_t(t)
    return math.sqrt(t) * np.abs(as_generator(seed).standard_normal(size))


def sample_mixture(spec: MixtureLawSpec, seed: SeedLike = None, size: Optional[int] = None):
    """Draws of ``sqrt(c L) Z'`` with ``L`` the local time and ``Z'`` from a separate stream."""
    clock_rng, w_rng = substreams(seed, 2)
    L = sample_local_time(spec.horizon_t, clock_rng, size)
    return np.sqrt(spec.scale_c * L) * w_rng.standard_normal(size)


def sample_inverse_local_time(t: float, seed: SeedLike = None, size: Optional[int] = None):
    """Draws of ``tau_t = t^2 / Z^2``; exact zeros of ``Z`` are redrawn."""
    _check_t(t)
    rng = as_generator(seed)
    z = np.atleast_1d(rng.standard_normal(size))
    bad = z == 0
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = z == 0
    out = t * t / (z * z)
    return out[0] if size is None else out


def mixture_moments(spec: MixtureLawSpec, k: int) -> float:
    """``E[W(c l_t(0))^k]``: ``mu_k c^(k/2) t^(k/4) mu_{k/2}`` for even ``k``, 0 for odd ``k``."""
    if int(k) != k or k < 1:
        raise ValueError(f"moment order must be a positive integer, got {k}")
    k = int(k)
    if k % 2:
        return 0.0
    m = k // 2
    local_moment = spec.horizon_t ** (m / 2) * gaussian_abs_moment(m)
    return gaussian_abs_moment(k) * spec.scale_c ** m * local_moment
