"""Simulators for the discrete processes and their rescaled statistics."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numba
import numpy as np

from .lattice import DobrushinSystem, LatticeFunction
from .powervar import VolModelSpec
from .streams import SeedLike, as_generator, substreams

_TOL = 1e-9


@dataclass(frozen=True)
class SamplePath:
    """Values of a process on the uniform grid ``t_k = k * delta``."""

    delta: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("a sample path needs at least one value")
        if not self.delta > 0:
            raise ValueError("grid step must be > 0")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.delta * np.arange(self.values.size)

    @property
    def horizon(self) -> float:
        return self.delta * (self.values.size - 1)

    def to_csv(self, extra: Optional[dict[str, np.ndarray]] = None) -> str:
        """CSV text with header ``t,value`` plus any ``extra`` columns."""
        cols = {"value": self.values, **(extra or {})}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *cols])
        for k, t in enumerate(self.times):
            w.writerow([repr(float(t)), *(repr(float(c[k])) for c in cols.values())])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, column: str = "value") -> "SamplePath":
        return read_csv_columns(text, [column])[column]


def read_csv_columns(text: str, columns: Sequence[str]) -> dict[str, SamplePath]:
    """Read the named columns of a ``t,...`` CSV as sample paths on its time grid."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0] != "t":
        raise ValueError("sample path CSV must start with a 't' column")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.shape[0] == 0:
        raise ValueError("sample path CSV has no rows")
    t = data[:, 0]
    delta = t[1] - t[0] if t.size > 1 else 1.0
    if t.size > 1 and not np.allclose(np.diff(t), delta, rtol=1e-6, atol=1e-12):
        raise ValueError("sample path CSV times are not uniformly spaced")
    out = {}
    for name in columns:
        if name not in header:
            raise ValueError(f"column {name!r} not in CSV header {header}")
        out[name] = SamplePath(delta, data[:, header.index(name)])
    return out


# ---------------------------------------------------------------------------
# simple random walk and the Dobrushin martingale


@dataclass(frozen=True)
class WalkPath:
    """Simple random walk positions ``S_0 = 0, S_1, ..., S_n``."""

    positions: np.ndarray

    @property
    def steps(self) -> int:
        return self.positions.size - 1

    def check(self) -> None:
        s = self.positions
        if s[0] != 0:
            raise ValueError("walk must start at 0")
        if not np.all(np.abs(np.diff(s)) == 1):
            raise ValueError("walk increments must be +-1")
        if np.any((s + np.arange(s.size)) % 2):
            raise ValueError("S_k + k must be even")

    def rescaled(self) -> SamplePath:
        """``n^(-1/2) S_{nt}`` on the grid ``t = k/n``."""
        n = self.steps
        return SamplePath(1.0 / n, self.positions / math.sqrt(n))


def _rademacher(rng: np.random.Generator, n: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(rng.bytes((n + 7) // 8), dtype=np.uint8))[:n]
    return (2 * bits - 1).view(np.int8)


def simulate_srw(n: int, seed: SeedLike = None) -> WalkPath:
    """Symmetric simple random walk with ``n`` fair +-1 steps."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pos = np.zeros(n + 1, dtype=np.int32 if n < 2 ** 31 else np.int64)
    pos[1:] = _rademacher(as_generator(seed), n)
    np.cumsum(pos, out=pos)
    return WalkPath(pos)


def occupation_counts(w: WalkPath) -> LatticeFunction:
    """``N_n(x) = #{1 <= k <= n : S_k = x}`` on ``[min S, max S]``."""
    s = w.positions[1:]
    lo = int(s.min())
    return LatticeFunction.compact(lo, np.bincount(s - lo))


@dataclass(frozen=True)
class RescaledStats:
    """Rescaled statistics of a walk on the grid ``t_grid`` in ``[0, 1]``.

    ``v_n`` is the occupation sum, ``m_n`` the martingale built from ``G``,
    ``a_n`` its compensator, ``b_n`` the rescaled walk and ``cross_mb`` the
    predictable bracket of ``m_n`` and ``b_n``.
    """

    t_grid: np.ndarray
    m_n: np.ndarray
    a_n: np.ndarray
    b_n: np.ndarray
    v_n: np.ndarray
    cross_mb: np.ndarray


def _grid_index(n: int, grid_points: int) -> tuple[np.ndarray, np.ndarray]:
    if grid_points < 1:
        raise ValueError("grid_points must be >= 1")
    t = np.arange(grid_points + 1) / grid_points
    return t, np.floor(n * t + _TOL).astype(np.int64)


def rescaled_statistics(w: WalkPath, sys: DobrushinSystem, grid_points: int = 1) -> RescaledStats:
    """Occupation sum, Dobrushin martingale, compensator, walk and cross bracket of ``w``.

    With ``m = floor(n t)``:
    ``V_n(t) = n^(-1/4) sum_{k<=m} V(S_k)``,
    ``M_n(t) = n^(-1/4) {G(S_m) - G(0)} + n^(-1/4) sum_{k<=m} V(S_{k-1})``,
    ``A_n(t) = n^(-1/2) sum_{k<=m} v(S_{k-1})``, ``B_n(t) = n^(-1/2) S_m`` and
    ``<M_n, B_n>_t = n^(-3/4) sum_{k<=m} g(S_{k-1})``.
    """
    if not sys.zero_sum:
        raise ValueError("rescaled statistics need a potential with sum_x V(x) = 0")
    n = w.steps
    s = w.positions
    t, idx = _grid_index(n, grid_points)
    Vs = sys.V(s)
    q = n ** -0.25
    occ = np.concatenate(([0.0], np.cumsum(Vs[1:])))
    lagged = np.concatenate(([0.0], np.cumsum(Vs[:-1])))
    comp = np.concatenate(([0.0], np.cumsum(sys.v(s[:-1]))))
    cross = np.concatenate(([0.0], np.cumsum(sys.g(s[:-1]))))
    G0 = sys.G(0)
    m_n = q * (sys.G(s[idx]) - G0) + q * lagged[idx]
    return RescaledStats(t, m_n, comp[idx] / math.sqrt(n), s[idx] / math.sqrt(n),
                         q * occ[idx], n ** -0.75 * cross[idx])


# ---------------------------------------------------------------------------
# comb process


@dataclass(frozen=True)
class CombPath:
    """Comb walk ``(C_1, C_2)`` and the axis count ``A_1(k) = #{1 <= j <= k : C_2(j) = 0}``."""

    c1: np.ndarray
    c2: np.ndarray
    a1: np.ndarray

    @property
    def steps(self) -> int:
        return self.c1.size - 1


class CombMoments(NamedTuple):
    """Step counts behind the conditional-moment identities of the comb.

    Moments are split by whether ``C_2(k) = 0`` before the step.
    """

    on_axis: int
    on_axis_dc1_sq: int
    on_axis_dc2_sq: int
    off_axis: int
    off_axis_dc2_sq: int
    off_axis_dc1_sq: int
    cross_sum: int

    def merged(self, other: "CombMoments") -> "CombMoments":
        return CombMoments(*(a + b for a, b in zip(self, other)))


@numba.njit(cache=True, nogil=True)
def _comb_kernel(packed, n, store):
    # two random bits per step: on the axis they pick one of the four moves
    # (+-1, 0), (0, +-1); off the axis the low bit is the sign of psi
    size = n + 1 if store else 1
    c1 = np.zeros(size, np.int64)
    c2 = np.zeros(size, np.int64)
    a1 = np.zeros(size, np.int64)
    x = 0
    y = 0
    a = 0
    on = 0
    on_dx = 0
    on_dy = 0
    off = 0
    off_dy = 0
    for k in range(n):
        r = (packed[k >> 2] >> (2 * (k & 3))) & 3
        if y == 0:
            on += 1
            if r == 0:
                x += 1
                on_dx += 1
            elif r == 1:
                x -= 1
                on_dx += 1
            elif r == 2:
                y += 1
                on_dy += 1
            else:
                y -= 1
                on_dy += 1
        else:
            off += 1
            off_dy += 1
            if r & 1:
                y -= 1
            else:
                y += 1
        if y == 0:
            a += 1
        if store:
            c1[k + 1] = x
            c2[k + 1] = y
            a1[k + 1] = a
    if not store:
        c1[0] = x
        c2[0] = y
        a1[0] = a
    return c1, c2, a1, np.array([on, on_dx, on_dy, off, off_dy, 0, 0], np.int64)


def _comb_bits(n: int, seed: SeedLike) -> np.ndarray:
    return np.frombuffer(as_generator(seed).bytes((n + 3) // 4), dtype=np.uint8)


def simulate_comb(n: int, seed: SeedLike = None) -> CombPath:
    """Run the comb recursion for ``n`` steps from ``(0, 0)``.

    ``C_1`` moves by ``xi`` and ``C_2`` by ``zeta`` while ``C_2 = 0``, with
    ``(xi, zeta)`` uniform on ``{(+-1, 0), (0, +-1)}``; off the axis only
    ``C_2`` moves, by a fair ``psi = +-1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    c1, c2, a1, _ = _comb_kernel(_comb_bits(n, seed), n, True)
    return CombPath(c1, c2, a1)


def comb_endpoint(n: int, seed: SeedLike = None) -> tuple[int, int, int, CombMoments]:
    """``(C_1(n), C_2(n), A_1(n))`` and step moments, same stream as :func:`simulate_comb`."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c1, c2, a1, counts = _comb_kernel(_comb_bits(n, seed), n, False)
    return int(c1[0]), int(c2[0]), int(a1[0]), CombMoments(*(int(c) for c in counts))


def comb_step_moments(c: CombPath) -> CombMoments:
    """Tally squared and cross increments of a comb path by axis status before each step."""
    d1, d2 = np.diff(c.c1), np.diff(c.c2)
    on = c.c2[:-1] == 0
    return CombMoments(
        int(on.sum()), int((d1[on] ** 2).sum()), int((d2[on] ** 2).sum()),
        int((~on).sum()), int((d2[~on] ** 2).sum()), int((d1[~on] ** 2).sum()),
        int((d1 * d2).sum()),
    )


class CombRescaled(NamedTuple):
    t_grid: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    comp1: np.ndarray
    comp2: np.ndarray


def comb_rescaled(c: CombPath, grid_points: int = 1) -> CombRescaled:
    """``(n^(-1/4) C_1, n^(-1/2) C_2)`` at ``floor(nt)`` with compensators
    ``n^(-1/2) A_1 / 2`` and ``floor(nt)/n - A_1 / (2n)``."""
    n = c.steps
    t, idx = _grid_index(n, grid_points)
    a1 = c.a1[idx].astype(float)
    return CombRescaled(t, c.c1[idx] * n ** -0.25, c.c2[idx] / math.sqrt(n),
                        a1 / (2 * math.sqrt(n)), idx / n - a1 / (2 * n))


# ---------------------------------------------------------------------------
# discrete stochastic integral and volatility model


class StochIntegral(NamedTuple):
    m_n: SamplePath
    v_n: SamplePath
    b_n: SamplePath


def simulate_discrete_stoch_integral(sigma_path: SamplePath, xi_dist: str, n: int,
                                     seed: SeedLike = None) -> StochIntegral:
    """``M_n(t) = n^(-1/2) sum_{j<=nt} sigma((j-1)/n) xi_j`` with ``V_n`` and ``B_n``.

    ``sigma_path`` must be sampled at a step dividing ``1/n``; the output
    lives on the grid ``j/n`` up to ``floor(n * horizon)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    r = 1.0 / (n * sigma_path.delta)
    stride = int(round(r))
    if stride < 1 or abs(r - stride) > _TOL * max(1.0, r):
        raise ValueError(f"sigma path step {sigma_path.delta} does not divide 1/n = {1 / n}")
    k = (sigma_path.values.size - 1) // stride
    if k < 1:
        raise ValueError("sigma path is shorter than one step 1/n")
    rng = as_generator(seed)
    if xi_dist == "rademacher":
        xi = _rademacher(rng, k).astype(float)
    elif xi_dist == "gaussian":
        xi = rng.standard_normal(k)
    else:
        raise ValueError(f"xi_dist must be 'rademacher' or 'gaussian', got {xi_dist!r}")
    sig = sigma_path.values[:k * stride:stride]
    m = np.concatenate(([0.0], np.cumsum(sig * xi))) / math.sqrt(n)
    v = np.concatenate(([0.0], np.cumsum(sig ** 2))) / n
    b = np.concatenate(([0.0], np.cumsum(xi))) / math.sqrt(n)
    return StochIntegral(SamplePath(1 / n, m), SamplePath(1 / n, v), SamplePath(1 / n, b))


class VolPath(NamedTuple):
    m: SamplePath
    a_increments: np.ndarray
    r: SamplePath

    @property
    def a(self) -> SamplePath:
        return SamplePath(self.m.delta, np.concatenate(([0.0], np.cumsum(self.a_increments))))


def simulate_vol_model(spec: VolModelSpec, n: int, seed: SeedLike = None) -> VolPath:
    """Observe ``M = B o A`` and ``R = M + mu t + beta A`` at step ``1/n``.

    ``sigma`` comes from its own stream on the refined grid of step
    ``1/(n * refine)``; ``A`` increments are left-endpoint sums of
    ``sigma^2`` over each observation step, and ``dM_j = sqrt(dA_j) Z_j``
    with ``Z`` standard normal from an independent stream.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m_steps = spec.steps(n)
    sig_rng, z_rng = substreams(seed, 2)
    h = 1.0 / (n * spec.refine)
    sigma = spec.sigma_on_grid(h * np.arange(m_steps * spec.refine), sig_rng)
    a_inc = h * (sigma ** 2).reshape(m_steps, spec.refine).sum(axis=1)
    dM = np.sqrt(a_inc) * z_rng.standard_normal(m_steps)
    M = np.concatenate(([0.0], np.cumsum(dM)))
    A = np.concatenate(([0.0], np.cumsum(a_inc)))
    R = M + spec.mu_drift * np.arange(m_steps + 1) / n + spec.beta * A
    return VolPath(SamplePath(1 / n, M), a_inc, SamplePath(1 / n, R))


# ---------------------------------------------------------------------------
# path diagnostics


def max_jump(p: SamplePath, t: float) -> float:
    """Largest grid increment ``|X(t_k) - X(t_{k-1})|`` with ``t_k <= t``."""
    if t < 0 or t > p.horizon + _TOL * max(1.0, p.horizon):
        raise ValueError(f"t = {t} outside [0, {p.horizon}]")
    k = int(math.floor(t / p.delta + _TOL))
    if k == 0:
        return 0.0
    return float(np.max(np.abs(np.diff(p.values[:k + 1]))))


def dds_time_change(m: SamplePath, a: SamplePath) -> SamplePath:
    """``W(s) = m(tau(s))`` with ``tau(s)`` the first grid time where ``a > s``.

    The ``s`` grid has ``len(a) - 1`` steps covering ``[0, a(horizon)]``;
    values are read at grid points without interpolation.  Times where no
    grid point exceeds ``s`` map to the last grid point.
    """
    av = a.values
    if av.size != m.values.size or abs(a.delta - m.delta) > _TOL * m.delta:
        raise ValueError("m and a must share the same grid")
    if np.any(np.diff(av) < 0):
        raise ValueError("clock a must be nondecreasing")
    if not av[-1] > 0:
        raise ValueError("clock a must end above 0")
    k = av.size - 1
    ds = av[-1] / k
    s = ds * np.arange(k + 1)
    tau = np.minimum(np.searchsorted(av, s, side="right"), k)
    return SamplePath(ds, m.values[tau])
