"""Integer-lattice functions and the Dobrushin martingale construction.

For a finitely supported potential ``V`` on the integers, the functions

* ``H(x) = sum_{y<x} V(y)``
* ``G(x) = -sum_y |x - y| V(y)``
* ``v = T(G^2) - (TG)^2`` with ``Tf(x) = (f(x+1) + f(x-1)) / 2``
* ``g = T(fG) - f TG`` with ``f(x) = x``

turn the occupation sum ``sum_k V(S_k)`` of a simple random walk into a
martingale plus a bounded remainder.  ``v`` is the conditional variance of
the martingale increments and ``g`` their conditional covariance with the
walk increments.

Every lattice function is stored as a finite window of values plus an
affine tail on each side, so evaluation is total wherever the true function
is known to be affine (``G`` outside the support of ``V``, for instance).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

IDENTITY_TOL = 1e-9


class WindowError(ValueError):
    """Raised when a lattice function is evaluated outside its known window."""


@dataclass(frozen=True)
class LatticeFunction:
    """A real function on a window ``[lo, hi]`` of the integers.

    Outside the window the function continues affinely from its boundary
    values with slopes ``left_slope`` and ``right_slope``; a slope of
    ``None`` means the function is unknown there and evaluation raises
    :class:`WindowError`.
    """

    lo: int
    values: np.ndarray
    left_slope: Optional[float] = 0.0
    right_slope: Optional[float] = 0.0

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("a lattice function needs a nonempty 1-D window")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lo", int(self.lo))

    @classmethod
    def compact(cls, lo: int, values) -> "LatticeFunction":
        """Function equal to ``values`` on ``[lo, lo + len - 1]`` and zero elsewhere."""
        values = np.asarray(values)
        return cls(lo - 1, np.concatenate(([0], values, [0])).astype(values.dtype), 0.0, 0.0)

    @property
    def hi(self) -> int:
        return self.lo + self.values.size - 1

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __call__(self, x):
        x = np.asarray(x)
        scalar = x.ndim == 0
        x = np.atleast_1d(x).astype(np.int64)
        idx = x - self.lo
        out = np.empty(x.shape, dtype=np.result_type(self.values.dtype, float)
                       if (self.left_slope or self.right_slope) else self.values.dtype)
        inside = (idx >= 0) & (idx < self.values.size)
        out[inside] = self.values[idx[inside]]
        left = idx < 0
        right = idx >= self.values.size
        if left.any():
            if self.left_slope is None:
                raise WindowError(f"evaluation left of window [{self.lo}, {self.hi}]")
            out[left] = self.values[0] + self.left_slope * (x[left] - self.lo)
        if right.any():
            if self.right_slope is None:
                raise WindowError(f"evaluation right of window [{self.lo}, {self.hi}]")
            out[right] = self.values[-1] + self.right_slope * (x[right] - self.hi)
        return out[0] if scalar else out

    def on(self, lo: int, hi: int) -> np.ndarray:
        """Values on the integer window ``[lo, hi]``."""
        return self(np.arange(lo, hi + 1))

    def restrict(self, lo: int, hi: int, keep_tails: bool = False) -> "LatticeFunction":
        tails = (self.left_slope, self.right_slope) if keep_tails else (None, None)
        return LatticeFunction(lo, self.on(lo, hi), *tails)

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(v) for x, v in zip(self.xs, self.values)}


@dataclass(frozen=True)
class LatticePotential:
    """A finitely supported, not identically zero potential ``V`` on the integers.

    Leading and trailing zeros are trimmed at construction, so ``lo`` and
    ``hi`` are always points where ``V`` is nonzero.
    """

    lo: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("potential values must be finite")
        nz = np.flatnonzero(values)
        if nz.size == 0:
            raise ValueError("potential must not vanish identically")
        values = values[nz[0]:nz[-1] + 1].copy()
        values.flags.writeable = False
        object.__setattr__(self, "lo", int(self.lo) + int(nz[0]))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dict(cls, points: Mapping[int, float]) -> "LatticePotential":
        if not points:
            raise ValueError("potential must not vanish identically")
        lo, hi = min(points), max(points)
        values = np.zeros(hi - lo + 1)
        for x, v in points.items():
            values[int(x) - lo] = v
        return cls(lo, values)

    @classmethod
    def from_text(cls, text: str) -> "LatticePotential":
        """Parse ``a b`` followed by ``b - a + 1`` whitespace-separated reals."""
        tokens = text.split()
        if len(tokens) < 2:
            raise ValueError("potential text needs support bounds 'a b'")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError as exc:
            raise ValueError(f"support bounds must be integers: {exc}") from None
        if b < a:
            raise ValueError(f"empty support [{a}, {b}]")
        if len(tokens) - 2 != b - a + 1:
            raise ValueError(f"expected {b - a + 1} values for support [{a}, {b}], "
                             f"got {len(tokens) - 2}")
        return cls(a, np.array([float(t) for t in tokens[2:]]))

    def to_text(self) -> str:
        return f"{self.lo} {self.hi}\n" + " ".join(repr(float(v)) for v in self.values) + "\n"

    @property
    def hi(self) -> int:
        return self.lo + self.values.size - 1

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def mu(self) -> float:
        """``sum_x V(x)``."""
        return float(np.sum(self.values))

    @property
    def sum_sq(self) -> float:
        return float(np.sum(self.values ** 2))

    @property
    def zero_sum(self) -> bool:
        return abs(self.mu) <= 1e-12 * float(np.sum(np.abs(self.values)))

    def as_function(self) -> LatticeFunction:
        return LatticeFunction.compact(self.lo, self.values)

    def shifted(self, k: int) -> "LatticePotential":
        return LatticePotential(self.lo + int(k), self.values)

    def scaled(self, lam: float) -> "LatticePotential":
        return LatticePotential(self.lo, lam * self.values)

    def __call__(self, x):
        return self.as_function()(x)


def _require_zero_sum(V: LatticePotential, what: str) -> None:
    if not V.zero_sum:
        raise ValueError(f"{what} requires sum_x V(x) = 0, got {V.mu!r}")


def cumulative_H(V: LatticePotential) -> LatticeFunction:
    """``H(x) = sum_{y<x} V(y)`` on ``[lo, hi+1]``; constant 0 to the left, ``mu_V`` to the right."""
    values = np.concatenate(([0.0], np.cumsum(V.values)))
    return LatticeFunction(V.lo, values, 0.0, 0.0)


def potential_G(V: LatticePotential) -> tuple[LatticeFunction, float]:
    """``G(x) = -sum_y |x-y| V(y)`` on ``[lo-1, hi+1]`` and ``c = sum_y y V(y)``.

    ``G(x) = c - x mu_V`` right of the support and ``x mu_V - c`` left of
    it, which reduces to the constants ``c`` and ``-c`` when ``mu_V = 0``.
    """
    xs = np.arange(V.lo - 1, V.hi + 2)
    G = -np.abs(xs[:, None] - V.xs[None, :]) @ V.values
    c = float(V.xs @ V.values)
    return LatticeFunction(V.lo - 1, G, V.mu, -V.mu), c


def apply_T(f: LatticeFunction, lo: int, hi: int) -> LatticeFunction:
    """Averaging operator ``Tf(x) = (f(x+1) + f(x-1)) / 2`` on ``[lo, hi]``.

    ``f`` must be known on ``[lo-1, hi+1]``, either inside its window or
    through its affine tails.  The result inherits an affine tail on a side
    only when it is known to stay affine there.
    """
    if hi < lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    try:
        ext = f.on(lo - 1, hi + 1)
    except WindowError as exc:
        raise WindowError(f"T needs f on [{lo - 1}, {hi + 1}]: {exc}") from None
    Tf = 0.5 * (ext[2:] + ext[:-2])
    # averaging an affine piece returns the same affine piece
    left = f.left_slope if lo <= f.lo - 1 else None
    right = f.right_slope if hi >= f.hi + 1 else None
    return LatticeFunction(lo, Tf, left, right)


def compensator_v(V: LatticePotential, formula: str = "variance") -> LatticeFunction:
    """Conditional variance ``v`` of the martingale increments ``G(S_k) - TG(S_{k-1})``.

    ``formula="variance"`` evaluates ``T(G^2) - (TG)^2``; ``"expanded"``
    evaluates ``2VG - V^2 + T(G^2) - G^2``.  The window is ``[lo-1, hi+1]``
    and ``v`` equals the constant ``mu_V^2`` outside it (zero when the
    potential sums to zero).
    """
    G, _ = potential_G(V)
    lo, hi = V.lo - 1, V.hi + 1
    G2 = LatticeFunction(lo - 1, G.on(lo - 1, hi + 1) ** 2, None, None)
    TG2 = apply_T(G2, lo, hi).values
    if formula == "variance":
        v = TG2 - apply_T(G, lo, hi).values ** 2
    elif formula == "expanded":
        Vw, Gw = V(np.arange(lo, hi + 1)), G.on(lo, hi)
        v = 2 * Vw * Gw - Vw ** 2 + TG2 - Gw ** 2
    else:
        raise ValueError(f"unknown formula {formula!r}")
    return LatticeFunction(lo, v, 0.0, 0.0)


class MuV(NamedTuple):
    direct: float
    squares: float
    dobrushin: float


def mu_v_all_formulas(V: LatticePotential) -> MuV:
    """``mu_v`` three ways: ``sum_x v(x)``, ``sum_x (V + 2H)^2`` and ``2 c_V^2 - sum_x V^2``."""
    _require_zero_sum(V, "mu_v")
    direct = float(np.sum(compensator_v(V).values))
    H = cumulative_H(V).on(V.lo, V.hi)
    squares = float(np.sum((V.values + 2 * H) ** 2))
    dobrushin = 2 * c_V_squared(V, method="pairs") - V.sum_sq
    return MuV(direct, squares, dobrushin)


def c_V_squared(V: LatticePotential, method: str = "cumulative") -> float:
    """``c_V^2`` as ``2 sum_z H(z)^2`` (``"cumulative"``) or ``-sum_{y,z} |y-z| V(y) V(z)`` (``"pairs"``)."""
    _require_zero_sum(V, "c_V^2")
    if method == "cumulative":
        return 2.0 * float(np.sum(cumulative_H(V).values ** 2))
    if method == "pairs":
        dist = np.abs(V.xs[:, None] - V.xs[None, :])
        return -float(V.values @ dist @ V.values)
    raise ValueError(f"unknown method {method!r}")


def cross_bracket_g(V: LatticePotential) -> LatticeFunction:
    """``g = T(fG) - f TG`` with ``f(x) = x``, on ``[lo-2, hi+2]`` and zero outside."""
    _require_zero_sum(V, "g")
    G, _ = potential_G(V)
    lo, hi = V.lo - 2, V.hi + 2
    xs = np.arange(lo - 1, hi + 2)
    fG = LatticeFunction(lo - 1, xs * G(xs), None, None)
    f = LatticeFunction(lo - 1, xs.astype(float), 1.0, 1.0)
    g = apply_T(fG, lo, hi).values - apply_T(f, lo, hi).values * apply_T(G, lo, hi).values
    return LatticeFunction(lo, g, 0.0, 0.0)


@dataclass(frozen=True)
class DobrushinSystem:
    """All derived functions and constants of a potential.

    ``v`` is always available; ``g``, ``mu_v`` and ``c_V_sq`` only when the
    potential sums to zero (they are ``None`` otherwise).
    """

    V: LatticePotential
    H: LatticeFunction
    G: LatticeFunction
    c: float
    v: LatticeFunction
    mu_V: float
    g: Optional[LatticeFunction] = None
    mu_v: Optional[float] = None
    c_V_sq: Optional[float] = None

    @classmethod
    def build(cls, V: LatticePotential) -> "DobrushinSystem":
        G, c = potential_G(V)
        kw = {}
        if V.zero_sum:
            kw = dict(g=cross_bracket_g(V), mu_v=mu_v_all_formulas(V).squares,
                      c_V_sq=c_V_squared(V))
        return cls(V=V, H=cumulative_H(V), G=G, c=c, v=compensator_v(V), mu_V=V.mu, **kw)

    @property
    def zero_sum(self) -> bool:
        return self.g is not None

    @property
    def max_abs_G(self) -> float:
        """``sup_x |G(x)|``, finite only when ``mu_V = 0``."""
        return float(np.max(np.abs(self.G.values))) if self.zero_sum else float("inf")

    def report(self) -> dict:
        """JSON-ready summary: constants plus every window table."""
        out = {
            "potential": {"lo": self.V.lo, "hi": self.V.hi, "values": self.V.values.tolist()},
            "mu_V": self.mu_V,
            "c": self.c,
            "sum_V_sq": self.V.sum_sq,
            "H": _table(self.H),
            "G": _table(self.G),
            "TG": _table(apply_T(self.G, self.G.lo, self.G.hi)),
            "v": _table(self.v),
        }
        if self.zero_sum:
            mu = mu_v_all_formulas(self.V)
            out.update(mu_v=self.mu_v, mu_v_formulas=mu._asdict(), c_V_sq=self.c_V_sq,
                       c_V_sq_pairs=c_V_squared(self.V, method="pairs"), g=_table(self.g))
        return out


def _table(f: LatticeFunction) -> dict:
    return {"lo": f.lo, "hi": f.hi, "values": [float(x) for x in f.values]}
