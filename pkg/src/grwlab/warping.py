"""Warping function f on an interval, with the derived scalars the

geometry formulas consume: f', f'', f'/f and (log f)''.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import NotPositive, OutOfInterval, UnboundVariable

# unbounded intervals are sampled/scanned on this window unless the caller
# supplies one explicitly
DEFAULT_WINDOW = (-5.0, 5.0)

_POSITIVITY_SAMPLES = 10_000


@dataclass(frozen=True)
class WarpingFunction:
    interval: tuple  # open (a, b); math.inf endpoints allowed
    f: expr.ExpressionAst
    f1: expr.ExpressionAst  # exact symbolic f'
    f2: expr.ExpressionAst  # exact symbolic f''
    source: str = ""

    def contains(self, t: float) -> bool:
        a, b = self.interval
        return a < t < b

    def require(self, t: float) -> None:
        if not self.contains(t):
            raise OutOfInterval(f"t={t!r} outside interval {self.interval}")

    def f_at(self, t: float) -> float:
        return expr.evaluate(self.f, {"t": t})

    def f1_at(self, t: float) -> float:
        return expr.evaluate(self.f1, {"t": t})

    def f2_at(self, t: float) -> float:
        return expr.evaluate(self.f2, {"t": t})

    def f_many(self, t: np.ndarray) -> np.ndarray:
        return expr.eval_many(self.f, {"t": t})

    def f1_many(self, t: np.ndarray) -> np.ndarray:
        return expr.eval_many(self.f1, {"t": t})

    def f2_many(self, t: np.ndarray) -> np.ndarray:
        return expr.eval_many(self.f2, {"t": t})


def sample_window(interval, window=None) -> tuple:
    """Finite window inside the interval; explicit window wins."""
    a, b = interval
    if window is not None:
        lo, hi = max(a, window[0]), min(b, window[1])
    else:
        lo, hi = max(a, DEFAULT_WINDOW[0]), min(b, DEFAULT_WINDOW[1])
    if not lo < hi:
        raise OutOfInterval(f"window {window} does not meet interval {interval}")
    return lo, hi


def make_warping(src: str, interval) -> WarpingFunction:
    """Parse f, attach exact derivatives, and sample-check positivity."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise OutOfInterval(f"empty interval ({a}, {b})")
    f = expr.parse(src)
    extra = expr.variables(f) - {"t"}
    if extra:
        raise UnboundVariable(f"warping may depend on t only, found {sorted(extra)}")
    f1 = expr.differentiate(f, "t")
    f2 = expr.differentiate(f1, "t")
    w = WarpingFunction((a, b), f, f1, f2, source=src)

    lo, hi = sample_window((a, b))
    # midpoints of a uniform partition: stays strictly inside the open interval
    ts = lo + (hi - lo) * (np.arange(_POSITIVITY_SAMPLES) + 0.5) / _POSITIVITY_SAMPLES
    values = w.f_many(ts)
    if not np.all(np.isfinite(values)) or np.min(values) <= 0.0:
        k = int(np.argmin(np.where(np.isfinite(values), values, -np.inf)))
        raise NotPositive(f"f({ts[k]!r}) = {values[k]!r} on a {_POSITIVITY_SAMPLES}-point sample")
    return w


def log_f_second(w: WarpingFunction, t: float) -> float:
    """(log f)''(t) = f''/f - (f'/f)^2 from the symbolic derivatives."""
    w.require(t)
    f = w.f_at(t)
    return w.f2_at(t) / f - (w.f1_at(t) / f) ** 2


def log_f_second_many(w: WarpingFunction, t: np.ndarray) -> np.ndarray:
    f = w.f_many(t)
    return w.f2_many(t) / f - (w.f1_many(t) / f) ** 2


def slice_mean_curvature(w: WarpingFunction, t0: float) -> float:
    """Mean curvature f'(t0)/f(t0) of the level hypersurface at height t0."""
    w.require(t0)
    return w.f1_at(t0) / w.f_at(t0)


_QUANTITIES = ("f'/f", "(f'/f)^2", "(log f)''")


def scan_extrema(w: WarpingFunction, quantity: str, samples: int = 10_001,
                 window=None) -> dict:
    """Sampled sup/inf of a derived scalar over the interval (or window).

    The result is a sample statistic, never a proof; reports must carry the
    sample count.  Unbounded intervals require an explicit window or fall
    back to the default one.
    """
    if quantity not in _QUANTITIES:
        raise ValueError(f"quantity must be one of {_QUANTITIES}")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    a, b = w.interval
    if (math.isinf(a) or math.isinf(b)) and window is None:
        window = DEFAULT_WINDOW
    lo, hi = sample_window(w.interval, window)
    span = hi - lo
    inset = 0.0
    if lo == a or hi == b:  # keep strictly inside an open interval
        inset = span * 1e-9
    ts = np.linspace(lo + inset, hi - inset, samples)
    ratio = w.f1_many(ts) / w.f_many(ts)
    if quantity == "f'/f":
        values = ratio
    elif quantity == "(f'/f)^2":
        values = ratio ** 2
    else:
        values = log_f_second_many(w, ts)
    hi_i = int(np.argmax(values))
    lo_i = int(np.argmin(values))
    return {
        "sup": float(values[hi_i]),
        "inf": float(values[lo_i]),
        "arg_sup": float(ts[hi_i]),
        "arg_inf": float(ts[lo_i]),
        "samples": int(samples),
        "window": (float(ts[0]), float(ts[-1])),
        "note": "sampled, not proven",
    }
