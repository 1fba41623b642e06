"""Model catalog and the plain-text model-definition format.

A model is a warping function on an interval plus a fiber chart.  The
builtin catalog covers the classical Robertson-Walker examples the theorem
checkers classify.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from . import fiber as fiber_mod
from . import warping as warping_mod
from .errors import DataFileError

_PI_2 = math.pi / 2.0


@dataclass(frozen=True)
class ModelSpec:
    name: str
    dim: int
    warping_src: str
    interval: tuple
    fiber_token: str
    w: warping_mod.WarpingFunction
    F: fiber_mod.FiberChart

    def default_box(self) -> tuple:
        """Chart box used for sampling when the caller gives none."""
        if self.F.kind == "hyperbolic-halfplane":
            return ((-1.0, 1.0), (0.5, 2.5))
        if self.F.kind == "hyperbolic-ball":
            return tuple((-0.7, 0.7) for _ in range(self.dim))
        return tuple((-1.0, 1.0) for _ in range(self.dim))

    def default_window(self) -> tuple:
        return warping_mod.sample_window(self.interval)


def _resolve_fiber_token(token: str, dim: int) -> str:
    if token == "sphere":
        return "sphere-stereographic"
    if token == "hyperbolic":
        return "hyperbolic-halfplane" if dim == 2 else "hyperbolic-ball"
    return token


def _fiber_file_token(F: fiber_mod.FiberChart) -> str:
    if F.kind == "sphere-stereographic":
        return "sphere"
    if F.kind == "conformal":
        return f"conformal:{F.factor_source}"
    return F.kind


def build_model(name: str, dim: int, warping_src: str, interval, fiber_token: str) -> ModelSpec:
    w = warping_mod.make_warping(warping_src, interval)
    F = fiber_mod.make_fiber(_resolve_fiber_token(fiber_token, dim), dim)
    return ModelSpec(name=name, dim=dim, warping_src=warping_src,
                     interval=(float(interval[0]), float(interval[1])),
                     fiber_token=fiber_token, w=w, F=F)


_CATALOG_DEFS = {
    "minkowski": (2, "1", (-math.inf, math.inf), "euclidean"),
    "desitter": (2, "cosh(t)", (-math.inf, math.inf), "sphere"),
    "ads-region": (2, "cos(t)", (-_PI_2, _PI_2), "hyperbolic"),
    "steady-state": (2, "exp(t)", (-math.inf, math.inf), "euclidean"),
    "einstein-static": (2, "1", (-math.inf, math.inf), "sphere"),
    "product-hyperbolic": (2, "1", (-math.inf, math.inf), "hyperbolic-halfplane"),
}

CATALOG = tuple(_CATALOG_DEFS)


def get_model(name: str) -> ModelSpec:
    try:
        dim, src, interval, fib = _CATALOG_DEFS[name]
    except KeyError:
        raise DataFileError(f"unknown model {name!r}; builtins: {', '.join(CATALOG)}") from None
    return build_model(name, dim, src, interval, fib)


def _fmt_end(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def _parse_end(tok: str) -> float:
    tok = tok.strip()
    if tok == "inf":
        return math.inf
    if tok == "-inf":
        return -math.inf
    try:
        return float(tok)
    except ValueError:
        raise DataFileError(f"bad interval endpoint {tok!r}") from None


def model_to_text(m: ModelSpec) -> str:
    a, b = m.interval
    return "\n".join([
        f"dim={m.dim}",
        f"warping={m.warping_src}",
        f"interval={_fmt_end(a)},{_fmt_end(b)}",
        f"fiber={_fiber_file_token(m.F)}",
    ]) + "\n"


def parse_model_text(text: str, name: str = "custom") -> ModelSpec:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataFileError(f"model file line {lineno}: expected key=value")
        entries[key.strip()] = value.strip()
    missing = {"dim", "warping", "interval", "fiber"} - set(entries)
    if missing:
        raise DataFileError(f"model file missing keys: {', '.join(sorted(missing))}")
    try:
        dim = int(entries["dim"])
    except ValueError:
        raise DataFileError(f"bad dim {entries['dim']!r}") from None
    parts = entries["interval"].split(",")
    if len(parts) != 2:
        raise DataFileError(f"bad interval {entries['interval']!r}")
    interval = (_parse_end(parts[0]), _parse_end(parts[1]))
    return build_model(name, dim, entries["warping"], interval, entries["fiber"])


def resolve_model(ref: str) -> ModelSpec:
    """Catalog name, or a path to a model-definition file."""
    if ref in _CATALOG_DEFS:
        return get_model(ref)
    if os.path.exists(ref):
        with open(ref) as fh:
            return parse_model_text(fh.read(), name=os.path.basename(ref))
    raise DataFileError(f"{ref!r} is neither a builtin model nor a readable file")
