"""Builtin test graphs with exact analytic jets.

These are the reference hypersurfaces exercised by the identity harness:
affine graphs and slices, the maximal log-graph over the hyperbolic
half-plane, and the rotationally symmetric maximal graph (the Lorentzian
catenoid) over the punctured Euclidean plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discrete import Grid, GridFunction
from .errors import DataFileError


@dataclass(frozen=True)
class BuiltinGraph:
    name: str
    params: tuple = ()

    def value(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.name == "affine":
            a1, a2, b = self.params
            return a1 * x1 + a2 * x2 + b
        if self.name == "slice":
            return np.full_like(x1, self.params[0])
        if self.name == "h2log":
            return np.log(x1 ** 2 + x2 ** 2) / 3.0
        if self.name == "catenoid":
            return np.arcsinh(np.sqrt(x1 ** 2 + x2 ** 2))
        raise ValueError(f"unknown builtin graph {self.name!r}")

    def jets(self, x1, x2):
        """(u, du1, du2, d11, d12, d22) with exact derivatives."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        zero = np.zeros_like(x1)
        if self.name == "affine":
            a1, a2, b = self.params
            return (a1 * x1 + a2 * x2 + b,
                    np.full_like(x1, a1), np.full_like(x1, a2), zero, zero, zero)
        if self.name == "slice":
            return np.full_like(x1, self.params[0]), zero, zero, zero, zero, zero
        if self.name == "h2log":
            r2 = x1 ** 2 + x2 ** 2
            u = np.log(r2) / 3.0
            du1 = (2.0 / 3.0) * x1 / r2
            du2 = (2.0 / 3.0) * x2 / r2
            d11 = (2.0 / 3.0) * (1.0 / r2 - 2.0 * x1 ** 2 / r2 ** 2)
            d22 = (2.0 / 3.0) * (1.0 / r2 - 2.0 * x2 ** 2 / r2 ** 2)
            d12 = (2.0 / 3.0) * (-2.0 * x1 * x2 / r2 ** 2)
            return u, du1, du2, d11, d12, d22
        if self.name == "catenoid":
            r2 = x1 ** 2 + x2 ** 2
            r = np.sqrt(r2)
            up = 1.0 / np.sqrt(1.0 + r2)             # u'(r)
            upp = -r / (1.0 + r2) ** 1.5             # u''(r)
            u = np.arcsinh(r)
            du1 = up * x1 / r
            du2 = up * x2 / r
            d11 = upp * x1 ** 2 / r2 + up * (1.0 / r - x1 ** 2 / r ** 3)
            d22 = upp * x2 ** 2 / r2 + up * (1.0 / r - x2 ** 2 / r ** 3)
            d12 = upp * x1 * x2 / r2 + up * (-x1 * x2 / r ** 3)
            return u, du1, du2, d11, d12, d22
        raise ValueError(f"unknown builtin graph {self.name!r}")

    def on_grid(self, grid: Grid) -> GridFunction:
        x1, x2 = grid.coords()
        return GridFunction(grid, self.value(x1, x2))


def parse_graph_token(token: str) -> BuiltinGraph:
    """Parse ``builtin:{affine:a1,a2,b | slice:t0 | h2log | catenoid}``."""
    if not token.startswith("builtin:"):
        raise DataFileError(f"not a builtin graph token: {token!r}")
    body = token[len("builtin:"):]
    name, _, args = body.partition(":")
    try:
        if name == "affine":
            a1, a2, b = (float(v) for v in args.split(","))
            return BuiltinGraph("affine", (a1, a2, b))
        if name == "slice":
            return BuiltinGraph("slice", (float(args),))
        if name in ("h2log", "catenoid"):
            if args:
                raise ValueError("takes no parameters")
            return BuiltinGraph(name)
    except ValueError as exc:
        raise DataFileError(f"bad builtin graph token {token!r}: {exc}") from None
    raise DataFileError(f"unknown builtin graph {name!r}")
