from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from cantilever.exceptions import ContinuumError
from common.config import QUADRATURE_NODES, QUADRATURE_PANEL
from common.geometry import FloatArray


@dataclass(frozen=True, eq=False)
class GaussLegendreRule:
    """Composite Gauss-Legendre rule on [0, 1].

    Panels never straddle a breakpoint, so piecewise smooth integrands are integrated
    to the accuracy of the smooth pieces.
    """

    nodes: FloatArray
    weights: FloatArray

    @classmethod
    def composite(
        cls,
        breakpoints: Sequence[float] = (),
        nodes_per_panel: int = QUADRATURE_NODES,
        max_panel: float = QUADRATURE_PANEL,
    ) -> GaussLegendreRule:
        """Rule with panels no wider than max_panel and edges at every breakpoint.

        Raises:
            ContinuumError: raised for a breakpoint outside [0, 1] or a bad panel setup.
        """
        if nodes_per_panel < 1 or max_panel <= 0.0:
            raise ContinuumError(f"invalid quadrature: {nodes_per_panel} nodes, panel {max_panel}")
        if any(not 0.0 <= b <= 1.0 for b in breakpoints):
            raise ContinuumError(f"breakpoints must lie in [0, 1], got {list(breakpoints)}")
        edges = sorted({0.0, 1.0, *breakpoints})
        x, w = leggauss(nodes_per_panel)
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= 0.0:
                continue
            panels = max(1, math.ceil((hi - lo) / max_panel - 1e-12))
            cuts = np.linspace(lo, hi, panels + 1)
            for a, b in zip(cuts[:-1], cuts[1:]):
                half = 0.5 * (b - a)
                nodes.append(a + half * (x + 1.0))
                weights.append(half * w)
        return cls(np.concatenate(nodes), np.concatenate(weights))

    def integrate(self, values: FloatArray) -> float | FloatArray:
        """Integral of sampled values; a 2-D input integrates along the last axis."""
        return values @ self.weights
