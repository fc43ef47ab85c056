"""Deterministic low-discrepancy sample points inside the chart polydisc."""

from __future__ import annotations

import math
from typing import List

from scipy.stats import qmc

from .core import ComplexPoint
from .errors import DomainError


def sample_points(dim: int, count: int, seed: int = 0,
                  r_min: float = 0.15, r_max: float = 0.9,
                  chart_id: int = 0) -> List[ComplexPoint]:
    """Halton points mapped to per-coordinate annuli ``r_min <= |z_k| <= r_max``.

    The lower radius keeps samples away from coordinate punctures (angular
    gauge fields) and from degenerate loci of potential-derived families.
    ``seed`` fast-forwards the unscrambled sequence, so identical inputs
    give byte-identical points.
    """
    if count < 1:
        raise DomainError("need at least one sample point")
    if not (0 <= r_min < r_max):
        raise DomainError("need 0 <= r_min < r_max")
    eng = qmc.Halton(d=2 * dim, scramble=False)
    eng.fast_forward(20 + 97 * int(seed))
    u = eng.random(count)
    pts = []
    for row in u:
        coords = []
        for k in range(dim):
            rr = math.sqrt(r_min ** 2 + (r_max ** 2 - r_min ** 2) * row[2 * k])
            th = 2.0 * math.pi * row[2 * k + 1]
            coords.append(complex(rr * math.cos(th), rr * math.sin(th)))
        pts.append(ComplexPoint(tuple(coords), chart_id))
    return pts
