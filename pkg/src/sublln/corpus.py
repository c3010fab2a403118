"""Reference families and shape-function catalogs for tests, configs and scripts.

Every family keeps at most 3 members with at most 3 atoms each so that the
exhaustive small-n oracles stay tractable, while still covering the
degenerate (point mass), classical (single fair coin), and genuinely
ambiguous regimes.
"""

from __future__ import annotations

from .ambiguity import AmbiguityFamily, mean_bounds
from .lln_rates import (
    LipschitzFunction,
    abs_dev,
    clip_to,
    interval_distance_phi,
    linear,
    neg_abs_dev,
)

__all__ = ["corpus_families", "catalog_for", "one_lipschitz_catalog_for"]


def corpus_families() -> dict[str, AmbiguityFamily]:
    """The reference families, in a fixed order."""
    return {
        "point_mass": AmbiguityFamily.build(
            0.0, 0.5, [[(0.5, 1.0)]], name="point_mass"
        ),
        "fair_coin": AmbiguityFamily.build(
            0.0, 1.0, [[(-1.0, 0.5), (1.0, 0.5)]], name="fair_coin"
        ),
        "two_point_masses": AmbiguityFamily.build(
            0.0, 1.0, [[(-1.0, 1.0)], [(1.0, 1.0)]], name="two_point_masses"
        ),
        "delta_pair": AmbiguityFamily.build(
            0.0, 1.0, [[(0.0, 1.0)], [(1.0, 1.0)]], name="delta_pair"
        ),
        "bernoulli_pair": AmbiguityFamily.build(
            0.0,
            1.0,
            [[(0.0, 0.5), (2.0, 0.5)], [(0.0, 0.25), (2.0, 0.75)]],
            name="bernoulli_pair",
        ),
        "three_atom": AmbiguityFamily.build(
            0.0,
            0.5,
            [
                [(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)],
                [(-0.5, 0.5), (0.5, 0.3), (1.0, 0.2)],
                [(-1.0, 0.6), (0.5, 0.4)],
            ],
            name="three_atom",
        ),
        "skewed_pair": AmbiguityFamily.build(
            0.0,
            0.5,
            [
                [(0.0, 0.1), (0.5, 0.4), (1.5, 0.5)],
                [(0.0, 0.5), (0.5, 0.2), (1.5, 0.3)],
            ],
            name="skewed_pair",
        ),
    }


def catalog_for(family: AmbiguityFamily) -> tuple[LipschitzFunction, ...]:
    """Shape functions exercised against a family in sweeps.

    Kinks are placed at the mean-interval midpoint or endpoints so the
    certified grid search hits them exactly.
    """
    lo, hi = mean_bounds(family)
    mid = 0.5 * (lo + hi)
    return (
        linear(1.0, 0.0),
        linear(-0.5, 0.25),
        abs_dev(mid),
        neg_abs_dev(mid),
        clip_to(lo, hi),
        interval_distance_phi(family),
    )


def one_lipschitz_catalog_for(family: AmbiguityFamily) -> tuple[LipschitzFunction, ...]:
    """The catalog entries with Lipschitz constant at most one."""
    return tuple(phi for phi in catalog_for(family) if phi.lipschitz_constant <= 1.0)
