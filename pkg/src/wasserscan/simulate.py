"""Synthetic panels with a planted distributional change.

Generates rate panels shaped like the real mortality data: one row per
unit, one column per day, every value in [0, 1]. Days up to the planted
index draw from one parametric family, later days from another; choosing
the same family for both sides produces a null panel for level
calibration.
"""

from dataclasses import dataclass

import numpy as np

from .kde import SupportInterval
from .pipeline import AlignedPanel

__all__ = ["BetaFamily", "SyntheticSpec", "generate_panel", "parse_family"]


@dataclass(frozen=True)
class BetaFamily:
    """Beta(a, b) draws, naturally supported on [0, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"beta parameters must be positive, got ({self.a}, {self.b})")

    def draw(self, rng, size):
        return rng.beta(self.a, self.b, size=size)

    def label(self):
        return f"beta:{self.a:g},{self.b:g}"


def parse_family(text):
    """Parse a family spec such as ``beta:2,8``."""
    name, _, params = str(text).partition(":")
    if name.strip().lower() != "beta":
        raise ValueError(f"unknown family {name!r}; only 'beta' is supported")
    parts = params.split(",")
    if len(parts) != 2:
        raise ValueError(f"beta family needs two parameters, got {text!r}")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"could not parse beta parameters from {text!r}") from None
    return BetaFamily(a, b)


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings for one synthetic panel."""

    family_before: BetaFamily
    family_after: BetaFamily
    change_index: int
    days: int = 150
    draws: int = 189
    seed: int = 0

    def __post_init__(self):
        if self.days < 4:
            raise ValueError(f"need at least 4 days, got {self.days}")
        if self.draws < 2:
            raise ValueError(f"need at least 2 draws per day, got {self.draws}")
        # The scan only considers cuts with at least two items on each
        # side, so a plantable index must leave room on both ends.
        if not 2 <= self.change_index <= self.days - 2:
            raise ValueError(
                f"change index {self.change_index} outside the scannable range "
                f"[2, {self.days - 2}]"
            )

    @property
    def is_null(self):
        return self.family_before == self.family_after


def generate_panel(spec, rng=None):
    """Draw a synthetic panel under a two-regime (or null) generator.

    Day d takes draws from ``family_before`` while d <= change_index and
    from ``family_after`` afterwards. Rows are labelled with a synthetic
    continent so panels can flow through the same plumbing as real data.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    rates = np.empty((spec.draws, spec.days))
    for day in range(1, spec.days + 1):
        family = spec.family_before if day <= spec.change_index else spec.family_after
        rates[:, day - 1] = family.draw(rng, spec.draws)
    names = [f"unit_{i + 1:04d}" for i in range(spec.draws)]
    return AlignedPanel(
        countries=names,
        continents=["Synthetic"] * spec.draws,
        rates=rates,
        origin_dates=None,
        support=SupportInterval(0.0, 1.0),
    )
