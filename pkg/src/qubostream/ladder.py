"""Bitrate ladders: the encoded quality levels a session can choose from."""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_LEVELS_KBPS = (300.0, 750.0, 1200.0, 1850.0, 2850.0, 4300.0)


@dataclass(frozen=True)
class BitrateLadder:
    levels_kbps: tuple[float, ...]
    quality: tuple[float, ...]

    def __post_init__(self):
        if len(self.levels_kbps) < 2:
            raise ValueError("ladder needs at least 2 levels")
        if len(self.quality) != len(self.levels_kbps):
            raise ValueError("quality values must match ladder length")
        if any(b <= 0 for b in self.levels_kbps):
            raise ValueError("bitrates must be positive")
        if any(hi <= lo for lo, hi in zip(self.levels_kbps, self.levels_kbps[1:])):
            raise ValueError("bitrates must ascend strictly")
        if any(hi <= lo for lo, hi in zip(self.quality, self.quality[1:])):
            raise ValueError("quality values must increase strictly")

    @property
    def num_levels(self) -> int:
        return len(self.levels_kbps)

    def segment_kilobits(self, level: int, segment_duration: float) -> float:
        return self.levels_kbps[level] * segment_duration


def make_ladder(levels_kbps, quality_map: str = "linear") -> BitrateLadder:
    """Ladder with q(l) derived from the bitrates.

    linear: q = bitrate in Mbps.  log: q = ln(bitrate / lowest bitrate).
    """
    levels = tuple(float(b) for b in levels_kbps)
    if quality_map == "linear":
        quality = tuple(b / 1000.0 for b in levels)
    elif quality_map == "log":
        quality = tuple(math.log(b / levels[0]) for b in levels)
    else:
        raise ValueError(f"unknown quality map {quality_map!r}")
    return BitrateLadder(levels_kbps=levels, quality=quality)


def default_ladder(quality_map: str = "linear") -> BitrateLadder:
    return make_ladder(DEFAULT_LEVELS_KBPS, quality_map)
