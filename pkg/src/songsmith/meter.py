"""Metrical weights: how strong a beat position is within a measure.

Each supported meter carries a hierarchy of grids, coarsest first.  The
strength of an offset is the weight of the coarsest grid it sits on; the
measure start is always 1.0 and every finer level halves the weight, except
the beat level of 3/4 which enters at 0.25 (triple meter has no half-measure
division).  Offsets finer than the 32nd grid share one floor value.
"""

from __future__ import annotations

from fractions import Fraction

from .score import ScoreError, TimeSignature

OFF_GRID_STRENGTH = 0.015625

# (grid step in quarter beats, weight), coarsest to finest.
_HIERARCHIES = {
    (2, 4): ((Fraction(2), 1.0), (Fraction(1), 0.5), (Fraction(1, 2), 0.25),
             (Fraction(1, 4), 0.125), (Fraction(1, 8), 0.0625)),
    (3, 4): ((Fraction(3), 1.0), (Fraction(1), 0.25), (Fraction(1, 2), 0.125),
             (Fraction(1, 4), 0.0625), (Fraction(1, 8), 0.03125)),
    (4, 4): ((Fraction(4), 1.0), (Fraction(2), 0.5), (Fraction(1), 0.25),
             (Fraction(1, 2), 0.125), (Fraction(1, 4), 0.0625), (Fraction(1, 8), 0.03125)),
    (6, 8): ((Fraction(3), 1.0), (Fraction(3, 2), 0.5), (Fraction(1, 2), 0.25),
             (Fraction(1, 4), 0.125), (Fraction(1, 8), 0.0625)),
}

SUPPORTED_TIME_SIGNATURES = tuple(
    TimeSignature(n, d) for n, d in sorted(_HIERARCHIES)
)


def is_supported(time_sig: TimeSignature) -> bool:
    return (time_sig.numerator, time_sig.denominator) in _HIERARCHIES


def beat_strength(offset_in_measure, time_sig: TimeSignature) -> float:
    """Metrical weight in (0, 1] of an offset (quarter-note units) within a measure."""
    levels = _HIERARCHIES.get((time_sig.numerator, time_sig.denominator))
    if levels is None:
        raise ScoreError(f"unsupported time signature {time_sig} (supported: 2/4 3/4 4/4 6/8)")
    offset = Fraction(offset_in_measure)
    if offset < 0 or offset >= time_sig.measure_beats:
        raise ScoreError(f"offset {offset} outside a {time_sig} measure")
    for step, weight in levels:
        if offset % step == 0:
            return weight
    return OFF_GRID_STRENGTH


def is_offbeat(offset_in_measure, time_sig: TimeSignature | None = None) -> bool:
    """True when the offset is not a whole number of denominator beats.

    Without a time signature the quarter note is assumed as the beat unit.
    """
    beat = time_sig.beat_unit if time_sig is not None else Fraction(1)
    return Fraction(offset_in_measure) % beat != 0
