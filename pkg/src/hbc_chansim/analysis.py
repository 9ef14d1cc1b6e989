"""Statistics over gain curves: DAQ-mode gaps, correlations, peaks, energy per bit.

All averages are taken in the dB domain over the frequency grid, and each
distance carries equal weight in the grand mean.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .errors import EmptyInput, GridMismatch, InvalidParams, MissingDistance, NonPositiveInput, ZeroVariance
from .validation import check_daq_mode, check_positive, check_strictly_increasing

DEFAULT_TX_POWER_W = 2.71e-3
DEFAULT_DATA_RATE_BPS = 1e6


@dataclass(frozen=True)
class GainCurve:
    daq_mode: str
    distance_cm: float
    freqs: tuple
    gains: tuple

    def __post_init__(self):
        object.__setattr__(self, "daq_mode", check_daq_mode(self.daq_mode))
        object.__setattr__(self, "distance_cm", check_positive(self.distance_cm, "distance_cm"))
        freqs = check_strictly_increasing(self.freqs)
        gains = np.asarray(self.gains, dtype=float)
        if freqs.size < 2:
            raise InvalidParams("a gain curve needs at least 2 points")
        if gains.shape != freqs.shape:
            raise InvalidParams("freqs and gains must have the same length")
        if not np.all(np.isfinite(gains)):
            raise InvalidParams("gain values must be finite")
        object.__setattr__(self, "freqs", tuple(float(f) for f in freqs))
        object.__setattr__(self, "gains", tuple(float(g) for g in gains))

    @property
    def label(self) -> str:
        return f"{self.daq_mode}_{self.distance_cm:g}cm"

    def points(self):
        return list(zip(self.freqs, self.gains))


def _check_same_grid(a: GainCurve, b: GainCurve):
    for i, (fa, fb) in enumerate(zip(a.freqs, b.freqs)):
        if fa != fb:
            raise GridMismatch(
                f"frequency grids differ at point {i}: {fa!r} Hz ({a.label}) vs {fb!r} Hz ({b.label})"
            )
    if len(a.freqs) != len(b.freqs):
        longer = a if len(a.freqs) > len(b.freqs) else b
        extra = longer.freqs[min(len(a.freqs), len(b.freqs))]
        raise GridMismatch(f"frequency grids differ in length; first unmatched frequency {extra!r} Hz ({longer.label})")


def mean_gap_db(classical: GainCurve, wireless: GainCurve) -> float:
    """Mean over the grid of classical minus wireless gain."""
    _check_same_grid(classical, wireless)
    if classical.distance_cm != wireless.distance_cm:
        raise GridMismatch(f"distances differ: {classical.distance_cm:g} cm vs {wireless.distance_cm:g} cm")
    diff = np.asarray(classical.gains) - np.asarray(wireless.gains)
    return float(np.mean(diff))


def grand_mean_gap(gaps) -> float:
    gaps = [float(g) for g in gaps]
    if not gaps:
        raise EmptyInput("no gaps to average")
    return math.fsum(gaps) / len(gaps)


def pearson(a: GainCurve, b: GainCurve) -> float:
    _check_same_grid(a, b)
    x = np.asarray(a.gains)
    y = np.asarray(b.gains)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance(f"constant curve in correlation of {a.label} and {b.label}")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def peak(curve: GainCurve):
    """``(freq_hz, gain_db)`` of the maximum; ties go to the lowest frequency."""
    i = int(np.argmax(curve.gains))
    return curve.freqs[i], curve.gains[i]


def fluctuation_db(curve: GainCurve) -> float:
    return max(curve.gains) - min(curve.gains)


def energy_per_bit(tx_power_w: float, data_rate_bps: float) -> float:
    """Joules per bit. The quotient is formed in decimal so 2.71 mW / 1 Mbps gives 2.71e-9 exactly."""
    p = check_positive(tx_power_w, "tx_power_w", NonPositiveInput)
    r = check_positive(data_rate_bps, "data_rate_bps", NonPositiveInput)
    return float(Decimal(repr(p)) / Decimal(repr(r)))


@dataclass
class ComparisonReport:
    distances_cm: list
    mean_gap_db: dict
    grand_mean_gap_db: float
    correlations: dict
    peaks: dict
    fluctuation_db: dict
    energy_per_bit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "distances_cm": self.distances_cm,
            "mean_gap_db": self.mean_gap_db,
            "grand_mean_gap_db": self.grand_mean_gap_db,
            "correlations": self.correlations,
            "peaks": self.peaks,
            "fluctuation_db": self.fluctuation_db,
            "energy_per_bit": self.energy_per_bit,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def curves_from_records(records, mode=None) -> dict:
    """Group point records (anything with daq_mode, distance_cm, freq_hz, gain_db) into curves.

    Returns ``{(mode, distance_cm): GainCurve}`` keeping first-seen order. Points
    within a curve are sorted by frequency; duplicate frequencies are an error.
    """
    mode = check_daq_mode(mode) if mode is not None else None
    grouped = {}
    for r in records:
        m = check_daq_mode(r.daq_mode)
        if mode is not None and m != mode:
            continue
        grouped.setdefault((m, float(r.distance_cm)), []).append((float(r.freq_hz), float(r.gain_db)))
    curves = {}
    for key, pts in grouped.items():
        pts.sort()
        freqs = [f for f, _ in pts]
        if len(set(freqs)) != len(freqs):
            raise InvalidParams(f"duplicate frequencies in {key[0]} {key[1]:g} cm curve")
        curves[key] = GainCurve(key[0], key[1], tuple(freqs), tuple(g for _, g in pts))
    return curves


def _dkey(d: float) -> str:
    return f"{d:g}"


def _safe_pearson(a, b):
    try:
        return pearson(a, b)
    except ZeroVariance:
        return None


def compare_campaigns(
    classical_records,
    wireless_records,
    tx_power_w: float = DEFAULT_TX_POWER_W,
    data_rate_bps: float = DEFAULT_DATA_RATE_BPS,
) -> ComparisonReport:
    """Assemble the full classical-vs-wireless comparison.

    Each side may hold rows of both modes (e.g. a whole sweep CSV); only rows of
    the matching mode are used.
    """
    classical = {d: c for (_, d), c in curves_from_records(classical_records, "classical").items()}
    wireless = {d: c for (_, d), c in curves_from_records(wireless_records, "wireless").items()}
    if not classical:
        raise MissingDistance("no classical curves in input")
    if not wireless:
        raise MissingDistance("no wireless curves in input")
    missing_w = sorted(set(classical) - set(wireless))
    missing_c = sorted(set(wireless) - set(classical))
    if missing_w:
        raise MissingDistance(f"wireless data missing distance(s) {[_dkey(d) for d in missing_w]} cm")
    if missing_c:
        raise MissingDistance(f"classical data missing distance(s) {[_dkey(d) for d in missing_c]} cm")
    distances = sorted(classical)

    gaps = {_dkey(d): mean_gap_db(classical[d], wireless[d]) for d in distances}
    correlations = {"classical": {}, "wireless": {}, "classical_vs_wireless": {}}
    for mode, curves in (("classical", classical), ("wireless", wireless)):
        for d1, d2 in itertools.combinations(distances, 2):
            _check_same_grid(curves[d1], curves[d2])
            correlations[mode][f"{_dkey(d1)}-{_dkey(d2)}"] = _safe_pearson(curves[d1], curves[d2])
    for d in distances:
        correlations["classical_vs_wireless"][_dkey(d)] = _safe_pearson(classical[d], wireless[d])

    peaks = {}
    fluct = {}
    for curves in (classical, wireless):
        for d in distances:
            c = curves[d]
            f, g = peak(c)
            peaks[c.label] = {"freq_hz": f, "gain_db": g}
            fluct[c.label] = fluctuation_db(c)

    return ComparisonReport(
        distances_cm=distances,
        mean_gap_db=gaps,
        grand_mean_gap_db=grand_mean_gap(gaps.values()),
        correlations=correlations,
        peaks=peaks,
        fluctuation_db=fluct,
        energy_per_bit={
            "tx_power_w": tx_power_w,
            "data_rate_bps": data_rate_bps,
            "joules_per_bit": energy_per_bit(tx_power_w, data_rate_bps),
        },
    )
