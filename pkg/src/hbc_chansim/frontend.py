"""Transmitter drive and receiver measurement chain.

The receiver chain is band-pass filter -> logarithmic detector -> ADC. The
detector maps input power (dBm) linearly to volts over a fixed 92 dB window,
and the ADC quantises that voltage against its reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CodeOutOfRange, InvalidParams, NonPositiveInput
from .validation import check_finite, check_non_negative, check_positive

DETECTOR_DYNAMIC_RANGE_DB = 92.0
CARRIER_MIN_HZ = 4e6
CARRIER_MAX_HZ = 64e6


@dataclass(frozen=True)
class TxModel:
    """Rectangular carrier source.

    ``ref_load_ohm`` is the load the carrier's fundamental is referred to when
    quoting a transmit power for the safety gate; it defaults to the receiver's
    input resistance so Tx and Rx powers share one convention.
    """

    rail_v: float = 3.3
    carrier_hz: float = 64e6
    ref_load_ohm: float = 1100.0

    def __post_init__(self):
        check_positive(self.rail_v, "rail_v", InvalidParams)
        check_positive(self.ref_load_ohm, "ref_load_ohm", InvalidParams)
        f = check_finite(self.carrier_hz, "carrier_hz")
        if not CARRIER_MIN_HZ <= f <= CARRIER_MAX_HZ:
            raise InvalidParams(
                f"carrier_hz must lie in [{CARRIER_MIN_HZ:g}, {CARRIER_MAX_HZ:g}] Hz, got {f:g}"
            )

    @property
    def fundamental_peak_v(self) -> float:
        return square_fundamental_peak(self.rail_v)

    @property
    def tx_power_dbm(self) -> float:
        return rx_power_dbm(self.fundamental_peak_v, self.ref_load_ohm)


@dataclass(frozen=True)
class RxFrontendModel:
    f_low_hz: float = 160.0
    f_high_hz: float = 70e6
    det_slope_v_per_db: float = 0.025
    det_intercept_dbm: float = -84.0
    dynamic_range_db: float = DETECTOR_DYNAMIC_RANGE_DB
    adc_bits: int = 12
    adc_vref: float = 2.7
    r_in: float = 1100.0

    def __post_init__(self):
        lo = check_positive(self.f_low_hz, "f_low_hz", InvalidParams)
        hi = check_positive(self.f_high_hz, "f_high_hz", InvalidParams)
        if not lo < hi:
            raise InvalidParams("f_low_hz must be below f_high_hz")
        check_positive(self.det_slope_v_per_db, "det_slope_v_per_db", InvalidParams)
        check_finite(self.det_intercept_dbm, "det_intercept_dbm")
        if self.dynamic_range_db != DETECTOR_DYNAMIC_RANGE_DB:
            raise InvalidParams(f"dynamic_range_db is fixed at {DETECTOR_DYNAMIC_RANGE_DB:g} dB")
        if isinstance(self.adc_bits, bool) or int(self.adc_bits) != self.adc_bits:
            raise InvalidParams("adc_bits must be an integer")
        object.__setattr__(self, "adc_bits", int(self.adc_bits))
        if not 2 <= self.adc_bits <= 16:
            raise InvalidParams("adc_bits must be within [2, 16]")
        check_positive(self.adc_vref, "adc_vref", InvalidParams)
        check_positive(self.r_in, "r_in", InvalidParams)

    @property
    def full_scale_code(self) -> int:
        return (1 << self.adc_bits) - 1

    @property
    def lsb_db(self) -> float:
        """One ADC step expressed as detector input dB."""
        return self.adc_vref / self.full_scale_code / self.det_slope_v_per_db


def square_fundamental_peak(rail_v: float) -> float:
    """Peak of the fundamental of a 0-to-rail, 50 % duty square wave: 2*V/pi."""
    v = check_non_negative(rail_v, "rail_v", NonPositiveInput)
    return 2.0 * v / math.pi


def bandpass_gain_db(m: RxFrontendModel, f: float) -> float:
    """First-order high-pass at ``f_low`` cascaded with first-order low-pass at ``f_high``."""
    f = check_positive(f, "frequency", NonPositiveInput)
    xl = f / m.f_low_hz
    xh = f / m.f_high_hz
    # 10*log10 of the squared magnitude avoids forming the square roots.
    return 10.0 * math.log10(xl * xl / (1.0 + xl * xl)) - 10.0 * math.log10(1.0 + xh * xh)


def detector_voltage(m: RxFrontendModel, p_in_dbm: float) -> float:
    p = float(p_in_dbm)
    if math.isnan(p):
        raise InvalidParams("detector input power is NaN")
    lo = m.det_intercept_dbm
    p = min(max(p, lo), lo + m.dynamic_range_db)
    return m.det_slope_v_per_db * (p - lo)


def _round_half_away(x: float) -> int:
    n = math.floor(x)
    return n + 1 if x - n >= 0.5 else n


def adc_quantize(m: RxFrontendModel, v: float) -> int:
    v = float(v)
    if math.isnan(v):
        raise InvalidParams("ADC input is NaN")
    v = min(max(v, 0.0), m.adc_vref)
    return _round_half_away(v / m.adc_vref * m.full_scale_code)


def code_to_dbm(m: RxFrontendModel, code: int) -> float:
    if isinstance(code, bool) or int(code) != code:
        raise CodeOutOfRange(f"ADC code must be an integer, got {code!r}")
    code = int(code)
    if not 0 <= code <= m.full_scale_code:
        raise CodeOutOfRange(f"ADC code {code} outside [0, {m.full_scale_code}]")
    v = code / m.full_scale_code * m.adc_vref
    return v / m.det_slope_v_per_db + m.det_intercept_dbm


def rx_power_dbm(v_amplitude: float, r_in: float) -> float:
    """Average power of a sinusoid of peak ``v_amplitude`` into ``r_in``, in dBm.

    Returns ``-inf`` for a zero amplitude.
    """
    v = check_non_negative(v_amplitude, "v_amplitude", NonPositiveInput)
    r = check_positive(r_in, "r_in", NonPositiveInput)
    if v == 0.0:
        return -math.inf
    return 10.0 * math.log10(v * v / (2.0 * r) / 1e-3)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    w = check_positive(watts, "watts", NonPositiveInput)
    return 10.0 * math.log10(w / 1e-3)
