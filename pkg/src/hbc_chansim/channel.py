"""Lumped equivalent circuit of a capacitive body channel.

The transmitter drives its skin electrode relative to its own floating ground
(GT). The signal travels through the body to the receiver electrode, and the
receiver measures its electrode (SR) against its own floating ground (GR). The
loop closes through the environment: both grounds and the body couple to earth
(E), and the two grounds couple directly through ``C_INT(d)``. A wired
("classical") receiver ties GR to earth through a much larger capacitance,
which is the only difference between the two DAQ modes.

Node map::

    GT --[V]-- TXo --r_out-- TE --c_e_tx-- TEi --r_skin_tx-- BT --R_body(d)-- BR
                                                             |               |
                                                         c_body_gnd     c_body_gnd
                                                             E               E
    BR --r_skin_rx-- REi --c_e_rx-- SR --(r_in || c_in)-- GR
    GT --c_gt-- E      GR --c_gr(mode)-- E      GT --C_INT(d)-- GR
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from . import circuit
from .circuit import GROUND, Netlist, capacitor, resistor, voltage_source
from .errors import InvalidParams, NonPositiveInput
from .validation import check_daq_mode, check_positive

PROBE_PLUS = "SR"
PROBE_MINUS = "GR"
CANONICAL_DISTANCES_CM = (10.0, 30.0, 50.0)


class DaqMode(str, enum.Enum):
    CLASSICAL = "classical"
    WIRELESS = "wireless"


@dataclass(frozen=True)
class Scenario:
    daq_mode: DaqMode
    distance_cm: float

    def __post_init__(self):
        object.__setattr__(self, "daq_mode", DaqMode(check_daq_mode(self.daq_mode)))
        object.__setattr__(self, "distance_cm", check_positive(self.distance_cm, "distance_cm"))

    @property
    def id(self) -> str:
        return f"{self.daq_mode.value}_{self.distance_cm:g}cm"


def canonical_scenarios():
    """The 2 modes x 3 distances measurement plan, classical first."""
    return [Scenario(m, d) for m in DaqMode for d in CANONICAL_DISTANCES_CM]


@dataclass(frozen=True)
class ChannelParams:
    """Physical element values of the equivalent circuit (SI units, distances in cm).

    The defaults are order-of-magnitude values for wet-gel electrodes on the
    forearm and a watch-sized floating ground. They were tuned so the model
    shows the measured qualitative behaviour (wired Rx overestimates, the gap
    grows with distance); treat them as calibration starting points.
    """

    r_out: float = 1.0
    c_electrode_tx: float = 100e-9
    c_electrode_rx: float = 100e-9
    r_skin_tx: float = 500.0
    r_skin_rx: float = 500.0
    r_body_base: float = 50.0
    r_body_per_cm: float = 2.0
    c_body_gnd: float = 75e-12
    c_gt: float = 10e-12
    c_gr_wireless: float = 0.1e-12
    c_gr_classical: float = 1e-9
    k_int: float = 0.4e-12
    r_in: float = 1100.0
    c_in: float = 1.4e-12

    def __post_init__(self):
        for f in dataclasses.fields(self):
            object.__setattr__(
                self, f.name, check_positive(getattr(self, f.name), f.name, InvalidParams)
            )
        if self.c_gr_classical < self.c_gr_wireless:
            raise InvalidParams("c_gr_classical must be >= c_gr_wireless")

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in dataclasses.fields(cls))

    def replace(self, **changes) -> "ChannelParams":
        unknown = set(changes) - set(self.field_names())
        if unknown:
            raise InvalidParams(f"unknown channel parameter(s): {sorted(unknown)}")
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def r_body(self, distance_cm: float) -> float:
        return self.r_body_base + self.r_body_per_cm * distance_cm

    def c_gr(self, mode) -> float:
        mode = DaqMode(check_daq_mode(mode))
        return self.c_gr_classical if mode is DaqMode.CLASSICAL else self.c_gr_wireless


def c_int_of_distance(distance_cm: float, k_int: float) -> float:
    """Direct ground-to-ground coupling ``k_int / d`` (farads)."""
    d = check_positive(distance_cm, "distance_cm", NonPositiveInput)
    k = check_positive(k_int, "k_int", NonPositiveInput)
    return k / d


def build_channel(scenario: Scenario, params: ChannelParams | None = None, v_src: float = 1.0) -> Netlist:
    p = params if params is not None else ChannelParams()
    if not isinstance(p, ChannelParams):
        raise InvalidParams(f"expected ChannelParams, got {type(p).__name__}")
    d = scenario.distance_cm
    nodes = (GROUND, "GT", "TXo", "TE", "TEi", "BT", "BR", "REi", "SR", "GR")
    elements = (
        voltage_source("V_tx", "TXo", "GT", v_src),
        resistor("R_out", "TXo", "TE", p.r_out),
        capacitor("C_e_tx", "TE", "TEi", p.c_electrode_tx),
        resistor("R_skin_tx", "TEi", "BT", p.r_skin_tx),
        resistor("R_body", "BT", "BR", p.r_body(d)),
        capacitor("C_body_tx", "BT", GROUND, p.c_body_gnd),
        capacitor("C_body_rx", "BR", GROUND, p.c_body_gnd),
        resistor("R_skin_rx", "BR", "REi", p.r_skin_rx),
        capacitor("C_e_rx", "REi", "SR", p.c_electrode_rx),
        resistor("R_in", "SR", "GR", p.r_in),
        capacitor("C_in", "SR", "GR", p.c_in),
        capacitor("C_gt", "GT", GROUND, p.c_gt),
        capacitor("C_gr", "GR", GROUND, p.c_gr(scenario.daq_mode)),
        capacitor("C_int", "GT", "GR", c_int_of_distance(d, p.k_int)),
    )
    return Netlist(nodes, elements)


def channel_gain_db(scenario: Scenario, params: ChannelParams | None, freq_hz: float) -> float:
    check_positive(freq_hz, "freq_hz", NonPositiveInput)
    net = build_channel(scenario, params, 1.0)
    return circuit.transfer_gain_db(net, PROBE_PLUS, PROBE_MINUS, freq_hz)


def channel_gain_curve(scenario: Scenario, params: ChannelParams | None, freqs) -> np.ndarray:
    """Gain in dB at every frequency of ``freqs`` (one batched solve)."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size and not (np.all(np.isfinite(freqs)) and np.all(freqs > 0)):
        raise NonPositiveInput("frequencies must be finite and > 0")
    if freqs.size == 0:
        return np.empty(0)
    net = build_channel(scenario, params, 1.0)
    return circuit.transfer_gain_db_sweep(net, PROBE_PLUS, PROBE_MINUS, freqs)
