"""Complex AC solver for linear R/C/L networks driven by one ideal voltage source.

The network is written in modified nodal analysis form: one unknown per
non-reference node, one auxiliary branch current for the voltage source and one
per inductor. The dense complex system is solved by Gaussian elimination with
partial pivoting, batched over frequencies so a whole sweep costs one pass.

Example
-------
>>> net = Netlist.build([
...     voltage_source("V1", "in", "E", 1.0),
...     resistor("R1", "in", "mid", 1e3),
...     resistor("R2", "mid", "E", 1e3),
... ])
>>> round(transfer_gain_db(net, "mid", "E", 1e3), 4)
-6.0206
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidNetlist, SingularSystem

GROUND = "E"

# Pivot magnitude below this fraction of the largest initial |A| entry is singular.
PIVOT_RTOL = 1e-15


class ElementKind(str, enum.Enum):
    RESISTOR = "R"
    CAPACITOR = "C"
    INDUCTOR = "L"
    VOLTAGE_SOURCE = "V"


@dataclass(frozen=True)
class Element:
    """Two-terminal element between nodes ``a`` and ``b``.

    For a voltage source ``a`` is the positive terminal and ``value`` the peak
    amplitude, so the source enforces ``V(a) - V(b) = value``.
    """

    kind: ElementKind
    value: float
    a: str
    b: str
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ElementKind(self.kind))
        v = float(self.value)
        object.__setattr__(self, "value", v)
        if self.a == self.b:
            raise InvalidNetlist(f"element {self.label!r} connects node {self.a!r} to itself")
        if not math.isfinite(v):
            raise InvalidNetlist(f"element {self.label!r} has non-finite value {v!r}")
        if self.kind is ElementKind.VOLTAGE_SOURCE:
            if v < 0:
                raise InvalidNetlist(f"source {self.label!r} amplitude must be >= 0")
        elif v <= 0:
            raise InvalidNetlist(f"element {self.label!r} value must be > 0, got {v!r}")


def resistor(label, a, b, ohms):
    return Element(ElementKind.RESISTOR, ohms, a, b, label)


def capacitor(label, a, b, farads):
    return Element(ElementKind.CAPACITOR, farads, a, b, label)


def inductor(label, a, b, henries):
    return Element(ElementKind.INDUCTOR, henries, a, b, label)


def voltage_source(label, plus, minus, volts):
    return Element(ElementKind.VOLTAGE_SOURCE, volts, plus, minus, label)


@dataclass(frozen=True)
class Netlist:
    nodes: tuple
    elements: tuple

    def __post_init__(self):
        nodes = tuple(self.nodes)
        elements = tuple(self.elements)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        if GROUND not in nodes:
            raise InvalidNetlist(f"reference node {GROUND!r} missing")
        if len(set(nodes)) != len(nodes):
            raise InvalidNetlist("duplicate node identifiers")
        known = set(nodes)
        for el in elements:
            if not isinstance(el, Element):
                raise InvalidNetlist(f"not an Element: {el!r}")
            for n in (el.a, el.b):
                if n not in known:
                    raise InvalidNetlist(f"element {el.label!r} references unknown node {n!r}")
        n_src = sum(el.kind is ElementKind.VOLTAGE_SOURCE for el in elements)
        if n_src != 1:
            raise InvalidNetlist(f"exactly one voltage source required, found {n_src}")

    @classmethod
    def build(cls, elements: Iterable[Element]) -> "Netlist":
        """Create a netlist whose node list is inferred from ``elements``."""
        elements = tuple(elements)
        nodes = [GROUND]
        for el in elements:
            for n in (el.a, el.b):
                if n not in nodes:
                    nodes.append(n)
        return cls(tuple(nodes), elements)

    @property
    def source(self) -> Element:
        return next(el for el in self.elements if el.kind is ElementKind.VOLTAGE_SOURCE)

    def element(self, label) -> Element:
        for el in self.elements:
            if el.label == label:
                return el
        raise KeyError(label)


@dataclass(frozen=True)
class AcSolution:
    freq_hz: float
    node_voltages: Mapping[str, complex]
    source_current: complex
    """Current delivered by the source out of its positive terminal."""

    def voltage(self, plus, minus=GROUND) -> complex:
        return self.node_voltages[plus] - self.node_voltages[minus]


def _check_connected(net: Netlist):
    parent = {n: n for n in net.nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    for el in net.elements:
        ra, rb = find(el.a), find(el.b)
        if ra != rb:
            parent[ra] = rb
    root = find(GROUND)
    floating = [n for n in net.nodes if find(n) != root]
    if floating:
        raise SingularSystem(f"nodes not connected to {GROUND!r}: {floating}")


def _assemble(net: Netlist, freqs: np.ndarray):
    """Build the batched MNA system ``A x = b`` for every frequency."""
    index = {n: i for i, n in enumerate(n for n in net.nodes if n != GROUND)}
    n_nodes = len(index)
    inductors = [el for el in net.elements if el.kind is ElementKind.INDUCTOR]
    size = n_nodes + 1 + len(inductors)
    F = freqs.size
    omega = 2.0 * np.pi * freqs
    A = np.zeros((F, size, size), dtype=complex)
    b = np.zeros((F, size), dtype=complex)

    def stamp_admittance(el, y):
        ia, ib = index.get(el.a), index.get(el.b)
        if ia is not None:
            A[:, ia, ia] += y
        if ib is not None:
            A[:, ib, ib] += y
        if ia is not None and ib is not None:
            A[:, ia, ib] -= y
            A[:, ib, ia] -= y

    def stamp_branch(el, row):
        # branch current leaves node a and enters node b
        ia, ib = index.get(el.a), index.get(el.b)
        if ia is not None:
            A[:, ia, row] += 1.0
            A[:, row, ia] += 1.0
        if ib is not None:
            A[:, ib, row] -= 1.0
            A[:, row, ib] -= 1.0

    src_row = n_nodes
    for el in net.elements:
        if el.kind is ElementKind.RESISTOR:
            stamp_admittance(el, np.full(F, 1.0 / el.value, dtype=complex))
        elif el.kind is ElementKind.CAPACITOR:
            stamp_admittance(el, 1j * omega * el.value)
        elif el.kind is ElementKind.VOLTAGE_SOURCE:
            stamp_branch(el, src_row)
            b[:, src_row] = el.value
    for k, el in enumerate(inductors):
        row = n_nodes + 1 + k
        stamp_branch(el, row)
        A[:, row, row] -= 1j * omega * el.value
    return A, b, index, src_row


def _eliminate(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched Gaussian elimination with partial pivoting.

    Returns the solution array, or raises SingularSystem naming the first batch
    entry whose pivot falls below the relative threshold.
    """
    A = A.copy()
    b = b.copy()
    F, m, _ = A.shape
    scale = np.abs(A).reshape(F, -1).max(axis=1)
    tol = PIVOT_RTOL * scale
    batch = np.arange(F)
    for k in range(m):
        p = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        rows_k = A[batch, k].copy()
        A[batch, k] = A[batch, p]
        A[batch, p] = rows_k
        bk = b[batch, k].copy()
        b[batch, k] = b[batch, p]
        b[batch, p] = bk
        pivot = A[:, k, k]
        bad = np.abs(pivot) <= tol
        if np.any(bad):
            raise SingularSystem(f"pivot below threshold at column {k}", int(np.argmax(bad)))
        if k + 1 < m:
            factors = A[:, k + 1:, k] / pivot[:, None]
            A[:, k + 1:, k:] -= factors[:, :, None] * A[:, None, k, k:]
            b[:, k + 1:] -= factors * b[:, k, None]
    x = np.zeros_like(b)
    for k in range(m - 1, -1, -1):
        acc = b[:, k] - np.einsum("fj,fj->f", A[:, k, k + 1:], x[:, k + 1:])
        x[:, k] = acc / A[:, k, k]
    return x


def _solve_raw(net: Netlist, freqs: Sequence[float]):
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.ndim != 1 or not np.all(np.isfinite(freqs)) or np.any(freqs < 0):
        raise InvalidNetlist("frequencies must be finite and >= 0")
    _check_connected(net)
    A, b, index, src_row = _assemble(net, freqs)
    try:
        x = _eliminate(A, b)
    except SingularSystem as exc:
        msg, which = exc.args
        raise SingularSystem(f"{msg} (f = {freqs[which]!r} Hz)") from None
    return freqs, x, index, src_row


def solve_ac(net: Netlist, freq_hz: float) -> AcSolution:
    """Phasor node voltages of ``net`` at one frequency (``freq_hz`` may be 0)."""
    freqs, x, index, src_row = _solve_raw(net, [freq_hz])
    volts = {GROUND: 0j}
    for node, i in index.items():
        volts[node] = complex(x[0, i])
    return AcSolution(float(freqs[0]), volts, -complex(x[0, src_row]))


def solve_ac_sweep(net: Netlist, freqs: Sequence[float]) -> list:
    freqs, x, index, src_row = _solve_raw(net, freqs)
    out = []
    for f, row in zip(freqs, x):
        volts = {GROUND: 0j}
        volts.update({node: complex(row[i]) for node, i in index.items()})
        out.append(AcSolution(float(f), volts, -complex(row[src_row])))
    return out


def _differential(net, x, index, plus, minus):
    for n in (plus, minus):
        if n not in net.nodes:
            raise InvalidNetlist(f"probe node {n!r} not in netlist")
    zero = np.zeros(x.shape[0], dtype=complex)
    vp = x[:, index[plus]] if plus != GROUND else zero
    vm = x[:, index[minus]] if minus != GROUND else zero
    return vp - vm


def transfer_ratio(net: Netlist, probe_plus, probe_minus, freqs) -> np.ndarray:
    """Complex ``(V(plus) - V(minus)) / V_source`` for each frequency."""
    amp = net.source.value
    if amp <= 0:
        raise InvalidNetlist("source amplitude must be > 0 to form a transfer ratio")
    freqs_arr, x, index, _ = _solve_raw(net, freqs)
    return _differential(net, x, index, probe_plus, probe_minus) / amp


def _to_db(mag: np.ndarray) -> np.ndarray:
    out = np.full(mag.shape, -np.inf)
    nz = mag > 0
    out[nz] = 20.0 * np.log10(mag[nz])
    return out


def transfer_gain_db(net: Netlist, probe_plus, probe_minus, freq_hz: float) -> float:
    """Differential probe voltage over source amplitude, in dB.

    Returns ``-inf`` when the probe difference is exactly zero.
    """
    return float(_to_db(np.abs(transfer_ratio(net, probe_plus, probe_minus, [freq_hz])))[0])


def transfer_gain_db_sweep(net: Netlist, probe_plus, probe_minus, freqs) -> np.ndarray:
    return _to_db(np.abs(transfer_ratio(net, probe_plus, probe_minus, freqs)))
