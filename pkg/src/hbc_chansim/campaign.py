"""Frequency-sweep campaigns over (DAQ mode x distance) scenarios.

A campaign runs every scenario through the channel model and the receiver
chain at every grid frequency. It writes one CSV row per (scenario, frequency)
in a fixed order. The transmit power is checked against the safety policy
before any simulation work.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .channel import ChannelParams, Scenario, canonical_scenarios, channel_gain_curve, channel_gain_db
from .errors import FormatError, HBCError, InvalidConfig, InvalidParams, SafetyViolation, SimulationError
from .frontend import (
    RxFrontendModel,
    TxModel,
    adc_quantize,
    bandpass_gain_db,
    detector_voltage,
    rx_power_dbm,
)
from .validation import check_daq_mode

RESULTS_HEADER = ("scenario", "daq_mode", "distance_cm", "freq_hz", "gain_db", "rx_power_dbm", "detector_v", "adc_code")
MEASURED_HEADER = ("daq_mode", "distance_cm", "freq_hz", "gain_db")
THREADS_ENV = "HBC_CHANSIM_THREADS"


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class SweepConfig:
    f_start_hz: float = 4e6
    f_stop_hz: float = 64e6
    points: int = 61
    spacing: Spacing = Spacing.LINEAR
    dither: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "spacing", Spacing(str(getattr(self.spacing, "value", self.spacing)).lower()))
        except ValueError:
            raise InvalidConfig(f"spacing must be 'linear' or 'log', got {self.spacing!r}") from None
        lo, hi = float(self.f_start_hz), float(self.f_stop_hz)
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo <= hi):
            raise InvalidConfig(f"need 0 < f_start_hz <= f_stop_hz, got {lo!r}, {hi!r}")
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 2:
            raise InvalidConfig(f"points must be an integer >= 2, got {self.points!r}")
        if not isinstance(self.dither, bool):
            raise InvalidConfig("dither must be true or false")
        object.__setattr__(self, "f_start_hz", lo)
        object.__setattr__(self, "f_stop_hz", hi)
        object.__setattr__(self, "points", int(self.points))


@dataclass(frozen=True)
class SafetyPolicy:
    max_tx_dbm: float = 5.0

    def __post_init__(self):
        v = float(self.max_tx_dbm)
        if not math.isfinite(v):
            raise InvalidConfig("max_tx_dbm must be finite")
        object.__setattr__(self, "max_tx_dbm", v)


@dataclass(frozen=True)
class SamplePoint:
    scenario: str
    daq_mode: str
    distance_cm: float
    freq_hz: float
    gain_db: float
    rx_power_dbm: float
    detector_v: float
    adc_code: int


@dataclass
class CampaignResult:
    config: dict
    samples: list = field(default_factory=list)


class MeasuredPoint(NamedTuple):
    daq_mode: str
    distance_cm: float
    freq_hz: float
    gain_db: float


def check_safety(tx_power_dbm: float, policy: SafetyPolicy | None = None) -> float:
    """Return ``tx_power_dbm`` if it is finite and within the cap, else raise SafetyViolation."""
    policy = policy or SafetyPolicy()
    p = float(tx_power_dbm)
    if not (math.isfinite(p) and p <= policy.max_tx_dbm):
        raise SafetyViolation(p, policy.max_tx_dbm)
    return p


def frequency_grid(cfg: SweepConfig) -> np.ndarray:
    if cfg.spacing is Spacing.LINEAR:
        grid = np.linspace(cfg.f_start_hz, cfg.f_stop_hz, cfg.points)
    else:
        grid = np.logspace(math.log10(cfg.f_start_hz), math.log10(cfg.f_stop_hz), cfg.points)
    grid[0] = cfg.f_start_hz
    grid[-1] = cfg.f_stop_hz
    if not np.all(np.diff(grid) > 0):
        raise InvalidConfig("frequency grid is not strictly increasing (f_start_hz == f_stop_hz?)")
    return grid


def resolve_workers(env=None) -> int:
    env = os.environ if env is None else env
    raw = env.get(THREADS_ENV)
    if raw is None or raw == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfig(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidConfig(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _scenario_gains(scenario, params, freqs):
    try:
        return channel_gain_curve(scenario, params, freqs)
    except HBCError:
        # locate the first failing frequency for the error report
        for f in freqs:
            try:
                channel_gain_db(scenario, params, f)
            except HBCError as exc:
                raise SimulationError(scenario.id, float(f), exc) from exc
        raise


def config_echo(scenarios, params, tx, rx, sweep, policy, seed=0) -> dict:
    return {
        "params": params.as_dict(),
        "tx": {
            **dataclasses.asdict(tx),
            "fundamental_peak_v": tx.fundamental_peak_v,
            "tx_power_dbm": tx.tx_power_dbm,
        },
        "rx": dataclasses.asdict(rx),
        "sweep": {**dataclasses.asdict(sweep), "spacing": sweep.spacing.value},
        "scenarios": [{"daq": s.daq_mode.value, "distance_cm": s.distance_cm} for s in scenarios],
        "safety": dataclasses.asdict(policy),
        "rx_power_reference": "power of the received fundamental into rx.r_in",
        "tx_power_reference": "power of the carrier fundamental into tx.ref_load_ohm",
        "seed": seed,
    }


def run_campaign(
    scenarios,
    params: ChannelParams | None = None,
    tx: TxModel | None = None,
    rx: RxFrontendModel | None = None,
    sweep: SweepConfig | None = None,
    policy: SafetyPolicy | None = None,
    seed: int = 0,
    max_workers: int | None = None,
) -> CampaignResult:
    params = params or ChannelParams()
    tx = tx or TxModel()
    rx = rx or RxFrontendModel()
    sweep = sweep or SweepConfig()
    policy = policy or SafetyPolicy()
    scenarios = list(scenarios)
    echo = config_echo(scenarios, params, tx, rx, sweep, policy, seed)

    check_safety(tx.tx_power_dbm, policy)

    freqs = frequency_grid(sweep)
    workers = max_workers or resolve_workers()
    if workers > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gains = list(pool.map(lambda s: _scenario_gains(s, params, freqs), scenarios))
    else:
        gains = [_scenario_gains(s, params, freqs) for s in scenarios]

    rng = np.random.default_rng(seed) if sweep.dither else None
    half_lsb_v = rx.adc_vref / rx.full_scale_code / 2.0
    bandpass = [bandpass_gain_db(rx, f) for f in freqs]
    v_peak = tx.fundamental_peak_v
    samples = []
    for scenario, curve in zip(scenarios, gains):
        for f, g, bp in zip(freqs, curve, bandpass):
            g = float(g)
            v_rx = v_peak * 10.0 ** ((g + bp) / 20.0) if math.isfinite(g) else 0.0
            p_rx = rx_power_dbm(v_rx, rx.r_in)
            det = detector_voltage(rx, p_rx)
            if rng is not None:
                det += float(rng.uniform(-half_lsb_v, half_lsb_v))
            samples.append(
                SamplePoint(
                    scenario=scenario.id,
                    daq_mode=scenario.daq_mode.value,
                    distance_cm=scenario.distance_cm,
                    freq_hz=float(f),
                    gain_db=g,
                    rx_power_dbm=p_rx,
                    detector_v=det,
                    adc_code=adc_quantize(rx, det),
                )
            )
    return CampaignResult(echo, samples)


# --------------------------------------------------------------------------- config file

_SECTION_TYPES = {"tx": TxModel, "rx": RxFrontendModel, "sweep": SweepConfig, "safety": SafetyPolicy}
TOP_LEVEL_KEYS = ("params", "tx", "rx", "sweep", "scenarios", "safety", "fit")


@dataclass(frozen=True)
class CampaignConfig:
    params: ChannelParams = field(default_factory=ChannelParams)
    tx: TxModel = field(default_factory=TxModel)
    rx: RxFrontendModel = field(default_factory=RxFrontendModel)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    scenarios: tuple = field(default_factory=lambda: tuple(canonical_scenarios()))
    safety: SafetyPolicy = field(default_factory=SafetyPolicy)
    fit: dict = field(default_factory=dict)


def _section(name, cls, data):
    if not isinstance(data, dict):
        raise InvalidConfig(f"'{name}' must be a JSON object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise InvalidConfig(f"unknown key(s) in '{name}': {unknown}")
    try:
        return cls(**data)
    except (ValueError, TypeError) as exc:
        raise InvalidConfig(f"invalid '{name}': {exc}") from exc


def parse_config(doc: dict) -> CampaignConfig:
    """Build a CampaignConfig from a decoded JSON document. Unknown keys are errors."""
    if not isinstance(doc, dict):
        raise InvalidConfig("config must be a JSON object")
    unknown = sorted(set(doc) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise InvalidConfig(f"unknown top-level key(s): {unknown}")
    kwargs = {}
    if "params" in doc:
        kwargs["params"] = _section("params", ChannelParams, doc["params"])
    for name, cls in _SECTION_TYPES.items():
        if name in doc:
            kwargs[name] = _section(name, cls, doc[name])
    if "scenarios" in doc:
        items = doc["scenarios"]
        if not isinstance(items, list):
            raise InvalidConfig("'scenarios' must be an array")
        scenarios = []
        for i, item in enumerate(items):
            if not isinstance(item, dict) or set(item) != {"daq", "distance_cm"}:
                raise InvalidConfig(f"scenarios[{i}] must have exactly the keys 'daq' and 'distance_cm'")
            try:
                scenarios.append(Scenario(item["daq"], item["distance_cm"]))
            except (ValueError, TypeError) as exc:
                raise InvalidConfig(f"scenarios[{i}]: {exc}") from exc
        kwargs["scenarios"] = tuple(scenarios)
    if "fit" in doc:
        if not isinstance(doc["fit"], dict):
            raise InvalidConfig("'fit' must be a JSON object")
        kwargs["fit"] = doc["fit"]
    return CampaignConfig(**kwargs)


def load_config(path) -> CampaignConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc)


# --------------------------------------------------------------------------- CSV

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write_text(path, text: str):
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def results_csv_text(result: CampaignResult) -> str:
    lines = [",".join(RESULTS_HEADER)]
    for s in result.samples:
        lines.append(
            ",".join(
                [
                    s.scenario,
                    s.daq_mode,
                    _fmt(s.distance_cm),
                    _fmt(s.freq_hz),
                    _fmt(s.gain_db),
                    _fmt(s.rx_power_dbm),
                    _fmt(s.detector_v),
                    _fmt(int(s.adc_code)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(result: CampaignResult, path):
    atomic_write_text(path, results_csv_text(result))


def _read_rows(path, header):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    rows = csv.reader(io.StringIO(text, newline=""))
    try:
        first = next(rows)
    except StopIteration:
        raise FormatError("empty file, header missing", line=1) from None
    if tuple(first) != header:
        raise FormatError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1)
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        yield lineno, row


def _num(text, lineno, name):
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{name}: not a number: {text!r}", line=lineno) from None


def read_csv(path) -> list:
    """Read a results CSV back into SamplePoint records."""
    out = []
    for lineno, row in _read_rows(path, RESULTS_HEADER):
        scenario, mode = row[0], row[1]
        try:
            mode = check_daq_mode(mode)
        except InvalidParams as exc:
            raise FormatError(str(exc), line=lineno) from None
        code_text = row[7]
        try:
            code = int(code_text)
        except ValueError:
            raise FormatError(f"adc_code: not an integer: {code_text!r}", line=lineno) from None
        out.append(
            SamplePoint(
                scenario=scenario,
                daq_mode=mode,
                distance_cm=_num(row[2], lineno, "distance_cm"),
                freq_hz=_num(row[3], lineno, "freq_hz"),
                gain_db=_num(row[4], lineno, "gain_db"),
                rx_power_dbm=_num(row[5], lineno, "rx_power_dbm"),
                detector_v=_num(row[6], lineno, "detector_v"),
                adc_code=code,
            )
        )
    return out


def write_measured_csv(points, path):
    lines = [",".join(MEASURED_HEADER)]
    for p in points:
        lines.append(",".join([check_daq_mode(p.daq_mode), _fmt(p.distance_cm), _fmt(p.freq_hz), _fmt(p.gain_db)]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_measured_csv(path) -> list:
    out = []
    for lineno, row in _read_rows(path, MEASURED_HEADER):
        try:
            mode = check_daq_mode(row[0])
        except InvalidParams as exc:
            raise FormatError(str(exc), line=lineno) from None
        out.append(
            MeasuredPoint(
                mode,
                _num(row[1], lineno, "distance_cm"),
                _num(row[2], lineno, "freq_hz"),
                _num(row[3], lineno, "gain_db"),
            )
        )
    return out


def read_gain_records(path) -> list:
    """Read either a results CSV or a measured-data CSV, whichever header it carries."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            first = fh.readline().rstrip("\r\n")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if tuple(first.split(",")) == RESULTS_HEADER:
        return read_csv(path)
    return read_measured_csv(path)
