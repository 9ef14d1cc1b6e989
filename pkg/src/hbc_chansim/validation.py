"""Small input-validation helpers used across the package."""

import math

import numpy as np

from .errors import InvalidParams, NonPositiveInput

DAQ_MODES = ("classical", "wireless")


def check_finite(value, name, exc=InvalidParams):
    value = float(value)
    if not math.isfinite(value):
        raise exc(f"{name} must be finite, got {value!r}")
    return value


def check_positive(value, name, exc=NonPositiveInput):
    value = check_finite(value, name, exc)
    if value <= 0:
        raise exc(f"{name} must be > 0, got {value!r}")
    return value


def check_non_negative(value, name, exc=InvalidParams):
    value = check_finite(value, name, exc)
    if value < 0:
        raise exc(f"{name} must be >= 0, got {value!r}")
    return value


def check_daq_mode(mode):
    """Normalise a DAQ mode to ``"classical"`` or ``"wireless"``."""
    mode = getattr(mode, "value", mode)
    if isinstance(mode, str):
        key = mode.strip().lower()
        if key in DAQ_MODES:
            return key
    raise InvalidParams(f"unknown DAQ mode {mode!r}; expected one of {DAQ_MODES}")


def check_strictly_increasing(freqs, name="freq_hz"):
    freqs = np.asarray(freqs, dtype=float)
    if freqs.ndim != 1:
        raise InvalidParams(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(freqs)):
        raise InvalidParams(f"{name} must be finite")
    if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
        raise InvalidParams(f"{name} must be strictly increasing")
    return freqs


def check_scenario_table(X):
    """Validate a ``(n, 3)`` table of ``[daq_mode, distance_cm, freq_hz]`` rows.

    The mode column may hold strings (``"classical"``/``"wireless"``) or numbers,
    where 1 means classical and 0 wireless. Returns ``(modes, distances, freqs)``.
    """
    if hasattr(X, "to_numpy"):
        X = X.to_numpy()
    X = np.asarray(X, dtype=object)
    if X.ndim != 2 or X.shape[1] != 3:
        raise InvalidParams(
            f"expected a (n_samples, 3) table of [daq_mode, distance_cm, freq_hz], got shape {X.shape}"
        )
    modes = []
    for m in X[:, 0]:
        if isinstance(m, str):
            modes.append(check_daq_mode(m))
        else:
            flag = float(m)
            if flag not in (0.0, 1.0):
                raise InvalidParams(f"numeric daq_mode must be 0 (wireless) or 1 (classical), got {m!r}")
            modes.append("classical" if flag == 1.0 else "wireless")
    dist = np.asarray(X[:, 1], dtype=float)
    freqs = np.asarray(X[:, 2], dtype=float)
    if not (np.all(np.isfinite(dist)) and np.all(dist > 0)):
        raise NonPositiveInput("distance_cm must be finite and > 0")
    if not (np.all(np.isfinite(freqs)) and np.all(freqs > 0)):
        raise NonPositiveInput("freq_hz must be finite and > 0")
    return modes, dist, freqs
