"""scikit-learn compatible wrappers.

``ChannelGainRegressor`` predicts channel gain (dB) from rows of
``[daq_mode, distance_cm, freq_hz]`` and calibrates its free parameters in
``fit``. ``MeasurementChain`` maps received power (dBm) to ADC codes and back.
Both support ``get_params``/``set_params``, so they work with pipelines,
``clone`` and grid searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import frontend
from .analysis import GainCurve
from .calibrate import DEFAULT_BUDGET, FitSpec, fit
from .channel import ChannelParams, Scenario, channel_gain_curve
from .errors import InvalidParams
from .validation import check_scenario_table


def _gain_table(modes, dist, freqs, params):
    """Evaluate the model at arbitrary rows, batching rows that share a scenario."""
    out = np.empty(len(freqs))
    groups = {}
    for i, key in enumerate(zip(modes, dist)):
        groups.setdefault(key, []).append(i)
    for (mode, d), idx in groups.items():
        idx = np.asarray(idx)
        order = np.argsort(freqs[idx], kind="stable")
        f_sorted = freqs[idx][order]
        uniq, inverse = np.unique(f_sorted, return_inverse=True)
        gains = channel_gain_curve(Scenario(mode, d), params, uniq)
        out[idx[order]] = gains[inverse]
    return out


class ChannelGainRegressor(RegressorMixin, BaseEstimator):
    """Equivalent-circuit channel model with Nelder-Mead calibration.

    Parameters
    ----------
    params : ChannelParams, optional
        Starting (and, for non-free fields, fixed) circuit values.
    free_params : tuple of str
        Names of ChannelParams fields adjusted by ``fit``. Empty means ``fit``
        only records the RMSE of ``params``.
    log10_bounds : dict, optional
        ``{name: (lo, hi)}`` search box in log10 units; unspecified names get
        two decades either side of the starting value.
    max_evals : int
        Objective evaluation budget.
    seed : int
        Seed for restart jitter.
    """

    def __init__(self, params=None, free_params=("k_int",), log10_bounds=None, max_evals=DEFAULT_BUDGET, seed=0):
        self.params = params
        self.free_params = free_params
        self.log10_bounds = log10_bounds
        self.max_evals = max_evals
        self.seed = seed

    def _start(self):
        p = self.params if self.params is not None else ChannelParams()
        if not isinstance(p, ChannelParams):
            raise InvalidParams("params must be a ChannelParams instance")
        return p

    def fit(self, X, y):
        modes, dist, freqs = check_scenario_table(X)
        y = check_array(y, ensure_2d=False, dtype=float)
        if y.shape != freqs.shape:
            raise InvalidParams(f"y has {y.shape[0]} values for {freqs.shape[0]} rows")
        curves = []
        groups = {}
        for i, key in enumerate(zip(modes, dist)):
            groups.setdefault(key, []).append(i)
        for (mode, d), idx in groups.items():
            idx = np.asarray(idx)
            order = np.argsort(freqs[idx], kind="stable")
            curves.append(GainCurve(mode, d, tuple(freqs[idx][order]), tuple(y[idx][order])))
        spec = FitSpec(
            measured=curves,
            free=tuple(self.free_params),
            log10_bounds=dict(self.log10_bounds or {}),
            initial=self._start(),
            budget=self.max_evals,
            seed=self.seed,
        )
        result = fit(spec)
        self.params_ = result.params
        self.rmse_db_ = result.rmse_db
        self.n_evals_ = result.evaluations
        self.converged_ = result.converged
        self.fit_result_ = result
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        modes, dist, freqs = check_scenario_table(X)
        return _gain_table(modes, dist, freqs, self.params_)


class MeasurementChain(TransformerMixin, BaseEstimator):
    """Receiver chain: detector then ADC, as a transformer over dBm values.

    ``transform`` maps received power (dBm) to ADC codes and
    ``inverse_transform`` maps codes back to dBm.
    """

    def __init__(
        self,
        f_low_hz=160.0,
        f_high_hz=70e6,
        det_slope_v_per_db=0.025,
        det_intercept_dbm=-84.0,
        adc_bits=12,
        adc_vref=2.7,
        r_in=1100.0,
    ):
        self.f_low_hz = f_low_hz
        self.f_high_hz = f_high_hz
        self.det_slope_v_per_db = det_slope_v_per_db
        self.det_intercept_dbm = det_intercept_dbm
        self.adc_bits = adc_bits
        self.adc_vref = adc_vref
        self.r_in = r_in

    def fit(self, X=None, y=None):
        self.model_ = frontend.RxFrontendModel(
            f_low_hz=self.f_low_hz,
            f_high_hz=self.f_high_hz,
            det_slope_v_per_db=self.det_slope_v_per_db,
            det_intercept_dbm=self.det_intercept_dbm,
            adc_bits=self.adc_bits,
            adc_vref=self.adc_vref,
            r_in=self.r_in,
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, ensure_2d=False, dtype=float, ensure_all_finite=False)
        m = self.model_
        return np.vectorize(lambda p: frontend.adc_quantize(m, frontend.detector_voltage(m, p)), otypes=[int])(X)

    def inverse_transform(self, X):
        check_is_fitted(self, "model_")
        X = np.asarray(X)
        m = self.model_
        return np.vectorize(lambda c: frontend.code_to_dbm(m, c), otypes=[float])(X)
