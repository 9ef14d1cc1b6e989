"""Capacitive body-channel simulator: equivalent circuit, Rx/Tx chain, DAQ campaigns and analysis."""

from .analysis import (
    ComparisonReport,
    GainCurve,
    compare_campaigns,
    energy_per_bit,
    fluctuation_db,
    grand_mean_gap,
    mean_gap_db,
    peak,
    pearson,
)
from .calibrate import FitResult, FitSpec, fit, objective_rmse_db
from .campaign import (
    CampaignResult,
    SafetyPolicy,
    SamplePoint,
    SweepConfig,
    check_safety,
    frequency_grid,
    load_config,
    read_csv,
    run_campaign,
    write_csv,
)
from .channel import (
    ChannelParams,
    DaqMode,
    Scenario,
    build_channel,
    c_int_of_distance,
    canonical_scenarios,
    channel_gain_curve,
    channel_gain_db,
)
from .circuit import AcSolution, Element, Netlist, solve_ac, transfer_gain_db
from .estimator import ChannelGainRegressor, MeasurementChain
from .frontend import (
    RxFrontendModel,
    TxModel,
    adc_quantize,
    bandpass_gain_db,
    code_to_dbm,
    detector_voltage,
    rx_power_dbm,
    square_fundamental_peak,
)

__version__ = "0.1.0"
