"""Realized EGARCH volatility modelling: realized measures, QML estimation of
GARCH-family and realized EGARCH models, forecasting and evaluation."""
from .diagnostics import DescriptiveReport, autocorrelation, describe, jarque_bera, ljung_box
from .errors import (
    AlignmentError,
    BandwidthError,
    ConditioningError,
    ConvergenceError,
    DegenerateVarianceError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    RegarchError,
    ValidationError,
)
from .estimation import FitOptions, FitResult, fit, hessian_std_errors, information_criteria, robust_std_errors
from .forecast import (
    ForecastOptions,
    ForecastSeries,
    LossReport,
    evaluate,
    forecast_recursive,
    forecast_rolling,
    mse,
    out_of_sample_loglik,
    qlike,
)
from .measures import (
    ProxyAdjustment,
    RangeScaling,
    apply_proxy,
    measure_series,
    proxy_adjustment,
    realized_kernel,
    realized_range_volatility,
    realized_variance,
    squared_return,
)
from .models import (
    EgarchParams,
    FilterOutput,
    GarchParams,
    GjrParams,
    RegarchParams,
    egarch_filter,
    garch_filter,
    gjr_filter,
    regarch_filter,
    regarch_reduced_recursion,
)
from .series import AlignedDataset, DailyReturnSeries, IntradayGrid, RealizedMeasureSeries, align, demean
from .simulation import (
    EfficiencyReport,
    HestonParams,
    SimConfig,
    SimOutput,
    calibrate_lambda,
    efficiency_report,
    range_efficiency,
    simulate_intraday,
    simulate_model,
)

__version__ = "0.1.0"
