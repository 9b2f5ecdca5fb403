"""Statistical characterization and ARIMA-GARCH modelling of seismic noise records."""
from .arima import ArimaModel, FitDiagnostics, determine_d, fit_arima, fit_arma, select_order, simulate_arima
from .errors import (
    ArgumentError,
    DegenerateInputError,
    EstimationError,
    FetchError,
    ParseError,
    SeisnoiseError,
)
from .garch import GarchModel, fit_garch, select_garch, simulate_garch, validate_garch
from .nonlinearity import (
    CorrelationDimEstimate,
    EmbeddingConfig,
    SurrogateEnsemble,
    aaft_surrogate,
    correlation_dimension,
    ft_surrogate,
    linearity_test,
    surrogate_ensemble,
)
from .pipeline import CharacterizationReport, PipelineConfig, batch_characterize, characterize
from .series import CorrelationSequence, Series, Spectrum, acf, detrend, difference, pacf, periodogram
from .synth import ProcessSpec, generate

__version__ = "0.1.0"
