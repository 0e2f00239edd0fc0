"""Link-level simulator for rate-splitting versus linearly precoded unicast/multicast.

Two single-antenna users are served by a two-antenna transmitter that
superposes one common stream and two private streams.  The package covers
channel generation, precoding, a polar/QAM/OFDM waveform, SIC decoding, rate
computation and the resulting multicast/unicast rate regions.
"""
from .calibration import ThresholdEntry, ThresholdTable, calibrate_thresholds
from .channel import PRESETS, ChannelConfig, ChannelPair, corrupt_csit, generate_channel_pair, preset
from .errors import CalibrationError, ConfigError, DegenerateGeometryError, InvalidMcsError, RsnoumError
from .link import StreamPlan, TrialOutcome, run_trial, run_trial_fast, sinr_values
from .precoder import PowerSplit, PrecoderSet, compute_precoders
from .rates import MessageSplit, RatePoint, StreamRates, empirical_stream_rates, mulp_point, noum_split
from .region import (
    RateRegion,
    Scenario,
    SweepConfig,
    best_mcs_at_t,
    build_region,
    lemma1_check,
    time_sharing_boundary,
)
from .waveform import MCS_TABLE, FrameConfig, McsLevel, mcs_params

__version__ = "0.1.0"
