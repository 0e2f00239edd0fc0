"""Per-stream bit pipeline: MCS table, polar coding, QAM, OFDM."""
from .mcs import BANDWIDTH_MHZ, MCS_TABLE, FrameConfig, McsLevel, mcs_params
from .ofdm import PILOT_SEQUENCE, ofdm_assemble, ofdm_extract, ofdm_pilots, stream_pilots, stream_scrambler
from .polar import PolarCode, polar_code, polar_decode, polar_encode
from .qam import constellation, qam_demodulate_llr, qam_modulate

__all__ = [
    "BANDWIDTH_MHZ",
    "MCS_TABLE",
    "FrameConfig",
    "McsLevel",
    "PILOT_SEQUENCE",
    "PolarCode",
    "constellation",
    "mcs_params",
    "ofdm_assemble",
    "ofdm_extract",
    "ofdm_pilots",
    "polar_code",
    "polar_decode",
    "polar_encode",
    "qam_demodulate_llr",
    "qam_modulate",
    "stream_code",
    "stream_pilots",
    "stream_scrambler",
    "stream_waveform",
]


def stream_code(mcs: McsLevel, frame: FrameConfig = FrameConfig()) -> PolarCode:
    """The polar code carrying one stream's frame at ``mcs``."""
    return polar_code(frame.coded_bits(mcs), frame.payload_bits(mcs))


def stream_waveform(bits, mcs: McsLevel, frame: FrameConfig = FrameConfig(),
                    pilot_seq=PILOT_SEQUENCE, scrambler=None):
    """Encode, map and OFDM-modulate one stream's payload.

    ``scrambler``, if given, multiplies the data symbols elementwise.
    """
    code = stream_code(mcs, frame)
    syms = qam_modulate(code.encode(bits), mcs.m)
    if scrambler is not None:
        syms = syms * scrambler
    return ofdm_assemble(syms, frame, pilot_seq)
