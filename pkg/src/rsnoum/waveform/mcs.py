"""MCS table and OFDM frame parameters of the measurement setup."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import InvalidMcsError

BANDWIDTH_MHZ = 12.0


@dataclass(frozen=True)
class McsLevel:
    index: int
    m: int
    r: Fraction
    label: str

    @property
    def spectral_efficiency(self) -> float:
        """Bits/s/Hz at error-free decoding, ``m * r``."""
        return float(self.m * self.r)

    @property
    def max_data_rate_mbps(self) -> float:
        return BANDWIDTH_MHZ * self.spectral_efficiency


_TABLE = (
    (1, Fraction(1, 2), "BPSK"),
    (1, Fraction(3, 4), "BPSK"),
    (2, Fraction(1, 2), "QPSK"),
    (2, Fraction(3, 4), "QPSK"),
    (4, Fraction(1, 2), "16QAM"),
    (4, Fraction(3, 4), "16QAM"),
    (6, Fraction(2, 3), "64QAM"),
    (6, Fraction(3, 4), "64QAM"),
    (8, Fraction(3, 4), "256QAM"),
    (8, Fraction(5, 6), "256QAM"),
)

MCS_TABLE: tuple[McsLevel, ...] = tuple(
    McsLevel(i, m, r, label) for i, (m, r, label) in enumerate(_TABLE)
)


def mcs_params(index: int) -> McsLevel:
    if not isinstance(index, int) or isinstance(index, bool) or not 0 <= index < len(MCS_TABLE):
        raise InvalidMcsError(f"MCS index must be an integer in 0..{len(MCS_TABLE) - 1}, got {index!r}")
    return MCS_TABLE[index]


@dataclass(frozen=True)
class FrameConfig:
    n_fft: int = 64
    n_data: int = 48
    n_pilot: int = 4
    n_guard: int = 12
    cp_len: int = 16
    payload_symbols: int = 50

    def __post_init__(self) -> None:
        if self.n_data + self.n_pilot + self.n_guard != self.n_fft:
            raise ValueError("n_data + n_pilot + n_guard must equal n_fft")
        if min(self.n_data, self.n_pilot, self.cp_len, self.payload_symbols) < 0 or self.n_data == 0:
            raise ValueError("frame sizes must be non-negative with at least one data subcarrier")

    @property
    def samples_per_symbol(self) -> int:
        return self.n_fft + self.cp_len

    @property
    def n_samples(self) -> int:
        return self.samples_per_symbol * self.payload_symbols

    @property
    def occupied_fraction(self) -> float:
        return (self.n_data + self.n_pilot) / self.n_fft

    def coded_bits(self, mcs: McsLevel) -> int:
        """Code bits per frame for one stream, ``n_data * m * payload_symbols``."""
        return self.n_data * mcs.m * self.payload_symbols

    def payload_bits(self, mcs: McsLevel, crc_len: int = 11) -> int:
        """Payload bits ``k = n r - crc_len``; ``n r`` must be integral."""
        nr = self.coded_bits(mcs) * mcs.r
        if nr.denominator != 1:
            raise ValueError(f"n * r is not integral for MCS {mcs.index} with this frame")
        return int(nr) - crc_len
