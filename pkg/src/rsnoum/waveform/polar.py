"""Shortened polar codes with CRC-aided successive-cancellation list decoding.

Encoding uses ``x = u G`` with ``G`` the n-fold Kronecker power of
``[[1, 0], [1, 1]]`` in natural (not bit-reversed) order.  Codewords shorter
than a power of two are obtained by shortening the tail: every input index
``>= n`` is frozen to zero, which forces the last ``N - n`` code bits to zero
as well, so they are dropped at the transmitter and re-inserted as certain
zeros at the receiver.

LLRs follow the ``log P(b=0) / P(b=1)`` convention throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
from scipy import optimize

__all__ = [
    "CRC11_POLY",
    "PolarCode",
    "crc_attach",
    "crc_check",
    "design_snr_db",
    "ga_reliability",
    "polar_code",
    "polar_decode",
    "polar_encode",
    "polar_transform",
]

# x^11 + x^10 + x^9 + x^5 + 1, highest power first
CRC11_POLY = np.array([1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1], dtype=np.uint8)

_KNOWN_LLR = 1e12
_LLR_CLIP = 1e9


@numba.njit(cache=True)
def _crc_register(bits, poly):
    deg = poly.size - 1
    reg = np.zeros(deg, dtype=np.uint8)
    for b in bits:
        fb = b ^ reg[0]
        for j in range(deg - 1):
            reg[j] = reg[j + 1] ^ (fb & poly[j + 1])
        reg[deg - 1] = fb & poly[deg]
    return reg


def crc_attach(bits: np.ndarray, poly: np.ndarray = CRC11_POLY) -> np.ndarray:
    """Return ``bits`` followed by its CRC remainder."""
    bits = np.asarray(bits, dtype=np.uint8)
    if poly.size <= 1:
        return bits.copy()
    return np.concatenate([bits, _crc_register(bits, poly)])


def crc_check(bits: np.ndarray, poly: np.ndarray = CRC11_POLY) -> bool:
    """True when ``bits`` (payload followed by CRC) has a zero remainder."""
    if poly.size <= 1:
        return True
    return not np.any(_crc_register(np.asarray(bits, dtype=np.uint8), poly))


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Multiply by the polar generator matrix over GF(2); self-inverse."""
    x = np.array(u, dtype=np.uint8)
    size = x.size
    half = 1
    while half < size:
        view = x.reshape(-1, 2, half)
        view[:, 0, :] ^= view[:, 1, :]
        half *= 2
    return x


# -- code construction -------------------------------------------------------

def _log_phi(x: np.ndarray) -> np.ndarray:
    # Chung's approximation of the Gaussian-approximation phi function, in logs.
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    small = (x > 0) & (x < 10)
    big = x >= 10
    out[small] = -0.4527 * x[small] ** 0.86 + 0.0218
    big &= np.isfinite(x)
    xb = x[big]
    out[big] = 0.5 * np.log(np.pi / xb) - xb / 4 + np.log1p(-10 / (7 * xb))
    out[np.isposinf(x)] = -np.inf
    return out


def _inv_log_phi(target: np.ndarray) -> np.ndarray:
    # log_phi is strictly decreasing on (0, inf); vectorised bisection.
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.full_like(target, 1.0)
    while True:
        grow = _log_phi(hi) > target
        if not grow[np.isfinite(target)].any():
            break
        hi = np.where(grow & np.isfinite(target), hi * 2, hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        above = _log_phi(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = 0.5 * (lo + hi)
    out[np.isneginf(target)] = np.inf
    out[target >= 0] = 0.0
    return out


def ga_reliability(channel_means: np.ndarray) -> np.ndarray:
    """Mean LLR of every synthetic bit channel under the Gaussian approximation.

    ``channel_means`` holds the mean LLR of each code bit (``inf`` for bits
    known at the receiver).  Returns means for the input bits ``u_0 .. u_{N-1}``
    in decoding order.
    """
    nodes = np.asarray(channel_means, dtype=float)[None, :]
    while nodes.shape[1] > 1:
        half = nodes.shape[1] // 2
        a, b = nodes[:, :half], nodes[:, half:]
        la, lb = _log_phi(a), _log_phi(b)
        with np.errstate(divide="ignore"):
            log_target = np.logaddexp(la, lb + np.log1p(-np.exp(la)))
        left = _inv_log_phi(log_target)
        right = a + b
        nodes = np.stack([left, right], axis=1).reshape(-1, half)
    return nodes[:, 0]


def _biawgn_capacity(esn0: float) -> float:
    # Capacity of BPSK over real AWGN; LLR ~ N(mu, 2 mu), mu = 4 Es/N0.
    mu = 4 * esn0
    z, w = np.polynomial.hermite_e.hermegauss(80)
    llr = mu + np.sqrt(2 * mu) * z
    return 1 - np.sum(w * np.logaddexp(0, -llr)) / np.sqrt(2 * np.pi) / np.log(2)


@lru_cache(maxsize=None)
def design_snr_db(rate: float, margin_db: float = 1.0) -> float:
    """Es/N0 (dB) used for code construction at a given code rate.

    The BPSK capacity limit for ``rate`` plus a fixed finite-length margin.
    """
    rate = min(max(rate, 1e-3), 0.999)
    limit = optimize.brentq(lambda s: _biawgn_capacity(10 ** (s / 10)) - rate, -30, 30)
    return float(limit + margin_db)


# -- SCL decoder -------------------------------------------------------------

@numba.njit(cache=True)
def _writable(ptr, ref, depth, path, L):
    row = ptr[depth, path]
    if ref[depth, row] == 1:
        return row
    ref[depth, row] -= 1
    for r in range(L):
        if ref[depth, r] == 0:
            ref[depth, r] = 1
            ptr[depth, path] = r
            return r
    return -1


def node_schedule(frozen: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the decoding tree into maximal all-frozen / all-information nodes.

    Returns per node its depth, first leaf index and whether it is all-information.
    """
    frozen = np.asarray(frozen, dtype=bool)
    m = int(np.log2(frozen.size))
    depth, first, rate1 = [], [], []

    def visit(d: int, start: int) -> None:
        leaves = frozen[start:start + (frozen.size >> d)]
        if leaves.all() or not leaves.any():
            depth.append(d)
            first.append(start)
            rate1.append(not leaves.any())
            return
        half = frozen.size >> (d + 1)
        visit(d + 1, start)
        visit(d + 1, start + half)

    visit(0, 0)
    assert (1 << m) == frozen.size
    return np.array(depth, dtype=np.int64), np.array(first, dtype=np.int64), np.array(rate1, dtype=np.bool_)


@numba.njit(cache=True)
def _scl_kernel(llr, node_depth, node_first, node_rate1, L):
    N = llr.size
    m = 0
    while (1 << m) < N:
        m += 1
    off = np.zeros(m + 2, dtype=np.int64)
    for d in range(m + 1):
        off[d + 1] = off[d] + (N >> d)
    total = off[m + 1]
    alpha = np.zeros((L, total))
    beta = np.zeros((L, total), dtype=np.uint8)
    a_ptr = np.zeros((m + 1, L), dtype=np.int64)
    b_ptr = np.zeros((m + 1, L), dtype=np.int64)
    a_ref = np.zeros((m + 1, L), dtype=np.int64)
    b_ref = np.zeros((m + 1, L), dtype=np.int64)
    active = np.zeros(L, dtype=np.bool_)
    pm = np.zeros(L)
    final = np.zeros((L, N), dtype=np.uint8)
    nodebits = np.zeros((L, N), dtype=np.uint8)
    weak = np.zeros((L, L), dtype=np.int64)
    buf_a = np.zeros(N, dtype=np.uint8)
    buf_b = np.zeros(N, dtype=np.uint8)
    cand = np.zeros(2 * L)
    keep = np.zeros((L, 2), dtype=np.bool_)
    clone = np.zeros(L, dtype=np.bool_)
    flip = np.zeros(L, dtype=np.bool_)

    active[0] = True
    for d in range(m + 1):
        a_ref[d, 0] = 1
        b_ref[d, 0] = 1

    for node in range(node_depth.size):
        nd = node_depth[node]
        phi = node_first[node]
        size_n = N >> nd
        if phi == 0:
            start = 1
        else:
            tz = 0
            while (phi >> tz) & 1 == 0:
                tz += 1
            start = m - tz

        # LLRs from the branching point down to this node
        for p in range(L):
            if not active[p]:
                continue
            for d in range(start, nd + 1):
                size = N >> d
                row = _writable(a_ptr, a_ref, d, p, L)
                out = alpha[row, off[d]:off[d] + size]
                if d == 1:
                    pa = llr[:size]
                    pb = llr[size:2 * size]
                else:
                    prow = a_ptr[d - 1, p]
                    pa = alpha[prow, off[d - 1]:off[d - 1] + size]
                    pb = alpha[prow, off[d - 1] + size:off[d - 1] + 2 * size]
                if d == start and phi != 0:
                    left = beta[b_ptr[d, p], off[d]:off[d] + size]
                    for j in range(size):
                        out[j] = pb[j] - pa[j] if left[j] else pb[j] + pa[j]
                else:
                    for j in range(size):
                        a = pa[j]
                        b = pb[j]
                        mag = min(abs(a), abs(b))
                        out[j] = -mag if (a < 0) != (b < 0) else mag

        if not node_rate1[node]:
            for p in range(L):
                if not active[p]:
                    continue
                if nd == 0:
                    lv = llr
                else:
                    lv = alpha[a_ptr[nd, p], off[nd]:off[nd] + size_n]
                acc = 0.0
                for j in range(size_n):
                    if lv[j] < 0:
                        acc -= lv[j]
                    nodebits[p, j] = 0
                pm[p] += acc
        else:
            steps = min(L - 1, size_n)
            for p in range(L):
                if not active[p]:
                    continue
                if nd == 0:
                    lv = llr
                else:
                    lv = alpha[a_ptr[nd, p], off[nd]:off[nd] + size_n]
                for j in range(size_n):
                    nodebits[p, j] = 1 if lv[j] < 0 else 0
                order = np.argsort(np.abs(lv), kind="mergesort")
                for s in range(steps):
                    weak[p, s] = order[s]
            for s in range(steps):
                n_act = 0
                for p in range(L):
                    if active[p]:
                        n_act += 1
                        if nd == 0:
                            w = abs(llr[weak[p, s]])
                        else:
                            w = abs(alpha[a_ptr[nd, p], off[nd] + weak[p, s]])
                        cand[2 * p] = pm[p]
                        cand[2 * p + 1] = pm[p] + w
                    else:
                        cand[2 * p] = np.inf
                        cand[2 * p + 1] = np.inf
                n_keep = min(2 * n_act, L)
                order2 = np.argsort(cand, kind="mergesort")
                for p in range(L):
                    keep[p, 0] = False
                    keep[p, 1] = False
                for i in range(n_keep):
                    c = order2[i]
                    keep[c // 2, c % 2] = True
                for p in range(L):
                    if active[p] and not keep[p, 0] and not keep[p, 1]:
                        active[p] = False
                        for d in range(m + 1):
                            a_ref[d, a_ptr[d, p]] -= 1
                            b_ref[d, b_ptr[d, p]] -= 1
                for p in range(L):
                    clone[p] = False
                    flip[p] = False
                    if not active[p]:
                        continue
                    if keep[p, 0] and keep[p, 1]:
                        clone[p] = True
                    elif keep[p, 1]:
                        flip[p] = True
                        pm[p] = cand[2 * p + 1]
                for p in range(L):
                    if flip[p]:
                        nodebits[p, weak[p, s]] ^= 1
                    if not clone[p]:
                        continue
                    q = 0
                    while active[q]:
                        q += 1
                    active[q] = True
                    for d in range(m + 1):
                        a_ptr[d, q] = a_ptr[d, p]
                        b_ptr[d, q] = b_ptr[d, p]
                        a_ref[d, a_ptr[d, p]] += 1
                        b_ref[d, b_ptr[d, p]] += 1
                    for j in range(size_n):
                        nodebits[q, j] = nodebits[p, j]
                    for j in range(steps):
                        weak[q, j] = weak[p, j]
                    nodebits[q, weak[q, s]] ^= 1
                    pm[q] = cand[2 * p + 1]

        # partial sums back up the tree
        for p in range(L):
            if not active[p]:
                continue
            cur = buf_a
            nxt = buf_b
            for j in range(size_n):
                cur[j] = nodebits[p, j]
            d = nd
            size = size_n
            while True:
                if d == 0:
                    for j in range(size):
                        final[p, j] = cur[j]
                    break
                if (phi >> (m - d)) & 1 == 0:
                    row = _writable(b_ptr, b_ref, d, p, L)
                    bo = off[d]
                    for j in range(size):
                        beta[row, bo + j] = cur[j]
                    break
                brow = b_ptr[d, p]
                bo = off[d]
                for j in range(size):
                    nxt[j] = beta[brow, bo + j] ^ cur[j]
                    nxt[j + size] = cur[j]
                tmp = cur
                cur = nxt
                nxt = tmp
                size *= 2
                d -= 1
    return final, pm, active


@numba.njit(cache=True)
def _select_path(final, pm, active, info_idx, poly, check_crc):
    L, N = final.shape
    best = -1
    best_ok = False
    order = np.argsort(pm)
    for i in range(L):
        p = order[i]
        if not active[p]:
            continue
        if best < 0:
            best = p
        if not check_crc:
            best_ok = True
            break
        # u = x G (G is an involution)
        u = final[p].copy()
        half = 1
        while half < N:
            for s in range(0, N, 2 * half):
                for j in range(half):
                    u[s + j] ^= u[s + j + half]
            half *= 2
        reg = _crc_register(u[info_idx], poly)
        if not np.any(reg):
            best = p
            best_ok = True
            break
    return best, best_ok


@dataclass(frozen=True)
class PolarCode:
    """A shortened polar code carrying ``k`` payload bits plus a CRC in ``n`` code bits."""

    n: int
    k: int
    crc_len: int = 11
    list_size: int = 8
    design_margin_db: float = 1.0
    mother_n: int = field(init=False)
    info_idx: np.ndarray = field(init=False, repr=False)
    frozen: np.ndarray = field(init=False, repr=False)
    schedule: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.crc_len not in (0, 11):
            raise ValueError("crc_len must be 0 or 11")
        if self.k < 1 or self.k + self.crc_len > self.n:
            raise ValueError(f"need 1 <= k and k + crc_len <= n, got n={self.n}, k={self.k}")
        mother = 1
        while mother < self.n:
            mother *= 2
        n_info = self.k + self.crc_len
        esn0 = 10 ** (design_snr_db(n_info / self.n, self.design_margin_db) / 10)
        means = np.full(mother, 4 * esn0)
        means[self.n:] = np.inf
        rel = ga_reliability(means)
        rel[self.n:] = -np.inf  # shortened inputs are always frozen
        order = np.lexsort((np.arange(mother), -rel))
        info = np.sort(order[:n_info])
        frozen = np.ones(mother, dtype=np.bool_)
        frozen[info] = False
        object.__setattr__(self, "mother_n", mother)
        object.__setattr__(self, "info_idx", info.astype(np.int64))
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "schedule", node_schedule(frozen))

    @property
    def poly(self) -> np.ndarray:
        return CRC11_POLY if self.crc_len else np.zeros(1, dtype=np.uint8)

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape != (self.k,):
            raise ValueError(f"expected {self.k} info bits, got shape {info_bits.shape}")
        u = np.zeros(self.mother_n, dtype=np.uint8)
        u[self.info_idx] = crc_attach(info_bits, self.poly)
        return polar_transform(u)[: self.n]

    def decode_codeword(self, llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
        """Run CA-SCL; return ``(payload bits, codeword estimate, crc_ok)``."""
        llrs = np.asarray(llrs, dtype=float)
        if llrs.shape != (self.n,):
            raise ValueError(f"expected {self.n} LLRs, got shape {llrs.shape}")
        full = np.full(self.mother_n, _KNOWN_LLR)
        full[: self.n] = np.clip(llrs, -_LLR_CLIP, _LLR_CLIP)
        final, pm, active = _scl_kernel(full, *self.schedule, self.list_size)
        best, ok = _select_path(final, pm, active, self.info_idx, self.poly, self.crc_len > 0)
        codeword = final[best]
        u = polar_transform(codeword)
        return u[self.info_idx][: self.k], codeword[: self.n], bool(ok)

    def decode(self, llrs: np.ndarray) -> tuple[np.ndarray, bool]:
        bits, _, ok = self.decode_codeword(llrs)
        return bits, ok


@lru_cache(maxsize=64)
def polar_code(n: int, k: int, crc_len: int = 11, list_size: int = 8) -> PolarCode:
    """Cached code construction; tables are immutable once built."""
    return PolarCode(n, k, crc_len=crc_len, list_size=list_size)


def polar_encode(info_bits: np.ndarray, n: int, k: int, crc_len: int = 11) -> np.ndarray:
    return polar_code(n, k, crc_len).encode(info_bits)


def polar_decode(llrs: np.ndarray, n: int, k: int, crc_len: int = 11,
                 list_size: int = 8) -> tuple[np.ndarray, bool]:
    return polar_code(n, k, crc_len, list_size).decode(llrs)
