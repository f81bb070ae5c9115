"""1-D log-Gabor iris codes and rotation-compensated Hamming matching.

The texture is averaged into radial bands, each band is filtered along the
angular axis with a one-sided log-Gabor transfer function and the complex
response is quantized to two sign bits per sample. Codes are compared by
fractional Hamming distance, minimized over circular column shifts.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (BadBandCount, DimensionMismatch, FingerprintMismatch, InvalidDimensions,
                     MalformedHeader, TruncatedData)

DEFAULT_MAX_SHIFT = 7

# filter responses this small are treated as exact zeros by the sign quantizer
_ZERO_TOL = 1e-12

MAGIC = b"IRCODE1\0"
_HEADER = struct.Struct("<8sHH16s")


@dataclass(frozen=True)
class EncoderParams:
    bands: int = 8
    wavelength: float = 18.0  # angular samples per cycle at the filter center
    sigma_on_f: float = 0.5

    @property
    def fingerprint(self):
        key = f"log-gabor|bands={self.bands}|wavelength={self.wavelength!r}|sigma_on_f={self.sigma_on_f!r}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IrisCode:
    bits: np.ndarray  # (bands, columns, 2) bool: real-sign, imaginary-sign
    fingerprint: str

    @property
    def bands(self):
        return self.bits.shape[0]

    @property
    def columns(self):
        return self.bits.shape[1]

    @property
    def size(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, IrisCode):
            return NotImplemented
        return self.fingerprint == other.fingerprint and np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True)
class MatchScore:
    distance: float
    best_shift: int


def log_gabor_transfer(n, wavelength, sigma_on_f):
    """One-sided log-Gabor transfer function over an ``n``-point FFT grid.

    Non-zero only for the positive frequencies ``k/n``, ``0 < k <= n/2``; the DC
    term is zero.
    """
    g = np.zeros(n)
    k = np.arange(1, n // 2 + 1)
    f = k / n
    f0 = 1.0 / wavelength
    g[k] = np.exp(-np.log(f / f0) ** 2 / (2 * np.log(sigma_on_f) ** 2))
    return g


def band_signals(values, bands):
    h, w = values.shape
    if bands <= 0 or h % bands:
        raise BadBandCount(f"{bands} bands do not divide {h} texture rows")
    return values.reshape(bands, h // bands, w).mean(axis=1)


def filter_responses(values, params=EncoderParams()):
    values = np.asarray(getattr(values, "values", values), dtype=float)
    if values.ndim != 2:
        raise InvalidDimensions(f"texture must be 2-D, got shape {values.shape}")
    signals = band_signals(values, params.bands)
    g = log_gabor_transfer(signals.shape[1], params.wavelength, params.sigma_on_f)
    return np.fft.ifft(np.fft.fft(signals, axis=1) * g, axis=1)


def encode(texture, params=EncoderParams()):
    resp = filter_responses(texture, params)
    re = np.where(np.abs(resp.real) <= _ZERO_TOL, 0.0, resp.real)
    im = np.where(np.abs(resp.imag) <= _ZERO_TOL, 0.0, resp.imag)
    bits = np.stack([re >= 0, im >= 0], axis=-1)
    return IrisCode(bits, params.fingerprint)


def shift_order(max_shift):
    """Shifts in tie-break preference order: 0, -1, +1, -2, +2, ..."""
    out = [0]
    for s in range(1, max_shift + 1):
        out += [-s, s]
    return out


def _check_pair(a, b, max_shift):
    if a.fingerprint != b.fingerprint:
        raise FingerprintMismatch(f"{a.fingerprint} != {b.fingerprint}")
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch(f"code shapes {a.bits.shape} and {b.bits.shape} differ")
    if max_shift < 0:
        raise ValueError("max_shift must be non-negative")


def match(a, b, max_shift=DEFAULT_MAX_SHIFT):
    """Minimum fractional Hamming distance between ``a`` and ``b`` rolled by ``s`` columns.

    ``best_shift`` is the ``s`` for which ``np.roll(b.bits, s, axis=1)`` lines up
    with ``a``; ties prefer the smallest ``|s|``, then the negative shift.
    """
    _check_pair(a, b, max_shift)
    best_count, best_shift = None, 0
    for s in shift_order(max_shift):
        count = int(np.count_nonzero(a.bits != np.roll(b.bits, s, axis=1)))
        if best_count is None or count < best_count:
            best_count, best_shift = count, s
    return MatchScore(best_count / a.size, best_shift)


def _pack(bits_stack):
    n = bits_stack.shape[0]
    packed = np.packbits(bits_stack.reshape(n, -1), axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view(np.uint64)


def match_matrix(codes_a, codes_b, max_shift=DEFAULT_MAX_SHIFT, rows_per_chunk=64):
    """All-pairs version of :func:`match`.

    Returns ``(distances, best_shifts)``, both shaped ``(len(codes_a), len(codes_b))``.
    """
    codes_a, codes_b = list(codes_a), list(codes_b)
    if not codes_a or not codes_b:
        return np.zeros((len(codes_a), len(codes_b))), np.zeros((len(codes_a), len(codes_b)), int)
    for c in codes_a + codes_b:
        _check_pair(codes_a[0], c, max_shift)
    a_bits = np.stack([c.bits for c in codes_a])
    b_bits = np.stack([c.bits for c in codes_b])
    pa = _pack(a_bits)
    shifts = shift_order(max_shift)
    counts = np.empty((len(shifts), len(codes_a), len(codes_b)), dtype=np.int64)
    for si, s in enumerate(shifts):
        pb = _pack(np.roll(b_bits, s, axis=2))
        for r0 in range(0, len(codes_a), rows_per_chunk):
            x = pa[r0:r0 + rows_per_chunk, None, :] ^ pb[None, :, :]
            counts[si, r0:r0 + rows_per_chunk] = np.bitwise_count(x).sum(axis=2, dtype=np.int64)
    best = counts.argmin(axis=0)
    best_counts = np.take_along_axis(counts, best[None], axis=0)[0]
    return best_counts / codes_a[0].size, np.asarray(shifts)[best]


# ---------------------------------------------------------------------------
# file format

def iriscode_to_bytes(code):
    header = _HEADER.pack(MAGIC, code.columns, code.bands, code.fingerprint.encode("ascii"))
    return header + np.packbits(code.bits.ravel(), bitorder="little").tobytes()


def iriscode_from_bytes(data):
    if len(data) < _HEADER.size:
        raise MalformedHeader("iris code file shorter than its header")
    magic, w, b, fp = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    nbits = 2 * w * b
    payload = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    if payload.size < (nbits + 7) // 8:
        raise TruncatedData(f"expected {(nbits + 7) // 8} payload bytes, got {payload.size}")
    bits = np.unpackbits(payload, bitorder="little", count=nbits).astype(bool)
    return IrisCode(bits.reshape(b, w, 2), fp.decode("ascii"))


def write_iriscode(path, code):
    with open(path, "wb") as fh:
        fh.write(iriscode_to_bytes(code))


def read_iriscode(path):
    with open(path, "rb") as fh:
        return iriscode_from_bytes(fh.read())
