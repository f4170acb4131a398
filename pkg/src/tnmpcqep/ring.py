"""Exact arithmetic in Z_{2^k} and the fixed-point encoding layered on it.

Values live in the unsigned residue ring modulo 2^k (k <= 64) and are
interpreted as two's-complement signed integers when decoding.  Vector
operations use numpy uint64 arrays, whose wraparound is exact modular
arithmetic; scalars are wrapped in RingValue for a typed public surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_K = 64


def ring_mask(k: int) -> int:
    """All-ones bit mask for a k-bit ring."""
    _check_k(k)
    return (1 << k) - 1


def _check_k(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_K:
        raise ValueError(f"ring width k must be an integer in [1, {MAX_K}], got {k!r}")


def as_ring_array(values, k: int = MAX_K) -> np.ndarray:
    """Coerce ints / sequences to a uint64 array reduced mod 2^k."""
    _check_k(k)
    arr = np.asarray(values)
    if arr.dtype == np.uint64:
        out = arr.copy()
    elif np.issubdtype(arr.dtype, np.integer):
        out = arr.astype(np.int64, copy=False).view(np.uint64).copy()
    elif arr.dtype == object:
        # python ints of arbitrary size: reduce before conversion
        mask = (1 << MAX_K) - 1
        out = np.array([int(v) & mask for v in arr.ravel()], dtype=np.uint64).reshape(arr.shape)
    else:
        raise TypeError(f"ring arrays take integer inputs, got dtype {arr.dtype}")
    if k < MAX_K:
        out &= np.uint64(ring_mask(k))
    return out


def radd(a: np.ndarray, b: np.ndarray, k: int = MAX_K) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = a + b
    if k < MAX_K:
        out &= np.uint64(ring_mask(k))
    return out


def rsub(a: np.ndarray, b: np.ndarray, k: int = MAX_K) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = a - b
    if k < MAX_K:
        out &= np.uint64(ring_mask(k))
    return out


def rmul(a: np.ndarray, b: np.ndarray, k: int = MAX_K) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = a * b
    if k < MAX_K:
        out &= np.uint64(ring_mask(k))
    return out


def rneg(a: np.ndarray, k: int = MAX_K) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = np.uint64(0) - a
    if k < MAX_K:
        out &= np.uint64(ring_mask(k))
    return out


def to_signed(a: np.ndarray, k: int = MAX_K) -> np.ndarray:
    """Two's-complement interpretation of k-bit residues, as int64."""
    if k == MAX_K:
        return a.view(np.int64) if a.dtype == np.uint64 else np.asarray(a, np.int64)
    half = np.uint64(1 << (k - 1))
    signed = a.astype(np.int64)
    step = np.int64(1 << (k - 1))  # subtract twice: 2^k itself can overflow int64
    return np.where(a >= half, signed - step - step, signed)


def from_signed(a: np.ndarray, k: int = MAX_K) -> np.ndarray:
    return as_ring_array(np.asarray(a, dtype=np.int64), k)


@dataclass(frozen=True)
class RingValue:
    """One element of Z_{2^k}; ``value`` is the canonical residue in [0, 2^k)."""

    value: int
    k: int = MAX_K

    def __post_init__(self):
        _check_k(self.k)
        object.__setattr__(self, "value", int(self.value) & ring_mask(self.k))

    @property
    def signed(self) -> int:
        v = self.value
        return v - (1 << self.k) if v >= (1 << (self.k - 1)) else v

    def _coerced(self, other) -> "RingValue":
        if isinstance(other, RingValue):
            if other.k != self.k:
                raise ValueError(f"mixed ring widths: {self.k} vs {other.k}")
            return other
        return RingValue(int(other), self.k)

    def __add__(self, other):
        return ring_add(self, self._coerced(other))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerced(other)
        return RingValue(self.value - o.value, self.k)

    def __neg__(self):
        return RingValue(-self.value, self.k)

    def __mul__(self, other):
        return ring_mul(self, self._coerced(other))

    __rmul__ = __mul__


def ring_add(a: RingValue, b: RingValue) -> RingValue:
    if a.k != b.k:
        raise ValueError(f"mixed ring widths: {a.k} vs {b.k}")
    return RingValue(a.value + b.value, a.k)


def ring_mul(a: RingValue, b: RingValue) -> RingValue:
    if a.k != b.k:
        raise ValueError(f"mixed ring widths: {a.k} vs {b.k}")
    return RingValue(a.value * b.value, a.k)


@dataclass(frozen=True)
class FixedPointCodec:
    """Scale-2^F two's-complement encoding of reals into Z_{2^k}.

    encode rounds half away from zero; representable magnitudes are
    |v| < 2^(k-1-F).  decode maps residues >= 2^(k-1) to negatives.
    """

    k: int = MAX_K
    fraction_bits: int = 20

    def __post_init__(self):
        _check_k(self.k)
        if not 0 < self.fraction_bits < self.k:
            raise ValueError(
                f"fraction_bits must satisfy 0 < F < k, got F={self.fraction_bits}, k={self.k}"
            )

    @property
    def scale(self) -> int:
        return 1 << self.fraction_bits

    @property
    def max_abs(self) -> float:
        """Exclusive bound on representable magnitude."""
        return float(2 ** (self.k - 1 - self.fraction_bits))

    @property
    def ulp(self) -> float:
        return 2.0 ** (-self.fraction_bits)

    def encode_array(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("cannot encode non-finite values")
        if np.any(np.abs(v) >= self.max_abs):
            bad = float(np.max(np.abs(v)))
            raise ValueError(
                f"value magnitude {bad} outside representable range |v| < {self.max_abs} "
                f"(k={self.k}, F={self.fraction_bits})"
            )
        # scaling by a power of two is exact in binary floating point
        scaled = v * float(self.scale)
        magnitude = np.floor(np.abs(scaled) + 0.5)
        if np.any(magnitude >= float(1 << (self.k - 1)) + 1):
            raise ValueError("rounded magnitude does not fit the signed ring range")
        signed = np.where(scaled < 0, -magnitude, magnitude)
        return from_signed(signed.astype(np.int64), self.k)

    def decode_array(self, residues: np.ndarray) -> np.ndarray:
        arr = as_ring_array(residues, self.k)
        return to_signed(arr, self.k).astype(np.float64) / float(self.scale)

    def encode(self, value: float) -> RingValue:
        return RingValue(int(self.encode_array(np.asarray(value, dtype=np.float64))[()]), self.k)

    def decode(self, residue) -> float:
        if isinstance(residue, RingValue):
            if residue.k != self.k:
                raise ValueError(f"codec k={self.k} cannot decode RingValue with k={residue.k}")
            residue = residue.value
        return float(self.decode_array(np.asarray(residue))[()])
