"""Stochastic number representation and combinational bit-stream arithmetic.

Numbers are carried as packed random bit streams. The fraction of ones,
x = popcount/length, encodes the value: unipolar streams represent x in
[0, 1], bipolar streams represent 2x - 1 in [-1, 1]. Multiplication is a
single XNOR (bipolar) or AND (unipolar) per bit position; scaled addition
is a per-position multiplexer.

All operands of a multiply or add must come from independent substreams:
correlated inputs silently corrupt products (xnor_mul(a, a) decodes to +1,
not decode(a)**2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .rng import RngState

__all__ = [
    "Priori",
    "BitStream",
    "LfsrState",
    "encode",
    "decode",
    "xnor_mul",
    "and_mul",
    "scaled_add",
    "negate",
    "lfsr_stream",
    "lfsr_period",
]

# Ones per byte value, for word-level popcounts of packed streams.
_POPCOUNT8 = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(axis=1)


class Priori(enum.Enum):
    """Value range convention of a stream."""

    UNIPOLAR = "unipolar"  # [0, 1]
    BIPOLAR = "bipolar"    # [-1, 1]


def _mask_tail(packed: np.ndarray, length: int) -> np.ndarray:
    """Zero the unused bits of the last byte so popcount stays honest."""
    tail = length % 8
    if tail and packed.size:
        packed[-1] &= np.uint8((0xFF << (8 - tail)) & 0xFF)  # np.packbits is MSB-first
    return packed


@dataclass(eq=False)
class BitStream:
    """A packed stochastic bit stream with its length and priori."""

    bits: np.ndarray  # packed uint8, MSB-first within each byte
    length: int
    priori: Priori

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("bit stream length must be >= 1")
        expected = (self.length + 7) // 8
        if self.bits.dtype != np.uint8 or self.bits.size != expected:
            raise ValueError("packed buffer does not match the stated length")

    @classmethod
    def from_bools(cls, values: np.ndarray, priori: Priori) -> "BitStream":
        values = np.asarray(values, dtype=bool)
        packed = np.packbits(values)
        return cls(_mask_tail(packed, values.size), values.size, priori)

    @classmethod
    def zeros(cls, length: int, priori: Priori) -> "BitStream":
        return cls(np.zeros((length + 7) // 8, dtype=np.uint8), length, priori)

    @classmethod
    def ones(cls, length: int, priori: Priori) -> "BitStream":
        packed = np.full((length + 7) // 8, 0xFF, dtype=np.uint8)
        return cls(_mask_tail(packed, length), length, priori)

    def popcount(self) -> int:
        return int(_POPCOUNT8[self.bits].sum())

    def to_bools(self) -> np.ndarray:
        return np.unpackbits(self.bits)[: self.length].astype(bool)

    def same_bits(self, other: "BitStream") -> bool:
        return (
            self.length == other.length
            and self.priori is other.priori
            and np.array_equal(self.bits, other.bits)
        )

    def __len__(self):
        return self.length


def _priori_probability(value: float, priori: Priori) -> float:
    """Map a represented value to its per-bit one-probability."""
    if priori is Priori.UNIPOLAR:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"unipolar value {value} outside [0, 1]")
        return float(value)
    if not -1.0 <= value <= 1.0:
        raise ValueError(f"bipolar value {value} outside [-1, 1]")
    return (float(value) + 1.0) / 2.0


def encode(value: float, length: int, priori: Priori, rng: RngState) -> BitStream:
    """Encode a value as independent Bernoulli draws at the priori's probability."""
    p = _priori_probability(value, priori)
    draws = rng.generator.random(length) < p
    return BitStream.from_bools(draws, priori)


def decode(stream: BitStream) -> float:
    """Mean bit value for unipolar streams, 2x - 1 for bipolar.

    The bipolar value is formed as (2*popcount - N) / N so that
    complementary streams decode to exact floating-point negatives.
    """
    if stream.priori is Priori.UNIPOLAR:
        return stream.popcount() / stream.length
    return (2 * stream.popcount() - stream.length) / stream.length


def _check_pair(a: BitStream, b: BitStream, op: str, priori: Priori | None):
    if a.length != b.length:
        raise ValueError(f"{op}: stream lengths differ ({a.length} vs {b.length})")
    if priori is not None and (a.priori is not priori or b.priori is not priori):
        raise ValueError(f"{op}: both operands must be {priori.value}")


def xnor_mul(a: BitStream, b: BitStream) -> BitStream:
    """Bipolar multiply: bitwise XNOR of two independent streams."""
    _check_pair(a, b, "xnor_mul", Priori.BIPOLAR)
    bits = _mask_tail(np.bitwise_not(a.bits ^ b.bits), a.length)
    return BitStream(bits, a.length, Priori.BIPOLAR)


def and_mul(a: BitStream, b: BitStream) -> BitStream:
    """Unipolar multiply: bitwise AND of two independent streams."""
    _check_pair(a, b, "and_mul", Priori.UNIPOLAR)
    return BitStream(a.bits & b.bits, a.length, Priori.UNIPOLAR)


def scaled_add(a: BitStream, b: BitStream, select: BitStream) -> BitStream:
    """Multiplexed add: take a's bit where select is 1, else b's bit.

    With an independent select stream of probability s the result decodes
    to s*decode(a) + (1-s)*decode(b); s = 0.5 gives (a + b) / 2.
    """
    _check_pair(a, b, "scaled_add", None)
    if a.priori is not b.priori:
        raise ValueError("scaled_add: operand prioris differ")
    if select.length != a.length:
        raise ValueError(
            f"scaled_add: select length {select.length} != operand length {a.length}"
        )
    bits = (select.bits & a.bits) | (~select.bits & b.bits)
    return BitStream(_mask_tail(bits, a.length), a.length, a.priori)


def negate(a: BitStream) -> BitStream:
    """Bipolar negation: bitwise NOT, exact (decode flips sign bit-exactly)."""
    if a.priori is not Priori.BIPOLAR:
        raise ValueError("negate: stream must be bipolar")
    bits = _mask_tail(np.bitwise_not(a.bits), a.length)
    return BitStream(bits, a.length, Priori.BIPOLAR)


# ---------------------------------------------------------------------------
# Conventional-CMOS comparison generator: maximal-length LFSR + comparator.
# ---------------------------------------------------------------------------

# Width-16 feedback taps giving the full 2^16 - 1 period (XAPP052 tap table).
DEFAULT_LFSR_TAPS = (16, 15, 13, 4)


@dataclass
class LfsrState:
    """Fibonacci LFSR over ``width`` bits; taps are 1-indexed positions."""

    width: int = 16
    taps: tuple = DEFAULT_LFSR_TAPS
    register: int = 0xACE1

    def __post_init__(self):
        self.taps = tuple(self.taps)
        mask = (1 << self.width) - 1
        self.register &= mask
        if self.register == 0:
            raise ValueError("LFSR register must not be all-zero")
        if not self.taps or any(t < 1 or t > self.width for t in self.taps):
            raise ValueError(f"taps must lie in [1, {self.width}]")

    def step(self) -> int:
        """Return the current register word, then advance one shift."""
        word = self.register
        feedback = 0
        for t in self.taps:
            feedback ^= (self.register >> (t - 1)) & 1
        self.register = ((self.register << 1) | feedback) & ((1 << self.width) - 1)
        return word

    def words(self, count: int) -> np.ndarray:
        return np.fromiter((self.step() for _ in range(count)), dtype=np.int64, count=count)


def lfsr_stream(value: float, length: int, priori: Priori, lfsr: LfsrState) -> BitStream:
    """Generate a stream by comparing LFSR words against the target probability.

    Bit i is 1 iff word_i / 2**width < p. Over one full period of a
    maximal-length LFSR the popcount is within one bit of p * (2**width - 1).
    """
    p = _priori_probability(value, priori)
    threshold = p * (1 << lfsr.width)
    draws = lfsr.words(length) < threshold
    return BitStream.from_bools(draws, priori)


def lfsr_period(lfsr: LfsrState, limit: int | None = None) -> int:
    """Number of steps until the register state recurs (full period check).

    Maximal-length taps return 2**width - 1. Runs at most ``limit`` steps
    (default 2**width) and returns the step count reached if no recurrence.
    """
    probe = LfsrState(lfsr.width, lfsr.taps, lfsr.register)
    start = probe.register
    limit = limit if limit is not None else (1 << lfsr.width)
    for n in range(1, limit + 1):
        probe.step()
        if probe.register == start:
            return n
    return limit
