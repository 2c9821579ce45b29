"""Adaptive binary arithmetic coder.

Integer-interval coder over a 32-bit register with underflow (pending bit)
handling, driven by a Krichevsky–Trofimov estimator. The decoder reads zeros
past the end of the payload, so trailing zero bits are dropped from the code.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..utils.errors import DecodeError

NUM_BITS = 32
FULL = (1 << NUM_BITS) - 1
HALF = 1 << (NUM_BITS - 1)
QUARTER = 1 << (NUM_BITS - 2)
THREE_QUARTERS = HALF + QUARTER

# Doubled counts are halved past this total so every symbol keeps a
# non-empty sub-interval of a range that is always larger than QUARTER.
MAX_TOTAL = 1 << 28


class BitModel:
    """Krichevsky–Trofimov adaptive bit model.

    Counts start at 1/2 each, so p(1) = (ones + 1/2) / (total + 1). Counts
    are kept doubled as integers.
    """

    def __init__(self):
        self._zeros2 = 1
        self._ones2 = 1

    @property
    def zero_count(self) -> float:
        return self._zeros2 / 2

    @property
    def one_count(self) -> float:
        return self._ones2 / 2

    def p_one(self) -> float:
        return self._ones2 / (self._zeros2 + self._ones2)

    def frequencies(self):
        """Integer (zero frequency, total) pair used to split the interval."""
        return self._zeros2, self._zeros2 + self._ones2

    def update(self, bit: int) -> None:
        if bit:
            self._ones2 += 2
        else:
            self._zeros2 += 2
        if self._zeros2 + self._ones2 > MAX_TOTAL:
            self._zeros2 = (self._zeros2 + 1) // 2 | 1
            self._ones2 = (self._ones2 + 1) // 2 | 1


@dataclass(frozen=True)
class ArithmeticCode:
    """Coded payload: ``length_bits`` significant bits packed MSB first."""

    payload: bytes
    length_bits: int
    symbols: int

    def bits(self) -> List[int]:
        unpacked = np.unpackbits(np.frombuffer(self.payload, dtype=np.uint8))
        return unpacked[: self.length_bits].tolist()


def arith_encode(bits: Sequence[int], model: Optional[BitModel] = None) -> ArithmeticCode:
    """Arithmetic-code a bit sequence.

    Args:
        bits: Source bits (0/1)
        model: Adaptive model to drive the coder; a fresh KT model by default

    Returns:
        ArithmeticCode: Packed payload with its significant bit length
    """
    if model is None:
        model = BitModel()
    if len(bits) == 0:
        return ArithmeticCode(b"", 0, 0)

    out: List[int] = []
    low, high, pending = 0, FULL, 0

    def emit(bit: int) -> None:
        nonlocal pending
        out.append(bit)
        if pending:
            out.extend([1 - bit] * pending)
            pending = 0

    for bit in bits:
        zero_freq, total = model.frequencies()
        split = low + (high - low + 1) * zero_freq // total
        if bit:
            low = split
        else:
            high = split - 1
        model.update(bit)

        while True:
            if high < HALF:
                emit(0)
            elif low >= HALF:
                emit(1)
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1

    pending += 1
    emit(0 if low < QUARTER else 1)

    while out and out[-1] == 0:
        out.pop()
    payload = np.packbits(np.array(out, dtype=np.uint8)).tobytes() if out else b""
    return ArithmeticCode(payload, len(out), len(bits))


def arith_decode(code: ArithmeticCode, model: Optional[BitModel] = None) -> List[int]:
    """Recover the ``code.symbols`` source bits.

    Raises:
        DecodeError: If the payload is shorter than its declared length
    """
    if model is None:
        model = BitModel()
    if len(code.payload) * 8 < code.length_bits:
        raise DecodeError(
            f"payload holds {len(code.payload) * 8} bits, {code.length_bits} declared"
        )
    stream = code.bits()
    position = 0

    def next_bit() -> int:
        nonlocal position
        bit = stream[position] if position < len(stream) else 0
        position += 1
        return bit

    value = 0
    for _ in range(NUM_BITS):
        value = (value << 1) | next_bit()

    low, high = 0, FULL
    decoded: List[int] = []
    for _ in range(code.symbols):
        zero_freq, total = model.frequencies()
        split = low + (high - low + 1) * zero_freq // total
        if value < split:
            bit = 0
            high = split - 1
        else:
            bit = 1
            low = split
        model.update(bit)
        decoded.append(bit)

        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                value -= HALF
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                value -= QUARTER
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            value = (value << 1) | next_bit()

    return decoded
