"""Deterministic random-bit supply built on the Trivium stream cipher.

Trivium is the random-number generator of the hardware design this package
models, so every stochastic decision of the optimizer (initial masks,
crossover templates, mutation site selection) is drawn from its keystream.
The construction follows the original 288-bit three-register design:
80-bit key and IV, 1152 warm-up rounds, one output bit per clock.

Bit conventions (these pin down every byte-level comparison):

* key/IV bytes map to register bits least-significant-bit first, i.e.
  K1 = bit 0 of key[0], K8 = bit 7 of key[0], K9 = bit 0 of key[1], ...
* keystream bits pack into bytes least-significant-bit first as well.

Because no state bit is tapped until it has shifted 65 positions, 64
consecutive clocks are independent and the keystream is generated 64 bits
per internal step.  A numba kernel performs the same block step on
(lo, hi) uint64 pairs when numba is importable; the pure-Python fallback
is bit-identical (the test suite checks this).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

KEY_BITS = 80
STATE_BITS = 288
WARMUP_ROUNDS = 4 * STATE_BITS  # 1152 = 18 blocks of 64


def _bytes_to_bits(data: bytes) -> list[int]:
    """Bytes to bit list, LSB first within each byte."""
    return [(byte >> i) & 1 for byte in data for i in range(8)]


def seed_to_key_iv(seed: int) -> tuple[bytes, bytes]:
    """Expand a 64-bit seed into an 80-bit (key, iv) pair.

    key = seed (little-endian) followed by 16 zero bits; iv = bitwise NOT
    of the seed followed by 16 zero bits.  Distinct seeds give distinct
    keys, so no two seeds share a keystream.
    """
    if not 0 <= seed < (1 << 64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    key = seed.to_bytes(8, "little") + b"\x00\x00"
    iv = ((~seed) & _MASK64).to_bytes(8, "little") + b"\x00\x00"
    return key, iv


# Numba kernel is compiled lazily on first bulk request; module import stays
# cheap and environments without numba fall back to the pure-Python path.
_numba_kernel = None
_numba_failed = False
FORCE_PURE_PYTHON = False  # tests flip this to exercise the fallback


def _get_numba_kernel():
    global _numba_kernel, _numba_failed
    if _numba_kernel is not None or _numba_failed:
        return _numba_kernel
    try:
        from numba import njit, uint64
    except ImportError:
        _numba_failed = True
        return None

    @njit("void(uint64[:], int64, uint64[:])", cache=True)
    def kernel(state, n, out):  # pragma: no cover - exercised via wrapper
        one = uint64(1)
        two = uint64(2)
        a_lo = state[0]
        a_hi = state[1]
        b_lo = state[2]
        b_hi = state[3]
        c_lo = state[4]
        c_hi = state[5]
        for i in range(n):
            a1 = (a_lo >> one) | (a_hi << uint64(63))
            a2 = (a_lo >> two) | (a_hi << uint64(62))
            a24 = (a_lo >> uint64(24)) | (a_hi << uint64(40))
            a27 = (a_lo >> uint64(27)) | (a_hi << uint64(37))
            b1 = (b_lo >> one) | (b_hi << uint64(63))
            b2 = (b_lo >> two) | (b_hi << uint64(62))
            b6 = (b_lo >> uint64(6)) | (b_hi << uint64(58))
            b15 = (b_lo >> uint64(15)) | (b_hi << uint64(49))
            c1 = (c_lo >> one) | (c_hi << uint64(63))
            c2 = (c_lo >> two) | (c_hi << uint64(62))
            c24 = (c_lo >> uint64(24)) | (c_hi << uint64(40))
            c45 = (c_lo >> uint64(45)) | (c_hi << uint64(19))
            t1 = a27 ^ a_lo
            t2 = b15 ^ b_lo
            t3 = c45 ^ c_lo
            out[i] = t1 ^ t2 ^ t3
            f1 = t1 ^ (a2 & a1) ^ b6
            f2 = t2 ^ (b2 & b1) ^ c24
            f3 = t3 ^ (c2 & c1) ^ a24
            a_lo = a_hi | (f3 << uint64(29))
            a_hi = f3 >> uint64(35)
            b_lo = b_hi | (f1 << uint64(20))
            b_hi = f1 >> uint64(44)
            c_lo = c_hi | (f2 << uint64(47))
            c_hi = f2 >> uint64(17)
        state[0] = a_lo
        state[1] = a_hi
        state[2] = b_lo
        state[3] = b_hi
        state[4] = c_lo
        state[5] = c_hi

    _numba_kernel = kernel
    return _numba_kernel


class Trivium:
    """Warmed-up Trivium instance producing keystream 64 bits at a time.

    The three shift registers (93, 84 and 111 bits) are stored as Python
    integers with bit k of a register holding state cell ``s(last - k)``;
    new cells enter at the top and the register shifts toward bit 0.  In
    this orientation all 14 taps of a 64-wide block step are plain right
    shifts, and a block step is exactly 64 serial clocks.
    """

    def __init__(self, key: bytes, iv: bytes):
        if len(key) != 10:
            raise ValueError(f"key must be 10 bytes (80 bits), got {len(key)} bytes")
        if len(iv) != 10:
            raise ValueError(f"iv must be 10 bytes (80 bits), got {len(iv)} bytes")
        key_bits = _bytes_to_bits(key)
        iv_bits = _bytes_to_bits(iv)

        # s1..s80 = key, s94..s173 = iv, s286..s288 = 1, everything else 0.
        a = 0
        for i, bit in enumerate(key_bits):  # cell s(i+1) -> bit 93-(i+1)
            a |= bit << (92 - i)
        b = 0
        for i, bit in enumerate(iv_bits):  # cell s(94+i) -> bit 177-(94+i)
            b |= bit << (83 - i)
        c = 0b111  # s286, s287, s288

        self._a = a
        self._b = b
        self._c = c
        self.warmed_up = False
        self._warmup()

    def _warmup(self) -> None:
        self._blocks_python(WARMUP_ROUNDS // 64)
        self.warmed_up = True

    def _blocks_python(self, n: int) -> list[int]:
        a, b, c = self._a, self._b, self._c
        out = []
        append = out.append
        for _ in range(n):
            t1 = (a >> 27) ^ a
            t2 = (b >> 15) ^ b
            t3 = (c >> 45) ^ c
            append((t1 ^ t2 ^ t3) & _MASK64)
            f1 = (t1 ^ ((a >> 2) & (a >> 1)) ^ (b >> 6)) & _MASK64
            f2 = (t2 ^ ((b >> 2) & (b >> 1)) ^ (c >> 24)) & _MASK64
            f3 = (t3 ^ ((c >> 2) & (c >> 1)) ^ (a >> 24)) & _MASK64
            a = (a >> 64) | (f3 << 29)
            b = (b >> 64) | (f1 << 20)
            c = (c >> 64) | (f2 << 47)
        self._a, self._b, self._c = a, b, c
        return out

    def blocks(self, n: int) -> np.ndarray:
        """Next n 64-bit keystream words (bit j of word i = bit 64*i + j)."""
        if n < 0:
            raise ValueError("block count must be nonnegative")
        if n == 0:
            return np.empty(0, dtype=np.uint64)
        kernel = None if FORCE_PURE_PYTHON else _get_numba_kernel()
        if kernel is None:
            return np.array(self._blocks_python(n), dtype=np.uint64)
        state = np.array(
            [
                self._a & _MASK64,
                self._a >> 64,
                self._b & _MASK64,
                self._b >> 64,
                self._c & _MASK64,
                self._c >> 64,
            ],
            dtype=np.uint64,
        )
        out = np.empty(n, dtype=np.uint64)
        kernel(state, n, out)
        self._a = int(state[0]) | (int(state[1]) << 64)
        self._b = int(state[2]) | (int(state[3]) << 64)
        self._c = int(state[4]) | (int(state[5]) << 64)
        return out

    def keystream_bytes(self, n: int) -> bytes:
        """Next n keystream bytes (LSB-first packing)."""
        nblocks = -(-n // 8)
        words = self.blocks(nblocks)
        return words.astype("<u8").tobytes()[:n]


def trivium_init(key: bytes, iv: bytes) -> Trivium:
    """Build a warmed-up cipher; raises ValueError on wrong-length key/iv."""
    return Trivium(key, iv)


class RandomSource:
    """Single-owner bit stream over one Trivium instance.

    Draws are strictly sequential: ``bits_consumed`` counts every bit that
    has left the stream, so replaying a seed replays the exact draw
    sequence.  Never share one source across concurrent consumers; the
    optimizer pre-draws all random material serially for this reason.
    """

    _REFILL_BLOCKS = 4096  # 256 Kibit per refill keeps refill overhead small

    def __init__(self, cipher: Trivium):
        self.cipher = cipher
        self.bits_consumed = 0
        self._buf = np.empty(0, dtype=np.uint8)
        self._pos = 0

    @classmethod
    def from_seed(cls, seed: int) -> "RandomSource":
        key, iv = seed_to_key_iv(seed)
        return cls(Trivium(key, iv))

    def _available(self) -> int:
        return self._buf.size - self._pos

    def _refill(self, nbits: int) -> None:
        nblocks = max(-(-nbits // 64), self._REFILL_BLOCKS)
        words = self.cipher.blocks(nblocks)
        fresh = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
        if self._available():
            self._buf = np.concatenate([self._buf[self._pos:], fresh])
        else:
            self._buf = fresh
        self._pos = 0

    def next_bits(self, n: int) -> np.ndarray:
        """Next n keystream bits as a 0/1 uint8 vector."""
        if n < 0:
            raise ValueError("bit count must be nonnegative")
        if n == 0:
            return np.empty(0, dtype=np.uint8)
        if self._available() < n:
            self._refill(n - self._available())
        out = self._buf[self._pos : self._pos + n]
        self._pos += n
        self.bits_consumed += n
        return out

    def next_uint(self, width: int) -> int:
        """One unsigned integer from the next `width` bits, LSB first."""
        bits = self.next_bits(width)
        value = 0
        for i in range(width):
            value |= int(bits[i]) << i
        return value

    def uniform_int(self, upper: int) -> int:
        """Unbiased uniform draw from [0, upper) by rejection sampling.

        Uses the smallest power-of-two window >= upper, so no modulo bias.
        """
        if upper <= 0:
            raise ValueError("upper bound must be positive")
        width = max((upper - 1).bit_length(), 1)
        while True:
            value = self.next_uint(width)
            if value < upper:
                return value


def random_mask(src: RandomSource, n_modes: int) -> np.ndarray:
    """Uniform random binary mask; consumes exactly n_modes bits."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    return src.next_bits(n_modes)


def bernoulli_select(
    src: RandomSource, n: int, rate_num: int, epsilon: int = 1 << 15
) -> np.ndarray:
    """Per-position Bernoulli selection in fixed point.

    Position i is 1 iff a fresh log2(epsilon)-bit draw is strictly below
    rate_num, mirroring the hardware comparison scheme; expected ones
    count is n * rate_num / epsilon.  Always consumes n draws.
    """
    if n < 0:
        raise ValueError("selection length must be nonnegative")
    if epsilon < 2 or epsilon & (epsilon - 1):
        raise ValueError(f"epsilon must be a power of two >= 2, got {epsilon}")
    if not 0 <= rate_num <= epsilon:
        raise ValueError(f"rate numerator must be in [0, {epsilon}], got {rate_num}")
    width = epsilon.bit_length() - 1
    bits = src.next_bits(n * width)
    if n == 0:
        return np.empty(0, dtype=np.uint8)
    weights = (1 << np.arange(width, dtype=np.int64)).astype(np.int64)
    draws = bits.reshape(n, width).astype(np.int64) @ weights
    return (draws < rate_num).astype(np.uint8)
