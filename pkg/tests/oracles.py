"""Independent reference implementations used only by the tests.

Everything here is deliberately written in the most literal style possible
(serial loops, 1-indexed state cells, python complex arithmetic) and shares
no code with the package, so agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def trivium_reference_bytes(key: bytes, iv: bytes, nbytes: int) -> bytes:
    """Serial bit-at-a-time Trivium keystream, LSB-first byte packing.

    288 cells s1..s288 in three registers (93, 84, 111); K1 = bit 0 of
    key[0]; 1152 warm-up rounds before the first output bit.
    """
    key_bits = [(key[i // 8] >> (i % 8)) & 1 for i in range(80)]
    iv_bits = [(iv[i // 8] >> (i % 8)) & 1 for i in range(80)]
    s = [0] * 289  # 1-indexed
    for i in range(80):
        s[1 + i] = key_bits[i]
    for i in range(80):
        s[94 + i] = iv_bits[i]
    s[286] = s[287] = s[288] = 1

    out_bits = []
    for clock in range(1152 + 8 * nbytes):
        t1 = s[66] ^ s[93]
        t2 = s[162] ^ s[177]
        t3 = s[243] ^ s[288]
        if clock >= 1152:
            out_bits.append(t1 ^ t2 ^ t3)
        f1 = t1 ^ (s[91] & s[92]) ^ s[171]
        f2 = t2 ^ (s[175] & s[176]) ^ s[264]
        f3 = t3 ^ (s[286] & s[287]) ^ s[69]
        s = [0] + [f3] + s[1:93] + [f1] + s[94:177] + [f2] + s[178:288]

    packed = bytearray(nbytes)
    for i, bit in enumerate(out_bits):
        packed[i // 8] |= bit << (i % 8)
    return bytes(packed)


def trivium_reference_bits(key: bytes, iv: bytes, nbits: int) -> list[int]:
    data = trivium_reference_bytes(key, iv, -(-nbits // 8))
    return [(data[i // 8] >> (i % 8)) & 1 for i in range(nbits)]


def brute_force_best(entries_row) -> tuple[float, tuple[int, ...]]:
    """Exhaustive search over all binary masks for one target row.

    Plain python complex sums; the row must be short (<= 16 modes).
    """
    row = [complex(c) for c in entries_row]
    n = len(row)
    best_value = -1.0
    best_mask = None
    for bits in itertools.product((0, 1), repeat=n):
        field = sum(c for c, b in zip(row, bits) if b)
        value = abs(field) ** 2
        if value > best_value:
            best_value = value
            best_mask = bits
    return best_value, best_mask


def intensity_of(entries_row, mask) -> float:
    field = sum(complex(c) for c, b in zip(entries_row, mask) if b)
    return abs(field) ** 2


def exponential_rate(k: int, r0: float, r_end: float, d: float) -> float:
    return (r0 - r_end) * math.exp(-k / d) + r_end


def linear_clamped_rate(k: int, kappa: int, tau: int, eps: int, r_end: float) -> float:
    value = (kappa - (k - 1) * tau) / eps
    return value if value > r_end else r_end


def convergence_report(best_intensities, baseline: float) -> dict:
    """Reference zeta/F/eta/k* from a raw per-iteration best-member series."""
    zeta = []
    running = -math.inf
    for value in best_intensities:
        running = max(running, value)
        zeta.append(running / baseline)
    n_g = len(zeta)
    f_xi = [z / zeta[-1] for z in zeta]
    eta = [f - (i + 1) / n_g for i, f in enumerate(f_xi)]
    best_eta = max(eta)
    k_star = eta.index(best_eta) + 1
    return {"zeta": zeta, "f_xi": f_xi, "eta": eta, "k_star": k_star, "max_eta": best_eta}


def quantize_reference(volts: float, full_scale: float, bits: int) -> int:
    clamped = min(max(volts, 0.0), full_scale)
    return math.floor(clamped / full_scale * (2**bits - 1))
