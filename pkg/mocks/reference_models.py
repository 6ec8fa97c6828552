"""Slow, obviously-correct reference implementations.

Everything here works on plain Python ints or floats with explicit loops so it
shares no code path with the numpy and lookahead implementations under test.
"""

from collections.abc import Sequence


def ripple_carry_add(a: int, b: int, c0: int, width: int) -> tuple[int, int]:
    """Bit-serial full-adder chain; returns (wrapped sum, carry into bit width)."""
    carry = c0
    total = 0
    for i in range(width):
        x = (a >> i) & 1
        y = (b >> i) & 1
        total |= (x ^ y ^ carry) << i
        carry = (x & y) | (x & carry) | (y & carry)
    if total >> (width - 1):
        total -= 1 << width
    return total, carry


def naive_convolve(x: Sequence[float], h: Sequence[float]) -> list[float]:
    """Causal convolution truncated to len(x)."""
    out: list[float] = []
    for n in range(len(x)):
        acc = 0.0
        for k, hk in enumerate(h):
            if n - k < 0:
                break
            acc += hk * x[n - k]
        out.append(acc)
    return out


def naive_fir_decimate(
    x: Sequence[float], h: Sequence[float], decim: int
) -> list[float]:
    return naive_convolve(x, h)[::decim]


class BigIntCic:
    """CIC with unbounded integer registers and no truncation."""

    def __init__(self, n: int, m: int, r: int) -> None:
        super().__init__()
        self.n = n
        self.m = m
        self.r = r

    def run(self, x: Sequence[int]) -> list[int]:
        acc = [0] * self.n
        history: list[list[int]] = [[0] * self.m for _ in range(self.n)]
        out: list[int] = []
        for i, xi in enumerate(x):
            v = xi
            for k in range(self.n):
                acc[k] += v
                v = acc[k]
            if i % self.r:
                continue
            for k in range(self.n):
                delayed = history[k].pop(0)
                history[k].append(v)
                v -= delayed
            out.append(v)
        return out
