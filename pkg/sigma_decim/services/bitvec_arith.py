"""Two's-complement word arithmetic and a gate-level carry-lookahead adder.

The integer kernels (``wrap_int``, ``cla_add_int``) work on plain Python ints
and are what the CIC engine calls per sample; the ``BitWord`` functions are the
typed public surface on top of them.
"""

from __future__ import annotations

from typing import Protocol

from ..domain.models import BitWord, ClaBlock
from ..errors import ContractViolationError

_BLOCK = 4


def wrap_int(value: int, width: int) -> int:
    """Reduce ``value`` modulo 2**width and reinterpret it as two's complement."""
    half = 1 << (width - 1)
    return ((value + half) & ((1 << width) - 1)) - half


def _check_same_width(a: BitWord, b: BitWord) -> None:
    if a.width != b.width:
        raise ContractViolationError(
            f"operand widths differ: {a.width} vs {b.width}"
        )


def wrap_add(a: BitWord, b: BitWord) -> BitWord:
    _check_same_width(a, b)
    return BitWord(width=a.width, value=wrap_int(a.value + b.value, a.width))


def truncate_keep_msbs(a: BitWord, new_width: int) -> BitWord:
    """Keep the top ``new_width`` bits of ``a`` (arithmetic shift, floor rounding)."""
    if not 1 <= new_width <= a.width:
        raise ContractViolationError(
            f"new width {new_width} must lie in 1..{a.width}"
        )
    return BitWord(width=new_width, value=a.value >> (a.width - new_width))


def _lookahead(
    p: tuple[int, int, int, int], g: tuple[int, int, int, int], c0: int
) -> tuple[int, int, int, int, int]:
    p0, p1, p2, p3 = p
    g0, g1, g2, g3 = g
    c1 = g0 | (p0 & c0)
    c2 = g1 | (p1 & g0) | (p1 & p0 & c0)
    c3 = g2 | (p2 & g1) | (p2 & p1 & g0) | (p2 & p1 & p0 & c0)
    c4 = (
        g3
        | (p3 & g2)
        | (p3 & p2 & g1)
        | (p3 & p2 & p1 & g0)
        | (p3 & p2 & p1 & p0 & c0)
    )
    return c0, c1, c2, c3, c4


def _split(word: int) -> tuple[int, int, int, int]:
    return word & 1, (word >> 1) & 1, (word >> 2) & 1, (word >> 3) & 1


def cla_block_add(a4: int, b4: int, c0: int) -> tuple[int, ClaBlock]:
    """Add two 4-bit operands with lookahead carries only.

    Returns the 4-bit sum and the block's propagate, generate and carry signals.
    """
    if not (0 <= a4 <= 0xF and 0 <= b4 <= 0xF and c0 in {0, 1}):
        raise ContractViolationError("cla_block_add takes 4-bit operands and a carry bit")
    p = _split(a4 ^ b4)
    g = _split(a4 & b4)
    c = _lookahead(p, g, c0)
    total = 0
    for i in range(_BLOCK):
        total |= (p[i] ^ c[i]) << i
    pg = p[3] & p[2] & p[1] & p[0]
    gg = g[3] | (p[3] & g[2]) | (p[3] & p[2] & g[1]) | (p[3] & p[2] & p[1] & g[0])
    return total, ClaBlock(p=p, g=g, pg=pg, gg=gg, c=c)


def cla_add_int(a: int, b: int, c0: int, width: int) -> tuple[int, int]:
    """Chain ceil(width/4) lookahead blocks over sign-extended operands.

    Returns the wrapped sum and the carry into bit position ``width``.
    """
    blocks = -(-width // _BLOCK)
    mask = (1 << (blocks * _BLOCK)) - 1
    ua = a & mask
    ub = b & mask
    carry = c0
    total = 0
    carry_out = 0
    for k in range(blocks):
        shift = k * _BLOCK
        na = (ua >> shift) & 0xF
        nb = (ub >> shift) & 0xF
        p = _split(na ^ nb)
        c = _lookahead(p, _split(na & nb), carry)
        for i in range(_BLOCK):
            total |= (p[i] ^ c[i]) << (shift + i)
        if shift < width <= shift + _BLOCK:
            carry_out = c[width - shift]
        carry = c[4]
    return wrap_int(total, width), carry_out


def cla_add(a: BitWord, b: BitWord, c0: int = 0) -> tuple[BitWord, int]:
    _check_same_width(a, b)
    if c0 not in {0, 1}:
        raise ContractViolationError("carry-in must be 0 or 1")
    total, carry_out = cla_add_int(a.value, b.value, c0, a.width)
    return BitWord(width=a.width, value=total), carry_out


class Adder(Protocol):
    """Arithmetic element used by the CIC datapath on raw ints."""

    def add(self, a: int, b: int, width: int) -> int: ...

    def sub(self, a: int, b: int, width: int) -> int: ...


class WrapAdder:
    """Reference modulo-2**width adder."""

    @staticmethod
    def add(a: int, b: int, width: int) -> int:
        return wrap_int(a + b, width)

    @staticmethod
    def sub(a: int, b: int, width: int) -> int:
        return wrap_int(a - b, width)


class ClaAdder:
    """Carry-lookahead adder; subtraction is a + ~b with carry-in 1."""

    @staticmethod
    def add(a: int, b: int, width: int) -> int:
        return cla_add_int(a, b, 0, width)[0]

    @staticmethod
    def sub(a: int, b: int, width: int) -> int:
        return cla_add_int(a, ~b, 1, width)[0]
