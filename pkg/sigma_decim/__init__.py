"""Bit-exact simulation of a sigma-delta decimation chain."""

__all__: list[str] = []
