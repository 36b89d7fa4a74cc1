"""Exact-arithmetic toolkit for k-step linear fractional recurrences.

The recurrence x_{n+k+1} = (a0 + a1 x_{n+1} + ... + ak x_{n+k}) /
(b0 + b1 x_{n+1} + ... + bk x_{n+k}) is realized as a birational map of
projective k-space.  The package predicts degree growth of iterates via
integer pullback matrices on divisor classes, certifies periodic parameter
families exactly, and constructs and verifies the conserved quantities of
the Lyness map.  All core arithmetic is exact (rationals and cyclotomic
numbers); floating point appears only in root-modulus reports.
"""

__version__ = "0.1.0"
