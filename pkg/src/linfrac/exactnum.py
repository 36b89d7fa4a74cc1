"""Exact scalar arithmetic over Q and over cyclotomic fields Q(zeta_m).

Rationals are plain ``fractions.Fraction``.  An element of Q(zeta_m) is a
:class:`Cyc`: a polynomial in the primitive m-th root of unity, stored
reduced modulo the m-th cyclotomic polynomial with Fraction coefficients,
so every element has a unique representation.  All arithmetic is exact;
floating point appears only in :func:`embed_complex`, which exists for
reporting and plots, never for correctness decisions.

A "scalar" throughout the package is an int, a Fraction, or a Cyc.  Mixing
cyclotomic scalars of different orders raises :class:`FieldMismatch`;
rationals embed silently into any Q(zeta_m).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath


class FieldMismatch(ArithmeticError):
    """Scalars from different coefficient fields were combined."""


class DivisionByZero(ZeroDivisionError):
    """Division by an exact zero."""


def euler_phi(m: int) -> int:
    return sum(1 for j in range(1, m + 1) if gcd(j, m) == 1)


# ---------------------------------------------------------------------------
# integer univariate polynomials (dense lists, lowest degree first)

def _int_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _int_divmod_monic(a, b):
    """Divide a by monic b; coefficients stay integral."""
    a = list(a)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 1)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            q[i - db] = c
            for j, y in enumerate(b):
                a[i - db + j] -= c * y
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return q, a


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m, lowest degree first; monic of degree phi(m).

    Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d, computed by exact
    integer division (every divisor in the product is monic).
    """
    if m < 1:
        raise ValueError("order must be a positive integer")
    if m == 1:
        return (-1, 1)
    num = [-1] + [0] * (m - 1) + [1]
    den = (1,)
    for d in range(1, m):
        if m % d == 0:
            den = _int_mul(den, cyclotomic_polynomial(d))
    q, r = _int_divmod_monic(num, list(den))
    if any(r[i] for i in range(len(r))):
        raise AssertionError("cyclotomic division left a remainder")
    return tuple(q)


@lru_cache(maxsize=None)
def _reduction_rows(m: int) -> tuple[tuple[Fraction, ...], ...]:
    """x^(phi+i) mod Phi_m for i = 0 .. phi-2, as Fraction rows."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    base = [Fraction(-c) for c in phi[:-1]]
    rows = [tuple(base)]
    for _ in range(deg - 2):
        prev = rows[-1]
        shifted = [Fraction(0)] + [prev[i] for i in range(deg - 1)]
        top = prev[deg - 1]
        if top:
            shifted = [shifted[i] + top * base[i] for i in range(deg)]
        rows.append(tuple(shifted))
    return tuple(rows)


# ---------------------------------------------------------------------------
# univariate polynomials over Q (helpers for the extended Euclid inverse)

def _q_trim(a):
    while len(a) > 1 and not a[-1]:
        a.pop()
    return a


def _q_divmod(a, b):
    a = list(a)
    db = len(b) - 1
    inv = 1 / b[-1]
    q = [Fraction(0)] * max(len(a) - db, 1)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv
        if c:
            q[i - db] = c
            for j, y in enumerate(b):
                a[i - db + j] -= c * y
    return _q_trim(q), _q_trim(a)


def _q_xgcd(a, b):
    """Extended Euclid over Q[x]: returns (g, u) with u*a = g mod b."""
    r0, r1 = list(a), list(b)
    u0, u1 = [Fraction(1)], [Fraction(0)]
    while any(r1):
        q, r = _q_divmod(r0, r1)
        qu = [Fraction(0)] * (len(q) + len(u1) - 1)
        for i, x in enumerate(q):
            if x:
                for j, y in enumerate(u1):
                    qu[i + j] += x * y
        nu = [Fraction(0)] * max(len(u0), len(qu))
        for i, x in enumerate(u0):
            nu[i] += x
        for i, x in enumerate(qu):
            nu[i] -= x
        r0, r1 = r1, r
        u0, u1 = u1, _q_trim(nu)
    return r0, u0


# ---------------------------------------------------------------------------

def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return None


class Cyc:
    """An element of Q(zeta_m), reduced modulo the m-th cyclotomic polynomial."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        phi = euler_phi(order)
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != phi:
            raise ValueError(f"need {phi} coefficients for order {order}, got {len(coeffs)}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *a):
        raise AttributeError("Cyc values are immutable")

    @classmethod
    def from_rational(cls, order: int, value) -> "Cyc":
        phi = euler_phi(order)
        return cls(order, (Fraction(value),) + (Fraction(0),) * (phi - 1))

    def _lift(self, other):
        if isinstance(other, Cyc):
            if other.order != self.order:
                raise FieldMismatch(
                    f"cannot mix Q(zeta_{self.order}) with Q(zeta_{other.order})")
            return other
        q = _as_fraction(other)
        if q is None:
            return None
        return Cyc.from_rational(self.order, q)

    # -- ring operations --

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Cyc(self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyc(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Cyc(self.order, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Cyc(self.order, tuple(b - a for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other):
        if isinstance(other, Cyc) and other.order != self.order:
            raise FieldMismatch(
                f"cannot mix Q(zeta_{self.order}) with Q(zeta_{other.order})")
        if not isinstance(other, Cyc):
            q = _as_fraction(other)
            if q is None:
                return NotImplemented
            return Cyc(self.order, tuple(a * q for a in self.coeffs))
        a, b = self.coeffs, other.coeffs
        deg = len(a)
        conv = [Fraction(0)] * (2 * deg - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        conv[i + j] += x * y
        out = conv[:deg]
        rows = _reduction_rows(self.order)
        for i, c in enumerate(conv[deg:]):
            if c:
                row = rows[i]
                out = [out[t] + c * row[t] for t in range(deg)]
        return Cyc(self.order, out)

    __rmul__ = __mul__

    def inverse(self) -> "Cyc":
        """Multiplicative inverse via extended Euclid modulo Phi_m."""
        if not self:
            raise DivisionByZero("inverse of zero cyclotomic scalar")
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.order)]
        g, u = _q_xgcd(list(self.coeffs), phi)
        # g is a nonzero constant since Phi_m is irreducible over Q
        ginv = 1 / g[0]
        deg = len(self.coeffs)
        red = list(u) + [Fraction(0)] * max(0, deg - len(u))
        if len(red) > deg:
            rows = _reduction_rows(self.order)
            head = red[:deg]
            for i, c in enumerate(red[deg:]):
                if c:
                    row = rows[i]
                    head = [head[t] + c * row[t] for t in range(deg)]
            red = head
        return Cyc(self.order, tuple(c * ginv for c in red[:deg]))

    def __truediv__(self, other):
        if isinstance(other, Cyc):
            return self * other.inverse()
        q = _as_fraction(other)
        if q is None:
            return NotImplemented
        if not q:
            raise DivisionByZero("division by zero")
        return Cyc(self.order, tuple(a / q for a in self.coeffs))

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Cyc.from_rational(self.order, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- predicates --

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Cyc):
            if other.order != self.order:
                raise FieldMismatch("comparison across cyclotomic orders")
            return self.coeffs == other.coeffs
        q = _as_fraction(other)
        if q is None:
            return NotImplemented
        return self.coeffs[0] == q and not any(self.coeffs[1:])

    def __hash__(self):
        if not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def rational_part(self):
        """The element as a Fraction if it lies in Q, else None."""
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*z" if c != 1 else "z")
            else:
                parts.append(f"{c}*z^{i}" if c != 1 else f"z^{i}")
        body = " + ".join(parts) if parts else "0"
        return f"Cyc({self.order}: {body})"


def zeta(m: int) -> Cyc:
    """The canonical primitive m-th root of unity as a field element."""
    phi = euler_phi(m)
    if phi == 1:
        # Q(zeta_1) = Q(zeta_2) = Q; zeta is 1 or -1
        return Cyc(m, (Fraction(1 if m == 1 else -1),))
    coeffs = [Fraction(0)] * phi
    coeffs[1] = Fraction(1)
    return Cyc(m, coeffs)


# ---------------------------------------------------------------------------
# generic scalar helpers

def scalar_is_zero(x) -> bool:
    return not x


def scalar_inverse(x):
    """Multiplicative inverse of a nonzero scalar."""
    if isinstance(x, Cyc):
        return x.inverse()
    q = _as_fraction(x)
    if q is None:
        raise TypeError(f"not a scalar: {x!r}")
    if not q:
        raise DivisionByZero("inverse of zero")
    return 1 / q


def embed_complex(x, precision: int = 53):
    """Complex floating approximation of a scalar at the given bit precision.

    zeta_m maps to exp(2*pi*i/m).  Returns an mpmath complex number; use
    complex() on the result when a machine double is enough.  For reporting
    only; nothing in the package bases an exact decision on this value.
    """
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    with mpmath.workprec(precision + 16):
        if isinstance(x, Cyc):
            z = mpmath.exp(2j * mpmath.pi / x.order)
            acc = mpmath.mpc(0)
            for c in reversed(x.coeffs):
                acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            return +acc
        q = _as_fraction(x)
        if q is None:
            raise TypeError(f"not a scalar: {x!r}")
        return mpmath.mpc(mpmath.mpf(q.numerator) / q.denominator)


# ---------------------------------------------------------------------------
# field descriptors

class RationalField:
    """The rational field Q."""

    name = "rational"
    zero = Fraction(0)
    one = Fraction(1)

    def from_int(self, n: int):
        return Fraction(n)

    def random_scalar(self, rng, lo: int = -10**6, hi: int = 10**6):
        return Fraction(rng.randint(lo, hi))

    def contains(self, x) -> bool:
        return isinstance(x, (int, Fraction))

    def to_json(self):
        return "rational"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def __repr__(self):
        return "QQ"


class CyclotomicField:
    """The cyclotomic field Q(zeta_m)."""

    def __init__(self, order: int):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order

    @property
    def name(self):
        return f"cyclotomic({self.order})"

    @property
    def zero(self):
        return Cyc.from_rational(self.order, 0)

    @property
    def one(self):
        return Cyc.from_rational(self.order, 1)

    @property
    def zeta(self):
        return zeta(self.order)

    def from_int(self, n: int):
        return Cyc.from_rational(self.order, n)

    def random_scalar(self, rng, lo: int = -10**6, hi: int = 10**6):
        # integers mapped into the field; rational points are dense enough
        # for every genericity purpose in the package
        return Cyc.from_rational(self.order, rng.randint(lo, hi))

    def contains(self, x) -> bool:
        if isinstance(x, (int, Fraction)):
            return True
        return isinstance(x, Cyc) and x.order == self.order

    def to_json(self):
        return {"cyclotomic": self.order}

    def __eq__(self, other):
        return isinstance(other, CyclotomicField) and other.order == self.order

    def __hash__(self):
        return hash(("cyclotomic", self.order))

    def __repr__(self):
        return f"QQ(zeta_{self.order})"


QQ = RationalField()


def field_of(x):
    """The field descriptor a scalar naturally lives in."""
    if isinstance(x, Cyc):
        return CyclotomicField(x.order)
    if isinstance(x, (int, Fraction)):
        return QQ
    raise TypeError(f"not a scalar: {x!r}")


def common_field(scalars):
    """The joint coefficient field of a collection; mixing orders is an error."""
    field = QQ
    for s in scalars:
        f = field_of(s)
        if isinstance(f, CyclotomicField):
            if isinstance(field, CyclotomicField) and field.order != f.order:
                raise FieldMismatch(
                    f"cannot mix Q(zeta_{field.order}) with Q(zeta_{f.order})")
            field = f
    return field


def field_from_json(v):
    if v == "rational":
        return QQ
    if isinstance(v, dict) and "cyclotomic" in v:
        return CyclotomicField(int(v["cyclotomic"]))
    raise ValueError(f"unknown field descriptor: {v!r}")


# ---------------------------------------------------------------------------
# text encoding shared by all file formats:
# rationals as "p/q" or "p"; cyclotomic scalars as {"order": m, "coeffs": [...]}

def _fraction_to_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def scalar_to_json(x):
    if isinstance(x, Cyc):
        return {"order": x.order, "coeffs": [_fraction_to_text(c) for c in x.coeffs]}
    q = _as_fraction(x)
    if q is None:
        raise TypeError(f"not a scalar: {x!r}")
    return _fraction_to_text(q)


def scalar_from_json(v, field=None):
    if isinstance(v, dict):
        s = Cyc(int(v["order"]), [Fraction(c) for c in v["coeffs"]])
        if field is not None and not field.contains(s):
            raise FieldMismatch(f"scalar of order {s.order} not in {field!r}")
        return s
    if isinstance(v, (int, str)):
        q = Fraction(v)
        if isinstance(field, CyclotomicField):
            return Cyc.from_rational(field.order, q)
        return q
    raise ValueError(f"cannot parse scalar from {v!r}")


def format_scalar(x) -> str:
    """Human-readable form for tables; JSON form is the interchange format."""
    if isinstance(x, Cyc):
        r = x.rational_part()
        return _fraction_to_text(r) if r is not None else repr(x)
    return _fraction_to_text(_as_fraction(x))
