"""Sparse multivariate homogeneous polynomials and univariate restrictions.

Coefficients are exact scalars (Fraction, Cyc, or anything with field
operator overloads).  Terms are stored sparsely as a dict from exponent
tuples to nonzero coefficients; all paper polynomials are products of a few
linear forms, so the tables stay small even in many variables.

Degrees of map iterates are measured on lines: restrict to a parametrized
line, iterate, and strip the common univariate factor after every step.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd

from .exactnum import DivisionByZero


class DegreeMismatch(ValueError):
    """Operands have incompatible degrees or variable counts."""


class NotDivisible(ArithmeticError):
    """Exact polynomial division has a nonzero remainder."""


class DegeneratePair(ValueError):
    """Base and direction of a line are projectively dependent."""


class AllZero(ValueError):
    """Every component of a tuple is identically zero."""


# ---------------------------------------------------------------------------
# raw term-dict arithmetic (no homogeneity assumption); exponents are tuples

def _t_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        s = out.get(e)
        if s is None:
            out[e] = c
        else:
            s = s + c
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def _t_scale(a: dict, c) -> dict:
    if not c:
        return {}
    return {e: c * v for e, v in a.items()}


def _t_mul(a: dict, b: dict) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            s = out.get(e)
            if s is None:
                s = ca * cb
                if s:
                    out[e] = s
            else:
                s = s + ca * cb
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out


def _t_pow(a: dict, n: int, nvars: int) -> dict:
    out = {(0,) * nvars: Fraction(1)}
    base = a
    while n:
        if n & 1:
            out = _t_mul(out, base)
        n >>= 1
        if n:
            base = _t_mul(base, base)
    return out


class HomogPoly:
    """A homogeneous polynomial in num_vars variables x0..x_{n-1}."""

    __slots__ = ("num_vars", "degree", "terms")

    def __init__(self, num_vars: int, terms: dict, degree: int | None = None):
        clean = {}
        for e, c in terms.items():
            if not c:
                continue
            if len(e) != num_vars:
                raise DegreeMismatch("exponent vector length != num_vars")
            d = sum(e)
            if degree is None:
                degree = d
            elif d != degree:
                raise DegreeMismatch("terms of mixed total degree")
            clean[e] = c
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", 0 if degree is None else degree)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("HomogPoly values are immutable")

    # -- constructors --

    @classmethod
    def zero(cls, num_vars: int, degree: int = 0) -> "HomogPoly":
        return cls(num_vars, {}, degree)

    @classmethod
    def constant(cls, num_vars: int, c) -> "HomogPoly":
        return cls(num_vars, {(0,) * num_vars: c}, 0)

    @classmethod
    def variable(cls, num_vars: int, i: int) -> "HomogPoly":
        e = [0] * num_vars
        e[i] = 1
        return cls(num_vars, {tuple(e): Fraction(1)}, 1)

    @classmethod
    def linear(cls, coeffs) -> "HomogPoly":
        """The linear form sum_i coeffs[i] * x_i."""
        coeffs = list(coeffs)
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return cls(n, terms, 1)

    @classmethod
    def monomial(cls, exponents, c=Fraction(1)) -> "HomogPoly":
        e = tuple(exponents)
        return cls(len(e), {e: c}, sum(e))

    # -- predicates --

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    # -- arithmetic --

    def _check_compatible(self, other, op):
        if self.num_vars != other.num_vars:
            raise DegreeMismatch(f"{op}: variable counts differ")
        if self.degree != other.degree and self.terms and other.terms:
            raise DegreeMismatch(
                f"{op}: degrees differ ({self.degree} vs {other.degree})")

    def __add__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        self._check_compatible(other, "add")
        deg = self.degree if self.terms else other.degree
        return HomogPoly(self.num_vars, _t_add(self.terms, other.terms), deg)

    def __sub__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return HomogPoly(self.num_vars, {e: -c for e, c in self.terms.items()}, self.degree)

    def __mul__(self, other):
        if isinstance(other, HomogPoly):
            if self.num_vars != other.num_vars:
                raise DegreeMismatch("mul: variable counts differ")
            return HomogPoly(self.num_vars, _t_mul(self.terms, other.terms),
                             self.degree + other.degree)
        return HomogPoly(self.num_vars, _t_scale(self.terms, other), self.degree)

    def __rmul__(self, other):
        return HomogPoly(self.num_vars, _t_scale(self.terms, other), self.degree)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        return HomogPoly(self.num_vars, _t_pow(self.terms, n, self.num_vars),
                         self.degree * n)

    def exact_div(self, divisor: "HomogPoly") -> "HomogPoly":
        """Exact quotient self / divisor; raises NotDivisible on remainder.

        Single-divisor multivariate division in lex order; for an exact
        multiple the remainder cancels to zero, otherwise some reduction
        step fails and NotDivisible is raised.
        """
        if not isinstance(divisor, HomogPoly) or self.num_vars != divisor.num_vars:
            raise DegreeMismatch("exact_div: variable counts differ")
        if divisor.is_zero:
            raise DivisionByZero("division by the zero polynomial")
        if self.is_zero:
            return HomogPoly.zero(self.num_vars, max(self.degree - divisor.degree, 0))
        if self.degree < divisor.degree:
            raise NotDivisible("degree of divisor exceeds degree of dividend")
        dlead = max(divisor.terms)
        dc = divisor.terms[dlead]
        rem = dict(self.terms)
        quo: dict = {}
        while rem:
            rlead = max(rem)
            qe = tuple(r - d for r, d in zip(rlead, dlead))
            if any(x < 0 for x in qe):
                raise NotDivisible("leading term not divisible")
            qc = rem[rlead] / dc
            quo[qe] = qc
            for e, c in divisor.terms.items():
                te = tuple(x + y for x, y in zip(e, qe))
                s = rem.get(te)
                s = -qc * c if s is None else s - qc * c
                if s:
                    rem[te] = s
                else:
                    rem.pop(te, None)
        return HomogPoly(self.num_vars, quo, self.degree - divisor.degree)

    # -- evaluation --

    def evaluate(self, values):
        """Evaluate with x_i = values[i]; values may be scalars, UniPoly,
        or HomogPoly, anything closed under + and *.  Returns a scalar for
        a constant polynomial."""
        if len(values) != self.num_vars:
            raise DegreeMismatch("evaluate: wrong number of values")
        cache: dict = {}

        def power(i, e):
            key = (i, e)
            got = cache.get(key)
            if got is None:
                got = values[i] ** e
                cache[key] = got
            return got

        acc = None
        for exp, c in self.terms.items():
            v = c
            for i, e in enumerate(exp):
                if e:
                    v = v * power(i, e)
            acc = v if acc is None else acc + v
        if acc is None:
            return Fraction(0)
        return acc

    def to_text(self) -> str:
        """Report form: sum of terms 'c * x0^a0 ... xk^ak'."""
        from .exactnum import format_scalar
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            factors = [f"x{i}^{p}" if p > 1 else f"x{i}"
                       for i, p in enumerate(e) if p]
            body = " ".join(factors)
            cs = format_scalar(c)
            parts.append(f"{cs} * {body}" if body else cs)
        return " + ".join(parts)

    def __repr__(self):
        return f"HomogPoly({self.to_text()})"


def poly_product(factors, num_vars: int) -> HomogPoly:
    out = HomogPoly.constant(num_vars, Fraction(1))
    for f in factors:
        out = out * f
    return out


def substitute(p: HomogPoly, components) -> HomogPoly:
    """p with x_i replaced by components[i]; realizes compositions p o f.

    Components must all be homogeneous of one common degree d, so the result
    is homogeneous of degree deg(p) * d.
    """
    components = list(components)
    if len(components) != p.num_vars:
        raise DegreeMismatch("substitute: component count != variable count")
    degs = {c.degree for c in components}
    if len(degs) > 1:
        raise DegreeMismatch("substitute: components of mixed degree")
    d = degs.pop() if degs else 1
    nv = components[0].num_vars
    if p.is_zero:
        return HomogPoly.zero(nv, p.degree * d)
    out = p.evaluate(components)
    if not isinstance(out, HomogPoly):
        return HomogPoly.constant(nv, out)
    if out.is_zero:
        return HomogPoly.zero(nv, p.degree * d)
    return out


# ---------------------------------------------------------------------------
# univariate polynomials in one parameter t

class UniPoly:
    """Dense univariate polynomial, lowest degree first, over exact scalars."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, *a):
        raise AttributeError("UniPoly values are immutable")

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return UniPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            a, b = self.coeffs, other.coeffs
            if not a or not b:
                return UniPoly([])
            out = [None] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        if y:
                            cur = out[i + j]
                            out[i + j] = x * y if cur is None else cur + x * y
            return UniPoly([c if c is not None else Fraction(0) for c in out])
        return UniPoly([c * other for c in self.coeffs])

    def __rmul__(self, other):
        return UniPoly([other * c for c in self.coeffs])

    def __pow__(self, n: int):
        out = UniPoly([Fraction(1)])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other):
        if not isinstance(other, UniPoly) or other.is_zero:
            raise DivisionByZero("polynomial division by zero")
        a = list(self.coeffs)
        b = other.coeffs
        db = len(b) - 1
        if len(a) <= db:
            return UniPoly([]), self
        from .exactnum import scalar_inverse
        inv = scalar_inverse(b[-1])
        q = [Fraction(0)] * (len(a) - db)
        for i in range(len(a) - 1, db - 1, -1):
            c = a[i] * inv
            if c:
                q[i - db] = c
                for j, y in enumerate(b):
                    a[i - db + j] = a[i - db + j] - c * y
        return UniPoly(q), UniPoly(a)

    def monic(self) -> "UniPoly":
        if self.is_zero:
            return self
        from .exactnum import scalar_inverse
        inv = scalar_inverse(self.coeffs[-1])
        return UniPoly([c * inv for c in self.coeffs])

    def eval_at(self, t):
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * t + c
        return acc if acc is not None else Fraction(0)

    def __repr__(self):
        if not self.coeffs:
            return "UniPoly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(f"{c}")
            elif i == 1:
                parts.append(f"{c}*t")
            else:
                parts.append(f"{c}*t^{i}")
        return "UniPoly(" + " + ".join(parts) + ")"


# -- univariate gcd --

def _all_fraction(p: UniPoly) -> bool:
    return all(isinstance(c, (int, Fraction)) for c in p.coeffs)


def _to_primitive_int(p: UniPoly):
    """Scale a rational polynomial to a primitive integer coefficient list."""
    lcm = 1
    for c in p.coeffs:
        c = Fraction(c)
        lcm = lcm * c.denominator // _int_gcd(lcm, c.denominator)
    ints = [int(Fraction(c) * lcm) for c in p.coeffs]
    g = 0
    for v in ints:
        g = _int_gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _int_content(a) -> int:
    g = 0
    for v in a:
        g = _int_gcd(g, abs(v))
    return g


def _int_primitive(a):
    g = _int_content(a)
    return [v // g for v in a] if g > 1 else list(a)


def _int_pseudo_rem(a, b):
    """Pseudo-remainder of integer polynomial a by b (both low-first lists)."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and any(a):
        da = len(a) - 1
        la = a[-1]
        a = [c * lb for c in a]
        shift = da - db
        for j, y in enumerate(b):
            a[shift + j] -= la * y
        while len(a) > 1 and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db or not any(a):
            break
    return a


def _gcd_two_rational(p: UniPoly, q: UniPoly) -> UniPoly:
    """Monic gcd over Q via a primitive Euclidean remainder sequence on
    integer polynomials; avoids the coefficient blowup of naive Fraction
    Euclid at high degrees."""
    a, b = _to_primitive_int(p), _to_primitive_int(q)
    if len(a) < len(b):
        a, b = b, a
    while any(b) and len(b) > 1:
        r = _int_pseudo_rem(a, b)
        if not any(r):
            b_poly = UniPoly([Fraction(c) for c in b])
            return b_poly.monic()
        a, b = b, _int_primitive(r)
    if any(b) and len(b) == 1:
        return UniPoly([Fraction(1)])
    return UniPoly([Fraction(c) for c in a]).monic()


def _gcd_two_generic(p: UniPoly, q: UniPoly) -> UniPoly:
    a, b = p, q
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero:
        b = b.monic()
        _, r = divmod(a, b)
        a, b = b, r
    return a.monic()


def _gcd_two(p: UniPoly, q: UniPoly) -> UniPoly:
    if p.is_zero:
        return q.monic()
    if q.is_zero:
        return p.monic()
    if _all_fraction(p) and _all_fraction(q):
        return _gcd_two_rational(p, q)
    return _gcd_two_generic(p, q)


def uni_gcd(polys) -> UniPoly:
    """Monic gcd of a list of univariate polynomials."""
    g = UniPoly([])
    for p in polys:
        g = _gcd_two(g, p)
        if g.degree == 0:
            return UniPoly([Fraction(1)])
    return g


def uni_gcd_strip(components):
    """Divide a tuple of univariate polynomials by their monic gcd.

    Returns (stripped components, stripped factor).  The maximal degree of
    the outputs is the measured degree of the underlying map.
    """
    components = list(components)
    if all(c.is_zero for c in components):
        raise AllZero("all components vanish identically")
    g = uni_gcd([c for c in components if not c.is_zero])
    if g.degree <= 0:
        return components, UniPoly([Fraction(1)])
    out = []
    for c in components:
        if c.is_zero:
            out.append(c)
            continue
        q, r = divmod(c, g)
        if not r.is_zero:
            raise NotDivisible("gcd does not divide a component")
        out.append(q)
    return out, g


def restrict_to_line(p: HomogPoly, base, direction) -> UniPoly:
    """The univariate polynomial t -> p(base + t * direction)."""
    base = list(base)
    direction = list(direction)
    if len(base) != p.num_vars or len(direction) != p.num_vars:
        raise DegreeMismatch("restrict_to_line: wrong coordinate count")
    # projective independence: some 2x2 minor must be nonzero
    dep = True
    for i in range(len(base)):
        for j in range(i + 1, len(base)):
            if base[i] * direction[j] - base[j] * direction[i]:
                dep = False
                break
        if not dep:
            break
    if dep:
        raise DegeneratePair("base and direction are projectively dependent")
    values = [UniPoly([b, d]) for b, d in zip(base, direction)]
    out = p.evaluate(values)
    if not isinstance(out, UniPoly):
        return UniPoly([out])
    return out


def vanishing_order(p: HomogPoly, point) -> int:
    """Order of vanishing of p at a projective point.

    Works in the affine chart where some nonzero coordinate of the point is
    set to 1 and shifts the point to the origin; the order is the minimal
    total degree among the shifted terms.
    """
    point = list(point)
    if len(point) != p.num_vars:
        raise DegreeMismatch("vanishing_order: wrong coordinate count")
    pivot = None
    for i, c in enumerate(point):
        if c:
            pivot = i
            break
    if pivot is None:
        raise ValueError("point must have a nonzero coordinate")
    from .exactnum import scalar_inverse
    s = scalar_inverse(point[pivot])
    aff = [c * s for c in point]
    if p.is_zero:
        raise ValueError("vanishing order of the zero polynomial is undefined")
    n = p.num_vars
    one = {(0,) * n: Fraction(1)}
    shifted: dict = {}
    cache: dict = {}

    def value_power(i, e):
        key = (i, e)
        got = cache.get(key)
        if got is not None:
            return got
        if i == pivot:
            got = one
        else:
            ev = [0] * n
            ev[i] = 1
            lin = {(0,) * n: aff[i], tuple(ev): Fraction(1)} if aff[i] else {tuple(ev): Fraction(1)}
            got = lin
        got = _t_pow(got, e, n)
        cache[key] = got
        return got

    for exp, c in p.terms.items():
        term = {(0,) * n: c}
        for i, e in enumerate(exp):
            if e:
                term = _t_mul(term, value_power(i, e))
        shifted = _t_add(shifted, term)
    if not shifted:
        raise ValueError("polynomial vanishes identically on the chart")
    return min(sum(e) for e in shifted)
