"""The k-step linear fractional recurrence family as birational maps of P^k.

A map is determined by two covectors alpha, beta of length k+1.  In
homogeneous coordinates the forward map is

    f[x0 : ... : xk] = [x0 (b.x) : x2 (b.x) : ... : xk (b.x) : x0 (a.x)]

and the inverse is built from the derived covectors B, alpha', beta'.  The
module validates admissibility, exposes forward and inverse components,
evaluates points exactly, produces Jacobians, classifies the critical
triangle, checks reversibility for normalized critical maps, and measures
degrees of iterates on random lines.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .exactnum import (
    QQ,
    CyclotomicField,
    common_field,
    field_from_json,
    scalar_from_json,
    scalar_inverse,
    scalar_to_json,
)
from .multipoly import HomogPoly, UniPoly, restrict_to_line, uni_gcd_strip
from .rng import SplitMix64, derive


class Inadmissible(ValueError):
    """Parameters violate an admissibility clause; the message names it."""


class NotNormalized(ValueError):
    """Operation requires the normalized critical shape (alpha1=0, beta1=1, alphak=1)."""


class LineDisagreement(RuntimeError):
    """Two independent random lines measured different iterate degrees."""


class _Indeterminate:
    """Sentinel: every homogeneous component vanished at the point."""

    def __repr__(self):
        return "Indeterminate"

    def __bool__(self):
        return False


INDETERMINATE = _Indeterminate()


class Covector:
    """A projective covector; defines the hyperplane {c . x = 0}."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        if not any(coeffs):
            raise ValueError("covector must have a nonzero coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *a):
        raise AttributeError("Covector values are immutable")

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def dot(self, point):
        acc = None
        for c, x in zip(self.coeffs, point):
            if c and x:
                acc = c * x if acc is None else acc + c * x
        return acc if acc is not None else Fraction(0)

    def proportional(self, other) -> bool:
        """Same hyperplane: coefficients agree up to one global scale."""
        a, b = self.coeffs, tuple(other)
        i = next(j for j, c in enumerate(a) if c)
        if not b[i]:
            return False
        ratio = b[i] * scalar_inverse(a[i])
        return all(b[j] == ratio * a[j] for j in range(len(a)))

    def form(self) -> HomogPoly:
        return HomogPoly.linear(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Covector):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Covector{self.coeffs}"


class ProjPoint:
    """A point of P^k, canonicalized so its first nonzero coordinate is 1."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = list(coords)
        pivot = None
        for i, c in enumerate(coords):
            if c:
                pivot = i
                break
        if pivot is None:
            raise ValueError("projective point needs a nonzero coordinate")
        inv = scalar_inverse(coords[pivot])
        object.__setattr__(
            self, "coords", tuple(c * inv if c else c for c in coords))

    def __setattr__(self, *a):
        raise AttributeError("ProjPoint values are immutable")

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other):
        if isinstance(other, ProjPoint):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "[" + " : ".join(str(c) for c in self.coords) + "]"


def standard_point(k: int, i: int, field=QQ) -> ProjPoint:
    """The coordinate point e_i of P^k."""
    coords = [field.zero] * (k + 1)
    coords[i] = field.one
    return ProjPoint(coords)


class RecurrenceMap:
    """An admissible member of the family, with derived covectors attached.

    alpha_prime and beta_prime are stored as plain coefficient tuples since
    beta_prime legitimately vanishes (the Lyness shape); the remaining
    derived data gamma, B, C are genuine hyperplane covectors.
    """

    __slots__ = ("k", "alpha", "beta", "gamma", "B", "C",
                 "alpha_prime", "beta_prime", "field", "generic_flag")

    def __init__(self, k, alpha, beta, gamma, B, C, alpha_prime, beta_prime,
                 field, generic_flag):
        for name, val in (
            ("k", k), ("alpha", alpha), ("beta", beta), ("gamma", gamma),
            ("B", B), ("C", C), ("alpha_prime", alpha_prime),
            ("beta_prime", beta_prime), ("field", field),
                ("generic_flag", generic_flag)):
            object.__setattr__(self, name, val)

    def __setattr__(self, *a):
        raise AttributeError("RecurrenceMap values are immutable")

    # -- components --

    def forward_components(self) -> list[HomogPoly]:
        """[x0 b.x : x2 b.x : ... : xk b.x : x0 a.x], each of degree 2."""
        n = self.k + 1
        bx = self.beta.form()
        ax = self.alpha.form()
        x = [HomogPoly.variable(n, i) for i in range(n)]
        comps = [x[0] * bx]
        comps += [x[j] * bx for j in range(2, n)]
        comps.append(x[0] * ax)
        return comps

    def inverse_components(self) -> list[HomogPoly]:
        """[x0 B.x : x0 a'.x - xk b'.x : x1 B.x : ... : x_{k-1} B.x]."""
        n = self.k + 1
        Bx = self.B.form()
        apx = HomogPoly.linear(self.alpha_prime)
        bpx = HomogPoly.linear(self.beta_prime)
        x = [HomogPoly.variable(n, i) for i in range(n)]
        comps = [x[0] * Bx, x[0] * apx - x[self.k] * bpx]
        comps += [x[j] * Bx for j in range(1, self.k)]
        return comps

    def components(self, direction: str) -> list[HomogPoly]:
        if direction == "forward":
            return self.forward_components()
        if direction == "inverse":
            return self.inverse_components()
        raise ValueError("direction must be 'forward' or 'inverse'")

    # -- evaluation --

    def eval(self, point, direction: str = "forward"):
        """Image of a point, or INDETERMINATE when all components vanish."""
        p = list(point)
        if direction == "forward":
            bx = self.beta.dot(p)
            ax = self.alpha.dot(p)
            img = [p[0] * bx]
            img += [p[j] * bx for j in range(2, self.k + 1)]
            img.append(p[0] * ax)
        elif direction == "inverse":
            Bx = self.B.dot(p)
            apx = _dot_coeffs(self.alpha_prime, p)
            bpx = _dot_coeffs(self.beta_prime, p)
            img = [p[0] * Bx, p[0] * apx - p[self.k] * bpx]
            img += [p[j] * Bx for j in range(1, self.k)]
        else:
            raise ValueError("direction must be 'forward' or 'inverse'")
        if not any(img):
            return INDETERMINATE
        return ProjPoint(img)

    def orbit(self, point, steps: int, direction: str = "forward"):
        """Point orbit; stops early at indeterminacy.  Returns the list of
        visited points including the start."""
        out = [ProjPoint(point)]
        for _ in range(steps):
            nxt = self.eval(out[-1], direction)
            if nxt is INDETERMINATE:
                break
            out.append(nxt)
        return out

    # -- structural data --

    def jacobian(self, direction: str = "forward") -> HomogPoly:
        """x0 (b.x)^(k-1) (g.x) for the forward map, x0 (B.x)^(k-1) (C.x)
        for the inverse; constant normalized to 1."""
        n = self.k + 1
        x0 = HomogPoly.variable(n, 0)
        if direction == "forward":
            return x0 * self.beta.form() ** (self.k - 1) * self.gamma.form()
        if direction == "inverse":
            return x0 * self.B.form() ** (self.k - 1) * self.C.form()
        raise ValueError("direction must be 'forward' or 'inverse'")

    def classify_triangle(self) -> str:
        """'OneHypersurface', 'TwoHypersurfaces', or 'Nondegenerate'."""
        b1, a1 = self.beta[1], self.alpha[1]
        if not b1:
            return "TwoHypersurfaces"
        if all(not (b1 * self.alpha[j] - a1 * self.beta[j])
               for j in range(1, self.k + 1)):
            return "OneHypersurface"
        return "Nondegenerate"

    def is_critical(self) -> bool:
        """beta_j = 0 for all j > 1 and the critical triangle nondegenerate."""
        if any(self.beta[j] for j in range(2, self.k + 1)):
            return False
        return self.classify_triangle() == "Nondegenerate"

    def is_normalized_critical(self) -> bool:
        one = Fraction(1)
        return (self.is_critical()
                and not self.alpha[1]
                and self.beta[1] == one
                and self.alpha[self.k] == one)

    def tau_conjugate_forward(self) -> list[HomogPoly]:
        """Components of tau o f o tau, tau swapping x_j with x_{k-j+1}."""
        k = self.k
        perm = [0] + [k - j + 1 for j in range(1, k + 1)]
        fwd = self.forward_components()
        out = []
        for i in range(k + 1):
            src = fwd[perm[i]]
            terms = {}
            for e, c in src.terms.items():
                pe = [0] * (k + 1)
                for pos, exp in enumerate(e):
                    pe[perm[pos]] = exp
                terms[tuple(pe)] = c
            out.append(HomogPoly(k + 1, terms, src.degree))
        return out

    def reversal_check(self) -> bool:
        """Whether tau o f o tau equals the inverse map on components.

        Requires the normalized critical shape; raises NotNormalized
        otherwise.  Components are compared up to one common scalar after a
        common monomial strip.
        """
        if not self.is_normalized_critical():
            raise NotNormalized(
                "reversal check needs a critical map with alpha1=0, beta1=1, alphak=1")
        lhs = _strip_common_monomial(self.tau_conjugate_forward())
        rhs = _strip_common_monomial(self.inverse_components())
        return _proportional_tuples(lhs, rhs)

    # -- degree measurement --

    def degree_sequence_empirical(self, n_max: int, seed: int = 0) -> list[int]:
        """Degrees of f^0 .. f^n_max measured on random lines.

        The line is iterated through the map components with a gcd strip
        after every step; two independent lines must agree, otherwise the
        run is reseeded (up to 3 attempts) before LineDisagreement is
        raised.
        """
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        for attempt in range(3):
            rng = SplitMix64(derive(seed, f"degseq{attempt}"))
            seqs = []
            for _ in range(2):
                line = random_line(self, rng)
                seqs.append(self._line_degrees(line, n_max))
            if seqs[0] == seqs[1]:
                return seqs[0]
        raise LineDisagreement(
            f"line degree measurements disagree after 3 attempts: {seqs}")

    def _line_degrees(self, line, n_max: int) -> list[int]:
        degs = [1]
        cur = line
        for _ in range(n_max):
            cur, _ = self.line_step(cur)
            degs.append(max(c.degree for c in cur))
        return degs

    def line_step(self, unis, direction: str = "forward"):
        """One map step on a tuple of univariate polynomials, gcd-stripped.

        Returns (new tuple, stripped factor).  This is the degree
        measurement engine and also the transport of curve germs through
        collapses used by the orbit probes.
        """
        u = list(unis)
        if direction == "forward":
            bx = _dot_uni(self.beta, u)
            ax = _dot_uni(self.alpha, u)
            img = [u[0] * bx]
            img += [u[j] * bx for j in range(2, self.k + 1)]
            img.append(u[0] * ax)
        else:
            Bx = _dot_uni(self.B, u)
            apx = _dot_uni(self.alpha_prime, u)
            bpx = _dot_uni(self.beta_prime, u)
            img = [u[0] * Bx, u[0] * apx - u[self.k] * bpx]
            img += [u[j] * Bx for j in range(1, self.k)]
        stripped, g = uni_gcd_strip(img)
        # the tuple is projective: rescaling by a common scalar keeps the
        # coefficient sizes from doubling at every step
        lead = next(c.coeffs[-1] for c in stripped if not c.is_zero)
        inv = scalar_inverse(lead)
        return [inv * c for c in stripped], g

    # -- serialization --

    def params_to_json(self) -> dict:
        return {
            "k": self.k,
            "field": self.field.to_json(),
            "alpha": [scalar_to_json(c) for c in self.alpha],
            "beta": [scalar_to_json(c) for c in self.beta],
        }

    def __repr__(self):
        return (f"RecurrenceMap(k={self.k}, alpha={tuple(self.alpha)}, "
                f"beta={tuple(self.beta)})")


def _dot_uni(coeffs, unis):
    acc = None
    for c, u in zip(coeffs, unis):
        if c:
            t = c * u
            acc = t if acc is None else acc + t
    return acc if acc is not None else UniPoly([])


def _dot_coeffs(coeffs, point):
    acc = None
    for c, x in zip(coeffs, point):
        if c and x:
            acc = c * x if acc is None else acc + c * x
    return acc if acc is not None else Fraction(0)


def _strip_common_monomial(comps):
    """Divide out the largest common monomial factor of a component tuple."""
    nv = comps[0].num_vars
    mins = [min(e[i] for c in comps for e in c.terms) for i in range(nv)]
    if not any(mins):
        return comps
    out = []
    for c in comps:
        terms = {tuple(e[i] - mins[i] for i in range(nv)): v
                 for e, v in c.terms.items()}
        out.append(HomogPoly(nv, terms, c.degree - sum(mins)))
    return out


def _proportional_tuples(a, b) -> bool:
    """Whether two component tuples agree up to one common nonzero scalar."""
    if len(a) != len(b):
        return False
    pairs = list(zip(a, b))
    for p, q in pairs:
        if p.is_zero != q.is_zero:
            return False
    for p, q in pairs:
        if not p.is_zero:
            e = max(p.terms)
            if e not in q.terms:
                return False
            ratio = q.terms[e] * scalar_inverse(p.terms[e])
            break
    else:
        return True
    for p, q in pairs:
        if ratio * p != q:
            return False
    return True


def build(k: int, alpha, beta, field=None) -> RecurrenceMap:
    """Validate parameters and attach the derived covectors.

    Raises Inadmissible naming the violated clause: the beta tail must not
    vanish, alpha must not be a multiple of beta, (alpha1, beta1) must be
    nonzero, and some (alpha_i, beta_i) with i >= 2 must be nonzero.
    """
    if k < 3:
        raise Inadmissible(f"k must be at least 3, got {k}")
    coerced_a = [Fraction(c) if isinstance(c, int) else c for c in alpha]
    coerced_b = [Fraction(c) if isinstance(c, int) else c for c in beta]
    if len(coerced_a) != k + 1 or len(coerced_b) != k + 1:
        raise Inadmissible("covector length must be k + 1")
    if field is None:
        field = common_field(coerced_a + coerced_b)
    if not any(coerced_b[j] for j in range(1, k + 1)):
        raise Inadmissible("(beta_1, ..., beta_k) = 0: map drops to a shift")
    alpha = Covector(coerced_a)
    beta = Covector(coerced_b)
    if alpha.proportional(beta):
        raise Inadmissible("alpha is a multiple of beta: map is degenerate")
    if not alpha[1] and not beta[1]:
        raise Inadmissible("(alpha_1, beta_1) = (0, 0): x_1 never enters")
    if not any(alpha[i] or beta[i] for i in range(2, k + 1)):
        raise Inadmissible(
            "(alpha_i, beta_i) = (0, 0) for all i >= 2: map is essentially 1-dimensional")
    a1, b1 = alpha[1], beta[1]
    gamma = Covector([b1 * alpha[j] - a1 * beta[j] for j in range(k + 1)])
    B = Covector([-a1] + [Fraction(0)] * (k - 1) + [b1])
    alpha_prime = tuple([alpha[0]] + [alpha[j] for j in range(2, k + 1)] + [Fraction(0)])
    beta_prime = tuple([beta[0]] + [beta[j] for j in range(2, k + 1)] + [Fraction(0)])
    C = Covector([b1 * alpha_prime[j] - a1 * beta_prime[j] for j in range(k + 1)])
    generic = bool(b1) and all(b1 * alpha[j] - a1 * beta[j]
                               for j in range(2, k + 1))
    return RecurrenceMap(k, alpha, beta, gamma, B, C, alpha_prime,
                         beta_prime, field, generic)


def lyness(k: int, a) -> RecurrenceMap:
    """The map with alpha = (a, 0, 1, ..., 1), beta = (0, 1, 0, ..., 0)."""
    one = Fraction(1)
    zero = Fraction(0)
    alpha = [a, zero] + [one] * (k - 1)
    beta = [zero, one] + [zero] * (k - 1)
    return build(k, alpha, beta)


def is_lyness(m: RecurrenceMap):
    """(True, a) when the parameters are exactly the Lyness shape."""
    one = Fraction(1)
    if any(m.beta[j] for j in range(2, m.k + 1)) or m.beta[0] or m.beta[1] != one:
        return False, None
    if m.alpha[1]:
        return False, None
    if any(m.alpha[j] != one for j in range(2, m.k + 1)):
        return False, None
    return True, m.alpha[0]


def generic_example(k: int) -> RecurrenceMap:
    """A concrete family member with maximal degree growth, used as the
    reference witness for the generic regime: alpha = (0,1,0,...,0),
    beta = (0,1,1,...,1,2-k)."""
    zero, one = Fraction(0), Fraction(1)
    alpha = [zero, one] + [zero] * (k - 1)
    beta = [zero] + [one] * (k - 1) + [Fraction(2 - k)]
    return build(k, alpha, beta)


def random_point(m: RecurrenceMap, rng, lo: int = -10**6, hi: int = 10**6) -> ProjPoint:
    while True:
        coords = [m.field.random_scalar(rng, lo, hi) for _ in range(m.k + 1)]
        if any(coords):
            return ProjPoint(coords)


def random_line(m: RecurrenceMap, rng):
    """A random parametrized line as a tuple of degree <= 1 UniPoly."""
    while True:
        base = [m.field.random_scalar(rng) for _ in range(m.k + 1)]
        direction = [m.field.random_scalar(rng) for _ in range(m.k + 1)]
        indep = any(base[i] * direction[j] - base[j] * direction[i]
                    for i in range(m.k + 1) for j in range(i + 1, m.k + 1))
        if indep:
            return [UniPoly([b, d]) for b, d in zip(base, direction)]


def load_params(source) -> RecurrenceMap:
    """Build a map from a parameter dict or a JSON file path."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            source = json.load(fh)
    k = int(source["k"])
    field = field_from_json(source.get("field", "rational"))
    alpha = [scalar_from_json(v, field) for v in source["alpha"]]
    beta = [scalar_from_json(v, field) for v in source["beta"]]
    return build(k, alpha, beta, field)
