"""Linear subspaces, strict transforms, exceptional orbit chains, and the
n* search.

Subspaces are stored as canonical row-reduced covector matrices over the
exact coefficient field, so equality and containment are exact tests with
no tolerance anywhere.  Strict transforms are computed by sample-map-fit:
sample generic points, map them, fit the linear span, then verify extra
samples; the verification turns a probability-one method into a checked
one.

Orbit chains are transported through collapses with curve germs: a germ is
a parametrized line carried by the map with a gcd strip after every step,
and its base point at t = 0 follows the orbit through the points where the
map itself is undefined.  Fitting spans of an ensemble of germ base points
recovers the center orbit without any blowup chart computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .exactnum import scalar_inverse, scalar_to_json
from .multipoly import UniPoly
from .recmap import (INDETERMINATE, ProjPoint, RecurrenceMap, random_point,
                     standard_point)
from .rng import SplitMix64, derive


class NonLinearImage(RuntimeError):
    """Verification samples fell outside the fitted span."""


class SampleFailure(RuntimeError):
    """Every sample of the source hit the indeterminacy locus."""


# ---------------------------------------------------------------------------
# exact row reduction

def rref(rows):
    """Reduced row echelon form over the field; zero rows dropped,
    pivots normalized to 1, returned as a tuple of tuples."""
    A = [list(r) for r in rows]
    if not A:
        return ()
    m = len(A[0])
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = scalar_inverse(A[r][c])
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                t = A[i][c]
                A[i] = [x - t * y for x, y in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    return tuple(tuple(row) for row in A[:r] if any(row))


def _reduce_against(vec, rows):
    """Reduce a vector modulo RREF rows; zero result means containment in
    their span."""
    v = list(vec)
    for row in rows:
        piv = next(i for i, x in enumerate(row) if x)
        if v[piv]:
            t = v[piv]
            v = [a - t * b for a, b in zip(v, row)]
    return v


class LinearSubspace:
    """A projective linear subspace in canonical form.

    Defined by an independent list of covectors (the codimension); held in
    reduced row echelon form so two subspaces are equal exactly when their
    covector tuples are equal.
    """

    __slots__ = ("k", "covectors")

    def __init__(self, k: int, covectors):
        rows = rref(covectors)
        if len(rows) > k:
            raise ValueError("covectors cut out the empty set")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "covectors", rows)

    def __setattr__(self, *a):
        raise AttributeError("LinearSubspace values are immutable")

    # -- constructors --

    @classmethod
    def hyperplane(cls, k: int, covector) -> "LinearSubspace":
        return cls(k, [list(covector)])

    @classmethod
    def whole_space(cls, k: int) -> "LinearSubspace":
        return cls(k, [])

    @classmethod
    def from_points(cls, k: int, points) -> "LinearSubspace":
        """The projective span of the given points."""
        span = rref([list(p) for p in points])
        if not span:
            raise ValueError("no nonzero points supplied")
        pivots = [next(i for i, x in enumerate(row) if x) for row in span]
        free = [i for i in range(k + 1) if i not in pivots]
        covs = []
        for f in free:
            c = [Fraction(0)] * (k + 1)
            c[f] = Fraction(-1)
            for row, p in zip(span, pivots):
                c[p] = row[f]
            covs.append(c)
        return cls(k, covs)

    @classmethod
    def single_point(cls, point) -> "LinearSubspace":
        coords = list(point)
        return cls.from_points(len(coords) - 1, [coords])

    @classmethod
    def coordinate_subspace(cls, k: int, zero_indices) -> "LinearSubspace":
        """{x_i = 0 for i in zero_indices}."""
        covs = []
        for i in zero_indices:
            c = [Fraction(0)] * (k + 1)
            c[i] = Fraction(1)
            covs.append(c)
        return cls(k, covs)

    # -- structure --

    @property
    def codim(self) -> int:
        return len(self.covectors)

    @property
    def dim(self) -> int:
        return self.k - len(self.covectors)

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    def to_point(self) -> ProjPoint:
        if not self.is_point:
            raise ValueError("subspace has positive dimension")
        return self.sample_point(SplitMix64(0), None)

    def contains_point(self, point) -> bool:
        pt = list(point)
        return all(not _dot(c, pt) for c in self.covectors)

    def contains(self, other: "LinearSubspace") -> bool:
        """self contains other: every covector of self lies in the span of
        other's covectors."""
        return all(not any(_reduce_against(c, other.covectors))
                   for c in self.covectors)

    def intersect(self, other: "LinearSubspace") -> "LinearSubspace":
        return LinearSubspace(self.k, list(self.covectors) + list(other.covectors))

    def sample_point(self, rng, field) -> ProjPoint:
        """A point of the subspace with random free coordinates."""
        pivots = [next(i for i, x in enumerate(row) if x) for row in self.covectors]
        free = [i for i in range(self.k + 1) if i not in pivots]
        if not free:
            raise ValueError("covectors cut out the empty set")
        while True:
            coords = [Fraction(0)] * (self.k + 1)
            for f in free:
                coords[f] = (Fraction(rng.randint(-10**6, 10**6)) if field is None
                             else field.random_scalar(rng))
            if not any(coords):
                continue
            for row, p in zip(self.covectors, pivots):
                coords[p] = -sum((row[i] * coords[i] for i in free if row[i]),
                                 start=Fraction(0))
            return ProjPoint(coords)

    def __eq__(self, other):
        if not isinstance(other, LinearSubspace):
            return NotImplemented
        return self.k == other.k and self.covectors == other.covectors

    def __hash__(self):
        return hash((self.k, self.covectors))

    def to_json(self):
        return {"codim": self.codim,
                "covectors": [[scalar_to_json(c) for c in row]
                              for row in self.covectors]}

    def __repr__(self):
        return f"LinearSubspace(dim={self.dim}, covectors={self.covectors})"


def _dot(cov, pt):
    acc = None
    for c, x in zip(cov, pt):
        if c and x:
            acc = c * x if acc is None else acc + c * x
    return acc if acc is not None else Fraction(0)


# ---------------------------------------------------------------------------
# named subspaces of a map

def sigma_coordinate(m: RecurrenceMap, i: int) -> LinearSubspace:
    return LinearSubspace.coordinate_subspace(m.k, [i])


def sigma_beta(m): return LinearSubspace.hyperplane(m.k, m.beta)
def sigma_gamma(m): return LinearSubspace.hyperplane(m.k, m.gamma)
def sigma_B(m): return LinearSubspace.hyperplane(m.k, m.B)
def sigma_C(m): return LinearSubspace.hyperplane(m.k, m.C)


def sigma_BC(m) -> LinearSubspace:
    return LinearSubspace(m.k, [list(m.B), list(m.C)])


def sigma_beta_gamma(m) -> LinearSubspace:
    return LinearSubspace(m.k, [list(m.beta), list(m.gamma)])


def sigma_0beta(m) -> LinearSubspace:
    x0 = [Fraction(0)] * (m.k + 1)
    x0[0] = Fraction(1)
    return LinearSubspace(m.k, [x0, list(m.beta)])


NAMED_START = {
    "sigma_0": lambda m: sigma_coordinate(m, 0),
    "sigma_beta": sigma_beta,
    "sigma_gamma": sigma_gamma,
    "sigma_B": sigma_B,
    "sigma_C": sigma_C,
}


# ---------------------------------------------------------------------------
# strict transform

def strict_transform(m: RecurrenceMap, V: LinearSubspace, seed: int = 0,
                     direction: str = "forward",
                     verify_samples: int = 5) -> LinearSubspace:
    """Image of a linear subspace under the map, fitted from samples.

    Samples dim(V) + 2 generic points of V avoiding indeterminacy, maps
    them, fits the linear span of the images, then checks that
    verify_samples further images land in the span.  Raises NonLinearImage
    when a verification sample escapes, SampleFailure when sampling cannot
    avoid the indeterminacy locus.
    """
    rng = SplitMix64(derive(seed, "strict_transform"))
    needed = V.dim + 2
    images = []
    attempts = 0
    while len(images) < needed + verify_samples:
        if attempts > 60 * (needed + verify_samples):
            raise SampleFailure(
                "could not sample the source off the indeterminacy locus")
        attempts += 1
        q = V.sample_point(rng, m.field)
        img = m.eval(q, direction)
        if img is INDETERMINATE:
            continue
        images.append(img)
    W = LinearSubspace.from_points(m.k, images[:needed])
    for img in images[needed:]:
        if not W.contains_point(img):
            raise NonLinearImage("image of the subspace is not linear")
    return W


# ---------------------------------------------------------------------------
# germ transport and exceptional chains

def _sample_germs(m, V, count, rng):
    germs = []
    attempts = 0
    while len(germs) < count:
        if attempts > 80 * count:
            raise SampleFailure("could not seed germs on the source")
        attempts += 1
        q = V.sample_point(rng, m.field)
        r = random_point(m, rng)
        line = [UniPoly([a, b]) for a, b in zip(q, r)]
        if all(u.is_zero for u in line):
            continue
        germs.append(line)
    return germs


def _germ_base(germ) -> ProjPoint:
    return ProjPoint([u.coeffs[0] if u.coeffs else Fraction(0) for u in germ])


def germ_orbit(m: RecurrenceMap, V: LinearSubspace, steps: int,
               direction: str = "forward", seed: int = 0) -> list[ProjPoint]:
    """Base-point orbit of one transversal curve germ rooted on V.

    While the orbit stays off the indeterminacy locus this is the plain
    point orbit; at a collapse the gcd strip carries the germ through and
    the base point continues along the induced orbit.
    """
    rng = SplitMix64(derive(seed, "germ_orbit"))
    germ = _sample_germs(m, V, 1, rng)[0]
    out = [_germ_base(germ)]
    for _ in range(steps):
        germ, _ = m.line_step(germ, direction)
        out.append(_germ_base(germ))
    return out


@dataclass(frozen=True)
class ChainStep:
    subspace: LinearSubspace
    annotation: str              # "start" | "regular image" | "collapse"
    through_indeterminacy: bool  # collapse transported through the base locus

    def to_json(self):
        return {"subspace": self.subspace.to_json(),
                "annotation": self.annotation,
                "through_indeterminacy": self.through_indeterminacy}


@dataclass(frozen=True)
class OrbitChain:
    steps: tuple
    closed: bool

    def subspaces(self):
        return [s.subspace for s in self.steps]

    def to_json(self):
        return {"closed": self.closed,
                "steps": [s.to_json() for s in self.steps]}


def exceptional_chain(m: RecurrenceMap, which: str, direction: str = "forward",
                      max_len: int = 0, seed: int = 0) -> OrbitChain:
    """Orbit chain of a named exceptional hypersurface.

    Iterated strict transform realized on an ensemble of curve germs, so
    the chain continues through steps where the current center lies inside
    the indeterminacy locus; those steps are annotated as indeterminate
    collapses.  Stops when the chain closes, degenerates, or max_len steps
    were taken.
    """
    if which not in NAMED_START:
        raise ValueError(f"unknown start {which!r}; one of {sorted(NAMED_START)}")
    if max_len <= 0:
        max_len = 3 * m.k + 2
    rng = SplitMix64(derive(seed, f"chain-{which}-{direction}"))
    start = NAMED_START[which](m)
    germs = _sample_germs(m, start, m.k + 2, rng)
    steps = [ChainStep(start, "start", False)]
    seen = {start: 0}
    closed = False
    prev = start
    for _ in range(max_len):
        prev_bases = [_germ_base(g) for g in germs]
        through_indet = all(m.eval(b, direction) is INDETERMINATE
                            for b in prev_bases)
        germs = [m.line_step(g, direction)[0] for g in germs]
        bases = [_germ_base(g) for g in germs]
        node = LinearSubspace.from_points(m.k, bases)
        if node.dim == prev.dim and not through_indet:
            note = "regular image"
        else:
            note = "collapse"
        steps.append(ChainStep(node, note, through_indet))
        if node in seen:
            closed = True
            break
        seen[node] = len(steps) - 1
        prev = node
    return OrbitChain(tuple(steps), closed)


def critical_center_cycle(m: RecurrenceMap, seed: int = 0) -> OrbitChain:
    """The closed 3k-cycle of centers for a critical map, transported by
    germs from the second exceptional hyperplane all the way around."""
    if not m.is_critical():
        raise ValueError("center cycle is defined for critical maps")
    return exceptional_chain(m, "sigma_beta", "forward", 3 * m.k, seed)


# ---------------------------------------------------------------------------
# pre-fixed subspaces

@dataclass(frozen=True)
class PrefixedResult:
    j_star: int
    subspace: LinearSubspace | None
    chain: tuple | None
    verified: bool

    def to_json(self):
        return {"j_star": self.j_star,
                "subspace": None if self.subspace is None else self.subspace.to_json(),
                "chain": None if self.chain is None else [s.to_json() for s in self.chain],
                "verified": self.verified}


def prefixed_subspace(m: RecurrenceMap, seed: int = 0) -> PrefixedResult:
    """The inverse-invariant subspace attached to the top nonzero beta entry.

    j* is the largest index with beta_j nonzero.  For j* > 1 the subspace
    is cut out of {x0 = b.x = 0} by shifted copies of the beta tail; it is
    verified to be fixed by the inverse strict transform and to absorb the
    inverse orbit of {x0 = 0} after k - j* + 1 steps.  For j* = 1 the
    inverse orbit of {x0 = 0} marches through the nested coordinate
    subspaces down to e_k, and that chain is returned instead.
    """
    k = m.k
    j_star = max(j for j in range(1, k + 1) if m.beta[j])
    if j_star == 1:
        chain = [sigma_coordinate(m, 0)]
        verified = True
        for _ in range(k):
            try:
                nxt = strict_transform(m, chain[-1], seed, "inverse")
            except (NonLinearImage, SampleFailure):
                verified = False
                break
            chain.append(nxt)
            if nxt.is_point:
                break
        ek = LinearSubspace.single_point(standard_point(k, k, m.field))
        verified = verified and chain[-1] == ek
        return PrefixedResult(1, None, tuple(chain), verified)
    covs = [[Fraction(1)] + [Fraction(0)] * k, list(m.beta)]
    for ell in range(j_star, k + 1):
        c = [Fraction(0)] * (k + 1)
        for i in range(1, j_star + 1):
            c[k - ell + i] = c[k - ell + i] + m.beta[i]
        if any(c):
            covs.append(c)
    L = LinearSubspace(k, covs)
    try:
        fixed = strict_transform(m, L, seed, "inverse") == L
        V = sigma_coordinate(m, 0)
        for _ in range(k - j_star + 1):
            V = strict_transform(m, V, seed, "inverse")
        absorbed = V == L
    except (NonLinearImage, SampleFailure):
        return PrefixedResult(j_star, L, None, False)
    return PrefixedResult(j_star, L, None, fixed and absorbed)


# ---------------------------------------------------------------------------
# the n* search

@dataclass(frozen=True)
class NStarResult:
    found: bool
    n_star: int | None
    terminal: LinearSubspace | None
    reason: str
    orbit: tuple
    side_condition_hits: tuple = ()

    @property
    def side_condition_clean(self) -> bool:
        return not self.side_condition_hits

    def to_json(self):
        return {"found": self.found, "n_star": self.n_star,
                "reason": self.reason,
                "side_condition_hits": [list(h) for h in self.side_condition_hits],
                "terminal": None if self.terminal is None else self.terminal.to_json(),
                "orbit_length": len(self.orbit)}


def default_nstar_bound(k: int) -> int:
    """Past ceil((k^2 + k)/(k - 1)) + 2 steps the growth is exponential and
    the search is hopeless."""
    return ceil((k * k + k) / (k - 1)) + 2


def find_nstar(m: RecurrenceMap, max_steps: int | None = None,
               seed: int = 0) -> NStarResult:
    """Forward orbit of {B.x = C.x = 0} until it meets {b.x = g.x = 0}.

    The side condition that intermediate images avoid the three exceptional
    hyperplanes is enforced by exact containment tests; entering one of
    them, or a nonlinear image, terminates the search with that reason,
    which is distinct from exceeding the step bound.
    """
    if not m.is_critical():
        raise ValueError("the n* search applies to critical maps")
    if max_steps is None:
        max_steps = default_nstar_bound(m.k)
    target = sigma_beta_gamma(m)
    guards = [("sigma_0", sigma_coordinate(m, 0)),
              ("sigma_beta", sigma_beta(m)),
              ("sigma_gamma", sigma_gamma(m))]
    V = sigma_BC(m)
    orbit = [V]
    if V == target:
        return NStarResult(True, 0, V, "initial plane already terminal", tuple(orbit))
    for n in range(1, max_steps + 1):
        for name, hyp in guards:
            if hyp.contains(V):
                return NStarResult(False, None, V,
                                   f"orbit contained in {name} after {n - 1} steps",
                                   tuple(orbit))
        try:
            V = strict_transform(m, V, derive(seed, f"nstar{n}"), "forward")
        except NonLinearImage:
            return NStarResult(False, None, orbit[-1],
                               f"image not linear at step {n}", tuple(orbit))
        except SampleFailure:
            return NStarResult(False, None, orbit[-1],
                               f"orbit hit indeterminacy at step {n}", tuple(orbit))
        orbit.append(V)
        if V == target:
            return NStarResult(True, n, V, "terminal plane reached", tuple(orbit))
    return NStarResult(False, None, V, f"bound of {max_steps} steps exceeded",
                       tuple(orbit))


# ---------------------------------------------------------------------------
# regularity probe

@dataclass(frozen=True)
class RegularityReport:
    violation: dict | None
    orbits: dict

    @property
    def clean(self) -> bool:
        return self.violation is None

    def to_json(self):
        return {"violation": self.violation,
                "orbits": {name: [[scalar_to_json(c) for c in p] for p in pts]
                           for name, pts in self.orbits.items()}}


def regularity_probe(m: RecurrenceMap, N: int = 20, seed: int = 0,
                     germs_per_surface: int = 3) -> RegularityReport:
    """Sampled check of the orbit-avoidance condition behind 1-regularity.

    Forward germ orbits rooted on the two forward-exceptional hyperplanes
    must avoid {b.x = g.x = 0} and {x0 = b.x = 0}; inverse germ orbits
    rooted on the two inverse-exceptional hyperplanes must avoid
    {B.x = C.x = 0} and e_k.  The first violating base point is reported
    with its surface and step.
    """
    ek = standard_point(m.k, m.k, m.field)
    checks = [
        ("sigma_beta", sigma_beta(m), "forward",
         [("sigma_beta_gamma", sigma_beta_gamma(m)), ("sigma_0beta", sigma_0beta(m))]),
        ("sigma_gamma", sigma_gamma(m), "forward",
         [("sigma_beta_gamma", sigma_beta_gamma(m)), ("sigma_0beta", sigma_0beta(m))]),
        ("sigma_0", sigma_coordinate(m, 0), "inverse",
         [("sigma_BC", sigma_BC(m)), ("e_k", LinearSubspace.single_point(ek))]),
        ("sigma_C", sigma_C(m), "inverse",
         [("sigma_BC", sigma_BC(m)), ("e_k", LinearSubspace.single_point(ek))]),
    ]
    orbits = {}
    violation = None
    for name, surface, direction, bad_sets in checks:
        collected = []
        for g in range(germs_per_surface):
            pts = germ_orbit(m, surface, N, direction,
                             derive(seed, f"probe-{name}-{g}"))
            collected = pts
            for step, pt in enumerate(pts[1:], start=1):
                for bad_name, bad in bad_sets:
                    if bad.contains_point(pt) and violation is None:
                        violation = {"surface": name, "step": step,
                                     "bad_set": bad_name,
                                     "point": [scalar_to_json(c) for c in pt]}
        orbits[name] = [list(p) for p in collected]
    return RegularityReport(violation, orbits)
