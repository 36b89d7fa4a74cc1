"""Integer pullback matrices on divisor classes and their spectral analysis.

Four regularization models are constructed from chain descriptions (ordered
orbit chains of exceptional classes plus anchor class expansions):

  * generic_model / inverse_generic_model: hyperplane class H, the fiber E1
    over e_1, and the fibers S0,j over the nested coordinate subspaces;
  * critical_model: the generic basis extended by the fibers P0,j over the
    inverse-side subspaces and Ek over e_k;
  * nstar_model: the critical basis extended by the n*+1 fiber classes over
    the forward orbit of the plane {B.x = C.x = 0};
  * lyness_model: the critical basis extended by a single pullback cycle of
    3k+1 fiber classes (labels G1..G_{3k+1}).

Every model construction ends in a mandatory self-check: the characteristic
polynomial of the built matrix must equal the closed form for that family,
exactly.  Characteristic polynomials are computed division-free over the
integers (Berkowitz); floating point enters only in root moduli.

Whether a spectral radius equals 1 is decided exactly: a monic integer
polynomial whose nonzero part is a product of cyclotomic polynomials has all
roots on the unit circle, and by Kronecker's theorem any other monic integer
polynomial (with nonzero constant term) has a root of modulus strictly
greater than 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath

from .exactnum import cyclotomic_polynomial, euler_phi


class SelfCheckFailed(RuntimeError):
    """A constructed matrix does not reproduce its closed-form char poly."""


class NonDivisible(ArithmeticError):
    """The (x-1) division of a closed-form numerator left a remainder."""


class PrecisionExhausted(RuntimeError):
    """Root finding failed to stabilize at the requested precision."""


# ---------------------------------------------------------------------------
# integer polynomial helpers (dense lists, lowest degree first)

def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_sub(a, b):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] -= x
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def poly_eval_int(p, x: int) -> int:
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_derivative(p):
    return [i * c for i, c in enumerate(p)][1:] or [0]


def _x_power_minus_one(n):
    out = [0] * (n + 1)
    out[0], out[n] = -1, 1
    return out


def _divmod_monic_int(a, b):
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


def _divide_by_x_minus_1(num):
    q, r = _divmod_monic_int(num, [-1, 1])
    if any(r):
        raise NonDivisible("numerator is not divisible by (x - 1)")
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    return q


# ---------------------------------------------------------------------------
# exact characteristic polynomial, ranks, orders

def charpoly(M) -> list[int]:
    """Monic characteristic polynomial det(xI - M), lowest degree first.

    Berkowitz's division-free algorithm; all arithmetic stays in the
    integers.
    """
    n = len(M)
    if n == 0:
        return [1]
    vec = [1, -M[0][0]]
    for i in range(1, n):
        row = [M[i][j] for j in range(i)]
        col = [M[j][i] for j in range(i)]
        sub = [[M[a][b] for b in range(i)] for a in range(i)]
        t = [1, -M[i][i]]
        v = col[:]
        for _ in range(i - 1):
            t.append(-sum(row[a] * v[a] for a in range(i)))
            v = [sum(sub[a][b] * v[b] for b in range(i)) for a in range(i)]
        t.append(-sum(row[a] * v[a] for a in range(i)))
        new = [0] * (i + 2)
        for a, va in enumerate(vec):
            if va:
                for b, tb in enumerate(t):
                    if a + b < i + 2:
                        new[a + b] += va * tb
        vec = new
    return vec[::-1]


def mat_mul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_rank(M) -> int:
    """Exact rank over Q."""
    A = [[Fraction(x) for x in row] for row in M]
    n, m = len(A), len(A[0]) if A else 0
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(n):
            if i != r and A[i][c]:
                t = A[i][c]
                A[i] = [x - t * y for x, y in zip(A[i], A[r])]
        r += 1
        if r == n:
            break
    return r


def matrix_order(M, cap: int):
    """Smallest n <= cap with M^n = I, or None."""
    n = len(M)
    ident = mat_identity(n)
    P = M
    for t in range(1, cap + 1):
        if P == ident:
            return t
        P = mat_mul(P, M)
    return None


def det_from_charpoly(p) -> int:
    n = len(p) - 1
    return (-1) ** n * p[0]


# ---------------------------------------------------------------------------
# cyclotomic factorization (exact radius-1 test)

def cyclotomic_factor_orders(p):
    """Orders of the cyclotomic factors of a monic integer polynomial.

    Strips any x^a factor first.  Returns (orders with multiplicity,
    fully_cyclotomic flag); the flag is True when the stripped polynomial is
    exactly a product of cyclotomic polynomials, which happens if and only
    if every root lies on the unit circle.
    """
    p = list(p)
    while len(p) > 1 and p[0] == 0:
        p.pop(0)
    deg = len(p) - 1
    if deg == 0:
        return [], True
    orders = []
    m = 1
    # phi(m) >= sqrt(m/2), so all candidate orders lie below 2*deg^2 + 2
    while m <= 2 * deg * deg + 2 and len(p) > 1:
        phi = cyclotomic_polynomial(m)
        if len(phi) - 1 <= len(p) - 1:
            q, r = _divmod_monic_int(p, list(phi))
            if not any(r):
                orders.append(m)
                p = q
                continue
        m += 1
    return orders, len(p) == 1


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


# ---------------------------------------------------------------------------
# spectral radius with exact isolation of a dominant real root

@dataclass(frozen=True)
class SpectralRadius:
    value: float
    dominant_real: bool
    isolating_interval: tuple | None
    exactly_one: bool

    def to_json(self):
        return {
            "value": self.value,
            "dominant_real": self.dominant_real,
            "isolating_interval": (
                None if self.isolating_interval is None
                else [str(self.isolating_interval[0]), str(self.isolating_interval[1])]),
            "exactly_one": self.exactly_one,
        }


def _eval_fraction(p, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def spectral_radius(p, precision: int = 80) -> SpectralRadius:
    """Maximum modulus over the complex roots of an integer polynomial.

    Root moduli come from floating root finding at the requested bit
    precision.  When the dominant modulus is attained by a real root, an
    isolating interval with exact sign changes of the integer polynomial at
    rational endpoints is attached.  Whether the radius equals 1 exactly is
    decided by cyclotomic factorization, never by floating comparison.
    """
    p = list(p)
    if len(p) < 2:
        raise ValueError("polynomial must be nonconstant")
    _, fully_cyc = cyclotomic_factor_orders(p)
    if fully_cyc:
        return SpectralRadius(1.0, True, None, True)
    roots = None
    for extra in (40, 120, 360):
        try:
            with mpmath.workprec(precision + extra):
                roots = mpmath.polyroots(
                    [mpmath.mpf(c) for c in p[::-1]], maxsteps=200, extraprec=extra)
            break
        except mpmath.libmp.libhyper.NoConvergence:
            continue
    if roots is None:
        raise PrecisionExhausted("root finding did not converge")
    with mpmath.workprec(precision + 40):
        moduli = [abs(r) for r in roots]
        rmax = max(moduli)
        eps = mpmath.mpf(2) ** (-precision // 2)
        dominant_real = any(abs(mpmath.im(r)) < eps and abs(abs(r) - rmax) < eps
                            for r in roots)
        interval = None
        if dominant_real:
            cand = max((r for r in roots if abs(mpmath.im(r)) < eps),
                       key=lambda r: abs(mpmath.re(r)))
            x0 = mpmath.re(cand)
            interval = _isolate_real_root(p, x0, precision)
            if interval is None:
                dominant_real = False
        return SpectralRadius(float(rmax), bool(dominant_real), interval, False)


def _isolate_real_root(p, x0, precision: int):
    """Exact sign-checked isolating interval around a floating estimate."""
    approx = Fraction(str(x0)) if not isinstance(x0, Fraction) else x0
    for width_exp in range(8, 64, 4):
        h = Fraction(1, 2 ** width_exp)
        lo, hi = approx - h, approx + h
        slo, shi = _eval_fraction(p, lo), _eval_fraction(p, hi)
        if slo == 0:
            return (lo, lo)
        if shi == 0:
            return (hi, hi)
        if (slo < 0) != (shi < 0):
            target = Fraction(1, 2 ** precision)
            while hi - lo > target:
                mid = (lo + hi) / 2
                sm = _eval_fraction(p, mid)
                if sm == 0:
                    return (mid, mid)
                if (sm < 0) == (slo < 0):
                    lo, slo = mid, sm
                else:
                    hi = mid
            return (lo, hi)
    return None


# ---------------------------------------------------------------------------
# model construction

@dataclass(frozen=True)
class PicMatrix:
    name: str
    k: int
    basis: tuple
    matrix: tuple
    n_star: int | None = None

    @property
    def size(self) -> int:
        return len(self.basis)

    def rows(self):
        return [list(r) for r in self.matrix]

    def to_json(self):
        return {
            "name": self.name,
            "k": self.k,
            "n_star": self.n_star,
            "basis": list(self.basis),
            "matrix": [list(r) for r in self.matrix],
        }


def _chain_matrix(labels, cols):
    idx = {l: i for i, l in enumerate(labels)}
    n = len(labels)
    M = [[0] * n for _ in range(n)]
    for src, expansion in cols.items():
        j = idx[src]
        for coef, dst in expansion:
            M[idx[dst]][j] += coef
    return M


def _freeze(name, k, labels, M, closed, n_star=None):
    got = charpoly(M)
    if got != list(closed):
        raise SelfCheckFailed(
            f"{name}(k={k}{'' if n_star is None else f', n*={n_star}'}): "
            f"char poly {got} != closed form {list(closed)}")
    return PicMatrix(name, k, tuple(labels), tuple(tuple(r) for r in M), n_star)


def _s_labels(k):
    return [f"S0,{j}" for j in range(3, k + 1)]


def _p_labels(k):
    return [f"P0,{j}" for j in range(1, k - 1)]


def generic_model(k: int) -> PicMatrix:
    """Pullback action on Pic of the e_1-tower model; basis H, E1, S0,j."""
    if k < 3:
        raise ValueError("k must be at least 3")
    S = _s_labels(k)
    labels = ["H", "E1"] + S
    sigma0 = [(1, "H"), (-1, "E1")] + [(-1, s) for s in S]
    cols = {"H": [(2, "H"), (-1, "E1")], "E1": [(1, S[0])]}
    for a, b in zip(S, S[1:]):
        cols[a] = [(1, b)]
    cols[S[-1]] = sigma0
    return _freeze("generic", k, labels, _chain_matrix(labels, cols),
                   closed_form_charpoly("generic", k))


def inverse_generic_model(k: int) -> PicMatrix:
    """Pullback action of the inverse map on the same basis."""
    if k < 3:
        raise ValueError("k must be at least 3")
    S = _s_labels(k)
    labels = ["H", "E1"] + S
    below = [(-1, "E1")] + [(-1, s) for s in S]
    cols = {"H": [(2, "H")] + below, "E1": [(1, "H")] + below}
    chain = S[::-1]
    for a, b in zip(chain, chain[1:]):
        cols[a] = [(1, b)]
    cols[S[0]] = [(1, "E1")]
    return _freeze("generic_inverse", k, labels, _chain_matrix(labels, cols),
                   closed_form_charpoly("generic_inverse", k))


def _critical_cols(k):
    S, P = _s_labels(k), _p_labels(k)
    labels = ["H", "E1"] + S + P + ["Ek"]
    sigma0 = ([(1, "H"), (-1, "E1")] + [(-1, s) for s in S]
              + [(-1, p) for p in P] + [(-1, "Ek")])
    sigma_beta = [(1, "H")] + [(-1, p) for p in P] + [(-1, "Ek")]
    cols = {"H": [(2, "H"), (-1, "E1")] + [(-1, p) for p in P] + [(-1, "Ek")],
            "E1": [(1, S[0])]}
    for a, b in zip(S, S[1:]):
        cols[a] = [(1, b)]
    cols[S[-1]] = sigma0
    chain = P + ["Ek"]
    for a, b in zip(chain, chain[1:]):
        cols[a] = [(1, b)]
    cols["Ek"] = sigma_beta
    return labels, cols, sigma0, sigma_beta


def critical_model(k: int) -> PicMatrix:
    """Action for critical maps on the doubly extended basis (size 2k-1)."""
    if k < 3:
        raise ValueError("k must be at least 3")
    labels, cols, _, _ = _critical_cols(k)
    return _freeze("critical", k, labels, _chain_matrix(labels, cols),
                   closed_form_charpoly("critical", k))


def inverse_critical_model(k: int) -> PicMatrix:
    """The inverse map's critical action.

    The inverse of a normalized critical map is its conjugate under the
    coordinate swap x_j <-> x_{k-j+1}, which pairs E1 with Ek and S0,j with
    P0,k+1-j; the matrix is the corresponding permutation conjugate and has
    the same characteristic polynomial.
    """
    base = critical_model(k)
    pair = {"H": "H", "E1": "Ek", "Ek": "E1"}
    for j in range(3, k + 1):
        pair[f"S0,{j}"] = f"P0,{k + 1 - j}"
        pair[f"P0,{k + 1 - j}"] = f"S0,{j}"
    labels = list(base.basis)
    idx = {l: i for i, l in enumerate(labels)}
    perm = [idx[pair[l]] for l in labels]
    n = len(labels)
    M = [[base.matrix[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
    return _freeze("critical_inverse", k, labels, M,
                   closed_form_charpoly("critical", k))


def nstar_model(k: int, n_star: int) -> PicMatrix:
    """Action once the plane {B.x = C.x = 0} reaches {b.x = g.x = 0} in
    n_star steps; critical basis extended by the n_star+1 orbit fibers.

    The final fiber F_{n*+1} sits over a center inside both the second
    exceptional hyperplane and the base locus, so it is subtracted from the
    {Sigma_beta} expansion and from the pullback of H.  Self-checked
    against the closed form.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if n_star < k - 1:
        raise ValueError("n_star must be at least k - 1 for critical maps")
    labels, cols, _, sigma_beta = _critical_cols(k)
    F = [f"F{j}" for j in range(1, n_star + 2)]
    labels = labels + F
    for j in range(1, len(F)):
        cols[F[j]] = [(1, F[j - 1])]
    cols[F[0]] = [(1, "H"), (-1, "E1"), (-1, F[-1])]
    cols["Ek"] = sigma_beta + [(-1, F[-1])]
    cols["H"] = cols["H"] + [(-1, F[-1])]
    return _freeze("nstar", k, labels, _chain_matrix(labels, cols),
                   closed_form_charpoly("nstar", k, n_star), n_star)


def lyness_model(k: int) -> PicMatrix:
    """Action for the Lyness map; critical basis extended by the closed
    pullback cycle G1..G_{3k+1} of orbit fibers.

    In geometric order the cycle classes are the fibers over the forward
    orbit of {B.x = C.x = 0} (G1..G_{k+1}), the fibers over the points
    q_j = e_j - e_{j+1} in reverse order (G_{k+2}..G_{2k}), and the fibers
    over the backward orbit of {b.x = g.x = 0} in reverse order
    (G_{2k+1}..G_{3k+1}); the pullback sends each class to its predecessor
    and G1 to the {Sigma_gamma} expansion.  Self-checked against the
    closed form, and cross-validated elsewhere against measured degrees.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    S, P = _s_labels(k), _p_labels(k)
    G = [f"G{a}" for a in range(1, 3 * k + 2)]
    labels = ["H", "E1"] + S + P + ["Ek"] + G

    def g(a):
        return G[a - 1]

    f_k, f_km1 = g(k + 1), g(k)
    h_k, h_0 = g(2 * k + 1), g(3 * k + 1)
    q_all = [g(a) for a in range(k + 2, 2 * k + 1)]
    q_2up = [g(a) for a in range(k + 2, 2 * k)]
    sigma0 = ([(1, "H"), (-1, "E1")] + [(-1, s) for s in S]
              + [(-1, p) for p in P] + [(-1, "Ek"), (-1, h_k)]
              + [(-1, q) for q in q_all] + [(-1, f_k)])
    sigma_beta = ([(1, "H")] + [(-1, p) for p in P]
                  + [(-1, "Ek"), (-1, h_0)] + [(-1, q) for q in q_2up]
                  + [(-1, f_k), (-1, f_km1)])
    sigma_gamma = ([(1, "H"), (-1, "E1"), (-1, h_0), (-1, h_k)]
                   + [(-1, q) for q in q_2up])
    cols = {"H": ([(2, "H"), (-1, "E1")] + [(-1, p) for p in P]
                  + [(-1, "Ek"), (-1, h_0), (-1, h_k)]
                  + [(-1, q) for q in q_2up] + [(-1, f_k)]),
            "E1": [(1, S[0])]}
    for a, b in zip(S, S[1:]):
        cols[a] = [(1, b)]
    cols[S[-1]] = sigma0
    chain = P + ["Ek"]
    for a, b in zip(chain, chain[1:]):
        cols[a] = [(1, b)]
    cols["Ek"] = sigma_beta
    for a in range(2, 3 * k + 2):
        cols[g(a)] = [(1, g(a - 1))]
    cols[g(1)] = sigma_gamma
    return _freeze("lyness", k, labels, _chain_matrix(labels, cols),
                   closed_form_charpoly("lyness", k))


# ---------------------------------------------------------------------------
# closed forms

def closed_form_charpoly(model: str, k: int, n_star: int | None = None):
    """Closed-form characteristic polynomial of a model family, monic with
    integer coefficients, lowest degree first.

    'generic'          x^k - (x^k - 1)/(x - 1)
    'generic_inverse'  x^k - x^(k-1) - 1  (the inverse action's char poly)
    'critical'         x^(2k-1) - (x^k - 1)/(x - 1)
    'nstar'            the degree 2k+n* quotient of the displayed numerator
                       by (x - 1), computed by exact division
    'lyness'           (x^k - 1)(x^(k+1) - 1)(x^(3k-1) - 1)
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if model == "generic":
        return [-1] * k + [1]
    if model == "generic_inverse":
        p = [0] * (k + 1)
        p[k], p[k - 1], p[0] = 1, -1, -1
        return p
    if model == "critical":
        p = [0] * 2 * k
        p[2 * k - 1] = 1
        for i in range(k):
            p[i] -= 1
        return p
    if model == "nstar":
        if n_star is None:
            raise ValueError("nstar closed form needs n_star")
        num = [0] * (2 + 2 * k + n_star)
        for e, s in ((1 + 2 * k + n_star, 1), (2 * k + n_star, -1),
                     (1 + k + n_star, -1), (1 + n_star, 1),
                     (2 * k, 1), (k, -1), (1, -1), (0, 1)):
            num[e] += s
        return _divide_by_x_minus_1(num)
    if model == "lyness":
        p = poly_mul(_x_power_minus_one(k), _x_power_minus_one(k + 1))
        p = poly_mul(p, _x_power_minus_one(3 * k - 1))
        if p[-1] < 0:
            p = [-c for c in p]
        return p
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# growth classification and degree prediction

@dataclass(frozen=True)
class GrowthClass:
    kind: str                      # "exponential" | "polynomial" | "bounded"
    degree: int | None = None      # polynomial growth exponent
    order: int | None = None       # matrix order for bounded; None = unknown
    radius: SpectralRadius | None = None
    jordan_block: int | None = None
    ranks: tuple = ()

    def to_json(self):
        return {
            "kind": self.kind,
            "degree": self.degree,
            "order": self.order,
            "jordan_block": self.jordan_block,
            "radius": None if self.radius is None else self.radius.to_json(),
        }


def predicted_degree_sequence(M: PicMatrix, n: int) -> list[int]:
    """Degrees of the iterates read off as H-coefficients of powers applied
    to the hyperplane class (H is always the first basis vector)."""
    size = M.size
    rows = M.matrix
    v = [0] * size
    v[0] = 1
    out = [1]
    for _ in range(n):
        v = [sum(rows[i][j] * v[j] for j in range(size)) for i in range(size)]
        out.append(v[0])
    return out


def growth_classification(M: PicMatrix) -> GrowthClass:
    """Exponential / polynomial / bounded growth of the powers of M.

    Exponential exactly when the char poly is not a product of cyclotomics
    (and powers of x).  At radius one the Jordan block size at eigenvalue 1
    comes from exact ranks of (M - I)^j; block size s >= 2 gives growth
    degree s - 1, and a diagonalizable matrix is probed for finite order up
    to the cyclotomic lcm bound (hard cap 10 k^2 otherwise).
    """
    p = charpoly(M.rows())
    orders, fully_cyc = cyclotomic_factor_orders(p)
    if not fully_cyc:
        rad = spectral_radius(p)
        return GrowthClass("exponential", radius=rad)
    n = M.size
    rows = M.rows()
    MI = [[rows[i][j] - int(i == j) for j in range(n)] for i in range(n)]
    ranks = []
    P = MI
    while True:
        ranks.append(mat_rank(P))
        if len(ranks) >= 2 and ranks[-1] == ranks[-2]:
            break
        if len(ranks) > n:
            break
        P = mat_mul(P, MI)
    block = len(ranks) - 1
    radius = SpectralRadius(1.0, True, None, True)
    if block >= 2:
        return GrowthClass("polynomial", degree=block - 1, radius=radius,
                           jordan_block=block, ranks=tuple(ranks))
    cap = _lcm(orders) if orders else 1
    if p[0] == 0:
        return GrowthClass("bounded", order=None, radius=radius,
                           jordan_block=block, ranks=tuple(ranks))
    cap = min(max(cap, 1), 10 * M.k * M.k)
    order = matrix_order(M.rows(), cap)
    return GrowthClass("bounded", order=order, radius=radius,
                       jordan_block=block, ranks=tuple(ranks))


def chi_diagnostics(k: int, n_star: int) -> dict:
    """Derivative data of the n*-family closed form at x = 1 plus the
    floating maximum root modulus with an exactness flag.

    The first derivative at 1 turns negative exactly when
    n* > (k^2 + k)/(k - 1); the second derivative of the (x - 1)-cleared
    numerator at 1 equals 2((1 - k) n* + k(k + 1)).
    """
    chi = closed_form_charpoly("nstar", k, n_star)
    d1 = poly_eval_int(poly_derivative(chi), 1)
    num = poly_mul(chi, [-1, 1])
    d2_num = poly_eval_int(poly_derivative(poly_derivative(num)), 1)
    rad = spectral_radius(chi)
    return {
        "k": k,
        "n_star": n_star,
        "chi1_derivative": d1,
        "chi1_derivative_sign": (d1 > 0) - (d1 < 0),
        "second_derivative_value": d2_num,
        "max_root_modulus": rad.value,
        "radius_exactly_one": rad.exactly_one,
        "dominant_real": rad.dominant_real,
    }
