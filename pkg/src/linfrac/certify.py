"""Exact periodicity certification and end-to-end map classification.

A periodicity certificate combines three independent exact checks: random
point orbits that return after p steps, a generic line whose transported
parametrization returns at step p and at no earlier step, and an identity
certificate (a degree-one map of projective space fixing k + 2 points in
general position is the identity).  Minimality is recorded pointwise for
every proper divisor of p.

The period-4k parameter family lives over Q(zeta_2k): the key coefficient
is a primitive 2k-th root of unity, so its k-th power is exactly -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import orbits, picaction
from .exactnum import CyclotomicField, scalar_inverse, scalar_to_json, zeta
from .multipoly import UniPoly
from .recmap import (INDETERMINATE, ProjPoint, RecurrenceMap, build,
                     is_lyness, random_line, random_point)
from .rng import SplitMix64, derive


class OrbitHitIndeterminacy(RuntimeError):
    """Could not collect enough orbits that avoid the indeterminacy locus."""


# ---------------------------------------------------------------------------
# the period-4k family

def period4k_parameters(k: int):
    """Parameters over Q(zeta_2k) giving a map of period 4k.

    With z the canonical primitive 2k-th root of unity (so z^k = -1):
    beta = (z^(k-1), 1, 0, ..., 0) and
    alpha = (z^(k-2)/(1 - z), 0, z^(k-2), ..., z^2, z, 1).
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    fld = CyclotomicField(2 * k)
    z = fld.zeta
    zero, one = fld.zero, fld.one
    alpha = [z ** (k - 2) * scalar_inverse(one - z), zero]
    alpha += [z ** (k - j) for j in range(2, k)]
    alpha += [one]
    beta = [z ** (k - 1), one] + [zero] * (k - 1)
    return alpha, beta


def period4k_map(k: int) -> RecurrenceMap:
    alpha, beta = period4k_parameters(k)
    return build(k, alpha, beta, CyclotomicField(2 * k))


def predicted_period(k: int, n_star: int):
    """Period implied by the n* value: k-1 -> 3k-1, k -> 4k, k+1 -> 3k(k+1);
    None outside those three cases."""
    if k < 3:
        raise ValueError("k must be at least 3")
    if n_star == k - 1:
        return 3 * k - 1
    if n_star == k:
        return 4 * k
    if n_star == k + 1:
        return 3 * k * (k + 1)
    return None


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class PeriodCertificate:
    period: int
    point_trials: int
    seed: int
    line_returned_at: int
    degree_of_f_period: int
    fixed_points_checked: int
    minimality_witness: dict     # proper divisor -> witness found (bool)

    @property
    def certified(self) -> bool:
        return True

    def to_json(self):
        return {
            "verdict": "certified",
            "period": self.period,
            "point_trials": self.point_trials,
            "seed": self.seed,
            "line_returned_at": self.line_returned_at,
            "degree_of_f_period": self.degree_of_f_period,
            "fixed_points_checked": self.fixed_points_checked,
            "minimality_witness": {str(j): bool(v)
                                   for j, v in self.minimality_witness.items()},
        }


@dataclass(frozen=True)
class Refuted:
    period: int
    witness: tuple
    image: tuple
    failed_at: str

    @property
    def certified(self) -> bool:
        return False

    def to_json(self):
        return {
            "verdict": "refuted",
            "period": self.period,
            "failed_at": self.failed_at,
            "witness": [scalar_to_json(c) for c in self.witness],
            "image": [scalar_to_json(c) for c in self.image],
        }


def _orbit_avoiding_indeterminacy(m, p, rng, attempts=60):
    for _ in range(attempts):
        q = random_point(m, rng)
        orbit = [q]
        ok = True
        for _ in range(p):
            nxt = m.eval(orbit[-1])
            if nxt is INDETERMINATE:
                ok = False
                break
            orbit.append(nxt)
        if ok:
            return orbit
    raise OrbitHitIndeterminacy(
        f"no sampled orbit of length {p} avoided the indeterminacy locus")


def _proper_divisors(p):
    return [j for j in range(1, p) if p % j == 0]


def _line_tuples_projectively_equal(a, b) -> bool:
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if a[i] * b[j] != a[j] * b[i]:
                return False
    return True


def _general_position_points(m, count, rng, attempts=80):
    """count random points such that every (k+1)-subset is independent."""
    from .orbits import rref
    for _ in range(attempts):
        pts = [random_point(m, rng) for _ in range(count)]
        good = True
        for skip in range(count):
            subset = [list(pts[i]) for i in range(count) if i != skip]
            if len(rref(subset)) != m.k + 1:
                good = False
                break
        if good:
            return pts
    raise OrbitHitIndeterminacy("could not sample points in general position")


def certify_period(m: RecurrenceMap, p: int, trials: int = 20,
                   seed: int = 0):
    """Certify f^p = identity exactly, or refute with a concrete point.

    (a) `trials` random points return exactly after p steps; (b) a generic
    line parametrization, transported with a gcd strip at every step,
    returns projectively at step p and at no earlier step; (c) the measured
    degree of f^p is 1 and f^p fixes k + 2 sampled points in general
    position, which together force f^p to be the identity.  Minimality is
    witnessed pointwise for every proper divisor of p.
    """
    if p < 1:
        raise ValueError("period must be positive")
    rng = SplitMix64(derive(seed, "certify-points"))
    divisors = _proper_divisors(p)
    minimality = {j: False for j in divisors}
    for _ in range(trials):
        orbit = _orbit_avoiding_indeterminacy(m, p, rng)
        if orbit[p] != orbit[0]:
            return Refuted(p, tuple(orbit[0]), tuple(orbit[p]), "point trial")
        for j in divisors:
            if orbit[j] != orbit[0]:
                minimality[j] = True

    line_rng = SplitMix64(derive(seed, "certify-line"))
    start = random_line(m, line_rng)
    cur = list(start)
    returned_at = None
    deg_at_p = None
    for step in range(1, p + 1):
        cur, _ = m.line_step(cur)
        if step == p:
            deg_at_p = max(c.degree for c in cur)
        if _line_tuples_projectively_equal(cur, start):
            returned_at = step
            break
    if returned_at != p:
        witness_orbit = _orbit_avoiding_indeterminacy(m, p, rng)
        return Refuted(p, tuple(witness_orbit[0]), tuple(witness_orbit[p]),
                       f"line returned at {returned_at}, expected {p}")
    if deg_at_p != 1:
        orbit = _orbit_avoiding_indeterminacy(m, p, rng)
        return Refuted(p, tuple(orbit[0]), tuple(orbit[p]),
                       f"degree of f^{p} measured {deg_at_p}, expected 1")

    fp_rng = SplitMix64(derive(seed, "certify-fixed"))
    fixed_pts = _general_position_points(m, m.k + 2, fp_rng)
    for q in fixed_pts:
        cur_pt = q
        ok = True
        for _ in range(p):
            cur_pt = m.eval(cur_pt)
            if cur_pt is INDETERMINATE:
                ok = False
                break
        if not ok:
            fixed_pts = _general_position_points(m, m.k + 2, fp_rng)
            continue
        if cur_pt != q:
            return Refuted(p, tuple(q), tuple(cur_pt), "fixed point check")
    return PeriodCertificate(p, trials, seed, returned_at, deg_at_p,
                             m.k + 2, minimality)


def refute_periods_up_to(m: RecurrenceMap, max_p: int, trials: int = 2,
                         seed: int = 0) -> dict:
    """For each p <= max_p, a witness point with f^p(q) != q when one of
    the sampled orbits refutes period p.  Shares orbits across p values."""
    rng = SplitMix64(derive(seed, "refute"))
    orbits_list = [_orbit_avoiding_indeterminacy(m, max_p, rng)
                   for _ in range(trials)]
    out = {}
    for p in range(1, max_p + 1):
        for orbit in orbits_list:
            if orbit[p] != orbit[0]:
                out[p] = (tuple(orbit[0]), tuple(orbit[p]))
                break
    return out


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ClassificationReport:
    k: int
    field: object
    admissible: bool
    generic_orbit_flag: bool
    triangle: str
    critical: bool
    j_star: int
    beta_tail_nonzero: bool
    not_periodic: bool
    lyness_parameter: object
    nstar: object                 # orbits.NStarResult | None
    predicted: int | None
    growth: object                # picaction.GrowthClass | None
    degree_estimate: dict | None
    certificate: object           # PeriodCertificate | Refuted | None

    def to_json(self):
        verdict = "not periodic" if self.not_periodic else (
            "periodic" if isinstance(self.certificate, PeriodCertificate)
            else "inconclusive")
        return {
            "verdict": verdict,
            "k": self.k,
            "field": self.field.to_json(),
            "admissible": self.admissible,
            "generic_orbit_flag": self.generic_orbit_flag,
            "triangle": self.triangle,
            "critical": self.critical,
            "j_star": self.j_star,
            "beta_tail_nonzero": self.beta_tail_nonzero,
            "lyness_parameter": (None if self.lyness_parameter is None
                                 else scalar_to_json(self.lyness_parameter)),
            "n_star": None if self.nstar is None else self.nstar.to_json(),
            "predicted_period": self.predicted,
            "growth": None if self.growth is None else self.growth.to_json(),
            "degree_estimate": self.degree_estimate,
            "certificate": (None if self.certificate is None
                            else self.certificate.to_json()),
        }


def classify_map(m: RecurrenceMap, trials: int = 12, nstar_max: int | None = None,
                 seed: int = 0) -> ClassificationReport:
    """Full pipeline: admissibility and genericity flags, triangle class,
    the beta-tail non-periodicity gate, criticality; for critical maps the
    n* search with predicted period and the matching model growth class;
    for generic maps the extremal degree-growth data."""
    k = m.k
    beta_tail = any(m.beta[j] for j in range(2, k + 1))
    j_star = max(j for j in range(1, k + 1) if m.beta[j])
    triangle = m.classify_triangle()
    critical = m.is_critical()
    lyn, lyn_a = is_lyness(m)
    nstar_res = None
    predicted = None
    growth = None
    estimate = None
    certificate = None
    if critical:
        nstar_res = orbits.find_nstar(m, nstar_max, seed)
        if nstar_res.found:
            predicted = predicted_period(k, nstar_res.n_star)
            model = picaction.nstar_model(k, nstar_res.n_star)
            growth = picaction.growth_classification(model)
            estimate = {"kind": "model_radius",
                        "value": picaction.spectral_radius(
                            picaction.closed_form_charpoly(
                                "nstar", k, nstar_res.n_star)).value}
            if predicted is not None:
                certificate = certify_period(m, predicted, trials, seed)
        elif lyn:
            model = picaction.lyness_model(k)
            growth = picaction.growth_classification(model)
            estimate = {"kind": "quadratic_degree_growth", "value": 1.0}
        else:
            bound = picaction.spectral_radius(
                picaction.closed_form_charpoly("critical", k))
            estimate = {"kind": "critical_upper_bound", "value": bound.value}
    elif m.generic_flag:
        plus = picaction.spectral_radius(
            picaction.closed_form_charpoly("generic", k))
        minus = picaction.spectral_radius(
            picaction.closed_form_charpoly("generic_inverse", k))
        estimate = {"kind": "generic_extremal",
                    "value": plus.value, "inverse_value": minus.value}
    return ClassificationReport(
        k=k, field=m.field, admissible=True,
        generic_orbit_flag=m.generic_flag, triangle=triangle,
        critical=critical, j_star=j_star, beta_tail_nonzero=beta_tail,
        not_periodic=beta_tail, lyness_parameter=lyn_a if lyn else None,
        nstar=nstar_res, predicted=predicted, growth=growth,
        degree_estimate=estimate, certificate=certificate)
