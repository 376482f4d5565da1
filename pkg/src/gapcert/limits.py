"""Boundary limit planes: values, transversality, convergence, regularity.

For a certified triple (representation, subset, gap index k) the forward
limit map sends an eventually periodic forward endpoint to the limit of
the attracting k-planes computed along its prefixes; the backward map is
the same computation on the flipped subset at the complementary index.
This module evaluates those maps with a stopping rule that couples the
observed Grassmannian steps to the certificate's decay bound, tabulates
transversality of forward/backward pairs, runs seed-plane convergence and
membership-gated attraction checks, estimates the small-scale regularity
exponent by regression, and reproduces the boundary-discontinuity probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .domination import CERTIFIED, DominationCertificate, certify
from .errors import (
    InsufficientSampleError,
    MembershipError,
    NoConvergenceError,
    NoGapError,
    NonTransverseSeedError,
    NotCertifiedError,
)
from .linalg import (
    SUBSPACE_TOLERANCE,
    Representation,
    ScaledMatrix,
    Subspace,
    apply_to_subspace,
    evaluate,
    gap_margin,
    grassmann_distance,
    transversality_gap,
    u_k,
)
from .subsets import (
    AxisFamily,
    Directed,
    FullBoundary,
    Primitive,
    SubsetPSpec,
    gamma_p_plus,
    hat,
    is_primitive,
    q_plus_boundary,
    word_in_positive_set,
)
from .words import (
    BoundaryPoint,
    Letter,
    ReducedWord,
    concat,
    generator,
    gromov_product,
    invert,
    periodic_point,
    ray_point,
    rotate,
    translate,
    visual_distance,
)

DEFAULT_TOL = 1e-10
DEFAULT_N_MAX = 400
DEFAULT_CERT_BUDGET = 8
# The certificate's tail bound may lag the observed steps by this factor
# before the stopping rule treats the two signals as contradictory.
BOUND_SLACK = 10.0
# Regression pairs must share a prefix of at least this length; the
# exponent is a small-scale property and unit-scale pairs pollute the fit.
SMALL_SCALE_PREFIX = 2


# ---------------------------------------------------------------------------
# membership of points and pairs


def _least_rotation(w: ReducedWord) -> ReducedWord:
    return min((rotate(w, i) for i in range(len(w))), key=ReducedWord.sort_key)


def _tail_letter_set(x: BoundaryPoint, start: int) -> set[Letter]:
    """Every letter appearing in the expansion of x at positions >= start."""
    pre = x.preperiod.letters
    return set(pre[start:]) | set(x.period.letters)


def point_in_forward_set(spec: SubsetPSpec, x: BoundaryPoint) -> bool:
    """Whether x is the forward endpoint of some line of the subset."""
    if isinstance(spec, FullBoundary):
        return True
    if isinstance(spec, Directed):
        # a finite head is a shift of the line; only the tail must be directed
        return all(l in spec.steps for l in x.period.letters)
    if isinstance(spec, AxisFamily):
        return _least_rotation(x.period) in spec.words
    if isinstance(spec, Primitive):
        return x.period.max_index() <= spec.rank and is_primitive(
            x.period, spec.rank
        )
    raise TypeError(f"unknown subset description {spec!r}")


def pair_in_subset(spec: SubsetPSpec, x: BoundaryPoint, y: BoundaryPoint) -> bool:
    """Whether (x, y) is an (forward, backward) endpoint pair of the subset."""
    if x == y:
        return False
    if isinstance(spec, FullBoundary):
        return True
    junction = int(gromov_product(x, y))
    if isinstance(spec, Directed):
        forward_ok = _tail_letter_set(x, junction) <= spec.steps
        backward_ok = all(
            l.inverse() in spec.steps for l in _tail_letter_set(y, junction)
        )
        return forward_ok and backward_ok
    # axis-like subsets: after removing the shared approach, the pair must
    # be the two ends of one periodic line through the identity
    approach = invert(x.prefix(junction))
    px, py = translate(approach, x), translate(approach, y)
    if not (px.preperiod.is_empty() and py.preperiod.is_empty()):
        return False
    if py.period != invert(px.period):
        return False
    if isinstance(spec, AxisFamily):
        return _least_rotation(px.period) in spec.words
    if isinstance(spec, Primitive):
        return px.period.max_index() <= spec.rank and is_primitive(
            px.period, spec.rank
        )
    raise TypeError(f"unknown subset description {spec!r}")


# ---------------------------------------------------------------------------
# limit map values


@dataclass(frozen=True, eq=False)
class LimitMapValue:
    """A converged limit plane at one boundary point.

    iterations is the prefix length at which the stopping rule fired,
    last_step the final successive Grassmannian step, cauchy_bound the
    certified step bound at that length, and skipped_prefixes the lengths
    whose evaluation had no usable singular gap and were passed over.
    """

    point: BoundaryPoint
    subspace: Subspace
    iterations: int
    last_step: float
    cauchy_bound: float
    skipped_prefixes: tuple[int, ...] = ()


def _letter_norm_bound(rep: Representation) -> float:
    """Worst product norm(image(l)) * norm(image(l^-1)) over the letters.

    One-letter extensions change the attracting plane by at most this
    factor times the singular ratio at the current length.
    """
    worst_pair = 0.0
    for i in range(1, rep.rank + 1):
        fwd = float(np.linalg.norm(rep.image(Letter(i, 1)), 2))
        bwd = float(np.linalg.norm(rep.image(Letter(i, -1)), 2))
        worst_pair = max(worst_pair, fwd * bwd)
    return worst_pair


def cauchy_constant(rep: Representation, certificate: DominationCertificate) -> float:
    """Prefactor of the certified successive-step bound C * exp(-rate * n).

    The singular ratio is bounded through the support intercept over the
    certificate's whole margin table (not just the fit window), so the
    bound covers every sampled length of the certified family.
    """
    intercept = min(
        m - certificate.lambda_hat * t for t, m in certificate.margins.items()
    )
    return _letter_norm_bound(rep) * math.exp(-intercept)


def _require_certified(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    certificate: Optional[DominationCertificate],
    cert_budget: int,
) -> DominationCertificate:
    if certificate is None:
        certificate = certify(rep, spec, k, cert_budget)
    if certificate.k != k:
        raise ValueError(
            f"certificate is for index {certificate.k}, expected {k}"
        )
    if certificate.verdict != CERTIFIED:
        raise NotCertifiedError(
            f"domination certificate verdict is {certificate.verdict}; "
            "limit planes need a Certified setup"
        )
    return certificate


def xi_upper(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    x: BoundaryPoint,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
    assume_member: bool = False,
) -> LimitMapValue:
    """Forward limit plane: attracting k-planes along prefixes of x.

    Stops at the first prefix where three signals agree: the observed
    successive step is below tol, the prefix's own singular-gap margin
    just rose (a falling margin means a cancellation is still unwinding,
    as on detoured rays where early planes look converged but flip later),
    and the remaining-tail bound - seeded at the prefix's actual margin
    and decaying at the certified rate - is below 10 * tol.  If the
    signals still disagree at n_max the evaluation is refused rather than
    trusted.  Prefixes without a usable singular gap are skipped and
    recorded.
    """
    if not (assume_member or point_in_forward_set(spec, x)):
        raise MembershipError(
            f"{x} is not a forward endpoint of the given subset"
        )
    certificate = _require_certified(rep, spec, k, certificate, cert_budget)
    rate = certificate.lambda_hat
    worst_pair = _letter_norm_bound(rep)
    tail_factor = 1.0 / (1.0 - math.exp(-rate))

    current = ScaledMatrix.identity(rep.dim)
    plane: Optional[Subspace] = None
    step = math.inf
    bound = math.inf
    margin_prev = -math.inf
    skipped: list[int] = []
    for n in range(1, n_max + 1):
        current = current.times(rep.image(x.letter_at(n - 1)))
        try:
            candidate = u_k(current, k)
        except NoGapError:
            skipped.append(n)
            margin_prev = -math.inf
            continue
        margin = gap_margin(current, k)
        if plane is not None:
            step = grassmann_distance(plane, candidate)
        plane = candidate
        rising = margin > margin_prev
        margin_prev = margin
        bound = worst_pair * math.exp(-margin) * tail_factor
        if step <= tol and rising and bound <= BOUND_SLACK * tol:
            return LimitMapValue(
                point=x,
                subspace=plane,
                iterations=n,
                last_step=step,
                cauchy_bound=worst_pair * math.exp(-margin),
                skipped_prefixes=tuple(skipped),
            )
    if plane is None:
        offending = str(x.prefix(skipped[0])) if skipped else "(empty)"
        raise NoGapError(
            f"no prefix of {x} up to length {n_max} has a singular gap of "
            f"index {k}; first offending prefix '{offending}'"
        )
    raise NoConvergenceError(
        f"no certified convergence for {x} within {n_max} prefixes: "
        f"last step {step:.3e} against tolerance {tol:.1e}, ray-margin tail "
        f"bound {bound:.3e} against allowance {BOUND_SLACK * tol:.1e}, "
        f"{len(skipped)} gapless prefixes skipped"
    )


def xi_lower(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    y: BoundaryPoint,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
    assume_member: bool = False,
) -> LimitMapValue:
    """Backward limit plane of dimension d-k: the forward map of the
    flipped subset at the complementary index, on the same code path.

    A supplied certificate must be for (flipped subset, d-k).
    """
    return xi_upper(
        rep,
        hat(spec),
        rep.dim - k,
        y,
        tol=tol,
        n_max=n_max,
        certificate=certificate,
        cert_budget=cert_budget,
        assume_member=assume_member,
    )


# ---------------------------------------------------------------------------
# transversality


@dataclass(frozen=True)
class TransversalityTable:
    """Per-pair transversality gaps between forward and backward planes."""

    pairs: tuple[tuple[BoundaryPoint, BoundaryPoint], ...]
    gaps: tuple[float, ...]
    minimum: float


def transversality_table(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    pairs: Sequence[tuple[BoundaryPoint, BoundaryPoint]],
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    dual_certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
) -> TransversalityTable:
    """Transversality gap of (forward plane at x, backward plane at y)
    for each subset pair, with the worst gap summarized."""
    if not pairs:
        raise ValueError("transversality table needs at least one pair")
    certificate = _require_certified(rep, spec, k, certificate, cert_budget)
    dual_certificate = _require_certified(
        rep, hat(spec), rep.dim - k, dual_certificate, cert_budget
    )
    forward: dict[BoundaryPoint, Subspace] = {}
    backward: dict[BoundaryPoint, Subspace] = {}
    gaps: list[float] = []
    for x, y in pairs:
        if not pair_in_subset(spec, x, y):
            raise MembershipError(f"({x}, {y}) is not an endpoint pair of the subset")
        if x not in forward:
            forward[x] = xi_upper(
                rep, spec, k, x, tol, n_max, certificate=certificate
            ).subspace
        if y not in backward:
            backward[y] = xi_lower(
                rep, spec, k, y, tol, n_max, certificate=dual_certificate
            ).subspace
        gaps.append(transversality_gap(forward[x], backward[y]))
    return TransversalityTable(
        pairs=tuple((x, y) for x, y in pairs),
        gaps=tuple(gaps),
        minimum=min(gaps),
    )


# ---------------------------------------------------------------------------
# convergence curves


@dataclass(frozen=True)
class ConvergenceCurve:
    """Distances along a word schedule, with the pass/fail summary."""

    lengths: tuple[int, ...]
    distances: tuple[float, ...]
    final: float
    passed: bool


def _eventually_decreasing(values: Sequence[float], floor: float = 1e-12) -> bool:
    """Nonincreasing over the last half, up to 10% wobble above a floor."""
    tail = list(values[len(values) // 2 :])
    return all(b <= 1.1 * a + floor for a, b in zip(tail, tail[1:]))


def sdp_check(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    x: BoundaryPoint,
    y: BoundaryPoint,
    seed: Subspace,
    schedule: Optional[Sequence[ReducedWord]] = None,
    tol: float = 1e-8,
    n_points: int = 30,
    xi_tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    dual_certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
) -> ConvergenceCurve:
    """Push a seed k-plane along the schedule toward the forward plane at x.

    The seed must be transverse to the backward plane at y.  The default
    schedule takes the prefixes of x, which are the forward vertices of
    the connecting line when that line passes through the identity; an
    explicit schedule's limiting behavior is the caller's responsibility.
    Passes when the final distance is below tol and the curve's tail is
    decreasing within noise.
    """
    certificate = _require_certified(rep, spec, k, certificate, cert_budget)
    dual_certificate = _require_certified(
        rep, hat(spec), rep.dim - k, dual_certificate, cert_budget
    )
    if not pair_in_subset(spec, x, y):
        raise MembershipError(f"({x}, {y}) is not an endpoint pair of the subset")
    target = xi_upper(
        rep, spec, k, x, xi_tol, n_max, certificate=certificate
    ).subspace
    repeller = xi_lower(
        rep, spec, k, y, xi_tol, n_max, certificate=dual_certificate
    ).subspace
    gap = transversality_gap(seed, repeller)
    if gap <= SUBSPACE_TOLERANCE:
        raise NonTransverseSeedError(
            f"seed plane meets the backward limit plane (gap {gap:.2e})"
        )
    if schedule is None:
        if int(gromov_product(x, y)) != 0:
            raise MembershipError(
                "the connecting line misses the identity; "
                "supply an explicit schedule"
            )
        schedule = [x.prefix(n) for n in range(1, n_points + 1)]
    if not schedule:
        raise ValueError("schedule must contain at least one word")
    distances = [
        grassmann_distance(
            apply_to_subspace(evaluate(rep, g).core, seed), target
        )
        for g in schedule
    ]
    final = distances[-1]
    return ConvergenceCurve(
        lengths=tuple(len(g) for g in schedule),
        distances=tuple(distances),
        final=final,
        passed=final < tol and _eventually_decreasing(distances),
    )


def cartan_check(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    x: BoundaryPoint,
    words: Sequence[ReducedWord],
    b: int = 0,
    tol: float = 1e-8,
    xi_tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
) -> ConvergenceCurve:
    """Distance from the attracting plane of each verified positive word
    to the forward plane at x.

    Every word must be a verified member of the positive set within
    shift b (word_in_positive_set); words without a witness are refused,
    never silently accepted.
    """
    if not words:
        raise ValueError("cartan check needs at least one word")
    if b < 0:
        raise ValueError("shift b must be >= 0")
    certificate = _require_certified(rep, spec, k, certificate, cert_budget)
    longest = max(len(w) for w in words)
    sample = gamma_p_plus(spec, longest + b)
    for w in words:
        if not word_in_positive_set(spec, w, b, sample=sample):
            raise MembershipError(
                f"'{w}' has no witness in the positive set within shift {b}"
            )
    target = xi_upper(
        rep, spec, k, x, xi_tol, n_max, certificate=certificate
    ).subspace
    distances = [
        grassmann_distance(u_k(evaluate(rep, w), k), target) for w in words
    ]
    final = distances[-1]
    return ConvergenceCurve(
        lengths=tuple(len(w) for w in words),
        distances=tuple(distances),
        final=final,
        passed=final < tol,
    )


# ---------------------------------------------------------------------------
# regularity


@dataclass(frozen=True)
class HolderFit:
    """Power-law fit of plane distance against boundary distance."""

    alpha_hat: float
    log_c_hat: float
    r_squared: float
    pairs_used: int
    cutoff: float


def holder_estimate(
    rep: Representation,
    spec: SubsetPSpec,
    k: int,
    b: int = 0,
    kappa: float = 1.0,
    sample_size: int = 200,
    seed: int = 0,
    max_period: int = 6,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    certificate: Optional[DominationCertificate] = None,
    cert_budget: int = DEFAULT_CERT_BUDGET,
) -> HolderFit:
    """Estimate the regularity exponent of the forward limit map.

    Samples distinct endpoint pairs from the b-shifted forward boundary
    sample, keeps those at small scale (shared prefix of at least
    SMALL_SCALE_PREFIX, i.e. visual distance <= exp(-kappa * 2)) whose
    plane distance is numerically nonzero, and fits
    log(plane distance) = alpha * log(visual distance) + log C.
    Deterministic for a fixed seed.
    """
    certificate = _require_certified(rep, spec, k, certificate, cert_budget)
    points = sorted(q_plus_boundary(spec, max_period, b), key=str)
    rng = np.random.default_rng(seed)
    cutoff = math.exp(-kappa * SMALL_SCALE_PREFIX)
    planes: dict[BoundaryPoint, Subspace] = {}

    def plane_at(p: BoundaryPoint) -> Subspace:
        if p not in planes:
            planes[p] = xi_upper(
                rep, spec, k, p, tol, n_max, certificate=certificate
            ).subspace
        return planes[p]

    log_visual: list[float] = []
    log_plane: list[float] = []
    seen: set[frozenset[BoundaryPoint]] = set()
    attempts = 0
    while len(log_visual) < sample_size and attempts < 50 * sample_size:
        attempts += 1
        if len(points) < 2:
            break
        i, j = rng.integers(0, len(points), size=2)
        if i == j:
            continue
        x, y = points[i], points[j]
        key = frozenset((x, y))
        if key in seen:
            continue
        visual = visual_distance(x, y, kappa)
        if visual > cutoff:
            continue
        seen.add(key)
        separation = grassmann_distance(plane_at(x), plane_at(y))
        if separation <= 1e-14:
            continue
        log_visual.append(math.log(visual))
        log_plane.append(math.log(separation))
    if len(log_visual) < 10:
        raise InsufficientSampleError(
            f"only {len(log_visual)} usable small-scale pairs (need 10)"
        )
    xs = np.array(log_visual)
    ys = np.array(log_plane)
    design = np.column_stack([xs, np.ones_like(xs)])
    (alpha, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    residuals = ys - design @ np.array([alpha, intercept])
    total = float(np.sum((ys - ys.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - float(residuals @ residuals) / total
    return HolderFit(
        alpha_hat=float(alpha),
        log_c_hat=float(intercept),
        r_squared=r_squared,
        pairs_used=len(log_visual),
        cutoff=cutoff,
    )


# ---------------------------------------------------------------------------
# discontinuity probe


@dataclass(frozen=True)
class DiscontinuityProbe:
    """Rows m -> (visual distance to the base point, plane separation)."""

    exponents: tuple[int, ...]
    visual: tuple[float, ...]
    separations: tuple[float, ...]
    separated: bool


def discontinuity_probe(
    rep: Representation,
    exponents: Iterable[int] = range(1, 11),
    kappa: float = 1.0,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    cert_budget: int = DEFAULT_CERT_BUDGET,
) -> DiscontinuityProbe:
    """Probe the forward limit map across the first-axis family.

    Evaluates the forward plane at the base periodic point of the first
    generator and at its detoured approximants (first-generator power,
    one second-generator letter, then the periodic tail).  The approach
    distance shrinks while the plane separation need not: `separated`
    reports whether the separation stays large as the approach collapses.
    """
    if rep.rank < 2:
        raise ValueError("the probe needs at least two generators")
    exponents = tuple(exponents)
    if not exponents or any(m < 1 for m in exponents):
        raise ValueError("exponents must be positive")
    a_word = ReducedWord((generator(1),))
    b_word = ReducedWord((generator(2),))
    spec = AxisFamily(rep.rank, (a_word,))
    certificate = _require_certified(rep, spec, 1, None, cert_budget)
    base = xi_upper(
        rep, spec, 1, periodic_point(a_word), tol, n_max, certificate=certificate
    ).subspace
    visual: list[float] = []
    separations: list[float] = []
    for m in exponents:
        approx = ray_point(
            concat(ReducedWord(tuple(generator(1) for _ in range(m))), b_word),
            a_word,
        )
        value = xi_upper(
            rep, spec, 1, approx, tol, n_max, certificate=certificate
        ).subspace
        visual.append(visual_distance(approx, periodic_point(a_word), kappa))
        separations.append(grassmann_distance(base, value))
    separated = visual[-1] <= math.exp(-2.0 * kappa) and min(separations) >= 0.5
    return DiscontinuityProbe(
        exponents=exponents,
        visual=tuple(visual),
        separations=tuple(separations),
        separated=separated,
    )
