"""Compatibility decisions between summability levels in different monomials.

Two levels (p, q, k) and (p', q', l) describe the same summability class
exactly when their invariants (kp, kq) and (lp', lq') coincide; any sum of
genuinely divergent series from pairwise distinct classes is summable in none
of them.  The normalization procedure replays the constructive blow-up
argument behind that statement and records a transcript.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .gevrey import SummabilityLevel, canonical_level, gevrey_certificate
from .series import BivariateSeries, BlowupMap, build_series, pullback_blowup

Invariant = tuple[Fraction, Fraction]


@dataclass
class CompatibilityVerdict:
    compatible: bool
    reason: str  # "ProportionalLevels" | "InvariantMismatch"
    invariants: list[Invariant]


def levels_compatible(
    candidate: SummabilityLevel, components: list[SummabilityLevel]
) -> CompatibilityVerdict:
    """Exact-rational check that every component shares the candidate's class."""
    if not components:
        raise ValueError("component list must be nonempty")
    inv0 = canonical_level(candidate)
    invs = [inv0] + [canonical_level(c) for c in components]
    ok = all(inv == inv0 for inv in invs)
    return CompatibilityVerdict(
        compatible=ok,
        reason="ProportionalLevels" if ok else "InvariantMismatch",
        invariants=invs,
    )


@dataclass
class PairClassification:
    same_class: bool
    case: str | None  # None | "MaxBelow" | "MinAbove" | "Mixed"


def classify_pair(a: SummabilityLevel, b: SummabilityLevel) -> PairClassification:
    """SameClass on equal invariants, else which intersection argument applies.

    For distinct classes the intersection is the convergent series: directly
    when max(p/p', q/q') < l/k (MaxBelow) or l/k < min(p/p', q/q') (MinAbove),
    and after a blow-up reduction otherwise (Mixed).
    """
    if canonical_level(a) == canonical_level(b):
        return PairClassification(same_class=True, case=None)
    r1 = Fraction(a.p, b.p)
    r2 = Fraction(a.q, b.q)
    ratio = b.k / a.k
    if max(r1, r2) < ratio:
        case = "MaxBelow"
    elif ratio < min(r1, r2):
        case = "MinAbove"
    else:
        case = "Mixed"
    return PairClassification(same_class=False, case=case)


@dataclass
class TranscriptStep:
    bmap: BlowupMap
    before: list[SummabilityLevel]
    after: list[SummabilityLevel]


@dataclass
class NormalizationTranscript:
    steps: list[TranscriptStep]
    terminal: str  # "strict_order" | "coincidence"
    levels: list[SummabilityLevel]
    coincidence: tuple[int, int] | None = None


def blowup_level(level: SummabilityLevel, bmap: BlowupMap) -> SummabilityLevel:
    """Monomial transport under a blow-up; the order k is untouched."""
    if bmap.axis == "pi1":
        return SummabilityLevel(level.p, bmap.power * level.p + level.q, level.k)
    return SummabilityLevel(level.p + bmap.power * level.q, level.q, level.k)


def _sorted_products(levels: list[SummabilityLevel]) -> list[Invariant]:
    return sorted(canonical_level(lv) for lv in levels)


def _is_strict_terminal(levels: list[SummabilityLevel]) -> bool:
    """Both product lists strictly increasing once sorted by k*p."""
    inv = _sorted_products(levels)
    kp = [i[0] for i in inv]
    kq = [i[1] for i in inv]
    return all(a < b for a, b in zip(kp, kp[1:])) and all(
        a < b for a, b in zip(kq, kq[1:])
    )


def _find_coincidence(levels: list[SummabilityLevel]) -> tuple[int, int] | None:
    seen: dict[Invariant, int] = {}
    for i, lv in enumerate(levels):
        inv = canonical_level(lv)
        if inv in seen:
            return (seen[inv], i)
        seen[inv] = i
    return None


def normalize_by_blowups(levels: list[SummabilityLevel]) -> NormalizationTranscript:
    """Blow up until k*p and k*q products are strictly totally ordered.

    Coinciding classes terminate immediately.  Otherwise: if all k*p tie, one
    pi2 pull-back separates them; if some tie and some increase, pi1^N with the
    minimal N strictly exceeding max (k_i q_i - k_j q_j)/(k_j p_j - k_i p_i)
    over consecutive strict pairs orders the k*q products, after which a pi2
    step (when k*p ties remain) finishes.  Each step strictly separates tied
    products, so the procedure terminates in at most two steps.
    """
    if len(levels) < 2:
        raise ValueError("need at least two levels to normalize")
    current = list(levels)
    steps: list[TranscriptStep] = []

    def apply(bmap: BlowupMap):
        nonlocal current
        after = [blowup_level(lv, bmap) for lv in current]
        steps.append(TranscriptStep(bmap, current, after))
        current = after

    coin = _find_coincidence(current)
    if coin is not None:
        return NormalizationTranscript(steps, "coincidence", current, coin)

    if not _is_strict_terminal(current):
        order = sorted(range(len(current)), key=lambda i: canonical_level(current[i]))
        inv = [canonical_level(current[i]) for i in order]
        kp = [v[0] for v in inv]
        kq = [v[1] for v in inv]
        if all(a == kp[0] for a in kp):
            # full tie on the p-side; distinct k*q (else coincidence above)
            apply(BlowupMap("pi2", 1))
        else:
            bounds = [
                (kq[i] - kq[i + 1]) / (kp[i + 1] - kp[i])
                for i in range(len(kp) - 1)
                if kp[i] < kp[i + 1]
            ]
            n = max(1, math.floor(max(bounds)) + 1)
            apply(BlowupMap("pi1", n))
            if not _is_strict_terminal(current):
                apply(BlowupMap("pi2", 1))

    if not _is_strict_terminal(current):
        raise AssertionError("normalization failed to reach a strict terminal")
    return NormalizationTranscript(steps, "strict_order", current, None)


# ------------------------------------------------------------------ witnesses


@dataclass(frozen=True)
class WitnessSpec:
    """Model divergent series: sum Gamma(1 + n/k) * (x1^p x2^q)^n."""

    level: SummabilityLevel
    trunc: int
    kind: str = "EulerDiagonal"

    def __post_init__(self):
        if self.kind != "EulerDiagonal":
            raise ValueError(f"unknown witness kind {self.kind!r}")


def make_witness(spec: WitnessSpec) -> BivariateSeries:
    p, q, k = spec.level.p, spec.level.q, float(spec.level.k)
    if spec.trunc < p + q:
        raise ValueError(f"trunc {spec.trunc} too small for monomial ({p}, {q})")
    entries = []
    n = 0
    while n * (p + q) <= spec.trunc:
        try:
            coeff = math.gamma(1.0 + n / k)
        except OverflowError as err:
            raise ValueError(
                f"witness coefficient Gamma(1 + {n}/{k}) overflows double range; "
                f"reduce trunc"
            ) from err
        entries.append(((n * p, n * q), coeff))
        n += 1
    return build_series(entries, spec.trunc)


@dataclass
class ProbeReport:
    verdict: CompatibilityVerdict
    certificate: tuple[float, float] | None
    flagged: bool
    note: str


def probe_sum(components: list[WitnessSpec], candidate: SummabilityLevel) -> ProbeReport:
    """Empirical cross-check of the level verdict on generated witnesses.

    Builds the witness sum, runs the Gevrey certificate at s = 1/k0 in the
    candidate monomial and compares with the exact level decision.  The two
    kinds of disagreement are flagged: refusal despite compatible levels
    points at a too-small truncation; certificate success despite
    incompatible levels means the growth bound alone cannot rule the sum out
    (a Gevrey bound is necessary, not sufficient, for summability).
    """
    if not components:
        raise ValueError("need at least one component")
    total = make_witness(components[0])
    for spec in components[1:]:
        total = total + make_witness(spec)
    verdict = levels_compatible(candidate, [c.level for c in components])
    s = float(1 / candidate.k)
    cert = gevrey_certificate(
        total, candidate.monomial, s, degree_floor=max(1, total.trunc // 3)
    )
    if verdict.compatible and cert is None:
        flagged, note = True, "certificate refused despite compatible levels: truncation too small"
    elif not verdict.compatible and cert is not None:
        flagged, note = (
            True,
            "certificate succeeded despite incompatible levels: growth bound is "
            "only a necessary condition; no refusal evidence at this truncation",
        )
    else:
        flagged, note = False, "certificate agrees with the level verdict"
    return ProbeReport(verdict=verdict, certificate=cert, flagged=flagged, note=note)


# ------------------------------------------------- one-variable level encoding


def variable_level_pair(
    k_x1: Fraction | int, l_x2: Fraction | int
) -> tuple[SummabilityLevel, SummabilityLevel]:
    """Monomial encoding of 'k-summable in x1' vs 'l-summable in x2'.

    Composing with pi1 then pi2 turns the x1-level into (2, 1, k) and the
    x2-level into (1, 1, l); the two classes are never equal, so the pair
    always forces convergence.
    """
    return (
        SummabilityLevel(2, 1, Fraction(k_x1)),
        SummabilityLevel(1, 1, Fraction(l_x2)),
    )


def variable_level_pullback(f: BivariateSeries) -> BivariateSeries:
    """The series transform matching :func:`variable_level_pair`."""
    return pullback_blowup(pullback_blowup(f, BlowupMap("pi1", 1)), BlowupMap("pi2", 1))
