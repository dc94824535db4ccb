"""Detection metrics for countermeasure scores: DET points, EER and t-DCF.

FAR(θ) counts spoof trials scored strictly above θ and FRR(θ) counts bona fide
trials scored strictly below θ. The operating points used for EER and t-DCF are
the two sentinels and one threshold between every pair of consecutive distinct
scores, so the metrics depend on the ranking of the scores only.

The t-DCF cost model (priors and costs) follows the ASVspoof 2019 evaluation plan;
C1 and C2 can always be given directly instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spoofguard.errors import MetricError
from spoofguard.helpers.config import (
    TDCF_CFA_ASV,
    TDCF_CFA_CM,
    TDCF_CMISS_ASV,
    TDCF_CMISS_CM,
    TDCF_PRIOR_NONTARGET,
    TDCF_PRIOR_SPOOF,
    TDCF_PRIOR_TARGET,
)


@dataclass(frozen=True)
class ScoreSet:
    """Detection scores of bona fide ("human") and spoof trials."""

    bonafide_scores: np.ndarray
    spoof_scores: np.ndarray

    def __post_init__(self) -> None:
        """Store both populations as finite float64 arrays."""
        for name in ("bonafide_scores", "spoof_scores"):
            values = np.array(getattr(self, name), dtype=np.float64).ravel()
            if not np.all(np.isfinite(values)):
                message = f"{name} contains non-finite values"
                raise MetricError(message)
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    def require_both_classes(self) -> None:
        """Metrics comparing the two populations need at least one trial of each."""
        if self.bonafide_scores.size == 0 or self.spoof_scores.size == 0:
            message = (
                f"need bonafide and spoof trials, got {self.bonafide_scores.size} "
                f"and {self.spoof_scores.size}"
            )
            raise MetricError(message)


@dataclass(frozen=True)
class DetCurve:
    """Operating points ordered by increasing threshold."""

    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray


@dataclass(frozen=True)
class TdcfParameters:
    """Priors, costs and ASV error rates that generate C1 and C2."""

    prior_target: float = TDCF_PRIOR_TARGET
    prior_nontarget: float = TDCF_PRIOR_NONTARGET
    prior_spoof: float = TDCF_PRIOR_SPOOF
    cmiss_asv: float = TDCF_CMISS_ASV
    cfa_asv: float = TDCF_CFA_ASV
    cmiss_cm: float = TDCF_CMISS_CM
    cfa_cm: float = TDCF_CFA_CM
    pmiss_asv: float = 0.0
    pfa_asv: float = 0.0
    pmiss_spoof_asv: float = 0.0


@dataclass(frozen=True)
class TdcfCosts:
    """The two weights of t-DCF(θ) = C1 * Pmiss_cm(θ) + C2 * Pfa_cm(θ)."""

    c1: float
    c2: float
    parameters: TdcfParameters | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        """Costs must be finite and non-negative."""
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)) or self.c1 < 0 or self.c2 < 0:
            message = f"t-DCF costs must be finite and non-negative, got C1={self.c1}, C2={self.c2}"
            raise MetricError(message)

    @classmethod
    def from_parameters(cls, params: TdcfParameters | None = None) -> TdcfCosts:
        """Derive C1 and C2 from priors, costs and ASV error rates."""
        params = params or TdcfParameters()
        c1, c2 = tdcf_constants(params)
        return cls(c1, c2, params)


@dataclass(frozen=True)
class EerResult:
    """Equal error rate (fraction) and the threshold where it occurs."""

    eer: float
    threshold: float


@dataclass(frozen=True)
class MetricSummary:
    """Everything the evaluation report prints for one score set."""

    eer: float
    threshold: float
    min_tdcf: float
    c1: float
    c2: float
    bonafide_trials: int
    spoof_trials: int


def far_frr_at(s: ScoreSet, threshold: float) -> tuple[float, float]:
    """FAR and FRR at an arbitrary threshold, with strict inequalities."""
    s.require_both_classes()
    far = np.count_nonzero(s.spoof_scores > threshold) / s.spoof_scores.size
    frr = np.count_nonzero(s.bonafide_scores < threshold) / s.bonafide_scores.size
    return float(far), float(frr)


def det_curve(s: ScoreSet) -> DetCurve:
    """FAR/FRR at -inf, between every pair of consecutive distinct scores, and +inf."""
    s.require_both_classes()
    distinct = np.unique(np.concatenate((s.bonafide_scores, s.spoof_scores)))
    bonafide = np.sort(s.bonafide_scores)
    spoof = np.sort(s.spoof_scores)

    # A threshold just above distinct[i] accepts every score > distinct[i].
    spoof_accepted = spoof.size - np.searchsorted(spoof, distinct, side="right")
    bonafide_rejected = np.searchsorted(bonafide, distinct, side="right")

    far = np.concatenate(([1.0], spoof_accepted / spoof.size))
    frr = np.concatenate(([0.0], bonafide_rejected / bonafide.size))
    midpoints = (distinct[:-1] + distinct[1:]) / 2.0
    thresholds = np.concatenate(([-np.inf], midpoints, [np.inf]))
    return DetCurve(thresholds=thresholds, far=far, frr=frr)


def _interpolated_threshold(curve: DetCurve, lower: int, upper: int, t: float, s: ScoreSet) -> float:
    low, high = curve.thresholds[lower], curve.thresholds[upper]
    if np.isfinite(low) and np.isfinite(high):
        return float(low + t * (high - low))
    if np.isfinite(low):
        return float(low)
    if np.isfinite(high):
        return float(high)
    # A single distinct score: it is the only meaningful boundary.
    return float(s.bonafide_scores[0])


def compute_eer(s: ScoreSet) -> EerResult:
    """EER where FAR - FRR changes sign, interpolated linearly between operating points."""
    curve = det_curve(s)
    difference = curve.far - curve.frr
    crossing = int(np.argmax(difference <= 0))

    if difference[crossing] == 0:
        return EerResult(float(curve.far[crossing]), float(curve.thresholds[crossing]))

    before = crossing - 1
    t = difference[before] / (difference[before] - difference[crossing])
    far = curve.far[before] + t * (curve.far[crossing] - curve.far[before])
    frr = curve.frr[before] + t * (curve.frr[crossing] - curve.frr[before])
    threshold = _interpolated_threshold(curve, before, crossing, t, s)
    return EerResult(float((far + frr) / 2.0), threshold)


def tdcf_curve(s: ScoreSet, c: TdcfCosts) -> tuple[np.ndarray, np.ndarray]:
    """t-DCF at every DET operating point: (thresholds, C1 * FRR + C2 * FAR)."""
    if c.c1 == 0 and c.c2 == 0:
        message = "t-DCF is degenerate when both C1 and C2 are zero"
        raise MetricError(message)

    curve = det_curve(s)
    return curve.thresholds, c.c1 * curve.frr + c.c2 * curve.far


def min_tdcf_normalized(s: ScoreSet, c: TdcfCosts) -> float:
    """Minimum t-DCF over thresholds divided by min(C1, C2), the cost of a trivial system."""
    if c.c1 <= 0 or c.c2 <= 0:
        message = f"normalized t-DCF needs C1 > 0 and C2 > 0, got C1={c.c1}, C2={c.c2}"
        raise MetricError(message)

    _, values = tdcf_curve(s, c)
    return float(values.min() / min(c.c1, c.c2))


def tdcf_constants(params: TdcfParameters) -> tuple[float, float]:
    """C1 and C2 of the t-DCF from the cost model and ASV operating point."""
    priors = params.prior_target + params.prior_nontarget + params.prior_spoof
    if not np.isclose(priors, 1.0, rtol=0, atol=1e-9):
        message = f"t-DCF priors must sum to 1, got {priors}"
        raise MetricError(message)
    for name in ("pmiss_asv", "pfa_asv", "pmiss_spoof_asv"):
        if not 0.0 <= getattr(params, name) <= 1.0:
            message = f"{name} must lie in [0, 1], got {getattr(params, name)}"
            raise MetricError(message)

    c1 = (
        params.prior_target * (params.cmiss_cm - params.cmiss_asv * params.pmiss_asv)
        - params.prior_nontarget * params.cfa_asv * params.pfa_asv
    )
    c2 = params.cfa_cm * params.prior_spoof * (1.0 - params.pmiss_spoof_asv)
    if c1 < 0:
        message = f"C1 = {c1:.6f} is negative: the ASV operating point makes the t-DCF ill-posed"
        raise MetricError(message)

    return float(c1), float(c2)


def asv_error_rates(
    target_scores: np.ndarray,
    nontarget_scores: np.ndarray,
    spoof_scores: np.ndarray,
) -> tuple[float, float, float]:
    """Pmiss, Pfa and spoof miss rate of an external ASV system at its EER threshold."""
    asv = ScoreSet(target_scores, nontarget_scores)
    threshold = compute_eer(asv).threshold
    pfa, pmiss = far_frr_at(asv, threshold)
    spoof_scores = np.asarray(spoof_scores, dtype=np.float64)
    if spoof_scores.size == 0:
        message = "ASV spoof scores are required for the spoof miss rate"
        raise MetricError(message)

    pmiss_spoof = np.count_nonzero(spoof_scores < threshold) / spoof_scores.size
    return pmiss, pfa, float(pmiss_spoof)


def summarize(s: ScoreSet, c: TdcfCosts) -> MetricSummary:
    """EER, its threshold and min normalized t-DCF for one score set."""
    eer = compute_eer(s)
    return MetricSummary(
        eer=eer.eer,
        threshold=eer.threshold,
        min_tdcf=min_tdcf_normalized(s, c),
        c1=c.c1,
        c2=c.c2,
        bonafide_trials=int(s.bonafide_scores.size),
        spoof_trials=int(s.spoof_scores.size),
    )


def per_attack_breakdown(
    bonafide_scores: np.ndarray,
    spoof_scores_by_attack: dict[str, np.ndarray],
    c: TdcfCosts,
) -> dict[str, MetricSummary]:
    """Metrics of all bona fide trials against each attack's spoof trials, sorted by attack."""
    return {
        attack: summarize(ScoreSet(bonafide_scores, spoof_scores), c)
        for attack, spoof_scores in sorted(spoof_scores_by_attack.items())
    }


def pearson_correlation(xs: list[float], ys: list[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        message = "pearson_correlation needs two equal-length sequences of at least 2 values"
        raise MetricError(message)

    dx = x - x.mean()
    dy = y - y.mean()
    denominator = np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if denominator == 0:
        message = "pearson_correlation is undefined for a sequence with zero variance"
        raise MetricError(message)

    return float(np.clip(np.dot(dx, dy) / denominator, -1.0, 1.0))


def format_report(
    summary: MetricSummary,
    per_attack: dict[str, MetricSummary] | None = None,
) -> str:
    """Key=value report lines in a fixed order; EER is printed in percent."""
    lines = [
        f"eer={100 * summary.eer:.4f}",
        f"min_tdcf={summary.min_tdcf:.6f}",
        f"threshold={summary.threshold:.6f}",
        f"c1={summary.c1:.6f}",
        f"c2={summary.c2:.6f}",
        f"bonafide_trials={summary.bonafide_trials}",
        f"spoof_trials={summary.spoof_trials}",
    ]
    for attack, attack_summary in (per_attack or {}).items():
        lines.append(
            f"attack={attack} eer={100 * attack_summary.eer:.4f} "
            f"min_tdcf={attack_summary.min_tdcf:.6f}",
        )

    return "\n".join(lines) + "\n"


def parse_report(text: str, source: str = "<report>") -> dict[str, float]:
    """Read back the pooled `key=value` fields of a report."""
    values = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if line.startswith("attack=") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        try:
            values[key] = float(value)
        except ValueError as error:
            message = f"{source}:{line_number}: {key} value {value!r} is not a number"
            raise MetricError(message) from error

    return values


def format_det_points(curve: DetCurve) -> str:
    """Raw operating points, one `threshold far frr` line each."""
    return "".join(
        f"{threshold:.6f} {far:.6f} {frr:.6f}\n"
        for threshold, far, frr in zip(curve.thresholds, curve.far, curve.frr)
    )
