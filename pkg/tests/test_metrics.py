import numpy as np
import pytest

from spoofguard.errors import MetricError
from spoofguard.metrics import (
    ScoreSet,
    TdcfCosts,
    TdcfParameters,
    asv_error_rates,
    compute_eer,
    det_curve,
    far_frr_at,
    format_det_points,
    format_report,
    min_tdcf_normalized,
    parse_report,
    pearson_correlation,
    per_attack_breakdown,
    summarize,
    tdcf_constants,
    tdcf_curve,
)

UNIT_COSTS = TdcfCosts(1.0, 1.0)
WORKED = ScoreSet(np.array([0.3, 0.7, 0.8]), np.array([0.2, 0.4, 0.6]))


def brute_force_points(bonafide: list[float], spoof: list[float]) -> list[tuple[float, float]]:
    """FAR/FRR counted directly at -inf, every midpoint and +inf."""
    values = sorted(set(bonafide) | set(spoof))
    thresholds = [-np.inf, *[(a + b) / 2 for a, b in zip(values, values[1:])], np.inf]
    return [
        (
            sum(s > theta for s in spoof) / len(spoof),
            sum(b < theta for b in bonafide) / len(bonafide),
        )
        for theta in thresholds
    ]


def brute_force_eer(points: list[tuple[float, float]]) -> float:
    for index, (far, frr) in enumerate(points):
        if far == frr:
            return far
        if far < frr:
            prev_far, prev_frr = points[index - 1]
            t = (prev_far - prev_frr) / ((prev_far - prev_frr) - (far - frr))
            return (prev_far + t * (far - prev_far) + prev_frr + t * (frr - prev_frr)) / 2
    raise AssertionError("FAR - FRR never reaches zero")


def random_sets(rng: np.random.Generator, count: int):
    for _ in range(count):
        bonafide = (rng.integers(0, 10, rng.integers(1, 7)) / 4).tolist()
        spoof = (rng.integers(0, 10, rng.integers(1, 7)) / 4).tolist()
        yield bonafide, spoof


class TestOperatingPoints:
    def test_matches_direct_counting(self, rng):
        for bonafide, spoof in random_sets(rng, 1000):
            curve = det_curve(ScoreSet(np.array(bonafide), np.array(spoof)))
            points = brute_force_points(bonafide, spoof)
            np.testing.assert_allclose(curve.far, [p[0] for p in points])
            np.testing.assert_allclose(curve.frr, [p[1] for p in points])

    def test_sentinels(self):
        curve = det_curve(WORKED)
        assert curve.thresholds[0] == -np.inf
        assert curve.thresholds[-1] == np.inf
        assert (curve.far[0], curve.frr[0]) == (1.0, 0.0)
        assert (curve.far[-1], curve.frr[-1]) == (0.0, 1.0)

    def test_far_frr_at(self):
        assert far_frr_at(WORKED, 0.5) == pytest.approx((1 / 3, 1 / 3))
        assert far_frr_at(WORKED, 0.3) == pytest.approx((2 / 3, 0.0))

    def test_det_points_format(self):
        lines = format_det_points(det_curve(WORKED)).splitlines()
        assert lines[0] == "-inf 1.000000 0.000000"
        assert lines[-1] == "inf 0.000000 1.000000"
        assert len(lines) == 7


class TestEer:
    def test_worked_example(self):
        result = compute_eer(WORKED)
        assert result.eer == pytest.approx(1 / 3)
        assert result.threshold == pytest.approx(0.5)

    def test_matches_brute_force(self, rng):
        for bonafide, spoof in random_sets(rng, 1000):
            expected = brute_force_eer(brute_force_points(bonafide, spoof))
            assert compute_eer(ScoreSet(np.array(bonafide), np.array(spoof))).eer == pytest.approx(expected)

    @pytest.mark.parametrize("scores", [[1.0], [1.0, 2.0, 3.0], [0.5, 0.5, 2.0]])
    def test_identical_populations(self, scores):
        assert compute_eer(ScoreSet(np.array(scores), np.array(scores))).eer == pytest.approx(0.5)

    def test_separable(self):
        result = compute_eer(ScoreSet(np.array([2.0, 3.0]), np.array([0.0, 1.0])))
        assert result.eer == 0.0
        assert result.threshold == 1.5

    def test_reversed(self):
        assert compute_eer(ScoreSet(np.array([0.0, 1.0]), np.array([2.0, 3.0]))).eer == 1.0

    def test_rank_invariance(self, rng):
        for bonafide, spoof in random_sets(rng, 100):
            base = ScoreSet(np.array(bonafide), np.array(spoof))
            for transform in (lambda x: 2 * x + 1, lambda x: np.tanh(x / 10)):
                moved = ScoreSet(transform(np.array(bonafide)), transform(np.array(spoof)))
                assert compute_eer(moved).eer == compute_eer(base).eer
                assert min_tdcf_normalized(moved, UNIT_COSTS) == min_tdcf_normalized(base, UNIT_COSTS)

    def test_swapping_classes_and_negating(self, rng):
        for bonafide, spoof in random_sets(rng, 200):
            base = ScoreSet(np.array(bonafide), np.array(spoof))
            mirrored = ScoreSet(-np.array(spoof), -np.array(bonafide))
            assert compute_eer(mirrored).eer == pytest.approx(compute_eer(base).eer)

    def test_empty_class(self):
        with pytest.raises(MetricError, match="need bonafide and spoof"):
            compute_eer(ScoreSet(np.array([1.0]), np.array([])))

    def test_non_finite_scores(self):
        with pytest.raises(MetricError, match="non-finite"):
            ScoreSet(np.array([np.nan]), np.array([1.0]))


class TestTdcf:
    def test_default_constants(self):
        c1, c2 = tdcf_constants(TdcfParameters())
        assert c1 == pytest.approx(0.9405)
        assert c2 == pytest.approx(0.5)

    def test_asv_errors_lower_the_constants(self):
        c1, c2 = tdcf_constants(TdcfParameters(pmiss_asv=0.1, pfa_asv=0.1, pmiss_spoof_asv=0.4))
        assert c1 == pytest.approx(0.9405 * 0.9 - 0.0095 * 10 * 0.1)
        assert c2 == pytest.approx(10 * 0.05 * 0.6)

    def test_negative_c1(self):
        with pytest.raises(MetricError, match="negative"):
            tdcf_constants(TdcfParameters(pmiss_asv=1.0, pfa_asv=0.5))

    @pytest.mark.parametrize(
        "params",
        [
            TdcfParameters(prior_target=0.99, prior_nontarget=0.01, prior_spoof=0.0),
            TdcfParameters(pmiss_spoof_asv=1.0),
        ],
    )
    def test_c2_vanishes_without_spoof_exposure(self, params):
        _, c2 = tdcf_constants(params)
        assert c2 == 0.0

    def test_priors_must_sum_to_one(self):
        with pytest.raises(MetricError, match="sum to 1"):
            tdcf_constants(TdcfParameters(prior_spoof=0.5))

    def test_worked_example(self):
        assert min_tdcf_normalized(WORKED, UNIT_COSTS) == pytest.approx(1 / 3)

    def test_curve_at_every_operating_point(self):
        thresholds, values = tdcf_curve(WORKED, TdcfCosts.from_parameters())
        np.testing.assert_allclose(thresholds[1:-1], [0.25, 0.35, 0.5, 0.65, 0.75])
        third = 0.9405 / 3
        expected = [0.5, 1 / 3, third + 1 / 3, third + 1 / 6, third, 2 * third, 0.9405]
        np.testing.assert_allclose(values, expected)
        assert min_tdcf_normalized(WORKED, TdcfCosts.from_parameters()) == pytest.approx(0.627)

    def test_matches_brute_force(self, rng):
        costs = TdcfCosts.from_parameters()
        for bonafide, spoof in random_sets(rng, 1000):
            points = brute_force_points(bonafide, spoof)
            expected = min(costs.c1 * frr + costs.c2 * far for far, frr in points) / min(costs.c1, costs.c2)
            got = min_tdcf_normalized(ScoreSet(np.array(bonafide), np.array(spoof)), costs)
            assert got == pytest.approx(expected)
            assert 0.0 <= got <= 1.0

    def test_zero_costs_rejected(self):
        with pytest.raises(MetricError):
            min_tdcf_normalized(WORKED, TdcfCosts(0.0, 1.0))
        with pytest.raises(MetricError):
            TdcfCosts(-1.0, 1.0)

    def test_asv_error_rates(self):
        pmiss, pfa, pmiss_spoof = asv_error_rates(
            np.array([2.0, 3.0, 4.0]),
            np.array([0.0, 1.0]),
            np.array([0.5, 3.5]),
        )
        assert (pmiss, pfa, pmiss_spoof) == (0.0, 0.0, 0.5)


class TestReports:
    def test_format_and_parse(self):
        summary = summarize(WORKED, TdcfCosts.from_parameters())
        report = format_report(summary)
        lines = report.splitlines()
        assert lines[0] == "eer=33.3333"
        assert "threshold=0.500000" in lines
        assert "c1=0.940500" in lines
        assert "bonafide_trials=3" in lines
        parsed = parse_report(report)
        assert parsed["eer"] == pytest.approx(33.3333)
        assert parsed["spoof_trials"] == 3

    def test_per_attack_lines_are_sorted(self):
        breakdown = per_attack_breakdown(
            np.array([0.9, 0.8]),
            {"RP02": np.array([0.1]), "RP01": np.array([0.85, 0.95])},
            UNIT_COSTS,
        )
        assert list(breakdown) == ["RP01", "RP02"]
        assert breakdown["RP02"].eer == 0.0
        report = format_report(summarize(WORKED, UNIT_COSTS), breakdown)
        assert report.splitlines()[-1].startswith("attack=RP02 eer=0.0000")
        assert "attack" not in parse_report(report)

    def test_malformed_value_names_the_line(self):
        with pytest.raises(MetricError, match="r.txt:2: min_tdcf value"):
            parse_report("eer=1.0\nmin_tdcf=abc\n", source="r.txt")


class TestPearson:
    def test_perfect_correlation(self):
        assert pearson_correlation([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        assert pearson_correlation([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_partial_correlation(self):
        assert pearson_correlation([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)

    def test_bounded(self, rng):
        for _ in range(50):
            value = pearson_correlation(rng.standard_normal(10).tolist(), rng.standard_normal(10).tolist())
            assert -1.0 <= value <= 1.0

    @pytest.mark.parametrize(("xs", "ys"), [([1.0], [2.0]), ([1.0, 1.0], [2.0, 3.0]), ([1.0, 2.0], [1.0])])
    def test_undefined(self, xs, ys):
        with pytest.raises(MetricError):
            pearson_correlation(xs, ys)
