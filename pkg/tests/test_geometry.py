"""
Tests for gaugeline.geometry module.
"""

import numpy as np
import pytest

from gaugeline import envelope
from gaugeline.errors import DomainError, InsufficientBallsError
from gaugeline.gauge import evaluate, make_builtin, sampled_gauge
from gaugeline.geometry import (
    argmax_before,
    ball_components,
    bcp_radii,
    bcp_violation,
    bilipschitz_check,
    lc_ratio,
    nonlc_witness,
)


@pytest.fixture(scope="module")
def bcp2():
    """Envelope of h(1) <= 1/2 and h(1/2) <= 1/3 on [0, 2]."""
    return envelope.envelope_builtin("bcp_envelope", {"n": 2}).gauge


class TestBallComponents:
    """Test cases for ball decomposition."""

    def test_euclidean_ball_is_an_interval(self, euclidean):
        """Test that Euclidean balls are connected."""
        ball = ball_components(euclidean, 0.5)

        assert not ball.disconnected
        assert ball.gap is None
        assert not ball.truncated
        assert ball.components[0] == pytest.approx((-0.5, 0.5), abs=1e-3)
        assert ball.length == pytest.approx(1.0, abs=2e-3)

    def test_centre_shift(self, euclidean):
        """Test that balls are translated to their centre."""
        ball = ball_components(euclidean, 0.5, center=1.0)

        assert ball.components[0] == pytest.approx((0.5, 1.5), abs=1e-3)
        assert ball.contains(1.2)
        assert not ball.contains(1.6)

    def test_envelope_ball_splits(self, bcp2):
        """Test the ball of radius 0.4: [-0.4, 0.4] plus a piece around each of +-1/2."""
        ball = ball_components(bcp2, 0.4)
        side = 0.4 - 1 / 3

        assert ball.disconnected
        assert len(ball.components) == 3
        np.testing.assert_allclose(
            ball.components,
            [(-0.5 - side, -0.5 + side), (-0.4, 0.4), (0.5 - side, 0.5 + side)],
            atol=1e-12,
        )
        assert ball.gap == pytest.approx((0.4, 0.5 - side))
        assert ball.contains(0.45)
        assert not ball.contains(0.42)
        assert not ball.truncated

    def test_radius_at_cap_gives_a_point(self, bcp2):
        """Test that the closed ball of radius 1/3 meets 1/2 in a single point."""
        closed = ball_components(bcp2, 1 / 3)
        opened = ball_components(bcp2, 1 / 3, closed=False)

        assert closed.components[-1] == pytest.approx((0.5, 0.5))
        assert closed.contains(0.5)
        assert not opened.contains(0.5)
        assert not opened.disconnected

    def test_sampled_table_runs(self):
        """Test grid runs of a non-monotone table."""
        g = sampled_gauge([0.0, 1.0, 0.5, 2.0], 1.0)

        ball = ball_components(g, 0.75)

        assert ball.components == [(-2.0, -2.0), (0.0, 0.0), (2.0, 2.0)]
        assert ball.gap == (0.0, 2.0)

    @pytest.mark.parametrize("n", range(3, 11))
    def test_bcp20_origin_component_is_short(self, bcp20, n):
        """Test that the ball of radius 1/(n+1) splits before (n+2)/(n+1)^2."""
        g = bcp20.gauge
        ball = ball_components(g, 1.0 / (n + 1))
        origin = ball.positive_components[0]

        assert ball.disconnected
        assert 1.0 / (n + 1) - 1e-12 <= origin[1] <= (n + 2) / (n + 1) ** 2 + g.grid_step

    def test_truncated_ball(self, euclidean):
        """Test that balls reaching the domain edge are flagged."""
        assert ball_components(euclidean, 4.0).truncated

    def test_nonpositive_radius(self, euclidean):
        """Test that radii must be positive."""
        with pytest.raises(DomainError):
            ball_components(euclidean, 0.0)


class TestBcpViolation:
    """Test cases for the Besicovitch certificate."""

    @pytest.fixture
    def two_gaps(self):
        """Table whose balls of radius 2 and 1 have gaps (2, 6) and (0, 2)."""
        return sampled_gauge([0.0, 1.5, 0.5, 3.0, 3.0, 3.0, 1.8, 5.0], 1.0)

    def test_radii(self, bcp20):
        """Test the scanned radii 1/(k+1)."""
        radii = bcp_radii(bcp20.gauge)

        assert radii[0] == pytest.approx(1 / 3)
        assert radii[-1] == pytest.approx(1 / 20)

    def test_certificate(self, bcp20):
        """Test a two-ball family whose centres avoid each other's ball."""
        g = bcp20.gauge

        certificate = bcp_violation(g, 2)

        assert certificate.depth == 2
        assert len(certificate.balls) == 2
        assert certificate.all_passed
        assert len(certificate.membership) == 2
        assert len(certificate.separation) == 2
        (x0, r0), (x1, r1) = certificate.balls
        assert evaluate(g, abs(x0 - x1)) > max(r0, r1)
        for x, r in certificate.balls:
            assert evaluate(g, abs(x)) <= r + 1e-12

    def test_centres_beyond_gaps(self, bcp20):
        """Test that every centre sits at or past the far end of its ball's gap."""
        certificate = bcp_violation(bcp20.gauge, 2)
        radii = bcp_radii(bcp20.gauge)

        assert len(certificate.gaps) == len(certificate.balls)
        for (x, r), (y1, y2) in zip(certificate.balls, certificate.gaps):
            assert min(abs(r - q) for q in radii) < 1e-15
            assert 0 < y1 < y2 <= abs(x) + 1e-15

    def test_one_sided(self, bcp20):
        """Test that one-sided centres are the gap ends -y''."""
        certificate = bcp_violation(bcp20.gauge, 1, one_sided=True)
        (x, _), (_, y2) = certificate.balls[0], certificate.gaps[0]

        assert x == -y2
        assert certificate.all_passed

    def test_nested_family(self, two_gaps):
        """Test that the smaller ball's centre lands in the gap of the larger one."""
        certificate = bcp_violation(two_gaps, 2, one_sided=True, radii=[2.0, 1.0])

        assert certificate.balls == [(-6.0, 2.0), (-2.0, 1.0)]
        assert certificate.gaps == [(2.0, 6.0), (0.0, 2.0)]
        assert certificate.all_passed
        y1, y2 = certificate.gaps[0]
        assert y1 < abs(-6.0 - -2.0) < y2

    def test_two_sided_family(self, two_gaps):
        """Test that mirrored centres double the family."""
        certificate = bcp_violation(two_gaps, 4, radii=[2.0, 1.0])

        assert certificate.balls == [(-6.0, 2.0), (6.0, 2.0), (-2.0, 1.0), (2.0, 1.0)]
        assert len(certificate.separation) == 12
        assert certificate.all_passed

    def test_family_is_maximal(self, two_gaps):
        """Test that the search reports the size of the largest family."""
        with pytest.raises(InsufficientBallsError) as exc_info:
            bcp_violation(two_gaps, 5, radii=[2.0, 1.0])

        assert exc_info.value.found == 4

    def test_too_deep(self, bcp20):
        """Test that an unreachable depth reports how many balls were found."""
        with pytest.raises(InsufficientBallsError) as exc_info:
            bcp_violation(bcp20.gauge, 100)

        assert exc_info.value.requested == 100
        assert 2 <= exc_info.value.found < 100

    def test_euclidean_has_no_violation(self, euclidean):
        """Test that connected balls give no certificate."""
        with pytest.raises(InsufficientBallsError) as exc_info:
            bcp_violation(euclidean, 1, radii=[0.5, 0.25])

        assert exc_info.value.found == 0

    def test_invalid_depth(self, bcp20):
        """Test that the depth must be positive."""
        with pytest.raises(DomainError):
            bcp_violation(bcp20.gauge, 0)


class TestLinearConnectedness:
    """Test cases for the lc ratio."""

    def test_euclidean_bounded(self, euclidean):
        """Test that monotone gauges have ratio 1."""
        report = lc_ratio(euclidean)

        assert report.verdict == "bounded"
        assert report.lambda_hat == pytest.approx(1.0)
        assert report.sup_estimate == pytest.approx(1.0)

    def test_bcp_envelope_bounded(self, bcp2):
        """Test that a two cap envelope stays linearly connected."""
        report = lc_ratio(bcp2, np.geomspace(0.01, 2.0, 41))

        assert report.sup_estimate < 3.0

    def test_nonlc_ratio_is_large(self, nonlc2):
        """Test that the ratio reaches the order of a_2 / a_1 at the top of the domain."""
        report = lc_ratio(nonlc2.gauge)

        assert report.sup_estimate >= 2000
        assert report.witness_t == pytest.approx(2.0**27)
        assert report.verdict != "bounded"

    def test_table(self, euclidean):
        """Test the plot table."""
        table = lc_ratio(euclidean, [1.0, 2.0]).table()

        assert table.columns == ["t", "max_before", "ratio"]
        assert len(table.rows) == 2

    @pytest.mark.parametrize("samples", [[], [0.0, 1.0], [5.0]])
    def test_invalid_samples(self, euclidean, samples):
        """Test that samples must lie in (0, x_max]."""
        with pytest.raises(DomainError):
            lc_ratio(euclidean, samples)

    def test_argmax_before(self):
        """Test the location of the max of h on [0, t]."""
        g = sampled_gauge([0.0, 1.0, 0.5, 2.0], 1.0)

        assert argmax_before(g, 1.8) == 1.0
        assert argmax_before(g, 2.5) == 2.5

    def test_argmax_before_monotone(self, euclidean):
        """Test that monotone gauges peak at t."""
        assert argmax_before(euclidean, 1.5) == 1.5

    def test_nonlc_witness(self, desk_nonlc):
        """Test the scale and offset handed to the Hex certificate."""
        witness = nonlc_witness(desk_nonlc, 128)

        assert 0 < witness.x < witness.y
        assert 1 <= witness.l <= 127
        assert witness.l == round(128 * witness.x / witness.y)
        assert witness.ratio > 4

    def test_nonlc_witness_small_m(self, desk_nonlc):
        """Test that m must be at least 2."""
        with pytest.raises(DomainError):
            nonlc_witness(desk_nonlc, 1)

    def test_nonlc_witness_below_cap(self, desk_nonlc):
        """Test that the witness scale sits at the largest sequence term inside the cap."""
        witness = nonlc_witness(desk_nonlc, 128, y_max=4096.0)

        assert witness.y == pytest.approx(1024.0)
        assert witness.ratio > 20


class TestBilipschitz:
    """Test cases for the biLipschitz check."""

    def test_euclidean(self, euclidean):
        """Test the trivial case."""
        report = bilipschitz_check(euclidean)

        assert report.verdict == "bounded"
        assert report.spread == pytest.approx(1.0)
        assert report.k_hat == pytest.approx(1.0)
        assert report.witnesses == []

    def test_sqrt_unbounded(self, sqrt_gauge):
        """Test that sqrt is not biLipschitz to the line."""
        report = bilipschitz_check(sqrt_gauge)

        assert report.verdict == "unbounded"
        assert report.spread == pytest.approx(200.0)
        assert report.witnesses

    def test_bcp_envelope_bounded(self):
        """Test that the BCP envelopes stay within a factor 2 of the line."""
        g = envelope.envelope_builtin("bcp_envelope", {"n": 6}).gauge

        report = bilipschitz_check(g)

        assert report.verdict == "bounded"
        assert report.spread <= 2.0 + 1e-9
        assert 0.5 - 1e-12 <= report.min_ratio <= report.max_ratio <= 1.0 + 1e-12

    def test_scale_invariance(self):
        """Test that scaling the caps and the ladder leaves the ratios unchanged."""
        c = envelope.bcp_constraints(3)
        step = envelope.default_bcp_step(3)
        base = envelope.solve_envelope(c, step, 2.0).gauge
        scaled = envelope.solve_envelope(envelope.scale_constraints(c, 2.0), 2 * step, 4.0).gauge
        ladder = np.geomspace(1 / 12, 2.0, 25)

        a = bilipschitz_check(base, ladder)
        b = bilipschitz_check(scaled, 2 * ladder)

        assert a.verdict == b.verdict
        assert a.spread == pytest.approx(b.spread, rel=1e-9)

    def test_dim1_deep_ladder(self):
        """Test that dim1 drifts away from the line like log(1/x)."""
        g = make_builtin("dim1", check=False)

        report = bilipschitz_check(g, np.geomspace(1e-60, 1.0, 61))

        assert report.verdict == "unbounded"
        assert report.max_ratio > 100
        assert report.samples[-1][0] == pytest.approx(1e-60)

    def test_invalid_ladder(self, euclidean):
        """Test that the ladder must lie in (0, x_max]."""
        with pytest.raises(DomainError):
            bilipschitz_check(euclidean, [-1.0, 1.0])
