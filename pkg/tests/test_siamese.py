import numpy as np
import pytest

from authverify.numeric import ShapeError, make_rng
from authverify.siamese import (
    DIFFERENT_AUTHORS,
    SAME_AUTHOR,
    Thresholds,
    contrastive_loss,
    contrastive_loss_grad,
    decide,
    distance,
)

THR = Thresholds(1.0, 3.0)


class TestThresholds:
    def test_midpoint(self):
        assert Thresholds(1.0, 3.0).midpoint == 2.0

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            Thresholds(3.0, 1.0)
        with pytest.raises(ValueError):
            Thresholds(2.0, 2.0)
        with pytest.raises(ValueError):
            Thresholds(-0.5, 1.0)


class TestDistance:
    def test_identical_vectors(self):
        x = np.array([1.0, 2.0, 3.0])
        assert distance(x, x.copy()) == 0.0

    def test_hand_computed(self):
        assert distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(
            np.sqrt(2.0)
        )

    def test_symmetry(self):
        rng = make_rng(5)
        for _ in range(20):
            a, b = rng.normal(size=(2, 6))
            assert distance(a, b) == distance(b, a)

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            distance(np.zeros(3), np.zeros(4))


class TestContrastiveLoss:
    def test_satisfied_same_author_is_zero(self):
        x1 = np.array([0.5, 0.0])
        x2 = np.array([0.0, 0.0])  # d = 0.5 <= tau1
        assert contrastive_loss(x1, x2, 1, THR) == 0.0

    def test_satisfied_different_author_is_zero(self):
        x1 = np.array([5.0, 0.0])
        x2 = np.array([0.0, 0.0])  # d = 5 >= tau2
        assert contrastive_loss(x1, x2, 0, THR) == 0.0

    def test_direct_evaluation(self):
        x1 = np.array([2.5, 0.0])
        x2 = np.array([0.0, 0.0])  # d = 2.5, l = 1 -> 0.5 * 1.5^2
        assert contrastive_loss(x1, x2, 1, THR) == pytest.approx(1.125)

    def test_invalid_label(self):
        with pytest.raises(ValueError):
            contrastive_loss(np.zeros(2), np.zeros(2), 2, THR)

    def test_non_negative_and_monotone(self):
        base = np.zeros(3)
        grid = np.linspace(0.0, 5.0, 101)
        losses_same = [
            contrastive_loss(np.array([d, 0.0, 0.0]), base, 1, THR) for d in grid
        ]
        losses_diff = [
            contrastive_loss(np.array([d, 0.0, 0.0]), base, 0, THR) for d in grid
        ]
        assert all(v >= 0.0 for v in losses_same + losses_diff)
        assert all(b >= a for a, b in zip(losses_same, losses_same[1:]))
        assert all(b <= a for a, b in zip(losses_diff, losses_diff[1:]))

    def test_swap_symmetry(self):
        rng = make_rng(9)
        for _ in range(10):
            x1, x2 = rng.normal(size=(2, 4))
            for label in (0, 1):
                assert contrastive_loss(x1, x2, label, THR) == contrastive_loss(
                    x2, x1, label, THR
                )

    def test_continuity_at_kinks(self):
        eps = 1e-9
        for label, tau in ((1, THR.tau1), (0, THR.tau2)):
            below = contrastive_loss(np.array([tau - eps, 0.0]), np.zeros(2), label, THR)
            at = contrastive_loss(np.array([tau, 0.0]), np.zeros(2), label, THR)
            above = contrastive_loss(np.array([tau + eps, 0.0]), np.zeros(2), label, THR)
            assert abs(below - at) < 1e-9
            assert abs(above - at) < 1e-9


class TestContrastiveLossGrad:
    def test_flat_region_zero(self):
        g1, g2 = contrastive_loss_grad(
            np.array([0.5, 0.0]), np.zeros(2), 1, THR
        )
        assert np.all(g1 == 0.0) and np.all(g2 == 0.0)

    def test_zero_distance_subgradient(self):
        x = np.array([1.0, 2.0])
        g1, g2 = contrastive_loss_grad(x, x.copy(), 0, THR)
        assert np.all(g1 == 0.0) and np.all(g2 == 0.0)

    def test_antisymmetry(self):
        rng = make_rng(3)
        for _ in range(20):
            x1, x2 = rng.normal(size=(2, 5))
            for label in (0, 1):
                g1, g2 = contrastive_loss_grad(x1, x2, label, THR)
                np.testing.assert_array_equal(g1, -g2)

    def test_matches_finite_differences(self):
        rng = make_rng(17)
        eps = 1e-7
        for label in (0, 1):
            # place d in the active region for the label
            x1 = rng.normal(size=3)
            x2 = x1 + (1.4 if label == 1 else 0.7) * rng.normal(size=3) / np.sqrt(3)
            d = distance(x1, x2)
            if label == 1 and d <= THR.tau1 + 0.05:
                x2 = x1 + (x2 - x1) * (THR.tau1 + 0.5) / d
            if label == 0 and d >= THR.tau2 - 0.05:
                x2 = x1 + (x2 - x1) * (THR.tau2 - 0.5) / d
            g1, g2 = contrastive_loss_grad(x1, x2, label, THR)
            for vec, grad in ((x1, g1), (x2, g2)):
                for j in range(3):
                    orig = vec[j]
                    vec[j] = orig + eps
                    up = contrastive_loss(x1, x2, label, THR)
                    vec[j] = orig - eps
                    down = contrastive_loss(x1, x2, label, THR)
                    vec[j] = orig
                    fd = (up - down) / (2 * eps)
                    assert grad[j] == pytest.approx(fd, rel=1e-6, abs=1e-9)


class TestDecide:
    def test_below_midpoint_is_same(self):
        score = decide(1.5, THR)
        assert score.decision == SAME_AUTHOR
        assert score.margin == pytest.approx(-0.5)

    def test_tie_goes_to_different(self):
        assert decide(2.0, THR).decision == DIFFERENT_AUTHORS

    def test_zero_distance_same_for_any_thresholds(self):
        for thr in (THR, Thresholds(0.0, 0.1), Thresholds(5.0, 9.0)):
            assert decide(0.0, thr).decision == SAME_AUTHOR

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            decide(-0.1, THR)
