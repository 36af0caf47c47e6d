import numpy as np
import pytest

from hdfavar.core import (
    CompanionForm,
    FavarParams,
    TimeSeriesPanel,
    build_companion,
    center_columns,
    check_centered,
    spectral_radius,
)


def small_params(d=1, p1=2, p2=3, q=4, scale=0.3):
    rng = np.random.default_rng(7)
    p = p1 + p2
    transitions = tuple(scale * rng.standard_normal((p, p)) / p for _ in range(d))
    return FavarParams(
        d=d, p1=p1, p2=p2, q=q,
        transitions=transitions,
        loading=rng.standard_normal((q, p1)),
        coeff=rng.standard_normal((q, p2)),
        sigma_wF=np.ones(p1), sigma_wX=np.ones(p2), sigma_e=np.ones(q),
    )


class TestTimeSeriesPanel:
    def test_basic_shape_and_labels(self):
        panel = TimeSeriesPanel(values=np.zeros((5, 3)), labels=["a", "b", "c"])
        assert panel.n == 5 and panel.m == 3
        assert panel.labels == ["a", "b", "c"]

    def test_default_labels_generated(self):
        panel = TimeSeriesPanel(values=np.zeros((4, 2)))
        assert panel.labels == ["s0", "s1"]

    def test_rejects_1d(self):
        with pytest.raises(ValueError, match="2-d"):
            TimeSeriesPanel(values=np.zeros(5))

    def test_rejects_single_row(self):
        with pytest.raises(ValueError, match="2 time points"):
            TimeSeriesPanel(values=np.zeros((1, 3)))

    def test_rejects_nan(self):
        values = np.zeros((4, 2))
        values[2, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            TimeSeriesPanel(values=values)

    def test_rejects_label_mismatch(self):
        with pytest.raises(ValueError, match="labels"):
            TimeSeriesPanel(values=np.zeros((4, 2)), labels=["only_one"])


class TestFavarParams:
    def test_valid_construction(self):
        params = small_params(d=2)
        assert params.p == 5
        assert len(params.transitions) == 2

    def test_wrong_transition_count(self):
        good = small_params(d=1)
        with pytest.raises(ValueError, match="transition"):
            FavarParams(
                d=2, p1=good.p1, p2=good.p2, q=good.q,
                transitions=good.transitions,
                loading=good.loading, coeff=good.coeff,
                sigma_wF=good.sigma_wF, sigma_wX=good.sigma_wX, sigma_e=good.sigma_e,
            )

    def test_nonpositive_sigma_rejected(self):
        good = small_params()
        with pytest.raises(ValueError, match="sigma_e"):
            FavarParams(
                d=1, p1=good.p1, p2=good.p2, q=good.q,
                transitions=good.transitions,
                loading=good.loading, coeff=good.coeff,
                sigma_wF=good.sigma_wF, sigma_wX=good.sigma_wX,
                sigma_e=np.zeros(good.q),
            )

    def test_stability_flag_matches_radius(self):
        params = small_params(scale=0.1)
        rho = spectral_radius(params.companion().matrix)
        assert params.is_stable() == (rho < 1.0)


class TestCompanion:
    def test_single_lag_is_identity_lift(self):
        a = np.array([[0.5, 0.1], [0.0, 0.2]])
        comp = build_companion([a])
        assert isinstance(comp, CompanionForm)
        assert comp.d == 1 and comp.p == 2
        np.testing.assert_array_equal(comp.matrix, a)

    def test_two_lag_layout(self):
        a1 = np.eye(2) * 0.5
        a2 = np.eye(2) * 0.25
        comp = build_companion([a1, a2]).matrix
        np.testing.assert_array_equal(comp[:2, :2], a1)
        np.testing.assert_array_equal(comp[:2, 2:], a2)
        np.testing.assert_array_equal(comp[2:, :2], np.eye(2))
        np.testing.assert_array_equal(comp[2:, 2:], np.zeros((2, 2)))

    def test_companion_eigenvalues_scalar_ar2(self):
        # scalar AR(2): z_t = a1 z_{t-1} + a2 z_{t-2}; companion eigenvalues
        # solve x^2 - a1 x - a2 = 0
        a1, a2 = 0.5, 0.2
        comp = build_companion([np.array([[a1]]), np.array([[a2]])]).matrix
        roots = np.roots([1.0, -a1, -a2])
        assert np.isclose(spectral_radius(comp), np.max(np.abs(roots)))

    def test_mismatched_sizes_rejected(self):
        with pytest.raises(ValueError):
            build_companion([np.eye(2), np.eye(3)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_companion([])


class TestSpectralRadius:
    def test_diagonal(self):
        assert spectral_radius(np.diag([0.3, -0.9, 0.5])) == pytest.approx(0.9)

    def test_rotation_has_unit_radius(self):
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        assert spectral_radius(rot) == pytest.approx(1.0)

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError, match="square"):
            spectral_radius(np.zeros((2, 3)))

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            spectral_radius(np.array([[np.nan, 0], [0, 1]]))


class TestCentering:
    def test_center_columns_zero_mean(self):
        rng = np.random.default_rng(0)
        panel = TimeSeriesPanel(values=rng.standard_normal((40, 3)) + 5.0)
        centered, means = center_columns(panel)
        np.testing.assert_allclose(centered.values.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(centered.values + means, panel.values)

    def test_check_centered_accepts_centered(self):
        rng = np.random.default_rng(1)
        mat = rng.standard_normal((30, 4))
        check_centered(mat - mat.mean(axis=0))

    def test_check_centered_rejects_shifted(self):
        rng = np.random.default_rng(2)
        mat = rng.standard_normal((30, 4)) + 3.0
        with pytest.raises(ValueError, match="centered"):
            check_centered(mat, "X")

    def test_constant_zero_column_allowed(self):
        mat = np.zeros((10, 2))
        mat[:, 1] = np.linspace(-1, 1, 10)
        check_centered(mat)
