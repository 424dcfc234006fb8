import numpy as np
import pytest

from bandspectra.errors import DomainError
from bandspectra.histogram import uniform_edges
from bandspectra.limits import (
    build_limit_table,
    clt_covariance,
    clt_covariance_matrix,
    lln_limit,
    nu_reference_histogram,
    spectral_density_range,
)
from bandspectra.process import (
    DriverSpec,
    Kernel,
    ProcessModel,
    autocovariance,
    iterated_autocovariance,
    nu_moment,
)

WHITE = ProcessModel(Kernel.impulse(), DriverSpec.gaussian())
WHITE_RAD = ProcessModel(Kernel.impulse(), DriverSpec.rademacher())
MA1 = ProcessModel(Kernel.moving_average([1.0, 0.5]), DriverSpec.gaussian())
MA1_RAD = ProcessModel(Kernel.moving_average([1.0, 0.5]), DriverSpec.rademacher())
MA2_EXP = ProcessModel(
    Kernel.moving_average([1.0, -0.6, 0.3]), DriverSpec.centered_exponential()
)


class TestLlnLimit:
    def test_white_noise_all_one(self):
        for k in range(1, 6):
            assert lln_limit(WHITE, k) == pytest.approx(1.0)

    def test_first_moment_is_variance(self):
        assert lln_limit(MA1, 1) == autocovariance(MA1, 0)

    def test_ma1_second(self):
        assert lln_limit(MA1, 2) == pytest.approx(2.0625)

    def test_equals_nu_moment(self):
        for k in range(1, 6):
            assert lln_limit(MA2_EXP, k) == nu_moment(MA2_EXP, k)


class TestCltCovariance:
    def test_white_noise_value(self):
        sigma2 = 1.3
        model = ProcessModel(Kernel.impulse(), DriverSpec.gaussian(sigma2))
        assert clt_covariance(model, 1, 1) == pytest.approx(2 * sigma2**2)

    def test_white_rademacher_cancels(self):
        assert clt_covariance(WHITE_RAD, 1, 1) == pytest.approx(0.0, abs=1e-14)

    def test_gaussian_driver_drops_correction(self):
        for k in range(1, 4):
            for ell in range(1, 4):
                expected = 2 * k * ell * iterated_autocovariance(MA1, k + ell, 0)
                assert clt_covariance(MA1, k, ell) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("model", [MA1_RAD, MA2_EXP], ids=["ma1-rad", "ma2-exp"])
    def test_symmetry(self, model):
        for k in range(1, 4):
            for ell in range(k, 4):
                assert clt_covariance(model, k, ell) == pytest.approx(
                    clt_covariance(model, ell, k), rel=1e-12
                )

    def test_scaling_law(self):
        c = 1.3
        base = ProcessModel(Kernel.moving_average([1.0, 0.5]), DriverSpec.rademacher())
        scaled = ProcessModel(
            Kernel.moving_average([c, 0.5 * c]), DriverSpec.rademacher()
        )
        for k in range(1, 4):
            assert lln_limit(scaled, k) == pytest.approx(
                c ** (2 * k) * lln_limit(base, k), rel=1e-12
            )
            for ell in range(1, 4):
                assert clt_covariance(scaled, k, ell) == pytest.approx(
                    c ** (2 * (k + ell)) * clt_covariance(base, k, ell), rel=1e-12
                )

    @pytest.mark.parametrize(
        "model", [WHITE, WHITE_RAD, MA1, MA1_RAD, MA2_EXP],
        ids=["white", "white-rad", "ma1", "ma1-rad", "ma2-exp"],
    )
    def test_matrix_is_psd(self, model):
        mat = clt_covariance_matrix(model, range(1, 6))
        assert np.allclose(mat, mat.T)
        eigs = np.linalg.eigvalsh(mat)
        assert eigs[0] >= -1e-9

    def test_requires_positive_powers(self):
        with pytest.raises(DomainError):
            clt_covariance(MA1, 0, 1)


class TestReferenceHistogram:
    def test_white_noise_point_mass(self):
        edges = uniform_edges(0.5, 1.5, 10)
        h = nu_reference_histogram(WHITE, edges, 2000)
        assert np.max(h.masses) == pytest.approx(1.0)
        assert h.total_mass == pytest.approx(1.0)

    def test_mean_matches_variance(self):
        lo, hi = spectral_density_range(MA1)
        edges = uniform_edges(lo, hi, 4000)
        h = nu_reference_histogram(MA1, edges, 100_000)
        assert h.mean == pytest.approx(autocovariance(MA1, 0), abs=1e-3)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_moments_match_exact(self, k):
        lo, hi = spectral_density_range(MA1)
        edges = uniform_edges(lo, hi, 4000)
        h = nu_reference_histogram(MA1, edges, 100_000)
        assert h.moment(k) == pytest.approx(nu_moment(MA1, k), rel=1e-3)

    def test_requires_fine_grid(self):
        with pytest.raises(DomainError):
            nu_reference_histogram(MA1, uniform_edges(0, 3, 4), 100)

    def test_bad_edges(self):
        with pytest.raises(DomainError):
            nu_reference_histogram(MA1, [2.0, 1.0], 2000)


class TestLimitTable:
    def test_invariants(self):
        table = build_limit_table(MA1_RAD, 3)
        assert np.allclose(table.clt_matrix, table.clt_matrix.T)
        for k in range(1, 4):
            assert table.nu_moments[k] == table.r_tables[k][0]
        for (i, j), v in table.q_values.items():
            assert table.q_values[(j, i)] == pytest.approx(v, rel=1e-12)

    def test_r_zero_lag_matches(self):
        table = build_limit_table(MA1, 2)
        for m in range(1, 5):
            assert table.r_tables[m][0] == pytest.approx(
                iterated_autocovariance(MA1, m, 0), rel=1e-12
            )

    def test_csv_rows_shape(self):
        table = build_limit_table(WHITE_RAD, 2)
        rows = table.to_csv_rows()
        assert all(r.count(",") == 5 for r in rows)
        kinds = {r.split(",")[0] for r in rows}
        assert kinds == {"nu_moment", "r_convolution", "q", "clt_covariance"}
