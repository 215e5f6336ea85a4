import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

import oracles
from phsfd import (
    DegenerateStencilError,
    laplace_weights,
    monomial_basis,
    monomial_laplacian_at_origin,
    phs_eval,
    phs_laplacian,
    stencil_size,
)


@pytest.fixture(scope="module")
def perturbed_grid_stencil():
    """Fixed 12-point stencil: unit-spaced grid with small jitter, center first."""
    rng = np.random.default_rng(42)
    base = np.array(
        [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [1, 1],
         [-1, 1], [1, -1], [-1, -1], [2, 0], [-2, 0], [0, 2]],
        dtype=float,
    )
    pts = base + 0.15 * rng.standard_normal(base.shape)
    pts[0] = base[0]
    return pts


class TestKernel:
    def test_values(self):
        assert phs_eval(0.0) == 0.0
        assert phs_eval(1.0) == 1.0
        assert phs_eval(2.0) == 8.0

    def test_laplacian_matches_symbolic_radial_form(self):
        # oracle: phi'' + phi'/r for phi = r^3
        r = sympy.symbols("r", positive=True)
        phi = r**3
        radial = sympy.simplify(sympy.diff(phi, r, 2) + sympy.diff(phi, r) / r)
        for value in (1.0, 2.0, 0.37):
            assert phs_laplacian(value) == pytest.approx(float(radial.subs(r, value)), rel=1e-15)

    def test_laplacian_zero_limit(self):
        assert phs_laplacian(0.0) == 0.0


class TestMonomials:
    def test_degree_zero(self):
        basis = monomial_basis(0)
        assert basis.exponents.tolist() == [[0, 0]]

    def test_graded_order_m2(self):
        basis = monomial_basis(2)
        assert basis.exponents.tolist() == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]

    @pytest.mark.parametrize("m,count", [(2, 6), (4, 15)])
    def test_counts(self, m, count):
        assert monomial_basis(m).size == count

    @given(m=st.integers(min_value=0, max_value=8))
    def test_basis_properties(self, m):
        basis = monomial_basis(m)
        pairs = [tuple(p) for p in basis.exponents.tolist()]
        assert len(pairs) == (m + 1) * (m + 2) // 2
        assert len(set(pairs)) == len(pairs)
        degrees = [a + b for a, b in pairs]
        assert degrees == sorted(degrees)
        for d in range(m + 1):
            within = [a for a, b in pairs if a + b == d]
            assert within == sorted(within, reverse=True)

    def test_laplacian_at_origin(self):
        assert monomial_laplacian_at_origin(2, 0) == 2.0
        assert monomial_laplacian_at_origin(0, 2) == 2.0
        assert monomial_laplacian_at_origin(3, 1) == 0.0
        assert monomial_laplacian_at_origin(0, 0) == 0.0
        assert monomial_laplacian_at_origin(1, 1) == 0.0

    def test_stencil_size(self):
        assert stencil_size(2) == 12
        assert stencil_size(3) == 20


class TestWeights:
    def test_constant_and_quadratic_reproduction(self, perturbed_grid_stencil):
        lw = laplace_weights(perturbed_grid_stencil, 2)
        w = lw.weights
        assert abs(w.sum()) <= 1e-7 * np.abs(w).max()
        q = ((perturbed_grid_stencil - perturbed_grid_stencil[0]) ** 2).sum(axis=1)
        assert (w * q).sum() == pytest.approx(4.0, rel=1e-7)

    @pytest.mark.parametrize("m", [2, 3])
    def test_monomial_reproduction_all_degrees(self, m):
        rng = np.random.default_rng(5 + m)
        n = stencil_size(m)
        pts = np.vstack([[0.0, 0.0], rng.uniform(-1, 1, size=(n - 1, 2))])
        lw = laplace_weights(pts, m)
        delta = pts - pts[0]
        for a, b in monomial_basis(m).exponents:
            reproduced = (lw.weights * delta[:, 0] ** a * delta[:, 1] ** b).sum()
            target = monomial_laplacian_at_origin(int(a), int(b))
            degree = int(a + b)
            assert abs(reproduced - target) <= 1e-7 * lw.scale ** (degree - 2)

    def test_matches_extended_precision_solve(self, perturbed_grid_stencil):
        lw = laplace_weights(perturbed_grid_stencil, 2)
        reference = oracles.weights_extended_precision(perturbed_grid_stencil, 2)
        assert np.abs(lw.weights - reference).max() <= 1e-9 * np.abs(reference).max()

    def test_scale_covariance(self, perturbed_grid_stencil):
        lw = laplace_weights(perturbed_grid_stencil, 2)
        for lam, rel in ((2.0, 1e-13), (3.0, 1e-9)):
            scaled = laplace_weights(lam * perturbed_grid_stencil, 2)
            assert np.abs(scaled.weights - lw.weights / lam**2).max() <= rel * np.abs(
                lw.weights
            ).max()

    def test_translation_invariance(self, perturbed_grid_stencil):
        lw = laplace_weights(perturbed_grid_stencil, 2)
        shifted = laplace_weights(perturbed_grid_stencil + np.array([0.3, -0.7]), 2)
        assert np.abs(shifted.weights - lw.weights).max() <= 1e-10 * np.abs(lw.weights).max()

    def test_kernel_row_identity(self, perturbed_grid_stencil):
        # Each kernel row of the local system is satisfied exactly once the
        # polynomial multiplier block is included.
        lw = laplace_weights(perturbed_grid_stencil, 2)
        xi = (perturbed_grid_stencil - perturbed_grid_stencil[0]) / lw.scale
        w_scaled = lw.weights * lw.scale**2
        exps = monomial_basis(2).exponents
        targets = 9.0 * np.sqrt((xi**2).sum(axis=1))
        scale = np.abs(targets).max()
        for j in range(xi.shape[0]):
            d = np.sqrt(((xi - xi[j]) ** 2).sum(axis=1))
            lhs = (w_scaled * d**3).sum() + sum(
                lw.multipliers[l] * xi[j, 0] ** exps[l, 0] * xi[j, 1] ** exps[l, 1]
                for l in range(len(exps))
            )
            assert abs(lhs - targets[j]) <= 1e-6 * scale

    def test_degenerate_stencil_collinear(self):
        pts = np.column_stack([np.linspace(0, 1, 12), np.zeros(12)])
        with pytest.raises(DegenerateStencilError) as err:
            laplace_weights(pts, 2, center=17)
        assert err.value.center == 17
        assert "17" in str(err.value)

    def test_degenerate_stencil_duplicate_point(self):
        rng = np.random.default_rng(0)
        pts = np.vstack([[0.0, 0.0], rng.uniform(-1, 1, size=(11, 2))])
        pts[5] = pts[3]
        with pytest.raises(DegenerateStencilError):
            laplace_weights(pts, 2)

    def test_wrong_point_count(self):
        with pytest.raises(ValueError):
            laplace_weights(np.zeros((10, 2)), 2)
