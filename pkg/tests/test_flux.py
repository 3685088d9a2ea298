import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P
from spinflux.chains import build_heisenberg_chain, build_xx_chain, christandl_couplings
from spinflux.closure import build_closure, generator_matrix
from spinflux.flux import (
    ExactEvolution,
    FluxSeries,
    ProductState,
    TruncationWarning,
    closed_form_coefficients,
    evolve_exact,
    evolve_taylor,
    flux_series,
    information_flux,
    product_expectation,
    recurrence_coefficients,
)
from spinflux.oracle import flux_via_oracle, heisenberg_operator, pauli_decompose, string_matrix
from spinflux.pauli import PauliString

SQRT2 = math.sqrt(2)


def christandl5(j=1.0):
    g = build_closure(build_xx_chain(5, christandl_couplings(5, j)), P("X5", 5))
    return g, generator_matrix(g)


def site_order(vec):
    """Closure order (seed first) -> decomposition order (site-1 string first)."""
    return np.asarray(vec.values)[::-1]


class TestEvolveTaylor:
    @pytest.mark.filterwarnings("ignore::spinflux.flux.TruncationWarning")
    def test_cutoff_zero_is_seed(self):
        _, a = christandl5()
        np.testing.assert_array_equal(evolve_taylor(a, 0.9, 0).values, [1, 0, 0, 0, 0])

    @pytest.mark.parametrize("m", [60, 90])
    def test_christandl_transfer(self, m):
        _, a = christandl5(0.8)
        got = site_order(evolve_taylor(a, math.pi / (4 * 0.8), m))
        np.testing.assert_allclose(got, [1, 0, 0, 0, 0], atol=1e-8)

    def test_converges_monotonically_past_threshold(self, rng):
        for _ in range(5):
            n = int(rng.integers(3, 6))
            g = build_closure(build_heisenberg_chain(n, list(rng.uniform(0.3, 1.5, n - 1))), P(f"X{n}", n))
            a = generator_matrix(g)
            t = float(rng.uniform(0.2, 1.0))
            exact = evolve_exact(a, t).values
            start = math.ceil(math.e * np.linalg.norm(a.matrix, 2) * t)
            errs = []
            for m in range(start, start + 25):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", TruncationWarning)
                    errs.append(np.linalg.norm(evolve_taylor(a, t, m).values - exact))
            tail = [e for e in errs if e > 1e-13]
            assert all(b <= a for a, b in zip(tail, tail[1:]))
            assert errs[-1] < 1e-10

    def test_warns_below_threshold(self):
        _, a = christandl5()
        with pytest.warns(TruncationWarning):
            evolve_taylor(a, 10.0, 5)

    def test_matches_recurrence_series(self):
        # gamma(t) = sum_l (2t)^l / l! gamma^(l), gamma^(l) from the halved rates
        j = [2, 3, 5, 7]
        g = build_closure(build_xx_chain(5, j), P("X5", 5))
        a = generator_matrix(g)
        half = [[Fraction(int(round(v / 2))) for v in row] for row in a.matrix]
        assert np.array_equal(2 * np.array(half, dtype=float), a.matrix)
        terms = recurrence_coefficients(half, 40, [1, 0, 0, 0, 0])
        t = 0.05
        series = sum(np.array(terms[l], dtype=float) * (2 * t) ** l / math.factorial(l) for l in range(41))
        np.testing.assert_allclose(series, evolve_taylor(a, t, 40).values, atol=1e-13)
        # first steps of the recurrence, site-ordered: gamma_4^(1) = J4, gamma_5^(2) = -J4^2
        assert terms[1][1] == 7 and terms[2][0] == -49


class TestEvolveExact:
    def test_time_zero(self):
        _, a = christandl5()
        np.testing.assert_allclose(evolve_exact(a, 0.0).values, [1, 0, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.3, 2.9])
    def test_xx3_site_one_coefficient(self, t):
        j = 0.6
        g = build_closure(build_xx_chain(3, [j, j]), P("X3", 3))
        vec = evolve_exact(generator_matrix(g), t)
        assert vec[P("X1 Z2 Z3", 3)] == pytest.approx(-math.sin(SQRT2 * j * t) ** 2, abs=1e-12)

    def test_christandl_eighth_period(self):
        j = 1.3
        _, a = christandl5(j)
        got = site_order(evolve_exact(a, math.pi / (8 * j)))
        np.testing.assert_allclose(got, [0.25, -0.5, -math.sqrt(3 / 8), 0.5, 0.25], atol=1e-12)
        assert float(got @ got) == pytest.approx(1.0, abs=1e-14)

    def test_non_antisymmetric_fallback(self):
        a = np.array([[0.0, 1.0], [0.5, 0.0]])
        evo = ExactEvolution(a)
        assert not evo.antisymmetric
        from scipy.linalg import expm
        np.testing.assert_allclose(evo(0.7).values, expm(0.7 * a)[:, 0], atol=1e-14)

    def test_grid_values_order_independent(self):
        _, a = christandl5()
        evo = ExactEvolution(a)
        times = np.linspace(0, 2, 7)
        fwd = evo.values(times)
        rev = evo.values(times[::-1])[::-1]
        np.testing.assert_array_equal(fwd, rev)


class TestClosedForms:
    def test_xx3_at_transfer_time(self, t_star_xx3):
        np.testing.assert_allclose(closed_form_coefficients("xx3_uniform", t_star_xx3).values, [-1, 0, 0],
                                   atol=1e-15)

    def test_christandl_endpoints(self):
        np.testing.assert_allclose(closed_form_coefficients("christandl5", 0.0).values, [0, 0, 0, 0, 1])
        np.testing.assert_allclose(closed_form_coefficients("christandl5", math.pi / 4).values,
                                   [1, 0, 0, 0, 0], atol=1e-15)

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            closed_form_coefficients("heisenberg3", 0.1)

    @pytest.mark.parametrize("j", [0.5, 0.7, 1.9])
    def test_gamma4_inner_argument(self, j):
        # 2 cos^3(2Jt) sin(2Jt) matches the exact evolution; 2 cos^3(2t) sin(2Jt) does not
        g, a = christandl5(j)
        times = np.linspace(0.05, 2.0, 40)
        got = ExactEvolution(a).values(times)[:, g.index(P("Y4 Z5", 5))]
        good = 2 * np.cos(2 * j * times) ** 3 * np.sin(2 * j * times)
        literal = 2 * np.cos(2 * times) ** 3 * np.sin(2 * j * times)
        np.testing.assert_allclose(got, good, atol=1e-12)
        assert np.max(np.abs(got - literal)) > 1e-2

    @pytest.mark.parametrize("model,letter", [("xx3_uniform", "X"), ("xx3_uniform", "Y"), ("christandl5", "X")])
    def test_match_exact_on_dense_grid(self, model, letter):
        j = 0.9
        n = 3 if model == "xx3_uniform" else 5
        couplings = [j, j] if n == 3 else christandl_couplings(5, j)
        g = build_closure(build_xx_chain(n, couplings), PauliString.single(n, n, letter))
        times = np.linspace(0, 2 * math.pi / j, 1000)
        got = ExactEvolution(generator_matrix(g)).values(times)
        order = [g.index(p) for p in closed_form_coefficients(model, 0, j, letter).nodes]
        ref = np.array([closed_form_coefficients(model, t, j, letter).values for t in times])
        np.testing.assert_allclose(got[:, order], ref, atol=1e-10)

    def test_x_and_y_seed_symmetry(self):
        h = build_xx_chain(3, [1.0, 1.0])
        times = np.linspace(0, 4, 50)
        gx = build_closure(h, P("X3", 3))
        gy = build_closure(h, P("Y3", 3))
        ax = ExactEvolution(generator_matrix(gx)).values(times)
        ay = ExactEvolution(generator_matrix(gy)).values(times)
        pick = lambda g, vals, s: vals[:, g.index(P(s, 3))]  # noqa: E731
        np.testing.assert_allclose(pick(gx, ax, "X1 Z2 Z3"), pick(gy, ay, "Y1 Z2 Z3"), atol=1e-12)
        np.testing.assert_allclose(pick(gx, ax, "Y2 Z3"), -pick(gy, ay, "X2 Z3"), atol=1e-12)
        np.testing.assert_allclose(pick(gx, ax, "X3"), pick(gy, ay, "Y3"), atol=1e-12)


class TestProductState:
    def test_bits(self):
        s = ProductState.from_bits("01")
        assert s.bloch == ((0.0, 0.0, 1.0), (0.0, 0.0, -1.0))

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            ProductState(((0.0, 0.0, 0.9),))

    def test_rejects_bad_bit(self):
        with pytest.raises(ValueError):
            ProductState.from_bits("02")

    @given(st.lists(st.tuples(st.floats(0, math.pi), st.floats(-math.pi, math.pi)), min_size=1, max_size=3))
    def test_amplitudes_reproduce_bloch_vectors(self, angles):
        vecs = tuple((math.sin(a) * math.cos(b), math.sin(a) * math.sin(b), math.cos(a)) for a, b in angles)
        state = ProductState(vecs)
        psi = state.amplitudes()
        n = len(vecs)
        for k in range(n):
            for axis, letter in enumerate("XYZ"):
                p = PauliString.single(n, k + 1, letter)
                val = np.vdot(psi, string_matrix(p) @ psi).real
                assert val == pytest.approx(vecs[k][axis], abs=1e-12)


class TestProductExpectation:
    def test_zz_on_zeros(self):
        assert product_expectation(P("X1 Z2 Z3", 3), ProductState.from_bits("00")) == 1.0

    def test_x_on_zero(self):
        assert product_expectation(P("X1", 1), ProductState.from_bits("0")) == 0.0

    def test_z_on_one_bloch(self):
        assert product_expectation(P("Z1", 1), ProductState(((0.0, 0.0, -1.0),))) == -1.0

    def test_bloch_components(self):
        s = ProductState(((0.6, 0.0, 0.8), (0.0, 1.0, 0.0)))
        assert product_expectation(P("X2 Y3", 3), s) == pytest.approx(0.6)
        assert product_expectation(P("Z2", 3), s) == pytest.approx(0.8)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            product_expectation(P("X1", 4), ProductState.from_bits("0"))


class TestInformationFlux:
    def test_xx3_transfer_time(self, t_star_xx3):
        g = build_closure(build_xx_chain(3, [1, 1]), P("X3", 3))
        vec = evolve_exact(generator_matrix(g), t_star_xx3)
        assert information_flux(g, vec, "X", ProductState.zeros(2)) == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("maker", [build_xx_chain, build_heisenberg_chain])
    def test_zero_at_start(self, maker):
        g = build_closure(maker(4, [1, 2, 3]), P("Y4", 4))
        vec = evolve_exact(generator_matrix(g), 0.0)
        for letter in "XYZ":
            assert information_flux(g, vec, letter, ProductState.zeros(3)) == 0.0

    def test_heisenberg3_is_delta_sum(self):
        g = build_closure(build_heisenberg_chain(3, [1, 1]), P("X3", 3))
        evo = ExactEvolution(generator_matrix(g))
        for t in np.linspace(0, 3 * math.pi, 200):
            vec = evo(t)
            flux = information_flux(g, vec, "X", ProductState.zeros(2))
            assert flux == pytest.approx(vec[P("X1", 3)] + vec[P("X1 Z2 Z3", 3)], abs=1e-14)
            assert flux < 1.0

    def test_misaligned_coefficients(self):
        g = build_closure(build_xx_chain(3, [1, 1]), P("X3", 3))
        other = build_closure(build_xx_chain(3, [1, 1]), P("Y3", 3))
        with pytest.raises(ValueError):
            information_flux(g, evolve_exact(generator_matrix(other), 0.1), "X", ProductState.zeros(2))


class TestFluxSeries:
    def test_christandl_touches_one(self):
        j = 0.75
        h = build_xx_chain(5, christandl_couplings(5, j))
        times = np.linspace(0, math.pi / (2 * j), 201)
        assert times[100] == pytest.approx(math.pi / (4 * j))
        s = flux_series(h, 5, "X", "X", ProductState.zeros(4), times)
        assert s.flux[100] == pytest.approx(1.0, abs=1e-9)
        assert int(np.argmax(s.flux)) == 100

    def test_empty_grid(self):
        s = flux_series(build_xx_chain(3, [1, 1]), 3, "X", "X", None, [])
        assert len(s) == 0 and s.to_csv() == "t,flux\n"

    def test_taylor_agrees_with_exact(self):
        h = build_xx_chain(5, christandl_couplings(5))
        times = np.linspace(0, math.pi / 2, 101)
        exact = flux_series(h, 5, "X", "X", None, times)
        taylor = flux_series(h, 5, "X", "X", None, times, method="taylor", cutoff=80)
        np.testing.assert_allclose(taylor.flux, exact.flux, atol=1e-8)

    def test_rejects_decreasing_grid(self):
        with pytest.raises(ValueError):
            flux_series(build_xx_chain(3, [1, 1]), 3, "X", "X", None, [0.2, 0.1])

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            flux_series(build_xx_chain(3, [1, 1]), 3, "X", "X", None, [0.1], method="rk4")

    def test_phase_correction_flips_sign_n3(self, t_star_xx3):
        h = build_xx_chain(3, [1, 1])
        times = np.linspace(0, 2, 30)
        raw = flux_series(h, 3, "Y", "Y", None, times)
        corr = flux_series(h, 3, "Y", "Y", None, times, corrected=True)
        np.testing.assert_allclose(corr.flux, -raw.flux, atol=1e-15)
        assert flux_series(h, 3, "X", "X", None, [t_star_xx3], corrected=True).flux[0] == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 4])
    def test_corrected_flux_matches_gate_oracle(self, n):
        # odd residue of n-1: the correction mixes X and Y on the last site
        h = build_xx_chain(n, christandl_couplings(n))
        t = 0.37
        phase = np.exp(1j * math.pi * (n - 1) / 2)
        r = np.kron(np.eye(2 ** (n - 1)), np.diag([1, phase]))
        from spinflux.oracle import propagator, realize
        u = propagator(realize(h), t)
        m = u.conj().T @ r.conj().T @ string_matrix(PauliString.single(n, n, "X")) @ r @ u
        coeffs = pauli_decompose(m)
        state = ProductState.zeros(n - 1)
        ref = sum(c.real * product_expectation(p, state) for p, c in coeffs.items() if p.letter(1) == "Y")
        got = flux_series(h, n, "X", "Y", state, [t], corrected=True).flux[0]
        assert got == pytest.approx(ref, abs=1e-12)

    def test_z_flux_matches_oracle(self):
        h = build_heisenberg_chain(3, [1.0, 0.7])
        for t in (0.3, 1.1):
            got = flux_series(h, 3, "Z", "Z", None, [t]).flux[0]
            assert got == pytest.approx(flux_via_oracle(h, 3, "Z", "Z", ProductState.zeros(2), t), abs=1e-12)

    def test_z_is_minus_i_xy_at_dense_level(self):
        h = build_heisenberg_chain(3, [1.0, 0.7])
        t = 0.8
        x, y, z = (heisenberg_operator(h, P(f"{c}3", 3), t) for c in "XYZ")
        np.testing.assert_allclose(-1j * x @ y, z, atol=1e-12)

    def test_csv_round_trip(self):
        s = flux_series(build_xx_chain(3, [1, 1]), 3, "X", "X", None, np.linspace(0, 1, 7))
        text = s.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "t,flux"
        back = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        np.testing.assert_array_equal(back[:, 0], s.times)
        np.testing.assert_array_equal(back[:, 1], s.flux)
        assert text == flux_series(build_xx_chain(3, [1, 1]), 3, "X", "X", None, np.linspace(0, 1, 7)).to_csv()

    def test_metadata(self):
        s = flux_series(build_xx_chain(4, [1, 1, 1]), 4, "Y", "X", None, [0.0, 0.5])
        assert isinstance(s, FluxSeries)
        assert (s.input_letter, s.output_letter, s.output_site, s.node_count) == ("X", "Y", 4, 4)


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 6), st.floats(0, 20), st.sampled_from(["xx", "heisenberg"]),
           st.integers(0, 2**32 - 1))
    def test_norm_and_flux_bound(self, n, t, model, seed):
        rng = np.random.default_rng(seed)
        maker = build_xx_chain if model == "xx" else build_heisenberg_chain
        h = maker(n, list(rng.uniform(0.2, 2.0, n - 1)))
        g = build_closure(h, PauliString.single(n, n, "X"))
        vec = evolve_exact(generator_matrix(g), t)
        assert vec.norm_squared() == pytest.approx(1.0, abs=1e-9)
        for letter in "XYZ":
            assert abs(information_flux(g, vec, letter, ProductState.zeros(n - 1))) <= 1 + 1e-9

    @settings(max_examples=15, deadline=None)
    @given(st.integers(3, 5), st.integers(0, 2**32 - 1))
    def test_product_flux_matches_oracle(self, n, seed):
        rng = np.random.default_rng(seed)
        h = build_xx_chain(n, list(rng.uniform(0.2, 2.0, n - 1)))
        raw = rng.normal(size=(n - 1, 3))
        state = ProductState(tuple(tuple(v / np.linalg.norm(v)) for v in raw))
        t = float(rng.uniform(0, 3))
        letter, inp = rng.choice(list("XYZ"), size=2)
        got = flux_series(h, n, str(letter), str(inp), state, [t]).flux[0]
        assert got == pytest.approx(flux_via_oracle(h, n, str(letter), str(inp), state, t), abs=1e-9)
