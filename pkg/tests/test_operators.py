import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasidist import (
    InputError,
    OperatorExpr,
    PhaseSpaceSymbol,
    alpha_quantize,
    alpha_symbol,
    matrix_representation,
    multiply,
    parse_operator,
    parse_symbol,
)
from quasidist.operators import HbarPoly

import oracles

ALPHAS = [-1.0, -0.5, 0.0, 0.5]
POINTS = [(0.7, -1.3), (-2.1, 0.4), (1.9, 2.3)]


def _sym_value(sym, q, p):
    return complex(sym.evaluate(np.array([q]), np.array([p]))[0, 0])


class TestOrderingRule:
    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_symbol_matches_banded_kernel_oracle(self, m, n, alpha):
        """Closed-form symbol agrees with the grid-kernel transform."""
        op = parse_operator(f"q^{m} p^{n}")
        sym = alpha_symbol(op, alpha)
        for q, p in POINTS:
            want = oracles.fd_kernel_symbol(m, n, alpha, q, p)
            got = _sym_value(sym, q, p)
            assert abs(got - want) <= 1e-6 * max(1.0, abs(want))

    @pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (2, 2), (0, 3)])
    def test_kernel_oracles_agree_with_each_other(self, m, n):
        """The banded and mollified kernels are independent routes to one number."""
        q, p = 0.9, -1.1
        a = oracles.fd_kernel_symbol(m, n, 0.25, q, p)
        b = oracles.mollified_symbol(m, n, 0.25, q, p)
        assert abs(a - b) <= 1e-5 * max(1.0, abs(a))

    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_symmetric_point_is_weyl(self, m, n):
        sym = alpha_symbol(parse_operator(f"q^{m} p^{n}"), -0.5)
        for q, p in POINTS:
            want = oracles.weyl_symbol_value(parse_operator(f"q^{m} p^{n}"), q, p)
            np.testing.assert_allclose(_sym_value(sym, q, p), want, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_alpha_zero_is_standard_order(self, m, n):
        """At alpha = 0 the symbol of q^m p^n is exactly p^n q^m."""
        sym = alpha_symbol(parse_operator(f"q^{m} p^{n}"), 0.0)
        expected = PhaseSpaceSymbol.monomial(1.0, m, n)
        assert sym.close_to(expected)

    def test_antistandard_point(self):
        sym = alpha_symbol(parse_operator("q p"), -1.0)
        assert str(sym) == "p q + i hbar"

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_symbol_is_linear(self, alpha):
        a = parse_operator("q^2 p")
        b = parse_operator("p^3")
        combo = parse_operator("2 q^2 p - 0.5 p^3")
        lhs = alpha_symbol(combo, alpha)
        for q, p in POINTS:
            want = (2.0 * _sym_value(alpha_symbol(a, alpha), q, p)
                    - 0.5 * _sym_value(alpha_symbol(b, alpha), q, p))
            np.testing.assert_allclose(_sym_value(lhs, q, p), want, atol=1e-12)

    def test_nonunit_hbar_scales_correction(self):
        op = parse_operator("q p", hbar=0.7)
        sym = alpha_symbol(op, -0.5)
        got = _sym_value(sym, 2.0, 3.0)
        want = oracles.fd_kernel_symbol(1, 1, -0.5, 2.0, 3.0, hbar=0.7)
        assert abs(got - want) <= 1e-8 * abs(want)


class TestGoldenRenderings:
    def test_weyl_of_qp(self):
        assert str(alpha_symbol(parse_operator("q p"), -0.5)) == "p q + 0.5 i hbar"

    def test_weyl_of_q2p2(self):
        sym = alpha_symbol(parse_operator("q^2 p^2"), -0.5)
        assert str(sym) == "p^2 q^2 + 2 i hbar p q - 0.5 hbar^2"

    def test_quantize_pq_at_symmetric_point(self):
        op = alpha_quantize(parse_symbol("p q"), -0.5)
        assert str(op) == "q p - 0.5 i hbar"

    def test_reorder_pq(self):
        prod = multiply(OperatorExpr.momentum(), OperatorExpr.position())
        assert str(prod) == "q p - i hbar"


class TestRoundTrip:
    @pytest.mark.parametrize("alpha", [-1.0, -0.5, -0.25, 0.0, 0.5, 1.0])
    @pytest.mark.parametrize("text", ["q", "p", "q p", "q^2 p^2", "q^3 p^3",
                                      "2 q^2 - p + 3", "q^4 p^2 - 0.5 q p^5"])
    def test_quantize_inverts_symbol(self, text, alpha):
        op = parse_operator(text)
        back = alpha_quantize(alpha_symbol(op, alpha), alpha)
        assert back.close_to(op, tol=1e-12)

    @pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.0, 0.5])
    def test_symbol_inverts_quantize(self, alpha):
        sym = parse_symbol("p^2 q + 3 q^2 - p")
        back = alpha_symbol(alpha_quantize(sym, alpha), alpha)
        assert back.close_to(sym, tol=1e-12)

    @given(
        alpha=st.floats(min_value=-2.0, max_value=1.0),
        mq=st.integers(min_value=0, max_value=3),
        mp=st.integers(min_value=0, max_value=3),
        c=st.floats(min_value=-5.0, max_value=5.0).filter(lambda x: abs(x) > 1e-3),
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip_random_monomials(self, alpha, mq, mp, c):
        op = OperatorExpr.monomial(c, mq, mp)
        back = alpha_quantize(alpha_symbol(op, alpha), alpha)
        assert back.close_to(op, tol=1e-10)


class TestMultiplication:
    @pytest.mark.parametrize("left,right", [
        ("p", "q"), ("p^2", "q"), ("p", "q^2"), ("p^2", "q^2"),
        ("p^3", "q^2"), ("q p", "q p"), ("q^2 p", "p q"),
    ])
    def test_product_matches_elementary_commutation(self, left, right):
        """multiply() agrees with pushing factors one exchange at a time."""
        a, b = parse_operator(left), parse_operator(right)
        got = oracles.operator_to_dict(multiply(a, b))
        want = oracles.normal_order_product(
            oracles.operator_to_dict(a), oracles.operator_to_dict(b))
        assert set(got) == set(want)
        for key in want:
            np.testing.assert_allclose(got[key], want[key], atol=1e-12)

    def test_canonical_commutator(self):
        """[q, p] reduces to i hbar times the identity."""
        q, p = OperatorExpr.position(), OperatorExpr.momentum()
        comm = multiply(q, p) + multiply(p, q) * (-1.0)
        assert len(comm.terms) == 1
        assert comm.terms[0].qpow == 0 and comm.terms[0].ppow == 0
        assert comm.coefficient(0, 0).parts.get(1) == pytest.approx(1j)
        assert str(comm) == "i hbar"

    def test_mismatched_hbar_rejected(self):
        a = parse_operator("q", hbar=1.0)
        b = parse_operator("p", hbar=2.0)
        with pytest.raises(InputError):
            multiply(a, b)

    @pytest.mark.parametrize("left,right", [("q p", "p^2 q"), ("q^2", "p^3")])
    def test_product_matches_matrix_product(self, left, right):
        """Operator algebra is consistent with truncated matrix algebra."""
        a, b = parse_operator(left), parse_operator(right)
        n = 24
        ma = matrix_representation(a, n)
        mb = matrix_representation(b, n)
        mprod = matrix_representation(multiply(a, b), n)
        # the top-left block is unaffected by basis truncation
        keep = n - 8
        direct = (ma @ mb)[:keep, :keep]
        scale = max(np.abs(direct).max(), 1.0)
        np.testing.assert_allclose(mprod[:keep, :keep], direct, atol=1e-10 * scale)


class TestMatrixRepresentation:
    @pytest.mark.parametrize("text", ["q", "p", "q^2 + p^2"])
    def test_hermitian_inputs_give_hermitian_matrices(self, text):
        m = matrix_representation(parse_operator(text), 16)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)

    def test_commutator_on_interior_block(self):
        n = 20
        q = matrix_representation(OperatorExpr.position(), n)
        p = matrix_representation(OperatorExpr.momentum(), n)
        comm = q @ p - p @ q
        inner = comm[: n - 2, : n - 2]
        np.testing.assert_allclose(inner, 1j * np.eye(n - 2), atol=1e-12)

    def test_basis_size_validation(self):
        with pytest.raises(InputError):
            matrix_representation(parse_operator("q"), 0)


class TestConstruction:
    def test_negative_powers_rejected(self):
        with pytest.raises(InputError):
            OperatorExpr.monomial(1.0, -1, 0)

    def test_like_terms_merge(self):
        op = parse_operator("q p + q p")
        assert len(op.terms) == 1
        assert op.coefficient(1, 1).evaluate(1.0) == pytest.approx(2.0)

    def test_degree(self):
        assert parse_operator("q^2 p^3 + q").degree == 5

    def test_symbol_evaluate_grid_shape(self):
        sym = parse_symbol("p q")
        out = sym.evaluate(np.linspace(-1, 1, 5), np.linspace(-2, 2, 7))
        assert out.shape == (5, 7)
        np.testing.assert_allclose(out[2, 3], 0.0, atol=1e-15)

    def test_symbol_requires_operator_input(self):
        with pytest.raises(InputError):
            alpha_symbol(parse_symbol("q"), 0.0)
        with pytest.raises(InputError):
            alpha_quantize(parse_operator("q"), 0.0)
