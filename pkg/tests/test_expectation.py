import numpy as np
import pytest

from quasidist import (
    InputError,
    InvariantError,
    PositionState,
    UniformGrid,
    alpha_symbol,
    coherent_state,
    compute_distribution,
    density_from_pure,
    expect_hilbert,
    expect_phase_space,
    expectation_report,
    oscillator_eigenstate,
    parse_operator,
    render_json,
)

GRID = UniformGrid(128, -8.0, 0.125)


@pytest.fixture(scope="module")
def rho_ground():
    return density_from_pure(oscillator_eigenstate(0, GRID))


@pytest.fixture(scope="module")
def rho_coherent():
    return density_from_pure(coherent_state(1.0, 2.0, GRID))


class TestHilbertSide:
    @pytest.mark.parametrize("text,want", [
        ("q^2", 0.5),
        ("p^2", 0.5),
        ("q^4", 0.75),
        ("q p", 0.5j),
        ("p q", -0.5j),
    ])
    def test_ground_state_moments(self, rho_ground, text, want):
        got = expect_hilbert(rho_ground, parse_operator(text))
        assert abs(got - want) < 1e-12

    @pytest.mark.parametrize("text,want", [
        ("q", 1.0),
        ("p", 2.0),
        ("q^2", 1.5),
        ("p^2", 4.5),
        ("q p", 2.0 + 0.5j),
    ])
    def test_coherent_state_moments(self, rho_coherent, text, want):
        got = expect_hilbert(rho_coherent, parse_operator(text))
        assert abs(got - want) < 1e-12

    def test_hermitian_operator_gives_real_value(self, rho_coherent):
        sym_op = parse_operator("q p + p q")
        got = expect_hilbert(rho_coherent, sym_op)
        assert abs(got.imag) < 1e-12
        assert got.real == pytest.approx(4.0, abs=1e-12)

    def test_under_resolved_state_rejected(self):
        rng = np.random.default_rng(7)
        noisy = PositionState(GRID, rng.normal(size=GRID.count) + 0.1)
        with pytest.raises(InvariantError, match="band edge"):
            expect_hilbert(density_from_pure(noisy), parse_operator("p^2"))

    def test_hbar_mismatch_rejected(self, rho_ground):
        with pytest.raises(InputError):
            expect_hilbert(rho_ground, parse_operator("q", hbar=2.0))


class TestPhaseSpacePairing:
    def test_conjugate_pairing_flips_the_field(self, rho_coherent):
        field = compute_distribution(rho_coherent, 0.0, GRID)
        sym = alpha_symbol(parse_operator("q p"), 0.0)
        plain = expect_phase_space(field, sym, pairing="plain")
        conj = expect_phase_space(field, sym, pairing="conjugate")
        assert plain == pytest.approx(conj.conjugate(), abs=1e-10)

    def test_unknown_pairing_rejected(self, rho_coherent):
        field = compute_distribution(rho_coherent, 0.0, GRID)
        sym = alpha_symbol(parse_operator("q"), 0.0)
        with pytest.raises(InputError, match="pairing"):
            expect_phase_space(field, sym, pairing="sideways")

    def test_hbar_mismatch_rejected(self, rho_coherent):
        field = compute_distribution(rho_coherent, 0.0, GRID)
        sym = alpha_symbol(parse_operator("q", hbar=2.0), 0.0)
        with pytest.raises(InputError):
            expect_phase_space(field, sym)

    @pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.0])
    def test_first_moments_pair_at_every_alpha(self, rho_coherent, alpha):
        """Linear symbols see only the marginals, which are alpha-blind."""
        # fractional alpha interpolates between samples, costing ~1e-5 here
        field = compute_distribution(rho_coherent, alpha, GRID)
        for text, want in [("q", 1.0), ("p", 2.0)]:
            sym = alpha_symbol(parse_operator(text), alpha)
            got = expect_phase_space(field, sym, pairing="plain")
            assert abs(got - want) < 1e-4


class TestCertification:
    def test_mixed_monomial_at_standard_order(self, rho_coherent):
        """plain disagrees away from the self-dual point; the others hold."""
        rep = expectation_report(rho_coherent, parse_operator("q p"), 0.0, GRID)
        assert rep.certified == ("conjugate", "dual")
        assert rep.discrepancies["plain"] == pytest.approx(1.0, abs=1e-6)
        assert rep.discrepancies["conjugate"] < 1e-8
        assert rep.discrepancies["dual"] < 1e-8

    def test_mixed_monomial_at_symmetric_point(self, rho_coherent):
        rep = expectation_report(rho_coherent, parse_operator("q p"), -0.5, GRID)
        assert rep.certified == ("plain", "conjugate", "dual")

    def test_mixed_monomial_at_antistandard_order(self, rho_coherent):
        rep = expectation_report(rho_coherent, parse_operator("q p"), -1.0, GRID)
        assert rep.certified == ("conjugate", "dual")

    def test_pure_powers_certify_everywhere(self, rho_coherent):
        for alpha in [-1.0, -0.5, 0.0]:
            rep = expectation_report(rho_coherent, parse_operator("q^2"), alpha, GRID)
            assert rep.certified == ("plain", "conjugate", "dual")

    def test_hilbert_value_recorded(self, rho_coherent):
        rep = expectation_report(rho_coherent, parse_operator("q p"), -0.5, GRID)
        assert abs(rep.hilbert - (2.0 + 0.5j)) < 1e-10

    def test_tolerance_scales_with_magnitude(self, rho_coherent):
        # a large reference value relaxes the absolute gate proportionally
        rep = expectation_report(rho_coherent, parse_operator("100 q"), -0.5, GRID)
        assert "plain" in rep.certified


class TestReportSerialization:
    def test_json_dict_shape(self, rho_coherent):
        rep = expectation_report(rho_coherent, parse_operator("q p"), -0.5, GRID)
        d = rep.to_json_dict()
        assert sorted(d.keys()) == [
            "alpha", "certified", "hbar", "hilbert", "operator",
            "pairings", "tolerance"]
        for name in ("plain", "conjugate", "dual"):
            entry = d["pairings"][name]
            assert set(entry.keys()) == {"re", "im", "abs_error"}
        assert d["operator"] == "q p"

    def test_rendered_report_is_deterministic(self, rho_coherent):
        op = parse_operator("q p")
        a = render_json(expectation_report(rho_coherent, op, -0.5, GRID).to_json_dict())
        b = render_json(expectation_report(rho_coherent, op, -0.5, GRID).to_json_dict())
        assert a == b
