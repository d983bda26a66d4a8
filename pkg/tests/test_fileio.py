import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasidist import (
    ChiField,
    DistributionField,
    InputError,
    MomentumState,
    PositionState,
    UniformGrid,
    coherent_state,
    compute_distribution,
    density_from_pure,
    load_density,
    load_field,
    load_json,
    load_state,
    oscillator_eigenstate,
    render_json,
    save_density,
    save_field,
    save_state,
    to_momentum,
    write_json,
)
from quasidist.fileio import format_float

GRID = UniformGrid(64, -8.0, 0.25)


class TestFloatFormatting:
    @pytest.mark.parametrize("x", [0.0, 1.0, -1.5, math.pi, 1e-300, 1.7976931348623157e308])
    def test_seventeen_digits_round_trip(self, x):
        assert float(format_float(x)) == x

    @given(st.floats(allow_nan=False, allow_infinity=False))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_everywhere(self, x):
        assert float(format_float(x)) == x

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(InputError):
            format_float(bad)


class TestJsonRendering:
    def test_keys_are_sorted(self):
        text = render_json({"zebra": 1, "apple": 2, "mango": {"b": 1, "a": 2}})
        assert text.index('"apple"') < text.index('"mango"') < text.index('"zebra"')
        assert text.index('"a"') < text.index('"b"')

    def test_parses_back(self):
        import json
        obj = {"x": [1, 2.5, None, True, "abc\n\"q\""], "y": {"z": -0.125}}
        assert json.loads(render_json(obj)) == obj

    def test_rendering_is_stable(self):
        obj = {"values": [math.pi, 1e-17], "label": "run"}
        assert render_json(obj) == render_json(obj)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            render_json({"x": float("nan")})

    def test_unserializable_rejected(self):
        with pytest.raises(InputError):
            render_json({"x": object()})

    def test_write_and_load(self, tmp_path):
        path = tmp_path / "obj.json"
        write_json(path, {"a": [1, 2], "b": "text"})
        assert load_json(path) == {"a": [1, 2], "b": "text"}


class TestStateRoundTrip:
    def test_position_state_bits(self, tmp_path):
        psi = coherent_state(0.5, 1.0, GRID)
        path = tmp_path / "psi.csv"
        save_state(path, psi)
        back = load_state(path)
        assert isinstance(back, PositionState)
        assert back.grid == psi.grid
        assert np.array_equal(back.values, psi.values)

    def test_momentum_state_bits(self, tmp_path):
        phi = to_momentum(coherent_state(0.5, 0.0, GRID), GRID)
        path = tmp_path / "phi.csv"
        save_state(path, phi)
        back = load_state(path)
        assert isinstance(back, MomentumState)
        assert np.array_equal(back.values, phi.values)

    def test_repeated_saves_are_identical(self, tmp_path):
        psi = oscillator_eigenstate(1, GRID)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        save_state(a, psi)
        save_state(b, psi)
        assert a.read_bytes() == b.read_bytes()

    def test_hbar_override(self, tmp_path):
        psi = oscillator_eigenstate(0, GRID, hbar=0.5)
        path = tmp_path / "h.csv"
        save_state(path, psi)
        back = load_state(path, hbar=0.5)
        assert back.hbar == 0.5

    def test_header_decides_the_kind(self, tmp_path):
        path = tmp_path / "s.csv"
        save_state(path, oscillator_eigenstate(0, GRID))
        text = path.read_text()
        assert text.splitlines()[0] == "q,re,im"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,re,im\n0.0,1.0,0.0\n")
        with pytest.raises(InputError, match="header"):
            load_state(path)

    def test_bad_number_rejected_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = ["q,re,im"] + [f"{i * 0.25 - 8.0},1.0,0.0" for i in range(64)]
        rows[3] = "-7.5,potato,0.0"
        path.write_text("\n".join(rows) + "\n")
        with pytest.raises(InputError, match="line 4"):
            load_state(path)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("q,re,im\n0.0,1.0\n")
        with pytest.raises(InputError):
            load_state(path)

    def test_non_uniform_spacing_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = ["q,re,im"] + [f"{i * 0.25},1.0,0.0" for i in range(20)]
        rows[10] = "2.37,1.0,0.0"
        path.write_text("\n".join(rows) + "\n")
        with pytest.raises(InputError, match="uniform"):
            load_state(path)


class TestDensityRoundTrip:
    def test_bits_and_sidecar(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(1, GRID))
        path = tmp_path / "rho.csv"
        save_density(path, rho)
        assert (tmp_path / "rho.json").exists()
        back = load_density(path)
        assert back.grid == rho.grid
        assert np.array_equal(back.entries, rho.entries)

    def test_missing_sidecar_rejected(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        path = tmp_path / "rho.csv"
        save_density(path, rho)
        (tmp_path / "rho.json").unlink()
        with pytest.raises(InputError):
            load_density(path)

    def test_missing_row_rejected(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        path = tmp_path / "rho.csv"
        save_density(path, rho)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(InputError):
            load_density(path)

    def test_duplicate_row_rejected(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        path = tmp_path / "rho.csv"
        save_density(path, rho)
        lines = path.read_text().splitlines()
        lines[-1] = lines[-2]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(InputError):
            load_density(path)


class TestFieldRoundTrip:
    def test_distribution_field_bits(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        field = compute_distribution(rho, -0.5, GRID)
        path = tmp_path / "field.csv"
        save_field(path, field)
        back = load_field(path)
        assert isinstance(back, DistributionField)
        assert back.alpha == -0.5
        assert back.qgrid == field.qgrid and back.pgrid == field.pgrid
        assert np.array_equal(back.values, field.values)

    def test_chi_field_bits(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        base = compute_distribution(rho, 0.0, GRID)
        chi = ChiField(base.qgrid, base.pgrid, base.values, time=0.75)
        path = tmp_path / "chi.csv"
        save_field(path, chi)
        back = load_field(path)
        assert isinstance(back, ChiField)
        assert back.time == 0.75
        assert np.array_equal(back.values, chi.values)

    def test_config_echo_survives(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        field = compute_distribution(rho, -0.5, GRID)
        path = tmp_path / "field.csv"
        save_field(path, field, config={"alpha": -0.5, "out": "x"})
        sidecar = load_json(tmp_path / "field.json")
        assert sidecar["config"] == {"alpha": -0.5, "out": "x"}

    def test_sidecar_without_kind_tag_rejected(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        field = compute_distribution(rho, -0.5, GRID)
        path = tmp_path / "field.csv"
        save_field(path, field)
        sidecar = load_json(tmp_path / "field.json")
        del sidecar["alpha"]
        write_json(tmp_path / "field.json", sidecar)
        with pytest.raises(InputError):
            load_field(path)

    def test_coordinate_mismatch_rejected(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        field = compute_distribution(rho, -0.5, GRID)
        path = tmp_path / "field.csv"
        save_field(path, field)
        sidecar = load_json(tmp_path / "field.json")
        sidecar["qgrid"]["minimum"] = -7.0
        write_json(tmp_path / "field.json", sidecar)
        with pytest.raises(InputError, match="coordinate"):
            load_field(path)

    def test_repeated_saves_are_identical(self, tmp_path):
        rho = density_from_pure(oscillator_eigenstate(0, GRID))
        field = compute_distribution(rho, 0.5, GRID)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        save_field(a, field)
        save_field(b, field)
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()
