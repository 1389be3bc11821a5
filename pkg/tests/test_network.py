import json

import numpy as np
import pytest

from darkmode_lab.errors import DimensionMismatch, InvalidSpec, ParseError
from darkmode_lab.network import (NetworkSpec, build_coefficient_matrix, dumps_spec,
                                  load_spec, loads_spec, nonzero_pattern, save_spec,
                                  spec_from_dict, spec_to_dict, validate_spec)


def one_by_two(eta12=0.09, g=(0.1, 0.1)):
    return NetworkSpec.create(delta=[1.0], omega=[1.0, 1.0], g=[list(g)],
                              eta=[[0, eta12], [eta12, 0]], kappa=0.1, gamma=1e-5, nbar=1e3)


class TestValidation:
    def test_valid_spec_has_no_violations(self):
        assert not validate_spec(one_by_two())

    def test_non_hermitian_xi_is_reported_with_index(self):
        spec = NetworkSpec.create(delta=[1, 1], omega=[1], g=[[0.1], [0.1]],
                                  xi=[[0, 0.2], [0.3, 0]])
        msgs = validate_spec(spec).messages()
        assert msgs == ["xi not Hermitian at (1,2)"]

    def test_negative_decay_rate(self):
        spec = one_by_two().replace(kappa=np.array([-0.1]))
        assert validate_spec(spec).messages() == ["negative decay rate kappa at (1)"]

    def test_negative_occupation(self):
        spec = one_by_two().replace(nbar=np.array([1.0, -2.0]))
        assert validate_spec(spec).messages() == ["negative thermal occupation nbar at (2)"]

    def test_nonzero_diagonal_hopping(self):
        spec = one_by_two().replace(eta=np.array([[0.5, 0.09], [0.09, 0]]))
        assert any("diagonal" in m for m in validate_spec(spec).messages())

    def test_shape_mismatch(self):
        spec = one_by_two().replace(omega=np.array([1.0, 1.0, 1.0]))
        assert any("omega has shape" in m for m in validate_spec(spec).messages())

    def test_all_violations_collected(self):
        spec = one_by_two().replace(kappa=np.array([-1.0]), gamma=np.array([-1.0, -1.0]))
        assert len(validate_spec(spec)) == 3

    def test_nonfinite(self):
        spec = one_by_two().replace(delta=np.array([np.nan]))
        assert any("non-finite" in m for m in validate_spec(spec).messages())

    def test_omega_ref_positive(self):
        spec = one_by_two().replace(omega_ref=0.0)
        assert any("omega_ref" in m for m in validate_spec(spec).messages())

    def test_build_raises_on_invalid(self):
        spec = one_by_two().replace(kappa=np.array([-0.1]))
        with pytest.raises(InvalidSpec) as exc:
            build_coefficient_matrix(spec)
        assert len(exc.value.violations) == 1


class TestCoefficientMatrix:
    def test_one_by_two_explicit(self):
        H = build_coefficient_matrix(one_by_two()).H
        expected = np.array([[1, 0.1, 0.1], [0.1, 1, 0.09], [0.1, 0.09, 1]])
        np.testing.assert_array_equal(H, expected)

    def test_hermitian_and_blocks(self, rng):
        g = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        xi = np.array([[0, 0.1 + 0.2j], [0.1 - 0.2j, 0]])
        spec = NetworkSpec.create(delta=[1, 2], omega=[3, 4, 5], g=g, xi=xi)
        cm = build_coefficient_matrix(spec)
        np.testing.assert_array_equal(cm.H, cm.H.conj().T)
        np.testing.assert_array_equal(cm.C_ab, g)
        np.testing.assert_array_equal(cm.H_a, np.diag([1, 2]) + xi)
        np.testing.assert_array_equal(np.diag(cm.H_b), [3, 4, 5])

    def test_zero_couplings_give_zero_block(self):
        spec = NetworkSpec.create(delta=[1], omega=[1, 2], g=[[0, 0]])
        assert nonzero_pattern(build_coefficient_matrix(spec).C_ab) == set()

    def test_matrix_is_read_only(self):
        H = build_coefficient_matrix(one_by_two()).H
        with pytest.raises(ValueError):
            H[0, 0] = 2.0

    def test_spec_arrays_are_read_only(self):
        spec = one_by_two()
        with pytest.raises(ValueError):
            spec.g[0, 0] = 1.0


class TestJson:
    def test_round_trip_is_exact(self, rng, tmp_path):
        g = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        spec = NetworkSpec.create(delta=rng.normal(size=2), omega=rng.normal(size=3), g=g,
                                  kappa=[0.1, 0.2], gamma=1e-5, nbar=1e3, omega_ref=2.5)
        path = tmp_path / "s.json"
        save_spec(spec, path)
        assert load_spec(path) == spec
        assert loads_spec(dumps_spec(spec)) == spec

    def test_missing_field_named(self):
        d = spec_to_dict(one_by_two())
        del d["gamma"]
        with pytest.raises(ParseError) as exc:
            spec_from_dict(d)
        assert exc.value.field == "gamma"

    def test_unknown_field_rejected(self):
        d = spec_to_dict(one_by_two())
        d["extra"] = 1
        with pytest.raises(ParseError) as exc:
            spec_from_dict(d)
        assert exc.value.field == "extra"

    def test_dimension_mismatch(self):
        d = spec_to_dict(one_by_two())
        d["omega"] = [1.0]
        with pytest.raises(DimensionMismatch) as exc:
            spec_from_dict(d)
        assert exc.value.field == "omega"

    def test_bad_json_has_line(self):
        with pytest.raises(ParseError) as exc:
            loads_spec('{\n"M": 1,\n oops}')
        assert exc.value.line == 3

    def test_real_numbers_accepted_for_complex_fields(self):
        d = spec_to_dict(one_by_two())
        d["g"] = [[0.1, 0.2]]
        assert spec_from_dict(d).g[0, 1] == 0.2

    def test_stable_key_order(self):
        text = dumps_spec(one_by_two())
        assert list(json.loads(text)) == ["M", "N", "omega_ref", "delta", "omega", "xi",
                                          "eta", "g", "kappa", "gamma", "nbar"]
