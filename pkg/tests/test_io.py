import json

import numpy as np
import pytest

from wwlab.instances import make_circle, make_sphere_mesh
from wwlab.io import (load_lattice, load_operator, load_space, load_spectrum, save_lattice, save_operator,
                      save_space, save_spectrum, space_from_dict)
from wwlab.lattice import build_lattice
from wwlab.mms import ValidationError
from wwlab.spectral import decompose


def test_space_roundtrip_matrix(tmp_path):
    s = make_circle(30).space
    back = load_space(save_space(s, tmp_path / "s.json"))
    np.testing.assert_allclose(back.dense(), s.dense())
    np.testing.assert_allclose(back.measure, s.measure)


def test_space_roundtrip_coordinates(tmp_path):
    s = make_sphere_mesh(60, seed=1).space
    back = load_space(save_space(s, tmp_path / "s.json", use_coordinates=True))
    assert back.metric == "sphere_geodesic"
    np.testing.assert_allclose(back.dense(), s.dense(), atol=1e-12)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.json"):
        load_space(tmp_path / "nope.json")


@pytest.mark.parametrize("doc, msg", [
    ({"distance_matrix": [1.0]}, "measure"),
    ({"measure": [1, 0], "distance_matrix": [1.0]}, r"measure\[1\]"),
    ({"measure": [1, 1, 1], "distance_matrix": [1.0]}, "lower triangle"),
    ({"measure": [1, 1], "coordinates": [[0], [1]], "metric": "taxicab"}, "metric"),
    ({"measure": [1, 1]}, "exactly one"),
    ({"measure": [1, 1, 1], "distance_matrix": [1.0, 5.0, 1.0]}, "triangle"),
])
def test_malformed_space(doc, msg):
    with pytest.raises(ValidationError, match=msg):
        space_from_dict(doc, where="case", triples=20_000)


def test_bad_json_reports_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ValidationError, match="bad.json"):
        load_space(p)


def test_operator_roundtrip_preserves_spectrum(tmp_path):
    inst = make_circle(40)
    sp_path = save_space(inst.space, tmp_path / "space.json")
    op = load_operator(save_operator(inst.operator, tmp_path / "op.json", sp_path))
    np.testing.assert_allclose(decompose(op).eigenvalues, decompose(inst.operator).eigenvalues, atol=1e-9)
    assert json.loads((tmp_path / "op.json").read_text())["space"] == "space.json"


def test_operator_index_out_of_range(tmp_path):
    inst = make_circle(10)
    save_space(inst.space, tmp_path / "space.json")
    (tmp_path / "op.json").write_text(json.dumps({"space": "space.json", "edges": [[0, 10, 1.0]]}))
    with pytest.raises(ValidationError, match="out of range"):
        load_operator(tmp_path / "op.json")


def test_lattice_and_spectrum_cache(tmp_path):
    inst = make_circle(50)
    lat = build_lattice(inst.space, 0.3, "farthest_point")
    back = load_lattice(save_lattice(lat, tmp_path / "lat.json"))
    assert back.centers.tolist() == lat.centers.tolist() and back.order == "farthest_point"
    assert load_spectrum(tmp_path, inst.operator) is None
    dec = decompose(inst.operator)
    save_spectrum(dec, tmp_path, inst.operator)
    cached = load_spectrum(tmp_path, inst.operator)
    np.testing.assert_array_equal(cached.eigenvalues, dec.eigenvalues)
    np.testing.assert_array_equal(cached.eigenvectors, dec.eigenvectors)
