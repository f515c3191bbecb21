import numpy as np
import pytest

from beam.timoshenko import BeamModel, beam_conditions
from dirac.errors import DocumentError, ValidationError
from dirac.propagator import Propagator
from documents.system_document import SystemDocumentCodec


@pytest.fixture
def codec(fixtures_dir):
    return SystemDocumentCodec(fixtures_dir)


def test_list_documents(codec):
    names = codec.list_documents()
    for name in ("periodic.json", "dirichlet.json", "reflection.json", "ln3_beam.json"):
        assert name in names


def test_periodic_fixture_matches_builtin(codec, periodic):
    bvp = codec.load("periodic.json")
    assert np.allclose(bvp.b, periodic.b)
    assert np.allclose(bvp.C, periodic.C)
    assert np.allclose(bvp.D, periodic.D)
    lam = 1.3 + 0.2j
    assert Propagator(bvp).char_determinant(lam) == pytest.approx(2.0 - 2.0 * np.cos(lam))


def test_grid_potential_fixture(codec):
    bvp = codec.load("reflection.json")
    assert bvp.potential.kind == 'grid'
    assert bvp.potential.samples.shape == (13, 2, 2)
    assert bvp.potential.samples[6, 0, 1] == pytest.approx(1.0)


def test_beam_fixture_broadcasts_scalar_profiles(codec):
    beam = codec.load("ln3_beam.json")
    assert isinstance(beam, BeamModel)
    assert len(beam.rho) == 257
    assert np.all(beam.I_rho == 4.0)
    assert beam_conditions(beam).det_T_B == pytest.approx(75.0 / 8.0)


def test_syntax_error_reports_line(codec):
    with pytest.raises(DocumentError) as info:
        codec.parse('{\n  "B": [1, -1],\n  "C": [[1, 0]\n}')
    assert info.value.line == 4
    assert "line 4" in str(info.value)


@pytest.mark.parametrize("text, field", [
    ('{"B": [1, -1], "D": [[1, 0], [0, 1]]}', 'C'),
    ('{"B": [1, -1], "C": [[1, 0]], "D": [[1, 0], [0, 1]]}', 'C'),
    ('{"B": [1, {"re": 1, "imag": 0}], "C": [[1, 0], [0, 1]], "D": [[1, 0], [0, 1]]}', 'B[1]'),
    ('{"B": [1, -1], "C": [[1, 0], [0, 1]], "D": [[1, 0], [0, 1]], "Q": {"kind": "spline"}}', 'Q.kind'),
    ('{"kind": "plate"}', 'kind'),
])
def test_malformed_documents_name_the_field(codec, text, field):
    with pytest.raises(DocumentError) as info:
        codec.parse(text)
    assert info.value.field == field


def test_invalid_system_is_a_validation_error(codec):
    text = '{"B": [1, 0], "C": [[1, 0], [0, 1]], "D": [[1, 0], [0, 1]]}'
    with pytest.raises(ValidationError) as info:
        codec.parse(text)
    assert info.value.field == 'weight'


def test_non_object_document(codec):
    with pytest.raises(DocumentError):
        codec.parse('[1, 2, 3]')


def test_missing_file(codec):
    with pytest.raises(DocumentError):
        codec.load("does_not_exist.json")


def test_system_round_trip(codec, reflection, tmp_path):
    path = codec.save(reflection, str(tmp_path / "reflection_copy.json"))
    loaded = codec.load(path)
    assert np.allclose(loaded.b, reflection.b)
    assert np.allclose(loaded.C, reflection.C)
    assert np.allclose(loaded.D, reflection.D)
    assert np.allclose(loaded.potential.samples, reflection.potential.samples)
    lam = 2.0 + 0.5j
    assert Propagator(loaded).char_determinant(lam) == pytest.approx(Propagator(reflection).char_determinant(lam))


def test_beam_round_trip(codec, ln3_beam, tmp_path):
    path = codec.save(ln3_beam, str(tmp_path / "beam.json"))
    loaded = codec.load(path)
    assert isinstance(loaded, BeamModel)
    assert np.allclose(loaded.EI, ln3_beam.EI)
    assert loaded.alpha2 == pytest.approx(13.0 / 12.0)


@pytest.mark.parametrize("text, field", [
    ('{"kind": "timoshenko_beam", "length": 1, "rho": 1, "I_rho": 1, "K": 1, "EI": 1, "points": 2}', 'points'),
    ('{"kind": "timoshenko_beam", "length": 1, "rho": [1, 1, 1], "I_rho": [1, 1, 1, 1], "K": 1, "EI": 1}',
     'profiles'),
    ('{"kind": "timoshenko_beam", "length": 1, "rho": 1, "I_rho": 1, "K": 1}', 'EI'),
    ('{"kind": "timoshenko_beam", "length": "one", "rho": 1, "I_rho": 1, "K": 1, "EI": 1}', 'length'),
])
def test_malformed_beam_documents(codec, text, field):
    with pytest.raises(DocumentError) as info:
        codec.parse(text)
    assert info.value.field == field
