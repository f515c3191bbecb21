"""
System Documents

JSON codec for boundary value problems and beam models. Complex scalars are
written as {"re", "im"}; plain numbers are accepted on input. Malformed
documents raise DocumentError with the field path and, for syntax errors,
the line number.
"""

import json
import logging
import os
from typing import Any, Dict, List, Union
import numpy as np

from beam.timoshenko import PROFILE_NAMES, BeamModel
from dirac.errors import DocumentError
from dirac.models import BoundaryPair, DiracBVP, PotentialField, WeightMatrix
from dirac.system_model import validate_bvp
from utils.helpers import decode_complex, dump_json, ensure_directory_exists

SYSTEM_KIND = 'dirac_system'
BEAM_KIND = 'timoshenko_beam'
DEFAULT_BEAM_POINTS = 257

Document = Union[DiracBVP, BeamModel]


def _require(data: Dict[str, Any], key: str, path: str = '') -> Any:
    if not isinstance(data, dict) or key not in data:
        raise DocumentError("missing required field", field=f"{path}{key}")
    return data[key]


def _complex_array(value: Any, field: str, ndim: int) -> np.ndarray:
    """Nested lists of numbers or {re, im} objects as a complex array"""
    def convert(item, path):
        if isinstance(item, list):
            return [convert(x, f"{path}[{i}]") for i, x in enumerate(item)]
        try:
            return decode_complex(item)
        except ValueError as e:
            raise DocumentError(str(e), field=path)

    array = np.array(convert(value, field), dtype=complex)
    if array.ndim != ndim:
        raise DocumentError(f"expected a {ndim}-dimensional array, got shape {array.shape}", field=field)
    return array


def _complex_scalar(value: Any, field: str) -> complex:
    try:
        return decode_complex(value)
    except ValueError as e:
        raise DocumentError(str(e), field=field)


def _potential(data: Any, n: int) -> PotentialField:
    if data is None:
        return PotentialField(n=n, kind='zero')
    kind = _require(data, 'kind', 'Q.')
    if kind == 'zero':
        return PotentialField(n=n, kind='zero')
    if kind == 'constant':
        matrix = _complex_array(_require(data, 'matrix', 'Q.'), 'Q.matrix', 2)
        return PotentialField(n=n, kind='constant', matrix=matrix)
    if kind == 'grid':
        samples = _complex_array(_require(data, 'samples', 'Q.'), 'Q.samples', 3)
        interp = data.get('interp', 1)
        if interp not in (0, 1):
            raise DocumentError(f"interpolation order must be 0 or 1, got {interp}", field='Q.interp')
        flags = data.get('endpoint_continuity')
        if flags is not None:
            flags = np.array(flags, dtype=bool)
            if flags.shape != (n, n):
                raise DocumentError(f"expected shape ({n}, {n})", field='Q.endpoint_continuity')
        return PotentialField(n=n, kind='grid', samples=samples, interp=interp, endpoint_continuity=flags)
    raise DocumentError(f"unknown potential kind '{kind}'", field='Q.kind')


def system_from_dict(data: Dict[str, Any]) -> DiracBVP:
    """Build and validate a DiracBVP from a parsed document"""
    b = _complex_array(_require(data, 'B'), 'B', 1)
    n = len(b)
    if 'n' in data and data['n'] != n:
        raise DocumentError(f"n = {data['n']} does not match {n} weights", field='n')
    C = _complex_array(_require(data, 'C'), 'C', 2)
    D = _complex_array(_require(data, 'D'), 'D', 2)
    for name, matrix in (('C', C), ('D', D)):
        if matrix.shape != (n, n):
            raise DocumentError(f"expected shape ({n}, {n}), got {matrix.shape}", field=name)
    bvp = DiracBVP(weight=WeightMatrix(b), potential=_potential(data.get('Q'), n), boundary=BoundaryPair(C, D))

    report = validate_bvp(bvp)
    if not report.is_valid:
        first = report.violations[0]
        raise DocumentError("; ".join(report.violations), field=first.split(':', 1)[0])
    for warning in report.warnings:
        logging.warning(warning)
    return bvp


def system_to_dict(bvp: DiracBVP) -> Dict[str, Any]:
    """Document form of a problem"""
    data = {
        'kind': SYSTEM_KIND,
        'n': bvp.n,
        'B': list(bvp.b),
        'C': bvp.C,
        'D': bvp.D,
    }
    potential = bvp.potential
    if potential.kind == 'zero':
        data['Q'] = {'kind': 'zero'}
    elif potential.kind == 'constant':
        data['Q'] = {'kind': 'constant', 'matrix': potential.matrix}
    else:
        data['Q'] = {
            'kind': 'grid',
            'interp': potential.interp,
            'samples': potential.samples,
            'endpoint_continuity': potential.endpoint_continuity.tolist(),
        }
    return data


def beam_from_dict(data: Dict[str, Any]) -> BeamModel:
    """Build a BeamModel from a parsed document"""
    length = _require(data, 'length')
    if isinstance(length, bool) or not isinstance(length, (int, float)):
        raise DocumentError("expected a number", field='length')
    profiles = {}
    for name in PROFILE_NAMES:
        value = data.get(name, 0.0 if name in ('p1', 'p2') else None)
        if value is None:
            raise DocumentError("missing required field", field=name)
        if isinstance(value, list):
            array = _complex_array(value, name, 1)
        else:
            array = np.array([_complex_scalar(value, name)])
        if name not in ('p1', 'p2'):
            if np.any(array.imag != 0):
                raise DocumentError("profile must be real", field=name)
            array = array.real
        profiles[name] = array
    coefficients = {name: _complex_scalar(data.get(name, 0.0), name) for name in ('alpha1', 'alpha2', 'beta1', 'beta2')}
    sizes = {name: len(values) for name, values in profiles.items() if len(values) > 1}
    if len(set(sizes.values())) > 1:
        raise DocumentError(f"profile sample counts differ {sizes}", field='profiles')

    # Scalar profiles are sampled on the common grid
    points = next(iter(sizes.values()), data.get('points', DEFAULT_BEAM_POINTS))
    if isinstance(points, bool) or not isinstance(points, int) or points < 3:
        raise DocumentError(f"expected an integer >= 3, got {points}", field='points')
    for name, values in profiles.items():
        if len(values) == 1:
            profiles[name] = np.full(points, values[0])
    return BeamModel(length=float(length), **profiles, **coefficients)


def beam_to_dict(beam: BeamModel) -> Dict[str, Any]:
    """Document form of a beam"""
    data = beam.to_dict()
    data['kind'] = BEAM_KIND
    return data


class SystemDocumentCodec:
    """Load and save system and beam documents"""

    def __init__(self, documents_dir: str = "data/fixtures"):
        """
        Initialize codec
        Args:
            documents_dir: Directory used for relative document names
        """
        self.documents_dir = documents_dir

    def _path(self, name: str) -> str:
        if os.path.isabs(name) or os.path.exists(name):
            return name
        return os.path.join(self.documents_dir, name)

    def parse(self, text: str) -> Document:
        """
        Parse document text
        Args:
            text: JSON text
        Returns:
            DiracBVP or BeamModel depending on the 'kind' field
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DocumentError(e.msg, line=e.lineno)
        if not isinstance(data, dict):
            raise DocumentError("document must be a JSON object")
        kind = data.get('kind', SYSTEM_KIND)
        if kind == SYSTEM_KIND:
            return system_from_dict(data)
        if kind == BEAM_KIND:
            return beam_from_dict(data)
        raise DocumentError(f"unknown document kind '{kind}'", field='kind')

    def load(self, name: str) -> Document:
        """
        Load a document from file
        Args:
            name: File path, or a name inside documents_dir
        Returns:
            DiracBVP or BeamModel
        """
        path = self._path(name)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise DocumentError(f"cannot read {path}: {e.strerror}")
        return self.parse(text)

    def dumps(self, document: Document) -> str:
        if isinstance(document, BeamModel):
            return dump_json(beam_to_dict(document)) + "\n"
        return dump_json(system_to_dict(document)) + "\n"

    def save(self, document: Document, name: str) -> str:
        """
        Save a document
        Args:
            document: DiracBVP or BeamModel
            name: File path, or a name inside documents_dir
        Returns:
            Path written
        """
        path = name if os.path.dirname(name) else os.path.join(self.documents_dir, name)
        ensure_directory_exists(os.path.dirname(path))
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.dumps(document))
        return path

    def list_documents(self) -> List[str]:
        """Document files available in documents_dir"""
        if not os.path.isdir(self.documents_dir):
            return []
        return sorted(name for name in os.listdir(self.documents_dir) if name.endswith('.json'))


def load_document(path: str) -> Document:
    return SystemDocumentCodec().load(path)


def save_document(document: Document, path: str) -> str:
    return SystemDocumentCodec().save(document, path)
