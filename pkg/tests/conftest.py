import json

import numpy as np
import pytest

from stabilcert.models import OperatorSpec

DIFFERENCE = {0: 1.0, -1: -1.0}
STABLE_BAND = {0: 4.0, 1: 1.0}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def identity_spec():
    return OperatorSpec.toeplitz({0: 1.0})


@pytest.fixture
def difference_spec():
    return OperatorSpec.toeplitz(DIFFERENCE)


@pytest.fixture
def stable_spec():
    return OperatorSpec.toeplitz(STABLE_BAND)


@pytest.fixture
def spec_file(tmp_path):
    """Write a spec document to a temporary file and return its path."""
    def write(document, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document) if not isinstance(document, str) else document, encoding="utf-8")
        return str(path)
    return write
