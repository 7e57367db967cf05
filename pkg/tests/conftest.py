import pytest

from petelkit import load_schema, load_vectors
from petelkit.lexicon import (
    fixture_schema_path,
    fixture_validation_path,
    fixture_vectors_path,
)

FLAGSHIP_UTTERANCE = (
    "For each airline, predict the maximum delay that any of its flights "
    "will suffer next week."
)

FIXTURE_NAMES = ("flight_delay", "online_delivery", "student_performance")


@pytest.fixture(scope="session")
def fd_schema():
    return load_schema(fixture_schema_path("flight_delay"))


@pytest.fixture(scope="session")
def od_schema():
    return load_schema(fixture_schema_path("online_delivery"))


@pytest.fixture(scope="session")
def sp_schema():
    return load_schema(fixture_schema_path("student_performance"))


@pytest.fixture(scope="session")
def store():
    return load_vectors(fixture_vectors_path())


@pytest.fixture(scope="session")
def validation_paths():
    return {name: fixture_validation_path(name) for name in FIXTURE_NAMES}
