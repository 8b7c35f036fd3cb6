import pytest

from ssopt import io


@pytest.fixture(scope="session")
def firm():
    return io.load_problem(io.fixture_path("firm600"))


@pytest.fixture(scope="session")
def hierarchy():
    return io.load_judgments(io.fixture_path("judgments"))


@pytest.fixture(scope="session")
def case_responses():
    return io.load_responses(io.fixture_path("responses"))


AHP_RANKS = (2, 3, 4, 1, 5, 6)  # v4 first, then v1, v2
