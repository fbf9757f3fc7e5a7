import pytest

from dnagolay.codebook import load_default_codebook


@pytest.fixture(scope="session")
def codebook():
    return load_default_codebook()
