import pytest

from adiascale import evolution, geometry, search


@pytest.fixture
def clear_caches():
    """Start the test from cold caches (determinism / resume checks)."""
    evolution.clear_caches()
    geometry.clear_caches()
    search.clear_caches()
    yield
    evolution.clear_caches()
    geometry.clear_caches()
    search.clear_caches()
