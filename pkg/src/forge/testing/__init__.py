"""Hermetic test corpus: fixture repositories and a loopback stub server."""

from forge.testing.fixtures import (
    KEY_PW_ENV,
    SCENARIOS,
    STORE_PW_ENV,
    FixtureError,
    FixtureRepo,
    make_fixture,
)
from forge.testing.stubserver import RecordedRequest, StubServer

__all__ = [
    "FixtureError",
    "FixtureRepo",
    "KEY_PW_ENV",
    "RecordedRequest",
    "SCENARIOS",
    "STORE_PW_ENV",
    "StubServer",
    "make_fixture",
]
