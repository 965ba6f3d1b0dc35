"""API backends: an offline fixture server and a live query-protocol transport."""

from iamvision.backend.base import (
    OPERATIONS,
    ApiBackend,
    ApiRequest,
    ApiResponse,
    CallRecord,
    Credential,
    Session,
    load_credentials,
    parse_credentials,
)
from iamvision.backend.fixture import FixtureAccount, FixtureBackend, FixtureOptions, load_fixture
from iamvision.backend.live import LiveBackend

__all__ = [
    "OPERATIONS", "ApiBackend", "ApiRequest", "ApiResponse", "CallRecord", "Credential", "FixtureAccount",
    "FixtureBackend", "FixtureOptions", "LiveBackend", "Session", "load_credentials", "load_fixture",
    "parse_credentials",
]
