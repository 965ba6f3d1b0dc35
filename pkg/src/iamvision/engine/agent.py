"""A session wrapped with denial memoization and cooperative cancellation."""

from __future__ import annotations

import logging
import threading
from typing import Any

from iamvision.backend.base import Session
from iamvision.errors import (
    AccessDenied,
    ApiError,
    ChainDepthExceeded,
    NoSuchEntity,
    Throttling,
    UnsupportedOperation,
)

log = logging.getLogger(__name__)


class Agent:
    """One session taking part in a pool.

    Operations that come back ``AccessDenied`` (or unsupported) are remembered
    per agent and never reissued, so a refused chain costs one call.
    """

    def __init__(self, session: Session, index: int, cancel: threading.Event | None = None) -> None:
        self.session = session
        self.index = index
        self.cancel = cancel or threading.Event()
        self.denied: set[str] = set()
        self.probed = False

    def __repr__(self) -> str:
        return f"Agent({self.index}, {self.session.principal_arn})"

    @property
    def principal_arn(self) -> str:
        return self.session.principal_arn

    def can(self, operation: str) -> bool:
        return operation not in self.denied and not self.cancel.is_set()

    def call(self, operation: str, **params: Any) -> dict[str, Any] | None:
        """Issue a request; ``None`` when refused, throttled out or cancelled. Raises NoSuchEntity."""
        if not self.can(operation):
            return None
        try:
            return self.session.call(operation, **params)
        except (AccessDenied, UnsupportedOperation):
            self.denied.add(operation)
            return None
        except NoSuchEntity:
            raise
        except (Throttling, ChainDepthExceeded) as exc:
            log.debug("%r: %s failed transiently: %s", self, operation, exc)
            return None
        except ApiError as exc:
            log.warning("%r: %s failed: %s", self, operation, exc)
            return None

    def get(self, operation: str, **params: Any) -> dict[str, Any] | None:
        """Like :meth:`call` but a missing target is also ``None``."""
        try:
            return self.call(operation, **params)
        except NoSuchEntity:
            return None

    def list(self, operation: str, key: str, **params: Any) -> list[Any] | None:
        """Follow ``Marker`` pagination; ``None`` if any page is refused."""
        items: list[Any] = []
        marker: str | None = None
        while True:
            extra = {"Marker": marker} if marker else {}
            page = self.get(operation, **params, **extra)
            if page is None:
                return None
            items.extend(page.get(key, []))
            if not page.get("IsTruncated"):
                return items
            marker = page["Marker"]
