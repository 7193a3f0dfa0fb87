"""Exception types shared across the package.

Every error that can cross a module boundary carries a machine-readable
``code`` so the API and CLI can map it without string matching.
"""

from __future__ import annotations


class SandpiperError(Exception):
    code = "error"

    def __init__(self, message: str, *, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InvalidInput(SandpiperError):
    """A caller-supplied value violates a precondition."""

    code = "invalid_input"


class NotFound(SandpiperError):
    code = "not_found"


class StateError(SandpiperError):
    """An operation was attempted in the wrong lifecycle state."""

    code = "state_error"


class PermissionDenied(SandpiperError):
    code = "permission_denied"


class StoreError(SandpiperError):
    code = "store_error"


class GatewayError(SandpiperError):
    """Transport-level failure talking to a model provider.

    ``code`` is one of: model_not_allowed, transport_failure, auth_failure,
    malformed_provider_response.
    """

    def __init__(self, message: str, *, code: str = "transport_failure",
                 details: dict | None = None):
        super().__init__(message, details=details)
        self.code = code
