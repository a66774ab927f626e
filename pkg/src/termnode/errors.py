"""Domain errors shared across modules.

The HTTP layer maps each of these to a fixed (status, code) pair; keeping
them in one place keeps that table total.
"""

from __future__ import annotations


class TermNodeError(Exception):
    """Base class for all domain errors."""


# Codec errors

class MalformedDocument(TermNodeError):
    pass


class UnsupportedDialect(TermNodeError):
    pass


class EncodingError(TermNodeError):
    pass


class HeaderError(TermNodeError):
    pass


class RowArityError(TermNodeError):
    pass


class InvariantViolation(TermNodeError):
    pass


# Store errors

class Unauthorized(TermNodeError):
    pass


class Unauthenticated(TermNodeError):
    pass


class InvalidCredentials(TermNodeError):
    pass


class UnknownCollection(TermNodeError):
    pass


class UnknownEntry(TermNodeError):
    pass


class UnknownUser(TermNodeError):
    pass


class UnknownGroup(TermNodeError):
    pass


class DuplicateName(TermNodeError):
    pass


class DuplicateUser(TermNodeError):
    pass


class StaleRevision(TermNodeError):
    pass


class AlreadyApproved(TermNodeError):
    pass


class ValidationFailed(TermNodeError):
    def __init__(self, issues):
        self.issues = list(issues)
        codes = ", ".join(issue.code for issue in self.issues)
        super().__init__(f"entry failed validation: {codes}")


class ParseFailed(TermNodeError):
    pass


class EmptyBody(TermNodeError):
    pass


# Search errors

class InvalidQuery(TermNodeError):
    pass


# Configuration errors

class ConfigError(TermNodeError):
    pass


# Federation errors

class TransportError(TermNodeError):
    pass


class AuthRejected(TermNodeError):
    pass


class UnknownNode(TermNodeError):
    pass
