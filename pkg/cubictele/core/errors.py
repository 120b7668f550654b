# SPDX-License-Identifier: GPL-3.0-or-later
"""
Exception hierarchy for cubictele.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""


class CubicTeleError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(CubicTeleError, ValueError):
    """A parameter or outcome lies outside the domain of an operation."""


class GridError(CubicTeleError):
    """A quadrature grid is too narrow, too coarse, mismatched or too large."""


class BranchError(DomainError):
    """The feed-forward square root needs y1m/g > 0."""


class DegenerateOutcomeError(CubicTeleError):
    """The outcome probability density underflows; the output is undefined."""


class ValidationFailure(CubicTeleError):
    """A validation check breached its tolerance."""

    def __init__(self, message: str, checks=None):
        super().__init__(message)
        self.checks = checks or []
