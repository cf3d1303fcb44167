"""
Error taxonomy for Blochop
Every failure raised by the numerical core carries one of these types
"""

from enum import Enum
from typing import Dict, Any, Optional


class BlochopErrorType(Enum):
    SCHEMA = "schema"
    DOMAIN = "domain"
    DIVERGENCE = "divergence"
    PAIRING = "pairing"
    CERTIFICATION = "certification"
    INCONSISTENT = "inconsistent"
    REPRESENTATION = "representation"


# CLI exit status per error type
EXIT_CODES = {
    BlochopErrorType.CERTIFICATION: 1,
    BlochopErrorType.INCONSISTENT: 1,
    BlochopErrorType.SCHEMA: 2,
    BlochopErrorType.DOMAIN: 3,
    BlochopErrorType.DIVERGENCE: 3,
    BlochopErrorType.REPRESENTATION: 3,
    BlochopErrorType.PAIRING: 4,
}


class BlochopError(Exception):
    """Base error with a type tag and structured details"""

    error_type = BlochopErrorType.DOMAIN

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.error_type]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": True,
            "error_type": self.error_type.value,
            "error_message": self.message,
            "details": self.details,
        }


class ConfigError(BlochopError):
    """Invalid parameters or a config that fails schema validation"""
    error_type = BlochopErrorType.SCHEMA


class DomainError(BlochopError):
    """Evaluation requested outside where a representation is valid"""
    error_type = BlochopErrorType.DOMAIN


class DivergenceError(BlochopError):
    error_type = BlochopErrorType.DIVERGENCE


class PairingError(BlochopError):
    """Estimator called with an operator kind or source space it does not cover"""
    error_type = BlochopErrorType.PAIRING


class CertificationError(BlochopError):
    error_type = BlochopErrorType.CERTIFICATION


class InconsistentEstimateError(BlochopError):
    """Lower estimate exceeds the upper estimate beyond the allowed slack"""
    error_type = BlochopErrorType.INCONSISTENT


class RepresentationError(BlochopError):
    error_type = BlochopErrorType.REPRESENTATION
