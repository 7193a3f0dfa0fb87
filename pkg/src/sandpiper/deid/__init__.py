"""De-identification: detect PII, substitute natural surrogates, verify."""

from .mask import mask_session, maskmap_from_doc, maskmap_to_doc, normalize_original
from .rules import (
    DEFAULT_CUE_PHRASES,
    DEFAULT_PATTERNS,
    Detection,
    DetectionRuleSet,
    detect_pii,
    detection_to_doc,
)
from .verify import VerificationReport, surrogate_spans, verify_masking

__all__ = [
    "DEFAULT_CUE_PHRASES",
    "DEFAULT_PATTERNS",
    "Detection",
    "DetectionRuleSet",
    "VerificationReport",
    "detect_pii",
    "detection_to_doc",
    "mask_session",
    "maskmap_from_doc",
    "maskmap_to_doc",
    "normalize_original",
    "surrogate_spans",
    "verify_masking",
]
