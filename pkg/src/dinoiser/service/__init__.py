"""Session-based HTTP inference service."""

from .app import SegmentRequest, ServiceSettings, create_app
from .rle import decode_rle, encode_rle
from .store import Session, SessionStore

__all__ = [
    "SegmentRequest",
    "ServiceSettings",
    "Session",
    "SessionStore",
    "create_app",
    "decode_rle",
    "encode_rle",
]
