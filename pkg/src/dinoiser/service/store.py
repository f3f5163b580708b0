"""In-memory session store with TTL expiry and LRU eviction."""

from __future__ import annotations

import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Session:
    """One cached backbone pass; immutable after creation."""

    id: str
    encoding: object  # DenseEncoding
    display_h: int
    display_w: int
    created_at: float
    ttl: float
    meta: dict = field(default_factory=dict)


class SessionStore:
    """Thread-safe id -> Session map; the only synchronized region."""

    def __init__(self, ttl: float = 900.0, max_sessions: int = 64, clock=time.monotonic):
        self.ttl = ttl
        self.max_sessions = max_sessions
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def create(self, encoding, display_h: int, display_w: int, meta=None) -> Session:
        session = Session(
            id=uuid.uuid4().hex,
            encoding=encoding,
            display_h=display_h,
            display_w=display_w,
            created_at=self._clock(),
            ttl=self.ttl,
            meta=dict(meta or {}),
        )
        with self._lock:
            self._sessions[session.id] = session
            while len(self._sessions) > self.max_sessions:
                self._sessions.popitem(last=False)
        return session

    def get(self, session_id: str) -> Session | None:
        now = self._clock()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            if now - session.created_at > session.ttl:
                del self._sessions[session_id]
                return None
            self._sessions.move_to_end(session_id)
            return session

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)
