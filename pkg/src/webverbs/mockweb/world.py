"""A loaded site pack plus per-session state."""

from __future__ import annotations

import threading
from pathlib import Path

from .browser import BrowserSession
from .site import SessionState, SiteDefinition, api_response, load_site_pack


class UnknownSite(KeyError):
    def __str__(self):
        return f"unknown site {self.args[0]!r}"


class MockWeb:
    def __init__(self, sites: list[SiteDefinition]):
        self.sites = {s.site_id: s for s in sites}
        self._sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()
        self._browsers: list[BrowserSession] = []

    @classmethod
    def from_pack(cls, directory) -> "MockWeb":
        return cls(load_site_pack(Path(directory)))

    def site(self, site_id: str) -> SiteDefinition:
        try:
            return self.sites[site_id]
        except KeyError:
            raise UnknownSite(site_id) from None

    def session(self, session_id: str = "default") -> SessionState:
        with self._lock:
            st = self._sessions.get(session_id)
            if st is None:
                st = self._sessions[session_id] = SessionState(session_id)
            return st

    def api(self, site_id: str, method: str, path: str, params=None, session_id: str = "default"):
        """(status, document) for one API request; unknown sites answer 404."""
        site = self.sites.get(site_id)
        if site is None:
            return 404, {"error": "route_not_found", "message": f"unknown site {site_id!r}"}
        return api_response(site, method, path, params, self.session(session_id))

    def browser(self, site_id: str, session_id: str = "default") -> BrowserSession:
        b = BrowserSession(self.site(site_id), self.session(session_id))
        with self._lock:
            self._browsers.append(b)
        return b

    @property
    def browser_steps(self) -> int:
        """Actions executed by every browser session opened on this world."""
        with self._lock:
            return sum(b.steps for b in self._browsers)
