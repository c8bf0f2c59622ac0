"""Deterministic mock web: site definitions, API routes, page model, HTTP facade."""

from .browser import (
    ActionFailed, BrowserError, BrowserSession, IllegalAction, LocatorNotFound, ParseError, read_text,
)
from .site import (
    ApiError, BadParams, NotFound, RouteNotFound, SessionState, SiteDefinition, SiteSchemaError,
    api_call, api_response, format_distance, load_site, load_site_pack, load_site_text, parse_distance,
)
from .server import DEFAULT_PORT, BackgroundServer, make_server
from .world import MockWeb, UnknownSite

__all__ = [
    "DEFAULT_PORT", "BackgroundServer", "make_server",
    "ActionFailed", "ApiError", "BadParams", "BrowserError", "BrowserSession", "IllegalAction",
    "LocatorNotFound", "MockWeb", "NotFound", "ParseError", "RouteNotFound", "SessionState",
    "SiteDefinition", "SiteSchemaError", "UnknownSite", "api_call", "api_response",
    "format_distance", "load_site", "load_site_pack", "load_site_text", "parse_distance", "read_text",
]
