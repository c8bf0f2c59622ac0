"""Simulated page model addressed by stable-public-locator paths.

A locator is a slash-separated path of ``spl`` segments.  Inside a
list_region a numeric segment selects a row (``results/items/0/name``).
Button clicks run the site's own API routes, so page values and API
documents come from the same query engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..types import ValueParseError, parse_money
from .site import (
    ApiError, BadParams, Element, SessionState, SiteDefinition, api_call, parse_distance, render_cell_text,
)


class BrowserError(Exception):
    pass


class LocatorNotFound(BrowserError):
    def __init__(self, locator: str, page: str | None, failed_at: str):
        self.locator = locator
        self.page = page
        self.failed_at = failed_at
        super().__init__(f"locator {locator!r} not found on page {page} (no match for {failed_at!r})")


class ParseError(BrowserError):
    def __init__(self, text: str, mode: str, reason: str = ""):
        self.text = text
        self.mode = mode
        super().__init__(f"cannot read {text!r} {mode}" + (f": {reason}" if reason else ""))


class IllegalAction(BrowserError):
    pass


class ActionFailed(BrowserError):
    """A click whose backing route answered with an error document."""

    def __init__(self, error: ApiError):
        self.error = error
        super().__init__(f"{error.code}: {error.message}")


@dataclass(frozen=True)
class Node:
    element: Element
    context: Any  # document (or row) the node's binds resolve against
    path: str

    @property
    def kind(self) -> str:
        return self.element.kind

    def text(self) -> str:
        el = self.element
        if el.kind != "text_node":
            raise IllegalAction(f"{self.path} is a {el.kind}, not a text node")
        if el.bind is None:
            return el.text or ""
        return render_cell_text(_lookup(self.context, el.bind), el.format)

    def rows(self) -> list:
        el = self.element
        if el.kind != "list_region":
            raise IllegalAction(f"{self.path} is a {el.kind}, not a list region")
        rows = _lookup(self.context, el.bind)
        return list(rows) if isinstance(rows, list) else []


def _lookup(ctx, path: str):
    if path == ".":
        return ctx
    cur = ctx
    for part in path.split("."):
        if not isinstance(cur, dict):
            return None
        cur = cur.get(part)
    return cur


def read_text(text: str, mode: str):
    """Parse displayed text per a read parse mode."""
    try:
        if mode == "as_string":
            return text
        if mode == "as_int":
            t = text.strip()
            if not t.lstrip("-").isdigit():
                raise ValueParseError("not an integer")
            return int(t)
        if mode == "as_money":
            return parse_money(text)
        if mode == "as_distance":
            return parse_distance(text)
    except ValueParseError as exc:
        raise ParseError(text, mode, str(exc)) from None
    raise ParseError(text, mode, "unknown parse mode")


@dataclass
class BrowserSession:
    site: SiteDefinition
    state: SessionState
    page: str | None = None
    doc: Any = None
    form: dict = field(default_factory=dict)
    steps: int = 0
    mutations: int = 0  # successful POST routes run by clicks
    log: list = field(default_factory=list)

    # -- navigation -------------------------------------------------------

    def _enter(self, path: str, doc=None):
        page = self.site.pages.get(path)
        if page is None:
            raise LocatorNotFound(path, self.page, path)
        self.page = path
        self.form = {}
        self.doc = doc
        if page.on_load is not None:
            method, rpath = page.on_load.split(" ", 1)
            self.doc = self._call(method, rpath, {})

    def _call(self, method: str, path: str, params: dict):
        # fill path placeholders from form values
        parts = []
        rest = dict(params)
        for seg in path.strip("/").split("/"):
            if seg.startswith("{") and seg.endswith("}"):
                name = seg[1:-1]
                if name not in rest:
                    raise ActionFailed(BadParams(f"missing required param {name!r}"))
                parts.append(str(rest.pop(name)))
            else:
                parts.append(seg)
        try:
            doc = api_call(self.site, method, "/" + "/".join(parts), rest, self.state)
        except ApiError as exc:
            raise ActionFailed(exc) from None
        if method == "POST":
            self.mutations += 1
        return doc

    # -- locators ---------------------------------------------------------

    def resolve(self, locator: str) -> Node:
        if self.page is None:
            raise LocatorNotFound(locator, None, locator)
        segments = locator.split("/")
        if not locator or any(not s for s in segments):
            raise LocatorNotFound(locator, self.page, locator)
        return self._resolve_in(self.site.pages[self.page].elements, self.doc, segments, locator, "")

    def _resolve_in(self, elements, ctx, segments, locator, prefix) -> Node:
        seg, rest = segments[0], segments[1:]
        here = f"{prefix}/{seg}" if prefix else seg
        match = next((el for el in elements if el.spl == seg), None)
        if match is None:
            raise LocatorNotFound(locator, self.page, here)
        node = Node(match, ctx, here)
        if not rest:
            return node
        if match.kind == "list_region":
            idx = rest[0]
            rows = node.rows()
            if not idx.isdigit() or int(idx) >= len(rows):
                raise LocatorNotFound(locator, self.page, f"{here}/{idx}")
            row_path = f"{here}/{idx}"
            if len(rest) == 1:
                return Node(match, ctx, row_path)
            return self._resolve_in(match.item, rows[int(idx)], rest[1:], locator, row_path)
        return self._resolve_in(match.children, ctx, rest, locator, here)

    def locators(self) -> list[str]:
        """Every addressable locator on the current page (list rows excluded)."""
        out: list[str] = []

        def walk(elements, prefix):
            for el in elements:
                if el.spl is None:
                    continue
                path = f"{prefix}/{el.spl}" if prefix else el.spl
                out.append(path)
                walk(el.children, path)

        if self.page is not None:
            walk(self.site.pages[self.page].elements, "")
        return out

    # -- actions ----------------------------------------------------------

    def navigate(self, path: str) -> None:
        self.steps += 1
        self.log.append(("navigate", path))
        self._enter(path)

    def fill(self, locator: str, value: str) -> None:
        self.steps += 1
        self.log.append(("fill", locator))
        node = self.resolve(locator)
        if node.kind != "text_input":
            raise IllegalAction(f"fill: {locator} is a {node.kind}, not a text input")
        self.form[node.element.name] = value

    def select(self, locator: str, option: str) -> None:
        self.steps += 1
        self.log.append(("select", locator))
        node = self.resolve(locator)
        if node.kind != "select":
            raise IllegalAction(f"select: {locator} is a {node.kind}, not a select")
        if option not in node.element.options:
            raise IllegalAction(f"select: {option!r} is not an option of {locator}")
        self.form[node.element.name] = option

    def click(self, locator: str) -> None:
        self.steps += 1
        self.log.append(("click", locator))
        node = self.resolve(locator)
        if node.kind != "button":
            raise IllegalAction(f"click: {locator} is a {node.kind}, not a button")
        action = node.element.action
        doc = None
        if action.get("route"):
            method, path = action["route"].split(" ", 1)
            doc = self._call(method, path, dict(self.form))
        self._enter(action["target"], doc)

    def wait_for(self, locator: str) -> Node:
        # no asynchrony in the model: the element is either there or not
        self.steps += 1
        self.log.append(("wait_for", locator))
        return self.resolve(locator)

    def read(self, locator: str, mode: str):
        self.steps += 1
        self.log.append(("read", locator))
        return read_text(self.resolve(locator).text(), mode)

    def read_list(self, locator: str, fields=None, item=None) -> tuple:
        """One record (dict) per row via ``fields`` (name, rel locator, mode), or scalars via ``item``."""
        self.steps += 1
        self.log.append(("read_list", locator))
        region = self.resolve(locator)
        rows = region.rows()
        out = []
        for i in range(len(rows)):
            base = f"{locator}/{i}"
            if item is not None:
                rel, mode = item
                out.append(read_text(self.resolve(f"{base}/{rel}").text(), mode))
            else:
                out.append({
                    name: read_text(self.resolve(f"{base}/{rel}").text(), mode)
                    for name, rel, mode in fields
                })
        return tuple(out)

    def act(self, step, value: str | None = None) -> Any:
        """Run one ActionStep; ``value`` is the resolved text for fill/select."""
        op = step.op
        if op == "navigate":
            return self.navigate(step.path)
        if op == "fill":
            return self.fill(step.locator, value)
        if op == "select":
            return self.select(step.locator, value)
        if op == "click":
            return self.click(step.locator)
        if op == "wait_for":
            self.wait_for(step.locator)
            return None
        if op == "read":
            return self.read(step.locator, step.mode)
        if op == "read_list":
            return self.read_list(step.locator, step.fields, step.item)
        raise IllegalAction(f"unknown action {op!r}")
