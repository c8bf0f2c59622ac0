"""Typed web verbs: manifests, registry, workflow language and a deterministic mock web."""

__version__ = "0.1.0"
