"""Conversational-data labeling service.

Configurable code sets with dependency rules, guided yes/no selection,
crash-safe journaled persistence, inter-rater agreement metrics, and an
HTTP API for the annotation UI.
"""

__version__ = "0.1.0"
