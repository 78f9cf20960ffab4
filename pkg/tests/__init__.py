"""Tests for the structured pursuit library, commands and tool server."""
