"""Synthetic problem generator package."""
