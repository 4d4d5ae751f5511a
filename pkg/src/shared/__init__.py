"""Shared utilities and constants."""
