"""Core value types, errors and settings."""
