"""Phase-field time steppers."""
