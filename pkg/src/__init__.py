"""Guide-robot control, perception, planning and simulation."""

__all__ = []
