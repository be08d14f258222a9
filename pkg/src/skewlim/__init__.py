"""Skew ultralimits over representable ultrafilters."""
