"""Numerical homogeneous extremal functions via polynomial disc envelopes."""
