"""Blur- and low-resolution-robust recognition with Enhanced Local Frequency Descriptors."""
