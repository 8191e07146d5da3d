"""
Tests for tracebound
"""
