"""
Test initialization for the shape scaling test suite.
"""
