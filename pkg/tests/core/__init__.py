"""
core tests
"""
