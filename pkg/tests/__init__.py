"""
levylab test suite
"""
