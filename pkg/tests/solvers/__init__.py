"""
solvers tests
"""
