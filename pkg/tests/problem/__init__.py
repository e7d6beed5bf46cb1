"""
problem tests
"""
