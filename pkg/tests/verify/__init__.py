"""
verify tests
"""
