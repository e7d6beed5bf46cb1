"""
numerics tests
"""
