"""
levylab: numerical laboratory for Levy-Ito integro-differential Hamilton-Jacobi equations on the torus
"""

__version__ = "0.1.0"
