"""
ptscan - adjoint-matrix spectral analysis of quadratic Hamiltonians
"""
