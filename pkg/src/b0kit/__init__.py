"""Bogomolov multipliers of finite p-groups.

Exact values for small groups via a cohomological brute-force oracle,
exact values for class-2 polycyclic groups via exterior-square linear
algebra, sound triviality certificates for class-4 groups, and a
central-product calculator.
"""

__version__ = "0.1.0"
