"""
tracebound - provable bounds on Frobenius trace statistics

Separating polynomials prove that a positive proportion of primes have
traces outside a region; atomic measures show that no polynomial built
from the known moments can do better. Both kinds of certificate are
searched for, emitted and checked here.
"""

__version__ = "1.0.0"
