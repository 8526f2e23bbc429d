from . import harmonic, levi, modulus, polycore, rado, sampling, witnesses

__all__ = ["harmonic", "levi", "modulus", "polycore", "rado", "sampling", "witnesses"]
