"""Message recovery on NTRU-HPS with a lattice that does not depend on the public key."""

__version__ = "0.1.0"
