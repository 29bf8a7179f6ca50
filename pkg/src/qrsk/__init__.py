"""q-deformed RSK, q-local moves, q-polymer, q-pushTASEP and q-PNG."""

__version__ = "0.1.0"
