"""Casimir-Polder potentials of atoms above graphene sheets and substrates."""

__version__ = "0.1.0"
