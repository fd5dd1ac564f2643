"""Finite Serre graphs, permutation groups acting on them, coverings,
blowups of tree actions, graphs of spaces and common finite covers."""
from __future__ import annotations

from .errors import GraphDiscError
from .graph import GraphMorphism, SerreGraph, is_covering, validate_graph
from .permgrp import Domain, GroupAction, PermGroup, Permutation

__all__ = ["GraphDiscError", "GraphMorphism", "SerreGraph", "is_covering", "validate_graph", "Domain",
           "GroupAction", "PermGroup", "Permutation"]
__version__ = "0.1.0"
