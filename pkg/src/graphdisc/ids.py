"""Canonical ordering and string encoding of opaque ids.

Ids are strings, ints or (nested) tuples of those. Constructions build
tuple ids; serialization flattens them to strings.
"""
from __future__ import annotations

from typing import Any, Hashable, Iterable


def idkey(x: Any):
    """Total-order key across mixed id types."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, tuple(idkey(i) for i in x))
    if isinstance(x, frozenset):
        return (3, tuple(sorted(idkey(i) for i in x)))
    return (4, repr(x))


def sorted_ids(xs: Iterable[Hashable]) -> list:
    return sorted(xs, key=idkey)


def min_id(xs: Iterable[Hashable]):
    return min(xs, key=idkey)


def id_to_str(x: Any) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, tuple):
        return "(" + ",".join(id_to_str(i) for i in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(id_to_str(i) for i in sorted_ids(x)) + "}"
    return repr(x)
