"""Virtually free groups as finite graphs of finite groups.

Normal forms and element orders (``words``), finite-subgroup conjugacy and
normalizers (``transport``), homomorphisms and their equivalence (``homs``),
co-Hopficity with certificates (``cohopf``) and first-order formulas
(``folang``).
"""

from .config import CapExceeded, Caps, caps
from .fingroup import FiniteGroup
from .gog import GraphOfGroups, from_json, to_json

__version__ = "0.1.0"

__all__ = ["CapExceeded", "Caps", "caps", "FiniteGroup", "GraphOfGroups", "from_json", "to_json"]
