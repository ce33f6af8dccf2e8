"""Resource caps, overridable through ``VFK_CAP_*`` environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


class CapExceeded(RuntimeError):
    """A configured resource cap was hit before the computation finished."""


@dataclass(frozen=True)
class Caps:
    subgroups: int = 48  # max order for all_subgroups
    aut: int = 24  # max order for automorphism_group_order
    closure: int = 4096  # max elements explored when closing a subgroup of pi_1
    fix_states: int = 0  # 0 = derive from the graph (4 x number of states)
    fold_steps: int = 200
    eval_steps: int = 50_000_000
    power_search: int = 0  # 0 = lcm of |Aut(A_i)|

    @classmethod
    def from_env(cls) -> "Caps":
        kwargs = {}
        for f in fields(cls):
            raw = os.environ.get(f"VFK_CAP_{f.name.upper()}")
            if raw is not None:
                kwargs[f.name] = int(raw)
        return cls(**kwargs)


def caps() -> Caps:
    return Caps.from_env()
