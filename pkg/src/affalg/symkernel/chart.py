from __future__ import annotations

from dataclasses import dataclass

ROLES = ("base", "fiber", "dual-fiber")


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names with a role tag per coordinate."""

    names: tuple
    roles: tuple = ()

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        roles = tuple(self.roles) or ("base",) * len(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        if len(roles) != len(names):
            raise ValueError("one role per coordinate is required")
        for r in roles:
            if r not in ROLES:
                raise ValueError(f"unknown coordinate role {r!r}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "roles", roles)

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.names

    def index(self, name):
        return self.names.index(name)

    def with_role(self, role):
        return tuple(n for n, r in zip(self.names, self.roles) if r == role)

    def __add__(self, other):
        return Chart(self.names + other.names, self.roles + other.roles)
