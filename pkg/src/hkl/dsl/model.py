from __future__ import annotations

from dataclasses import dataclass, field

from ..calculus import Module, compose
from ..errors import UnknownSymbol


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Seq:
    left: object
    right: object


def system_refs(expr) -> list:
    if isinstance(expr, Ref):
        return [expr.name]
    return system_refs(expr.left) + system_refs(expr.right)


@dataclass
class ModelSet:
    signatures: dict = field(default_factory=dict)
    structures: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not (self.signatures or self.structures or self.modules or self.systems)

    def build_system(self, name: str) -> Module:
        """Compose the modules named by system ``name`` following its bracketing."""
        if name not in self.systems:
            raise UnknownSymbol(f"no system named {name!r}")

        def build(expr):
            if isinstance(expr, Ref):
                return self.modules[expr.name]
            return compose(build(expr.left), build(expr.right))

        return build(self.systems[name])
