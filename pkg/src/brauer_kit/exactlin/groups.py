from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable


@dataclass(frozen=True)
class FinAbGroup:
    """Finitely generated abelian group Z/d_1 + ... + Z/d_k + Z^r.

    ``invariant_factors`` satisfy d_i >= 2 and d_i | d_{i+1}.
    """

    invariant_factors: tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        ds = tuple(int(d) for d in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", ds)
        if any(d < 2 for d in ds):
            raise ValueError(f"invariant factors must be >= 2, got {ds}")
        if any(ds[i + 1] % ds[i] for i in range(len(ds) - 1)):
            raise ValueError(f"invariant factors {ds} do not form a divisibility chain")
        if self.free_rank < 0:
            raise ValueError("negative free rank")

    @classmethod
    def trivial(cls) -> "FinAbGroup":
        return cls()

    @classmethod
    def elementary_2(cls, rank: int) -> "FinAbGroup":
        return cls((2,) * rank)

    @classmethod
    def from_cyclic_orders(cls, orders: Iterable[int]) -> "FinAbGroup":
        """Normalise a direct sum of cyclic groups Z/n_i (n_i = 0 meaning Z)."""
        from .matrix import IntegerMatrix
        from .normalforms import snf

        orders = [abs(int(n)) for n in orders]
        free = orders.count(0)
        finite = [n for n in orders if n > 1]
        if not finite:
            return cls((), free)
        _, d, _ = snf(IntegerMatrix.diag(finite))
        ds = tuple(d[i, i] for i in range(len(finite)) if d[i, i] > 1)
        return cls(ds, free)

    @property
    def order(self) -> int | None:
        """Order of the group, or ``None`` when it is infinite."""
        if self.free_rank:
            return None
        return prod(self.invariant_factors)

    def is_trivial(self) -> bool:
        return not self.invariant_factors and not self.free_rank

    def is_elementary_2(self) -> bool:
        return self.free_rank == 0 and all(d == 2 for d in self.invariant_factors)

    @property
    def f2_dim(self) -> int:
        """dim over F_2 of G/2G."""
        return self.free_rank + sum(1 for d in self.invariant_factors if d % 2 == 0)

    def direct_sum(self, other: "FinAbGroup") -> "FinAbGroup":
        g = FinAbGroup.from_cyclic_orders(self.invariant_factors + other.invariant_factors)
        return FinAbGroup(g.invariant_factors, self.free_rank + other.free_rank)

    __add__ = direct_sum

    def to_json(self) -> dict:
        return {"invariant_factors": list(self.invariant_factors),
                "free_rank": self.free_rank,
                "order": self.order}

    def __str__(self):
        parts = []
        i = 0
        ds = self.invariant_factors
        while i < len(ds):
            j = i
            while j < len(ds) and ds[j] == ds[i]:
                j += 1
            parts.append(f"Z/{ds[i]}" if j - i == 1 else f"(Z/{ds[i]})^{j - i}")
            i = j
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"
