"""Spectrum result containers shared by the classical and fractional solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from fraclap.errors import ValidationError

__all__ = ["METHODS", "SpectrumEntry", "SpectrumResult"]

METHODS = ("weyl_root", "pencil", "dirichlet_coincidence")


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float
    multiplicity: int
    method: str

    def __post_init__(self) -> None:
        if self.multiplicity not in (1, 2):
            raise ValidationError(f"multiplicity must be 1 or 2, got {self.multiplicity}")
        if self.method not in METHODS:
            raise ValidationError(f"unknown method tag {self.method!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"lambda": float(self.lam), "multiplicity": int(self.multiplicity), "method": self.method}


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: tuple[SpectrumEntry, ...]
    search_window: tuple[float, float]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", tuple(self.eigenvalues))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        lams = [e.lam for e in self.eigenvalues]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("eigenvalues must be strictly ascending")

    @property
    def values(self) -> list[float]:
        """Eigenvalues repeated according to multiplicity."""
        out: list[float] = []
        for e in self.eigenvalues:
            out.extend([e.lam] * e.multiplicity)
        return out

    def num_nonpositive(self, tol: float = 0.0) -> int:
        return sum(e.multiplicity for e in self.eigenvalues if e.lam <= tol)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
            "search_window": [float(self.search_window[0]), float(self.search_window[1])],
            "warnings": list(self.warnings),
        }


def merge_entries(
    entries: list[SpectrumEntry], window_rel: float = 1e-6
) -> list[SpectrumEntry]:
    """Collapse entries closer than ``window_rel * (1 + |lam|)``.

    Earlier-listed methods in :data:`METHODS` win ties except that a
    ``dirichlet_coincidence`` entry is kept over a nearby ``weyl_root``. The
    merged multiplicity is the largest one seen, capped at 2.
    """
    rank = {"dirichlet_coincidence": 0, "weyl_root": 1, "pencil": 2}
    ordered = sorted(entries, key=lambda e: (e.lam, rank[e.method]))
    out: list[SpectrumEntry] = []
    for e in ordered:
        if out and abs(e.lam - out[-1].lam) <= window_rel * (1.0 + abs(e.lam)):
            prev = out[-1]
            keep = prev if rank[prev.method] <= rank[e.method] else e
            mult = min(2, max(prev.multiplicity, e.multiplicity))
            out[-1] = SpectrumEntry(keep.lam, mult, keep.method)
        else:
            out.append(e)
    return out
