"""Model parameters for the unidirectionally coupled map lattice."""
from __future__ import annotations

from dataclasses import dataclass

# Critical tent-map slope below which single-site chaos is sustained.
H_CRITICAL = 2.0


@dataclass(frozen=True)
class ModelParams:
    """The control-parameter triple (alpha, h, delta).

    alpha: strength of the unidirectional forward coupling, >= 0.
    h: slope of the on-site tent map, > 1.
    delta: cutoff offset of the flat piece near the origin, in (0, 1).
    """

    alpha: float
    h: float
    delta: float = 0.1

    def __post_init__(self) -> None:
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.h > 1:
            raise ValueError(f"h must be > 1, got {self.h}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")

    @property
    def spreading_window(self) -> tuple[float, float]:
        """Open interval (1+delta, 2+delta) where the coupling g is positive."""
        return (1.0 + self.delta, 2.0 + self.delta)

    def replace(self, **kwargs) -> "ModelParams":
        fields = {"alpha": self.alpha, "h": self.h, "delta": self.delta}
        fields.update(kwargs)
        return ModelParams(**fields)
