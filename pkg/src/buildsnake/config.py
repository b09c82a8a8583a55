"""Solver and pipeline configuration with published defaults."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

MODES = ("basic", "gvf", "proposed")


@dataclass
class SnakeConfig:
    """Contour-evolution parameters with empirically tuned defaults."""

    alpha: float = 0.01       # tension weight
    beta: float = 0.01        # rigidity weight
    gamma: float = 1.0        # implicit step weight
    max_iters: int = 400
    epsilon: float = 0.01     # px convergence threshold
    resample_every: int = 10
    w_line: float = 0.04
    w_edge: float = 2.0
    w_term: float = 0.01
    sigma: float = 10.0       # px, image smoothing
    mu: float = 0.2           # GVF smoothing weight
    gvf_iters: int = 200
    delta: float = 50.0       # px^2, shape-similarity scale
    shape_weight: float = 1.0
    mode: str = "proposed"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_iters < 1 or self.gvf_iters < 1 or self.resample_every < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, d: dict) -> "SnakeConfig":
        known = {k: v for k, v in d.items() if k in cls.field_names()}
        return cls(**known)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, text: str) -> "SnakeConfig":
        return cls.from_dict(json.loads(text))
