"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .exactalg import DEFAULT_PRIME, DEFAULT_RETRY_PRIMES, FieldConfig
from .engine import SaturationConfig


@dataclass(frozen=True)
class RunConfig:
    prime: int = DEFAULT_PRIME
    retry_primes: tuple[int, ...] = DEFAULT_RETRY_PRIMES
    kmax: int = 6
    window: int = 2
    mcap: int = 6
    retries: int = 8
    seed: int = 0
    jobs: int = 1
    cache_dir: str | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("prime", "kmax", "window", "mcap", "retries", "jobs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.field()  # validates the primes

    def field(self) -> FieldConfig:
        rest = tuple(q for q in self.retry_primes if q != self.prime)
        return FieldConfig(self.prime, rest)

    def saturation(self) -> SaturationConfig:
        return SaturationConfig(self.window, self.mcap)

    def echo(self) -> dict:
        """The fields that determine results (paths and parallelism excluded)."""
        d = asdict(self)
        for k in ("cache_dir", "out", "jobs", "extra"):
            d.pop(k)
        d["retry_primes"] = list(d["retry_primes"])
        return d
