import os
from dataclasses import dataclass, field, replace
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()

DEFAULT_DOMAIN = os.getenv("STEKLOV_DOMAIN", "disk")
DEFAULT_N = int(os.getenv("STEKLOV_N", 256))
DEFAULT_GRID = int(os.getenv("STEKLOV_GRID", 301))
COLLAR_FRACTION = float(os.getenv("STEKLOV_COLLAR_FRACTION", 0.02))
ADMISSIBILITY_C = float(os.getenv("STEKLOV_ADMISSIBILITY_C", 0.1))
THREADS = int(os.getenv("STEKLOV_THREADS", os.cpu_count() or 1))
LOG_LEVEL = os.getenv("STEKLOV_LOG_LEVEL", "WARNING")
FIELD_UPSAMPLE = int(os.getenv("STEKLOV_FIELD_UPSAMPLE", 4))

MIN_N = 32
MAX_N = 512
MIN_GRID = 16
MAX_GRID = 501


@dataclass(frozen=True)
class Config:
    """Run configuration shared by the solver, the nodal tools and the suites.

    ``collar`` is an absolute collar width; when it is None the collar is
    ``collar_fraction`` times the domain diameter.
    """

    domain: str = DEFAULT_DOMAIN
    n: int = DEFAULT_N
    grid: int = DEFAULT_GRID
    collar: Optional[float] = None
    collar_fraction: float = COLLAR_FRACTION
    admissibility_c: float = ADMISSIBILITY_C
    threads: int = THREADS
    field_upsample: int = FIELD_UPSAMPLE
    outputs: dict = field(default_factory=dict)

    def validate(self) -> "Config":
        from .geometry import curve_from_spec

        if self.n % 2 or self.n < MIN_N:
            raise ConfigError(f"N must be even and ≥ {MIN_N} (got {self.n})")
        if self.n > MAX_N:
            raise ConfigError(f"N must be ≤ {MAX_N} (got {self.n})")
        if not MIN_GRID <= self.grid <= MAX_GRID:
            raise ConfigError(
                f"grid resolution must lie in [{MIN_GRID}, {MAX_GRID}] (got {self.grid})"
            )
        if self.collar is not None and self.collar <= 0:
            raise ConfigError(f"collar width must be positive (got {self.collar})")
        if not 0 < self.collar_fraction < 0.2:
            raise ConfigError(
                f"collar fraction must lie in (0, 0.2) (got {self.collar_fraction})"
            )
        if self.admissibility_c <= 0:
            raise ConfigError(
                f"admissibility constant c must be positive (got {self.admissibility_c})"
            )
        if self.threads < 1:
            raise ConfigError(f"thread count must be ≥ 1 (got {self.threads})")
        if self.field_upsample < 1:
            raise ConfigError(
                f"field upsampling factor must be ≥ 1 (got {self.field_upsample})"
            )
        try:
            curve_from_spec(self.domain)
        except ValueError as e:
            raise ConfigError(f"invalid domain descriptor: {e}") from e
        return self

    def collar_width(self, curve) -> float:
        if self.collar is not None:
            return self.collar
        return self.collar_fraction * curve.diameter()

    def with_overrides(self, **kwargs) -> "Config":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)
