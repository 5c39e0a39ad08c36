"""Environment-driven settings for the command-line front end."""
from __future__ import annotations
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

OUTPUT_DIR_ENV = "MARKOV_TENSOR_OUTPUT_DIR"
LOG_LEVEL_ENV = "MARKOV_TENSOR_LOG_LEVEL"


@dataclass(frozen=True)
class Settings:
    output_dir: Path = Path(".")
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        env = os.environ if environ is None else environ
        return cls(
            output_dir=Path(env.get(OUTPUT_DIR_ENV) or "."),
            log_level=(env.get(LOG_LEVEL_ENV) or "WARNING").upper(),
        )

    def resolve_output(self, path: Optional[str], default_name: str) -> Path:
        """Explicit -o paths win; otherwise write default_name into output_dir."""
        if path:
            return Path(path)
        return self.output_dir / default_name
