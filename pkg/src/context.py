"""CommandContext (shared dependencies of one CLI command)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .config import Settings


@dataclass(frozen=True)
class CommandContext:
    """Settings and output directory handed to every command."""

    settings: Settings
    out_dir: Path
    command: str

    def path(self, name: str) -> Path:
        """File ``name`` inside the output directory."""
        return self.out_dir / name
