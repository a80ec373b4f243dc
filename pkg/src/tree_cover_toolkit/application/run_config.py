from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class RunConfig(BaseModel):
    """One CLI invocation: command, input, algorithm parameters and output."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    algorithm: Optional[str] = None
    input_path: Optional[Path] = None
    input_format: Literal["auto", "metric", "graph"] = "auto"
    eps: Optional[float] = Field(default=None, gt=0, lt=1)
    alpha: Optional[float] = Field(default=None, ge=1)
    k: Optional[int] = Field(default=None, ge=1)
    c: Optional[float] = Field(default=None, gt=0)
    beta: Optional[float] = Field(default=None, ge=0.5)
    n: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    out_dir: Optional[Path] = None
    out_file: Optional[Path] = None
    size_cap: int = Field(default=20000, ge=1)
    threads: int = Field(default=1, ge=1)

    def to_report(self) -> dict:
        """Parameters embedded in reports, without paths and thread count."""
        return self.model_dump(
            mode="json",
            exclude_none=True,
            exclude={"input_path", "out_dir", "out_file", "threads"},
        )
