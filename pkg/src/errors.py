"""Error types shared across the pipeline modules."""

from typing import Optional


class FramescopeError(ValueError):
    """A failure attributable to one pipeline module, with a remedy hint."""

    def __init__(self, module: str, message: str, hint: Optional[str] = None):
        self.module = module
        self.message = message
        self.hint = hint
        super().__init__(str(self))

    def __str__(self) -> str:
        text = f"[{self.module}] {self.message}"
        if self.hint:
            text += f" (hint: {self.hint})"
        return text


class ConfigError(FramescopeError):
    """Invalid configuration or command-line usage (exit status 1)."""

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__("config", message, hint)


class PipelineError(FramescopeError):
    """A module failed while processing data (exit status 2)."""
