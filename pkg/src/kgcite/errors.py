"""Exception types raised across the package."""


class KGCiteError(Exception):
    """Base class for all package errors."""


class IngestError(KGCiteError, ValueError):
    """Malformed or inconsistent input while building a knowledge graph."""

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class EmbeddingLoadError(IngestError):
    """Malformed embedding file."""


class QueryError(KGCiteError, KeyError):
    """Unknown query document or invalid ranking request."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ConfigError(KGCiteError, ValueError):
    """Invalid run configuration."""
