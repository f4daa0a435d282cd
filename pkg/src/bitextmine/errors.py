"""Shared exception types."""


class DataFormatError(Exception):
    """A file failed structural validation: bad magic, truncation, malformed rows."""
