class ExtractorError(Exception):
    """Raised for extraction problems with an actionable message."""
