import logging

logger = logging.getLogger(__name__)
"""Base logger for dynamics package."""
