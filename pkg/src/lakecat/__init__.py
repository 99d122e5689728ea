"""lakecat: data-lake ingestion gateway and metadata catalog."""

__version__ = "0.1.0"

from .config import Config
from .lake import Lake

__all__ = ["Config", "Lake", "__version__"]
