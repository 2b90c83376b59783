"""Reference HTTP inference service for the caption-evaluation backends."""

from .app import create_app
from .fixtures import export_fixtures
from .models import HashModelBundle, RealModelBundle, build_bundle

__version__ = "0.1.0"

__all__ = [
    "create_app",
    "export_fixtures",
    "HashModelBundle",
    "RealModelBundle",
    "build_bundle",
    "__version__",
]
