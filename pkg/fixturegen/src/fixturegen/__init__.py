"""Build-time generator for the 3-21G FCIDUMP fixtures and their sidecar files.

Nothing in here is needed at adaptforge runtime; the fixtures it produces are
committed into the main package.
"""

from fixturegen.geometries import GeometrySpec, benchmark_geometries
from fixturegen.generate import generate, verify

__all__ = ["GeometrySpec", "benchmark_geometries", "generate", "verify"]
