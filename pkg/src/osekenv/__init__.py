"""Property-driven slicing of kernel code, OSEK/VDX simulation and scenario testing."""

from .codegraph import CodeGraph, build_graph
from .frontend import OilConfig, Property, load_oil, parse_minic, parse_oil
from .project import Project, default_project, load_project
from .slicer import CountConstraint, SliceMode, SliceResult, slice

__version__ = "0.1.0"

__all__ = [
    "CodeGraph",
    "CountConstraint",
    "OilConfig",
    "Project",
    "Property",
    "SliceMode",
    "SliceResult",
    "build_graph",
    "default_project",
    "load_oil",
    "load_project",
    "parse_minic",
    "parse_oil",
    "slice",
]
