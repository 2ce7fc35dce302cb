"""Input front ends: mini-C fact extraction, OIL configuration, facts files."""

from .facts import FactKind, FactRecord, dump_facts, dumps_facts, load_facts, loads_facts
from .minic import parse_minic, parse_minic_files, parse_units
from .oil import OilConfig, TaskConfig, load_oil, parse_oil
from .property import Property

__all__ = [
    "FactKind",
    "FactRecord",
    "OilConfig",
    "Property",
    "TaskConfig",
    "dump_facts",
    "dumps_facts",
    "load_facts",
    "load_oil",
    "loads_facts",
    "parse_minic",
    "parse_minic_files",
    "parse_oil",
    "parse_units",
]
