"""Multi-level agent simulation framework: reactive, routine, cognitive and
collective agents exchanging speech acts on a deterministic round scheduler."""

__version__ = "1.0.0"
