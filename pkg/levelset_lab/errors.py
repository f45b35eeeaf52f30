# levelset_lab/errors.py
from __future__ import annotations


# ---- Exceptions ------------------------------------------------------------
class LabError(Exception):
    """Root of every error raised by levelset_lab."""


class InputError(LabError, ValueError):
    """Invalid or non-finite argument."""


class GridError(LabError):
    """Empty grid or a grid coarser than the analysis requires."""


class GuardExceeded(LabError):
    """A cost guard (scale, enumeration size, vertex count) was exceeded."""


class LabelError(LabError, ValueError):
    """A difference label (a, b, q) violates its invariants. The message names the condition."""


class SeparationError(LabError):
    """Points (or targets) are not separated at the required scale."""


class ConstructionError(LabError):
    """Infeasible parameters for an example construction."""


class EmptyStructure(LabError):
    """No popular pairs, empty fork, or a comparable missing structure."""


class ConfigMissing(LabError):
    """Config file does not exist."""


class ConfigInvalid(LabError):
    """Config file failed validation."""


__all__ = [
    "LabError",
    "InputError",
    "GridError",
    "GuardExceeded",
    "LabelError",
    "SeparationError",
    "ConstructionError",
    "EmptyStructure",
    "ConfigMissing",
    "ConfigInvalid",
]
