"""Numerical toolkit for de Branges spaces of finite-order structure functions."""

from . import backend
from .hb import (HBViolation, StructureFunction, builtin_fixture, kernel,
                 load_fixture, m_E, nabla)

__version__ = "0.1.0"

__all__ = ["backend", "HBViolation", "StructureFunction", "builtin_fixture",
           "kernel", "load_fixture", "m_E", "nabla"]
