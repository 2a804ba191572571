"""Return-map dynamics near a Bykov heteroclinic cycle.

Submodules: :mod:`bykov.model` (parameters), :mod:`bykov.maps` (return
map), :mod:`bykov.regimes` (thresholds and checkers),
:mod:`bykov.attractors` (orbit machinery), :mod:`bykov.hopf` (normal-form
flows) and :mod:`bykov.cli`.
"""
from ._backend import BACKEND
from .maps import DomainEscape, ReturnMap, eval_map, jacobian
from .model import CylinderPoint, DerivedConstants, ModelParams, derive_constants, params_for, validate
from .regimes import Regime, classify, curve_f, curve_g, stretch_P, two_turns_threshold

__all__ = [
    "BACKEND", "DomainEscape", "ReturnMap", "eval_map", "jacobian", "CylinderPoint",
    "DerivedConstants", "ModelParams", "derive_constants", "params_for", "validate",
    "Regime", "classify", "curve_f", "curve_g", "stretch_P", "two_turns_threshold",
]
