"""Orbit-level tools: invariant circles, rotation, exponents, periodic
orbits, invariant manifolds and parameter scans."""
from .circle import CircleGraph, FoldDetected, NoConvergence, graph_transform, invariance_residual
from .manifolds import (
    Crossing,
    HomoclinicReport,
    ManifoldCurve,
    Side,
    detect_homoclinic,
    find_crossings,
    grow_manifold,
)
from .orbits import (
    DeterminantMismatch,
    LyapunovEstimate,
    OrbitRecord,
    RotationEstimate,
    birkhoff_rotation,
    iterate,
    lyapunov_spectrum,
    rotation_number,
)
from .periodic import (
    MapFamily,
    PeriodicOrbit,
    Stability,
    TongueBoundary,
    find_periodic,
    fixed_point_boundary,
    fixed_point_oracle,
    seed_grid,
    tongue_boundary,
    tongue_tip,
)
from .scan import CellClass, CellResult, ScanTable, scan_rows, strange_attractor_scan

__all__ = [
    "CircleGraph", "FoldDetected", "NoConvergence", "graph_transform", "invariance_residual",
    "Crossing", "HomoclinicReport", "ManifoldCurve", "Side", "detect_homoclinic",
    "find_crossings", "grow_manifold", "DeterminantMismatch", "LyapunovEstimate",
    "OrbitRecord", "RotationEstimate", "birkhoff_rotation", "iterate", "lyapunov_spectrum",
    "rotation_number", "MapFamily", "PeriodicOrbit", "Stability", "TongueBoundary",
    "find_periodic", "fixed_point_boundary", "fixed_point_oracle", "seed_grid",
    "tongue_boundary", "tongue_tip", "CellClass", "CellResult", "ScanTable", "scan_rows", "strange_attractor_scan",
]
