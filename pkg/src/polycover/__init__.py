"""Covering convex polygons with congruent circles by hexagonal initialization,
quasi-physical radius expansion and boundary encirclement."""
from .boundary import EncircleResult, LagrangianParams, encircle, generate_encircling_points
from .coverage import AreaEstimator, EstimatorParams, covered_area
from .dynamics import DynamicsParams, ExpansionSystemState, expand_radii, relax
from .errors import (
    CoincidentCenters,
    DegenerateInput,
    InfeasibleFit,
    InvalidArgument,
    NonConvergence,
    NumericalBlowup,
    PolycoverError,
)
from .geometry import (
    CircleConfiguration,
    ConvexPolygon,
    clipped_voronoi,
    convex_hull,
    halfplane_cut_area,
    lens_area,
    minimum_bounding_rectangle,
    signed_distance,
)
from .initialization import InitParams, generate_hex_lattice, initialize
from .metrics import RunReport, compute_metrics
from .pipeline import PolygonSpec, RunConfig, generate_polygon, run_pipeline
from .svg import render_svg

__version__ = "0.1.0"
