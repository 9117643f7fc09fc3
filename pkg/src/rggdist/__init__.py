"""Distributions, connectivity, and entropy of random geometric graphs
whose nodes are uniform in a disk.

The package computes the exact outcome distribution of two- and
three-node graphs by quadrature against closed-form distance densities,
estimates arbitrary-size graphs by Monte Carlo, and chains per-edge
entropy bounds to larger graphs.  Every closed form has an independent
sampling or quadrature oracle next to it.
"""

from .bounds import BoundChain, BoundEntry, bound_chain, shearer_factor
from .connection import (
    ConnectionModel,
    ExponentialSoft,
    HardDisk,
    Tabulated,
    connect_prob,
    parse_model,
    sample_edge,
)
from .distances import (
    JointPdfCase,
    angle_pdf_trapezoid,
    classify_triple,
    conditional_joint_pdf3,
    enclosing_diameter_cdf,
    enclosing_diameter_pdf,
    joint_pdf3,
    joint_pdf3_cell_masses,
    joint_pdf3_values,
    joint_pdf3_via_conditioning,
    joint_pdf3_via_conditioning_many,
    marginal_pair_density,
    pair_pdf,
    pair_pdf_on_circle,
    triple_product_integral,
)
from .errors import AccuracyError, DomainError, UnsupportedError
from .geometry import (
    DiskDomain,
    Point2D,
    TriangleQuantities,
    TriangleSides,
    pair_count,
    pair_from_index,
    pair_index,
    phi,
    sample_point_in_disk,
    sample_points_in_disk,
    triangle_quantities,
)
from .graphdist import (
    EdgeVector,
    GraphPmf,
    connected_outcome_mask,
    entropy_bits,
    entropy_error_bound,
    exact_pmf,
    pmf_n2,
    pmf_n3,
    prob_complete,
    prob_connected,
    relabel_orbit_map,
)
from .montecarlo import (
    EntropyEstimate,
    Histogram3,
    McSettings,
    distance_histogram3,
    estimate_entropy,
    estimate_entropy_sweep_hard,
    estimate_pmf,
    sample_graph,
    substream,
)
from .quadrature import QuadratureResult, QuadratureSettings, integrate, integrate_many

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BoundChain",
    "BoundEntry",
    "ConnectionModel",
    "DiskDomain",
    "DomainError",
    "EdgeVector",
    "EntropyEstimate",
    "ExponentialSoft",
    "GraphPmf",
    "HardDisk",
    "Histogram3",
    "JointPdfCase",
    "McSettings",
    "Point2D",
    "QuadratureResult",
    "QuadratureSettings",
    "Tabulated",
    "TriangleQuantities",
    "TriangleSides",
    "UnsupportedError",
    "angle_pdf_trapezoid",
    "bound_chain",
    "classify_triple",
    "conditional_joint_pdf3",
    "connect_prob",
    "connected_outcome_mask",
    "distance_histogram3",
    "enclosing_diameter_cdf",
    "enclosing_diameter_pdf",
    "entropy_bits",
    "entropy_error_bound",
    "estimate_entropy",
    "estimate_entropy_sweep_hard",
    "estimate_pmf",
    "exact_pmf",
    "integrate",
    "integrate_many",
    "joint_pdf3",
    "joint_pdf3_cell_masses",
    "joint_pdf3_values",
    "joint_pdf3_via_conditioning",
    "joint_pdf3_via_conditioning_many",
    "marginal_pair_density",
    "pair_count",
    "pair_from_index",
    "pair_index",
    "pair_pdf",
    "pair_pdf_on_circle",
    "parse_model",
    "phi",
    "pmf_n2",
    "pmf_n3",
    "prob_complete",
    "prob_connected",
    "relabel_orbit_map",
    "sample_edge",
    "sample_graph",
    "sample_point_in_disk",
    "sample_points_in_disk",
    "shearer_factor",
    "substream",
    "triangle_quantities",
    "triple_product_integral",
]
