"""Jet-based exterior calculus and a verifier for HKT and lcHK identities."""

from .errors import (
    DegenerateMetricError,
    HKTLabError,
    JetDomainError,
    NotHKTError,
    NotLCHKError,
    PreconditionError,
    SingularPointError,
    SpecSyntaxError,
    UnknownCheckError,
    UnsupportedOrderError,
)
from .jets import Jet, ScalarField, coordinate_jet, jet_lift, sample_points
from .quaternionic import HypercomplexGeometry, hkt_from_lchk, lchk_from_hkt, normalized_lambda
from .runner import SampleConfig, VerificationReport, run_check, run_suite
from .zoo import build_geometry, flat_hyperkahler, hopf_hkt, hopf_lchk_cover, parse_geometry_spec, product_hkt

__version__ = "0.1.0"
