"""Structured R-matrices, their orbits, Gauss currents and RLL verification."""

from .currents import delta_normalization, phi, psi_e, psi_f, structure_functions
from .family import FamilyOrbit, RhoSpec, identity_rho, mostly_identity, orbit, period_recursion, period_replace, phase_shift, tau
from .gauss import BlockMatrix2, GaussFactors, SingularBlockError, compose, decompose, invert
from .ncpoly import CurrentSymbol, NCPoly, SpectralTag, TagTable
from .report import CheckReport, Sampler
from .rll_verify import expand_components, verify_components, verify_EF_relations
from .rmatrix import PoleError, StructuredR, builtin_rational, builtin_trig, check_unitarity, check_ybe, eval_r, r21
from .rules import RuleSet, instantiate_catalog, normal_order

__all__ = [
    "BlockMatrix2",
    "CheckReport",
    "CurrentSymbol",
    "FamilyOrbit",
    "GaussFactors",
    "NCPoly",
    "PoleError",
    "RhoSpec",
    "RuleSet",
    "Sampler",
    "SingularBlockError",
    "SpectralTag",
    "StructuredR",
    "TagTable",
    "builtin_rational",
    "builtin_trig",
    "check_unitarity",
    "check_ybe",
    "compose",
    "decompose",
    "delta_normalization",
    "eval_r",
    "expand_components",
    "identity_rho",
    "instantiate_catalog",
    "invert",
    "mostly_identity",
    "normal_order",
    "orbit",
    "period_recursion",
    "period_replace",
    "phase_shift",
    "phi",
    "psi_e",
    "psi_f",
    "r21",
    "structure_functions",
    "tau",
    "verify_EF_relations",
    "verify_components",
]
