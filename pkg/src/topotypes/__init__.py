"""Classification of finite group actions on curves with rational quotient."""

from .groups import FiniteGroup, build_group, conjugacy_classes, generates, standard_group
from .aut import automorphism_group
from .signatures import Signature, SignatureStore, enumerate_signatures, genus
from .classifier import ClassifyConfig, TopologicalType, classify_Gm, prepare_group
from .oracle import brute_force_orbits

__all__ = [
    "FiniteGroup", "build_group", "conjugacy_classes", "generates", "standard_group",
    "automorphism_group", "Signature", "SignatureStore", "enumerate_signatures", "genus",
    "ClassifyConfig", "TopologicalType", "classify_Gm", "prepare_group", "brute_force_orbits",
]
