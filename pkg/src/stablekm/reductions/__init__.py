from .appendix_d import appendix_d_family, phi_family, split_occurrences
from .cnf import CnfFormula, parse_dimacs
from .embed import ChainArtifacts, build_chain, cbt_to_kmeans, cover_cost, full_chain, kmeans_coordinates
from .provenance import ReductionProvenance
from .sat import clause_gadget_sizes, f_gadget, qsat_to_e3sat
from .tdm import (Role, TripleSystem, canonical_matching, e3sat_to_3dm, isolated_clause_gadget,
                  parse_triple_text, tdm_to_cbt, theorem_K, variable_canonical, variable_gadget)

__all__ = [
    "ChainArtifacts", "CnfFormula", "build_chain", "ReductionProvenance", "Role", "TripleSystem", "appendix_d_family",
    "canonical_matching", "cbt_to_kmeans", "clause_gadget_sizes", "cover_cost", "e3sat_to_3dm",
    "f_gadget", "full_chain", "isolated_clause_gadget", "kmeans_coordinates", "parse_dimacs",
    "parse_triple_text", "phi_family", "qsat_to_e3sat", "split_occurrences", "tdm_to_cbt",
    "theorem_K", "variable_canonical", "variable_gadget",
]
