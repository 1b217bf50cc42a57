"""Bowen relations, quotients, degrees and injective codings of Markov shifts."""
from .shiftcore import EPSequence, InputError, ShiftGraph
from .relation import BowenFactor, SymRelation, canonical_relation, class_of, fiber, is_transitive, verify_bowen_property
from .quotient import build_quotient, degree_spectrum, fiber_census
from .degree import rec_degree, verify_thm_degree
from .recode import build_loop_graph, higher_block, locally_compact_recode, magic_subset_code, poset_enumerate
from .pipeline import run_pipeline, verify_coverage, verify_injectivity
from .census import first_return_series, lemma62_diagnostic, perron, periodic_counts

__version__ = "0.1.0"

__all__ = [
    "BowenFactor", "EPSequence", "InputError", "ShiftGraph", "SymRelation",
    "build_loop_graph", "build_quotient", "canonical_relation", "class_of", "degree_spectrum",
    "fiber", "fiber_census", "first_return_series", "higher_block", "is_transitive",
    "lemma62_diagnostic", "locally_compact_recode", "magic_subset_code", "perron",
    "periodic_counts", "poset_enumerate", "rec_degree", "run_pipeline", "verify_bowen_property",
    "verify_coverage", "verify_injectivity", "verify_thm_degree",
]
