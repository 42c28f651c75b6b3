"""Community-structured random SAT: generation, solving and experiments."""
from .model import (
    ClauseType,
    Instance,
    Layout,
    Mixture,
    build_incidence_multigraph,
    clause_type_of,
    community_of,
    make_clause,
    read_dimacs,
    sample_space_size,
    validate,
    write_dimacs,
)
from .generator import GeneratorConfig, decompose_single_community, sample_clause, sample_instance, stream

__version__ = "0.1.0"
