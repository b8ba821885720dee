"""Single-server private linear transformation over prime fields.

Core entry points::

    from iplt import PrimeField, Demand, gen_query, answer, recover
"""

from .audit import monte_carlo_audit, recoverability_fuzz, structural_posterior
from .capacity import CapacityBounds, closed_form_converse, compute_bounds, ilp_converse_oracle
from .codes import embed_mds_generator, extend_pinned_mds, generator_from_parity, parity_check
from .errors import (
    DegeneratePoints,
    FieldTooSmall,
    InstanceTooLarge,
    InvalidParameters,
    InversionOfZero,
    IpltError,
    NotMds,
    RankError,
    SamplingExhausted,
    ShapeError,
    StateError,
)
from .field import PrimeField, field_inv
from .linalg import inverse, matmul, nullspace, rank, rref, solve
from .mds import cauchy_matrix, is_mds, sample_mds
from .protocol import (
    Answer,
    BlockLayout,
    ClientState,
    Demand,
    Query,
    QueryFixtures,
    answer,
    gen_query,
    make_layout,
    recover,
)

__all__ = [
    "Answer", "BlockLayout", "CapacityBounds", "ClientState", "Demand", "DegeneratePoints",
    "FieldTooSmall", "InstanceTooLarge", "InvalidParameters", "InversionOfZero", "IpltError",
    "NotMds", "PrimeField", "Query", "QueryFixtures", "RankError", "SamplingExhausted",
    "ShapeError", "StateError", "answer", "cauchy_matrix", "closed_form_converse",
    "compute_bounds", "embed_mds_generator", "extend_pinned_mds", "field_inv", "gen_query",
    "generator_from_parity", "ilp_converse_oracle", "inverse", "is_mds", "make_layout",
    "matmul", "monte_carlo_audit", "nullspace", "parity_check", "rank", "recover",
    "recoverability_fuzz", "rref", "sample_mds", "solve", "structural_posterior",
]
