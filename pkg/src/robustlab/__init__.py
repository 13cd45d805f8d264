"""robustlab: a simulation laboratory for spanning structures in random
sparsifications of pseudorandom graphs."""

from .graph import (
    Graph,
    build_graph,
    directed_pair_count,
    internal_edge_count,
    parse_edge_list,
    write_edge_list,
)
from .generators import (
    SparsifyParams,
    gen_bipartite_biregular,
    gen_gnp,
    gen_paley,
    gen_random_regular,
    sparsify,
)
from .mixing import check_almost_mixing, check_bijumbled, check_mixing
from .spectral import degree_band, second_eigenvalue
from .structure import (
    check_c_expander,
    count_isolated,
    external_neighborhood,
    find_hamiltonian_cycle,
    hall_violation_bipartite,
    max_matching,
    tutte_violation,
)
from .hypergraph import (
    TripleHypergraph,
    build_triangle_hypergraph,
    detect_B1,
    detect_F_config,
    detect_F_prime,
    parse_triple_list,
    sparsify_hypergraph,
    write_triple_list,
)
from .coupling import (
    CouplingParams,
    conditional_prob,
    coupling_marginal_stats,
    run_coupling,
    verify_coupling_embedding,
)
from .spread import (
    TriangleMatching,
    cover_down,
    estimate_spread,
    exact_triangle_factor,
    sample_almost_factor,
    sample_spread_factor,
    sample_vortex,
)
from .experiments import (
    ThresholdCurve,
    isolated_vertex_moments,
    robust_expander_events,
    scaling_fit,
    threshold_sweep,
    uncovered_vertex_expectation,
)

__version__ = "0.1.0"
