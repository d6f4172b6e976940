"""Cohen-Lenstra measures on partitions for sandpile groups of random graphs.

Exact-arithmetic implementations of the limiting p-Sylow partition measure
and its deformed and truncated relatives, a Markov-chain sampler for the base
measure, and a random-graph experiment harness that extracts p-Sylow
partitions from reduced Laplacians via Smith normal form.
"""

from .partitions import Partition, enumerate_partitions
from .qseries import (
    BoundedReal,
    d_lambda,
    deformed_constant,
    finite_qpoch,
    gaussian_binomial,
    odd_constant,
    verify_euler_identity,
    verify_qbinomial,
)
from .measures import (
    MassValue,
    PartitionDistribution,
    pmf,
    pmf_deformed,
    pmf_parts,
    pmf_size,
    pmf_truncated,
    pmf_via_conjugate,
    solve_parts_recursion,
    tabulate,
)
from .sampler import (
    SamplerConfig,
    empirical_distribution,
    initial_column_distribution,
    kernel,
    kernel_row,
    sample_partition,
)
from .sandpile import (
    ExperimentResult,
    Graph,
    GraphSampleRecord,
    erdos_renyi,
    p_sylow_partition,
    reduced_laplacian,
    run_experiment,
    sample_graph_record,
    smith_normal_form,
    sylow_valuations_mod_prime_power,
    tv_distance,
)
from .rng import SplitMix64, substream

__version__ = "0.1.0"
