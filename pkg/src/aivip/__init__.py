"""Ancestral instrumental variables: conditioning-set discovery and estimation
from observational data with latent confounders."""

from .ancestral_iv import (
    IvRoles,
    VisibleEdgeError,
    conditioning_set_mag,
    conditioning_set_pag,
    instrumentalizes_mag,
    is_ancestral_iv_dag,
    is_conditional_iv,
    is_standard_iv,
    manipulate,
)
from .ci import CiDecision, CiError, DSepOracle, FisherZ, fisher_z, oracle_test
from .data import DataError, Dataset
from .estimator import (
    EstimateResult,
    EstimationError,
    EstimatorSpec,
    RankError,
    WeakInstrumentError,
    aivip,
    bias,
    ols,
    tsls,
    tslsciv,
    two_stage,
    wald_estimate,
)
from .graph import (
    GraphError,
    GraphKind,
    Mark,
    MixedGraph,
    bidirected,
    check_kind,
    directed,
    format_graph,
    parse_graph,
    possible_ancestors,
    read_graph,
    write_graph,
)
from .kernels import BACKEND
from .learner import LearnerConfig, learn_pag, learn_skeleton
from .projection import ProjectionSpec, dag_to_mag, is_definitely_visible, is_visible, markov_equivalent, pag_oracle
from .separation import d_sep_set, d_separated, m_connecting_path, m_separated
from .simulation import BenchmarkReport, SimSpec, generate, run_benchmark, true_dag

__version__ = "0.1.0"
