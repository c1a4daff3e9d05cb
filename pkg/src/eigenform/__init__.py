"""Formation control of multi-agent systems by eigenstructure assignment."""

from __future__ import annotations

from .assign import (
    KernelBasis,
    RoundTrip,
    SynthesisResult,
    assign_distinct,
    assign_jordan,
    kernel_basis,
    roundtrip,
    synthesize,
)
from .errors import *  # noqa: F401,F403
from .graph import CommGraph, extract_graph, has_spanning_tree, is_2_rooted, root_pairs, roots
from .hierarchy import (
    BenchTable,
    HierResult,
    Partition,
    balanced_partition,
    bench_compare,
    hierarchical_synthesize,
)
from .model import (
    CircularMotion,
    EigenSpec,
    JordanBlock,
    MultiAgentSystem,
    RigidFormation,
    ScalableFormation,
    SystemShape,
    is_controllable,
    is_self_conjugate,
    validate_spec,
)
from .motion import RigidController, circular_spec, circular_synthesis, rigid_controller, rigid_rhs, rigid_spec
from .sim import (
    ConvergenceReport,
    SimConfig,
    Trajectory,
    predict_limit,
    report,
    simulate_linear,
    simulate_rigid,
)
from .topology import (
    ConstrainedResult,
    TopologyConstraint,
    constrain_zero,
    cyclic_spec,
    line_spec,
    predict_absent_edges,
    simo_line_formation_set,
    single_input_spec,
    star_spec,
    verify_formation,
)

__version__ = "0.1.0"
