"""Directed causal graph learning over mixed continuous/categorical data.

Pipeline pieces: a mixed-type likelihood-ratio independence test, the
PC-stable / CPC-stable searches and their MGM-seeded hybrids, stability
selection, a synthetic-network simulator, and pattern-based evaluation
metrics. Hot regression kernels run in a compiled extension when
available (``mixedcausal._kernels.BACKEND`` tells which one is active).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .citest import CiResult, CiTester, choose_dependent, ci_test
from .cpss import CpssConfig, CpssResult, EdgeFrequencies, cpss_run
from .formats import (
    read_dataset,
    read_graph,
    read_meta,
    write_dataset,
    write_graph,
    write_meta,
)
from .metrics import EvalReport, dag_to_cpdag, evaluate, shd
from .mgm import MgmConfig, MgmParams, MgmResult, mgm_learn, mgm_objective
from .model import (
    Edge,
    Mark,
    MarkedGraph,
    MixedDataset,
    VariableMeta,
    edge_type,
    is_dag,
    skeleton,
)
from .regress import (
    DesignMatrix,
    FitResult,
    chi_squared_sf,
    fit_linear,
    fit_multinomial,
)
from .search import (
    SearchConfig,
    SepsetMap,
    cpc_stable,
    meek_rules,
    mgm_cpcs,
    mgm_pcs,
    orient_v_structures,
    pc_stable,
    pcs_skeleton,
)
from .simulate import (
    HD_PRESET,
    LD_PRESET,
    SemModel,
    SimConfig,
    make_rng,
    sample_dag,
    sample_parameters,
    simulate_data,
    simulate_dataset,
)

__version__ = "0.1.0"
