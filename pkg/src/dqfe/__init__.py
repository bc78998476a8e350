"""Quantum quench feature extraction for tabular classification.

Pipeline: encode each scaled feature vector into a spin-glass Hamiltonian
whose couplings carry pairwise mutual information, quench it with a
single-step counterdiabatic impulse circuit, measure one- and two-body Z
expectations as new features, and benchmark classical vs quantum vs
hybrid feature sets with a from-scratch random forest.
"""

from .analysis import ConfusionMatrix, FisherReport, PcaProjection, confusion, fisher_mean, pca2
from .cd_circuit import (
    Gate,
    ImpulseParams,
    QuantumCircuit,
    build_cd_circuit,
    decompose_two_body,
    export_qasm,
    parse_qasm,
)
from .dataset import (
    FeatureTable,
    ScalingSpec,
    apply_scaling,
    fit_scaling,
    load_table,
    save_table,
)
from .encoder import (
    IsingHamiltonian,
    TransverseFieldSpec,
    encode_hamiltonian,
    hamiltonian_energy,
)
from .features import extract_quantum_features, features_from_counts, make_hybrid
from .forest import (
    CvReport,
    ForestParams,
    TrainedForest,
    cross_validate,
    forest_from_json,
    forest_to_json,
    grid_search,
    multi_seed_eval,
    predict,
    train_forest,
)
from .kernels import backend_name
from .mi_graph import (
    InteractionGraph,
    MiMatrix,
    build_graph,
    estimate_mi,
    mi_matrix,
    optimize_chain,
)
from .pipeline import PipelineConfig, build_config, run_benchmark
from .simulator import (
    ShotCounts,
    Statevector,
    apply_gate,
    estimate_z_expectations,
    exact_z_expectations,
    init_minus_state,
    run,
    sample_shots,
)

__version__ = "0.1.0"
