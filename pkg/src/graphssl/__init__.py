"""Graph-based semi-supervised learning toolkit.

Builds similarity graphs over point clouds, computes regularized harmonic
soft labels, trains max-margin graph cuts on the induced labels, provides
manifold-regularized and plain max-margin baselines, evaluates
stability-based generalization bounds, and ships a reproducible experiment
harness with a small CLI.
"""

from .bounds import (
    BoundInputs,
    BoundReport,
    EmpiricalRisks,
    assemble_bound_p1,
    assemble_bound_p2,
    empirical_risks,
    inductive_error,
    make_bound_report,
    report_to_json,
    stability_beta,
    transductive_error,
)
from .cuts import GraphCutConfig, GraphCutResult, misclassification_rate, train_graph_cut
from .data import (
    BinaryTask,
    Dataset,
    ParseError,
    SchemaError,
    SplitSpec,
    StandardizationStats,
    apply_standardization,
    compute_standardization,
    decompose_binary_tasks,
    load_csv_dataset,
    make_split,
)
from .graphs import (
    GraphLaplacian,
    PowerIterationError,
    SimilarityGraph,
    TransitionMatrix,
    WeightSpec,
    build_knn_graph,
    build_radius_graph,
    laplacian,
    largest_laplacian_eigenvalue,
    load_edge_list,
    save_edge_list,
    transition_matrix,
)
from .harmonic import (
    AbsorptionDecomposition,
    HarmonicConfig,
    HarmonicSolution,
    InducedSet,
    SingularSystemError,
    SoftHarmonicConfig,
    SolverConvergenceError,
    absorption_decomposition,
    export_solution_csv,
    solve_hard,
    solve_soft,
    threshold_labels,
)
from .harness import (
    ExperimentConfig,
    ResultRow,
    ResultTable,
    SyntheticProblem,
    aggregate,
    emit_reports,
    generate_synthetic,
    resolve_kernel,
    run_synthetic_study,
    run_threshold_study,
    run_uci_protocol,
)
from .manifold import (
    LapSvmConfig,
    axis_aligned_deltas,
    manifold_quadratic_form,
    train_lapsvm,
)
from .svm import (
    KernelSpec,
    SvmConfig,
    SvmConvergenceError,
    SvmModel,
    decision_scores,
    export_model_csv,
    gram_matrix,
    hinge_loss,
    kernel_matrix,
    predict,
    train_svm,
)

__version__ = "0.1.0"
