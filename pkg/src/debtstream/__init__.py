"""debtstream: position firms in inter-firm credit networks.

Scores every firm by its average distance from the banking sector along
chains of inter-firm credit (the financial analogue of a trophic level),
plus the machinery around that score: validation and pruning of credit
networks, sector aggregation, residual-credit reconstruction, edge-removal
what-if analysis, rank-correlation statistics, and a deterministic
synthetic-network generator.

The core API is sklearn-shaped: ``DebtStreamness`` is an estimator over
``CreditNetwork`` objects, and the network-to-network operations (pruning,
truncation, reconstruction, aggregation, edge removal) are transformers,
so pipelines compose with the wider ecosystem.
"""

from .errors import (
    DebtstreamError,
    DegenerateInput,
    DegenerateScope,
    EmptyAggregate,
    EmptyIntersection,
    EmptyNetwork,
    InvalidConfig,
    MissingTotals,
    NegativeAmount,
    NoConvergence,
    NonPositiveSample,
    NoSuchEdge,
    NotPruned,
    NoZeroSlots,
    ParseError,
    SelfLoan,
    SingularSystem,
    UnknownFirm,
    ValidationError,
    ZeroDebtFirm,
)
from .network import (
    Component,
    CreditNetwork,
    ShareMatrix,
    UndefinedFirmPruner,
    bank_reachable,
    build_network,
    components,
    prune_undefined,
    share_matrices,
    total_debt,
)
from .streamness import (
    DebtStreamness,
    StreamnessResult,
    alternative_streamness_forms,
    bank_share,
    series_streamness,
    solve_streamness,
)
from .aggregation import (
    ClassCrossTab,
    SectorAggregator,
    SectorNetwork,
    aggregate_by_sector,
    classification_crosstab,
)
from .reconstruction import (
    FullReconstruction,
    ReconstructionReport,
    Residual,
    SparseReconstruction,
    TopCreditorTruncation,
    compare_reconstructions,
    reconstruct_full,
    reconstruct_sparse,
    residual,
    truncate_top_creditors,
)
from .analysis import (
    EdgeRemoval,
    EdgeRemovalReport,
    LoopReport,
    bankshare_ds_correlation,
    detect_loops,
    ds_histogram,
    edge_removal_report,
    remove_edge,
)
from .stats import LogNormalFit, fit_lognormal, kendall, pearson, spearman
from .synth import SynthConfig, demo_loop_network, generate

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # data model
    "CreditNetwork",
    "ShareMatrix",
    "Component",
    "StreamnessResult",
    "SectorNetwork",
    "ClassCrossTab",
    "Residual",
    "ReconstructionReport",
    "EdgeRemovalReport",
    "LoopReport",
    "LogNormalFit",
    "SynthConfig",
    # estimators / transformers
    "DebtStreamness",
    "UndefinedFirmPruner",
    "SectorAggregator",
    "TopCreditorTruncation",
    "FullReconstruction",
    "SparseReconstruction",
    "EdgeRemoval",
    # operations
    "build_network",
    "total_debt",
    "share_matrices",
    "components",
    "prune_undefined",
    "bank_reachable",
    "solve_streamness",
    "series_streamness",
    "alternative_streamness_forms",
    "bank_share",
    "aggregate_by_sector",
    "classification_crosstab",
    "residual",
    "reconstruct_full",
    "reconstruct_sparse",
    "truncate_top_creditors",
    "compare_reconstructions",
    "remove_edge",
    "edge_removal_report",
    "detect_loops",
    "bankshare_ds_correlation",
    "ds_histogram",
    "pearson",
    "spearman",
    "kendall",
    "fit_lognormal",
    "generate",
    "demo_loop_network",
    # errors
    "DebtstreamError",
    "ValidationError",
    "NegativeAmount",
    "SelfLoan",
    "UnknownFirm",
    "ParseError",
    "ZeroDebtFirm",
    "EmptyNetwork",
    "NotPruned",
    "SingularSystem",
    "NoConvergence",
    "EmptyAggregate",
    "MissingTotals",
    "NoZeroSlots",
    "NoSuchEdge",
    "EmptyIntersection",
    "DegenerateScope",
    "DegenerateInput",
    "NonPositiveSample",
    "InvalidConfig",
]
