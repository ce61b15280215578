"""Structural break tests for linear panel data based on the largest
eigenvalues of partial-sample covariance matrices."""

from panelbreak.breaktest import (
    BreakTestResult,
    BridgePath,
    bridge_path,
    kolmogorov_cdf,
    kolmogorov_isf,
    kolmogorov_sf,
    run_test,
    sup_stat,
    sup_statistics,
    trim_bridge,
)
from panelbreak.errors import InvalidInput, NumericalFailure, PanelBreakError, ParseError
from panelbreak.linalg import EigenPairs, SymMatrix, sym_eigen_topk, trace
from panelbreak.lrv import (
    KernelSpec,
    LrvEstimate,
    andrews_bandwidth,
    autocovariances,
    bai_breakpoint,
    kernel_weight,
    long_run_variance,
    lrv_estimate,
    segment_demean,
    xi_series,
)
from panelbreak.montecarlo import McConfig, McResult, emit_table, read_table, run_power_curve, run_size_table
from panelbreak.panel import EigenProcess, PanelData, eigen_process, grand_mean, partial_cov
from panelbreak.rolling import RollingResult, emit_results, read_results, rolling_test, yield_curve_pipeline
from panelbreak.series import SeriesTable, first_difference, monthly_last, read_csv
from panelbreak.simulate import (
    DgpSpec,
    gen_loading_break,
    gen_mean_break,
    gen_null,
    generate,
    simulate,
)

__version__ = "0.1.0"
