//! Sweeps over error probability and qubit count, model fits and result files.

pub mod fit;
pub mod io;
pub mod sweep;

pub use fit::{
    fit_all, fit_exponential, fit_saturating_exponential, linear_fit, n_sweep_summary, FitRecord,
    FitResult, LinearFit, NSweepSummary,
};
pub use io::{emit_results, read_rows_csv, rows_to_csv_string, write_figure_data, write_rows_csv};
pub use sweep::{linspace, run_point, run_sweep, SeriesKey, SweepConfig, SweepRow, FIG2_THETAS};
