//! Command-line front end and the reporting utilities behind it.

pub mod app;
pub mod batch;
pub mod metrics;
pub mod plot;

pub use app::run;
pub use batch::{ablation, radius_sweep, run_batch, summarize};
pub use metrics::{gap_percent, saving_rate};
pub use plot::plot_solution;
