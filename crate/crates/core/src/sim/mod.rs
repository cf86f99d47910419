//! Signal generation, error metrics, cost model and Monte Carlo experiments.

mod cost;
mod experiment;
mod metrics;
mod peaks;
mod signal;

pub use cost::{
    admm_cost, relative_complexity, table1_settings, zoom_budget, ComplexitySettings, ZoomBudget,
};
pub use experiment::{
    run_experiment, CustomExperiment, ExperimentConfig, ExperimentReport, ReportPoint, Series,
    TrialRow, DESK_2D_SAMPLES, EXPERIMENTS,
};
pub use metrics::{min_cost_assignment, mse, MetricsConfig, MseOutcome};
pub use peaks::{peak_variance_study, PeakStudyConfig, PeakVariancePoint};
pub use signal::{
    add_noise, add_white_noise, generate_signal, nonuniform_times, Component, NoiseSpec,
    SignalDraw, SignalSpec, MAX_SPACING_ATTEMPTS,
};
