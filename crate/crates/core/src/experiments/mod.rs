//! Synthetic problem generation, penalty tuning and the experiment drivers.

mod drivers;
mod generate;
mod spec;
mod table;
mod tuning;

pub use drivers::{
    augmented_step, augmented_study, compare_solvers, loglog_slope, run_experiment, spec_sha256, timing_samples,
    vector_sha256, AugmentedStudy, ComparisonRun, OutputFile, RunRecord, TimingSample,
};
pub use generate::{
    gen_matrix, gen_sparse_signal, make_problem, stream_rng, Component, EnsembleKind, EntryLaw, MagnitudeLaw,
    MatrixEnsemble, NoiseSpec, ProblemSpec,
};
pub use spec::{ExperimentSpec, IterationCountSpec, TimingSpec, VaryBetaSpec, VaryMSpec, EXPERIMENT_NAMES};
pub use table::{median, Cell, Table};
pub use tuning::{alpha_zero_threshold, tune_alpha_augmented, tune_alpha_for_support, tune_alpha_with, AlphaTuning};
