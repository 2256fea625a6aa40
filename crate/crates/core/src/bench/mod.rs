//! Manufactured problems and study drivers.

mod problems;
mod study;

pub use problems::{
    exact_solution, layer_template_x, layer_template_y, problem_example1, problem_example2,
};
pub use study::{
    run_study, study_problem, write_records_csv, StudyConfig, StudyKind, StudyMethod, DEFAULT_N, EXTENDED_N, FD_SIGMA,
};
