//! Fixture generators, verification suites and persisted reports for `lipfree`.

pub mod diff;
pub mod error;
pub mod generate;
pub mod report;
pub mod suites;

pub use diff::{load_report, render, report_diff, DiffRow};
pub use error::{CliError, Result};
pub use generate::{GenSpec, Generator, POINT_CAP};
pub use report::{CheckKind, CheckRecord, Report};
pub use suites::{load_space, run_suite, write_report, SpaceSource, Suite, SuiteConfig};
