//! Scenario language for the cvfaraday simulator.
//!
//! A scenario is a line-oriented file of declarations (`param`, `ensemble`,
//! `beam`), steps (`pass`, `measure`, `rotate`), reports and sweeps:
//!
//! ```text
//! ensemble A1 n=1
//! ensemble A2 n=1
//! beam L1
//! pass L1 A1 kappa=1 alpha=0
//! pass L1 A2 kappa=1 alpha=0
//! measure L1 x fixed=0
//! report duan A1 A2 lambda=1 as duan_lambda1
//! ```
//!
//! Consecutive `pass` lines of one beam form a single transit. Reports are
//! evaluated on the state at the point where they appear.

pub mod ast;
pub mod emit;
pub mod exec;
pub mod figures;
pub mod parse;
pub mod pretty;

pub use ast::{ScenarioAst, SourceSpan, Spanned};
pub use emit::{emit_result, emit_table, format_number, Format};
pub use exec::{execute, execute_with, sweep_scenario, RunError};
pub use figures::{figure_table, Figure};
pub use parse::{parse, parse_bytes, ParseError, ParseErrorKind};
pub use pretty::pretty_print;
