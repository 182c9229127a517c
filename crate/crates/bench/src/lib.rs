//! Experiment harness for `rpbm`: configs, runs, reference values, CSV
//! traces, SVG plots and trace audits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod reference;
pub mod trace;

pub use error::{BenchError, Result};

/// Short label such as `exact/parallel` for legends and logs.
pub fn primitives_label(cfg: &config::ExperimentConfig) -> String {
    let r = match cfg.primitives {
        rpbm::RetractionKind::Exact => "exact",
        rpbm::RetractionKind::FirstOrder => "retraction",
    };
    let t = match cfg.transport_kind() {
        rpbm::TransportKind::Parallel => "parallel",
        rpbm::TransportKind::Projection => "projection",
    };
    format!("{r}/{t}")
}
