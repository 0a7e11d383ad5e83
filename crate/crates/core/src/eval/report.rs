//! Metric tables.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::sweep::{Method, MethodEval};
use crate::wavefield::Snr;

/// One method on one sweep cell. Training-only fields are empty for MFP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub snr_db: Snr,
    pub w_distort: f64,
    pub num_damages: usize,
    pub method: Method,
    pub ale: f64,
    pub ale_std: f64,
    pub ci95: Option<f64>,
    pub max_var: Option<f64>,
    pub mean_loglik: Option<f64>,
    pub wall_time_s: f64,
}

impl MetricRow {
    pub fn from_eval(snr_db: Snr, w_distort: f64, num_damages: usize, e: &MethodEval) -> Self {
        Self {
            snr_db,
            w_distort,
            num_damages,
            method: e.method,
            ale: e.ale.ale,
            ale_std: e.ale.ale_std,
            ci95: e.ci95,
            max_var: e.uncertainty.map(|u| u.max_component_variance),
            mean_loglik: e.uncertainty.map(|u| u.mean_loglik),
            wall_time_s: e.wall_time_s,
        }
    }

    /// Row with the wall-clock time zeroed, for reproducibility comparisons.
    pub fn timeless(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

pub const REPORT_NOTES: [&str; 3] = [
    "MFP is told the true damage count and, for several damages, which plate quadrants contain them.",
    "ci95 is the fraction of true damages with squared Mahalanobis distance to their selected component <= 5.991 (chi-square, 2 dof).",
    "mean_loglik is evaluated on the validation split; all other columns on the test split.",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    pub notes: Vec<String>,
    /// Resolved configuration that produced the report.
    pub provenance: serde_json::Value,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.10e}"))
}

impl MetricReport {
    pub fn new(mut rows: Vec<MetricRow>) -> Self {
        rows.sort_by(|a, b| {
            (a.snr_db.db(), a.w_distort, a.num_damages, a.method)
                .partial_cmp(&(b.snr_db.db(), b.w_distort, b.num_damages, b.method))
                .expect("finite sweep keys")
        });
        Self { rows, notes: REPORT_NOTES.iter().map(|s| s.to_string()).collect(), provenance: serde_json::Value::Null }
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn row(&self, method: Method) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "snr_db,w_distort,num_damages,method,ale,ale_std,ci95,max_var,mean_loglik,wall_time_s")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.10e},{:.10e},{},{},{},{:.3}",
                r.snr_db,
                r.w_distort,
                r.num_damages,
                r.method.name(),
                r.ale,
                r.ale_std,
                opt(r.ci95),
                opt(r.max_var),
                opt(r.mean_loglik),
                r.wall_time_s
            )?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}
