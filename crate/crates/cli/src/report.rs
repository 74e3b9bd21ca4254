use std::io::Write;

use rankframe::Tolerances;
use serde::Serialize;

pub const SCHEMA: &str = "rankframe.report/v1";

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Self {
            name: "rankframe",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartInfo {
    pub name: String,
    pub params: Vec<f64>,
    /// `zoo` or `file`.
    pub source: &'static str,
    pub path: Option<String>,
    /// `analytic` or `finite-difference`.
    pub derivatives: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Warning {
    pub kind: &'static str,
    pub row: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowError {
    pub kind: &'static str,
    pub message: String,
}

impl From<&rankframe::Error> for RowError {
    fn from(e: &rankframe::Error) -> Self {
        Self {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<R: Serialize, S: Serialize> {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: &'static str,
    pub args: Vec<String>,
    pub seed: u64,
    pub chart: Option<ChartInfo>,
    pub tolerances: Tolerances,
    pub rows: Vec<R>,
    pub summary: S,
    pub warnings: Vec<Warning>,
}

impl<R: Serialize, S: Serialize> Report<R, S> {
    pub fn write_json(&self, out: &mut impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }
}
