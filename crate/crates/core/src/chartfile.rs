//! Chart definition files.
//!
//! A chart file is one UTF-8 JSON document:
//!
//! ```json
//! {
//!   "name": "half-space",
//!   "domain": ["-inf", "inf", "-inf", "inf", 0.1, 10],
//!   "g": ["1/z^2", "0", "0", "1/z^2", "0", "1/z^2"],
//!   "epsilon": -1
//! }
//! ```
//!
//! `domain` lists `xlo, xhi, ylo, yhi, zlo, zhi`; bounds are numbers or the
//! strings `"inf"`, `"+inf"`, `"-inf"`. `g` holds the upper triangle
//! `g11, g12, g13, g22, g23, g33` in the expression language of [`crate::expr`].

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Compiled};
use crate::jet::Jet2;
use crate::metric::{check_positive_definite, Domain, Mat3, MetricChart, MetricField, MetricJet};
use crate::Point;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Word(String),
}

impl Bound {
    fn value(&self) -> Result<f64> {
        match self {
            Bound::Num(v) => Ok(*v),
            Bound::Word(w) => match w.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(Error::ChartFormat(format!("bad domain bound `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChartFile {
    name: String,
    domain: [Bound; 6],
    g: [String; 6],
    #[serde(default)]
    epsilon: Option<f64>,
}

/// A parsed chart file.
#[derive(Debug, Clone)]
pub struct LoadedChart {
    pub chart: MetricChart,
    pub epsilon: Option<f64>,
    /// Component sources as written, upper triangle.
    pub components: [String; 6],
}

/// Upper-triangle slot `(i, j)` for each of the six stored components.
const SLOTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

struct ExprField {
    g: [Compiled; 6],
    exact: bool,
}

impl ExprField {
    fn matrix<S: crate::jet::Real>(&self, p: &[S; 3]) -> [[S; 3]; 3] {
        let mut m = [[S::cst(0.0); 3]; 3];
        for (k, &(i, j)) in SLOTS.iter().enumerate() {
            let v = self.g[k].eval(p);
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }
}

impl MetricField for ExprField {
    fn metric(&self, p: &Point) -> Mat3 {
        let m = self.matrix(p);
        Mat3::from_fn(|i, j| m[i][j])
    }

    fn jet(&self, p: &Point) -> Option<MetricJet> {
        if !self.exact {
            return None;
        }
        let m = self.matrix(&Jet2::seed(p));
        Some(MetricJet {
            g: Mat3::from_fn(|i, j| m[i][j].v),
            dg: std::array::from_fn(|a| Mat3::from_fn(|i, j| m[i][j].d[a])),
            d2g: Some(std::array::from_fn(|a| {
                std::array::from_fn(|b| Mat3::from_fn(|i, j| m[i][j].h[a][b]))
            })),
        })
    }
}

/// Parses a chart document. With `exact_derivatives` the expressions are
/// differentiated by forward-mode jets instead of finite differences.
pub fn parse_chart(src: &str, exact_derivatives: bool) -> Result<LoadedChart> {
    let raw: RawChartFile =
        serde_json::from_str(src).map_err(|e| Error::ChartFormat(e.to_string()))?;
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for a in 0..3 {
        lo[a] = raw.domain[2 * a].value()?;
        hi[a] = raw.domain[2 * a + 1].value()?;
        if lo[a].is_nan() || hi[a].is_nan() || !(lo[a] < hi[a]) {
            return Err(Error::ChartFormat(format!(
                "domain bounds for coordinate {a} are not increasing"
            )));
        }
    }
    let mut compiled = Vec::with_capacity(6);
    for src in &raw.g {
        compiled.push(parse_expr(src)?.compile());
    }
    let g: [Compiled; 6] = compiled.try_into().expect("six components");
    let domain = Domain::new(lo, hi);
    let field = ExprField {
        g,
        exact: exact_derivatives,
    };
    for p in domain.lattice(3) {
        let m = field.metric(&p);
        if check_positive_definite(&m, &p).is_err() {
            return Err(Error::NotPositiveDefinite { point: p });
        }
    }
    let chart = MetricChart::new(raw.name, domain, Arc::new(field));
    Ok(LoadedChart {
        chart,
        epsilon: raw.epsilon,
        components: raw.g,
    })
}

pub fn load_chart(path: impl AsRef<Path>, exact_derivatives: bool) -> Result<LoadedChart> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_chart(&src, exact_derivatives)
}
