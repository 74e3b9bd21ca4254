//! Builtin charts with exact derivatives and known curvature tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::PointClass;
use crate::jet::Real;
use crate::metric::{Domain, GenericMetric, MetricChart};
use crate::Point;

/// Expected values for a zoo chart, valid at every point of the chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Known {
    /// The ε at which the class below holds.
    pub epsilon: f64,
    /// Sectional curvatures `(λ, sec(e₁,e₂), Λ)` of the ordered Ricci frame.
    pub sectional: [f64; 3],
    /// Ricci eigenvalues, ascending.
    pub ricci: [f64; 3],
    pub class: PointClass,
    /// `m` when the class is generic.
    pub m: Option<f64>,
    /// Coordinate directions known to be isocurved at every point (empty for
    /// isotropic charts, where all directions are, and for generic charts, where
    /// they form the cone `x₃ = 0, x₂ = ±m x₁`).
    pub isocurved: Vec<[f64; 3]>,
    /// Left-invariant or otherwise homogeneous: curvature data is constant.
    pub homogeneous: bool,
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub params: Vec<f64>,
    pub chart: MetricChart,
    pub known: Known,
    /// A comfortable interior point for examples and geodesic starts.
    pub base_point: Point,
}

/// Name, parameter names with defaults, and a one-line description.
#[derive(Debug, Clone, Serialize)]
pub struct ZooInfo {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub description: &'static str,
}

pub fn zoo_list() -> Vec<ZooInfo> {
    vec![
        ZooInfo {
            name: "euclidean3",
            params: vec![],
            description: "flat R^3, Cartesian chart",
        },
        ZooInfo {
            name: "sphere3",
            params: vec![("r", 1.0)],
            description: "round 3-sphere of radius r, hyperspherical polar chart (chi, theta, phi) away from the poles",
        },
        ZooInfo {
            name: "hyperbolic3",
            params: vec![],
            description: "hyperbolic space, upper half-space chart (dx^2+dy^2+dz^2)/z^2",
        },
        ZooInfo {
            name: "product_h2xr",
            params: vec![("kappa", -1.0)],
            description: "H^2(kappa) x R for kappa < 0, (dx^2+dy^2)/(|kappa| y^2) + dz^2",
        },
        ZooInfo {
            name: "product_s2xr",
            params: vec![("kappa", 1.0)],
            description: "S^2(kappa) x R for kappa > 0, (dtheta^2+sin^2 theta dphi^2)/kappa + dz^2",
        },
        ZooInfo {
            name: "nil",
            params: vec![],
            description: "Heisenberg group, dx^2 + dy^2 + (dz - x dy)^2",
        },
        ZooInfo {
            name: "sol",
            params: vec![],
            description: "Sol group, e^(2z) dx^2 + e^(-2z) dy^2 + dz^2",
        },
        ZooInfo {
            name: "berger",
            params: vec![("tau", 0.8)],
            description: "left-invariant metric on SU(2) with sigma-coefficients (1, tau, tau^2)/4 in Euler angles (theta, phi, psi)",
        },
    ]
}

struct Euclidean;
impl GenericMetric for Euclidean {
    fn eval<S: Real>(&self, _p: [S; 3]) -> [[S; 3]; 3] {
        diag(S::cst(1.0), S::cst(1.0), S::cst(1.0))
    }
}

struct Sphere {
    r2: f64,
}
impl GenericMetric for Sphere {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let r2 = S::cst(self.r2);
        let sc = p[0].sin();
        let st = p[1].sin();
        diag(r2, r2 * sc * sc, r2 * sc * sc * st * st)
    }
}

struct HalfSpace;
impl GenericMetric for HalfSpace {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let c = S::cst(1.0) / (p[2] * p[2]);
        diag(c, c, c)
    }
}

struct HyperbolicPlaneTimesLine {
    scale: f64,
}
impl GenericMetric for HyperbolicPlaneTimesLine {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let c = S::cst(self.scale) / (p[1] * p[1]);
        diag(c, c, S::cst(1.0))
    }
}

struct SphereTimesLine {
    scale: f64,
}
impl GenericMetric for SphereTimesLine {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let c = S::cst(self.scale);
        let s = p[0].sin();
        diag(c, c * s * s, S::cst(1.0))
    }
}

struct Nil;
impl GenericMetric for Nil {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let one = S::cst(1.0);
        let zero = S::cst(0.0);
        let x = p[0];
        [[one, zero, zero], [zero, one + x * x, -x], [zero, -x, one]]
    }
}

struct Sol;
impl GenericMetric for Sol {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let e = (p[2] + p[2]).exp();
        diag(e, S::cst(1.0) / e, S::cst(1.0))
    }
}

/// `Σ cᵢ σᵢ²` with `σ₁ = sinψ dθ − cosψ sinθ dφ`, `σ₂ = cosψ dθ + sinψ sinθ dφ`,
/// `σ₃ = dψ + cosθ dφ` in coordinates `(θ, φ, ψ)`.
struct Berger {
    c: [f64; 3],
}
impl GenericMetric for Berger {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
        let (th, psi) = (p[0], p[2]);
        let (st, ct) = (th.sin(), th.cos());
        let (sp, cp) = (psi.sin(), psi.cos());
        let zero = S::cst(0.0);
        let one = S::cst(1.0);
        let sigma = [[sp, -(cp * st), zero], [cp, sp * st, zero], [zero, ct, one]];
        let mut g = [[zero; 3]; 3];
        for (k, row) in sigma.iter().enumerate() {
            let ck = S::cst(self.c[k]);
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] = g[i][j] + ck * row[i] * row[j];
                }
            }
        }
        g
    }
}

fn diag<S: Real>(a: S, b: S, c: S) -> [[S; 3]; 3] {
    let z = S::cst(0.0);
    [[a, z, z], [z, b, z], [z, z, c]]
}

const INF: f64 = f64::INFINITY;
const PI: f64 = std::f64::consts::PI;

fn sorted(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    v
}

fn isotropic(k: f64) -> Known {
    Known {
        epsilon: k,
        sectional: [k; 3],
        ricci: [2.0 * k; 3],
        class: PointClass::Isotropic,
        m: None,
        isocurved: vec![],
        homogeneous: true,
    }
}

/// Curvature of the left-invariant metric `Σ cᵢσᵢ²` from Milnor's structure
/// constants: returns `(sec(f₂,f₃), sec(f₁,f₃), sec(f₁,f₂))` and `(Ric f₁, Ric f₂, Ric f₃)`
/// for the orthonormal left-invariant frame `fᵢ`.
pub fn berger_curvatures(c: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let l = [
        (c[0] / (c[1] * c[2])).sqrt(),
        (c[1] / (c[0] * c[2])).sqrt(),
        (c[2] / (c[0] * c[1])).sqrt(),
    ];
    let half = 0.5 * (l[0] + l[1] + l[2]);
    let mu = [half - l[0], half - l[1], half - l[2]];
    let ric = [2.0 * mu[1] * mu[2], 2.0 * mu[0] * mu[2], 2.0 * mu[0] * mu[1]];
    let s2 = 0.5 * (ric[0] + ric[1] + ric[2]);
    ([s2 - ric[0], s2 - ric[1], s2 - ric[2]], ric)
}

fn param(params: &[f64], default: f64) -> f64 {
    params.first().copied().unwrap_or(default)
}

fn expect_params(name: &str, params: &[f64], max: usize) -> Result<()> {
    if params.len() > max {
        return Err(Error::BadParams(format!(
            "{name} takes {max} parameter(s), got {}",
            params.len()
        )));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::BadParams(format!("{name}: parameters must be finite")));
    }
    Ok(())
}

/// Looks up a zoo chart. Missing parameters take their defaults.
pub fn zoo_get(name: &str, params: &[f64]) -> Result<ZooEntry> {
    let unbounded = Domain::unbounded();
    let entry = match name {
        "euclidean3" => {
            expect_params(name, params, 0)?;
            ZooEntry {
                name: "euclidean3",
                params: vec![],
                chart: MetricChart::analytic(name, unbounded, Euclidean),
                known: isotropic(0.0),
                base_point: [0.0; 3],
            }
        }
        "sphere3" => {
            expect_params(name, params, 1)?;
            let r = param(params, 1.0);
            if !(r > 0.0) {
                return Err(Error::BadParams(format!("sphere3 radius must be positive, got {r}")));
            }
            let domain = Domain::new([0.0, 0.0, -INF], [PI, PI, INF]);
            ZooEntry {
                name: "sphere3",
                params: vec![r],
                chart: MetricChart::analytic(name, domain, Sphere { r2: r * r })
                    .with_coords(["chi", "theta", "phi"]),
                known: isotropic(1.0 / (r * r)),
                base_point: [PI / 2.0, PI / 2.0, 0.0],
            }
        }
        "hyperbolic3" => {
            expect_params(name, params, 0)?;
            let domain = Domain::new([-INF, -INF, 0.0], [INF, INF, INF]);
            ZooEntry {
                name: "hyperbolic3",
                params: vec![],
                chart: MetricChart::analytic(name, domain, HalfSpace),
                known: isotropic(-1.0),
                base_point: [0.0, 0.0, 1.0],
            }
        }
        "product_h2xr" => {
            expect_params(name, params, 1)?;
            let k = param(params, -1.0);
            if !(k < 0.0) {
                return Err(Error::BadParams(format!("product_h2xr needs kappa < 0, got {k}")));
            }
            let domain = Domain::new([-INF, 0.0, -INF], [INF, INF, INF]);
            ZooEntry {
                name: "product_h2xr",
                params: vec![k],
                chart: MetricChart::analytic(name, domain, HyperbolicPlaneTimesLine { scale: 1.0 / -k }),
                known: Known {
                    epsilon: 0.0,
                    sectional: [k, 0.0, 0.0],
                    ricci: [k, k, 0.0],
                    class: PointClass::ExtremalPlus,
                    m: None,
                    isocurved: vec![[0.0, 0.0, 1.0]],
                    homogeneous: true,
                },
                base_point: [0.0, 1.0, 0.0],
            }
        }
        "product_s2xr" => {
            expect_params(name, params, 1)?;
            let k = param(params, 1.0);
            if !(k > 0.0) {
                return Err(Error::BadParams(format!("product_s2xr needs kappa > 0, got {k}")));
            }
            let domain = Domain::new([0.0, -INF, -INF], [PI, INF, INF]);
            ZooEntry {
                name: "product_s2xr",
                params: vec![k],
                chart: MetricChart::analytic(name, domain, SphereTimesLine { scale: 1.0 / k })
                    .with_coords(["theta", "phi", "z"]),
                known: Known {
                    epsilon: 0.0,
                    sectional: [0.0, 0.0, k],
                    ricci: [0.0, k, k],
                    class: PointClass::ExtremalMinus,
                    m: None,
                    isocurved: vec![[0.0, 0.0, 1.0]],
                    homogeneous: true,
                },
                base_point: [PI / 2.0, 0.0, 0.0],
            }
        }
        "nil" => {
            expect_params(name, params, 0)?;
            ZooEntry {
                name: "nil",
                params: vec![],
                chart: MetricChart::analytic(name, unbounded, Nil),
                known: Known {
                    epsilon: 0.25,
                    sectional: [-0.75, 0.25, 0.25],
                    ricci: [-0.5, -0.5, 0.5],
                    class: PointClass::ExtremalPlus,
                    m: None,
                    isocurved: vec![[0.0, 0.0, 1.0]],
                    homogeneous: true,
                },
                base_point: [0.0; 3],
            }
        }
        "sol" => {
            expect_params(name, params, 0)?;
            ZooEntry {
                name: "sol",
                params: vec![],
                chart: MetricChart::analytic(name, unbounded, Sol),
                known: Known {
                    epsilon: -1.0,
                    sectional: [-1.0, -1.0, 1.0],
                    ricci: [-2.0, 0.0, 0.0],
                    class: PointClass::ExtremalMinus,
                    m: None,
                    isocurved: vec![[0.0, 0.0, 1.0]],
                    homogeneous: true,
                },
                base_point: [0.0; 3],
            }
        }
        "berger" => {
            expect_params(name, params, 1)?;
            let tau = param(params, 0.8);
            if !(tau > 0.0) {
                return Err(Error::BadParams(format!("berger needs tau > 0, got {tau}")));
            }
            let c = [0.25, 0.25 * tau, 0.25 * tau * tau];
            let (sec, ric) = berger_curvatures(c);
            let sectional = sorted(sec);
            let (lambda, eps, big) = (sectional[0], sectional[1], sectional[2]);
            let ctol = crate::Tolerances::default().class;
            let (class, m) = if (eps - lambda).abs() < ctol && (big - eps).abs() < ctol {
                (PointClass::Isotropic, None)
            } else if (eps - lambda).abs() < ctol {
                (PointClass::ExtremalMinus, None)
            } else if (big - eps).abs() < ctol {
                (PointClass::ExtremalPlus, None)
            } else {
                (PointClass::Generic, Some(((eps - lambda) / (big - eps)).sqrt()))
            };
            let domain = Domain::new([0.0, -INF, -INF], [PI, INF, INF]);
            ZooEntry {
                name: "berger",
                params: vec![tau],
                chart: MetricChart::analytic(name, domain, Berger { c })
                    .with_coords(["theta", "phi", "psi"]),
                known: Known {
                    epsilon: eps,
                    sectional,
                    ricci: sorted(ric),
                    class,
                    m,
                    isocurved: vec![],
                    homogeneous: true,
                },
                base_point: [PI / 2.0, 0.0, 0.0],
            }
        }
        other => return Err(Error::UnknownChart(other.to_string())),
    };
    Ok(entry)
}

/// Parses `name` or `name(p1, p2, ...)` and looks the chart up.
pub fn zoo_get_ref(reference: &str) -> Result<ZooEntry> {
    let reference = reference.trim();
    let (name, params) = match reference.find('(') {
        None => (reference, Vec::new()),
        Some(open) => {
            let inner = reference[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::BadParams(format!("unclosed parameter list in `{reference}`")))?;
            let params = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::BadParams(format!("`{s}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            (reference[..open].trim(), params)
        }
    };
    zoo_get(name, &params)
}
