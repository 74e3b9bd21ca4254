//! Geodesics, parallel transport, the higher-rank test along a geodesic, and the
//! quadratic residual forms that characterize parallelism of `V±`.
//!
//! Geodesics are integrated in coordinates with classical fixed-step RK4. Each
//! step also records the 3×3 propagator of the parallel-transport ODE built
//! from the same RK4 stage states, so transporting `γ'(0)` reproduces the
//! integrated velocity to rounding and any vector can be transported afterwards
//! without re-integrating.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{
    frame_christoffels, ricci_frame_from_curvature, v_plus, FrameChristoffels, FrameVector,
    PointClass, RicciFramePoint,
};
use crate::metric::{christoffel_coord, riemann_at, Mat3, MetricChart, Vec3};
use crate::{Point, Tolerances};

/// Where and why a trace stopped before its requested horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitInfo {
    pub time: f64,
    pub point: Point,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub coords: Point,
    pub vel: [f64; 3],
    /// Velocity in the Ricci frame, when frames have been attached.
    pub frame_x: Option<FrameVector>,
    #[serde(skip)]
    pub frame: Option<RicciFramePoint>,
}

#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub samples: Vec<GeodesicSample>,
    pub step: f64,
    /// `g(γ', γ')` at the start.
    pub energy: f64,
    /// Largest `|g(γ',γ') − energy|` over the samples.
    pub max_drift: f64,
    /// Domain exit before the horizon (not an error).
    pub exit: Option<ExitInfo>,
    propagators: Vec<Mat3>,
}

impl GeodesicTrace {
    pub fn end_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn velocity(&self, n: usize) -> Vec3 {
        Vec3::from(self.samples[n].vel)
    }

    /// Transport matrix from sample `from` to sample `to` (either direction).
    pub fn transport_matrix(&self, from: usize, to: usize) -> Mat3 {
        let mut m = Mat3::identity();
        if to >= from {
            for p in &self.propagators[from..to] {
                m = p * m;
            }
            m
        } else {
            for p in &self.propagators[to..from] {
                m = p * m;
            }
            m.try_inverse().expect("transport propagators are invertible")
        }
    }
}

/// Samples of a parallel field along a trace, in coordinate components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelField {
    pub samples: Vec<(f64, [f64; 3])>,
}

struct Stage {
    x: Point,
    v: Vec3,
}

fn geodesic_rhs(chart: &MetricChart, x: &Point, v: &Vec3) -> Result<(Vec3, Mat3)> {
    let gamma = christoffel_coord(chart, x)?;
    let a = -gamma.along(v);
    Ok((a * v, a))
}

fn offset(x: &Point, v: &Vec3, h: f64) -> Point {
    [x[0] + h * v[0], x[1] + h * v[1], x[2] + h * v[2]]
}

/// Integrates the geodesic through `p` with unit initial velocity `dir`
/// (coordinate components) on `[0, horizon]` with fixed step `step`.
pub fn integrate_geodesic(
    chart: &MetricChart,
    p: &Point,
    dir: &Vec3,
    horizon: f64,
    step: f64,
    tol: &Tolerances,
) -> Result<GeodesicTrace> {
    if !(step > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need step > 0 and horizon >= 0, got step {step}, horizon {horizon}"
        )));
    }
    let g0 = chart.metric_at(p)?;
    let energy = dir.dot(&(g0 * dir));
    if (energy - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { norm_sq: energy });
    }
    let n_steps = (horizon / step).round() as usize;
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut propagators = Vec::with_capacity(n_steps);
    samples.push(GeodesicSample {
        t: 0.0,
        coords: *p,
        vel: (*dir).into(),
        frame_x: None,
        frame: None,
    });
    let mut x = *p;
    let mut v = *dir;
    let mut max_drift: f64 = 0.0;
    let mut exit = None;
    let h = step;
    for n in 0..n_steps {
        let t = n as f64 * h;
        let stages = (|| -> Result<([Stage; 4], [Vec3; 4], [Mat3; 4])> {
            let s1 = Stage { x, v };
            let (a1, m1) = geodesic_rhs(chart, &s1.x, &s1.v)?;
            let s2 = Stage {
                x: offset(&x, &s1.v, 0.5 * h),
                v: v + a1 * (0.5 * h),
            };
            let (a2, m2) = geodesic_rhs(chart, &s2.x, &s2.v)?;
            let s3 = Stage {
                x: offset(&x, &s2.v, 0.5 * h),
                v: v + a2 * (0.5 * h),
            };
            let (a3, m3) = geodesic_rhs(chart, &s3.x, &s3.v)?;
            let s4 = Stage {
                x: offset(&x, &s3.v, h),
                v: v + a3 * h,
            };
            let (a4, m4) = geodesic_rhs(chart, &s4.x, &s4.v)?;
            Ok(([s1, s2, s3, s4], [a1, a2, a3, a4], [m1, m2, m3, m4]))
        })();
        let (st, acc, mats) = match stages {
            Ok(s) => s,
            Err(Error::Domain { point }) => {
                exit = Some(ExitInfo {
                    time: t,
                    point,
                    reason: "left the chart domain".into(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let x_next: Point = std::array::from_fn(|a| {
            x[a] + h / 6.0 * (st[0].v[a] + 2.0 * st[1].v[a] + 2.0 * st[2].v[a] + st[3].v[a])
        });
        let v_next = v + (acc[0] + acc[1] * 2.0 + acc[2] * 2.0 + acc[3]) * (h / 6.0);
        let id = Mat3::identity();
        let k1 = mats[0];
        let k2 = mats[1] * (id + k1 * (0.5 * h));
        let k3 = mats[2] * (id + k2 * (0.5 * h));
        let k4 = mats[3] * (id + k3 * h);
        let prop = id + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        let g = match chart.metric_at(&x_next) {
            Ok(g) => g,
            Err(Error::Domain { point }) => {
                exit = Some(ExitInfo {
                    time: t,
                    point,
                    reason: "left the chart domain".into(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let t_next = (n + 1) as f64 * h;
        let drift = (v_next.dot(&(g * v_next)) - energy).abs();
        let limit = 10.0 * tol.ode * (1.0 + t_next);
        if drift > limit {
            return Err(Error::StepTooLarge { drift, limit });
        }
        max_drift = max_drift.max(drift);
        x = x_next;
        v = v_next;
        propagators.push(prop);
        samples.push(GeodesicSample {
            t: t_next,
            coords: x,
            vel: v.into(),
            frame_x: None,
            frame: None,
        });
    }
    Ok(GeodesicTrace {
        samples,
        step,
        energy,
        max_drift,
        exit,
        propagators,
    })
}

/// Attaches the Ricci frame and frame components of the velocity to every
/// sample. Frame signs follow the first sample's canonical choice continuously.
/// Stops at the first sample where the frame is unavailable and returns the
/// number of framed samples.
pub fn attach_frames(chart: &MetricChart, trace: &mut GeodesicTrace, epsilon: f64, tol: &Tolerances) -> usize {
    let mut prev: Option<RicciFramePoint> = None;
    for (n, s) in trace.samples.iter_mut().enumerate() {
        let fp = riemann_at(chart, &s.coords).and_then(|c| ricci_frame_from_curvature(&c, epsilon, tol));
        let Ok(mut fp) = fp else {
            return n;
        };
        if let Some(p) = &prev {
            let g = fp.metric();
            for i in 0..3 {
                if p.e(i).dot(&(g * fp.e(i))) < 0.0 {
                    fp.frame[i] = (-fp.e(i)).into();
                }
            }
        }
        s.frame_x = Some(fp.to_frame(&Vec3::from(s.vel)));
        s.frame = Some(fp);
        prev = Some(fp);
    }
    trace.samples.len()
}

pub fn parallel_transport(trace: &GeodesicTrace, v0: &Vec3) -> ParallelField {
    let mut v = *v0;
    let mut samples = Vec::with_capacity(trace.samples.len());
    samples.push((0.0, v.into()));
    for (p, s) in trace.propagators.iter().zip(&trace.samples[1..]) {
        v = p * v;
        samples.push((s.t, v.into()));
    }
    ParallelField { samples }
}

/// Result of the higher-rank search along one geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDeficit {
    /// `min over V₀ of max_t |sec(V(t), γ'(t)) − ε|`.
    pub deficit: f64,
    pub best_v0: [f64; 3],
    /// Angle of `best_v0` in the normal circle basis, in `[0, π)`.
    pub best_angle: f64,
    pub n_samples: usize,
    pub refine_iterations: usize,
    /// `(t, |sec − ε|)` along the trace for the best initial vector.
    pub profile: Vec<(f64, f64)>,
}

/// Quadratic forms in `(cos θ, sin θ)` for numerator and denominator of
/// `sec(V(θ, t), γ'(t))`.
struct PlaneForms {
    num: [f64; 3],
    den: [f64; 3],
}

impl PlaneForms {
    fn sec(&self, c: f64, s: f64) -> f64 {
        let q = |f: &[f64; 3]| f[0] * c * c + 2.0 * f[1] * c * s + f[2] * s * s;
        q(&self.num) / q(&self.den)
    }
}

const RANK_REFINE_ITERATIONS: usize = 60;

pub fn rank_deficit(
    chart: &MetricChart,
    trace: &GeodesicTrace,
    epsilon: f64,
    n_samples: usize,
) -> Result<RankDeficit> {
    if n_samples < 8 {
        return Err(Error::InvalidInput(format!("n_samples must be at least 8, got {n_samples}")));
    }
    let p0 = trace.samples[0].coords;
    let g0 = chart.metric_at(&p0)?;
    let v0 = trace.velocity(0);
    let ip = |a: &Vec3, b: &Vec3| a.dot(&(g0 * b));
    // orthonormal basis of the normal plane
    let mut basis: Vec<Vec3> = Vec::new();
    let vn = v0 / ip(&v0, &v0).sqrt();
    for k in 0..3 {
        let mut w = Vec3::zeros();
        w[k] = 1.0;
        w -= vn * ip(&vn, &w);
        for b in &basis {
            w -= b * ip(b, &w);
        }
        let n = ip(&w, &w).sqrt();
        if n > 1e-6 && basis.len() < 2 {
            basis.push(w / n);
        }
    }
    let (n1, n2) = (basis[0], basis[1]);
    let f1 = parallel_transport(trace, &n1);
    let f2 = parallel_transport(trace, &n2);

    let mut forms = Vec::with_capacity(trace.samples.len());
    for (k, s) in trace.samples.iter().enumerate() {
        let curv = riemann_at(chart, &s.coords)?;
        let y = trace.velocity(k);
        let a = Vec3::from(f1.samples[k].1);
        let b = Vec3::from(f2.samples[k].1);
        let r = |u: &Vec3, w: &Vec3| curv.eval(u, &y, &y, w);
        let yy = curv.inner(&y, &y);
        let d = |u: &Vec3, w: &Vec3| curv.inner(u, w) * yy - curv.inner(u, &y) * curv.inner(w, &y);
        forms.push((
            s.t,
            PlaneForms {
                num: [r(&a, &a), r(&a, &b), r(&b, &b)],
                den: [d(&a, &a), d(&a, &b), d(&b, &b)],
            },
        ));
    }
    let worst = |theta: f64| -> f64 {
        let (s, c) = theta.sin_cos();
        forms
            .iter()
            .fold(0.0f64, |m, (_, f)| m.max((f.sec(c, s) - epsilon).abs()))
    };
    let pi = std::f64::consts::PI;
    let dtheta = pi / n_samples as f64;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..n_samples {
        let w = worst(k as f64 * dtheta);
        if w < best {
            best = w;
            best_k = k;
        }
    }
    // golden-section refinement on the bracketing cell pair
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * dtheta, (best_k as f64 + 1.0) * dtheta);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let (mut fc, mut fd) = (worst(c), worst(d));
    for _ in 0..RANK_REFINE_ITERATIONS {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = worst(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = worst(d);
        }
    }
    let mut theta = 0.5 * (lo + hi);
    let mut deficit = worst(theta);
    if best < deficit {
        theta = best_k as f64 * dtheta;
        deficit = best;
    }
    let theta = theta.rem_euclid(pi);
    let (s, c) = theta.sin_cos();
    let profile = forms
        .iter()
        .map(|(t, f)| (*t, (f.sec(c, s) - epsilon).abs()))
        .collect();
    Ok(RankDeficit {
        deficit,
        best_v0: (n1 * c + n2 * s).into(),
        best_angle: theta,
        n_samples,
        refine_iterations: RANK_REFINE_ITERATIONS,
        profile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Coefficients `[c₁₁, c₂₂, c₃₃, c₁₂, c₁₃, c₂₃]` of the quadratic form whose
/// vanishing along a generic geodesic is equivalent to `V⁺` being parallel.
/// The `−` form is the `+` form with `m` and `grad m` negated.
pub fn q_coefficients(sign: Sign, fc: &FrameChristoffels, m: f64) -> [f64; 6] {
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let m = s * m;
    let dm = |i| s * fc.dm(i);
    let g = |i, j, k| fc.g(i, j, k);
    let mm = m * m;
    [
        m * g(1, 1, 3) - mm * g(1, 2, 3),
        g(2, 1, 3) - m * g(2, 2, 3),
        dm(3) - (1.0 + mm) * g(3, 1, 2),
        g(1, 1, 3) - m * g(1, 2, 3) + m * g(2, 1, 3) - mm * g(2, 2, 3),
        dm(1) - (1.0 + mm) * g(1, 1, 2) - m * g(3, 3, 1) + mm * g(3, 3, 2),
        dm(2) + (1.0 + mm) * g(2, 2, 1) - g(3, 3, 1) + m * g(3, 3, 2),
    ]
}

/// Value of the degree-2 residual form at `X`.
pub fn residual_q(sign: Sign, x: &FrameVector, fc: &FrameChristoffels, m: f64) -> f64 {
    let c = q_coefficients(sign, fc, m);
    let (x1, x2, x3) = (x.x1, x.x2, x.x3);
    c[0] * x1 * x1 + c[1] * x2 * x2 + c[2] * x3 * x3 + c[3] * x1 * x2 + c[4] * x1 * x3 + c[5] * x2 * x3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BMembership {
    pub plus: bool,
    pub minus: bool,
}

pub fn b_membership(fp: &RicciFramePoint, fc: &FrameChristoffels, x: &FrameVector, tol: f64) -> Result<BMembership> {
    let m = match (fp.class, fp.m) {
        (PointClass::Generic, Some(m)) => m,
        _ => return Err(Error::NotGeneric),
    };
    Ok(BMembership {
        plus: residual_q(Sign::Plus, x, fc, m).abs() < tol,
        minus: residual_q(Sign::Minus, x, fc, m).abs() < tol,
    })
}

/// The form whose vanishing along a unicurved geodesic in the minus extremal
/// class is equivalent to parallelism of the extremal plane field.
pub fn extremal_parallel_residual(x: &FrameVector, fc: &FrameChristoffels) -> f64 {
    let (x1, x2, x3) = (x.x1, x.x2, x.x3);
    let g = |i, j, k| fc.g(i, j, k);
    x3 * (-x1 * g(1, 1, 2) - x2 * g(2, 1, 2) - x3 * g(3, 1, 2) + x2 * g(3, 1, 3))
        + x2 * (x1 * g(1, 1, 3) + x2 * g(2, 1, 3))
}

/// The plus extremal analogue: frame indices 1 and 2 exchanged.
pub fn extremal_parallel_residual_plus(x: &FrameVector, fc: &FrameChristoffels) -> f64 {
    extremal_parallel_residual(&FrameVector::new(x.x2, x.x1, x.x3), &fc.swap_12())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub t: f64,
    /// `‖DV⁺/dt‖` from transported comparisons.
    pub dv_norm: f64,
    /// Component of `DV⁺/dt` along the unit normal `X × V⁺`.
    pub dv_signed: f64,
    /// `residual_q(+)` at the velocity.
    pub q_plus: f64,
    pub q_minus: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub difference_span: f64,
    /// Zero crossings (linear interpolation) of `dv_signed`.
    pub crossings_dv: Vec<f64>,
    /// Zero crossings of `q_plus`.
    pub crossings_q: Vec<f64>,
    /// Every crossing of one list has a partner in the other within one step.
    pub crossings_match: bool,
    pub max_crossing_gap: f64,
    /// Median of `‖DV⁺/dt‖·K²/|Q|` over rows with `|Q|` well away from zero.
    pub ratio_estimate: f64,
    /// Rows where exactly one of `‖DV⁺/dt‖`, `|Q|` is below `c_tol`.
    pub c_tol: f64,
    pub co_vanishing_violations: usize,
    /// Whether `V⁺` (resp. `V⁻`) looked parallel along the whole trace.
    /// Recorded only; neither is expected on charts without the rank property.
    pub plus_parallel: bool,
    pub minus_parallel: bool,
}

fn crossings(ts: &[f64], vals: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..vals.len().saturating_sub(1) {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            out.push(ts[k]);
        } else if a.signum() != b.signum() && b != 0.0 {
            out.push(ts[k] + (ts[k + 1] - ts[k]) * a / (a - b));
        }
    }
    out
}

fn unmatched_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Compares the covariant derivative of the pointwise field `V⁺(γ(t))`, by
/// central differences of parallel-transported values over `±10` steps, with
/// the residual form `Q₊` at `γ'(t)`.
///
/// Frames must already be attached (see [`attach_frames`]); every framed sample
/// must be generic with `|x₃| ≥ gen_tol`.
pub fn parallel_consistency(
    chart: &MetricChart,
    trace: &GeodesicTrace,
    epsilon: f64,
    c_tol: f64,
    tol: &Tolerances,
) -> Result<ConsistencyReport> {
    let n = trace.samples.len();
    let mut vplus = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n);
    for s in &trace.samples {
        let (Some(fp), Some(x)) = (s.frame.as_ref(), s.frame_x.as_ref()) else {
            return Err(Error::NotGenericAlongTrace { t: s.t });
        };
        let m = match (fp.class, fp.m) {
            (PointClass::Generic, Some(m)) if x.x3.abs() >= tol.gen => m,
            _ => return Err(Error::NotGenericAlongTrace { t: s.t }),
        };
        let xu = x.normalized();
        let v = v_plus(&xu, m)?;
        vplus.push(fp.to_coords(&v));
        data.push((fp, xu, v, m));
    }
    const SPAN: usize = 10;
    let h = SPAN as f64 * trace.step;
    let mut rows = Vec::new();
    for k in SPAN..n.saturating_sub(SPAN) {
        let (fp, x, v, m) = data[k];
        let fwd = trace.transport_matrix(k + SPAN, k) * vplus[k + SPAN];
        let bwd = trace.transport_matrix(k - SPAN, k) * vplus[k - SPAN];
        let dv = (fwd - bwd) / (2.0 * h);
        let dvf = fp.to_frame(&dv);
        let normal = x.cross(&v).normalized();
        let fc = frame_christoffels(chart, fp, epsilon, None, tol)?;
        let (k2, _) = crate::frame::kl_values(&x, m).unwrap_or((f64::NAN, f64::NAN));
        rows.push(ConsistencyRow {
            t: trace.samples[k].t,
            dv_norm: dvf.norm_sq().sqrt(),
            dv_signed: dvf.dot(&normal),
            q_plus: residual_q(Sign::Plus, &x, &fc, m),
            q_minus: residual_q(Sign::Minus, &x, &fc, m),
            k: k2,
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.dv_signed).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.q_plus).collect();
    let crossings_dv = crossings(&ts, &a);
    let crossings_q = crossings(&ts, &b);
    let gap = unmatched_gap(&crossings_dv, &crossings_q).max(unmatched_gap(&crossings_q, &crossings_dv));
    let crossings_match = crossings_dv.len() == crossings_q.len() && gap <= trace.step;

    let qmax = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.q_plus.abs() > 0.1 * qmax && r.q_plus != 0.0)
        .map(|r| r.dv_norm * r.k * r.k / r.q_plus.abs())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let ratio_estimate = ratios.get(ratios.len() / 2).copied().unwrap_or(f64::NAN);
    let co_vanishing_violations = rows
        .iter()
        .filter(|r| (r.dv_norm < c_tol) != (r.q_plus.abs() < c_tol))
        .count();
    Ok(ConsistencyReport {
        difference_span: h,
        crossings_dv,
        crossings_q,
        crossings_match,
        max_crossing_gap: if gap.is_finite() { gap } else { f64::NAN },
        ratio_estimate,
        c_tol,
        co_vanishing_violations,
        plus_parallel: !rows.is_empty() && rows.iter().all(|r| r.q_plus.abs() < c_tol),
        minus_parallel: !rows.is_empty() && rows.iter().all(|r| r.q_minus.abs() < c_tol),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::zoo_get;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn euclidean_lines_are_straight() {
        let e = zoo_get("euclidean3", &[]).unwrap();
        let tr = integrate_geodesic(&e.chart, &[0.0; 3], &Vec3::x(), 2.0, 1e-3, &tol()).unwrap();
        let last = tr.samples.last().unwrap();
        assert!((last.t - 2.0).abs() < 1e-12);
        assert!((last.coords[0] - 2.0).abs() < 1e-12 && last.coords[1].abs() < 1e-15);
        let f = parallel_transport(&tr, &Vec3::new(0.3, 0.4, 0.5));
        assert_eq!(f.samples.last().unwrap().1, [0.3, 0.4, 0.5]);
    }

    #[test]
    fn hyperbolic_vertical_ray() {
        let e = zoo_get("hyperbolic3", &[]).unwrap();
        let tr = integrate_geodesic(&e.chart, &[0.0, 0.0, 1.0], &Vec3::z(), 1.0, 1e-3, &tol()).unwrap();
        for s in tr.samples.iter().step_by(100) {
            assert!((s.coords[2] - s.t.exp()).abs() < 1e-10, "{s:?}");
            assert!(s.coords[0].abs() < 1e-15);
        }
        let f = parallel_transport(&tr, &Vec3::x());
        for (k, (_, v)) in f.samples.iter().enumerate() {
            let g = e.chart.metric_at(&tr.samples[k].coords).unwrap();
            let v = Vec3::from(*v);
            assert!((v.dot(&(g * v)) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn transporting_the_velocity_reproduces_it() {
        let e = zoo_get("nil", &[]).unwrap();
        let dir = Vec3::new(0.6, 0.0, 0.8);
        let tr = integrate_geodesic(&e.chart, &[0.1, 0.2, 0.3], &dir, 2.0, 1e-3, &tol()).unwrap();
        let f = parallel_transport(&tr, &dir);
        for (k, (_, v)) in f.samples.iter().enumerate() {
            assert!((Vec3::from(*v) - tr.velocity(k)).norm() < 1e-12);
        }
        let m = tr.transport_matrix(0, 700);
        let back = tr.transport_matrix(700, 0) * (m * dir);
        assert!((back - dir).norm() < 1e-12);
    }

    #[test]
    fn domain_exit_is_reported() {
        let e = zoo_get("hyperbolic3", &[]).unwrap();
        let mut ch = e.chart.clone();
        ch.domain.hi[0] = 0.5;
        let tr = integrate_geodesic(&ch, &[0.0, 0.0, 1.0], &Vec3::x(), 3.0, 1e-2, &tol()).unwrap();
        let exit = tr.exit.expect("exit recorded");
        assert!(exit.time < 1.0);
        assert!(tr.samples.iter().all(|s| s.coords[0] < 0.5));
    }

    #[test]
    fn coarse_steps_are_rejected() {
        let e = zoo_get("hyperbolic3", &[]).unwrap();
        let r = integrate_geodesic(&e.chart, &[0.0, 0.0, 1.0], &Vec3::x(), 3.0, 0.5, &tol());
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let e = zoo_get("euclidean3", &[]).unwrap();
        let r = integrate_geodesic(&e.chart, &[0.0; 3], &Vec3::new(1.0, 1.0, 0.0), 1.0, 0.1, &tol());
        assert!(matches!(r, Err(Error::NotUnit { .. })));
    }

    #[test]
    fn residual_q_single_term() {
        let mut fc = FrameChristoffels::zero();
        fc.set(2, 1, 3, 1.0);
        let x = FrameVector::new(0.0, 1.0, 0.0);
        assert_eq!(residual_q(Sign::Plus, &x, &fc, 1.0), 1.0);
        assert_eq!(residual_q(Sign::Plus, &x, &FrameChristoffels::zero(), 1.0), 0.0);
    }

    #[test]
    fn extremal_residual_single_term() {
        let mut fc = FrameChristoffels::zero();
        fc.set(2, 1, 3, 1.0);
        fc.set(2, 3, 1, -1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = extremal_parallel_residual(&FrameVector::new(0.0, s, s), &fc);
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn b_membership_requires_generic_point() {
        let fp = crate::frame::synthetic_frame(1.0, 1.0, 1.0, &tol());
        let r = b_membership(&fp, &FrameChristoffels::zero(), &FrameVector::new(0.0, 0.0, 1.0), 1e-9);
        assert_eq!(r, Err(Error::NotGeneric));
    }
}
