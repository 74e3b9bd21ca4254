//! The rotated frame `{E₁, E₂, E₃}`, the point systems `F±`, the algebraic
//! identities they imply, and the Riccati evolution of `tr(A)` with the
//! off-diagonal decay law and volume growth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameChristoffels, FrameVector, PointClass, RicciFramePoint};
use crate::metric::{CurvatureAtPoint, Vec3};

/// `E₁ = a e₁ − b e₂`, `E₂ = b e₁ + a e₂`, `E₃ = e₃` with `a = 1/√(1+m²)`, `b = m a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalFrame {
    pub e1: FrameVector,
    pub e2: FrameVector,
    pub e3: FrameVector,
    pub m: f64,
}

impl CapitalFrame {
    pub fn from_m(m: f64) -> Self {
        let a = 1.0 / (1.0 + m * m).sqrt();
        let b = m * a;
        Self {
            e1: FrameVector::new(a, -b, 0.0),
            e2: FrameVector::new(b, a, 0.0),
            e3: FrameVector::new(0.0, 0.0, 1.0),
            m,
        }
    }

    pub fn legs(&self) -> [FrameVector; 3] {
        [self.e1, self.e2, self.e3]
    }
}

pub fn capital_frame(fp: &RicciFramePoint) -> Result<CapitalFrame> {
    match (fp.class, fp.m) {
        (PointClass::Generic, Some(m)) => Ok(CapitalFrame::from_m(m)),
        _ => Err(Error::NotGeneric),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Plus,
    Minus,
}

/// Residuals of the seven scalar relations of one point system:
/// three proportionalities, three derivative equations, and `Γ₁₁³ = m²Γ₂₂³`.
pub fn point_system_residuals(fc: &FrameChristoffels, m: f64, mode: Mode) -> [f64; 7] {
    let s = match mode {
        Mode::Plus => 1.0,
        Mode::Minus => -1.0,
    };
    let g = |i, j, k| fc.g(i, j, k);
    let sm = s * m;
    let mm = m * m;
    let dm = |i| s * fc.dm(i);
    [
        g(1, 1, 3) - sm * g(1, 2, 3),
        sm * (g(1, 2, 3) - g(2, 1, 3)),
        sm * g(2, 1, 3) - mm * g(2, 2, 3),
        dm(1) - ((1.0 + mm) * g(1, 1, 2) + sm * g(3, 3, 1) - mm * g(3, 3, 2)),
        dm(2) - (-(1.0 + mm) * g(2, 2, 1) + g(3, 3, 1) - sm * g(3, 3, 2)),
        dm(3) - (1.0 + mm) * g(3, 1, 2),
        g(1, 1, 3) - mm * g(2, 2, 3),
    ]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FMembership {
    pub fplus: bool,
    pub fminus: bool,
    pub plus_residual: f64,
    pub minus_residual: f64,
}

pub fn f_membership(fc: &FrameChristoffels, m: f64, tol: f64) -> FMembership {
    let plus_residual = max_abs(&point_system_residuals(fc, m, Mode::Plus));
    let minus_residual = max_abs(&point_system_residuals(fc, m, Mode::Minus));
    FMembership {
        fplus: plus_residual < tol,
        fminus: minus_residual < tol,
        plus_residual,
        minus_residual,
    }
}

/// Inputs to the identity suite must satisfy their system to this level.
pub const PRECONDITION_TOL: f64 = 1e-10;

/// `⟨∇_{E₁}E₁, E₃⟩`.
fn geodesic_e3(fc: &FrameChristoffels, m: f64) -> f64 {
    let a2 = 1.0 / (1.0 + m * m);
    let g = |i, j, k| fc.g(i, j, k);
    a2 * (g(1, 1, 3) - m * g(2, 1, 3) - m * g(1, 2, 3) + m * m * g(2, 2, 3))
}

/// Named residuals of the identities satisfied by the rotated frame.
///
/// Plus mode (input satisfies the plus point system): the three components of
/// `∇_{E₁}E₁`, the two components of `∇_{E₁}E₃`, `⟨∇_{E₂}E₁,E₃⟩`, `⟨∇_{E₃}E₁,E₂⟩`,
/// and `⟨∇_{E₂}E₁,E₂⟩ − ⟨∇_{E₃}E₁,E₃⟩`.
///
/// Minus mode (input satisfies the minus system and `⟨∇_{E₁}E₁,E₃⟩ = 0`): the
/// `E₃` component of `∇_{E₁}E₁`, `∇_{E₁}E₃`, `⟨∇_{E₂}E₁,E₃⟩`, and the four symbols
/// `Γ₂₂³, Γ₁₂³, Γ₂₁³, Γ₁₁³`. The remaining identities are not implied pointwise
/// by the minus system.
pub fn identity_suite(fc: &FrameChristoffels, m: f64, mode: Mode) -> Result<BTreeMap<&'static str, f64>> {
    let pre = max_abs(&point_system_residuals(fc, m, mode));
    let (system, pre) = match mode {
        Mode::Plus => ("plus point", pre),
        Mode::Minus => ("minus point with geodesic E1", pre.max(geodesic_e3(fc, m).abs())),
    };
    if !(pre < PRECONDITION_TOL) {
        return Err(Error::PreconditionResidual { system, residual: pre });
    }
    let mut all = identity_values(fc, m);
    let keep: &[&str] = match mode {
        Mode::Plus => &[
            "geodesic_e1",
            "geodesic_e2",
            "geodesic_e3",
            "nabla_e1_e3_e1",
            "nabla_e1_e3_e2",
            "e2_e1_e3",
            "e3_e1_e2",
            "evo_equal",
        ],
        Mode::Minus => &[
            "geodesic_e3",
            "nabla_e1_e3_e1",
            "nabla_e1_e3_e2",
            "e2_e1_e3",
            "gamma_22_3",
            "gamma_12_3",
            "gamma_21_3",
            "gamma_11_3",
        ],
    };
    all.retain(|k, _| keep.contains(k));
    Ok(all)
}

/// The expansions behind [`identity_suite`], evaluated without any precondition.
///
/// `geodesic_eᵢ = ⟨∇_{E₁}E₁, eᵢ⟩`, `nabla_e1_e3_eᵢ = ⟨∇_{E₁}E₃, eᵢ⟩`,
/// `e2_e1_e3 = ⟨∇_{E₂}E₁,E₃⟩`, `e3_e1_e2 = ⟨∇_{E₃}E₁,E₂⟩`,
/// `evo_equal = ⟨∇_{E₂}E₁,E₂⟩ − ⟨∇_{E₃}E₁,E₃⟩`, and `gamma_ij_k = Γᵢⱼᵏ`.
pub fn identity_values(fc: &FrameChristoffels, m: f64) -> BTreeMap<&'static str, f64> {
    let g = |i, j, k| fc.g(i, j, k);
    let mm = m * m;
    let a = 1.0 / (1.0 + mm).sqrt();
    let a2 = a * a;
    let a3 = a2 * a;
    // eᵢ(a) = −m a³ eᵢ(m), eᵢ(b) = a³ eᵢ(m)
    let da = |i| -m * a3 * fc.dm(i);
    let db = |i| a3 * fc.dm(i);

    let mut out = BTreeMap::new();
    out.insert(
        "geodesic_e1",
        a * (da(1) - m * da(2) - m * a * g(1, 2, 1) + mm * a * g(2, 2, 1)),
    );
    out.insert(
        "geodesic_e2",
        a * (-db(1) + m * db(2) + a * g(1, 1, 2) - m * a * g(2, 1, 2)),
    );
    out.insert("geodesic_e3", geodesic_e3(fc, m));
    out.insert("nabla_e1_e3_e1", a * (g(1, 3, 1) - m * g(2, 3, 1)));
    out.insert("nabla_e1_e3_e2", a * (g(1, 3, 2) - m * g(2, 3, 2)));
    out.insert(
        "e2_e1_e3",
        a2 * (m * g(1, 1, 3) - mm * g(1, 2, 3) + g(2, 1, 3) - m * g(2, 2, 3)),
    );
    // ⟨∇_{E₃}E₁,E₂⟩ = −⟨∇_{E₃}E₂,E₁⟩
    out.insert("e3_e1_e2", -(a2 * fc.dm(3) - g(3, 1, 2)));
    let e2e1e2 = a3 * (-m * fc.dm(1) - fc.dm(2)) - m * a2 * (mm * a * g(1, 2, 1) + m * a * g(2, 2, 1))
        + a2 * (m * a * g(1, 1, 2) + a * g(2, 1, 2));
    let e3e1e3 = a * g(3, 1, 3) - m * a * g(3, 2, 3);
    out.insert("evo_equal", e2e1e2 - e3e1e3);
    out.insert("gamma_22_3", g(2, 2, 3));
    out.insert("gamma_12_3", g(1, 2, 3));
    out.insert("gamma_21_3", g(2, 1, 3));
    out.insert("gamma_11_3", g(1, 1, 3));
    out
}

/// `⟨∇_{E_a}E_b, E_c⟩` (0-based) computed directly from the frame symbols and
/// `grad m`, by differentiating the rotation coefficients.
pub fn capital_connection(fc: &FrameChristoffels, m: f64, a_idx: usize, b_idx: usize, c_idx: usize) -> f64 {
    let coeffs = |m: f64| -> [[f64; 3]; 3] {
        let a = 1.0 / (1.0 + m * m).sqrt();
        let b = m * a;
        [[a, -b, 0.0], [b, a, 0.0], [0.0, 0.0, 1.0]]
    };
    let a = 1.0 / (1.0 + m * m).sqrt();
    let a3 = a * a * a;
    // d/dm of the rotation coefficients: da/dm = −m a³, db/dm = a³
    let dcoeffs = [[-m * a3, -a3, 0.0], [a3, -m * a3, 0.0], [0.0, 0.0, 0.0]];
    let c = coeffs(m);
    let ea_m: f64 = (0..3).map(|i| c[a_idx][i] * fc.dm(i + 1)).sum();
    let mut total = 0.0;
    for j in 0..3 {
        total += dcoeffs[b_idx][j] * ea_m * c[c_idx][j];
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                total += c[a_idx][i] * c[b_idx][j] * c[c_idx][k] * fc.gamma[i][j][k];
            }
        }
    }
    total
}

fn frame_coords(fp: &RicciFramePoint, v: &FrameVector) -> Vec3 {
    fp.to_coords(v)
}

/// `|R(E₁,E₂,E₃,E₁)|`.
pub fn x_identity_residual(curv: &CurvatureAtPoint, fp: &RicciFramePoint, cf: &CapitalFrame) -> Result<f64> {
    if fp.class != PointClass::Generic {
        return Err(Error::NotGeneric);
    }
    let [e1, e2, e3] = cf.legs().map(|v| frame_coords(fp, &v));
    Ok(curv.eval(&e1, &e2, &e3, &e1).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffDiagPair {
    /// `R(E₁,E₂,E₂,E₃)`.
    pub r2: f64,
    /// `R(E₁,E₃,E₃,E₂)`.
    pub r3: f64,
}

impl OffDiagPair {
    /// Both components vanish within `tol`; at a generic point of a chart with
    /// the rank property this is a contradiction.
    pub fn both_vanish(&self, tol: f64) -> bool {
        self.r2.abs() < tol && self.r3.abs() < tol
    }
}

pub fn offdiag_pair(curv: &CurvatureAtPoint, fp: &RicciFramePoint, cf: &CapitalFrame) -> Result<OffDiagPair> {
    if fp.class != PointClass::Generic {
        return Err(Error::NotGeneric);
    }
    let [e1, e2, e3] = cf.legs().map(|v| frame_coords(fp, &v));
    Ok(OffDiagPair {
        r2: curv.eval(&e1, &e2, &e2, &e3),
        r3: curv.eval(&e1, &e3, &e3, &e2),
    })
}

/// Closed-form family of `y' = −2ε − y²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Tangent,
    Tanh,
    Coth,
    Constant,
    Hyperbola,
    Zero,
}

/// Analytic solution of `y' = −2ε − y²/2`, `y(0) = tr0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub epsilon: f64,
    pub tr0: f64,
    pub branch: Branch,
    /// Phase constant of the branch (`c` in `tan(at − c)`, `tanh(bt + c)`, `coth(bt + c)`).
    pub phase: f64,
    /// First forward pole, if any.
    pub pole: Option<f64>,
}

impl ClosedForm {
    pub fn new(epsilon: f64, tr0: f64) -> Self {
        let (branch, phase, pole) = if epsilon > 0.0 {
            let a = epsilon.sqrt();
            let c = (tr0 / (2.0 * a)).atan();
            (Branch::Tangent, c, Some((c + std::f64::consts::FRAC_PI_2) / a))
        } else if epsilon < 0.0 {
            let b = (-epsilon).sqrt();
            let r = tr0 / (2.0 * b);
            if (r.abs() - 1.0).abs() <= 4.0 * f64::EPSILON {
                (Branch::Constant, 0.0, None)
            } else if r.abs() < 1.0 {
                (Branch::Tanh, r.atanh(), None)
            } else {
                let c = (1.0 / r).atanh();
                let pole = (c < 0.0).then(|| -c / b);
                (Branch::Coth, c, pole)
            }
        } else if tr0 == 0.0 {
            (Branch::Zero, 0.0, None)
        } else {
            (Branch::Hyperbola, 0.0, (tr0 < 0.0).then(|| -2.0 / tr0))
        };
        Self {
            epsilon,
            tr0,
            branch,
            phase,
            pole,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let c = self.phase;
        match self.branch {
            Branch::Tangent => {
                let a = self.epsilon.sqrt();
                -2.0 * a * (a * t - c).tan()
            }
            Branch::Tanh => {
                let b = (-self.epsilon).sqrt();
                2.0 * b * (b * t + c).tanh()
            }
            Branch::Coth => {
                let b = (-self.epsilon).sqrt();
                2.0 * b / (b * t + c).tanh()
            }
            Branch::Constant => self.tr0,
            Branch::Hyperbola => 2.0 * self.tr0 / (2.0 + self.tr0 * t),
            Branch::Zero => 0.0,
        }
    }

    /// `∫₀ᵗ y`.
    pub fn integral(&self, t: f64) -> f64 {
        let c = self.phase;
        match self.branch {
            Branch::Tangent => {
                let a = self.epsilon.sqrt();
                2.0 * ((a * t - c).cos() / c.cos()).abs().ln()
            }
            Branch::Tanh => {
                let b = (-self.epsilon).sqrt();
                2.0 * ((b * t + c).cosh() / c.cosh()).ln()
            }
            Branch::Coth => {
                let b = (-self.epsilon).sqrt();
                2.0 * ((b * t + c).sinh() / c.sinh()).abs().ln()
            }
            Branch::Constant => self.tr0 * t,
            Branch::Hyperbola => 2.0 * (1.0 + 0.5 * self.tr0 * t).abs().ln(),
            Branch::Zero => 0.0,
        }
    }
}

/// Distance before an analytic pole inside which numeric comparisons are skipped.
pub const POLE_MARGIN: f64 = 0.1;

/// Pole thresholds for the numeric solver.
pub const BLOWUP_VALUE: f64 = 1e8;
pub const MIN_SUBSTEP: f64 = 1e-14;
const SUBSTEP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSolution {
    pub epsilon: f64,
    pub tr0: f64,
    pub horizon: f64,
    pub step: f64,
    pub branch: Branch,
    /// Numeric `(t, tr A)` on the output grid, up to the last point before a pole.
    pub samples: Vec<(f64, f64)>,
    /// Analytic pole inside the horizon.
    pub blowup_time: Option<f64>,
    /// Interval in which the numeric solver detected the pole.
    pub blowup_bracket: Option<(f64, f64)>,
    /// Largest numeric-vs-closed-form difference on samples at least `POLE_MARGIN` before any pole.
    pub max_closed_form_error: f64,
    pub r2_samples: Option<Vec<f64>>,
    pub r3_samples: Option<Vec<f64>>,
    /// Largest `|d/dt log|Rᵢ| + (3/2) tr A|` over interior samples, when decay was attached.
    pub decay_log_residual: Option<f64>,
}

impl RiccatiSolution {
    pub fn closed_form(&self) -> ClosedForm {
        ClosedForm::new(self.epsilon, self.tr0)
    }

    /// Trapezoid-rule `∫₀ᵗ tr A` at every sample.
    pub fn log_volume(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.samples.len());
        out.push(0.0);
        for w in self.samples.windows(2) {
            acc += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
            out.push(acc);
        }
        out.truncate(self.samples.len());
        out
    }
}

fn riccati_rhs(eps: f64, y: f64) -> f64 {
    -2.0 * eps - 0.5 * y * y
}

fn rk4(eps: f64, y: f64, h: f64) -> f64 {
    let k1 = riccati_rhs(eps, y);
    let k2 = riccati_rhs(eps, y + 0.5 * h * k1);
    let k3 = riccati_rhs(eps, y + 0.5 * h * k2);
    let k4 = riccati_rhs(eps, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

enum Advance {
    Reached(f64),
    Pole { at: f64, substep: f64 },
}

/// Advances from `t0` to `t1` with step-doubling error control.
fn advance(eps: f64, mut y: f64, t0: f64, t1: f64, mut h: f64) -> (Advance, f64) {
    let mut t = t0;
    while t < t1 {
        let hh = h.min(t1 - t);
        let full = rk4(eps, y, hh);
        let half = rk4(eps, rk4(eps, y, 0.5 * hh), 0.5 * hh);
        let err = (half - full).abs() / 15.0;
        let bound = SUBSTEP_TOL * (1.0 + half.abs());
        if err.is_finite() && err <= bound {
            y = half + (half - full) / 15.0;
            t = if hh == t1 - t { t1 } else { t + hh };
            if !y.is_finite() || y.abs() > BLOWUP_VALUE {
                return (Advance::Pole { at: t - hh, substep: hh }, h);
            }
            if err < 0.1 * bound {
                h = (2.0 * h).min(t1 - t0);
            }
        } else {
            h = 0.5 * hh;
            if h < MIN_SUBSTEP {
                return (Advance::Pole { at: t, substep: h }, h);
            }
        }
    }
    (Advance::Reached(y), h)
}

/// Solves `y' = −2ε − y²/2`, `y(0) = tr0` on `[0, horizon]`, sampled every `step`.
pub fn riccati_solve(epsilon: f64, tr0: f64, horizon: f64, step: f64) -> Result<RiccatiSolution> {
    if !(step > 0.0) || !(horizon >= 0.0) || !epsilon.is_finite() || !tr0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "riccati_solve needs finite epsilon/tr0, step > 0, horizon >= 0 (got {epsilon}, {tr0}, {step}, {horizon})"
        )));
    }
    let cf = ClosedForm::new(epsilon, tr0);
    let n = (horizon / step).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((0.0, tr0));
    let mut y = tr0;
    let mut h = step;
    let mut bracket = None;
    for k in 0..n {
        let t0 = k as f64 * step;
        let t1 = (k + 1) as f64 * step;
        let (res, h_next) = advance(epsilon, y, t0, t1, h);
        h = h_next;
        match res {
            Advance::Reached(v) => {
                y = v;
                samples.push((t1, y));
            }
            Advance::Pole { at, substep } => {
                bracket = Some((at, at + substep.max(MIN_SUBSTEP)));
                break;
            }
        }
    }
    let blowup_time = cf.pole.filter(|&p| p <= horizon);
    let cutoff = cf.pole.map_or(f64::INFINITY, |p| p - POLE_MARGIN);
    let max_closed_form_error = samples
        .iter()
        .filter(|(t, _)| *t <= cutoff)
        .map(|&(t, v)| (v - cf.value(t)).abs())
        .fold(0.0, f64::max);
    Ok(RiccatiSolution {
        epsilon,
        tr0,
        horizon,
        step,
        branch: cf.branch,
        samples,
        blowup_time,
        blowup_bracket: bracket,
        max_closed_form_error,
        r2_samples: None,
        r3_samples: None,
        decay_log_residual: None,
    })
}

/// Attaches `|Rᵢ|(t) = |Rᵢ(0)| exp(−(3/2)∫₀ᵗ tr A)` using the trapezoid rule on the
/// solution grid. When the solution has a pole in its horizon, the augmented
/// solution up to the pole is returned inside [`Error::HorizonTruncated`].
pub fn offdiag_decay(sol: &RiccatiSolution, r20: f64, r30: f64) -> Result<RiccatiSolution> {
    let integral = sol.log_volume();
    let decay = |r0: f64| -> Vec<f64> { integral.iter().map(|i| r0.abs() * (-1.5 * i).exp()).collect() };
    let mut out = sol.clone();
    out.r2_samples = Some(decay(r20));
    out.r3_samples = Some(decay(r30));
    // d/dt log|R| + 1.5 trA by central differences of log|R| = log|R0| − 1.5 I(t),
    // on the same pre-pole window as the closed-form comparison
    let cutoff = sol.closed_form().pole.map_or(f64::INFINITY, |p| p - POLE_MARGIN);
    let mut worst: f64 = 0.0;
    for k in 1..sol.samples.len().saturating_sub(1) {
        if sol.samples[k + 1].0 > cutoff {
            break;
        }
        let dt = sol.samples[k + 1].0 - sol.samples[k - 1].0;
        let dlog = -1.5 * (integral[k + 1] - integral[k - 1]) / dt;
        worst = worst.max((dlog + 1.5 * sol.samples[k].1).abs());
    }
    out.decay_log_residual = Some(worst);
    match sol.blowup_time.or(sol.blowup_bracket.map(|b| b.0)) {
        Some(blowup_time) => Err(Error::HorizonTruncated {
            blowup_time,
            partial: Box::new(out),
        }),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub tr0: f64,
    pub t: f64,
    /// `tr A` (the divergence of `E₁`) at `t`.
    pub div: f64,
    /// `∫₀ᵗ tr A`.
    pub log_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSeries {
    pub tr0: f64,
    pub branch: Branch,
    pub blowup_time: Option<f64>,
    /// Slope of the log-volume over the window, when the horizon reaches it.
    pub slope: Option<f64>,
    pub final_log_volume: f64,
    /// `tr0` outside `[−2, 2]` or ε ≠ −1: outside the hyperbolic volume argument.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrowthReport {
    pub epsilon: f64,
    pub horizon: f64,
    pub step: f64,
    pub window: (f64, f64),
    pub series: Vec<VolumeSeries>,
    pub rows: Vec<VolumeRow>,
}

/// Accumulated log-volume `∫₀ᵗ tr A` for each `tr0`, with the slope over `window`.
/// Rows are emitted every `row_every` time units.
pub fn volume_growth_report(
    epsilon: f64,
    tr0s: &[f64],
    horizon: f64,
    step: f64,
    window: (f64, f64),
    row_every: f64,
) -> Result<VolumeGrowthReport> {
    let mut series = Vec::with_capacity(tr0s.len());
    let mut rows = Vec::new();
    let stride = ((row_every / step).round() as usize).max(1);
    for &tr0 in tr0s {
        let sol = riccati_solve(epsilon, tr0, horizon, step)?;
        let lv = sol.log_volume();
        let at = |t: f64| -> Option<f64> {
            let k = (t / step).round() as usize;
            (k < lv.len() && (sol.samples[k].0 - t).abs() < 0.5 * step).then(|| lv[k])
        };
        let slope = match (at(window.0), at(window.1)) {
            (Some(a), Some(b)) if window.1 > window.0 => Some((b - a) / (window.1 - window.0)),
            _ => None,
        };
        for (k, &(t, y)) in sol.samples.iter().enumerate() {
            if k % stride == 0 || k + 1 == sol.samples.len() {
                rows.push(VolumeRow {
                    tr0,
                    t,
                    div: y,
                    log_volume: lv[k],
                });
            }
        }
        series.push(VolumeSeries {
            tr0,
            branch: sol.branch,
            blowup_time: sol.blowup_time,
            slope,
            final_log_volume: lv.last().copied().unwrap_or(0.0),
            flagged: epsilon != -1.0 || !(-2.0..=2.0).contains(&tr0),
        });
    }
    Ok(VolumeGrowthReport {
        epsilon,
        horizon,
        step,
        window,
        series,
        rows,
    })
}
