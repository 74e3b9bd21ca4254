//! Ricci-diagonalizing frames, the (λ, ε, Λ, m) data, point and vector
//! classification, the curvature-ε plane fields `V±`, and frame Christoffel symbols.
//!
//! Frame ordering: with Ricci eigenvalues `ρ` in the frame, the sectional
//! curvatures of the frame planes are `sec(eₐ,e_b) = S/2 − ρ_c` (`S` the scalar
//! curvature, `c` the remaining index). Taking `e₁` on the smallest, `e₂` on the
//! largest and `e₃` on the middle Ricci eigenvalue gives
//! `λ = sec(e₁,e₃) ≤ sec(e₁,e₂) ≤ Λ = sec(e₂,e₃)`, and `sec(e₁,e₂)` must equal ε.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{riemann_at, CurvatureAtPoint, DerivativeSource, MetricChart, Mat3, Vec3};
use crate::{Point, Tolerances};

/// Unit-length check used for vectors tagged unit.
pub const UNIT_TOL: f64 = 1e-10;

/// Generic points with `m` outside `[1e-6, 1e6]` are flagged as near-extremal.
pub const NEAR_EXTREMAL_M: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Isotropic,
    ExtremalMinus,
    ExtremalPlus,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorClass {
    Isocurved,
    Unicurved,
    GenericVec,
}

/// Components of a tangent vector in an ordered Ricci frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl FrameVector {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn from_vec3(v: &Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vec3(self) -> Vec3 {
        Vec3::new(self.x1, self.x2, self.x3)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn normalized(&self) -> Self {
        Self::from_vec3(&self.to_vec3().normalize())
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.to_vec3().dot(&o.to_vec3())
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::from_vec3(&self.to_vec3().cross(&o.to_vec3()))
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.x1, -self.x2, -self.x3)
    }

    pub fn check_unit(&self) -> Result<()> {
        let n = self.norm_sq();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm_sq: n });
        }
        Ok(())
    }
}

/// A point with its ordered Ricci frame and curvature data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciFramePoint {
    pub p: Point,
    /// Coordinate components of `e₁, e₂, e₃`, orthonormal under `g(p)`.
    pub frame: [[f64; 3]; 3],
    pub g: [[f64; 3]; 3],
    /// Ricci curvature of `e₁, e₂, e₃`.
    pub ricci: [f64; 3],
    /// `λ = sec(e₁,e₃)`.
    pub lambda: f64,
    /// `sec(e₁,e₂)`, equal to ε within `class_tol`.
    pub lambda12: f64,
    /// `Λ = sec(e₂,e₃)`.
    pub big_lambda: f64,
    pub epsilon: f64,
    pub m: Option<f64>,
    pub class: PointClass,
    pub near_extremal: bool,
    /// Largest mixed curvature component in the frame.
    pub ricci_residual: f64,
    pub class_tol: f64,
    pub source: DerivativeSource,
}

impl RicciFramePoint {
    pub fn e(&self, i: usize) -> Vec3 {
        Vec3::from(self.frame[i])
    }

    pub fn metric(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.g[i][j])
    }

    /// Frame components of a coordinate vector.
    pub fn to_frame(&self, v: &Vec3) -> FrameVector {
        let gv = self.metric() * v;
        FrameVector::new(self.e(0).dot(&gv), self.e(1).dot(&gv), self.e(2).dot(&gv))
    }

    /// Coordinate components of a frame vector.
    pub fn to_coords(&self, x: &FrameVector) -> Vec3 {
        self.e(0) * x.x1 + self.e(1) * x.x2 + self.e(2) * x.x3
    }

    /// Sectional curvature of the plane with unit frame normal `c`:
    /// `c₁²λ₂₃ + c₂²λ₁₃ + c₃²λ₁₂`.
    pub fn sec_of_normal(&self, c: &FrameVector) -> f64 {
        c.x1 * c.x1 * self.big_lambda + c.x2 * c.x2 * self.lambda + c.x3 * c.x3 * self.lambda12
    }

    /// Sectional curvature of `span{X, Y}` for frame vectors.
    pub fn sec_of_plane(&self, x: &FrameVector, y: &FrameVector) -> Result<f64> {
        let n = x.cross(y);
        let gram = n.norm_sq();
        if !(gram > 1e-14 * x.norm_sq() * y.norm_sq()) {
            return Err(Error::DegeneratePlane { gram });
        }
        Ok(self.sec_of_normal(&n.normalized()))
    }
}

/// Synthetic frame point with the given curvature triple and identity frame.
pub fn synthetic_frame(lambda: f64, epsilon: f64, big_lambda: f64, tol: &Tolerances) -> RicciFramePoint {
    let s = lambda + epsilon + big_lambda;
    // ρ₁ = λ₁₂ + λ₁₃, ρ₂ = λ₁₂ + λ₂₃, ρ₃ = λ₁₃ + λ₂₃
    let ricci = [epsilon + lambda, epsilon + big_lambda, lambda + big_lambda];
    debug_assert!((ricci.iter().sum::<f64>() - s * 2.0).abs() < 1e-9 * (1.0 + s.abs()));
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let (class, m, near) = classify_triple(lambda, epsilon, big_lambda, tol.class);
    RicciFramePoint {
        p: [0.0; 3],
        frame: id,
        g: id,
        ricci,
        lambda,
        lambda12: epsilon,
        big_lambda,
        epsilon,
        m,
        class,
        near_extremal: near,
        ricci_residual: 0.0,
        class_tol: tol.class,
        source: DerivativeSource::Analytic,
    }
}

fn classify_triple(lambda: f64, epsilon: f64, big_lambda: f64, ctol: f64) -> (PointClass, Option<f64>, bool) {
    let low = (lambda - epsilon).abs() < ctol;
    let high = (big_lambda - epsilon).abs() < ctol;
    match (low, high) {
        (true, true) => (PointClass::Isotropic, None, false),
        (true, false) => (PointClass::ExtremalMinus, None, false),
        (false, true) => (PointClass::ExtremalPlus, None, false),
        (false, false) => {
            let m = ((epsilon - lambda) / (big_lambda - epsilon)).sqrt();
            let near = !(1.0 / NEAR_EXTREMAL_M..=NEAR_EXTREMAL_M).contains(&m);
            (PointClass::Generic, Some(m), near)
        }
    }
}

/// Orthonormal eigenframe of the Ricci tensor, unordered: `(ρ, coordinate vectors)`.
fn ricci_eigen(curv: &CurvatureAtPoint) -> Result<([f64; 3], [Vec3; 3])> {
    let g = curv.metric();
    let ric = curv.ricci();
    let chol = g.cholesky().ok_or(Error::SingularMetric {
        point: curv.point,
        min_eigenvalue: g.symmetric_eigenvalues().min(),
    })?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(Error::EigenFailure)?;
    let b = linv * ric * linv.transpose();
    let b = (b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(b, 1e-15, 500).ok_or(Error::EigenFailure)?;
    if !eig.eigenvalues.iter().all(|x| x.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let lt_inv = linv.transpose();
    let vecs = std::array::from_fn(|i| lt_inv * eig.eigenvectors.column(i));
    Ok(([eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]], vecs))
}

/// Sign fixed so the largest-magnitude coordinate component is positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

fn frame_from_curvature(curv: &CurvatureAtPoint, epsilon: f64, ctol: f64) -> Result<RicciFramePoint> {
    let (rho, vecs) = ricci_eigen(curv)?;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| rho[a].total_cmp(&rho[b]));
    let (lo, mid, hi) = (idx[0], idx[1], idx[2]);
    let e1 = canonical_sign(vecs[lo]);
    let e3 = canonical_sign(vecs[mid]);
    let mut e2 = canonical_sign(vecs[hi]);
    if Mat3::from_columns(&[e1, e2, e3]).determinant() < 0.0 {
        e2 = -e2;
    }
    let ricci = [rho[lo], rho[hi], rho[mid]];
    let half_s = 0.5 * (rho[0] + rho[1] + rho[2]);
    let lambda = half_s - ricci[1];
    let lambda12 = half_s - ricci[2];
    let big_lambda = half_s - ricci[0];

    let mixed = [
        curv.eval(&e1, &e2, &e3, &e1),
        curv.eval(&e1, &e2, &e2, &e3),
        curv.eval(&e1, &e3, &e3, &e2),
    ];
    let ricci_residual = mixed.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let (class, m, near_extremal) = classify_triple(lambda, epsilon, big_lambda, ctol);
    let g = curv.metric();
    Ok(RicciFramePoint {
        p: curv.point,
        frame: [e1.into(), e2.into(), e3.into()],
        g: g.into(),
        ricci,
        lambda,
        lambda12,
        big_lambda,
        epsilon,
        m,
        class,
        near_extremal,
        ricci_residual,
        class_tol: ctol,
        source: curv.source,
    })
}

/// Class tolerance used for a curvature computed from the given source.
pub fn class_tol_for(source: DerivativeSource, tol: &Tolerances) -> f64 {
    match source {
        DerivativeSource::Analytic => tol.class,
        DerivativeSource::FiniteDifference => tol.class.max(tol.numeric),
    }
}

/// Ordered Ricci frame of a curvature tensor at a point.
pub fn ricci_frame_from_curvature(
    curv: &CurvatureAtPoint,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<RicciFramePoint> {
    let ctol = class_tol_for(curv.source, tol);
    let fp = frame_from_curvature(curv, epsilon, ctol)?;
    if (fp.lambda12 - epsilon).abs() > ctol {
        return Err(Error::NotCvc {
            epsilon,
            middle: fp.lambda12,
            tol: ctol,
        });
    }
    Ok(fp)
}

pub fn ricci_frame(chart: &MetricChart, p: &Point, epsilon: f64, tol: &Tolerances) -> Result<RicciFramePoint> {
    let curv = riemann_at(chart, p)?;
    ricci_frame_from_curvature(&curv, epsilon, tol)
}

pub fn classify_vector(fp: &RicciFramePoint, x: &FrameVector, tol: f64) -> Result<VectorClass> {
    x.check_unit()?;
    let class = match fp.class {
        PointClass::Isotropic => VectorClass::Isocurved,
        PointClass::ExtremalMinus => {
            if 1.0 - x.x1.abs() < tol {
                VectorClass::Isocurved
            } else {
                VectorClass::Unicurved
            }
        }
        PointClass::ExtremalPlus => {
            if 1.0 - x.x2.abs() < tol {
                VectorClass::Isocurved
            } else {
                VectorClass::Unicurved
            }
        }
        PointClass::Generic => {
            let m = fp.m.expect("generic points carry m");
            if x.x3.abs() >= tol {
                VectorClass::GenericVec
            } else {
                let scale = (1.0 + m * m).sqrt();
                let on_cone = (x.x2 - m * x.x1).abs() / scale < tol || (x.x2 + m * x.x1).abs() / scale < tol;
                if on_cone {
                    VectorClass::Isocurved
                } else {
                    VectorClass::Unicurved
                }
            }
        }
    };
    Ok(class)
}

fn radicands(x: &FrameVector, m: f64) -> (f64, f64) {
    let base = 1.0 + m * m;
    let a = m * x.x2 - x.x1;
    let b = -m * x.x2 - x.x1;
    (base - a * a, base - b * b)
}

fn radicand_ok(r: f64, m: f64) -> bool {
    r > 1e-12 * (1.0 + m * m)
}

/// `K = √(1+m²−(mx₂−x₁)²)` and `L = √(1+m²−(−mx₂−x₁)²)`.
pub fn kl_values(x: &FrameVector, m: f64) -> Result<(f64, f64)> {
    x.check_unit()?;
    let (k2, l2) = radicands(x, m);
    if !radicand_ok(k2, m) || !radicand_ok(l2, m) {
        return Err(Error::IsocurvedInput);
    }
    Ok((k2.sqrt(), l2.sqrt()))
}

fn v_signed(x: &FrameVector, m: f64) -> Result<FrameVector> {
    x.check_unit()?;
    let (k2, _) = radicands(x, m);
    if !radicand_ok(k2, m) {
        return Err(Error::IsocurvedInput);
    }
    let k = k2.sqrt();
    let (x1, x2, x3) = (x.x1, x.x2, x.x3);
    Ok(FrameVector::new(
        (1.0 + m * x1 * x2 - x1 * x1) / k,
        (m * x2 * x2 - x1 * x2 - m) / k,
        (m * x2 - x1) * x3 / k,
    ))
}

/// The unit vector `V⁺` spanning, with `X`, a curvature-ε plane at a generic point.
pub fn v_plus(x: &FrameVector, m: f64) -> Result<FrameVector> {
    v_signed(x, m)
}

/// `V⁻`: `V⁺` with `m` replaced by `−m`.
pub fn v_minus(x: &FrameVector, m: f64) -> Result<FrameVector> {
    v_signed(x, -m)
}

/// Unit vector spanning, with `X`, the unique ε-plane through `X` at a point of
/// the minus extremal class (planes containing `e₁`).
pub fn v_extremal(x: &FrameVector) -> Result<FrameVector> {
    x.check_unit()?;
    let r = 1.0 - x.x1 * x.x1;
    if r < 1e-12 {
        return Err(Error::IsocurvedInput);
    }
    let s = r.sqrt();
    Ok(FrameVector::new(r / s, -x.x1 * x.x2 / s, -x.x1 * x.x3 / s))
}

/// The plus extremal analogue of [`v_extremal`] (planes containing `e₂`).
pub fn v_extremal_plus(x: &FrameVector) -> Result<FrameVector> {
    let swapped = v_extremal(&FrameVector::new(x.x2, x.x1, x.x3))?;
    Ok(FrameVector::new(swapped.x2, swapped.x1, swapped.x3))
}

/// Orthonormal basis `(a, b)` of the plane orthogonal to the unit vector `x`.
fn normal_basis(x: &Vec3) -> (Vec3, Vec3) {
    let k = x.iamin();
    let mut axis = Vec3::zeros();
    axis[k] = 1.0;
    let a = (axis - x * x.dot(&axis)).normalize();
    let b = x.cross(&a);
    (a, b)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Unit frame normals `u ⟂ X` whose planes have sectional curvature ε.
///
/// Scans `grid_n` points of the circle of normals, refines sign changes of
/// `sec − ε` by bisection and near-zero local minima of `|sec − ε|` (double
/// roots) by golden-section search. Each plane appears with both normals `±u`.
/// At isotropic points every grid normal qualifies.
pub fn epsilon_plane_normals(fp: &RicciFramePoint, x: &FrameVector, grid_n: usize) -> Vec<FrameVector> {
    let n = grid_n.max(8);
    let xv = x.to_vec3().normalize();
    let (a, b) = normal_basis(&xv);
    let u_at = |t: f64| a * t.cos() + b * t.sin();
    let f = |t: f64| fp.sec_of_normal(&FrameVector::from_vec3(&u_at(t))) - fp.epsilon;
    let step = std::f64::consts::TAU / n as f64;
    let thetas: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();

    if fp.class == PointClass::Isotropic {
        return thetas.iter().map(|&t| FrameVector::from_vec3(&u_at(t))).collect();
    }

    let scale = (fp.big_lambda - fp.epsilon)
        .abs()
        .max((fp.lambda - fp.epsilon).abs())
        .max(1.0);
    let accept = 1e-12 * scale;
    let vals: Vec<f64> = thetas.iter().map(|&t| f(t)).collect();
    let mut roots: Vec<f64> = Vec::new();
    for k in 0..n {
        let (t0, f0) = (thetas[k], vals[k]);
        let (t1, f1) = (t0 + step, vals[(k + 1) % n]);
        if f0 == 0.0 {
            roots.push(t0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (t0, t1, f0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        let fprev = vals[(k + n - 1) % n];
        if f0.abs() <= fprev.abs() && f0.abs() <= f1.abs() {
            let t = golden_min(|t| f(t).abs(), t0 - step, t1, 200);
            if f(t).abs() < accept {
                roots.push(t);
            }
        }
    }

    let mut out: Vec<FrameVector> = Vec::new();
    for t in roots {
        let u = u_at(t);
        if out.iter().all(|v| (v.to_vec3() - u).norm() > 1e-6) {
            out.push(FrameVector::from_vec3(&u));
        }
    }
    out
}

/// Frame Christoffel symbols `Γᵢⱼᵏ = ⟨∇_{eᵢ}eⱼ, e_k⟩` (stored 0-based) and the
/// frame derivatives of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameChristoffels {
    pub gamma: [[[f64; 3]; 3]; 3],
    pub grad_m: Option<[f64; 3]>,
}

impl FrameChristoffels {
    pub fn zero() -> Self {
        Self {
            gamma: [[[0.0; 3]; 3]; 3],
            grad_m: Some([0.0; 3]),
        }
    }

    /// Builds an antisymmetric (`Γᵢⱼᵏ = −Γᵢₖʲ`) table from the nine free symbols
    /// `[Γᵢ₁², Γᵢ₁³, Γᵢ₂³]` for `i = 1, 2, 3`.
    pub fn from_free(free: [[f64; 3]; 3], grad_m: [f64; 3]) -> Self {
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for (i, f) in free.iter().enumerate() {
            gamma[i][0][1] = f[0];
            gamma[i][1][0] = -f[0];
            gamma[i][0][2] = f[1];
            gamma[i][2][0] = -f[1];
            gamma[i][1][2] = f[2];
            gamma[i][2][1] = -f[2];
        }
        Self {
            gamma,
            grad_m: Some(grad_m),
        }
    }

    /// The nine free symbols `[Γᵢ₁², Γᵢ₁³, Γᵢ₂³]`.
    pub fn free(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| [self.gamma[i][0][1], self.gamma[i][0][2], self.gamma[i][1][2]])
    }

    /// `Γᵢⱼᵏ` with 1-based indices, matching the written formulas.
    pub fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[i - 1][j - 1][k - 1]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.gamma[i - 1][j - 1][k - 1] = v;
    }

    /// `eᵢ(m)` with 1-based index; zero when `m` is not defined.
    pub fn dm(&self, i: usize) -> f64 {
        self.grad_m.map_or(0.0, |d| d[i - 1])
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    worst = worst.max((self.gamma[i][j][k] + self.gamma[i][k][j]).abs());
                }
            }
        }
        worst
    }

    /// Symbols in the frame `{e₁, −e₂, e₃}`: every symbol with an odd number of
    /// index-2 slots changes sign, as does `e₂(m)`.
    pub fn switch_e2(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let twos = [i, j, k].iter().filter(|&&s| s == 1).count();
                    if twos % 2 == 1 {
                        out.gamma[i][j][k] = -out.gamma[i][j][k];
                    }
                }
            }
        }
        if let Some(d) = out.grad_m.as_mut() {
            d[1] = -d[1];
        }
        out
    }

    /// Symbols with frame indices 1 and 2 exchanged (with `e₁(m)`, `e₂(m)` swapped).
    pub fn swap_12(&self) -> Self {
        let p = |i: usize| match i {
            0 => 1,
            1 => 0,
            other => other,
        };
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out.gamma[p(i)][p(j)][p(k)] = self.gamma[i][j][k];
                }
            }
        }
        if let Some(d) = out.grad_m.as_mut() {
            d.swap(0, 1);
        }
        out
    }
}

/// Degenerate pair of frame slots at an extremal point, if any.
fn degenerate_pair(class: PointClass) -> Option<(usize, usize)> {
    match class {
        // Λ = ε: ρ₁ = ρ₃, e₂ is distinguished
        PointClass::ExtremalPlus => Some((0, 2)),
        // λ = ε: ρ₂ = ρ₃, e₁ is distinguished
        PointClass::ExtremalMinus => Some((1, 2)),
        _ => None,
    }
}

fn min_gap(ricci: &[f64; 3], skip: Option<(usize, usize)>) -> f64 {
    let mut gap = f64::INFINITY;
    for a in 0..3 {
        for b in (a + 1)..3 {
            if skip == Some((a, b)) {
                continue;
            }
            gap = gap.min((ricci[a] - ricci[b]).abs());
        }
    }
    gap
}

/// Frame Christoffel symbols at `fp` by differencing the eigenframe field.
///
/// The frame is evaluated at `p ± h·eᵢ`, signs aligned to `fp.frame`, and the
/// difference quotient combined with the coordinate connection. At extremal
/// points the degenerate pair is gauge-fixed at each stencil point by projecting
/// the center vectors onto the stencil eigenspace; symbols that differentiate the
/// distinguished vector do not depend on this choice. `h` defaults to `1e-4`
/// scaled by the point magnitude.
pub fn frame_christoffels(
    chart: &MetricChart,
    fp: &RicciFramePoint,
    epsilon: f64,
    h: Option<f64>,
    tol: &Tolerances,
) -> Result<FrameChristoffels> {
    let degenerate = degenerate_pair(fp.class);
    if fp.class == PointClass::Isotropic {
        return Err(Error::EigenCollision {
            gap: min_gap(&fp.ricci, None),
            sep_tol: tol.sep,
        });
    }
    let scale = fp.p.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let h = h.unwrap_or(1e-4) * scale;
    let ctol = fp.class_tol;
    let g0 = fp.metric();
    let center: [Vec3; 3] = std::array::from_fn(|j| fp.e(j));

    let check_gap = |ricci: &[f64; 3]| -> Result<()> {
        let gap = min_gap(ricci, degenerate);
        if gap < tol.sep {
            return Err(Error::EigenCollision { gap, sep_tol: tol.sep });
        }
        Ok(())
    };
    check_gap(&fp.ricci)?;

    let aligned_at = |q: &Point| -> Result<([Vec3; 3], Option<f64>)> {
        let curv = riemann_at(chart, q)?;
        let sp = frame_from_curvature(&curv, epsilon, ctol)?;
        check_gap(&sp.ricci)?;
        let gq = sp.metric();
        let mut vecs: [Vec3; 3] = std::array::from_fn(|j| sp.e(j));
        if let Some((a, b)) = degenerate {
            let (va, vb) = (vecs[a], vecs[b]);
            let project = |c: &Vec3| va * va.dot(&(gq * c)) + vb * vb.dot(&(gq * c));
            let pa = project(&center[a]);
            let na = pa.dot(&(gq * pa)).sqrt();
            if !(na > 0.9) {
                return Err(Error::EigenCollision { gap: na, sep_tol: 0.9 });
            }
            let ua = pa / na;
            let pb = project(&center[b]);
            let pb = pb - ua * ua.dot(&(gq * pb));
            let nb = pb.dot(&(gq * pb)).sqrt();
            if !(nb > 0.9) {
                return Err(Error::EigenCollision { gap: nb, sep_tol: 0.9 });
            }
            vecs[a] = ua;
            vecs[b] = pb / nb;
        }
        for j in 0..3 {
            let ip = center[j].dot(&(g0 * vecs[j]));
            if ip.abs() < 0.9 {
                return Err(Error::EigenCollision { gap: ip.abs(), sep_tol: 0.9 });
            }
            if ip < 0.0 {
                vecs[j] = -vecs[j];
            }
        }
        let m = match sp.class {
            PointClass::Generic => sp.m,
            _ => None,
        };
        Ok((vecs, m))
    };

    let coord = crate::metric::christoffel_coord(chart, &fp.p)?;
    let mut gamma = [[[0.0; 3]; 3]; 3];
    let mut grad_m = [0.0; 3];
    let mut have_m = fp.class == PointClass::Generic;
    for i in 0..3 {
        let dir = center[i];
        let shift = |s: f64| -> Point { std::array::from_fn(|a| fp.p[a] + s * h * dir[a]) };
        let (fwd, m_fwd) = aligned_at(&shift(1.0))?;
        let (bwd, m_bwd) = aligned_at(&shift(-1.0))?;
        for j in 0..3 {
            let deriv = (fwd[j] - bwd[j]) / (2.0 * h) + coord.contract(&dir, &center[j]);
            let gd = g0 * deriv;
            for k in 0..3 {
                gamma[i][j][k] = center[k].dot(&gd);
            }
        }
        match (m_fwd, m_bwd) {
            (Some(a), Some(b)) => grad_m[i] = (a - b) / (2.0 * h),
            _ => have_m = false,
        }
    }
    Ok(FrameChristoffels {
        gamma,
        grad_m: have_m.then_some(grad_m),
    })
}
