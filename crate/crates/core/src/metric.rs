//! Metric charts, coordinate Christoffel symbols, the Riemann tensor and
//! sectional curvature.
//!
//! Curvature sign convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` and
//! `R(X,Y,Z,W) = ⟨R(X,Y)Z, W⟩`, so that `sec(X,Y) = R(X,Y,Y,X) / |X∧Y|²` and the
//! unit sphere has `sec = +1`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, Real};
use crate::{Point, Tolerances};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Six independent entries of a symmetric 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl Sym3 {
    /// Builds from the upper triangle of `m`; the lower triangle is ignored.
    pub fn from_upper(m: &Mat3) -> Self {
        Self {
            xx: m[(0, 0)],
            xy: m[(0, 1)],
            xz: m[(0, 2)],
            yy: m[(1, 1)],
            yz: m[(1, 2)],
            zz: m[(2, 2)],
        }
    }

    /// Builds from the average of `m` and its transpose.
    pub fn from_symmetrized(m: &Mat3) -> Self {
        Self::from_upper(&((m + m.transpose()) * 0.5))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.xx,
            (0, 1) => self.xy,
            (0, 2) => self.xz,
            (1, 1) => self.yy,
            (1, 2) => self.yz,
            (2, 2) => self.zz,
            _ => panic!("Sym3 index out of range: ({i}, {j})"),
        }
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::new(
            self.xx, self.xy, self.xz, self.xy, self.yy, self.yz, self.xz, self.yz, self.zz,
        )
    }
}

/// Closed coordinate box; bounds may be infinite. Queries must lie strictly inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Point,
    pub hi: Point,
}

impl Domain {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    pub fn unbounded() -> Self {
        Self {
            lo: [f64::NEG_INFINITY; 3],
            hi: [f64::INFINITY; 3],
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|a| p[a].is_finite() && self.lo[a] < p[a] && p[a] < self.hi[a])
    }

    /// True when the axis-aligned cube of half-width `h[a]` around `p` is interior.
    pub fn contains_stencil(&self, p: &Point, h: &[f64; 3]) -> bool {
        (0..3).all(|a| self.lo[a] < p[a] - h[a] && p[a] + h[a] < self.hi[a])
    }

    /// A bounded sub-box used for lattice sampling of infinite domains.
    pub fn sample_box(&self) -> Domain {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for a in 0..3 {
            match (lo[a].is_finite(), hi[a].is_finite()) {
                (true, true) => {}
                (false, false) => {
                    lo[a] = -1.0;
                    hi[a] = 1.0;
                }
                (true, false) => hi[a] = lo[a] + 2.0,
                (false, true) => lo[a] = hi[a] - 2.0,
            }
        }
        Domain { lo, hi }
    }

    /// `n³` interior lattice points at fractions `(k+1)/(n+1)` of each bounded edge.
    pub fn lattice(&self, n: usize) -> Vec<Point> {
        let b = self.sample_box();
        let coord = |a: usize, k: usize| b.lo[a] + (b.hi[a] - b.lo[a]) * (k + 1) as f64 / (n + 1) as f64;
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push([coord(0, i), coord(1, j), coord(2, k)]);
                }
            }
        }
        out
    }
}

/// Metric with its first and (optionally) second partial derivatives at a point.
/// `dg[a]` is `∂_a g`, `d2g[a][b]` is `∂_a ∂_b g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: [Mat3; 3],
    pub d2g: Option<[[Mat3; 3]; 3]>,
}

/// Where derivative information came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// A metric component field on a chart.
pub trait MetricField: Send + Sync {
    fn metric(&self, p: &Point) -> Mat3;

    /// Exact derivatives, when the field can provide them.
    fn jet(&self, _p: &Point) -> Option<MetricJet> {
        None
    }
}

/// A metric written once over [`Real`] scalars.
pub trait GenericMetric: Send + Sync {
    fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3];
}

/// Adapter giving a [`GenericMetric`] exact derivatives via [`Jet2`].
pub struct Analytic<M>(pub M);

impl<M: GenericMetric> MetricField for Analytic<M> {
    fn metric(&self, p: &Point) -> Mat3 {
        let g = self.0.eval(*p);
        Mat3::from_fn(|i, j| g[i][j])
    }

    fn jet(&self, p: &Point) -> Option<MetricJet> {
        let g = self.0.eval(Jet2::seed(p));
        Some(MetricJet {
            g: Mat3::from_fn(|i, j| g[i][j].v),
            dg: std::array::from_fn(|a| Mat3::from_fn(|i, j| g[i][j].d[a])),
            d2g: Some(std::array::from_fn(|a| {
                std::array::from_fn(|b| Mat3::from_fn(|i, j| g[i][j].h[a][b]))
            })),
        })
    }
}

struct FnField<F>(F);

impl<F> MetricField for FnField<F>
where
    F: Fn(&Point) -> Mat3 + Send + Sync,
{
    fn metric(&self, p: &Point) -> Mat3 {
        (self.0)(p)
    }
}

/// A coordinate box with a positive-definite metric field. Immutable once built.
#[derive(Clone)]
pub struct MetricChart {
    pub name: String,
    pub coords: [String; 3],
    pub domain: Domain,
    pub tol: Tolerances,
    field: Arc<dyn MetricField>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("coords", &self.coords)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl MetricChart {
    pub fn new(name: impl Into<String>, domain: Domain, field: Arc<dyn MetricField>) -> Self {
        Self {
            name: name.into(),
            coords: ["x".into(), "y".into(), "z".into()],
            domain,
            tol: Tolerances::default(),
            field,
        }
    }

    pub fn analytic<M: GenericMetric + 'static>(name: impl Into<String>, domain: Domain, m: M) -> Self {
        Self::new(name, domain, Arc::new(Analytic(m)))
    }

    /// A chart with numeric derivatives only.
    pub fn from_fn<F>(name: impl Into<String>, domain: Domain, g: F) -> Self
    where
        F: Fn(&Point) -> Mat3 + Send + Sync + 'static,
    {
        Self::new(name, domain, Arc::new(FnField(g)))
    }

    pub fn with_coords(mut self, coords: [&str; 3]) -> Self {
        self.coords = coords.map(String::from);
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.field.jet(&self.domain.sample_box().lattice(1)[0]).is_some()
    }

    /// Metric at an interior point, checked for positive definiteness.
    pub fn metric_at(&self, p: &Point) -> Result<Mat3> {
        if !self.domain.contains(p) {
            return Err(Error::Domain { point: *p });
        }
        let g = self.field.metric(p);
        check_positive_definite(&g, p)?;
        Ok(g)
    }

    /// Metric and derivatives; finite differences when the field has no jet.
    pub fn jet_at(&self, p: &Point) -> Result<(MetricJet, DerivativeSource)> {
        if !self.domain.contains(p) {
            return Err(Error::Domain { point: *p });
        }
        if let Some(mut jet) = self.field.jet(p) {
            check_positive_definite(&jet.g, p)?;
            if jet.d2g.is_none() {
                jet.d2g = Some(self.second_from_first(p)?);
            }
            return Ok((jet, DerivativeSource::Analytic));
        }
        let g = self.metric_at(p)?;
        let (dg, d2g) = self.finite_difference_jet(p)?;
        Ok((MetricJet { g, dg, d2g: Some(d2g) }, DerivativeSource::FiniteDifference))
    }

    /// Metric and first derivatives only; cheaper than [`Self::jet_at`] for
    /// finite-difference charts.
    pub fn first_derivatives_at(&self, p: &Point) -> Result<(Mat3, [Mat3; 3], DerivativeSource)> {
        if !self.domain.contains(p) {
            return Err(Error::Domain { point: *p });
        }
        if let Some(jet) = self.field.jet(p) {
            check_positive_definite(&jet.g, p)?;
            return Ok((jet.g, jet.dg, DerivativeSource::Analytic));
        }
        let g = self.metric_at(p)?;
        let (s1, _) = self.steps(p)?;
        if !self.domain.contains_stencil(p, &s1) {
            return Err(Error::Domain { point: *p });
        }
        let dg = std::array::from_fn(|a| {
            (self.shifted(p, &[(a, s1[a])]) - self.shifted(p, &[(a, -s1[a])])) / (2.0 * s1[a])
        });
        Ok((g, dg, DerivativeSource::FiniteDifference))
    }

    fn steps(&self, p: &Point) -> Result<([f64; 3], [f64; 3])> {
        let h1 = f64::EPSILON.cbrt();
        let h2 = f64::EPSILON.powf(0.25);
        let mut s1 = [0.0; 3];
        let mut s2 = [0.0; 3];
        for a in 0..3 {
            let scale = p[a].abs().max(1.0);
            s1[a] = h1 * scale;
            s2[a] = h2 * scale;
            if p[a] + s1[a] == p[a] || !(p[a] + s2[a]).is_finite() || !(p[a] - s2[a]).is_finite() {
                return Err(Error::DerivativeFailure { point: *p });
            }
        }
        Ok((s1, s2))
    }

    fn shifted(&self, p: &Point, moves: &[(usize, f64)]) -> Mat3 {
        let mut q = *p;
        for &(a, d) in moves {
            q[a] += d;
        }
        self.field.metric(&q)
    }

    fn finite_difference_jet(&self, p: &Point) -> Result<([Mat3; 3], [[Mat3; 3]; 3])> {
        let (s1, s2) = self.steps(p)?;
        if !self.domain.contains_stencil(p, &s2) {
            return Err(Error::Domain { point: *p });
        }
        let dg = std::array::from_fn(|a| {
            (self.shifted(p, &[(a, s1[a])]) - self.shifted(p, &[(a, -s1[a])])) / (2.0 * s1[a])
        });
        let g0 = self.field.metric(p);
        let mut d2g = [[Mat3::zeros(); 3]; 3];
        for a in 0..3 {
            let h = s2[a];
            d2g[a][a] =
                (self.shifted(p, &[(a, h)]) - 2.0 * g0 + self.shifted(p, &[(a, -h)])) / (h * h);
            for b in (a + 1)..3 {
                let k = s2[b];
                let m = (self.shifted(p, &[(a, h), (b, k)]) - self.shifted(p, &[(a, h), (b, -k)])
                    - self.shifted(p, &[(a, -h), (b, k)])
                    + self.shifted(p, &[(a, -h), (b, -k)]))
                    / (4.0 * h * k);
                d2g[a][b] = m;
                d2g[b][a] = m;
            }
        }
        Ok((dg, d2g))
    }

    fn second_from_first(&self, p: &Point) -> Result<[[Mat3; 3]; 3]> {
        let (s1, _) = self.steps(p)?;
        if !self.domain.contains_stencil(p, &s1) {
            return Err(Error::Domain { point: *p });
        }
        let mut d2g = [[Mat3::zeros(); 3]; 3];
        for b in 0..3 {
            let mut qp = *p;
            let mut qm = *p;
            qp[b] += s1[b];
            qm[b] -= s1[b];
            let jp = self.field.jet(&qp).ok_or(Error::DerivativeFailure { point: *p })?;
            let jm = self.field.jet(&qm).ok_or(Error::DerivativeFailure { point: *p })?;
            for a in 0..3 {
                d2g[a][b] = (jp.dg[a] - jm.dg[a]) / (2.0 * s1[b]);
            }
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let m = (d2g[a][b] + d2g[b][a]) * 0.5;
                d2g[a][b] = m;
                d2g[b][a] = m;
            }
        }
        Ok(d2g)
    }

    /// Largest mismatch between supplied first derivatives and central differences.
    pub fn derivative_mismatch(&self, p: &Point) -> Result<Option<f64>> {
        let Some(jet) = self.field.jet(p) else {
            return Ok(None);
        };
        let (dg, _) = self.finite_difference_jet(p)?;
        let worst = (0..3)
            .map(|a| (jet.dg[a] - dg[a]).abs().max())
            .fold(0.0, f64::max);
        Ok(Some(worst))
    }

    /// Tolerance matching the derivative source.
    pub fn derivative_tol(&self, source: DerivativeSource) -> f64 {
        match source {
            DerivativeSource::Analytic => self.tol.analytic,
            DerivativeSource::FiniteDifference => self.tol.numeric,
        }
    }

    pub fn inner(&self, p: &Point, u: &Vec3, v: &Vec3) -> Result<f64> {
        Ok(u.dot(&(self.metric_at(p)? * v)))
    }
}

pub(crate) fn check_positive_definite(g: &Mat3, p: &Point) -> Result<()> {
    if g.iter().all(|x| x.is_finite()) && Cholesky::new(*g).is_some() {
        return Ok(());
    }
    let min_eigenvalue = if g.iter().all(|x| x.is_finite()) {
        g.symmetric_eigenvalues().min()
    } else {
        f64::NAN
    };
    Err(Error::SingularMetric {
        point: *p,
        min_eigenvalue,
    })
}

/// Coordinate Christoffel symbols, stored as `[k][i][j] = Γᵏᵢⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 3]; 3]; 3]);

impl Christoffel {
    pub fn from_jet(jet: &MetricJet) -> Self {
        let ginv = jet.g.try_inverse().expect("positive-definite metric is invertible");
        let lowered = lowered_symbols(&jet.dg);
        let mut out = [[[0.0; 3]; 3]; 3];
        for (k, row) in out.iter_mut().enumerate() {
            for (i, col) in row.iter_mut().enumerate() {
                for (j, v) in col.iter_mut().enumerate() {
                    *v = (0..3).map(|l| ginv[(k, l)] * lowered[l][i][j]).sum();
                }
            }
        }
        Christoffel(out)
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    /// `Γᵏᵢⱼ uⁱ wʲ`.
    pub fn contract(&self, u: &Vec3, w: &Vec3) -> Vec3 {
        Vec3::from_fn(|k, _| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.0[k][i][j] * u[i] * w[j];
                }
            }
            s
        })
    }

    /// Matrix `Mᵏⱼ = Γᵏᵢⱼ uⁱ`, the connection acting along direction `u`.
    pub fn along(&self, u: &Vec3) -> Mat3 {
        Mat3::from_fn(|k, j| (0..3).map(|i| self.0[k][i][j] * u[i]).sum())
    }

    /// Largest `|∇_k g_ij|` reconstructed from these symbols.
    pub fn compatibility_residual(&self, g: &Mat3, dg: &[Mat3; 3]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut r = dg[k][(i, j)];
                    for l in 0..3 {
                        r -= self.0[l][k][i] * g[(l, j)] + self.0[l][k][j] * g[(i, l)];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// `Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, indexed `[l][i][j]`.
fn lowered_symbols(dg: &[Mat3; 3]) -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for (l, row) in out.iter_mut().enumerate() {
        for (i, col) in row.iter_mut().enumerate() {
            for (j, v) in col.iter_mut().enumerate() {
                *v = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
        }
    }
    out
}

pub fn christoffel_coord(chart: &MetricChart, p: &Point) -> Result<Christoffel> {
    let (g, dg, _) = chart.first_derivatives_at(p)?;
    Ok(Christoffel::from_jet(&MetricJet { g, dg, d2g: None }))
}

/// Full 81-component lowered Riemann tensor `R_ijkl = R(∂i,∂j,∂k,∂l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRiemann(pub [[[[f64; 3]; 3]; 3]; 3]);

impl RawRiemann {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[i][j][k][l]
    }

    /// Worst violation of antisymmetry, pair symmetry and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn riemann_raw(chart: &MetricChart, p: &Point) -> Result<(RawRiemann, MetricJet, DerivativeSource)> {
    let (jet, source) = chart.jet_at(p)?;
    Ok((raw_from_jet(&jet), jet, source))
}

fn raw_from_jet(jet: &MetricJet) -> RawRiemann {
    let d2g = jet.d2g.expect("jet_at always fills second derivatives");
    let ginv = jet.g.try_inverse().expect("positive-definite metric is invertible");
    let gamma = Christoffel::from_jet(jet);
    let lowered = lowered_symbols(&jet.dg);

    // ∂_a Γᵏᵢⱼ = (∂_a g^{kl}) Γ_{l,ij} + g^{kl} ∂_a Γ_{l,ij}
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3]; // [a][k][i][j]
    for (a, da) in dgamma.iter_mut().enumerate() {
        let dginv = -ginv * jet.dg[a] * ginv;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        let dlow =
                            0.5 * (d2g[a][i][(j, l)] + d2g[a][j][(i, l)] - d2g[a][l][(i, j)]);
                        s += dginv[(k, l)] * lowered[l][i][j] + ginv[(k, l)] * dlow;
                    }
                    da[k][i][j] = s;
                }
            }
        }
    }

    // Rᵐ_kij: component m of R(∂i,∂j)∂k
    let mut up = [[[[0.0; 3]; 3]; 3]; 3]; // [m][k][i][j]
    for (m, um) in up.iter_mut().enumerate() {
        for (k, uk) in um.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = dgamma[i][m][j][k] - dgamma[j][m][i][k];
                    for n in 0..3 {
                        s += gamma.0[m][i][n] * gamma.0[n][j][k] - gamma.0[m][j][n] * gamma.0[n][i][k];
                    }
                    uk[i][j] = s;
                }
            }
        }
    }

    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        for (j, rij) in ri.iter_mut().enumerate() {
            for (k, rijk) in rij.iter_mut().enumerate() {
                for (l, v) in rijk.iter_mut().enumerate() {
                    *v = (0..3).map(|m| jet.g[(l, m)] * up[m][k][i][j]).sum();
                }
            }
        }
    }
    RawRiemann(r)
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Index and sign of the bivector slot for the ordered pair `(i, j)`.
fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    let (lo, hi, sign) = match i.cmp(&j) {
        std::cmp::Ordering::Less => (i, j, 1.0),
        std::cmp::Ordering::Greater => (j, i, -1.0),
        std::cmp::Ordering::Equal => return None,
    };
    let slot = PAIRS.iter().position(|&p| p == (lo, hi))?;
    Some((slot, sign))
}

/// Bivector components `(u∧v)^{ij}` for the pairs `(0,1), (0,2), (1,2)`.
pub fn wedge(u: &Vec3, v: &Vec3) -> Vec3 {
    Vec3::from_fn(|s, _| {
        let (i, j) = PAIRS[s];
        u[i] * v[j] - u[j] * v[i]
    })
}

/// Curvature at a point, stored as the symmetric bivector form
/// `B[(ij),(kl)] = R_ijkl` over the pairs `(0,1), (0,2), (1,2)`.
///
/// In dimension three this carries exactly the algebraic curvature tensors:
/// antisymmetry and pair symmetry hold by construction and the first Bianchi
/// identity is automatic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureAtPoint {
    pub point: Point,
    pub g: Sym3,
    pub bivector: Sym3,
    pub source: DerivativeSource,
    /// Symmetry residual of the raw tensor before compaction.
    pub raw_symmetry_residual: f64,
}

impl CurvatureAtPoint {
    /// Builds from a bivector form and metric directly (synthetic tensors).
    pub fn from_bivector(point: Point, g: Mat3, bivector: Mat3) -> Self {
        Self {
            point,
            g: Sym3::from_symmetrized(&g),
            bivector: Sym3::from_symmetrized(&bivector),
            source: DerivativeSource::Analytic,
            raw_symmetry_residual: 0.0,
        }
    }

    pub fn from_raw(point: Point, g: &Mat3, raw: &RawRiemann, source: DerivativeSource) -> Self {
        let b = Mat3::from_fn(|s, t| {
            let (i, j) = PAIRS[s];
            let (k, l) = PAIRS[t];
            raw.get(i, j, k, l)
        });
        Self {
            point,
            g: Sym3::from_symmetrized(g),
            bivector: Sym3::from_symmetrized(&b),
            source,
            raw_symmetry_residual: raw.symmetry_residual(),
        }
    }

    pub fn metric(&self) -> Mat3 {
        self.g.to_matrix()
    }

    pub fn inner(&self, u: &Vec3, v: &Vec3) -> f64 {
        u.dot(&(self.metric() * v))
    }

    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (pair_slot(i, j), pair_slot(k, l)) {
            (Some((s, a)), Some((t, b))) => a * b * self.bivector.get(s, t),
            _ => 0.0,
        }
    }

    /// `R(X,Y,Z,W)`.
    pub fn eval(&self, x: &Vec3, y: &Vec3, z: &Vec3, w: &Vec3) -> f64 {
        wedge(x, y).dot(&(self.bivector.to_matrix() * wedge(z, w)))
    }

    /// Ricci tensor in coordinates, `Ric_jk = g^{il} R_ijkl`.
    pub fn ricci(&self) -> Mat3 {
        let ginv = self.metric().try_inverse().expect("positive-definite metric is invertible");
        Mat3::from_fn(|j, k| {
            let mut s = 0.0;
            for i in 0..3 {
                for l in 0..3 {
                    s += ginv[(i, l)] * self.component(i, j, k, l);
                }
            }
            s
        })
    }

    pub fn to_raw(&self) -> RawRiemann {
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for (i, ri) in r.iter_mut().enumerate() {
            for (j, rij) in ri.iter_mut().enumerate() {
                for (k, rijk) in rij.iter_mut().enumerate() {
                    for (l, v) in rijk.iter_mut().enumerate() {
                        *v = self.component(i, j, k, l);
                    }
                }
            }
        }
        RawRiemann(r)
    }
}

pub fn riemann_at(chart: &MetricChart, p: &Point) -> Result<CurvatureAtPoint> {
    let (raw, jet, source) = riemann_raw(chart, p)?;
    Ok(CurvatureAtPoint::from_raw(*p, &jet.g, &raw, source))
}

/// Sectional curvature of `span{X, Y}`.
pub fn sectional_plane(curv: &CurvatureAtPoint, x: &Vec3, y: &Vec3) -> Result<f64> {
    let xx = curv.inner(x, x);
    let yy = curv.inner(y, y);
    let xy = curv.inner(x, y);
    let gram = xx * yy - xy * xy;
    if !(gram > 1e-14 * xx * yy) {
        return Err(Error::DegeneratePlane { gram });
    }
    Ok(curv.eval(x, y, y, x) / gram)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct HalfSpace;
    impl GenericMetric for HalfSpace {
        fn eval<S: Real>(&self, p: [S; 3]) -> [[S; 3]; 3] {
            let c = S::cst(1.0) / (p[2] * p[2]);
            let z = S::cst(0.0);
            [[c, z, z], [z, c, z], [z, z, c]]
        }
    }

    fn half_space() -> MetricChart {
        MetricChart::analytic(
            "h3",
            Domain::new([f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0], [f64::INFINITY; 3]),
            HalfSpace,
        )
    }

    #[test]
    fn domain_rejects_boundary_and_outside() {
        let chart = half_space();
        assert!(matches!(chart.metric_at(&[0.0, 0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(chart.metric_at(&[0.0, 0.0, -1.0]), Err(Error::Domain { .. })));
        assert!(chart.metric_at(&[0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn stencil_leaving_box_is_a_domain_error() {
        let chart = MetricChart::from_fn("flat", Domain::new([0.0; 3], [1.0; 3]), |_| Mat3::identity());
        assert!(riemann_at(&chart, &[0.5, 0.5, 0.5]).is_ok());
        assert!(matches!(riemann_at(&chart, &[1e-5, 0.5, 0.5]), Err(Error::Domain { .. })));
    }

    #[test]
    fn non_positive_metric_is_reported() {
        let chart = MetricChart::from_fn("bad", Domain::unbounded(), |_| {
            Mat3::from_diagonal(&Vec3::new(1.0, -1.0, 1.0))
        });
        assert!(matches!(
            christoffel_coord(&chart, &[0.0; 3]),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn huge_coordinates_underflow_the_stencil() {
        let chart = MetricChart::from_fn("flat", Domain::unbounded(), |_| Mat3::identity());
        assert!(matches!(
            riemann_at(&chart, &[f64::MAX, 0.0, 0.0]),
            Err(Error::DerivativeFailure { .. })
        ));
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let curv = riemann_at(&half_space(), &[0.0, 0.0, 1.0]).unwrap();
        let x = Vec3::new(1.0, 2.0, 0.0);
        assert!(matches!(
            sectional_plane(&curv, &x, &(2.0 * x)),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn bivector_storage_reproduces_raw_tensor() {
        let chart = half_space();
        let (raw, jet, src) = riemann_raw(&chart, &[0.3, -0.2, 0.7]).unwrap();
        let curv = CurvatureAtPoint::from_raw([0.3, -0.2, 0.7], &jet.g, &raw, src);
        let back = curv.to_raw();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert!((back.get(i, j, k, l) - raw.get(i, j, k, l)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn sym3_round_trip() {
        let m = Mat3::new(1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0);
        assert_eq!(Sym3::from_upper(&m).to_matrix(), m);
    }
}
