//! Random instances of the frame-level systems, for property tests and the
//! acceptance suite. Every instance is built directly from the defining
//! relations, independently of the residual code that checks them.

use rand::Rng;

use crate::frame::{synthetic_frame, FrameChristoffels, FrameVector, RicciFramePoint};
use crate::metric::{CurvatureAtPoint, Mat3, RawRiemann, Vec3};
use crate::Tolerances;

fn sym<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-2.0..2.0)
}

/// Uniform random unit frame vector.
pub fn unit_vector<R: Rng>(rng: &mut R) -> FrameVector {
    loop {
        let v = FrameVector::new(sym(rng), sym(rng), sym(rng));
        let n = v.norm_sq();
        if n > 1e-2 && n < 4.0 {
            return v.normalized();
        }
    }
}

/// Slope `m` drawn from a range that keeps `1 + m²` moderate.
pub fn slope<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.2..5.0)
}

/// Free symbols `[Γᵢ₁², Γᵢ₁³, Γᵢ₂³]` in the layout of [`FrameChristoffels::from_free`].
struct Free {
    g11_2: f64,
    g11_3: f64,
    g12_3: f64,
    g21_2: f64,
    g21_3: f64,
    g22_3: f64,
    g31_2: f64,
    g31_3: f64,
    g32_3: f64,
}

impl Free {
    fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            g11_2: sym(rng),
            g11_3: sym(rng),
            g12_3: sym(rng),
            g21_2: sym(rng),
            g21_3: sym(rng),
            g22_3: sym(rng),
            g31_2: sym(rng),
            g31_3: sym(rng),
            g32_3: sym(rng),
        }
    }

    // Symbols fixed by antisymmetry in the last two slots.
    fn g22_1(&self) -> f64 {
        -self.g21_2
    }
    fn g33_1(&self) -> f64 {
        -self.g31_3
    }
    fn g33_2(&self) -> f64 {
        -self.g32_3
    }

    fn build(&self, grad_m: [f64; 3]) -> FrameChristoffels {
        FrameChristoffels::from_free(
            [
                [self.g11_2, self.g11_3, self.g12_3],
                [self.g21_2, self.g21_3, self.g22_3],
                [self.g31_2, self.g31_3, self.g32_3],
            ],
            grad_m,
        )
    }
}

/// Symbols and `grad m` satisfying the plus point system at slope `m`:
/// `Γ₁₁³ = mΓ₁₂³ = mΓ₂₁³ = m²Γ₂₂³` and the three derivative equations.
pub fn plus_point<R: Rng>(rng: &mut R, m: f64) -> FrameChristoffels {
    let mut f = Free::random(rng);
    let t = f.g22_3;
    f.g12_3 = m * t;
    f.g21_3 = m * t;
    f.g11_3 = m * m * t;
    let k = 1.0 + m * m;
    let grad = [
        k * f.g11_2 + m * f.g33_1() - m * m * f.g33_2(),
        -k * f.g22_1() + f.g33_1() - m * f.g33_2(),
        k * f.g31_2,
    ];
    f.build(grad)
}

/// Symbols and `grad m` satisfying the minus point system at slope `m`. With
/// `geodesic`, additionally `⟨∇_{E₁}E₁, E₃⟩ = 0`, which forces `Γ₂₂³ = 0`.
pub fn minus_point<R: Rng>(rng: &mut R, m: f64, geodesic: bool) -> FrameChristoffels {
    let mut f = Free::random(rng);
    let t = if geodesic { 0.0 } else { f.g22_3 };
    f.g22_3 = t;
    f.g12_3 = -m * t;
    f.g21_3 = -m * t;
    f.g11_3 = m * m * t;
    let k = 1.0 + m * m;
    let grad = [
        -k * f.g11_2 + m * f.g33_1() + m * m * f.g33_2(),
        k * f.g22_1() - f.g33_1() - m * f.g33_2(),
        -k * f.g31_2,
    ];
    f.build(grad)
}

/// Symbols satisfying the minus-extremal relations
/// `Γ₁₁² = Γ₁₁³ = Γ₂₁³ = Γ₃₁² = 0`, `Γ₃₃¹ = Γ₂₂¹`.
pub fn minus_extremal<R: Rng>(rng: &mut R) -> FrameChristoffels {
    let mut f = Free::random(rng);
    f.g11_2 = 0.0;
    f.g11_3 = 0.0;
    f.g21_3 = 0.0;
    f.g31_2 = 0.0;
    // Γ₃₃¹ = −Γ₃₁³ and Γ₂₂¹ = −Γ₂₁²
    f.g31_3 = f.g21_2;
    f.build([sym(rng), sym(rng), sym(rng)])
}

/// Symbols satisfying the plus-extremal relations
/// `Γ₂₂¹ = Γ₂₂³ = Γ₁₂³ = Γ₃₂¹ = 0`, `Γ₃₃² = Γ₁₁²`.
pub fn plus_extremal<R: Rng>(rng: &mut R) -> FrameChristoffels {
    let mut f = Free::random(rng);
    f.g21_2 = 0.0;
    f.g22_3 = 0.0;
    f.g12_3 = 0.0;
    f.g31_2 = 0.0;
    // Γ₃₃² = −Γ₃₂³
    f.g32_3 = -f.g11_2;
    f.build([sym(rng), sym(rng), sym(rng)])
}

/// Generic curvature triple `λ < ε < Λ`.
pub fn generic_triple<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    let eps = sym(rng);
    let lambda = eps - rng.gen_range(0.1..2.0);
    let big = eps + rng.gen_range(0.1..2.0);
    (lambda, eps, big)
}

/// Random positive-definite metric and a `g`-orthonormal, positively oriented frame.
fn random_metric_frame<R: Rng>(rng: &mut R) -> (Mat3, Mat3) {
    let a = Mat3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
    let g = a * a.transpose() + Mat3::identity();
    let l = g.cholesky().expect("positive definite").l();
    let q = loop {
        let r = Mat3::from_fn(|_, _| sym(rng));
        if r.determinant().abs() > 0.1 {
            break r.qr().q();
        }
    };
    let q = if q.determinant() < 0.0 { -q } else { q };
    // Fᵀ g F = Qᵀ L⁻¹ L Lᵀ L⁻ᵀ Q = I
    let f = l.transpose().try_inverse().expect("invertible") * q;
    (g, f)
}

/// A curvature tensor that is diagonal in a random `g`-orthonormal frame, with
/// sectional curvatures `sec(e₁,e₂) = ε`, `sec(e₁,e₃) = λ`, `sec(e₂,e₃) = Λ`,
/// together with the frame point carrying that exact frame.
pub fn ricci_diagonal<R: Rng>(
    rng: &mut R,
    (lambda, eps, big): (f64, f64, f64),
    tol: &Tolerances,
) -> (CurvatureAtPoint, RicciFramePoint) {
    let (g, f) = random_metric_frame(rng);
    let sec = [[0.0, eps, lambda], [eps, 0.0, big], [lambda, big, 0.0]];
    // Frame components: R(eₐ,e_b,e_b,eₐ) = sec(a,b).
    let frame_r = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        if a == b || c == d {
            0.0
        } else if a == d && b == c {
            sec[a][b]
        } else if a == c && b == d {
            -sec[a][b]
        } else {
            0.0
        }
    };
    let finv = f.try_inverse().expect("invertible frame");
    // ∂ᵢ = Σₐ (F⁻¹)ₐᵢ eₐ
    let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            if a == b {
                                continue;
                            }
                            s += finv[(a, i)] * finv[(b, j)] * (finv[(b, k)] * finv[(a, l)] - finv[(a, k)] * finv[(b, l)])
                                * frame_r(a, b, b, a);
                        }
                    }
                    raw[i][j][k][l] = s;
                }
            }
        }
    }
    let curv = CurvatureAtPoint::from_raw(
        [0.0; 3],
        &g,
        &RawRiemann(raw),
        crate::metric::DerivativeSource::Analytic,
    );
    let mut fp = synthetic_frame(lambda, eps, big, tol);
    fp.g = g.into();
    fp.frame = std::array::from_fn(|c| Vec3::from(f.column(c)).into());
    (curv, fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::sectional_plane;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ricci_diagonal_reproduces_its_triple() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = Tolerances::default();
        for _ in 0..20 {
            let triple = generic_triple(&mut rng);
            let (curv, fp) = ricci_diagonal(&mut rng, triple, &tol);
            let (e1, e2, e3) = (fp.e(0), fp.e(1), fp.e(2));
            assert!((sectional_plane(&curv, &e1, &e2).unwrap() - triple.1).abs() < 1e-12);
            assert!((sectional_plane(&curv, &e1, &e3).unwrap() - triple.0).abs() < 1e-12);
            assert!((sectional_plane(&curv, &e2, &e3).unwrap() - triple.2).abs() < 1e-12);
            assert!(curv.eval(&e1, &e2, &e2, &e3).abs() < 1e-12);
        }
    }

    #[test]
    fn instances_are_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for fc in [
            plus_point(&mut rng, 1.3),
            minus_point(&mut rng, 0.7, true),
            minus_extremal(&mut rng),
            plus_extremal(&mut rng),
        ] {
            assert_eq!(fc.antisymmetry_residual(), 0.0);
        }
    }
}
