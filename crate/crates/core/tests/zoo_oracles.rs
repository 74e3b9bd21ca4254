use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankframe::dynamics::{capital_frame, offdiag_pair, x_identity_residual};
use rankframe::frame::{classify_vector, ricci_frame, PointClass, VectorClass};
use rankframe::metric::{christoffel_coord, riemann_at, sectional_plane, Vec3};
use rankframe::zoo::{zoo_get, zoo_list, ZooEntry};
use rankframe::{Point, Tolerances};

fn interior_points(entry: &ZooEntry, rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    let b = entry.chart.domain.sample_box();
    let mut pts = vec![entry.base_point];
    while pts.len() < n {
        let p: Point = std::array::from_fn(|a| {
            let w = b.hi[a] - b.lo[a];
            rng.gen_range(b.lo[a] + 0.1 * w..b.hi[a] - 0.1 * w)
        });
        pts.push(p);
    }
    pts
}

fn variants() -> Vec<ZooEntry> {
    let mut out: Vec<ZooEntry> = zoo_list().iter().map(|i| zoo_get(i.name, &[]).unwrap()).collect();
    out.push(zoo_get("sphere3", &[2.0]).unwrap());
    out.push(zoo_get("product_h2xr", &[-0.5]).unwrap());
    out.push(zoo_get("product_s2xr", &[3.0]).unwrap());
    out.push(zoo_get("berger", &[0.6]).unwrap());
    out
}

#[test]
fn every_known_table_is_reproduced_end_to_end() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for entry in variants() {
        let k = &entry.known;
        for p in interior_points(&entry, &mut rng, 6) {
            let fp = ricci_frame(&entry.chart, &p, k.epsilon, &tol)
                .unwrap_or_else(|e| panic!("{} at {p:?}: {e}", entry.name));
            let got = [fp.lambda, fp.lambda12, fp.big_lambda];
            for i in 0..3 {
                assert!((got[i] - k.sectional[i]).abs() < 1e-6, "{} {p:?}: {got:?} vs {:?}", entry.name, k.sectional);
            }
            let mut ric = fp.ricci;
            ric.sort_by(f64::total_cmp);
            for i in 0..3 {
                assert!((ric[i] - k.ricci[i]).abs() < 1e-6, "{}: {ric:?} vs {:?}", entry.name, k.ricci);
            }
            assert_eq!(fp.class, k.class, "{} at {p:?}", entry.name);
            match (fp.m, k.m) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-6),
                (None, None) => {}
                other => panic!("{}: m mismatch {other:?}", entry.name),
            }
            let g = entry.chart.metric_at(&p).unwrap();
            for dir in &k.isocurved {
                let v = Vec3::from(*dir);
                let v = v / v.dot(&(g * v)).sqrt();
                let x = fp.to_frame(&v);
                assert_eq!(classify_vector(&fp, &x, 1e-6).unwrap(), VectorClass::Isocurved, "{}", entry.name);
            }
        }
    }
}

#[test]
fn space_forms_have_constant_sectional_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (entry, eps) in [
        (zoo_get("hyperbolic3", &[]).unwrap(), -1.0),
        (zoo_get("sphere3", &[1.0]).unwrap(), 1.0),
        (zoo_get("sphere3", &[0.5]).unwrap(), 4.0),
    ] {
        for p in interior_points(&entry, &mut rng, 5) {
            let curv = riemann_at(&entry.chart, &p).unwrap();
            for _ in 0..5 {
                let x = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let y = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let k = sectional_plane(&curv, &x, &y).unwrap();
                assert!((k - eps).abs() < 1e-9, "{} {p:?}: {k}", entry.name);
            }
        }
    }
}

#[test]
fn nil_christoffel_symbols_at_the_origin() {
    // g = dx² + dy² + (dz − x dy)²: Γₖ,ᵢⱼ = ½(∂ᵢgⱼₖ + ∂ⱼgᵢₖ − ∂ₖgᵢⱼ) by hand at x = 0,
    // where ∂ₓg_yz = −1 and every other first derivative vanishes.
    let nil = zoo_get("nil", &[]).unwrap();
    let gamma = christoffel_coord(&nil.chart, &[0.0; 3]).unwrap();
    let expect = |k: usize, i: usize, j: usize| -> f64 {
        match (k, [i.min(j), i.max(j)]) {
            (0, [1, 2]) => 0.5,
            (1, [0, 2]) => -0.5,
            (2, [0, 1]) => -0.5,
            _ => 0.0,
        }
    };
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                assert!((gamma.get(k, i, j) - expect(k, i, j)).abs() < 1e-14, "Γ^{k}_{i}{j}");
            }
        }
    }
}

#[test]
fn product_curvature_split() {
    let h = zoo_get("product_h2xr", &[-1.0]).unwrap();
    let curv = riemann_at(&h.chart, &[0.3, 1.7, -2.0]).unwrap();
    let (ex, ey, ez) = (Vec3::x(), Vec3::y(), Vec3::z());
    assert!((sectional_plane(&curv, &ex, &ey).unwrap() + 1.0).abs() < 1e-12);
    assert!(sectional_plane(&curv, &ex, &ez).unwrap().abs() < 1e-12);
    assert!(sectional_plane(&curv, &ey, &ez).unwrap().abs() < 1e-12);
}

#[test]
fn berger_rotated_frame_identities() {
    let tol = Tolerances::default();
    let berger = zoo_get("berger", &[]).unwrap();
    let eps = berger.known.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut first: Option<(f64, f64)> = None;
    for p in interior_points(&berger, &mut rng, 20) {
        let curv = riemann_at(&berger.chart, &p).unwrap();
        let fp = ricci_frame(&berger.chart, &p, eps, &tol).unwrap();
        assert_eq!(fp.class, PointClass::Generic);
        let cf = capital_frame(&fp).unwrap();
        let x = x_identity_residual(&curv, &fp, &cf).unwrap();
        assert!(x < 1e-6, "{x}");
        assert!(x <= 10.0 * fp.ricci_residual.max(1e-15), "{x} vs {}", fp.ricci_residual);
        let pair = offdiag_pair(&curv, &fp, &cf).unwrap();
        assert!(!pair.both_vanish(1e-4), "{pair:?}");
        // homogeneity: the pair is the same at every point, up to the frame sign
        let (r2, r3) = (pair.r2.abs(), pair.r3.abs());
        match first {
            None => first = Some((r2, r3)),
            Some((a, b)) => assert!((a - r2).abs() < 1e-6 && (b - r3).abs() < 1e-6),
        }
    }
}

#[test]
fn nil_is_not_cvc_at_one() {
    let nil = zoo_get("nil", &[]).unwrap();
    let err = ricci_frame(&nil.chart, &[0.0; 3], 1.0, &Tolerances::default()).unwrap_err();
    assert_eq!(err.kind(), "NotCvc");
}
