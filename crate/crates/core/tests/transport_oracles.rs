use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankframe::frame::ricci_frame;
use rankframe::metric::Vec3;
use rankframe::transport::{attach_frames, integrate_geodesic, parallel_consistency, rank_deficit};
use rankframe::zoo::{zoo_get, ZooEntry};
use rankframe::Tolerances;

fn unit_direction(entry: &ZooEntry, rng: &mut ChaCha8Rng) -> Vec3 {
    let g = entry.chart.metric_at(&entry.base_point).unwrap();
    let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    v / v.dot(&(g * v)).sqrt()
}

#[test]
fn space_forms_have_full_rank_along_random_geodesics() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (entry, eps) in [
        (zoo_get("hyperbolic3", &[]).unwrap(), -1.0),
        (zoo_get("sphere3", &[1.0]).unwrap(), 1.0),
    ] {
        for _ in 0..3 {
            let dir = unit_direction(&entry, &mut rng);
            let trace = integrate_geodesic(&entry.chart, &entry.base_point, &dir, 2.0, 1e-3, &tol).unwrap();
            assert!(trace.max_drift < 1e-8);
            let rd = rank_deficit(&entry.chart, &trace, eps, 64).unwrap();
            assert!(rd.deficit < 1e-6, "{}: {}", entry.name, rd.deficit);
        }
    }
}

#[test]
fn nil_has_a_rank_deficit() {
    let tol = Tolerances::default();
    let nil = zoo_get("nil", &[]).unwrap();
    let dir = Vec3::new(0.6, 0.0, 0.8);
    let trace = integrate_geodesic(&nil.chart, &nil.base_point, &dir, 5.0, 1e-2, &tol).unwrap();
    let rd = rank_deficit(&nil.chart, &trace, 0.25, 64).unwrap();
    assert!(rd.deficit > 0.01, "{}", rd.deficit);
}

#[test]
fn berger_parallel_field_and_residual_vanish_together() {
    let tol = Tolerances::default();
    let berger = zoo_get("berger", &[]).unwrap();
    let eps = berger.known.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let fp = ricci_frame(&berger.chart, &berger.base_point, eps, &tol).unwrap();
    let mut done = 0;
    let mut crossings = 0;
    while done < 2 {
        let x = rankframe::synthetic::unit_vector(&mut rng);
        if x.x3.abs() < 0.2 {
            continue;
        }
        let dir = fp.to_coords(&x);
        let mut trace = integrate_geodesic(&berger.chart, &berger.base_point, &dir, 10.0, 1e-3, &tol).unwrap();
        let framed = attach_frames(&berger.chart, &mut trace, eps, &tol);
        assert_eq!(framed, trace.samples.len());
        // traces whose velocity leaves the generic set are skipped
        let Ok(rep) = parallel_consistency(&berger.chart, &trace, eps, 1e-4, &tol) else { continue };
        crossings += rep.crossings_q.len();
        assert!(rep.crossings_match, "{:?} vs {:?}", rep.crossings_dv, rep.crossings_q);
        assert!((rep.ratio_estimate - 1.0).abs() < 1e-3, "{}", rep.ratio_estimate);
        assert!(!rep.plus_parallel && !rep.minus_parallel);
        done += 1;
    }
    assert!(crossings > 0);
}
