//! Acceptance criteria. One `PASS`/`FAIL` line per criterion; run with
//! `cargo test -p rankframe-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankframe::dynamics::{
    identity_suite, offdiag_decay, offdiag_pair, riccati_solve, volume_growth_report, x_identity_residual,
    Branch, CapitalFrame, ClosedForm, Mode, POLE_MARGIN,
};
use rankframe::frame::{epsilon_plane_normals, ricci_frame, synthetic_frame, v_minus, v_plus, FrameVector, PointClass};
use rankframe::metric::Vec3;
use rankframe::synthetic;
use rankframe::transport::{
    attach_frames, extremal_parallel_residual, extremal_parallel_residual_plus, integrate_geodesic,
    parallel_consistency, rank_deficit, residual_q, Sign,
};
use rankframe::zoo::{zoo_get, zoo_get_ref, ZooEntry};
use rankframe::{Error, Tolerances};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn neg(v: &FrameVector) -> FrameVector {
    FrameVector::new(-v.x1, -v.x2, -v.x3)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_direction(entry: &ZooEntry, rng: &mut ChaCha8Rng) -> Result<Vec3, String> {
    let g = ok(entry.chart.metric_at(&entry.base_point), "metric")?;
    loop {
        let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return Ok(v / v.dot(&(g * v)).sqrt());
        }
    }
}

fn space_forms() -> Outcome {
    let tol = Tolerances::default();
    let started = Instant::now();
    let mut worst_sec: f64 = 0.0;
    let mut worst_deficit: f64 = 0.0;
    let mut rng = rng(1);
    for (name, eps) in [("hyperbolic3", -1.0), ("sphere3(1)", 1.0)] {
        let entry = ok(zoo_get_ref(name), name)?;
        let grid = entry.chart.domain.lattice(3);
        ensure!(grid.len() == 27, "{name}: lattice has {} points", grid.len());
        for p in &grid {
            let fp = ok(ricci_frame(&entry.chart, p, eps, &tol), name)?;
            ensure!(fp.class == PointClass::Isotropic, "{name} at {p:?}: {:?}", fp.class);
            for s in [fp.lambda, fp.lambda12, fp.big_lambda] {
                worst_sec = worst_sec.max((s - eps).abs());
            }
        }
        for k in 0..10 {
            let dir = unit_direction(&entry, &mut rng)?;
            let trace = ok(integrate_geodesic(&entry.chart, &entry.base_point, &dir, 5.0, 1e-3, &tol), name)?;
            let rd = ok(rank_deficit(&entry.chart, &trace, eps, 64), name)?;
            ensure!(rd.deficit < 1e-6, "{name} geodesic {k}: deficit {:e}", rd.deficit);
            worst_deficit = worst_deficit.max(rd.deficit);
        }
    }
    let elapsed = started.elapsed();
    ensure!(worst_sec < 1e-6, "max |λij − ε| = {worst_sec:e}");
    ensure!(elapsed < Duration::from_secs(30), "runtime {elapsed:?}");
    Ok(format!(
        "max |λij − ε| {worst_sec:.1e}, max deficit {worst_deficit:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn extremal_zoo() -> Outcome {
    let tol = Tolerances::default();
    let nil = ok(zoo_get("nil", &[]), "nil")?;
    let fp = ok(ricci_frame(&nil.chart, &nil.base_point, 0.25, &tol), "nil")?;
    ensure!(fp.class == PointClass::ExtremalPlus, "nil class {:?}", fp.class);
    ensure!((fp.lambda + 0.75).abs() < 1e-6, "nil λ = {}", fp.lambda);
    let mut ric = fp.ricci;
    ric.sort_by(f64::total_cmp);
    for (got, want) in ric.iter().zip([-0.5, -0.5, 0.5]) {
        ensure!((got - want).abs() < 1e-6, "nil Ricci {ric:?}");
    }
    let prod = ok(zoo_get("product_h2xr", &[-1.0]), "product_h2xr")?;
    let fq = ok(ricci_frame(&prod.chart, &prod.base_point, 0.0, &tol), "product_h2xr")?;
    ensure!(fq.class == PointClass::ExtremalPlus, "product class {:?}", fq.class);
    ensure!((fq.lambda + 1.0).abs() < 1e-6, "product λ = {}", fq.lambda);
    Ok(format!("nil λ {:.9}, Ricci {ric:.9?}; H²×R λ {:.9}", fp.lambda, fq.lambda))
}

fn epsilon_planes() -> Outcome {
    let tol = Tolerances::default();
    let started = Instant::now();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let check = |found: &[FrameVector], want: &[FrameVector], worst: &mut f64| -> Result<(), String> {
        let dist = |a: &FrameVector, b: &FrameVector| (a.to_vec3() - b.to_vec3()).norm();
        for f in found {
            let d = want.iter().map(|w| dist(f, w)).fold(f64::INFINITY, f64::min);
            ensure!(d < 1e-6, "spurious normal {f:?} (distance {d:e})");
            *worst = worst.max(d);
        }
        for w in want {
            ensure!(found.iter().any(|f| dist(f, w) < 1e-6), "missing normal {w:?} in {found:?}");
        }
        Ok(())
    };
    for _ in 0..100 {
        let (l, e, big) = synthetic::generic_triple(&mut r);
        let fp = synthetic_frame(l, e, big, &tol);
        let m = fp.m.ok_or("generic frame without m")?;
        let x = synthetic::unit_vector(&mut r);
        let np = ok(v_plus(&x, m), "V+")?;
        let nm = ok(v_minus(&x, m), "V-")?;
        let np = x.cross(&np).normalized();
        let nm = x.cross(&nm).normalized();
        let want = [np, neg(&np), nm, neg(&nm)];
        check(&epsilon_plane_normals(&fp, &x, 4096), &want, &mut worst)?;

        // x₃ = 0: the two planes coincide
        let t: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        let x0 = FrameVector::new(t.cos(), t.sin(), 0.0);
        let Ok((k, l)) = rankframe::frame::kl_values(&x0, m) else { continue };
        if k.min(l) < 1e-3 {
            continue;
        }
        let n0 = x0.cross(&ok(v_plus(&x0, m), "V+")?).normalized();
        let n1 = x0.cross(&ok(v_minus(&x0, m), "V-")?).normalized();
        ensure!(
            (n0.to_vec3() - n1.to_vec3()).norm() < 1e-9 || (n0.to_vec3() + n1.to_vec3()).norm() < 1e-9,
            "x₃ = 0 planes differ"
        );
        check(&epsilon_plane_normals(&fp, &x0, 4096), &[n0, neg(&n0)], &mut worst)?;
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "runtime {elapsed:?}");
    Ok(format!("worst normal error {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn identity_suites() -> Outcome {
    let tol = Tolerances::default();
    let started = Instant::now();
    let mut r = rng(4);
    let mut worst = [0.0f64; 5];
    let names = ["plus point", "minus point", "extremal", "mixed curvature", "off-diagonal pair"];
    for _ in 0..1000 {
        let m = synthetic::slope(&mut r);
        let fc = synthetic::plus_point(&mut r, m);
        for v in ok(identity_suite(&fc, m, Mode::Plus), "plus suite")?.values() {
            worst[0] = worst[0].max(v.abs());
        }
        let x = synthetic::unit_vector(&mut r);
        worst[0] = worst[0].max(residual_q(Sign::Plus, &x, &fc, m).abs());

        let fc = synthetic::minus_point(&mut r, m, true);
        for v in ok(identity_suite(&fc, m, Mode::Minus), "minus suite")?.values() {
            worst[1] = worst[1].max(v.abs());
        }
        worst[1] = worst[1].max(residual_q(Sign::Minus, &x, &fc, m).abs());

        let minus = synthetic::minus_extremal(&mut r);
        let plus = synthetic::plus_extremal(&mut r);
        worst[2] = worst[2]
            .max(extremal_parallel_residual(&x, &minus).abs())
            .max(extremal_parallel_residual_plus(&x, &plus).abs());

        let triple = synthetic::generic_triple(&mut r);
        let (curv, fp) = synthetic::ricci_diagonal(&mut r, triple, &tol);
        let cf = CapitalFrame::from_m(fp.m.ok_or("generic frame without m")?);
        worst[3] = worst[3].max(ok(x_identity_residual(&curv, &fp, &cf), "x identity")?);
        // Ricci-diagonal: R₂ = 0 and R₃ = −ab(Λ − λ)
        let pair = ok(offdiag_pair(&curv, &fp, &cf), "off-diagonal pair")?;
        let a = 1.0 / (1.0 + cf.m * cf.m).sqrt();
        let b = cf.m * a;
        let scale = 1.0 + (fp.big_lambda - fp.lambda).abs();
        worst[4] = worst[4]
            .max(pair.r2.abs() / scale)
            .max((pair.r3 + a * b * (fp.big_lambda - fp.lambda)).abs() / scale);
    }
    let elapsed = started.elapsed();
    for (name, w) in names.iter().zip(worst) {
        ensure!(w < 1e-12, "{name}: worst residual {w:e}");
    }
    ensure!(elapsed < Duration::from_secs(5), "runtime {elapsed:?}");
    let detail: Vec<String> = names.iter().zip(worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    Ok(format!("1000 each; {}; {:.2} s", detail.join(", "), elapsed.as_secs_f64()))
}

fn riccati() -> Outcome {
    let sol = ok(riccati_solve(1.0, 0.0, 3.0, 1e-3), "ε=1")?;
    let t = sol.blowup_time.ok_or("no blow-up for ε=1, tr0=0")?;
    ensure!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-3, "blow-up at {t}");
    let mut worst_limit: f64 = 0.0;
    for tr0 in [-1.9, 0.0, 3.0] {
        let sol = ok(riccati_solve(-1.0, tr0, 10.0, 1e-3), "ε=-1")?;
        ensure!(matches!(sol.branch, Branch::Tanh | Branch::Coth), "tr0 {tr0}: branch {:?}", sol.branch);
        let &(t, y) = sol.samples.last().ok_or("empty solution")?;
        ensure!((t - 10.0).abs() < 1e-9, "tr0 {tr0}: stopped at {t}");
        ensure!((y - 2.0).abs() < 1e-6, "tr0 {tr0}: trA(10) = {y}");
        worst_limit = worst_limit.max((y - 2.0).abs());
    }
    let eq = ok(riccati_solve(-1.0, -2.0, 10.0, 1e-3), "equilibrium")?;
    ensure!(eq.samples.iter().all(|&(_, y)| y == -2.0), "tr0 = -2 drifts");
    let mut worst_cf: f64 = 0.0;
    let mut r = rng(5);
    for _ in 0..50 {
        let eps = r.gen_range(-2.0..2.0);
        let tr0 = r.gen_range(-4.0..4.0);
        let horizon = ClosedForm::new(eps, tr0).pole.map_or(5.0, |p| (p - POLE_MARGIN).min(5.0));
        if horizon < 0.05 {
            continue;
        }
        let sol = ok(riccati_solve(eps, tr0, horizon, 1e-3), "random")?;
        worst_cf = worst_cf.max(sol.max_closed_form_error);
    }
    ensure!(worst_cf < 1e-8, "closed-form error {worst_cf:e}");
    Ok(format!(
        "blow-up {t:.6}, |trA(10) − 2| ≤ {worst_limit:.1e}, closed-form error {worst_cf:.1e}"
    ))
}

fn decay_law() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(6);
    for _ in 0..20 {
        let eps = r.gen_range(-2.0..2.0);
        let tr0 = r.gen_range(-4.0..4.0);
        let horizon = ClosedForm::new(eps, tr0).pole.map_or(3.0, |p| (p - POLE_MARGIN).min(3.0));
        if horizon < 0.05 {
            continue;
        }
        let sol = ok(riccati_solve(eps, tr0, horizon, 2e-5), "solve")?;
        let aug = ok(offdiag_decay(&sol, 1.0, 0.5), "decay")?;
        worst = worst.max(aug.decay_log_residual.ok_or("no residual")?);
    }
    ensure!(worst < 1e-6, "decay residual {worst:e}");
    let sol = ok(riccati_solve(-1.0, 0.0, 2.0, 1e-3), "ε=-1")?;
    let aug = ok(offdiag_decay(&sol, 1.0, 1.0), "decay")?;
    let r2 = aug.r2_samples.as_ref().ok_or("no R2")?;
    let ratio = r2.last().ok_or("empty")? / r2[0];
    let want = 2f64.cosh().powi(-3);
    ensure!((ratio / want - 1.0).abs() < 0.01, "|R2(2)|/|R2(0)| = {ratio} vs {want}");
    Ok(format!("residual {worst:.1e}; ratio {ratio:.6} vs cosh(2)^-3 = {want:.6}"))
}

fn volume_growth() -> Outcome {
    let tr0s = [-1.9, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
    let rep = ok(volume_growth_report(-1.0, &tr0s, 30.0, 1e-3, (20.0, 30.0), 5.0), "volume")?;
    let mut worst: f64 = 0.0;
    for s in &rep.series {
        let slope = s.slope.ok_or(format!("tr0 {}: no slope", s.tr0))?;
        ensure!((slope - 2.0).abs() < 1e-3, "tr0 {}: slope {slope}", s.tr0);
        worst = worst.max((slope - 2.0).abs());
    }
    Ok(format!("{} initial values, max |slope − 2| {worst:.1e}", tr0s.len()))
}

fn parallel_equivalence() -> Outcome {
    let tol = Tolerances::default();
    let berger = ok(zoo_get("berger", &[]), "berger")?;
    let eps = berger.known.epsilon;
    let fp = ok(ricci_frame(&berger.chart, &berger.base_point, eps, &tol), "frame")?;
    ensure!(fp.class == PointClass::Generic, "berger base point is {:?}", fp.class);
    let mut r = rng(8);
    let (mut evaluated, mut skipped, mut crossings) = (0, 0, 0);
    let mut worst_gap: f64 = 0.0;
    let mut refined = 0;
    while evaluated < 10 {
        let x = synthetic::unit_vector(&mut r);
        if x.x3.abs() < 0.2 {
            continue;
        }
        let dir = fp.to_coords(&x);
        // geodesics grazing the Euler-angle pole sin θ → 0 need a finer step;
        // crossings are then compared within that step
        let mut step = 1e-3;
        let mut trace = loop {
            match integrate_geodesic(&berger.chart, &berger.base_point, &dir, 10.0, step, &tol) {
                Ok(t) => break t,
                Err(Error::StepTooLarge { .. }) if step > 1.3e-4 => step *= 0.5,
                Err(e) => return Err(format!("geodesic: {e}")),
            }
        };
        if step < 1e-3 {
            refined += 1;
        }
        attach_frames(&berger.chart, &mut trace, eps, &tol);
        // the comparison needs generic velocities along the whole trace
        let Ok(rep) = parallel_consistency(&berger.chart, &trace, eps, 1e-4, &tol) else {
            skipped += 1;
            ensure!(skipped < 100, "too many non-generic traces");
            continue;
        };
        evaluated += 1;
        ensure!(
            rep.crossings_match,
            "geodesic {evaluated}: crossings {:?} vs {:?}",
            rep.crossings_dv,
            rep.crossings_q
        );
        crossings += rep.crossings_q.len();
        ensure!(
            rep.max_crossing_gap <= step,
            "geodesic {evaluated}: crossing gap {:e} exceeds the step {step:e}",
            rep.max_crossing_gap
        );
        worst_gap = worst_gap.max(rep.max_crossing_gap);
    }
    ensure!(crossings > 0, "no zero crossings on any geodesic");
    Ok(format!(
        "10 geodesics ({skipped} non-generic skipped, {refined} at a finer step), {crossings} crossings, max gap {worst_gap:.1e}"
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_rankframe");
    let cases: [&[&str]; 4] = [
        &["classify", "--chart", "berger", "--grid", "3"],
        &["rank-check", "--chart", "sphere3(1)", "--epsilon", "1", "--geodesics", "4", "--seed", "9", "-T", "2"],
        &["evolve", "-e", "-1", "--tr0", "0.3", "-T", "10"],
        &["zoo"],
    ];
    for args in cases {
        let run = || ok(Command::new(bin).args(args).output(), "spawn");
        let (a, b) = (run()?, run()?);
        ensure!(a.status.success(), "{args:?} failed");
        ensure!(!a.stdout.is_empty(), "{args:?} printed nothing");
        ensure!(a.stdout == b.stdout, "{args:?} differs between runs");
    }
    Ok(format!("{} commands, byte-identical", cases.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("space-form certification", space_forms),
        ("extremal zoo oracle", extremal_zoo),
        ("ε-plane structure", epsilon_planes),
        ("algebraic identity suites", identity_suites),
        ("Riccati dynamics", riccati),
        ("decay law", decay_law),
        ("volume growth", volume_growth),
        ("parallel-field equivalence", parallel_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
