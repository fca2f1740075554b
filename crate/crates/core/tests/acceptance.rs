//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use contact_pairs::catalog::{example, Example};
use contact_pairs::contact::{
    commutator_threshold, torus_contact_form, verify_contact_pair, verify_single_linear_deformation,
    ContactPair, Settings,
};
use contact_pairs::deformation::{
    lemma_p1_p2_check, lemma_p3_check, random_one_form, stokes_vanishing_check, verify_converse, verify_forward,
    volume_identity_defect, DeformationFamily,
};
use contact_pairs::expr::parse;
use contact_pairs::exterior::{binomial, interior, wedge, FormValue, VectorValue};
use contact_pairs::jacobi::{bump, JacobiSide, LeafGrid, ScalarField, Side};
use contact_pairs::manifold::{FormField, ManifoldModel, Sampling};
use contact_pairs::verdict::{CheckItem, Sense, Status, TheoremVerdict, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn family(name: &str) -> DeformationFamily {
    match example(name).unwrap() {
        Example::Family(f) => *f,
        _ => panic!("{name} is not a family"),
    }
}

fn symmetric_grid() -> Vec<f64> {
    [2.0, 1.0, 0.5, 0.1, 0.01].iter().flat_map(|t| [*t, -*t]).collect()
}

/// Every measured defect in the verdict is below `bound`.
fn all_defects_below(v: &TheoremVerdict, bound: f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for c in v.hypotheses.iter().chain(&v.conclusions).chain(&v.facts) {
        if c.status == Status::Skipped || c.sense != Sense::MustVanish {
            continue;
        }
        ensure!(c.value < bound, "{} = {:e} >= {bound:e}", c.name, c.value);
        worst = worst.max(c.value);
    }
    Ok(worst)
}

fn require_holds(v: &TheoremVerdict) -> Result<(), String> {
    if v.verdict == Verdict::Holds {
        return Ok(());
    }
    let failed: Vec<&CheckItem> = v.hypotheses.iter().chain(&v.conclusions).filter(|c| c.failed()).collect();
    Err(format!(
        "verdict {:?}; failing: {}",
        v.verdict,
        failed
            .iter()
            .take(3)
            .map(|c| format!("{} = {:e}", c.name, c.value))
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = family("heisenberg6-pair");
    let s = Settings::for_model(&f.model);
    let v = verify_forward(&f, &symmetric_grid(), &s).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    require_holds(&v)?;
    let worst = all_defects_below(&v, 1e-10)?;
    ensure!(elapsed < Duration::from_secs(1), "runtime {elapsed:?}");
    Ok(format!("holds, worst defect {worst:.2e}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let f = family("t6-pair-compatible");
    let s = Settings::for_model(&f.model).with_sampling(Sampling::Random { count: 10_000, seed: 2 });
    let v = verify_forward(&f, &symmetric_grid(), &s).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    require_holds(&v)?;
    let worst = all_defects_below(&v, 1e-8)?;
    ensure!(elapsed < Duration::from_secs(10), "runtime {elapsed:?}");
    Ok(format!("holds on 10^4 random points, worst defect {worst:.2e}, {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let f = family("t6-pair-incompatible");
    let s = Settings::for_model(&f.model);
    let v = verify_forward(&f, &symmetric_grid(), &s).map_err(|e| e.to_string())?;
    ensure!(v.verdict == Verdict::NotApplicable, "verdict {:?}", v.verdict);
    let item = v.find("alpha0(E_alpha) = 0").ok_or("missing compatibility item")?;
    ensure!(item.failed(), "compatibility item passed");
    let w = item.worst.as_ref().ok_or("no witness")?;
    ensure!(w.point[0].cos().abs() > 0.9, "witness cos(x0) = {}", w.point[0].cos());

    // oracle: the volume coefficient of (α_t, β_t) is t³ (t + cos x0)
    let t = 0.01;
    let pair = f.pair_at(t).map_err(|e| e.to_string())?;
    let mut pos = None;
    let mut neg = None;
    for p in f.model.sample_points(&s.sampling) {
        let vol = pair.volume_at(&p).map_err(|e| e.to_string())?;
        let oracle = t.powi(3) * (t + p[0].cos());
        ensure!((vol - oracle).abs() < 1e-12, "volume {vol} vs oracle {oracle} at {p:?}");
        if vol > 0.0 && pos.is_none() {
            pos = Some(p);
        } else if vol < 0.0 && neg.is_none() {
            neg = Some(p);
        }
    }
    let (pos, neg) = (pos.ok_or("no positive volume")?, neg.ok_or("no negative volume")?);
    Ok(format!(
        "not applicable, witness cos(x0) = {:.3}; t=0.01 volume > 0 at x0 = {:.3}, < 0 at x0 = {:.3}",
        w.point[0].cos(),
        pos[0],
        neg[0]
    ))
}

fn random_heisenberg_family(rng: &mut ChaCha8Rng) -> DeformationFamily {
    let h = ManifoldModel::heisenberg3();
    let m = ManifoldModel::product(h.clone(), h).unwrap();
    let s = Settings::for_model(&m);
    // closed invariant 1-forms live on e0*, e1*, f0*, f1*
    let closed = |rng: &mut ChaCha8Rng, axes: [usize; 2]| {
        let mut c = vec![0.0; 6];
        for a in axes {
            c[a] = rng.random_range(-2.0..2.0);
        }
        FormField::constant(&FormValue::covector(&c))
    };
    let any = |rng: &mut ChaCha8Rng, main: usize| {
        let mut c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        c[main] = rng.random_range(1.0..2.0);
        FormField::constant(&FormValue::covector(&c))
    };
    let a0 = closed(rng, [0, 1]);
    let b0 = closed(rng, [3, 4]);
    let a = any(rng, 2);
    let b = any(rng, 5);
    DeformationFamily::new(m, a0, b0, a, b, 1, 1, &s).unwrap()
}

fn criterion_4() -> Outcome {
    let ts = [-10.0, -5.0, -2.0, -0.5, 0.3, 1.0, 4.0, 10.0];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lie = 0.0f64;
    for _ in 0..10 {
        let f = random_heisenberg_family(&mut rng);
        let s = Settings::for_model(&f.model);
        let (d, _) = volume_identity_defect(&f, &FormField::volume(6), &ts, &s).map_err(|e| e.to_string())?;
        lie = lie.max(d);
    }
    ensure!(lie < 1e-12, "Lie defect {lie:e}");
    let mut chart = 0.0f64;
    for name in ["t6-pair-compatible", "t6-pair-incompatible", "darboux6-pair"] {
        let f = family(name);
        let s = Settings::for_model(&f.model).with_sampling(Sampling::Random { count: 2_000, seed: 4 });
        let (d, w) = volume_identity_defect(&f, &FormField::volume(6), &ts, &s).map_err(|e| e.to_string())?;
        ensure!(d < 1e-10, "{name}: defect {d:e} at {w:?}");
        chart = chart.max(d);
    }
    Ok(format!("Lie {lie:.2e}, chart {chart:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut out = Vec::new();
    for (name, bound) in [("heisenberg6-pair", 1e-12), ("t6-pair-compatible", 1e-10)] {
        let f = family(name);
        let s = Settings::for_model(&f.model).with_sampling(Sampling::Random { count: 200, seed: 5 });
        let pair = f.base_pair().map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let omegas: Vec<FormField> = (0..100).map(|_| random_one_form(&f.model, &mut rng)).collect();
        let inputs: Vec<(FormField, FormField)> = (0..100)
            .map(|_| (random_one_form(&f.model, &mut rng), random_one_form(&f.model, &mut rng)))
            .collect();
        let (p1, p2) = lemma_p1_p2_check(&f.model, &pair, &omegas, &s).map_err(|e| e.to_string())?;
        let p3 = lemma_p3_check(&f.model, &pair, &inputs, true, &s).map_err(|e| e.to_string())?;
        ensure!(p1 < bound && p2 < bound && p3 < bound, "{name}: P1 {p1:e}, P2 {p2:e}, P3 {p3:e}");
        // the projection matters: (β, α) unprojected gives minus the volume
        let raw = lemma_p3_check(&f.model, &pair, &[(f.beta.clone(), f.alpha.clone())], false, &s)
            .map_err(|e| e.to_string())?;
        ensure!(raw > 0.1, "{name}: unprojected counterexample only {raw:e}");
        out.push(format!("{name} P1 {p1:.1e} P2 {p2:.1e} P3 {p3:.1e}"));
    }
    Ok(out.join("; "))
}

/// Independent Reeb fields of the factor contact forms.
fn factor_reeb(name: &str, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; 6];
    let mut b = vec![0.0; 6];
    match name {
        // e2 and f2
        "heisenberg6-pair" => {
            a[2] = 1.0;
            b[5] = 1.0;
        }
        // cos x dy + sin x dz on each factor
        "t6-pair-compatible" => {
            a[1] = p[0].cos();
            a[2] = p[0].sin();
            b[4] = p[3].cos();
            b[5] = p[3].sin();
        }
        // ∂z on each factor
        "darboux6-pair" => {
            a[2] = 1.0;
            b[5] = 1.0;
        }
        _ => unreachable!(),
    }
    (a, b)
}

fn criterion_6() -> Outcome {
    let mut out = Vec::new();
    for name in ["heisenberg6-pair", "t6-pair-compatible", "darboux6-pair"] {
        let f = family(name);
        let s = Settings::for_model(&f.model);
        let cert =
            verify_contact_pair(&f.model, &f.alpha, &f.beta, 1, 1, &s).map_err(|e| format!("{name}: {e}"))?;
        let mut gap = 0.0f64;
        for (i, p) in cert.reeb.points.iter().enumerate() {
            let (a, b) = factor_reeb(name, p);
            gap = gap.max(cert.reeb.e_alpha[i].dist_inf(&VectorValue(a)));
            gap = gap.max(cert.reeb.e_beta[i].dist_inf(&VectorValue(b)));
        }
        ensure!(gap < 1e-8, "{name}: Reeb mismatch {gap:e}");
        ensure!(cert.smallest_singular_value > 0.1, "{name}: sigma_min {}", cert.smallest_singular_value);
        let bound = if f.model.has_chart_axes() {
            commutator_threshold(&f.model, s.tol)
        } else {
            1e-8
        };
        ensure!(cert.commutator_defect < bound, "{name}: commutator {:e} >= {bound:e}", cert.commutator_defect);
        out.push(format!(
            "{name} gap {gap:.1e} sigma {:.2} comm {:.1e}",
            cert.smallest_singular_value, cert.commutator_defect
        ));
    }
    Ok(out.join("; "))
}

fn fact(v: &TheoremVerdict, name: &str) -> Result<f64, String> {
    let c = v.find(name).ok_or(format!("missing {name}"))?;
    ensure!(c.status != Status::Skipped, "{name} skipped");
    Ok(c.value)
}

fn criterion_7() -> Outcome {
    let ts = [0.05, 0.2, 1.0, 3.0, 10.0];
    let mut out = Vec::new();
    for name in ["heisenberg6-pair", "t6-pair-compatible"] {
        let f = family(name);
        let s = Settings::for_model(&f.model).with_tol(1e-6);
        let v = verify_converse(&f, &ts, &s).map_err(|e| e.to_string())?;
        require_holds(&v)?;
        let c = fact(&v, "max |C|")?;
        let b = fact(&v, "max |B|")?;
        let i0 = fact(&v, "|integral alpha0 part|")?;
        let i1 = fact(&v, "|integral beta0 part|")?;
        let ea = fact(&v, "t E_alpha_t constant in t")?;
        let eb = fact(&v, "t E_beta_t constant in t")?;
        ensure!(c < 1e-10, "{name}: max|C| {c:e}");
        ensure!(b < 1e-10, "{name}: max|B| {b:e}");
        ensure!(i0 < 1e-8 && i1 < 1e-8, "{name}: Stokes {i0:e}, {i1:e}");
        ensure!(ea < 1e-6 && eb < 1e-6, "{name}: t E_t spread {ea:e}, {eb:e}");
        // direct Stokes computation agrees
        let (d0, d1) = stokes_vanishing_check(&f).map_err(|e| e.to_string())?;
        ensure!(d0 < 1e-8 && d1 < 1e-8, "{name}: Stokes {d0:e}, {d1:e}");
        out.push(format!("{name} C {c:.1e} B {b:.1e} int {:.1e} tE {:.1e}", i0.max(i1), ea.max(eb)));
    }
    Ok(out.join("; "))
}

fn criterion_8() -> Outcome {
    let m = ManifoldModel::torus(3).unwrap();
    let s = Settings::for_model(&m);
    let ts = [0.01, 0.1, 0.5, 0.9, 1.5, 2.0];
    let alpha = torus_contact_form();
    let good = verify_single_linear_deformation(&m, &FormField::basis_one_form(3, 0), &alpha, &ts, &s)
        .map_err(|e| e.to_string())?;
    ensure!(good.ii_holds && good.i_holds, "dx0: (ii) {} (i) {}", good.ii_holds, good.i_holds);
    let bad = verify_single_linear_deformation(&m, &FormField::basis_one_form(3, 1), &alpha, &ts, &s)
        .map_err(|e| e.to_string())?;
    ensure!(!bad.ii_holds, "dx1: (ii) holds");
    ensure!(!bad.i_holds, "dx1: (i) holds");
    let failed = bad.condition_i.iter().find(|c| c.failed()).ok_or("no failed (i) item")?;
    let w = failed.witness.as_ref().ok_or("no witness")?;
    let t = w.t.ok_or("witness without t")?;
    ensure!(t > 0.0, "t = {t}");
    // oracle: α₀ + tα ∧ d(α₀ + tα) = −t (t + cos x0) dx012
    let coeff = |x0: f64| -t * (t + x0.cos());
    let grid: Vec<f64> = (0..256).map(|j| TAU * j as f64 / 256.0).collect();
    let changes = grid.iter().any(|x| coeff(*x) > 0.0) && grid.iter().any(|x| coeff(*x) < 0.0);
    ensure!(changes, "oracle shows no sign change at t = {t}");
    Ok(format!("dx0 passes (i) and (ii); dx1 fails (ii), (i) violated at t = {t} ({})", failed.name))
}

fn t3_side(resolution: usize) -> (ManifoldModel, JacobiSide) {
    let m = ManifoldModel::torus(4).unwrap();
    let pair = ContactPair::new(
        &m,
        torus_contact_form().pullback(0, 4).unwrap(),
        FormField::basis_one_form(4, 3),
        1,
        0,
    )
    .unwrap();
    let grid = LeafGrid {
        axes: vec![0, 1, 2],
        base: vec![0.0; 4],
        resolution,
    };
    let side = JacobiSide::new(&m, &pair, Side::Alpha, grid, 1e-8).unwrap();
    (m, side)
}

fn ratios(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| w[0] / w[1]).collect()
}

fn criterion_9() -> Outcome {
    let e = |s: &str| ScalarField::Expr(parse(s, 4).unwrap());
    // coordinate-trig triple with unit frequencies
    let (f, g, h) = (e("sin(x0)"), e("cos(x1) + sin(x2)"), e("sin(x0 + x2)"));
    let (m, side16) = t3_side(16);

    let ScalarField::Grid(fg) = side16.jacobi_bracket(&f, &g).map_err(|e| e.to_string())? else { unreachable!() };
    let ScalarField::Grid(gf) = side16.jacobi_bracket(&g, &f).map_err(|e| e.to_string())? else { unreachable!() };
    ensure!(fg.iter().zip(&gf).all(|(a, b)| a + b == 0.0), "antisymmetry is not exact");

    let step = TAU / 16.0;
    let b1 = bump(&m, vec![0.0; 4], 2.0 * step, vec![0, 1, 2]);
    let b2 = bump(&m, vec![TAU / 2.0, TAU / 4.0, 0.0, 0.0], 2.0 * step, vec![0, 1, 2]);
    let ScalarField::Grid(loc) = side16.jacobi_bracket(&b1, &b2).map_err(|e| e.to_string())? else { unreachable!() };
    let locality = loc.iter().map(|x| x.abs()).fold(0.0, f64::max);
    ensure!(locality < 1e-9, "locality {locality:e}");

    let mut unit = Vec::new();
    let mut jac = Vec::new();
    for r in [16, 32, 64] {
        let side = if r == 16 { side16.clone() } else { t3_side(r).1 };
        unit.push(side.unit_bracket_defect(&g).map_err(|e| e.to_string())?);
        jac.push(side.jacobi_identity_defect(&f, &g, &h).map_err(|e| e.to_string())?);
    }
    let (ru, rj) = (ratios(&unit), ratios(&jac));
    ensure!(ru.iter().all(|r| *r >= 3.5), "{{1,g}} defects {unit:?}");
    ensure!(rj.iter().all(|r| *r >= 3.5), "Jacobi defects {jac:?}");
    Ok(format!(
        "antisymmetry exact, locality {locality:.1e}, {{1,g}} ratios {:.2}/{:.2}, Jacobi ratios {:.2}/{:.2}",
        ru[0], ru[1], rj[0], rj[1]
    ))
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, p: usize) -> FormValue {
    FormValue::from_coeffs(n, p, (0..binomial(n, p)).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

fn rel_gap(a: &FormValue, b: &FormValue) -> f64 {
    a.sub(b).unwrap().norm_inf() / (1.0 + a.norm_inf().max(b.norm_inf()))
}

/// Finds the unit-test executable of the library next to this binary.
fn unit_suite_binary() -> Option<std::path::PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    std::fs::read_dir(&deps)
        .ok()?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("contact_pairs-") && p.extension().is_none()
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let torus3 = ManifoldModel::torus(3).unwrap();
    let torus2 = ManifoldModel::torus(2).unwrap();
    let heis = ManifoldModel::heisenberg3();
    let (mut comm, mut assoc, mut anti, mut dd_lie, mut dd_chart, mut stokes) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(2..=7);
        // interior products need positive degrees
        let p = rng.random_range(1..n);
        let q = rng.random_range(1..=n - p);
        let (a, b) = (random_form(&mut rng, n, p), random_form(&mut rng, n, q));
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        comm = comm.max(rel_gap(&wedge(&a, &b).unwrap(), &wedge(&b, &a).unwrap().scaled(sign)));

        let r = rng.random_range(0..=n - p - q);
        let c = random_form(&mut rng, n, r);
        let l = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let rr = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        assoc = assoc.max(rel_gap(&l, &rr));

        let x = VectorValue((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        let lhs = interior(&x, &wedge(&a, &b).unwrap()).unwrap();
        let sp = if p % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = wedge(&interior(&x, &a).unwrap(), &b)
            .unwrap()
            .axpy(sp, &wedge(&a, &interior(&x, &b).unwrap()).unwrap())
            .unwrap();
        anti = anti.max(rel_gap(&lhs, &rhs));

        let deg = rng.random_range(0..2);
        let w = FormField::constant(&random_form(&mut rng, 3, deg));
        let ddw = heis.exterior_derivative(&heis.exterior_derivative(&w).unwrap()).unwrap();
        dd_lie = dd_lie.max(ddw.eval(&[0.0; 3]).unwrap().norm_inf());

        let w = random_one_form(&torus3, &mut rng);
        let pt: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..TAU)).collect();
        let ddw = torus3.exterior_derivative(&torus3.exterior_derivative(&w).unwrap()).unwrap();
        dd_chart = dd_chart.max(ddw.eval(&pt).unwrap().norm_inf());

        let eta = random_one_form(&torus2, &mut rng);
        let integral = torus2.integrate(&torus2.exterior_derivative(&eta).unwrap()).unwrap();
        stokes = stokes.max(integral.abs());
    }
    ensure!(comm < 1e-12, "graded commutativity {comm:e}");
    ensure!(assoc < 1e-12, "associativity {assoc:e}");
    ensure!(anti < 1e-12, "antiderivation {anti:e}");
    ensure!(dd_lie <= 1e-12, "d^2 Lie {dd_lie:e}");
    ensure!(dd_chart <= 1e-10, "d^2 chart {dd_chart:e}");
    ensure!(stokes < 1e-8, "Stokes {stokes:e}");

    let bin = unit_suite_binary().ok_or("library unit-test binary not found")?;
    let start = Instant::now();
    let status = Command::new(&bin).arg("--quiet").output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(status.status.success(), "unit suite failed");
    ensure!(elapsed < Duration::from_secs(30), "unit suite took {elapsed:?}");
    Ok(format!(
        "1000 cases: comm {comm:.1e} assoc {assoc:.1e} anti {anti:.1e} dd {:.1e}/{dd_chart:.1e} stokes {stokes:.1e}; unit suite {elapsed:.2?}",
        dd_lie
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 exact forward theorem (Lie)", criterion_1),
        ("2 chart forward theorem", criterion_2),
        ("3 hypothesis-failure detection", criterion_3),
        ("4 polynomial identity", criterion_4),
        ("5 wedge lemma suite", criterion_5),
        ("6 Reeb correctness on product pairs", criterion_6),
        ("7 converse facts", criterion_7),
        ("8 single-form criterion", criterion_8),
        ("9 Jacobi suite", criterion_9),
        ("10 exterior kernel properties", criterion_10),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Ok(Err(why)) => {
                failures += 1;
                println!("FAIL criterion {name}: {why}");
            }
            Err(_) => {
                failures += 1;
                println!("FAIL criterion {name}: panicked");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
