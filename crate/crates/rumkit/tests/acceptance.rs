//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use rumkit::scan::scan_parallel;
use rumkit_core::framework::{cnorm, csub, KRange, RigidMotion};
use rumkit_core::geometry::{reciprocal_figure, transform_figure};
use rumkit_core::localisation::{localise_line, phase_periodic_along};
use rumkit_core::multigrid::{
    self, dualize, framework_of, modulated_ribbon_flex, pair_slippage_flex, shear_flex, MultigridSpec, Tiling,
};
use rumkit_core::spectra::{self, interior_window, modulate, BandedPhaseField, SpectrumSource};
use rumkit_core::symbol::{self, detect_spectral_lines, golden_samples, min_over_preimages, sigma_min};
use rumkit_core::{
    fixtures, Basis2, Complex64, CrystalFramework, IntegralMatrix2, LineFigure, ProjLine, Vector2,
};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn lines_of(c: &CrystalFramework, resolution: usize, tol: f64) -> Result<(symbol::SpectrumScan, symbol::SpectralLineSet), String> {
    let scan = scan_parallel(c, resolution, tol, Some(1), &|_, _| {}).map_err(err)?;
    let set = detect_spectral_lines(c, &scan, symbol::DEFAULT_DENOMINATOR_BOUND).map_err(err)?;
    Ok((scan, set))
}

fn criterion_1() -> Outcome {
    let c = fixtures::square_grid();
    let r = 100;
    let start = Instant::now();
    let (scan, set) = lines_of(&c, r, 1e-8)?;
    let secs = start.elapsed().as_secs_f64();
    let below = scan.below_tol();
    check(below.len() == 2 * r - 1, format!("{} samples below tol, expected {}", below.len(), 2 * r - 1))?;
    check(
        below.iter().all(|&(i, j)| i == 0 || j == 0),
        "a sample off the axes is below tol",
    )?;
    // every sample at distance > 1e-3 from the axes is well above tol
    let mut off_axis_min = f64::INFINITY;
    for i in 0..r {
        for j in 0..r {
            let g = scan.gamma(i, j);
            let d = |x: f64| x.min(1.0 - x);
            if d(g[0]) > 1e-3 && d(g[1]) > 1e-3 {
                off_axis_min = off_axis_min.min(scan.value(i, j));
            }
        }
    }
    check(off_axis_min > 1e-8, format!("off-axis sigma_min {off_axis_min:e}"))?;
    check(set.lines.len() == 2, format!("{} lines", set.lines.len()))?;
    check(secs < 10.0, format!("scan took {secs:.2} s"))?;
    Ok(format!(
        "{} zero samples on the axes, 2 lines, off-axis min {off_axis_min:.3e}, {secs:.2} s on one thread",
        below.len()
    ))
}

/// Distinct bar directions of a crystal as ambient lines.
fn bar_directions(c: &CrystalFramework) -> LineFigure {
    c.motif_edges()
        .iter()
        .map(|e| ProjLine::from_direction(c.bar_vector(e)).unwrap())
        .collect()
}

fn criterion_2() -> Outcome {
    let c = fixtures::kagome();
    let start = Instant::now();
    let (_, set) = lines_of(&c, 120, symbol::default_tol(&c))?;
    let secs = start.elapsed().as_secs_f64();
    check(set.lines.len() == 3, format!("{} lines", set.lines.len()))?;
    check(
        set.lines.iter().all(|l| l.offset == 0.0),
        "a line misses the origin",
    )?;
    let expected = reciprocal_figure(&bar_directions(&c), &c.basis()).map_err(err)?;
    let mismatch = set.figure.angular_mismatch(&expected);
    check(expected.len() == 3 && mismatch <= 1e-6, format!("direction mismatch {mismatch:e} rad"))?;
    check(secs < 30.0, format!("scan took {secs:.2} s"))?;
    Ok(format!("3 lines through the origin, mismatch {mismatch:.1e} rad to the edge directions, {secs:.2} s at R=120"))
}

fn criterion_3() -> Outcome {
    let mut report = Vec::new();
    for (name, c) in [("square grid", fixtures::square_grid()), ("kagome", fixtures::kagome())] {
        let tol = symbol::default_tol(&c);
        let (_, set) = lines_of(&c, 60, tol)?;
        for l in &set.lines {
            let loc = localise_line(&c, l, 16, tol).map_err(|e| format!("{name} {:?}: {e}", l.direction))?;
            let band = &loc.band;
            check(band.m <= 16, format!("{name}: m = {}", band.m))?;
            check(band.residual <= 1e-9, format!("{name}: residual {:e}", band.residual))?;
            let (r, f) = band.realize(band.check_window()).map_err(err)?;
            let m = band.m as i64;
            let inside = f.support(1e-12).iter().all(|&i| (0..m).contains(&r.labels[i].1[1]));
            check(inside, format!("{name} {:?}: support leaves the band", l.direction))?;
            for t in golden_samples(5) {
                let lambda2 = Complex64::from_polar(1.0, 2.0 * PI * t);
                let (sr, sf) = band.synthesize(lambda2, KRange::new([-2, -2], [3, 3])).map_err(err)?;
                let res = sr.framework.flex_residual_max(&sf).map_err(err)?;
                let phase = phase_periodic_along(&sr, &sf, 1, lambda2).max(phase_periodic_along(&sr, &sf, 0, band.lambda1));
                let g = loc.gamma_for(t).map_err(err)?;
                let s = sigma_min(&c, g);
                check(
                    res <= 1e-9 && phase <= 1e-9 && s <= 1e-8,
                    format!("{name} {:?} t={t:.3}: residual {res:e}, phase {phase:e}, sigma_min {s:e}", l.direction),
                )?;
            }
            report.push(format!("{name} {:?} m={}", l.direction, band.m));
        }
    }
    Ok(format!("{} lines localised and resynthesised ({})", report.len(), report.join(", ")))
}

fn penrose(w: f64) -> Result<Tiling, String> {
    dualize(&MultigridSpec::penrose(w).map_err(err)?).map_err(err)
}

fn criterion_4() -> Outcome {
    let t = penrose(30.0)?;
    let rf = multigrid::ribbon_figure(&t).map_err(err)?;
    check(rf.figure.len() == 5, format!("{} lines", rf.figure.len()))?;
    let step = PI / 5.0;
    let mut worst = 0.0f64;
    let lines = rf.figure.lines();
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            let d = a.angle_to(b);
            let k = (d / step).round();
            worst = worst.max((d - k * step).abs());
        }
    }
    check(worst <= 1e-6, format!("pairwise angles off multiples of 36 deg by {worst:e}"))?;
    let sym = rf.figure.rotated(step).angular_mismatch(&rf.figure);
    check(sym <= 1e-6, format!("rotation by 36 deg moves the figure by {sym:e}"))?;
    Ok(format!("5 lines, pairwise angle error {worst:.1e} rad, symmetry error {sym:.1e} rad"))
}

fn criterion_5() -> Outcome {
    let t = penrose(40.0)?;
    let fw = framework_of(&t).map_err(err)?;
    let inner = interior_window(&t);
    let pos = fw.joints().to_vec();
    let bars = fw.bars().to_vec();
    let keep = |b: usize| inner.contains(pos[bars[b].0]) && inner.contains(pos[bars[b].1]);
    let inside_joint = |i: usize| inner.contains(pos[i]);
    let ribbons = t.ribbon_index();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for j in 0..t.spec.r() {
        let b = t.spec.families()[j].edge.rotate90();
        let ks: Vec<i64> = ribbons.keys().filter(|(f, _)| *f == j).map(|(_, k)| *k).collect();
        for &k in &ks {
            let u = shear_flex(&t, j, k, b).map_err(err)?;
            worst = worst.max(fw.flex_residual_max_where(&u, keep).map_err(err)?);
            count += 1;
        }
        for w in ks.windows(2).step_by(3) {
            let u = pair_slippage_flex(&t, j, w[0], w[0] + 5, b).map_err(err)?;
            worst = worst.max(fw.flex_residual_max_where(&u, keep).map_err(err)?);
            count += 1;
        }
    }
    check(worst <= 1e-10, format!("shear/slippage residual {worst:e}"))?;
    let mut fractions = Vec::new();
    for n in [8, 16, 32] {
        let mut worst_frac = 0.0f64;
        for j in 0..t.spec.r() {
            let b = t.spec.families()[j].edge.rotate90();
            for t_phase in golden_samples(3) {
                let lambda = Complex64::from_polar(1.0, 2.0 * PI * t_phase);
                let u = modulated_ribbon_flex(&t, j, n, lambda, b).map_err(err)?;
                let res = fw.flex_residual_max_where(&u, keep).map_err(err)?;
                worst = worst.max(res);
                count += 1;
                let phi = BandedPhaseField::for_family(&t, j, n, lambda).map_err(err)?;
                let tau = fw.rigid_motion_field(RigidMotion::Translation(b));
                let z = modulate(&phi, &fw, &tau).map_err(err)?;
                let inside: Vec<usize> = (0..fw.num_joints()).filter(|&i| inside_joint(i)).collect();
                let dev = inside
                    .iter()
                    .filter(|&&i| cnorm(&csub(&u.values[i], &z.values[i])) > 1e-9)
                    .count();
                worst_frac = worst_frac.max(dev as f64 / inside.len() as f64);
            }
        }
        check(
            worst_frac <= 2.0 / n as f64,
            format!("N={n}: deviation fraction {worst_frac:.4} above {:.4}", 2.0 / n as f64),
        )?;
        fractions.push(format!("N={n}: {worst_frac:.4}"));
    }
    check(worst <= 1e-10, format!("modulated residual {worst:e}"))?;
    Ok(format!("{count} flexes, worst interior residual {worst:.1e}; deviation fractions {}", fractions.join(", ")))
}

fn periodic_equality(name: &str, spec: MultigridSpec) -> Result<String, String> {
    let t = dualize(&spec).map_err(err)?;
    let cf = multigrid::crystal_form(&t).map_err(|e| format!("{name}: crystal form: {e}"))?;
    let tol = symbol::default_tol(&cf);
    let (_, set) = lines_of(&cf, 60, tol).map_err(|e| format!("{name}: {e}"))?;
    let rf = multigrid::ribbon_figure(&t).map_err(err)?;
    let expected = reciprocal_figure(&rf.figure, &cf.basis()).map_err(err)?;
    let mismatch = set.figure.angular_mismatch(&expected);
    check(
        set.figure.set_eq(&expected, 1e-6),
        format!("{name}: {} spectral lines vs {} ribbon lines, mismatch {mismatch:e}", set.figure.len(), expected.len()),
    )?;
    Ok(format!(
        "{name}: {} lines (motif {} joints), mismatch {mismatch:.1e}",
        set.figure.len(),
        cf.num_motif_joints()
    ))
}

fn criterion_6() -> Outcome {
    let a = periodic_equality("rhombille", MultigridSpec::rhombille(14.0).map_err(err)?)?;
    let b = periodic_equality("square", MultigridSpec::square(10.0).map_err(err)?)?;
    Ok(format!("{a}; {b}"))
}

fn segment_count(f: &spectra::SpectrumFigure, lines: &[ProjLine], t: f64) -> usize {
    f.figure
        .lines()
        .iter()
        .zip(f.reduced(t))
        .filter(|(l, _)| lines.iter().any(|m| m.approx_eq(l, 1e-12)))
        .map(|(_, s)| s.len())
        .sum()
}

fn criterion_7() -> Outcome {
    let std = Basis2::standard();
    let sq = dualize(&MultigridSpec::square(10.0).map_err(err)?).map_err(err)?;
    let fs = spectra::slippage_spectrum(SpectrumSource::Tiling(&sq), &std).map_err(err)?;
    check(!fs.is_dense(), "square grid flagged dense")?;
    let n20: usize = fs.reduced(20.0).iter().map(Vec::len).sum();
    let n40: usize = fs.reduced(40.0).iter().map(Vec::len).sum();
    check(n20 <= 2 && n40 <= 2, format!("square grid reduces to {n20} / {n40} segments"))?;
    let p = penrose(30.0)?;
    let fp = spectra::slippage_spectrum(SpectrumSource::Tiling(&p), &std).map_err(err)?;
    check(fp.is_dense(), "penrose not flagged dense")?;
    let irr = fp.irrational_lines();
    let (a, b) = (segment_count(&fp, &irr, 20.0), segment_count(&fp, &irr, 40.0));
    check(
        !irr.is_empty() && b as f64 >= 1.8 * a as f64,
        format!("irrational segments {a} at T=20, {b} at T=40"),
    )?;
    Ok(format!(
        "square: {n20} segments, finite; penrose: dense, {} irrational lines, {a} -> {b} segments (x{:.2})",
        irr.len(),
        b as f64 / a as f64
    ))
}

fn criterion_8() -> Outcome {
    let spec = MultigridSpec::penrose(30.0).map_err(err)?;
    let std = Basis2::standard();
    let exact = spectra::slippage_spectrum(SpectrumSource::Tiling(&dualize(&spec).map_err(err)?), &std).map_err(err)?;
    let mut d = Vec::new();
    for q in [3, 5, 13] {
        let (approx, _) = multigrid::rational_approximant(&spec, q).map_err(err)?;
        let t = dualize(&approx).map_err(err)?;
        let f = spectra::slippage_spectrum(SpectrumSource::Tiling(&t), &std).map_err(err)?;
        d.push(spectra::figure_distance_clipped(&exact.figure, &f.figure, 1.0).map_err(err)?);
    }
    check(d[0] > d[1] && d[1] > d[2], format!("distances {d:?} not strictly decreasing"))?;
    Ok(format!("distances q=3: {:.4}, q=5: {:.4}, q=13: {:.4}", d[0], d[1], d[2]))
}

fn criterion_9() -> Outcome {
    // rigid motions
    let mut rigid = 0.0f64;
    for c in fixtures::all_crystals() {
        let r = c.realize_window(KRange::centered(2)).map_err(err)?;
        let fw = &r.framework;
        let center = fw.window().center();
        for m in [
            RigidMotion::Translation(Vector2::new(1.0, 0.0)),
            RigidMotion::Translation(Vector2::new(0.3, -0.7)),
            RigidMotion::Rotation { center },
        ] {
            rigid = rigid.max(fw.flex_residual_max(&fw.rigid_motion_field(m)).map_err(err)?);
        }
    }
    check(rigid <= 1e-12, format!("rigid motion residual {rigid:e}"))?;
    let origin = fixtures::connected_crystals()
        .iter()
        .map(|c| sigma_min(c, [0.0, 0.0]))
        .fold(0.0, f64::max);
    check(origin <= 1e-12, format!("sigma_min at the origin {origin:e}"))?;

    // composition law on random integral matrices
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 100,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let entry = -5i64..=5;
    let matrix = [entry.clone(), entry.clone(), entry.clone(), entry]
        .prop_filter("nonsingular", |m| m[0] * m[3] - m[1] * m[2] != 0);
    let figure = prop::collection::vec(0.0f64..PI, 1..6);
    let cases = std::cell::Cell::new(0usize);
    runner
        .run(&(matrix.clone(), matrix, figure), |(m1, m2, angles)| {
            cases.set(cases.get() + 1);
            let z1 = IntegralMatrix2::from_ints([[m1[0], m1[1]], [m1[2], m1[3]]]).unwrap();
            let z2 = IntegralMatrix2::from_ints([[m2[0], m2[1]], [m2[2], m2[3]]]).unwrap();
            let f = LineFigure::from_lines(angles.into_iter().map(ProjLine::from_angle));
            let two_steps = transform_figure(&z2, &transform_figure(&z1, &f).unwrap()).unwrap();
            let one_step = transform_figure(&z2.compose(&z1), &f).unwrap();
            prop_assert!(two_steps.set_eq(&one_step, 1e-9));
            Ok(())
        })
        .map_err(|e| format!("composition law: {e}"))?;

    // change of basis on the square grid
    let c = fixtures::square_grid();
    let z = IntegralMatrix2::from_ints([[1, 1], [0, 1]]).map_err(err)?;
    let c2 = c.change_basis(&z).map_err(err)?;
    let (_, f1) = lines_of(&c, 24, 1e-8)?;
    let (_, f2) = lines_of(&c2, 24, 1e-8)?;
    let moved = transform_figure(&z, &f1.figure).map_err(err)?;
    check(f2.figure.set_eq(&moved, rumkit_core::TOL_ANGLE), "change of basis moves the spectrum wrongly")?;
    // the reciprocal figure of the bar directions transforms the same way
    let direct = reciprocal_figure(&bar_directions(&c2), &c2.basis()).map_err(err)?;
    check(direct.set_eq(&f2.figure, 1e-9), "reciprocal figure disagrees after change of basis")?;

    // supercell surjection
    let k = [2, 3];
    let res = 12;
    let mut hits = 0;
    for c in [fixtures::square_grid(), fixtures::kagome()] {
        let sc = c.supercell(k).map_err(err)?;
        for i in 0..res {
            for j in 0..res {
                let g = [i as f64 / res as f64, j as f64 / res as f64];
                let s_sc = sigma_min(&sc, g);
                let s_pre = min_over_preimages(&c, g, k);
                let (a, b) = (s_sc <= 1e-8, s_pre <= 1e-8);
                check(a == b, format!("supercell {g:?}: sigma {s_sc:e} vs preimages {s_pre:e}"))?;
                hits += a as usize;
            }
        }
    }
    Ok(format!(
        "rigid residual {rigid:.1e}, origin {origin:.1e}, {} composition cases, change of basis ok, {hits} supercell spectrum points matched",
        cases.get()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("square grid spectrum", criterion_1),
        ("kagome spectrum", criterion_2),
        ("localisation round trip", criterion_3),
        ("penrose ribbon figure", criterion_4),
        ("slippage flex exactness", criterion_5),
        ("periodic multigrid equality", criterion_6),
        ("density dichotomy", criterion_7),
        ("approximant convergence", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
