//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::io::Write;
use std::time::Instant;

use hermite_gabor::certify::{ambiguity, certificate, certificate_region, twisted_convolve};
use hermite_gabor::frameop::{
    component_bound_aggregate, frame_bounds, galerkin_extremes, gl_predicate, is_frame, FrameVerdict, DEFAULT_TOL,
};
use hermite_gabor::hermite::{hermite_operator_residual, hermite_window, GridCapacity, GridSpec};
use hermite_gabor::scan::{default_t_list, dilation_covariance_check, sqrt_law_probe, tightness_scan, write_scan_csv};
use hermite_gabor::timefreq::{inner, SampledSignal};
use hermite_gabor::{box_norm, GaborSystemSpec, LatticeMatrix, VectorWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn identity_scaled(t: f64) -> LatticeMatrix {
    LatticeMatrix::scalar(t).unwrap()
}

fn c1_orthonormality() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::default_for(20).unwrap();
    let h = SampledSignal::from_window(&hermite_window(20, grid).unwrap());
    let single = |i: usize| SampledSignal::from_samples(grid, vec![h.components()[i].clone()]).unwrap();
    let rows: Vec<SampledSignal> = (0..=20).map(single).collect();
    let mut worst: f64 = 0.0;
    for m in 0..=20 {
        for n in 0..=20 {
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((inner(&rows[m], &rows[n]).unwrap() - target).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < 1e-8 && secs < 1.0, format!("max |<h_m,h_n> - delta| = {worst:.2e}, {secs:.3} s"))
}

fn c2_eigenrelation() -> Outcome {
    let coarse = GridSpec::new(13.0, 1.0 / 32.0, GridCapacity::new(5)).unwrap();
    let fine = GridSpec::new(13.0, 1.0 / 64.0, GridCapacity::new(5)).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 0..=5 {
        let r1 = hermite_operator_residual(n, &coarse);
        let r2 = hermite_operator_residual(n, &fine);
        let ratio = r1 / r2;
        ok &= r1 < 1e-2 && (3.5..=4.5).contains(&ratio);
        parts.push(format!("n={n}: {r1:.2e} (x{ratio:.2})"));
    }
    (ok, parts.join(", "))
}

fn c3_box_norm() -> Outcome {
    let exact = (box_norm(&LatticeMatrix::identity()) - 2f64.sqrt() / 2.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let side = 1000;
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 100 {
        let e: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let Ok(m) = LatticeMatrix::new(e[0], e[1], e[2], e[3]) else { continue };
        tested += 1;
        // dense sample of the closed square, including its corners
        let mut best: f64 = 0.0;
        for a in 0..side {
            let z1 = -0.5 + a as f64 / (side - 1) as f64;
            for b in 0..side {
                let z2 = -0.5 + b as f64 / (side - 1) as f64;
                let g = m.apply([z1, z2]);
                best = best.max(g[0].hypot(g[1]));
            }
        }
        worst = worst.max((best - box_norm(&m)).abs());
    }
    (
        exact < 1e-12 && worst < 1e-9,
        format!("|box_norm(I) - sqrt2/2| = {exact:.1e}, oracle deviation over 100 matrices {worst:.1e}"),
    )
}

fn c4_anchors() -> Outcome {
    let start = Instant::now();
    let fine = frame_bounds(&GaborSystemSpec::hermite(0, identity_scaled(0.25), 64).unwrap()).unwrap();
    let within = |v: f64| (v - 16.0).abs() <= 0.05 * 16.0;
    let tight = fine.tightness();
    let crit64 = galerkin_extremes(&GaborSystemSpec::hermite(0, LatticeMatrix::identity(), 64).unwrap()).unwrap();
    let crit128 = galerkin_extremes(&GaborSystemSpec::hermite(0, LatticeMatrix::identity(), 128).unwrap()).unwrap();
    let ratio = |e: &hermite_gabor::frameop::Extremes| e.lambda_min.max(0.0) / e.lambda_max;
    let (r64, r128) = (ratio(&crit64), ratio(&crit128));
    let secs = start.elapsed().as_secs_f64();
    let ok = within(fine.a_est) && within(fine.b_est) && tight < 1.05 && r128 < 0.01 && r128 < r64 && secs < 30.0;
    (
        ok,
        format!(
            "M=0.25I: A={:.4} B={:.4} B/A={tight:.4} (need < 1.05); M=I: A/B {r64:.2e} (K=64) -> {r128:.2e} (K=128); {secs:.1} s",
            fine.a_est, fine.b_est
        ),
    )
}

fn c5_tightness_law() -> Outcome {
    let ts = [0.5, 0.35, 0.25, 0.18];
    let recs = tightness_scan(&LatticeMatrix::identity(), 0, &ts, 64).unwrap();
    let excess: Vec<f64> = recs.iter().map(|r| r.tightness - 1.0).collect();
    let mut ok = excess.iter().all(|e| *e > 0.0);
    for w in excess.windows(2) {
        ok &= w[1] < w[0] && w[0] / w[1] >= 1.4;
    }
    let shown: Vec<String> = excess.iter().map(|e| format!("{e:.3e}")).collect();
    (ok, format!("B/A - 1 at t = 0.5, 0.35, 0.25, 0.18: {}", shown.join(", ")))
}

fn c6_certificate_soundness() -> Outcome {
    let grid: [(usize, &[f64]); 3] = [
        (0, &[0.04, 0.06, 0.08, 0.1, 0.12, 0.15, 0.2]),
        (1, &[0.03, 0.04, 0.05, 0.06, 0.08, 0.1, 0.12]),
        (2, &[0.025, 0.03, 0.035, 0.04, 0.05, 0.06]),
    ];
    let mut ok = true;
    let (mut total, mut valid) = (0, 0);
    let mut worst: f64 = f64::NEG_INFINITY;
    for (d, ts) in grid {
        let w = hermite_window(d, GridSpec::default_for(d).unwrap()).unwrap();
        for &t in ts {
            total += 1;
            let m = identity_scaled(t);
            let cert = certificate(&w, &m).unwrap();
            if !cert.valid {
                continue;
            }
            valid += 1;
            let fb = frame_bounds(&GaborSystemSpec::new(w.clone(), m, 32).unwrap()).unwrap();
            let eps = 1e-6 * cert.b_cert;
            ok &= cert.a_cert <= fb.a_est + eps && fb.b_est <= cert.b_cert + eps;
            worst = worst.max((cert.a_cert - fb.a_est) / cert.b_cert).max((fb.b_est - cert.b_cert) / cert.b_cert);
        }
    }
    ok &= total == 20 && valid > 0;
    (ok, format!("{valid} of {total} configurations valid; worst relative violation {worst:.3e}"))
}

fn c7_reproducing() -> Outcome {
    let w = hermite_window(0, GridSpec::default_for(0).unwrap()).unwrap();
    let mut errs = Vec::new();
    for step in [0.25, 0.125, 0.0625] {
        let f = ambiguity(&w, certificate_region(&w, step).unwrap()).unwrap().field;
        let ff = twisted_convolve(&f, &f).unwrap().field;
        errs.push(ff.sub(&f).unwrap().l2_norm() / f.l2_norm());
    }
    let ok = errs[2] < 1e-2 && errs[1] < errs[0] && errs[2] < errs[1];
    (ok, format!("relative error at steps 1/4, 1/8, 1/16: {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]))
}

fn c8_covariance() -> Outcome {
    let m = identity_scaled(0.4);
    let a = dilation_covariance_check(0, &m, 0.5, 64).unwrap();
    let b = dilation_covariance_check(0, &m, 2.0, 64).unwrap();
    (a < 1e-6 && b < 1e-6, format!("deviation b=0.5: {a:.2e}, b=2: {b:.2e}"))
}

fn c9_aggregate() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [1, 2] {
        let agg = component_bound_aggregate(&GaborSystemSpec::hermite(d, identity_scaled(0.5), 64).unwrap()).unwrap();
        let min_a = agg.a_components.iter().copied().fold(f64::INFINITY, f64::min);
        let max_b = agg.b_components.iter().copied().fold(0.0, f64::max);
        let tol = 1e-10 * agg.b_vec;
        ok &= agg.slack >= 0.0 && agg.a_vec <= min_a + tol && max_b <= agg.b_vec + tol;
        parts.push(format!(
            "d={d}: slack {:.3}, A_vec {:.4} <= min A_i {:.4}, max B_i {:.4} <= B_vec {:.4}",
            agg.slack, agg.a_vec, min_a, max_b, agg.b_vec
        ));
    }
    (ok, parts.join("; "))
}

fn c10_sqrt_law() -> Outcome {
    let start = Instant::now();
    let rows = sqrt_law_probe(&[0, 1, 2, 3, 4], &LatticeMatrix::identity(), &default_t_list(), 64).unwrap();
    let scaled: Vec<f64> = rows.iter().filter_map(|r| r.scaled).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let ok = scaled.len() == 5 && hi / lo <= 3.0 && secs < 300.0;
    let shown: Vec<String> = scaled.iter().map(|v| format!("{v:.3}")).collect();
    (ok, format!("C_emp*sqrt(2d+1) for d=0..4: {} (band {:.2}); {secs:.1} s", shown.join(", "), hi / lo))
}

fn c11_cancellation() -> Outcome {
    let grid = GridSpec::default_for(0).unwrap();
    let twin = VectorWindow::from_real_coefficients(&[vec![1.0], vec![1.0]], 1.0, grid).unwrap();
    let spec = GaborSystemSpec::new(twin, identity_scaled(0.5), 64).unwrap();
    let verdict = is_frame(&spec, DEFAULT_TOL).unwrap();
    (verdict == FrameVerdict::NotFrame, format!("(h0, h0) on 0.5I classified {verdict:?}"))
}

fn c12_gl() -> Outcome {
    let m = LatticeMatrix::diag(0.7, 0.7).unwrap();
    let pred = gl_predicate(&m, 1);
    let grid = GridSpec::default_for(1).unwrap();
    let h1 = VectorWindow::from_real_coefficients(&[vec![0.0, 1.0]], 1.0, grid).unwrap();
    let e = galerkin_extremes(&GaborSystemSpec::new(h1, m, 96).unwrap()).unwrap();
    let ratio = e.lambda_min.max(0.0) / e.lambda_max;
    (pred && ratio > 1e-3, format!("predicate {pred}, scalar h1 A/B = {ratio:.4e} at K=96"))
}

fn c13_determinism() -> Outcome {
    let run = || {
        let recs = tightness_scan(&LatticeMatrix::identity(), 1, &default_t_list(), 32).unwrap();
        let mut buf = Vec::new();
        write_scan_csv(&recs, &mut buf).unwrap();
        buf
    };
    let (a, b) = (run(), run());
    (a == b, format!("two scans of {} bytes identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "hermite orthonormality", c1_orthonormality),
        (2, "hermite eigenrelation", c2_eigenrelation),
        (3, "box norm", c3_box_norm),
        (4, "frame-bound anchors", c4_anchors),
        (5, "tightness law", c5_tightness_law),
        (6, "certificate soundness", c6_certificate_soundness),
        (7, "reproducing identity", c7_reproducing),
        (8, "dilation covariance", c8_covariance),
        (9, "aggregate upper bound", c9_aggregate),
        (10, "sqrt(2d+1) probe", c10_sqrt_law),
        (11, "cancellation refutation", c11_cancellation),
        (12, "determinant criterion cross-check", c12_gl),
        (13, "scan determinism", c13_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let stdout = std::io::stdout();
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let (pass, detail) = f();
        let mut out = stdout.lock();
        writeln!(out, "criterion {n:>2} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" }).unwrap();
        out.flush().unwrap();
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
