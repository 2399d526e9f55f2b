//! Acceptance criteria A1 to A11 at desk scale.
//!
//! Runs without the libtest harness so that every criterion prints exactly one
//! `PASS`/`FAIL` line, in order, whether or not earlier ones failed. The exit
//! status is nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
//!
//! `BIOKZ_ACCEPTANCE_L` overrides the system size (default 1024); every line
//! states the size it was measured at.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use biokz::observables::evolve_mode;
use biokz::{
    eigensystem, oracle, transition_probabilities, IntegratorConfig, Mat2C, Method, QuenchProtocol, RampClock,
    Vec2C, C64, DEFAULT_EP_THRESHOLD,
};
use biokz_cli::analysis::{self, CollapseSpec, FitReport};
use biokz_cli::config::{log_spaced, ExperimentConfig, MethodSelection, ProtocolKind, ProtocolSpec};
use biokz_cli::format::{DensityRow, ModeRow};
use biokz_cli::selfcheck;
use biokz_cli::sweep::{run_sweep, SweepOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLOW_WINDOW: (f64, f64) = (1e2, 1e4);
const FAST_EPS: [f64; 5] = [0.1, 0.15, 0.2, 0.3, 0.45];
const COLLAPSE_HALF_WIDTH: f64 = 0.5;

struct Report {
    len: usize,
    failed: Vec<&'static str>,
}

impl Report {
    fn line(&mut self, id: &'static str, pass: bool, detail: String) {
        if !pass {
            self.failed.push(id);
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{id:<4}{verdict}  {detail} [L={}]", self.len);
        std::io::stdout().flush().ok();
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn sweep(spec: ProtocolSpec, len: usize, taus: Vec<f64>, clock: RampClock, method: MethodSelection) -> SweepOutput {
    let label = format!("{:?} eps={:?} clock={}", spec.kind, spec.eps_i, clock.name());
    let mut cfg = ExperimentConfig::new(spec, len, taus);
    cfg.clock = clock;
    cfg.method = method;
    cfg.validate().expect("acceptance configuration is valid");
    let start = Instant::now();
    let out = run_sweep(&cfg).expect("sweep runs");
    eprintln!(
        "  [sweep {label}: {} rows, L={len}, {:.0} s]",
        out.density.len(),
        start.elapsed().as_secs_f64()
    );
    out
}

fn spec(kind: ProtocolKind, eps_i: &[f64], u: f64) -> ProtocolSpec {
    ProtocolSpec {
        kind,
        eps_i: eps_i.to_vec(),
        u,
        end_offset: biokz::EndOffset::Auto,
    }
}

fn density_at(rows: &[DensityRow], method: Method, tau_q: f64) -> &DensityRow {
    rows.iter()
        .find(|r| r.method == method && (r.tau_q / tau_q - 1.0).abs() < 1e-9)
        .expect("quench time on the sweep grid")
}

fn modes_at(out: &SweepOutput, taus: &[f64]) -> Vec<ModeRow> {
    out.modes
        .iter()
        .flat_map(|g| g.rows.iter())
        .filter(|r| taus.iter().any(|&t| (r.tau_q / t - 1.0).abs() < 1e-9))
        .cloned()
        .collect()
}

fn slow_exponent(report: &FitReport, method: Method, eps_i: f64) -> Option<(f64, f64)> {
    report
        .group(method, eps_i)
        .and_then(|g| g.fit.as_ref())
        .map(|f| (f.exponent, f.stderr_exponent))
}

fn collapse_residual(rows: &[ModeRow], k_c: f64, z: f64, nu: f64) -> Result<f64, String> {
    let curves = analysis::curves_from_modes(rows, Method::Biorthogonal, k_c, Some(COLLAPSE_HALF_WIDTH))
        .map_err(|e| e.to_string())?;
    let spec = CollapseSpec {
        k_c,
        z: vec![z],
        nu: vec![nu],
        half_width: Some(COLLAPSE_HALF_WIDTH),
        method: Method::Biorthogonal,
    };
    let outcome = analysis::collapse_report(&curves, &spec).map_err(|e| e.to_string())?;
    outcome.grid[0].residual.ok_or_else(|| "no residual".into())
}

fn fmt_fit(f: Option<(f64, f64)>) -> String {
    match f {
        Some((e, s)) => format!("{e:.4} ± {s:.4}"),
        None => "no fit".into(),
    }
}

/// Ground band by the eigenvalue rule alone.
fn ground_of(ev: [C64; 2]) -> usize {
    let real = ev[0].im.abs() < 1e-12 && ev[1].im.abs() < 1e-12;
    let first = if real { ev[0].re < ev[1].re } else { ev[0].im > ev[1].im };
    if first {
        0
    } else {
        1
    }
}

/// Excitation of mode `k` from raw eigenvectors and a product of exact
/// exponentials, sharing no code with the integrator or the eigensolver.
fn oracle_excitation(k: f64, protocol: QuenchProtocol, tau_q: f64, slices: usize) -> f64 {
    let h_at = |t: f64| {
        let p = protocol.params_at(t, tau_q).unwrap();
        oracle::raw_hamiltonian(k, p.w, p.v, p.u)
    };
    let (ev0, right0, _) = oracle::raw_eigenvectors(&h_at(protocol.start_time(tau_q)));
    let psi0 = right0[ground_of(ev0)].normalized().unwrap();
    let psi = oracle::piecewise_exponential(k, protocol, tau_q, slices, psi0);
    let h1 = h_at(protocol.end_time(tau_q));
    let (ev1, _, _) = oracle::raw_eigenvectors(&h1);
    oracle::biorthogonal_probabilities(&psi, &h1)[1 - ground_of(ev1)]
}

fn complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn a8(r: &mut Report) {
    let rep = selfcheck::run(10_000, 8);
    let dev = |name: &str| rep.checks.iter().find(|c| c.name == name).unwrap();
    let gauge = dev("gauge_invariance");
    let scale = dev("state_scale_invariance");
    let worst = gauge.max_deviation.max(scale.max_deviation);
    r.line(
        "A8",
        gauge.cases >= 10_000 && worst < 1e-10,
        format!(
            "gauge invariance over {} matrices: max deviation {:.2e} (gauge), {:.2e} (state scale), tolerance 1e-10",
            gauge.cases, gauge.max_deviation, scale.max_deviation
        ),
    );
}

fn a10(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    for run in 0..50 {
        let protocol = match run % 3 {
            0 => QuenchProtocol::pt_symmetric_eps(rng.gen_range(0.1..0.6), 0.5),
            1 => QuenchProtocol::non_hermitian_eps(rng.gen_range(0.1..0.6)),
            _ => QuenchProtocol::through_broken(),
        };
        let tau_q = 10f64.powf(rng.gen_range(0.0..2.0));
        let k = rng.gen_range(-PI..PI);
        let got = evolve_mode(k, protocol, tau_q, &cfg, &[Method::Biorthogonal]).map(|m| m[0].n_ex_k);
        let want = oracle_excitation(k, protocol, tau_q, 1_000_000);
        let dev = match got {
            Ok(g) => (g - want).abs(),
            Err(_) => f64::INFINITY,
        };
        if !(dev <= worst) {
            worst = dev;
            worst_case = format!("{} k={k:.4} tau_q={tau_q:.2}", protocol.name());
        }
    }
    r.line(
        "A10",
        worst < 1e-6,
        format!("50 random runs vs piecewise-exponential oracle: max |Δp| {worst:.2e} ({worst_case}), tolerance 1e-6"),
    );
}

fn a9(r: &mut Report, hermitian_sweep: &SweepOutput) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 1000 {
        let b = complex(&mut rng);
        let h = Mat2C::new(C64::new(rng.gen_range(-1.0..1.0), 0.0), b, b.conj(), C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let psi = Vec2C::new(complex(&mut rng), complex(&mut rng));
        let Ok(sys) = eigensystem(&h, DEFAULT_EP_THRESHOLD) else { continue };
        let p = transition_probabilities(&psi, &sys).unwrap();
        let (ev, _, _) = oracle::raw_eigenvectors(&h);
        let q = oracle::normalized_probabilities(&psi, &h);
        // pair bands by eigenvalue
        for (n, e) in sys.eigenvalues().iter().enumerate() {
            let m = if (ev[0] - e).norm() <= (ev[1] - e).norm() { 0 } else { 1 };
            worst = worst.max((p[n] - q[m]).abs());
        }
        cases += 1;
    }
    let report = analysis::fit_report(&hermitian_sweep.density, SLOW_WINDOW).unwrap();
    let fit = slow_exponent(&report, Method::Biorthogonal, 1.0 / 3.0);
    let exp_ok = fit.is_some_and(|(e, _)| within(e, -0.5, 0.05));
    r.line(
        "A9",
        worst < 1e-10 && exp_ok,
        format!(
            "Hermitian: max |p_bi − p_norm| {worst:.2e} over {cases} cases (tol 1e-10); u=0 slow-quench exponent {} (target −1/2 ± 0.05)",
            fmt_fit(fit)
        ),
    );
}

fn main() {
    let len: usize = std::env::var("BIOKZ_ACCEPTANCE_L")
        .ok()
        .map(|s| s.parse().expect("BIOKZ_ACCEPTANCE_L is a positive integer"))
        .unwrap_or(1024);
    let mut r = Report { len, failed: Vec::new() };
    let start = Instant::now();
    let slow_taus = log_spaced(1.0, 1e4, 8);
    let fast_taus = log_spaced(1e-2, 1e4, 8);
    let third = 1.0 / 3.0;

    a8(&mut r);
    a10(&mut r);

    let hermitian = sweep(
        spec(ProtocolKind::PtSymmetric, &[third], 0.0),
        len,
        log_spaced(1e2, 1e4, 8),
        RampClock::Duration,
        MethodSelection::Biorthogonal,
    );
    a9(&mut r, &hermitian);
    drop(hermitian);

    // protocol I at ε_i = 1/3, both probability definitions
    let p1 = sweep(
        spec(ProtocolKind::PtSymmetric, &[third], 0.5),
        len,
        slow_taus.clone(),
        RampClock::Duration,
        MethodSelection::Both,
    );
    let p1_fits = analysis::fit_report(&p1.density, SLOW_WINDOW).unwrap();
    let bio = slow_exponent(&p1_fits, Method::Biorthogonal, third);
    r.line(
        "A1",
        bio.is_some_and(|(e, _)| within(e, -1.0 / 3.0, 0.05)),
        format!("protocol I slow-quench exponent {} over τ_Q ∈ [1e2, 1e4] (target −1/3 ± 0.05)", fmt_fit(bio)),
    );

    let collapse_taus = [1e2, 10f64.powf(2.5), 1e3];
    let p1_modes = modes_at(&p1, &collapse_taus);
    let good = collapse_residual(&p1_modes, PI, 1.0, 0.5);
    let wrong = collapse_residual(&p1_modes, PI, 1.0, 1.0);
    let (pass, detail) = match (&good, &wrong) {
        (Ok(g), Ok(w)) => (
            *g <= 0.05 && 3.0 * g <= *w,
            format!(
                "protocol I collapse at τ_Q ∈ {{1e2, 10^2.5, 1e3}}, |k−π| ≤ {COLLAPSE_HALF_WIDTH}: residual {g:.4} with (z, ν) = (1, 1/2) (target ≤ 0.05), {w:.4} with (1, 1), ratio {:.2} (target ≥ 3)",
                w / g
            ),
        ),
        _ => (false, format!("protocol I collapse failed: {good:?} / {wrong:?}")),
    };
    r.line("A3", pass, detail);

    let norm = slow_exponent(&p1_fits, Method::Normalized, third);
    let (pass, detail) = match (bio, norm) {
        (Some((b, _)), Some((n, _))) => (
            n <= b - 0.2,
            format!(
                "protocol I slow-quench exponent: normalized {n:.4} vs biorthogonal {b:.4}, steeper by {:.4} (target ≥ 0.2)",
                b - n
            ),
        ),
        _ => (false, format!("missing fit: biorthogonal {}, normalized {}", fmt_fit(bio), fmt_fit(norm))),
    };
    r.line("A11", pass, detail);

    let p3 = sweep(
        spec(ProtocolKind::ThroughBroken, &[], 0.5),
        len,
        vec![1e3, 1e4],
        RampClock::Duration,
        MethodSelection::Biorthogonal,
    );
    let n3: Vec<&DensityRow> = [1e3, 1e4].iter().map(|&t| density_at(&p3.density, Method::Biorthogonal, t)).collect();
    let n1: Vec<f64> = [1e3, 1e4]
        .iter()
        .map(|&t| density_at(&p1.density, Method::Biorthogonal, t).n_ex)
        .collect();
    let change = (n3[0].n_ex - n3[1].n_ex).abs() / n3[1].n_ex;
    let ratio = (n3[0].n_ex / n1[0]).min(n3[1].n_ex / n1[1]);
    let share = n3[1].broken_share;
    r.line(
        "A7",
        change < 0.05 && ratio > 10.0 && share >= 0.95,
        format!(
            "protocol III n_ex {:.5e} (1e3), {:.5e} (1e4): change {:.2}% (target < 5%); min ratio to protocol I {ratio:.1} (target > 10); broken share at 1e4 {share:.4} (target ≥ 0.95)",
            n3[0].n_ex,
            n3[1].n_ex,
            100.0 * change
        ),
    );
    drop((p1, p1_modes, p3));

    // protocol II at ε_i = 1/2
    let p2 = sweep(
        spec(ProtocolKind::NonHermitian, &[0.5], 0.5),
        len,
        slow_taus.clone(),
        RampClock::Duration,
        MethodSelection::Biorthogonal,
    );
    let p2_fits = analysis::fit_report(&p2.density, SLOW_WINDOW).unwrap();
    let fit = slow_exponent(&p2_fits, Method::Biorthogonal, 0.5);
    let spacing = 2.0 * PI / len as f64;
    let mut worst_offset: f64 = 0.0;
    for g in &p2.modes {
        let rows: Vec<&ModeRow> = g.rows.iter().filter(|m| m.method == Method::Biorthogonal).collect();
        if rows[0].tau_q < 1e2 * (1.0 - 1e-9) {
            continue;
        }
        for side in [-1.0, 1.0] {
            let peak = rows
                .iter()
                .filter(|m| m.k * side > 0.0)
                .max_by(|a, b| a.n_ex_k.total_cmp(&b.n_ex_k))
                .unwrap();
            worst_offset = worst_offset.max((peak.k - side * 2.0 * PI / 3.0).abs());
        }
    }
    r.line(
        "A4",
        fit.is_some_and(|(e, _)| within(e, -2.0 / 3.0, 0.07)) && worst_offset <= spacing,
        format!(
            "protocol II slow-quench exponent {} (target −2/3 ± 0.07); peaks at most {:.2} grid spacings from ±2π/3 for τ_Q ≥ 1e2 (target ≤ 1)",
            fmt_fit(fit),
            worst_offset / spacing
        ),
    );

    let p2_modes = modes_at(&p2, &collapse_taus);
    // (k − k_c)^{1/2} τ_Q^{1/3}: z = 1/2, and β = zν/(zν+1) = 1/3 needs ν = 1
    let residual = collapse_residual(&p2_modes, 2.0 * PI / 3.0, 0.5, 1.0);
    r.line(
        "A6",
        residual.as_ref().is_ok_and(|&x| x <= 0.08),
        format!(
            "protocol II collapse at τ_Q ∈ {{1e2, 10^2.5, 1e3}}, |k−2π/3| ≤ {COLLAPSE_HALF_WIDTH}, x = |k−k_c|^(1/2)·τ_Q^(1/3): residual {} (target ≤ 0.08)",
            match &residual {
                Ok(x) => format!("{x:.4}"),
                Err(e) => e.clone(),
            }
        ),
    );
    drop((p2, p2_modes));

    // fast quenches on the rate clock
    let p1_fast = sweep(
        spec(ProtocolKind::PtSymmetric, &FAST_EPS, 0.5),
        len,
        fast_taus.clone(),
        RampClock::Rate,
        MethodSelection::Biorthogonal,
    );
    let rep = analysis::fit_report(&p1_fast.density, SLOW_WINDOW).unwrap();
    let cross = rep.across_eps.iter().find(|c| c.protocol == "pt_symmetric").unwrap();
    let plateau = cross.plateau_vs_eps.as_ref().map(|f| (f.exponent, f.stderr_exponent));
    let tau_c = cross.tau_q_c_vs_eps.as_ref().map(|f| (f.exponent, f.stderr_exponent));
    r.line(
        "A2",
        plateau.is_some_and(|(e, _)| within(e, 0.5, 0.1)) && tau_c.is_some_and(|(e, _)| within(e, -1.5, 0.15)),
        format!(
            "protocol I over ε_i ∈ {FAST_EPS:?} (rate clock): plateau ∝ ε_i^{} (target 0.5 ± 0.1), τ_Q^c ∝ ε_i^{} (target −1.5 ± 0.15)",
            fmt_fit(plateau),
            fmt_fit(tau_c)
        ),
    );
    drop(p1_fast);

    let p2_fast = sweep(
        spec(ProtocolKind::NonHermitian, &FAST_EPS, 0.5),
        len,
        fast_taus.clone(),
        RampClock::Rate,
        MethodSelection::Biorthogonal,
    );
    let rep = analysis::fit_report(&p2_fast.density, SLOW_WINDOW).unwrap();
    let cross = rep.across_eps.iter().find(|c| c.protocol == "non_hermitian").unwrap();
    let plateau = cross.plateau_vs_eps.as_ref().map(|f| (f.exponent, f.stderr_exponent));
    let tau_c = cross.tau_q_c_vs_eps.as_ref().map(|f| f.exponent);
    // the same family on the duration clock, reported only, at a smaller size
    let small = (len / 8).max(16);
    let p2_duration = sweep(
        spec(ProtocolKind::NonHermitian, &FAST_EPS, 0.5),
        small,
        fast_taus,
        RampClock::Duration,
        MethodSelection::Biorthogonal,
    );
    let rep_d = analysis::fit_report(&p2_duration.density, SLOW_WINDOW).unwrap();
    let tau_c_duration = rep_d
        .across_eps
        .iter()
        .find(|c| c.protocol == "non_hermitian")
        .and_then(|c| c.tau_q_c_vs_eps.as_ref())
        .map(|f| f.exponent);
    let tau_c_text = match tau_c {
        Some(e) => format!("{e:.4} (Δ vs −1: {:+.4}, Δ vs −3/2: {:+.4}; not pinned)", e + 1.0, e + 1.5),
        None => "no fit (not pinned)".into(),
    };
    r.line(
        "A5",
        plateau.is_some_and(|(e, _)| within(e, 1.0, 0.15)),
        format!(
            "protocol II over ε_i ∈ {FAST_EPS:?} (rate clock): plateau ∝ ε_i^{} (target 1.0 ± 0.15); τ_Q^c exponent {tau_c_text}; duration clock at L={small}: τ_Q^c exponent {}",
            fmt_fit(plateau),
            tau_c_duration.map_or("no fit".into(), |e| format!("{e:.4}"))
        ),
    );

    println!(
        "acceptance: {}/11 criteria passed in {:.0} s{}",
        11 - r.failed.len(),
        start.elapsed().as_secs_f64(),
        if r.failed.is_empty() {
            String::new()
        } else {
            format!(" (failed: {})", r.failed.join(", "))
        }
    );
    if !r.failed.is_empty() {
        std::process::exit(1);
    }
}
