//! Named validation checks: the acceptance properties of the simulator,
//! runnable as a suite (CLI `validate` subcommand or the acceptance test
//! target).
//!
//! Checks sharing a scan reuse a lazily computed one; the cost is charged
//! to the first check in suite order that forces it (the time scan to
//! `noise-resonance-shape`, the steady scan to `steady-double-resonance`,
//! the cutoff-4 time scan to `cutoff-convergence`).

use std::sync::LazyLock;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    evolve, evolve_matrix_exponential, steady_state, STEADY_STATE_TOL,
};
use crate::entanglement::{cavity_negativity_base, log_negativity};
use crate::model::{
    effective_to_physical, kappa0_stationary_state, DensityMatrix, HilbertLayout, ModelParams,
};
use crate::numerics::ComplexMatrix;
use crate::scan::{
    jump_diagnostic, scan_steady, scan_time, ScanError, ScanResult, ScanSpec,
};
use crate::C64;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Corrupt the Bell-pair input so the calibration check fails; exercises
    /// the failure path end to end.
    pub inject_bell_fault: bool,
    /// Restrict to the named checks (all when empty).
    pub only: Vec<String>,
}

struct Check {
    name: &'static str,
    /// Wall-clock budget in seconds, where the acceptance property states one.
    limit: Option<f64>,
    run: fn(&ValidateOptions) -> (bool, String),
}

fn time_scan_spec(cutoff: usize) -> ScanSpec {
    let mut spec = ScanSpec::default_time_scan();
    spec.params.cutoff = cutoff;
    spec
}

static TIME_SCAN_N3: LazyLock<Result<ScanResult, ScanError>> =
    LazyLock::new(|| scan_time(&time_scan_spec(3)));
static TIME_SCAN_N4: LazyLock<Result<ScanResult, ScanError>> =
    LazyLock::new(|| scan_time(&time_scan_spec(4)));
static STEADY_SCAN: LazyLock<Result<ScanResult, ScanError>> =
    LazyLock::new(|| scan_steady(&ScanSpec::default_steady_scan()));

const CHECKS: &[Check] = &[
    Check { name: "steady-state-closed-form", limit: Some(1.0), run: check_closed_form },
    Check { name: "zero-decay-separability", limit: Some(1.0), run: check_separability },
    Check { name: "bell-pair-calibration", limit: Some(1.0), run: check_bell },
    Check { name: "noise-resonance-shape", limit: Some(120.0), run: check_noise_resonance },
    Check { name: "steady-double-resonance", limit: Some(120.0), run: check_double_resonance },
    Check { name: "measurement-enhancement", limit: Some(10.0), run: check_measurement },
    Check { name: "large-kappa-population-scaling", limit: Some(30.0), run: check_scaling },
    Check { name: "cutoff-convergence", limit: None, run: check_cutoff_convergence },
    Check { name: "integrator-oracle-equivalence", limit: Some(60.0), run: check_oracles },
    Check { name: "jump-enhancement", limit: Some(10.0), run: check_jump },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Run the (selected) checks sequentially in suite order.
pub fn run_checks(opts: &ValidateOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|check| opts.only.is_empty() || opts.only.iter().any(|n| n == check.name))
        .map(|check| {
            let start = Instant::now();
            let (mut passed, mut detail) = (check.run)(opts);
            let seconds = start.elapsed().as_secs_f64();
            if let Some(limit) = check.limit {
                if seconds > limit {
                    passed = false;
                    detail = format!("{detail}; exceeded {limit:.0} s budget");
                }
            }
            CheckResult { name: check.name, passed, detail, seconds }
        })
        .collect()
}

/// Effective-picture steady state at κ = 0 against the closed form:
/// populations must agree to 1e-6 for r ≤ 6 at cutoff 10.
fn check_closed_form(_: &ValidateOptions) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for n_t in [0.5, 1.0] {
        let params = ModelParams::default().with_kappa(0.0).with_n_t(n_t).with_cutoff(10);
        let layout = HilbertLayout::effective(10);
        let solved = match steady_state(&params, &layout, STEADY_STATE_TOL) {
            Ok(state) => state,
            Err(err) => return (false, format!("solver failed at n_T={n_t}: {err}")),
        };
        let analytic = kappa0_stationary_state(n_t, 10);
        let ps = solved.mode_populations(1);
        let pa = analytic.mode_populations(1);
        for r in 0..=6 {
            worst = worst.max((ps[r] - pa[r]).abs());
        }
    }
    (worst <= 1e-6, format!("max population deviation {worst:.3e} (tol 1e-6)"))
}

/// Negativity of the transformed, atom-traced κ=0 state at cutoff 6.
fn check_separability(_: &ValidateOptions) -> (bool, String) {
    let params = ModelParams::default().with_cutoff(6);
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for n_t in [0.2, 0.5, 1.0, 2.0] {
        let rho = kappa0_stationary_state(n_t, 6);
        let phys = match effective_to_physical(&rho, &params) {
            Ok(p) => p,
            Err(err) => return (false, format!("transform failed: {err}")),
        };
        match cavity_negativity_base(&phys, 2.0) {
            Ok(neg) => {
                worst = worst.max(neg.value);
                values.push(format!("n_T={n_t}: {:.3e}", neg.value));
            }
            Err(err) => return (false, format!("negativity failed: {err}")),
        }
    }
    (worst <= 1e-9, format!("max negativity {worst:.3e} (tol 1e-9); {}", values.join(", ")))
}

/// Bell pair scores exactly 1; vacuum-triplet mixtures stay entangled for
/// every mixing weight.
fn check_bell(opts: &ValidateOptions) -> (bool, String) {
    let layout = HilbertLayout::reduced(vec![2, 2]);
    let amp = 1.0 / 2f64.sqrt();
    let c = |x: f64| C64::new(x, 0.0);
    let mut bell = DensityMatrix::from_pure(layout.clone(), &[c(0.0), c(amp), c(amp), c(0.0)]);
    if opts.inject_bell_fault {
        // deliberately depolarize so the calibration misses 1.0
        let mixed = &bell.mat().scaled_re(0.8)
            + &ComplexMatrix::identity(4).scaled_re(0.05);
        bell = DensityMatrix::new(layout.clone(), mixed).unwrap();
    }
    let bell_neg = match log_negativity(&bell) {
        Ok(neg) => neg.value,
        Err(err) => return (false, format!("negativity failed: {err}")),
    };
    if (bell_neg - 1.0).abs() > 1e-9 {
        return (false, format!("Bell pair scored {bell_neg:.12} instead of 1"));
    }
    let vacuum = DensityMatrix::basis_state(layout.clone(), &[0, 0]);
    let clean_bell = DensityMatrix::from_pure(layout.clone(), &[c(0.0), c(amp), c(amp), c(0.0)]);
    let mut min_mix = f64::INFINITY;
    for i in 0..=10 {
        let p = if i == 0 { 0.01 } else { i as f64 / 10.0 };
        let mat = &clean_bell.mat().scaled_re(p) + &vacuum.mat().scaled_re(1.0 - p);
        let rho = DensityMatrix::new(layout.clone(), mat).unwrap();
        match log_negativity(&rho) {
            Ok(neg) => min_mix = min_mix.min(neg.value),
            Err(err) => return (false, format!("negativity failed: {err}")),
        }
        if min_mix <= 0.0 {
            return (false, format!("vacuum-triplet mixture at p={p} scored zero"));
        }
    }
    (true, format!("Bell = {bell_neg:.12}, min mixture negativity {min_mix:.3e}"))
}

/// At each fixed t ∈ {2, 5, 10, 20}, negativity against n_T rises to a
/// single interior maximum (1e-6 comparison slack) and the peak is
/// strictly positive.
fn check_noise_resonance(_: &ValidateOptions) -> (bool, String) {
    let scan = match TIME_SCAN_N3.as_ref() {
        Ok(scan) => scan,
        Err(err) => return (false, format!("time scan failed: {err}")),
    };
    let spec = ScanSpec::default_time_scan();
    let nt_count = spec.axes[0].count;
    let t_axis = spec.axes[1].values();
    let mut details = Vec::new();
    for t_target in [2.0, 5.0, 10.0, 20.0] {
        let t_idx = t_axis
            .iter()
            .position(|&t| (t - t_target).abs() < 1e-9)
            .expect("target time on grid");
        let column: Vec<f64> = (0..nt_count)
            .map(|i| scan.rows[i * t_axis.len() + t_idx].neg_traced)
            .collect();
        let peak = column
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        if peak == 0 || peak == nt_count - 1 {
            return (false, format!("t={t_target}: maximum at grid edge (index {peak})"));
        }
        if column[peak] <= 0.0 {
            return (false, format!("t={t_target}: peak negativity not positive"));
        }
        for i in 0..peak {
            if column[i] > column[i + 1] + 1e-6 {
                return (false, format!("t={t_target}: not rising at n_T index {i}"));
            }
        }
        for i in peak..nt_count - 1 {
            if column[i + 1] > column[i] + 1e-6 {
                return (false, format!("t={t_target}: not falling at n_T index {i}"));
            }
        }
        details.push(format!("t={t_target}: peak {:.4} at index {peak}", column[peak]));
    }
    (true, details.join("; "))
}

/// Steady-state grid: interior global maximum, separable κ=0 row, and
/// monotone decay along κ beyond each per-column peak.
fn check_double_resonance(_: &ValidateOptions) -> (bool, String) {
    let scan = match STEADY_SCAN.as_ref() {
        Ok(scan) => scan,
        Err(err) => return (false, format!("steady scan failed: {err}")),
    };
    let spec = ScanSpec::default_steady_scan();
    let nt_values = spec.axes[0].values();
    let kappa_values = spec.axes[1].values();
    let (nn, nk) = (nt_values.len(), kappa_values.len());
    let neg = |i: usize, j: usize| scan.rows[i * nk + j].neg_traced;

    let mut best = (0usize, 0usize);
    for i in 0..nn {
        for j in 0..nk {
            if neg(i, j) > neg(best.0, best.1) {
                best = (i, j);
            }
        }
    }
    let interior = best.0 > 0 && best.0 < nn - 1 && best.1 > 0 && best.1 < nk - 1;
    if !interior {
        return (
            false,
            format!(
                "global maximum {:.4} at edge: n_T={:.3}, κ={:.3}",
                neg(best.0, best.1),
                nt_values[best.0],
                kappa_values[best.1]
            ),
        );
    }

    // κ = 0 row: a small auxiliary grid that includes κ = 0 exercises the
    // scan's closed-form substitution path.
    let mut kappa0_spec = ScanSpec::default_steady_scan();
    kappa0_spec.axes[1] = crate::scan::Axis::linear(crate::scan::AxisParam::Kappa, 0.0, 0.1, 2);
    let kappa0_rows = match scan_steady(&kappa0_spec) {
        Ok(result) => result.rows,
        Err(err) => return (false, format!("κ=0 scan failed: {err}")),
    };
    let kappa0_worst = kappa0_rows
        .iter()
        .filter(|row| row.kappa == 0.0)
        .map(|row| row.neg_traced)
        .fold(0.0, f64::max);
    if kappa0_worst > 1e-9 {
        return (
            false,
            format!("κ=0 row max negativity {kappa0_worst:.3e} exceeds 1e-9"),
        );
    }

    for (i, &n_t) in nt_values.iter().enumerate() {
        let column: Vec<f64> = (0..nk).map(|j| neg(i, j)).collect();
        let peak = column
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(idx, _)| idx)
            .unwrap();
        for j in peak..nk - 1 {
            if column[j + 1] > column[j] + 1e-8 {
                return (
                    false,
                    format!(
                        "n_T={n_t:.3}: negativity rises again beyond per-column peak at κ={:.3}",
                        kappa_values[j + 1]
                    ),
                );
            }
        }
    }
    (
        true,
        format!(
            "interior max {:.4} at n_T={:.3}, κ={:.3}; κ=0 row ≤ {kappa0_worst:.3e}",
            neg(best.0, best.1),
            nt_values[best.0],
            kappa_values[best.1]
        ),
    )
}

/// At the time-scan peak, the expected measured negativity gains a factor
/// in [1.5, 2.5] over the traced one.
fn check_measurement(_: &ValidateOptions) -> (bool, String) {
    let scan = match TIME_SCAN_N3.as_ref() {
        Ok(scan) => scan,
        Err(err) => return (false, format!("time scan failed: {err}")),
    };
    let peak = scan
        .rows
        .iter()
        .max_by(|a, b| a.neg_traced.total_cmp(&b.neg_traced))
        .expect("rows");
    let ratio = peak.neg_measured / peak.neg_traced;

    // Context: the ratio conditioned on finding the atomic ground state,
    // which is what actually approaches 2 on this grid.
    let params = ModelParams::default().with_n_t(peak.n_t);
    let layout = HilbertLayout::effective(3);
    let conditioned = evolve(&params, &layout, &DensityMatrix::ground(layout.clone()), peak.t, params.default_dt())
        .ok()
        .and_then(|out| effective_to_physical(&out.state, &params).ok())
        .and_then(|phys| {
            crate::entanglement::atom_measured_negativity(&phys)
                .ok()
                .map(|m| m.conditional_negativities[0] / peak.neg_traced)
        });
    let context = conditioned
        .map(|r| format!("; ground-conditioned ratio {r:.3}"))
        .unwrap_or_default();
    (
        (1.5..=2.5).contains(&ratio),
        format!(
            "peak at n_T={:.3}, t={:.2}: traced {:.4}, measured {:.4}, expected ratio {ratio:.3}{context}",
            peak.n_t, peak.t, peak.neg_traced, peak.neg_measured
        ),
    )
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Large-κ population scaling: log p_r against log n_T at κ = 50 with
/// slopes −2 (r=1) and −5 (r=2), each within ±0.3.
fn check_scaling(_: &ValidateOptions) -> (bool, String) {
    let n_ts = [5.0, 10.0, 20.0, 50.0];
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for &n_t in &n_ts {
        let params = ModelParams::default().with_kappa(50.0).with_n_t(n_t).with_cutoff(4);
        let layout = HilbertLayout::effective(4);
        let rho = match steady_state(&params, &layout, STEADY_STATE_TOL) {
            Ok(state) => state,
            Err(err) => return (false, format!("solver failed at n_T={n_t}: {err}")),
        };
        let p = rho.mode_populations(1);
        p1.push(p[1].ln());
        p2.push(p[2].ln());
    }
    let xs: Vec<f64> = n_ts.iter().map(|n| n.ln()).collect();
    let slope1 = regression_slope(&xs, &p1);
    let slope2 = regression_slope(&xs, &p2);
    let ok = (slope1 + 2.0).abs() <= 0.3 && (slope2 + 5.0).abs() <= 0.3;
    (ok, format!("slope(p1) = {slope1:.3} (want −2±0.3), slope(p2) = {slope2:.3} (want −5±0.3)"))
}

fn time_scan_for(cutoff: usize) -> Result<&'static ScanResult, String> {
    let cached = match cutoff {
        3 => &TIME_SCAN_N3,
        4 => &TIME_SCAN_N4,
        other => return Err(format!("no cached time scan for cutoff {other}")),
    };
    cached.as_ref().map_err(|err| format!("cutoff-{cutoff} scan failed: {err}"))
}

/// Time-scan negativities indistinguishable across the configured cutoffs.
fn check_cutoff_convergence(_: &ValidateOptions) -> (bool, String) {
    let cutoffs = ScanSpec::default_time_scan().cutoffs;
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0usize, 0usize);
    for pair in cutoffs.windows(2) {
        let lo = match time_scan_for(pair[0]) {
            Ok(scan) => scan,
            Err(err) => return (false, err),
        };
        let hi = match time_scan_for(pair[1]) {
            Ok(scan) => scan,
            Err(err) => return (false, err),
        };
        for (a, b) in lo.rows.iter().zip(&hi.rows) {
            let delta = (a.neg_traced - b.neg_traced).abs();
            if delta > worst {
                worst = delta;
                at = (a.n_t, a.t, pair[0], pair[1]);
            }
        }
    }
    (
        worst <= 1e-3,
        format!(
            "max |N(cutoff {}) − N(cutoff {})| = {worst:.3e} at n_T={:.3}, t={:.2} (tol 1e-3)",
            at.2, at.3, at.0, at.1
        ),
    )
}

/// RK4 against the matrix-exponential oracle at five random grid noise
/// levels, plus full physical-picture against effective-picture dynamics.
fn check_oracles(_: &ValidateOptions) -> (bool, String) {
    let spec = ScanSpec::default_time_scan();
    let nt_values = spec.axes[0].values();
    let mut rng = ChaCha8Rng::seed_from_u64(1701);
    let t = 5.0;
    let mut worst_expm: f64 = 0.0;
    for _ in 0..5 {
        let n_t = nt_values[rng.gen_range(0..nt_values.len())];
        let params = ModelParams::default().with_n_t(n_t);
        let layout = HilbertLayout::effective(3);
        let rho0 = DensityMatrix::ground(layout.clone());
        let rk4 = match evolve(&params, &layout, &rho0, t, params.default_dt()) {
            Ok(out) => out,
            Err(err) => return (false, format!("evolve failed at n_T={n_t}: {err}")),
        };
        let oracle = match evolve_matrix_exponential(&params, &layout, &rho0, t) {
            Ok(out) => out,
            Err(err) => return (false, format!("expm oracle failed at n_T={n_t}: {err}")),
        };
        worst_expm = worst_expm.max(rk4.state.mat().max_abs_diff(oracle.mat()));
    }
    if worst_expm > 1e-6 {
        return (false, format!("RK4 vs expm deviation {worst_expm:.3e} exceeds 1e-6"));
    }

    // Picture equivalence at a weakly driven grid point; valid only while
    // the truncation boundary stays unpopulated.
    let params = ModelParams::default().with_n_t(0.05);
    let eff = HilbertLayout::effective(3);
    let phys = HilbertLayout::physical(3);
    let eff_out = match evolve(&params, &eff, &DensityMatrix::ground(eff.clone()), t, params.default_dt())
    {
        Ok(out) => out,
        Err(err) => return (false, format!("effective evolve failed: {err}")),
    };
    let top = eff_out.state.mode_populations(1)[3];
    if top >= 1e-8 {
        return (false, format!("top-level population {top:.3e} invalidates the comparison"));
    }
    let mapped = match effective_to_physical(&eff_out.state, &params) {
        Ok(state) => state,
        Err(err) => return (false, format!("transform failed: {err}")),
    };
    let phys_out = match evolve(&params, &phys, &DensityMatrix::ground(phys.clone()), t, params.default_dt())
    {
        Ok(out) => out,
        Err(err) => return (false, format!("physical evolve failed: {err}")),
    };
    for mode in [1usize, 2] {
        let p = phys_out.state.mode_populations(mode);
        if p[3] >= 1e-8 {
            return (false, format!("physical mode {mode} top population {:.3e}", p[3]));
        }
    }
    let picture_diff = mapped.mat().max_abs_diff(phys_out.state.mat());
    (
        picture_diff <= 1e-6 && worst_expm <= 1e-6,
        format!("RK4 vs expm {worst_expm:.3e}; picture equivalence {picture_diff:.3e} (tol 1e-6)"),
    )
}

/// A detected photon raises the cavity-field negativity at the
/// steady-scan optimum.
fn check_jump(_: &ValidateOptions) -> (bool, String) {
    let scan = match STEADY_SCAN.as_ref() {
        Ok(scan) => scan,
        Err(err) => return (false, format!("steady scan failed: {err}")),
    };
    let peak = scan
        .rows
        .iter()
        .filter(|r| r.kappa > 0.0 && r.neg_traced.is_finite())
        .max_by(|a, b| a.neg_traced.total_cmp(&b.neg_traced))
        .expect("rows");
    let params = ModelParams::default()
        .with_n_t(peak.n_t)
        .with_kappa(peak.kappa)
        .with_cutoff(scan.cutoff);
    let at_peak = match jump_diagnostic(&params, 2.0) {
        Ok(diag) => diag,
        Err(err) => return (false, format!("jump diagnostic failed: {err}")),
    };
    // Context: the same diagnostic in the weak-decay wing, where photon
    // detection does concentrate the entangled components.
    let wing = jump_diagnostic(&ModelParams::default().with_n_t(5.0).with_kappa(0.5).with_cutoff(scan.cutoff), 2.0)
        .map(|d| format!("; at n_T=5, κ=0.5: steady {:.3e} -> jump {:.3e}", d.neg_steady, d.neg_after_jump))
        .unwrap_or_default();
    (
        at_peak.neg_after_jump > at_peak.neg_steady,
        format!(
            "at optimum n_T={:.3}, κ={:.3}: steady {:.4e}, after jump {:.4e}, no-jump {:.4e}{wing}",
            peak.n_t, peak.kappa, at_peak.neg_steady, at_peak.neg_after_jump, at_peak.neg_no_jump
        ),
    )
}
