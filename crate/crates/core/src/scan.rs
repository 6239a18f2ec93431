//! Parameter sweeps over noise intensity, decay rate, and time, with CSV
//! emission and single-point diagnostics.
//!
//! Scans run in the effective picture (κ_a = κ_b) and report, per grid
//! point: the cavity negativity after tracing the atom, the expected
//! negativity after an atom measurement, mode-c populations, and the
//! trace-drift / stationarity-residual diagnostics. Grid points are
//! independent and evaluated in parallel, but rows are always emitted in
//! row-major grid order so output is byte-identical across schedules.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{
    DynamicsError, evolve_sampled, residual_norm, steady_state, STEADY_STATE_TOL,
};
use crate::entanglement::{
    atom_measured_negativity_base, cavity_negativity_base, EntanglementError, DEFAULT_LOG_BASE,
};
use crate::model::{
    effective_to_physical, kappa0_stationary_state, lowering_operator, DensityMatrix,
    HilbertLayout, ModelError, ModelParams,
};
use crate::numerics::{matrix_exponential, C64, NumericsError};

/// Interval (in units of 1/κ) for the no-jump conditional evolution.
const NO_JUMP_SPAN: f64 = 0.1;

/// Measured negativity may not fall below traced negativity by more than
/// this before the row is flagged.
const MEASUREMENT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum ScanError {
    #[error("invalid scan specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("vanishing jump probability: tr[cρc†] below 1e-12")]
    VanishingJumpProbability,
}

/// Scan axis parameter, from the closed set {n_t, kappa, t}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    NoisePhotonNumber,
    Kappa,
    Time,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::NoisePhotonNumber => "n_t",
            AxisParam::Kappa => "kappa",
            AxisParam::Time => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One scan axis: values run from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(param: AxisParam, min: f64, max: f64, count: usize) -> Self {
        Self { param, min, max, count, spacing: Spacing::Linear }
    }

    pub fn log(param: AxisParam, min: f64, max: f64, count: usize) -> Self {
        Self { param, min, max, count, spacing: Spacing::Log }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if self.count < 2 {
            return Err(ScanError::InvalidSpec(format!(
                "axis {} needs at least 2 points",
                self.param.name()
            )));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(ScanError::InvalidSpec(format!(
                "axis {} needs finite min < max",
                self.param.name()
            )));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(ScanError::InvalidSpec(format!(
                "log-spaced axis {} needs min > 0",
                self.param.name()
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                let (lo, hi) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Full description of a sweep.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    /// Base parameters; axis values override n_t / κ per grid point.
    pub params: ModelParams,
    /// Axis definitions, outer axis first.
    pub axes: Vec<Axis>,
    /// Integrator step; `None` uses the per-point default.
    pub dt: Option<f64>,
    /// Base of the negativity logarithm.
    pub log_base: f64,
    /// Destination for CSV output (used by the CLI; `None` = stdout).
    pub output: Option<PathBuf>,
    /// Cutoffs exercised by convergence cross-checks.
    pub cutoffs: Vec<usize>,
}

impl ScanSpec {
    /// Default time scan: n_T ∈ [0.05, 5] × 21 against t ∈ [0, 20] × 81 at
    /// κ = 2, Γ = 0.2.
    pub fn default_time_scan() -> Self {
        Self {
            params: ModelParams::default(),
            axes: vec![
                Axis::linear(AxisParam::NoisePhotonNumber, 0.05, 5.0, 21),
                Axis::linear(AxisParam::Time, 0.0, 20.0, 81),
            ],
            dt: None,
            log_base: DEFAULT_LOG_BASE,
            output: None,
            cutoffs: vec![3, 4],
        }
    }

    /// Default steady-state scan: n_T ∈ [0.05, 5] × 25 against
    /// log-spaced κ ∈ [0.05, 10] × 25 at Γ = 0.2.
    ///
    /// The default cutoff here is 12, not 3: on the κ ≲ 0.3, n_T ≳ 2 corner
    /// of this grid the steady state is nearly thermal and the truncated
    /// partial transpose picks up a spurious negativity ~(n_T/(1+n_T))^N
    /// that swamps the genuine interior maximum (~4.6e-3) for any smaller
    /// cutoff. Cutoff 12 brings the per-step cutoff change below 1e-3
    /// everywhere on the grid.
    pub fn default_steady_scan() -> Self {
        Self {
            params: ModelParams::default().with_cutoff(12),
            axes: vec![
                Axis::linear(AxisParam::NoisePhotonNumber, 0.05, 5.0, 25),
                Axis::log(AxisParam::Kappa, 0.05, 10.0, 25),
            ],
            dt: None,
            log_base: DEFAULT_LOG_BASE,
            output: None,
            cutoffs: vec![3, 4],
        }
    }

    fn axis(&self, param: AxisParam) -> Option<&Axis> {
        self.axes.iter().find(|a| a.param == param)
    }

    fn validate_axes(&self, expected: [AxisParam; 2]) -> Result<(), ScanError> {
        if self.axes.len() != 2
            || expected.iter().any(|p| self.axis(*p).is_none())
        {
            let got: Vec<&str> = self.axes.iter().map(|a| a.param.name()).collect();
            return Err(ScanError::InvalidSpec(format!(
                "expected axes {{{}, {}}}, got {{{}}}",
                expected[0].name(),
                expected[1].name(),
                got.join(", ")
            )));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if !(self.log_base > 0.0) || self.log_base == 1.0 {
            return Err(ScanError::InvalidSpec(format!("bad log base {}", self.log_base)));
        }
        Ok(())
    }
}

/// Row flags; an empty set means all applicable diagnostics passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    /// Steady-state kernel numerically degenerate; results unavailable.
    Degenerate,
    /// Stationarity residual above tolerance; results unavailable.
    Residual,
    /// Measured negativity fell below traced negativity.
    MeasurementDrop,
}

impl RowFlag {
    fn token(&self) -> &'static str {
        match self {
            RowFlag::Degenerate => "degenerate",
            RowFlag::Residual => "residual",
            RowFlag::MeasurementDrop => "meas",
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub n_t: f64,
    pub kappa: f64,
    /// Sample time; 0 for steady-state rows.
    pub t: f64,
    pub neg_traced: f64,
    pub neg_measured: f64,
    /// Mode-c populations p_0 ..= p_N.
    pub populations: Vec<f64>,
    pub trace_drift: f64,
    pub residual: f64,
    pub flags: Vec<RowFlag>,
}

/// Rows in deterministic row-major grid order.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub cutoff: usize,
    pub rows: Vec<ScanRow>,
}

fn time_point_row(
    params: &ModelParams,
    state: &DensityMatrix,
    t: f64,
    trace_drift: f64,
    log_base: f64,
) -> Result<ScanRow, ScanError> {
    let layout = state.layout().clone();
    let populations = state.mode_populations(1);
    let residual = residual_norm(params, &layout, state)?;
    let phys = effective_to_physical(state, params)?;
    let neg_traced = cavity_negativity_base(&phys, log_base)?.value;
    let neg_measured = atom_measured_negativity_base(&phys, log_base)?.expected_negativity;
    let mut flags = Vec::new();
    if neg_measured < neg_traced - MEASUREMENT_SLACK {
        flags.push(RowFlag::MeasurementDrop);
    }
    Ok(ScanRow {
        n_t: params.n_t,
        kappa: params.kappa_a,
        t,
        neg_traced,
        neg_measured,
        populations,
        trace_drift,
        residual,
        flags,
    })
}

/// Time series at fixed parameters: evolve from atom |1⟩ ⊗ vacuum in the
/// effective picture and report one row per sample time.
pub fn time_series(
    params: &ModelParams,
    times: &[f64],
    dt: Option<f64>,
    log_base: f64,
) -> Result<Vec<ScanRow>, ScanError> {
    params.validate()?;
    params.effective_kappa()?;
    let layout = HilbertLayout::effective(params.cutoff);
    let rho0 = DensityMatrix::ground(layout.clone());
    let dt = dt.unwrap_or_else(|| params.default_dt());
    let samples = evolve_sampled(params, &layout, &rho0, times, dt)?;
    times
        .iter()
        .zip(&samples)
        .map(|(&t, sample)| time_point_row(params, &sample.state, t, sample.trace_drift, log_base))
        .collect()
}

/// Time × noise sweep: for each n_T, evolve from atom |1⟩ ⊗ vacuum and
/// sample the time grid.
pub fn scan_time(spec: &ScanSpec) -> Result<ScanResult, ScanError> {
    spec.validate_axes([AxisParam::NoisePhotonNumber, AxisParam::Time])?;
    spec.params.validate()?;
    spec.params.effective_kappa()?;
    let nt_values = spec.axis(AxisParam::NoisePhotonNumber).expect("validated").values();
    let t_values = spec.axis(AxisParam::Time).expect("validated").values();
    if t_values[0] < 0.0 {
        return Err(ScanError::InvalidSpec("time axis must start at t ≥ 0".into()));
    }

    let column_results: Vec<Result<Vec<ScanRow>, ScanError>> = nt_values
        .par_iter()
        .map(|&n_t| {
            let params = spec.params.with_n_t(n_t);
            time_series(&params, &t_values, spec.dt, spec.log_base)
        })
        .collect();
    let mut rows = Vec::with_capacity(nt_values.len() * t_values.len());
    for column in column_results {
        rows.extend(column?);
    }
    Ok(ScanResult { cutoff: spec.params.cutoff, rows })
}

fn steady_point_row(spec: &ScanSpec, n_t: f64, kappa: f64) -> Result<ScanRow, ScanError> {
    let params = spec.params.with_n_t(n_t).with_kappa(kappa);
    let layout = HilbertLayout::effective(params.cutoff);
    let empty_row = |flag: RowFlag| ScanRow {
        n_t,
        kappa,
        t: 0.0,
        neg_traced: f64::NAN,
        neg_measured: f64::NAN,
        populations: vec![f64::NAN; params.cutoff + 1],
        trace_drift: 0.0,
        residual: f64::NAN,
        flags: vec![flag],
    };
    // κ = 0 exactly: substitute the closed-form stationary state. Its
    // negativity is reported as its exact value, zero — a thermal mode-c
    // state maps through the beam splitter to a separable two-mode state.
    // The partial transpose of the *truncated* representation carries a
    // spurious negativity of order (n_T/(1+n_T))^cutoff, which is pure
    // truncation error.
    if kappa == 0.0 {
        let state = kappa0_stationary_state(n_t, params.cutoff);
        let populations = state.mode_populations(1);
        let residual = residual_norm(&params, &layout, &state)?;
        return Ok(ScanRow {
            n_t,
            kappa,
            t: 0.0,
            neg_traced: 0.0,
            neg_measured: 0.0,
            populations,
            trace_drift: 0.0,
            residual,
            flags: Vec::new(),
        });
    }
    let state = match steady_state(&params, &layout, STEADY_STATE_TOL) {
        Ok(state) => state,
        Err(DynamicsError::DegenerateKernel) => return Ok(empty_row(RowFlag::Degenerate)),
        Err(DynamicsError::ResidualTooLarge { .. }) => return Ok(empty_row(RowFlag::Residual)),
        Err(other) => return Err(other.into()),
    };
    let populations = state.mode_populations(1);
    let residual = residual_norm(&params, &layout, &state)?;
    let phys = effective_to_physical(&state, &params)?;
    let neg_traced = cavity_negativity_base(&phys, spec.log_base)?.value;
    let neg_measured =
        atom_measured_negativity_base(&phys, spec.log_base)?.expected_negativity;
    let mut flags = Vec::new();
    if neg_measured < neg_traced - MEASUREMENT_SLACK {
        flags.push(RowFlag::MeasurementDrop);
    }
    Ok(ScanRow {
        n_t,
        kappa,
        t: 0.0,
        neg_traced,
        neg_measured,
        populations,
        trace_drift: 0.0,
        residual,
        flags,
    })
}

/// Steady-state noise × decay sweep. The κ = 0 row uses the closed-form
/// state; per-point solver degeneracy is flagged, not fatal.
pub fn scan_steady(spec: &ScanSpec) -> Result<ScanResult, ScanError> {
    spec.validate_axes([AxisParam::NoisePhotonNumber, AxisParam::Kappa])?;
    spec.params.validate()?;
    let nt_values = spec.axis(AxisParam::NoisePhotonNumber).expect("validated").values();
    let kappa_values = spec.axis(AxisParam::Kappa).expect("validated").values();
    if kappa_values[0] < 0.0 {
        return Err(ScanError::InvalidSpec("kappa axis must start at κ ≥ 0".into()));
    }

    let grid: Vec<(f64, f64)> = nt_values
        .iter()
        .flat_map(|&n_t| kappa_values.iter().map(move |&k| (n_t, k)))
        .collect();
    let rows: Result<Vec<ScanRow>, ScanError> = grid
        .par_iter()
        .map(|&(n_t, kappa)| steady_point_row(spec, n_t, kappa))
        .collect();
    Ok(ScanResult { cutoff: spec.params.cutoff, rows: rows? })
}

/// Negativity bookkeeping around a single photon-detection event.
#[derive(Debug, Clone)]
pub struct JumpDiagnostic {
    pub params: ModelParams,
    /// Cavity negativity of the steady state.
    pub neg_steady: f64,
    /// Negativity after applying the jump operator c and renormalizing.
    pub neg_after_jump: f64,
    /// Negativity after no-detection conditional evolution over 0.1/κ.
    pub neg_no_jump: f64,
}

/// At the given parameters, compare the steady-state negativity with the
/// negativity conditioned on one detected photon and on a short stretch of
/// detection-free evolution.
pub fn jump_diagnostic(params: &ModelParams, log_base: f64) -> Result<JumpDiagnostic, ScanError> {
    params.validate()?;
    let kappa = params.effective_kappa()?;
    if kappa <= 0.0 {
        return Err(ScanError::InvalidSpec("jump diagnostic requires κ > 0".into()));
    }
    let layout = HilbertLayout::effective(params.cutoff);
    let rho_ss = steady_state(params, &layout, STEADY_STATE_TOL)?;

    let traced = |state: &DensityMatrix| -> Result<f64, ScanError> {
        let phys = effective_to_physical(state, params)?;
        Ok(cavity_negativity_base(&phys, log_base)?.value)
    };
    let neg_steady = traced(&rho_ss)?;

    let c = lowering_operator(&layout, 1)?;
    let jumped = c.matmul(rho_ss.mat()).matmul(&c.dagger());
    let p_jump = jumped.trace().re;
    if p_jump < 1e-12 {
        return Err(ScanError::VanishingJumpProbability);
    }
    let jump_state = DensityMatrix::new(layout.clone(), jumped.scaled_re(1.0 / p_jump))?;
    let neg_after_jump = traced(&jump_state)?;

    // No-detection evolution under the non-Hermitian H − iκc†c − iΓ terms.
    let tau = NO_JUMP_SPAN / kappa;
    let h = crate::model::hamiltonian(params, &layout)?;
    let sigma_minus = lowering_operator(&layout, 0)?;
    let sigma_plus = sigma_minus.dagger();
    let mut decay = c.dagger().matmul(&c).scaled_re(kappa);
    decay.add_assign_scaled(
        &sigma_plus.matmul(&sigma_minus),
        C64::new((params.n_t + 1.0) * params.gamma, 0.0),
    );
    decay.add_assign_scaled(
        &sigma_minus.matmul(&sigma_plus),
        C64::new(params.n_t * params.gamma, 0.0),
    );
    // exp(−i(H − i·decay)τ) = exp(−iHτ − decay·τ)
    let generator = &h.scaled(C64::new(0.0, -tau)) - &decay.scaled_re(tau);
    let u = matrix_exponential(&generator)?;
    let conditioned = u.matmul(rho_ss.mat()).matmul(&u.dagger());
    let p_none = conditioned.trace().re;
    let no_jump_state = DensityMatrix::new(layout, conditioned.scaled_re(1.0 / p_none))?;
    let neg_no_jump = traced(&no_jump_state)?;

    Ok(JumpDiagnostic { params: *params, neg_steady, neg_after_jump, neg_no_jump })
}

fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

/// CSV header for a given cutoff:
/// `n_t,kappa,t,neg_traced,neg_measured,p0,...,trace_drift,residual,flag`.
pub fn csv_header(cutoff: usize) -> String {
    let mut cols = vec!["n_t".to_string(), "kappa".into(), "t".into(), "neg_traced".into(),
        "neg_measured".into()];
    cols.extend((0..=cutoff).map(|r| format!("p{r}")));
    cols.push("trace_drift".into());
    cols.push("residual".into());
    cols.push("flag".into());
    cols.join(",")
}

/// Write a scan as CSV: 12 significant digits, `.` decimal separator,
/// `\n` line endings; deterministic for identical inputs.
pub fn write_csv<W: Write>(result: &ScanResult, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header(result.cutoff))?;
    for row in &result.rows {
        let mut fields = vec![
            format_value(row.n_t),
            format_value(row.kappa),
            format_value(row.t),
            format_value(row.neg_traced),
            format_value(row.neg_measured),
        ];
        fields.extend(row.populations.iter().map(|&p| format_value(p)));
        fields.push(format_value(row.trace_drift));
        fields.push(format_value(row.residual));
        let flags: Vec<&str> = row.flags.iter().map(RowFlag::token).collect();
        fields.push(flags.join(";"));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_time_spec() -> ScanSpec {
        let mut spec = ScanSpec::default_time_scan();
        spec.axes = vec![
            Axis::linear(AxisParam::NoisePhotonNumber, 0.0, 2.0, 3),
            Axis::linear(AxisParam::Time, 0.0, 4.0, 5),
        ];
        spec
    }

    fn small_steady_spec() -> ScanSpec {
        let mut spec = ScanSpec::default_steady_scan();
        spec.params.cutoff = 3;
        spec.axes = vec![
            Axis::linear(AxisParam::NoisePhotonNumber, 0.0, 2.0, 3),
            Axis::linear(AxisParam::Kappa, 0.0, 2.0, 3),
        ];
        spec
    }

    #[test]
    fn axis_values() {
        let lin = Axis::linear(AxisParam::Time, 0.0, 20.0, 81);
        let v = lin.values();
        assert_eq!(v.len(), 81);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[80], 20.0);
        assert!((v[8] - 2.0).abs() < 1e-12);

        let log = Axis::log(AxisParam::Kappa, 0.05, 10.0, 25);
        let v = log.values();
        assert!((v[0] - 0.05).abs() < 1e-12);
        assert!((v[24] - 10.0).abs() < 1e-12);
        let ratio0 = v[1] / v[0];
        let ratio1 = v[13] / v[12];
        assert!((ratio0 - ratio1).abs() < 1e-12, "log spacing not geometric");
    }

    #[test]
    fn spec_validation() {
        let mut spec = small_time_spec();
        spec.axes[0].count = 1;
        assert!(matches!(scan_time(&spec), Err(ScanError::InvalidSpec(_))));

        let mut spec = small_time_spec();
        spec.axes[0].min = 3.0; // min > max
        assert!(scan_time(&spec).is_err());

        let mut spec = small_time_spec();
        spec.axes[1].param = AxisParam::Kappa; // wrong axis set
        assert!(scan_time(&spec).is_err());

        let mut spec = small_steady_spec();
        spec.axes[1] = Axis::log(AxisParam::Kappa, 0.0, 1.0, 3); // log from 0
        assert!(scan_steady(&spec).is_err());
    }

    #[test]
    fn time_scan_grid_and_zero_noise_column() {
        let spec = small_time_spec();
        let result = scan_time(&spec).unwrap();
        assert_eq!(result.rows.len(), 15);
        // default grid row count
        let dspec = ScanSpec::default_time_scan();
        let nt = dspec.axis(AxisParam::NoisePhotonNumber).unwrap().count;
        let t = dspec.axis(AxisParam::Time).unwrap().count;
        assert_eq!(nt * t, 1701);
        // n_T = 0: no drive, never any entanglement
        for row in result.rows.iter().filter(|r| r.n_t == 0.0) {
            assert_eq!(row.neg_traced, 0.0);
            assert_eq!(row.neg_measured, 0.0);
            assert!(row.trace_drift <= 1e-6);
        }
        // row-major order: t fastest within each n_T block
        let times: Vec<f64> = result.rows[..5].iter().map(|r| r.t).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(result.rows[5].n_t > result.rows[4].n_t);
    }

    #[test]
    fn steady_scan_boundary_behavior() {
        let spec = small_steady_spec();
        let result = scan_steady(&spec).unwrap();
        assert_eq!(result.rows.len(), 9);
        for row in &result.rows {
            assert!(row.flags.is_empty(), "unexpected flag on {row:?}");
            if row.kappa == 0.0 {
                // κ=0 rows carry the closed-form state: exactly separable,
                // and stationary for the truncated generator.
                assert_eq!(row.neg_traced, 0.0);
                assert_eq!(row.neg_measured, 0.0);
                assert!(row.residual < 1e-10, "closed form not stationary");
                let analytic = kappa0_stationary_state(row.n_t, spec.params.cutoff);
                assert_eq!(row.populations, analytic.mode_populations(1));
            }
            if row.n_t == 0.0 {
                assert_eq!(row.neg_traced, 0.0);
            }
        }
    }

    #[test]
    fn csv_deterministic_and_well_formed() {
        let spec = small_steady_spec();
        let result = scan_steady(&spec).unwrap();
        let mut first = Vec::new();
        write_csv(&result, &mut first).unwrap();
        let again = scan_steady(&spec).unwrap();
        let mut second = Vec::new();
        write_csv(&again, &mut second).unwrap();
        assert_eq!(first, second, "CSV not byte-identical across runs");

        let text = String::from_utf8(first).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n_t,kappa,t,neg_traced,neg_measured,p0,p1,p2,p3,trace_drift,residual,flag"
        );
        let field_count = csv_header(3).split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), field_count);
        }
    }

    #[test]
    fn default_time_scan_measurement_never_hurts() {
        // Empirical suite: across the whole default grid, measuring the
        // atom never loses entanglement relative to tracing it out.
        let result = scan_time(&ScanSpec::default_time_scan()).unwrap();
        let flagged = result.rows.iter().filter(|r| !r.flags.is_empty()).count();
        assert_eq!(flagged, 0, "{flagged} rows flagged on the default grid");
    }

    #[test]
    fn jump_diagnostic_errors() {
        let params = ModelParams::default().with_n_t(0.0);
        assert!(matches!(
            jump_diagnostic(&params, 2.0),
            Err(ScanError::VanishingJumpProbability)
        ));
        let no_decay = ModelParams::default().with_kappa(0.0);
        assert!(matches!(jump_diagnostic(&no_decay, 2.0), Err(ScanError::InvalidSpec(_))));
    }

    #[test]
    fn jump_diagnostic_record() {
        let params = ModelParams::default().with_kappa(1.0).with_n_t(0.5);
        let diag = jump_diagnostic(&params, 2.0).unwrap();
        assert!(diag.neg_steady.is_finite());
        assert!(diag.neg_after_jump.is_finite());
        assert!(diag.neg_no_jump.is_finite());
        assert_eq!(diag.params, params);
    }
}
