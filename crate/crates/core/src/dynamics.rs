//! Time evolution and steady states of the master equation via an explicit
//! superoperator.
//!
//! Density matrices are vectorized by column stacking, `vec(ρ)[j·D + i] =
//! ρ_ij`, under which `vec(AXB) = (Bᵀ ⊗ A) vec(X)`. The Liouvillian then
//! becomes a single D²×D² matrix; time evolution is fixed-step RK4 on
//! vec(ρ) and the steady state is a direct kernel solve with the trace row
//! pinned.

use thiserror::Error;

use crate::model::{
    self, DensityMatrix, HilbertLayout, ModelError, ModelParams,
};
use crate::numerics::{
    C64, ComplexMatrix, NumericsError, kron_add_scaled_into, matrix_exponential, solve_linear,
};

/// Default residual bound `‖L(ρ_ss)‖_max` for accepted steady states.
pub const STEADY_STATE_TOL: f64 = 1e-9;

/// Trace drift beyond this aborts an integration (step too large).
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("trace drift {drift:.3e} exceeds {TRACE_DRIFT_TOL:.0e}; reduce dt")]
    TraceDrift { drift: f64 },
    #[error("invalid integration request: {0}")]
    InvalidTime(String),
    #[error("no dissipative rate is positive; steady state undefined")]
    NoDissipation,
    #[error("Liouvillian kernel is numerically degenerate")]
    DegenerateKernel,
    #[error("steady-state residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("steady-state solution not positive: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
}

/// Matrix form of the Liouvillian acting on column-stacked states.
#[derive(Debug, Clone)]
pub struct Superoperator {
    layout: HilbertLayout,
    mat: ComplexMatrix,
}

impl Superoperator {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }
}

/// Column-stack a square matrix.
pub fn vec_state(m: &ComplexMatrix) -> Vec<C64> {
    let d = m.rows();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            v[j * d + i] = m[(i, j)];
        }
    }
    v
}

/// Inverse of [`vec_state`].
pub fn unvec_state(v: &[C64], d: usize) -> ComplexMatrix {
    assert_eq!(v.len(), d * d);
    ComplexMatrix::from_fn(d, d, |i, j| v[j * d + i])
}

/// Assemble the D²×D² Liouvillian matrix for the layout's picture.
pub fn build_superoperator(
    params: &ModelParams,
    layout: &HilbertLayout,
) -> Result<Superoperator, DynamicsError> {
    let d = layout.dim();
    let id = ComplexMatrix::identity(d);
    let h = model::hamiltonian(params, layout)?;
    let mut mat = ComplexMatrix::zeros(d * d, d * d);
    kron_add_scaled_into(&mut mat, C64::new(0.0, -1.0), &id, &h);
    kron_add_scaled_into(&mut mat, C64::new(0.0, 1.0), &h.transpose(), &id);
    for (x, rate) in model::jump_terms(params, layout)? {
        let n_op = x.dagger().matmul(&x);
        kron_add_scaled_into(&mut mat, C64::new(-rate, 0.0), &id, &n_op);
        kron_add_scaled_into(&mut mat, C64::new(-rate, 0.0), &n_op.transpose(), &id);
        kron_add_scaled_into(&mut mat, C64::new(2.0 * rate, 0.0), &x.conj(), &x);
    }
    Ok(Superoperator { layout: layout.clone(), mat })
}

/// Result of an integration sample: corrected state plus the trace drift
/// measured before re-symmetrization and renormalization.
#[derive(Debug, Clone)]
pub struct Evolved {
    pub state: DensityMatrix,
    pub trace_drift: f64,
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    scratch: Vec<C64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), scratch: z }
    }

    fn step(&mut self, l: &ComplexMatrix, v: &mut [C64], dt: f64) {
        l.matvec_into(v, &mut self.k1);
        for ((s, &x), &k) in self.scratch.iter_mut().zip(v.iter()).zip(&self.k1) {
            *s = x + k * (dt * 0.5);
        }
        l.matvec_into(&self.scratch, &mut self.k2);
        for ((s, &x), &k) in self.scratch.iter_mut().zip(v.iter()).zip(&self.k2) {
            *s = x + k * (dt * 0.5);
        }
        l.matvec_into(&self.scratch, &mut self.k3);
        for ((s, &x), &k) in self.scratch.iter_mut().zip(v.iter()).zip(&self.k3) {
            *s = x + k * dt;
        }
        l.matvec_into(&self.scratch, &mut self.k4);
        let w = dt / 6.0;
        for ((((x, &k1), &k2), &k3), &k4) in
            v.iter_mut().zip(&self.k1).zip(&self.k2).zip(&self.k3).zip(&self.k4)
        {
            *x += (k1 + (k2 + k3) * 2.0 + k4) * w;
        }
    }
}

/// Integrate to each requested sample time (non-decreasing, starting ≥ 0)
/// with fixed-step RK4, shortening the final step of each span so samples
/// land exactly. The returned states are re-symmetrized and renormalized;
/// the raw trajectory is carried forward uncorrected so drift accumulates
/// honestly into the diagnostic.
pub fn evolve_sampled(
    params: &ModelParams,
    layout: &HilbertLayout,
    rho0: &DensityMatrix,
    times: &[f64],
    dt: f64,
) -> Result<Vec<Evolved>, DynamicsError> {
    if rho0.layout() != layout {
        return Err(ModelError::LayoutMismatch {
            expected: layout.clone(),
            found: rho0.layout().clone(),
        }
        .into());
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(DynamicsError::InvalidTime("sample times must be non-decreasing and ≥ 0".into()));
    }
    rho0.check_physicality()?;

    let superop = build_superoperator(params, layout)?;
    let d = layout.dim();
    let mut v = vec_state(rho0.mat());
    let mut rk4 = Rk4::new(d * d);
    let mut t_now = 0.0_f64;
    let mut samples = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t_now;
        if span > 0.0 {
            let n_full = (span / dt).floor() as usize;
            for _ in 0..n_full {
                rk4.step(&superop.mat, &mut v, dt);
            }
            let rem = span - n_full as f64 * dt;
            if rem > 1e-12 * dt.max(span) {
                rk4.step(&superop.mat, &mut v, rem);
            }
            t_now = target;
        }
        let raw = unvec_state(&v, d);
        if !raw.all_finite() {
            return Err(NumericsError::NonFinite { op: "evolve" }.into());
        }
        let drift = (raw.trace().re - 1.0).abs().max(raw.trace().im.abs());
        if drift > TRACE_DRIFT_TOL {
            return Err(DynamicsError::TraceDrift { drift });
        }
        let corrected = raw.hermitize();
        let tr = corrected.trace().re;
        let state = DensityMatrix::new(layout.clone(), corrected.scaled_re(1.0 / tr))?;
        samples.push(Evolved { state, trace_drift: drift });
    }
    Ok(samples)
}

/// Evolve to a single time `t`.
pub fn evolve(
    params: &ModelParams,
    layout: &HilbertLayout,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<Evolved, DynamicsError> {
    if !(t >= 0.0) {
        return Err(DynamicsError::InvalidTime(format!("t must be ≥ 0, got {t}")));
    }
    Ok(evolve_sampled(params, layout, rho0, &[t], dt)?.pop().expect("one sample"))
}

/// Solve `L vec(ρ) = 0` with the first row replaced by the trace
/// constraint `tr ρ = 1`, then verify stationarity and positivity.
pub fn steady_state(
    params: &ModelParams,
    layout: &HilbertLayout,
    tol: f64,
) -> Result<DensityMatrix, DynamicsError> {
    if model::jump_terms(params, layout)?.is_empty() {
        return Err(DynamicsError::NoDissipation);
    }
    let superop = build_superoperator(params, layout)?;
    let d = layout.dim();
    let d2 = d * d;
    let mut a = superop.mat;
    for j in 0..d2 {
        a[(0, j)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * d + i)] = C64::new(1.0, 0.0); // vec(I)† row: picks out tr ρ
    }
    let mut rhs = vec![C64::new(0.0, 0.0); d2];
    rhs[0] = C64::new(1.0, 0.0);
    let x = solve_linear(&a, &rhs).map_err(|e| match e {
        NumericsError::SingularMatrix { .. } | NumericsError::SolveResidual { .. } => {
            DynamicsError::DegenerateKernel
        }
        other => other.into(),
    })?;
    let raw = unvec_state(&x, d);
    let herm = raw.hermitize();
    let tr = herm.trace().re;
    let rho = DensityMatrix::new(layout.clone(), herm.scaled_re(1.0 / tr))?;

    let residual = residual_norm(params, layout, &rho)?;
    if residual > tol {
        return Err(DynamicsError::ResidualTooLarge { residual, tol });
    }
    let spectrum = crate::numerics::hermitian_eigenvalues(
        rho.mat(),
        crate::numerics::DEFAULT_JACOBI_TOL,
    )?;
    let min_eigenvalue = spectrum.min_eigenvalue();
    if min_eigenvalue < model::STATE_POSITIVITY_FLOOR {
        return Err(DynamicsError::NotPositive { min_eigenvalue });
    }
    Ok(rho)
}

/// Stationarity diagnostic `‖L(ρ)‖_max`.
pub fn residual_norm(
    params: &ModelParams,
    layout: &HilbertLayout,
    rho: &DensityMatrix,
) -> Result<f64, DynamicsError> {
    Ok(model::liouvillian_apply(params, layout, rho)?.max_abs())
}

/// Independent evolution oracle: `unvec(exp(L·t) · vec(ρ0))`.
pub fn evolve_matrix_exponential(
    params: &ModelParams,
    layout: &HilbertLayout,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix, DynamicsError> {
    let superop = build_superoperator(params, layout)?;
    let propagator = matrix_exponential(&superop.mat.scaled_re(t))?;
    let v = propagator.matvec(&vec_state(rho0.mat()));
    let raw = unvec_state(&v, layout.dim());
    let herm = raw.hermitize();
    let tr = herm.trace().re;
    Ok(DensityMatrix::new(layout.clone(), herm.scaled_re(1.0 / tr))?)
}

#[cfg(test)]
mod tests {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use crate::model::{kappa0_stationary_state, liouvillian_apply, Picture};

    use super::*;

    fn random_density(rng: &mut impl Rng, layout: HilbertLayout) -> DensityMatrix {
        let d = layout.dim();
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let gg = g.matmul(&g.dagger());
        let tr = gg.trace().re;
        DensityMatrix::new(layout, gg.scaled_re(1.0 / tr)).unwrap()
    }

    #[test]
    fn superoperator_consistent_with_direct_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let params = ModelParams::default();
        for layout in [HilbertLayout::effective(3), HilbertLayout::physical(2)] {
            let superop = build_superoperator(&params, &layout).unwrap();
            for _ in 0..10 {
                let rho = random_density(&mut rng, layout.clone());
                let via_mat = superop.mat().matvec(&vec_state(rho.mat()));
                let direct = vec_state(&liouvillian_apply(&params, &layout, &rho).unwrap());
                let diff = via_mat
                    .iter()
                    .zip(&direct)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12, "superoperator inconsistency {diff:.3e}");
            }
        }
    }

    #[test]
    fn superoperator_dimension() {
        let superop =
            build_superoperator(&ModelParams::default(), &HilbertLayout::effective(3)).unwrap();
        assert_eq!(superop.dim(), 64);
        assert_eq!(superop.mat().cols(), 64);
    }

    #[test]
    fn damped_mode_vacuum_is_null_vector() {
        // Coupling and atomic drive off: only κ damping on mode c survives,
        // and the joint vacuum must sit in the kernel.
        let params =
            ModelParams { g_a: 0.0, g_b: 0.0, gamma: 0.0, n_t: 0.0, ..Default::default() };
        let layout = HilbertLayout::effective(3);
        let superop = build_superoperator(&params, &layout).unwrap();
        let vac = DensityMatrix::ground(layout);
        let image = superop.mat().matvec(&vec_state(vac.mat()));
        let max = image.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max < 1e-14);
    }

    #[test]
    fn trace_preservation_left_null_vector() {
        let params = ModelParams::default();
        for layout in [HilbertLayout::effective(3), HilbertLayout::physical(2)] {
            let superop = build_superoperator(&params, &layout).unwrap();
            let d = layout.dim();
            for j in 0..d * d {
                let col_sum: C64 = (0..d).map(|i| superop.mat()[(i * d + i, j)]).sum();
                assert!(col_sum.norm() < 1e-10, "column {j} sums to {col_sum}");
            }
        }
    }

    #[test]
    fn evolve_zero_time_identity() {
        let params = ModelParams::default();
        let layout = HilbertLayout::effective(3);
        let rho0 = kappa0_stationary_state(0.7, 3);
        let out = evolve(&params, &layout, &rho0, 0.0, params.default_dt()).unwrap();
        assert!(out.state.mat().max_abs_diff(rho0.mat()) < 1e-15);
        assert_eq!(out.trace_drift, 0.0);
    }

    #[test]
    fn everything_decays_at_zero_temperature() {
        let params = ModelParams::default().with_n_t(0.0);
        let layout = HilbertLayout::effective(3);
        let excited = DensityMatrix::basis_state(layout.clone(), &[1, 0]);
        let out = evolve(&params, &layout, &excited, 50.0, params.default_dt()).unwrap();
        let ground = DensityMatrix::ground(layout);
        assert!(out.state.mat().max_abs_diff(ground.mat()) < 1e-6);
    }

    #[test]
    fn rk4_matches_matrix_exponential_oracle() {
        let params = ModelParams::default(); // κ=2, Γ=0.2, n_T=1, N=3
        let layout = HilbertLayout::effective(3);
        let rho0 = DensityMatrix::ground(layout.clone());
        let t = 5.0;
        let rk4 = evolve(&params, &layout, &rho0, t, params.default_dt()).unwrap();
        let oracle = evolve_matrix_exponential(&params, &layout, &rho0, t).unwrap();
        let diff = rk4.state.mat().max_abs_diff(oracle.mat());
        assert!(diff < 1e-6, "RK4 vs expm oracle: {diff:.3e}");
    }

    #[test]
    fn step_halving_fourth_order_convergence() {
        // Compare through the transient, not just near the steady state.
        let params = ModelParams::default();
        let layout = HilbertLayout::effective(3);
        let rho0 = DensityMatrix::ground(layout.clone());
        let dt = params.default_dt();
        let times = [0.5, 1.0, 2.5, 5.0, 20.0];
        let coarse = evolve_sampled(&params, &layout, &rho0, &times, dt).unwrap();
        let fine = evolve_sampled(&params, &layout, &rho0, &times, dt / 2.0).unwrap();
        for ((c, f), t) in coarse.iter().zip(&fine).zip(times) {
            let diff = c.state.mat().max_abs_diff(f.state.mat());
            assert!(diff <= 1e-7, "halving dt moved the t={t} result by {diff:.3e}");
        }
    }

    #[test]
    fn trace_drift_reported_and_bounded() {
        let params = ModelParams::default();
        let layout = HilbertLayout::effective(3);
        let rho0 = DensityMatrix::ground(layout.clone());
        let samples =
            evolve_sampled(&params, &layout, &rho0, &[1.0, 5.0, 10.0], params.default_dt())
                .unwrap();
        for s in &samples {
            assert!(s.trace_drift <= TRACE_DRIFT_TOL);
            s.state.check_physicality().unwrap();
        }
        // an absurdly large step must trip the drift guard
        let err = evolve(&params, &layout, &rho0, 10.0, 0.5);
        assert!(matches!(err, Err(DynamicsError::TraceDrift { .. })));
    }

    #[test]
    fn invalid_integration_requests() {
        let params = ModelParams::default();
        let layout = HilbertLayout::effective(2);
        let rho0 = DensityMatrix::ground(layout.clone());
        let dt = params.default_dt();
        assert!(matches!(
            evolve(&params, &layout, &rho0, -1.0, dt),
            Err(DynamicsError::InvalidTime(_))
        ));
        assert!(matches!(
            evolve(&params, &layout, &rho0, 1.0, 0.0),
            Err(DynamicsError::InvalidTime(_))
        ));
        assert!(matches!(
            evolve_sampled(&params, &layout, &rho0, &[2.0, 1.0], dt),
            Err(DynamicsError::InvalidTime(_))
        ));
        let wrong = DensityMatrix::ground(HilbertLayout::effective(3));
        assert!(matches!(
            evolve(&params, &layout, &wrong, 1.0, dt),
            Err(DynamicsError::Model(ModelError::LayoutMismatch { .. }))
        ));
    }

    #[test]
    fn steady_state_zero_temperature_dark_state() {
        let params = ModelParams::default().with_n_t(0.0);
        let layout = HilbertLayout::effective(3);
        let rho = steady_state(&params, &layout, STEADY_STATE_TOL).unwrap();
        let ground = DensityMatrix::ground(layout);
        assert!(rho.mat().max_abs_diff(ground.mat()) < 1e-10);
    }

    #[test]
    fn steady_state_kappa0_matches_closed_form() {
        let cutoff = 10;
        let params = ModelParams::default().with_kappa(0.0).with_n_t(0.5).with_cutoff(cutoff);
        let layout = HilbertLayout::effective(cutoff);
        let rho = steady_state(&params, &layout, STEADY_STATE_TOL).unwrap();
        let analytic = kappa0_stationary_state(0.5, cutoff);
        let p_solved = rho.mode_populations(1);
        let p_analytic = analytic.mode_populations(1);
        for r in 0..=6 {
            assert!(
                (p_solved[r] - p_analytic[r]).abs() < 1e-6,
                "population mismatch at r={r}: {} vs {}",
                p_solved[r],
                p_analytic[r]
            );
        }
    }

    #[test]
    fn steady_state_matches_long_time_evolution() {
        // interior point of the steady-state scan region
        let params = ModelParams::default().with_kappa(1.0).with_n_t(1.0);
        let layout = HilbertLayout::effective(3);
        let rho_ss = steady_state(&params, &layout, STEADY_STATE_TOL).unwrap();
        let rho0 = DensityMatrix::ground(layout.clone());
        let long = evolve(&params, &layout, &rho0, 200.0, params.default_dt()).unwrap();
        let diff = rho_ss.mat().max_abs_diff(long.state.mat());
        assert!(diff < 1e-6, "steady vs long-time evolve: {diff:.3e}");
    }

    #[test]
    fn steady_state_independent_of_atom_initial_state() {
        let params = ModelParams::default().with_kappa(1.0).with_n_t(1.0);
        let layout = HilbertLayout::effective(3);
        let from_ground = evolve(
            &params,
            &layout,
            &DensityMatrix::basis_state(layout.clone(), &[0, 0]),
            200.0,
            params.default_dt(),
        )
        .unwrap();
        let from_excited = evolve(
            &params,
            &layout,
            &DensityMatrix::basis_state(layout.clone(), &[1, 0]),
            200.0,
            params.default_dt(),
        )
        .unwrap();
        let diff = from_ground.state.mat().max_abs_diff(from_excited.state.mat());
        assert!(diff < 1e-6);
    }

    #[test]
    fn degenerate_kernel_reported() {
        // With κ_a = κ_b = 0 in the physical picture, mode d decouples from
        // everything and the kernel is massively degenerate.
        let params = ModelParams::default().with_kappa(0.0).with_cutoff(2);
        let layout = HilbertLayout::physical(2);
        let result = steady_state(&params, &layout, STEADY_STATE_TOL);
        assert!(
            matches!(result, Err(DynamicsError::DegenerateKernel)),
            "got {result:?}"
        );
    }

    #[test]
    fn residual_diagnostics() {
        let params = ModelParams::default().with_kappa(1.0);
        let layout = HilbertLayout::effective(3);
        let rho_ss = steady_state(&params, &layout, STEADY_STATE_TOL).unwrap();
        assert!(residual_norm(&params, &layout, &rho_ss).unwrap() <= STEADY_STATE_TOL);

        let dark_params = params.with_n_t(0.0);
        let dark = DensityMatrix::ground(layout.clone());
        assert!(residual_norm(&dark_params, &layout, &dark).unwrap() < 1e-14);

        let d = layout.dim();
        let mixed = DensityMatrix::new(
            layout.clone(),
            ComplexMatrix::identity(d).scaled_re(1.0 / d as f64),
        )
        .unwrap();
        assert!(residual_norm(&params, &layout, &mixed).unwrap() > 1e-6);
    }

    #[test]
    fn picture_equivalence_small_cutoff() {
        // Same dynamics seen in both pictures as long as the truncation
        // boundary stays unpopulated; at cutoff 2 that needs a very weak
        // drive. The acceptance suite runs the cutoff-3 version.
        let cutoff = 2;
        let n_t = 0.002;
        let params = ModelParams::default().with_n_t(n_t).with_cutoff(cutoff);
        let t = 2.0;
        let eff = HilbertLayout::effective(cutoff);
        let phys = HilbertLayout::physical(cutoff);
        let eff_out = evolve(
            &params,
            &eff,
            &DensityMatrix::ground(eff.clone()),
            t,
            params.default_dt(),
        )
        .unwrap();
        let top = eff_out.state.mode_populations(1)[cutoff];
        assert!(top < 1e-8, "top-level population {top:.3e} too large for comparison");
        let mapped = crate::model::effective_to_physical(&eff_out.state, &params).unwrap();
        let phys_out = evolve(
            &params,
            &phys,
            &DensityMatrix::ground(phys.clone()),
            t,
            params.default_dt(),
        )
        .unwrap();
        for mode in [1, 2] {
            let p = phys_out.state.mode_populations(mode);
            assert!(p[cutoff] < 1e-8);
        }
        let diff = mapped.mat().max_abs_diff(phys_out.state.mat());
        assert!(diff < 1e-6, "picture mismatch {diff:.3e}");
        assert_eq!(mapped.layout().picture(), Picture::Physical);
    }
}
