//! Partial trace, partial transpose, logarithmic negativity, and
//! atom-measurement conditioning.
//!
//! Entanglement between the cavity fields is quantified as
//! N(ρ) = log‖ρ^{Γ_B}‖₁, the log (base 2 by default) of the trace norm of
//! the partial transpose on mode b. Since ρ^{Γ_B} is Hermitian, the trace
//! norm is the sum of absolute eigenvalues. Negativity of the full evolved
//! state is always evaluated in the physical two-mode picture; a thermal
//! state of mode c alone would otherwise masquerade as entanglement.

use thiserror::Error;

use crate::model::{DensityMatrix, HilbertLayout, ModelError, Picture};
use crate::numerics::{self, C64, ComplexMatrix, NumericsError};

/// A Bell pair scores exactly 1 in base 2.
pub const DEFAULT_LOG_BASE: f64 = 2.0;

/// Trace norms within this window above 1 clamp to zero negativity,
/// keeping floating-point noise out of scan output.
const TRACE_NORM_CLAMP: f64 = 1e-12;

/// Measurement outcomes rarer than this contribute zero.
const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum EntanglementError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("expected a reduced two-mode state, got {0:?} with {1} subsystems")]
    NotTwoModes(Picture, usize),
    #[error("expected a physical-picture state, got {0:?}")]
    NotPhysical(Picture),
    #[error("subsystem selection {0:?} invalid for {1} subsystems")]
    InvalidSubsystems(Vec<usize>, usize),
}

/// Logarithmic negativity along with its ingredients.
#[derive(Debug, Clone, Copy)]
pub struct NegativityResult {
    /// log (configured base) of the trace norm, clamped to ≥ 0.
    pub value: f64,
    /// Smallest eigenvalue of the partial transpose (< 0 witnesses
    /// entanglement).
    pub min_pt_eigenvalue: f64,
    /// Trace norm ‖ρ^{Γ_B}‖₁ ≥ 1.
    pub trace_norm: f64,
}

/// Projective atom measurement in the {|1⟩, |2⟩} basis.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// Outcome probabilities p₁, p₂ (sum to 1).
    pub probabilities: [f64; 2],
    /// Normalized post-measurement two-mode states; `None` when the
    /// outcome probability is below the floor.
    pub conditional_states: [Option<DensityMatrix>; 2],
    /// Negativity of each conditional state (zero for empty outcomes).
    pub conditional_negativities: [f64; 2],
    /// p₁N₁ + p₂N₂.
    pub expected_negativity: f64,
}

/// Trace out all subsystems not listed in `keep`; kept subsystems stay in
/// their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, EntanglementError> {
    let layout = rho.layout();
    let dims = layout.dims();
    let n_sub = dims.len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= n_sub) {
        return Err(EntanglementError::InvalidSubsystems(keep, n_sub));
    }
    if keep.len() == n_sub {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..n_sub).filter(|k| !keep.contains(k)).collect();

    // Flat offsets contributed by each kept / traced multi-index.
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let sizes: Vec<usize> = subs.iter().map(|&k| dims[k]).collect();
        let strides: Vec<usize> = subs.iter().map(|&k| layout.stride(k)).collect();
        let total: usize = sizes.iter().product();
        (0..total)
            .map(|mut flat| {
                let mut offset = 0;
                for (size, stride) in sizes.iter().zip(&strides).rev() {
                    offset += (flat % size) * stride;
                    flat /= size;
                }
                offset
            })
            .collect()
    };
    let keep_offsets = offsets(&keep);
    let trace_offsets = offsets(&traced);

    let dk = keep_offsets.len();
    let mat = rho.mat();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (i, &oi) in keep_offsets.iter().enumerate() {
        for (j, &oj) in keep_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &trace_offsets {
                acc += mat[(oi + ot, oj + ot)];
            }
            out[(i, j)] = acc;
        }
    }
    let reduced = HilbertLayout::reduced(keep.iter().map(|&k| dims[k]).collect());
    Ok(DensityMatrix::new(reduced, out)?)
}

fn expect_two_modes(rho: &DensityMatrix) -> Result<(usize, usize), EntanglementError> {
    let layout = rho.layout();
    match (layout.picture(), layout.dims()) {
        (Picture::Reduced, [da, db]) => Ok((*da, *db)),
        (picture, dims) => Err(EntanglementError::NotTwoModes(picture, dims.len())),
    }
}

/// Partial transpose on the second mode:
/// `ρ^{Γ_B}[(m,n),(m′,n′)] = ρ[(m,n′),(m′,n)]`.
pub fn partial_transpose(rho: &DensityMatrix) -> Result<ComplexMatrix, EntanglementError> {
    let (da, db) = expect_two_modes(rho)?;
    let d = da * db;
    let mat = rho.mat();
    let mut out = ComplexMatrix::zeros(d, d);
    for m in 0..da {
        for n in 0..db {
            for mp in 0..da {
                for np in 0..db {
                    out[(m * db + n, mp * db + np)] = mat[(m * db + np, mp * db + n)];
                }
            }
        }
    }
    Ok(out)
}

/// Logarithmic negativity of a two-mode state, log base `base`.
pub fn log_negativity_base(
    rho: &DensityMatrix,
    base: f64,
) -> Result<NegativityResult, EntanglementError> {
    let pt = partial_transpose(rho)?;
    let spectrum = numerics::hermitian_eigenvalues(&pt, numerics::DEFAULT_JACOBI_TOL)?;
    let trace_norm = spectrum.trace_norm();
    let min_pt_eigenvalue = spectrum.min_eigenvalue();
    let value = if trace_norm <= 1.0 + TRACE_NORM_CLAMP {
        0.0
    } else {
        trace_norm.ln() / base.ln()
    };
    Ok(NegativityResult { value, min_pt_eigenvalue, trace_norm })
}

/// [`log_negativity_base`] in base 2.
pub fn log_negativity(rho: &DensityMatrix) -> Result<NegativityResult, EntanglementError> {
    log_negativity_base(rho, DEFAULT_LOG_BASE)
}

/// Negativity of the cavity fields of a physical-picture state after the
/// atom is traced out.
pub fn cavity_negativity_base(
    rho: &DensityMatrix,
    base: f64,
) -> Result<NegativityResult, EntanglementError> {
    if rho.layout().picture() != Picture::Physical {
        return Err(EntanglementError::NotPhysical(rho.layout().picture()));
    }
    let modes = partial_trace(rho, &[1, 2])?;
    log_negativity_base(&modes, base)
}

/// Projectively measure the atom of a physical-picture state in its energy
/// basis and report conditional and expected cavity negativities.
pub fn atom_measured_negativity_base(
    rho: &DensityMatrix,
    base: f64,
) -> Result<MeasurementOutcome, EntanglementError> {
    if rho.layout().picture() != Picture::Physical {
        return Err(EntanglementError::NotPhysical(rho.layout().picture()));
    }
    let dims = rho.layout().dims().to_vec();
    let block = dims[1] * dims[2];
    let mat = rho.mat();

    let mut probabilities = [0.0; 2];
    let mut conditional_states: [Option<DensityMatrix>; 2] = [None, None];
    let mut conditional_negativities = [0.0; 2];
    for outcome in 0..2 {
        let base_idx = outcome * block;
        let sub = ComplexMatrix::from_fn(block, block, |i, j| mat[(base_idx + i, base_idx + j)]);
        let p = sub.trace().re;
        probabilities[outcome] = p;
        if p < PROBABILITY_FLOOR {
            continue;
        }
        let layout = HilbertLayout::reduced(vec![dims[1], dims[2]]);
        let state = DensityMatrix::new(layout, sub.scaled_re(1.0 / p))?;
        conditional_negativities[outcome] = log_negativity_base(&state, base)?.value;
        conditional_states[outcome] = Some(state);
    }
    let expected_negativity = probabilities[0] * conditional_negativities[0]
        + probabilities[1] * conditional_negativities[1];
    Ok(MeasurementOutcome {
        probabilities,
        conditional_states,
        conditional_negativities,
        expected_negativity,
    })
}

/// [`atom_measured_negativity_base`] in base 2.
pub fn atom_measured_negativity(
    rho: &DensityMatrix,
) -> Result<MeasurementOutcome, EntanglementError> {
    atom_measured_negativity_base(rho, DEFAULT_LOG_BASE)
}

#[cfg(test)]
mod tests {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use crate::model::{effective_to_physical, kappa0_stationary_state, ModelParams};
    use crate::numerics::kron;

    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_density(rng: &mut impl Rng, layout: HilbertLayout) -> DensityMatrix {
        let d = layout.dim();
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let gg = g.matmul(&g.dagger());
        let tr = gg.trace().re;
        DensityMatrix::new(layout, gg.scaled_re(1.0 / tr)).unwrap()
    }

    /// (|01⟩ + |10⟩)/√2 on two qubit-sized modes.
    fn bell_pair() -> DensityMatrix {
        let layout = HilbertLayout::reduced(vec![2, 2]);
        let amp = 1.0 / 2f64.sqrt();
        DensityMatrix::from_pure(layout, &[c(0.0), c(amp), c(amp), c(0.0)])
    }

    fn vacuum_state() -> DensityMatrix {
        DensityMatrix::basis_state(HilbertLayout::reduced(vec![2, 2]), &[0, 0])
    }

    fn mix(a: &DensityMatrix, b: &DensityMatrix, p: f64) -> DensityMatrix {
        let mat = &a.mat().scaled_re(p) + &b.mat().scaled_re(1.0 - p);
        DensityMatrix::new(a.layout().clone(), mat).unwrap()
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let sigma = random_density(&mut rng, HilbertLayout::reduced(vec![3]));
        let tau = random_density(&mut rng, HilbertLayout::reduced(vec![4]));
        let joint_mat = kron(sigma.mat(), tau.mat()).unwrap();
        let joint =
            DensityMatrix::new(HilbertLayout::reduced(vec![3, 4]), joint_mat).unwrap();
        let second = partial_trace(&joint, &[1]).unwrap();
        assert!(second.mat().max_abs_diff(tau.mat()) < 1e-14);
        let first = partial_trace(&joint, &[0]).unwrap();
        assert!(first.mat().max_abs_diff(sigma.mat()) < 1e-14);
    }

    #[test]
    fn partial_trace_bell_state_maximally_mixed() {
        let reduced = partial_trace(&bell_pair(), &[0]).unwrap();
        let expected = ComplexMatrix::identity(2).scaled_re(0.5);
        assert!(reduced.mat().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let rho = random_density(&mut rng, HilbertLayout::reduced(vec![2, 3, 2]));
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let out = partial_trace(&rho, &keep).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_invalid_subsystems() {
        let rho = bell_pair();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[5]).is_err());
    }

    #[test]
    fn partial_transpose_diagonal_invariant() {
        let layout = HilbertLayout::reduced(vec![3, 3]);
        let rho = DensityMatrix::new(
            layout,
            ComplexMatrix::diag_from_reals(&[0.4, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05]),
        )
        .unwrap();
        let pt = partial_transpose(&rho).unwrap();
        assert!(pt.max_abs_diff(rho.mat()) < 1e-15);
    }

    #[test]
    fn partial_transpose_involution_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let rho = random_density(&mut rng, HilbertLayout::reduced(vec![3, 4]));
        let pt = partial_transpose(&rho).unwrap();
        assert!((pt.trace().re - 1.0).abs() < 1e-12);
        assert!(pt.hermiticity_error() < 1e-14);
        let pt2 = partial_transpose(
            &DensityMatrix::new(rho.layout().clone(), pt).unwrap(),
        )
        .unwrap();
        assert!(pt2.max_abs_diff(rho.mat()) < 1e-15);
    }

    #[test]
    fn partial_transpose_rejects_wrong_layout() {
        let rho = DensityMatrix::ground(HilbertLayout::effective(2));
        assert!(matches!(
            partial_transpose(&rho),
            Err(EntanglementError::NotTwoModes(..))
        ));
    }

    #[test]
    fn bell_state_pt_spectrum() {
        let pt = partial_transpose(&bell_pair()).unwrap();
        let spectrum = numerics::hermitian_eigenvalues(&pt, 1e-14).unwrap();
        // textbook spectrum {1/2, 1/2, 1/2, −1/2}
        assert!((spectrum.eigenvalues[0] + 0.5).abs() < 1e-14);
        for v in &spectrum.eigenvalues[1..] {
            assert!((v - 0.5).abs() < 1e-14);
        }
        let neg = log_negativity(&bell_pair()).unwrap();
        assert!((neg.value - 1.0).abs() < 1e-9, "Bell negativity {}", neg.value);
        assert!((neg.trace_norm - 2.0).abs() < 1e-12);
        assert!((neg.min_pt_eigenvalue + 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_states_have_zero_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..100 {
            // convex mixtures of random product states are separable
            let terms = rng.gen_range(1..4usize);
            let mut mat = ComplexMatrix::zeros(6, 6);
            let mut weights = Vec::new();
            for _ in 0..terms {
                weights.push(rng.gen_range(0.01..1.0));
            }
            let total: f64 = weights.iter().sum();
            for w in &weights {
                let sigma = random_density(&mut rng, HilbertLayout::reduced(vec![2]));
                let tau = random_density(&mut rng, HilbertLayout::reduced(vec![3]));
                let prod = kron(sigma.mat(), tau.mat()).unwrap();
                mat = &mat + &prod.scaled_re(w / total);
            }
            let rho = DensityMatrix::new(HilbertLayout::reduced(vec![2, 3]), mat).unwrap();
            let neg = log_negativity(&rho).unwrap();
            assert_eq!(neg.value, 0.0, "separable state scored {}", neg.value);
        }
    }

    #[test]
    fn triplet_vacuum_mixture_negativity() {
        // ½|ψ⁺⟩⟨ψ⁺| + ½|00⟩⟨00| has PT eigenvalues {¼, ¼, ¼ ± √2/4}:
        // trace norm 1 + (√½ − ½).
        let rho = mix(&bell_pair(), &vacuum_state(), 0.5);
        let neg = log_negativity(&rho).unwrap();
        let expected = (1.0 + (0.5f64.sqrt() - 0.5)).log2();
        assert!((neg.value - expected).abs() < 1e-12);
        assert!((neg.value - 0.27155).abs() < 1e-5);

        // such mixtures stay entangled for every mixing weight
        for i in 0..=10 {
            let p = if i == 0 { 0.01 } else { i as f64 / 10.0 };
            let neg = log_negativity(&mix(&bell_pair(), &vacuum_state(), p)).unwrap();
            assert!(neg.value > 0.0, "mixture p={p} scored zero");
        }
    }

    #[test]
    fn kappa0_state_negativity_is_pure_truncation_error() {
        // The untruncated κ=0 state is a thermal mode-c state and maps
        // through the beam splitter to an exactly separable two-mode state.
        // Its hard-truncated representation is *not* PPT: the geometric
        // tail removed at r = N leaves partial-transpose coherences without
        // their population partners (already at N = 1 the state is the
        // vacuum–triplet mixture, which is entangled). The spurious
        // negativity must shrink like (n_T/(1+n_T))^N and vanish in the
        // converged limit.
        let params = ModelParams { g_a: 1.0, g_b: 1.0, ..Default::default() };
        let artifact = |n_t: f64, cutoff: usize| -> f64 {
            let rho_eff = kappa0_stationary_state(n_t, cutoff);
            let rho_phys = effective_to_physical(&rho_eff, &params).unwrap();
            cavity_negativity_base(&rho_phys, 2.0).unwrap().value
        };
        let n6 = artifact(0.2, 6);
        let n9 = artifact(0.2, 9);
        let n12 = artifact(0.2, 12);
        assert!(n6 > 1e-6 && n6 < 1e-4, "cutoff-6 artifact {n6:.3e}");
        assert!(n9 < n6 / 10.0, "artifact not shrinking: {n6:.3e} -> {n9:.3e}");
        assert!(n12 <= 1e-9, "cutoff-12 artifact {n12:.3e} has not converged away");
        for n_t in [0.5, 1.0, 2.0] {
            assert!(artifact(n_t, 9) < artifact(n_t, 6));
        }
    }

    #[test]
    fn measurement_uncorrelated_atom() {
        // ρ = |1⟩⟨1| ⊗ τ with τ a (possibly entangled) two-mode state
        let tau = mix(&bell_pair(), &vacuum_state(), 0.7);
        let mut atom = ComplexMatrix::zeros(2, 2);
        atom[(0, 0)] = c(1.0);
        let joint = kron(&atom, tau.mat()).unwrap();
        let layout = HilbertLayout::physical(1);
        let rho = DensityMatrix::new(layout, joint).unwrap();
        let outcome = atom_measured_negativity(&rho).unwrap();
        let tau_neg = log_negativity(&tau).unwrap().value;
        assert!((outcome.probabilities[0] - 1.0).abs() < 1e-12);
        assert!((outcome.expected_negativity - tau_neg).abs() < 1e-12);
        assert!(outcome.conditional_states[1].is_none());
    }

    #[test]
    fn measurement_strictly_helps_on_classical_atom_mixture() {
        // ρ = ½|1⟩⟨1|⊗|ψ⁺⟩⟨ψ⁺| + ½|2⟩⟨2|⊗|00⟩⟨00|
        let mut atom1 = ComplexMatrix::zeros(2, 2);
        atom1[(0, 0)] = c(1.0);
        let mut atom2 = ComplexMatrix::zeros(2, 2);
        atom2[(1, 1)] = c(1.0);
        let mat = &kron(&atom1, bell_pair().mat()).unwrap().scaled_re(0.5)
            + &kron(&atom2, vacuum_state().mat()).unwrap().scaled_re(0.5);
        let rho = DensityMatrix::new(HilbertLayout::physical(1), mat).unwrap();

        let outcome = atom_measured_negativity(&rho).unwrap();
        assert!((outcome.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((outcome.probabilities[1] - 0.5).abs() < 1e-12);
        assert!((outcome.conditional_negativities[0] - 1.0).abs() < 1e-9);
        assert_eq!(outcome.conditional_negativities[1], 0.0);
        assert!((outcome.expected_negativity - 0.5).abs() < 1e-12);

        // tracing instead of measuring leaves the ½ψ⁺ + ½vac mixture
        let traced = cavity_negativity_base(&rho, 2.0).unwrap();
        assert!((traced.value - 0.27155).abs() < 1e-4);
        assert!(outcome.expected_negativity > traced.value);
    }

    #[test]
    fn physical_picture_required() {
        let eff = DensityMatrix::ground(HilbertLayout::effective(2));
        assert!(matches!(
            cavity_negativity_base(&eff, 2.0),
            Err(EntanglementError::NotPhysical(_))
        ));
        assert!(matches!(
            atom_measured_negativity(&eff),
            Err(EntanglementError::NotPhysical(_))
        ));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let rho = random_density(&mut rng, HilbertLayout::physical(2));
        let outcome = atom_measured_negativity(&rho).unwrap();
        assert!((outcome.probabilities[0] + outcome.probabilities[1] - 1.0).abs() < 1e-10);
        let expected = outcome.probabilities[0] * outcome.conditional_negativities[0]
            + outcome.probabilities[1] * outcome.conditional_negativities[1];
        assert_eq!(outcome.expected_negativity, expected);
    }
}
