//! Hilbert-space layouts, operators, and Liouvillian of the model.
//!
//! An atom with internal states |1⟩, |2⟩ couples to cavity modes a and b
//! with strengths g_a, g_b and to a broadband thermal field with rate Γ and
//! effective photon number n_T. In the interaction picture (resonant
//! cavities), the Hamiltonian is
//!
//!   H = g_a (σ⁺a + σ⁻a†) + g_b (σ⁺b + σ⁻b†),   σ⁺ = |2⟩⟨1|.
//!
//! The dissipator damps each cavity at rate κ_x and pumps/damps the atom at
//! rates n_TΓ and (n_T+1)Γ. For κ_a = κ_b the beam-splitter modes
//! c = (g_a a + g_b b)/g and d = (g_b a − g_a b)/g decouple the dynamics:
//! d is dark and purely damped (it stays in vacuum for vacuum initial
//! conditions), so the *effective* picture keeps only atom ⊗ c, with
//! H = g (cσ⁺ + c†σ⁻) and g = √(g_a² + g_b²). The effective-picture cutoff
//! bounds the total photon number across both physical modes.

use thiserror::Error;

use crate::numerics::{
    self, C64, ComplexMatrix, NumericsError, kron,
};

/// Max elementwise deviation from Hermiticity tolerated in a state.
pub const STATE_HERMITICITY_TOL: f64 = 1e-10;
/// Allowed |tr ρ − 1|.
pub const STATE_TRACE_TOL: f64 = 1e-8;
/// Eigenvalues above this (negative) floor count as nonnegative.
pub const STATE_POSITIVITY_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("operation requires the {expected:?} picture, got {found:?}")]
    WrongPicture { expected: Picture, found: Picture },
    #[error("state layout {found:?} does not match expected {expected:?}")]
    LayoutMismatch { expected: HilbertLayout, found: HilbertLayout },
    #[error("subsystem index {index} out of range for {count} subsystems")]
    InvalidSubsystem { index: usize, count: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("effective picture requires kappa_a = kappa_b, got {kappa_a} and {kappa_b}")]
    UnequalDecayRates { kappa_a: f64, kappa_b: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which factorization of the Hilbert space a layout describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// atom ⊗ mode a ⊗ mode b, per-mode photon cutoff.
    Physical,
    /// atom ⊗ mode c, cutoff on total photon number (mode d dropped).
    Effective,
    /// Leftover subsystems after a partial trace or measurement.
    Reduced,
}

/// Ordered subsystem dimensions plus the picture tag.
///
/// Index flattening is row-major with the atom slowest: basis index
/// `= Σ_k idx_k · stride_k` with strides taken right-to-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    picture: Picture,
    dims: Vec<usize>,
    cutoff: usize,
}

impl HilbertLayout {
    /// atom ⊗ a ⊗ b with per-mode Fock cutoff `n` (dims `[2, n+1, n+1]`).
    pub fn physical(cutoff: usize) -> Self {
        assert!(cutoff >= 1, "cutoff must be at least 1");
        Self { picture: Picture::Physical, dims: vec![2, cutoff + 1, cutoff + 1], cutoff }
    }

    /// atom ⊗ c with total-photon cutoff `n` (dims `[2, n+1]`).
    pub fn effective(cutoff: usize) -> Self {
        assert!(cutoff >= 1, "cutoff must be at least 1");
        Self { picture: Picture::Effective, dims: vec![2, cutoff + 1], cutoff }
    }

    /// Layout for a reduced state with explicit subsystem dimensions.
    pub fn reduced(dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1));
        let cutoff = dims.iter().copied().max().unwrap_or(1) - 1;
        Self { picture: Picture::Reduced, dims, cutoff }
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn subsystem_count(&self) -> usize {
        self.dims.len()
    }

    /// Flattened Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn stride(&self, subsystem: usize) -> usize {
        self.dims[subsystem + 1..].iter().product()
    }

    /// Flatten a multi-index (one entry per subsystem).
    pub fn flatten(&self, indices: &[usize]) -> usize {
        assert_eq!(indices.len(), self.dims.len());
        indices
            .iter()
            .zip(&self.dims)
            .enumerate()
            .map(|(k, (&i, &d))| {
                assert!(i < d, "subsystem index out of range");
                i * self.stride(k)
            })
            .sum()
    }

    fn expect_picture(&self, expected: Picture) -> Result<(), ModelError> {
        if self.picture == expected {
            Ok(())
        } else {
            Err(ModelError::WrongPicture { expected, found: self.picture })
        }
    }
}

/// Physical constants of the model, in rate units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Atom–cavity couplings.
    pub g_a: f64,
    pub g_b: f64,
    /// Cavity field decay rates.
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Atom–environment coupling Γ.
    pub gamma: f64,
    /// Effective thermal photon number n_T of the driving field.
    pub n_t: f64,
    /// Fock cutoff N.
    pub cutoff: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { g_a: 1.0, g_b: 1.0, kappa_a: 2.0, kappa_b: 2.0, gamma: 0.2, n_t: 1.0, cutoff: 3 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("gamma", self.gamma),
            ("n_t", self.n_t),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::InvalidParams(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.g_a == 0.0 && self.g_b == 0.0 {
            return Err(ModelError::InvalidParams("g_a² + g_b² must be positive".into()));
        }
        if self.cutoff < 1 {
            return Err(ModelError::InvalidParams("cutoff must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective coupling g = √(g_a² + g_b²).
    pub fn g(&self) -> f64 {
        self.g_a.hypot(self.g_b)
    }

    /// Common decay rate κ; the effective picture exists only for
    /// κ_a = κ_b.
    pub fn effective_kappa(&self) -> Result<f64, ModelError> {
        if self.kappa_a == self.kappa_b {
            Ok(self.kappa_a)
        } else {
            Err(ModelError::UnequalDecayRates { kappa_a: self.kappa_a, kappa_b: self.kappa_b })
        }
    }

    /// Integrator step keeping trace drift well below tolerance at the
    /// fastest rate in the problem.
    pub fn default_dt(&self) -> f64 {
        let fastest = self
            .g()
            .max(self.kappa_a)
            .max(self.kappa_b)
            .max(self.gamma * (self.n_t + 1.0));
        0.01 / fastest
    }

    pub fn with_n_t(mut self, n_t: f64) -> Self {
        self.n_t = n_t;
        self
    }

    /// Set κ_a = κ_b = κ.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_a = kappa;
        self.kappa_b = kappa;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }
}

/// Hermitian, unit-trace, positive matrix over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(layout: HilbertLayout, mat: ComplexMatrix) -> Result<Self, ModelError> {
        if mat.rows() != layout.dim() || mat.cols() != layout.dim() {
            return Err(ModelError::InvalidState(format!(
                "matrix is {}x{} but layout dimension is {}",
                mat.rows(),
                mat.cols(),
                layout.dim()
            )));
        }
        Ok(Self { layout, mat })
    }

    /// Pure basis state |idx⟩⟨idx| given one index per subsystem.
    pub fn basis_state(layout: HilbertLayout, indices: &[usize]) -> Self {
        let flat = layout.flatten(indices);
        let mut mat = ComplexMatrix::zeros(layout.dim(), layout.dim());
        mat[(flat, flat)] = C64::new(1.0, 0.0);
        Self { layout, mat }
    }

    /// Atom in |1⟩, every mode in vacuum.
    pub fn ground(layout: HilbertLayout) -> Self {
        let indices = vec![0; layout.subsystem_count()];
        Self::basis_state(layout, &indices)
    }

    /// |ψ⟩⟨ψ| from amplitudes over the flattened basis (renormalized).
    pub fn from_pure(layout: HilbertLayout, amplitudes: &[C64]) -> Self {
        assert_eq!(amplitudes.len(), layout.dim());
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        assert!(norm_sq > 0.0, "zero state vector");
        let d = layout.dim();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / norm_sq
        });
        Self { layout, mat }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Diagonal populations over the flattened basis.
    pub fn populations(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }

    /// Marginal occupation distribution of one subsystem.
    pub fn mode_populations(&self, subsystem: usize) -> Vec<f64> {
        let dims = self.layout.dims();
        let d = self.layout.dim();
        let stride = self.layout.stride(subsystem);
        let size = dims[subsystem];
        let mut out = vec![0.0; size];
        for flat in 0..d {
            let idx = (flat / stride) % size;
            out[idx] += self.mat[(flat, flat)].re;
        }
        out
    }

    /// Verify the density-matrix invariants: Hermiticity, unit trace,
    /// positivity (up to numerical floors).
    pub fn check_physicality(&self) -> Result<(), ModelError> {
        let herm = self.mat.hermiticity_error();
        if herm > STATE_HERMITICITY_TOL {
            return Err(ModelError::InvalidState(format!("Hermiticity deviation {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(ModelError::InvalidState(format!("trace {tr} not 1")));
        }
        let spectrum =
            numerics::hermitian_eigenvalues(&self.mat.hermitize(), numerics::DEFAULT_JACOBI_TOL)?;
        let min = spectrum.min_eigenvalue();
        if min < STATE_POSITIVITY_FLOOR {
            return Err(ModelError::InvalidState(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Replace the matrix by its Hermitian part and renormalize the trace.
    pub fn hermitized_normalized(&self) -> Self {
        let h = self.mat.hermitize();
        let tr = h.trace().re;
        Self { layout: self.layout.clone(), mat: h.scaled_re(1.0 / tr) }
    }
}

/// Truncated single-mode annihilation operator, ⟨n−1|op|n⟩ = √n.
fn annihilation(dim: usize) -> ComplexMatrix {
    let mut op = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        op[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    op
}

/// Atom lowering operator σ⁻ = |1⟩⟨2| in the (|1⟩, |2⟩) basis.
fn atom_sigma_minus() -> ComplexMatrix {
    let mut op = ComplexMatrix::zeros(2, 2);
    op[(0, 1)] = C64::new(1.0, 0.0);
    op
}

/// Embed a single-subsystem operator via identity Kronecker factors.
fn embed(layout: &HilbertLayout, subsystem: usize, op: &ComplexMatrix) -> Result<ComplexMatrix, ModelError> {
    let dims = layout.dims();
    if subsystem >= dims.len() {
        return Err(ModelError::InvalidSubsystem { index: subsystem, count: dims.len() });
    }
    debug_assert_eq!(op.rows(), dims[subsystem]);
    let before: usize = dims[..subsystem].iter().product();
    let after: usize = dims[subsystem + 1..].iter().product();
    let left = kron(&ComplexMatrix::identity(before), op)?;
    Ok(kron(&left, &ComplexMatrix::identity(after))?)
}

/// Lowering operator of one subsystem, embedded on the full space: the
/// truncated annihilation operator for a mode, σ⁻ = |1⟩⟨2| for the atom.
pub fn lowering_operator(layout: &HilbertLayout, subsystem: usize) -> Result<ComplexMatrix, ModelError> {
    let dims = layout.dims();
    if subsystem >= dims.len() {
        return Err(ModelError::InvalidSubsystem { index: subsystem, count: dims.len() });
    }
    let local = if subsystem == 0 && matches!(layout.picture(), Picture::Physical | Picture::Effective)
    {
        atom_sigma_minus()
    } else {
        annihilation(dims[subsystem])
    };
    embed(layout, subsystem, &local)
}

/// Interaction-picture Hamiltonian in the physical picture:
/// H = g_a (σ⁺a + σ⁻a†) + g_b (σ⁺b + σ⁻b†).
pub fn hamiltonian_physical(
    params: &ModelParams,
    layout: &HilbertLayout,
) -> Result<ComplexMatrix, ModelError> {
    layout.expect_picture(Picture::Physical)?;
    let sigma_plus = lowering_operator(layout, 0)?.dagger();
    let a = lowering_operator(layout, 1)?;
    let b = lowering_operator(layout, 2)?;
    let term_a = sigma_plus.matmul(&a).scaled_re(params.g_a);
    let term_b = sigma_plus.matmul(&b).scaled_re(params.g_b);
    let upper = &term_a + &term_b;
    Ok(&upper + &upper.dagger())
}

/// Effective-picture Hamiltonian H = g (cσ⁺ + c†σ⁻), g = √(g_a² + g_b²).
pub fn hamiltonian_effective(
    params: &ModelParams,
    layout: &HilbertLayout,
) -> Result<ComplexMatrix, ModelError> {
    layout.expect_picture(Picture::Effective)?;
    let sigma_plus = lowering_operator(layout, 0)?.dagger();
    let c = lowering_operator(layout, 1)?;
    let upper = sigma_plus.matmul(&c).scaled_re(params.g());
    Ok(&upper + &upper.dagger())
}

/// Hamiltonian appropriate to the layout's picture.
pub fn hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<ComplexMatrix, ModelError> {
    match layout.picture() {
        Picture::Physical => hamiltonian_physical(params, layout),
        Picture::Effective => hamiltonian_effective(params, layout),
        Picture::Reduced => Err(ModelError::WrongPicture {
            expected: Picture::Physical,
            found: Picture::Reduced,
        }),
    }
}

/// Jump operators with their rates, in the convention where each term
/// contributes −rate·(X†Xρ + ρX†X − 2XρX†) to the Liouvillian.
pub(crate) fn jump_terms(
    params: &ModelParams,
    layout: &HilbertLayout,
) -> Result<Vec<(ComplexMatrix, f64)>, ModelError> {
    let sigma_minus = lowering_operator(layout, 0)?;
    let sigma_plus = sigma_minus.dagger();
    let mut terms = Vec::new();
    match layout.picture() {
        Picture::Physical => {
            terms.push((lowering_operator(layout, 1)?, params.kappa_a));
            terms.push((lowering_operator(layout, 2)?, params.kappa_b));
        }
        Picture::Effective => {
            terms.push((lowering_operator(layout, 1)?, params.effective_kappa()?));
        }
        Picture::Reduced => {
            return Err(ModelError::WrongPicture {
                expected: Picture::Effective,
                found: Picture::Reduced,
            })
        }
    }
    terms.push((sigma_minus, (params.n_t + 1.0) * params.gamma));
    terms.push((sigma_plus, params.n_t * params.gamma));
    terms.retain(|(_, rate)| *rate > 0.0);
    Ok(terms)
}

/// Right-hand side of the master equation: −i[H,ρ] + L(ρ).
///
/// Output is traceless and Hermitian (up to rounding).
pub fn liouvillian_apply(
    params: &ModelParams,
    layout: &HilbertLayout,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix, ModelError> {
    if rho.layout() != layout {
        return Err(ModelError::LayoutMismatch {
            expected: layout.clone(),
            found: rho.layout().clone(),
        });
    }
    let h = hamiltonian(params, layout)?;
    let m = rho.mat();
    let comm = &h.matmul(m) - &m.matmul(&h);
    let mut out = comm.scaled(C64::new(0.0, -1.0));
    for (x, rate) in jump_terms(params, layout)? {
        let xdag = x.dagger();
        let n_op = xdag.matmul(&x);
        let anti = &n_op.matmul(m) + &m.matmul(&n_op);
        let sandwich = x.matmul(m).matmul(&xdag);
        let diss = &anti - &sandwich.scaled_re(2.0);
        out = &out - &diss.scaled_re(rate);
    }
    Ok(out)
}

/// Weight of |i⟩⟨i| ⊗ |r⟩⟨r| in the untruncated κ=0 stationary state:
/// (n_T/(1+n_T))^{r+i-1} / (2n_T+1), with the atom index i ∈ {1, 2}.
fn kappa0_weight(n_t: f64, atom_index: usize, r: usize) -> f64 {
    debug_assert!(atom_index == 1 || atom_index == 2);
    let q = n_t / (1.0 + n_t);
    q.powi((r + atom_index - 1) as i32) / (2.0 * n_t + 1.0)
}

/// Closed-form stationary state of the effective picture at κ = 0,
/// truncated at the cutoff and renormalized to unit trace. Diagonal.
pub fn kappa0_stationary_state(n_t: f64, cutoff: usize) -> DensityMatrix {
    assert!(n_t >= 0.0, "n_t must be nonnegative");
    let layout = HilbertLayout::effective(cutoff);
    let d = layout.dim();
    let mut mat = ComplexMatrix::zeros(d, d);
    let mut total = 0.0;
    for i in 0..2usize {
        for r in 0..=cutoff {
            let w = kappa0_weight(n_t, i + 1, r);
            let flat = layout.flatten(&[i, r]);
            mat[(flat, flat)] = C64::new(w, 0.0);
            total += w;
        }
    }
    let mat = mat.scaled_re(1.0 / total);
    DensityMatrix { layout, mat }
}

/// Isometry mapping effective-picture basis states |i⟩|r⟩_c into the
/// two-mode picture with mode d in vacuum:
/// |r⟩_c ↦ Σ_k √(binom(r,k)) (g_a/g)^k (g_b/g)^{r−k} |k⟩_a |r−k⟩_b.
pub fn mode_transform_isometry(params: &ModelParams, cutoff: usize) -> ComplexMatrix {
    let eff = HilbertLayout::effective(cutoff);
    let phys = HilbertLayout::physical(cutoff);
    let (ca, cb) = (params.g_a / params.g(), params.g_b / params.g());
    let mut v = ComplexMatrix::zeros(phys.dim(), eff.dim());
    for i in 0..2usize {
        for r in 0..=cutoff {
            let col = eff.flatten(&[i, r]);
            for k in 0..=r {
                let amp = binomial_f(r, k).sqrt() * ca.powi(k as i32) * cb.powi((r - k) as i32);
                let row = phys.flatten(&[i, k, r - k]);
                v[(row, col)] = C64::new(amp, 0.0);
            }
        }
    }
    v
}

/// Map an effective-picture state to the physical two-mode picture
/// (mode d assumed vacuum). Support lands on total photon number ≤ cutoff;
/// the trace is preserved.
pub fn effective_to_physical(
    rho_eff: &DensityMatrix,
    params: &ModelParams,
) -> Result<DensityMatrix, ModelError> {
    rho_eff.layout().expect_picture(Picture::Effective)?;
    let cutoff = rho_eff.layout().cutoff();
    let v = mode_transform_isometry(params, cutoff);
    let mat = v.matmul(rho_eff.mat()).matmul(&v.dagger());
    DensityMatrix::new(HilbertLayout::physical(cutoff), mat)
}

fn binomial_f(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
