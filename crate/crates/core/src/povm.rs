//! Measurements: positive-operator families and their validators,
//! projector-valued spectra in the sum-free style, projective
//! measurements as doubled maps, and the X-indexed machinery
//! (X-scalars, X-inverses, blockwise polar decomposition) that drives
//! the dilation proofs.

use crate::cpm::DoubledMap;
use crate::matrix::{ComplexMatrix, MatrixError};
use crate::model::{cup_matrix, delta_matrix, epsilon_matrix, swap_matrix};
use crate::spectral::{self, SpectralError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PovmError {
    #[error("POVM is not complete: ‖ΣF − 1‖ = {0:.3e}")]
    NotComplete(f64),
    #[error("element {0} is not positive semidefinite (min eigenvalue {1:.3e})")]
    NotPositive(usize, f64),
    #[error("X-scalar component {0} is not invertible (modulus {1:.3e})")]
    NotInvertible(usize, f64),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Cpm(#[from] crate::cpm::CpmError),
}

pub type PovmResult<T> = Result<T, PovmError>;

/// Outcome-indexed family of positive operators on a `dim`-dimensional
/// space. `complete` asserts `Σ F_i = 1`; otherwise only `Σ F_i ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub dim: usize,
    pub outcomes: usize,
    pub complete: bool,
    pub elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>, complete: bool) -> PovmResult<Self> {
        let dim = elements
            .first()
            .map(ComplexMatrix::rows)
            .ok_or_else(|| MatrixError::ShapeMismatch("POVM with no elements".into()))?;
        for f in &elements {
            if f.rows() != dim || f.cols() != dim {
                return Err(MatrixError::ShapeMismatch(format!(
                    "element {}x{} in a dim-{} POVM",
                    f.rows(),
                    f.cols(),
                    dim
                ))
                .into());
            }
        }
        Ok(Povm {
            dim,
            outcomes: elements.len(),
            complete,
            elements,
        })
    }

    /// Sum of the elements.
    pub fn element_sum(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for f in &self.elements {
            acc = acc.add(f).expect("uniform shapes");
        }
        acc
    }

    /// The canonical stack `f = Σ_i |i⟩ ⊗ g_i` with `g_i = √F_i`, the
    /// deterministic positive Kraus choice.
    pub fn canonical_stack(&self, tol: f64) -> PovmResult<ComplexMatrix> {
        let roots: Vec<ComplexMatrix> = self
            .elements
            .iter()
            .map(|f| spectral::hermitian_sqrt(f, tol))
            .collect::<Result<_, _>>()?;
        Ok(stack_blocks(&roots))
    }
}

/// Complete an incomplete POVM by appending the leftover outcome
/// `F_extra = 1 − Σ F_i`; errors when the leftover is not PSD (the
/// family already overshoots the identity).
pub fn pad_incomplete(p: &Povm, tol: f64) -> PovmResult<Povm> {
    let gap = ComplexMatrix::identity(p.dim).sub(&p.element_sum())?;
    if gap.max_norm() <= tol {
        return Povm::new(p.elements.clone(), true);
    }
    let lo = spectral::min_eigenvalue(&gap)?;
    if lo < -tol {
        return Err(PovmError::NotPositive(p.outcomes, lo));
    }
    let mut elements = p.elements.clone();
    elements.push(gap);
    Povm::new(elements, true)
}

/// Stack `d×d` blocks into the `n·d × d` matrix `Σ_i |i⟩ ⊗ B_i`.
pub fn stack_blocks(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n = blocks.len();
    let d = blocks[0].rows();
    ComplexMatrix::from_fn(n * d, d, |row, col| blocks[row / d].get(row % d, col))
}

/// Block `i` of a stacked morphism, `(⟨i| ⊗ 1) ∘ f`.
pub fn stack_block(stack: &ComplexMatrix, n: usize, i: usize) -> ComplexMatrix {
    let d = stack.rows() / n;
    ComplexMatrix::from_fn(d, stack.cols(), |r, c| stack.get(i * d + r, c))
}

/// Validation report for a POVM.
#[derive(Clone, Debug, Serialize)]
pub struct PovmReport {
    pub tol: f64,
    /// Minimum eigenvalue of each element; negative beyond tol fails.
    pub element_min_eigenvalues: Vec<f64>,
    /// ‖Σ F_i − 1‖ when complete, else the PSD defect of 1 − Σ F_i.
    pub completeness_residual: f64,
    pub complete: bool,
    pub pass: bool,
}

/// Check element positivity and the (in)completeness condition.
pub fn validate_povm(p: &Povm, tol: f64) -> PovmResult<PovmReport> {
    let mut element_min_eigenvalues = Vec::with_capacity(p.outcomes);
    let mut pass = true;
    for f in &p.elements {
        let herm = spectral::hermiticity_residual(f);
        let lo = spectral::min_eigenvalue(f)?;
        element_min_eigenvalues.push(lo);
        if herm > tol || lo < -tol {
            pass = false;
        }
    }
    let sum = p.element_sum();
    let completeness_residual = if p.complete {
        sum.max_diff(&ComplexMatrix::identity(p.dim))
    } else {
        // Σ F_i ≼ 1: report the PSD defect of the complement.
        let gap = ComplexMatrix::identity(p.dim).sub(&sum)?;
        (-spectral::min_eigenvalue(&gap)?).max(0.0)
    };
    if completeness_residual > tol {
        pass = false;
    }
    Ok(PovmReport {
        tol,
        element_min_eigenvalues,
        completeness_residual,
        complete: p.complete,
        pass,
    })
}

/// Outcome distribution `Σ_i Tr(F_i ρ) |i⟩⟨i|` as a diagonal matrix.
pub fn povm_apply(p: &Povm, rho: &ComplexMatrix, tol: f64) -> PovmResult<ComplexMatrix> {
    check_density(rho, p.dim, tol)?;
    let mut out = ComplexMatrix::zeros(p.outcomes, p.outcomes);
    for (i, f) in p.elements.iter().enumerate() {
        let prob = f.matmul(rho)?.trace()?;
        if prob.re < -tol {
            return Err(PovmError::NotPositive(i, prob.re));
        }
        out.set(i, i, prob);
    }
    Ok(out)
}

pub fn check_density(rho: &ComplexMatrix, dim: usize, tol: f64) -> PovmResult<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(PovmError::NotDensityMatrix(format!(
            "shape {}x{}, expected {dim}x{dim}",
            rho.rows(),
            rho.cols()
        )));
    }
    if spectral::hermiticity_residual(rho) > tol {
        return Err(PovmError::NotDensityMatrix("not Hermitian".into()));
    }
    let lo = spectral::min_eigenvalue(rho)?;
    if lo < -tol {
        return Err(PovmError::NotDensityMatrix(format!(
            "min eigenvalue {lo:.3e}"
        )));
    }
    let tr = rho.trace()?;
    if (tr - Complex64::new(1.0, 0.0)).norm() > tol.max(1e-9) {
        return Err(PovmError::NotDensityMatrix(format!("trace {tr}")));
    }
    Ok(())
}

/// A morphism `A → X ⊗ A` stored as the `n·d × d` stack of its
/// outcome blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub mat: ComplexMatrix,
    pub outcomes: usize,
    pub dim: usize,
}

impl Spectrum {
    pub fn new(mat: ComplexMatrix, outcomes: usize) -> PovmResult<Self> {
        if outcomes == 0 || !mat.rows().is_multiple_of(outcomes) {
            return Err(MatrixError::ShapeMismatch(format!(
                "{} rows do not split into {} blocks",
                mat.rows(),
                outcomes
            ))
            .into());
        }
        let dim = mat.rows() / outcomes;
        if mat.cols() != dim {
            return Err(MatrixError::ShapeMismatch(format!(
                "spectrum blocks {}x{} are not square",
                dim,
                mat.cols()
            ))
            .into());
        }
        Ok(Spectrum { mat, outcomes, dim })
    }

    pub fn block(&self, i: usize) -> ComplexMatrix {
        stack_block(&self.mat, self.outcomes, i)
    }
}

/// Stack a projector family into a spectrum `Σ_i |i⟩ ⊗ P_i`.
pub fn spectrum_from_projectors(projs: &[ComplexMatrix]) -> PovmResult<Spectrum> {
    if projs.is_empty() {
        return Err(MatrixError::ShapeMismatch("empty projector family".into()).into());
    }
    Spectrum::new(stack_blocks(projs), projs.len())
}

/// Per-axiom residuals for a spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub tol: f64,
    /// (ε ⊗ 1)∘P = 1
    pub completeness: f64,
    /// (δ ⊗ 1)∘P = (1 ⊗ P)∘P
    pub idempotence: f64,
    /// P = (1 ⊗ P†)∘(η ⊗ 1)
    pub self_adjointness: f64,
    /// P†∘P = 1, derived for X-complete spectra
    pub isometry: f64,
    pub complete: bool,
    pub idempotent: bool,
    pub self_adjoint: bool,
    pub isometric: bool,
}

impl SpectrumReport {
    /// The axioms a projector-valued spectrum must satisfy;
    /// completeness is reported separately since it may be relaxed.
    pub fn valid(&self) -> bool {
        self.idempotent && self.self_adjoint
    }

    pub fn all_pass(&self) -> bool {
        self.valid() && self.complete && self.isometric
    }
}

/// Check the defining identities of a projector-valued spectrum as
/// matrix identities within `tol`.
pub fn check_spectrum(p: &Spectrum, tol: f64) -> SpectrumReport {
    let (n, d) = (p.outcomes, p.dim);
    let id_d = ComplexMatrix::identity(d);
    let id_n = ComplexMatrix::identity(n);
    let eps = epsilon_matrix(n);
    let delta = delta_matrix(n);
    let cup = cup_matrix(n);

    let completeness = eps.kron(&id_d).matmul(&p.mat).unwrap().max_diff(&id_d);
    let lhs = delta.kron(&id_d).matmul(&p.mat).unwrap();
    let rhs = id_n.kron(&p.mat).matmul(&p.mat).unwrap();
    let idempotence = lhs.max_diff(&rhs);
    let self_adj_rhs = id_n
        .kron(&p.mat.adjoint())
        .matmul(&cup.kron(&id_d))
        .unwrap();
    let self_adjointness = p.mat.max_diff(&self_adj_rhs);
    let isometry = p.mat.adjoint().matmul(&p.mat).unwrap().max_diff(&id_d);

    SpectrumReport {
        tol,
        completeness,
        idempotence,
        self_adjointness,
        isometry,
        complete: completeness <= tol,
        idempotent: idempotence <= tol,
        self_adjoint: self_adjointness <= tol,
        isometric: isometry <= tol,
    }
}

/// The measurement channel of a stacked morphism `f : A → X ⊗ A`: the
/// doubled map `(1 ⊗ Decohere ⊗ 1)∘(f ⊗ f̄)` with the collapsed system
/// traced out, of type `A → X` in the doubled category.
///
/// Built blockwise (row `(i,i)` carries `Tr(f̂_i† f̂_i ·)`), which is
/// the same matrix as the literal composite; `measurement_channel_composite`
/// keeps the two routes comparable.
pub fn measurement_channel(stack: &ComplexMatrix, outcomes: usize) -> PovmResult<DoubledMap> {
    let n = outcomes;
    if n == 0 || !stack.rows().is_multiple_of(n) {
        return Err(MatrixError::ShapeMismatch("stack does not split into blocks".into()).into());
    }
    let d = stack.cols();
    let mut mat = ComplexMatrix::zeros(n * n, d * d);
    for i in 0..n {
        let block = stack_block(stack, n, i);
        let gram = block.adjoint().matmul(&block)?;
        for k in 0..d {
            for l in 0..d {
                mat.set(i * n + i, k * d + l, gram.get(l, k));
            }
        }
    }
    Ok(DoubledMap::new(mat, d, n)?)
}

/// The literal composite `(Decohere ⊗ η†)∘(1 ⊗ σ ⊗ 1)∘(f ⊗ f̄)`.
/// Materialises the full Kronecker product, so only usable at small
/// dimensions; exists as the second route for equality tests.
pub fn measurement_channel_composite(
    stack: &ComplexMatrix,
    outcomes: usize,
) -> PovmResult<DoubledMap> {
    let n = outcomes;
    let d = stack.cols();
    let doubled = stack.kron(&stack.conj());
    // (i,a,j,b) → (i,j,a,b)
    let perm = ComplexMatrix::identity(n)
        .kron(&swap_matrix(d, n))
        .kron(&ComplexMatrix::identity(d));
    let collapse = crate::cpm::decohere(n).kron(&cup_matrix(d).adjoint());
    let mat = collapse.matmul(&perm.matmul(&doubled)?)?;
    Ok(DoubledMap::new(mat, d, n)?)
}

/// A projective measurement: the measurement channel of a validated
/// spectrum.
pub fn projective_measurement(p: &Spectrum, tol: f64) -> PovmResult<DoubledMap> {
    let report = check_spectrum(p, tol);
    if !report.valid() {
        return Err(PovmError::InvalidSpectrum(format!(
            "idempotence residual {:.3e}, self-adjointness residual {:.3e}",
            report.idempotence, report.self_adjointness
        )));
    }
    measurement_channel(&p.mat, p.outcomes)
}

/// An X-scalar: a morphism `I → X`, concretely an outcome-indexed
/// tuple of complex numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XScalar {
    pub values: Vec<Complex64>,
}

impl XScalar {
    pub fn ones(n: usize) -> Self {
        XScalar {
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }
}

/// The blockwise trace `Tr^A(f)` of a stacked morphism: an X-scalar.
pub fn x_scalar_trace(stack: &ComplexMatrix, outcomes: usize) -> PovmResult<XScalar> {
    let values = (0..outcomes)
        .map(|i| {
            stack_block(stack, outcomes, i)
                .trace()
                .map_err(PovmError::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(XScalar { values })
}

/// Componentwise inverse; rejects components with modulus ≤ `tol`.
pub fn x_scalar_inverse(s: &XScalar, tol: f64) -> PovmResult<XScalar> {
    let mut values = Vec::with_capacity(s.values.len());
    for (i, v) in s.values.iter().enumerate() {
        if v.norm() <= tol {
            return Err(PovmError::NotInvertible(i, v.norm()));
        }
        values.push(Complex64::new(1.0, 0.0) / v);
    }
    Ok(XScalar { values })
}

/// The inverse law `δ†∘(s ⊗ t)∘λ_I = ε†`: componentwise products all
/// equal one.
pub fn x_inverse_check(s: &XScalar, t: &XScalar, tol: f64) -> bool {
    s.values.len() == t.values.len()
        && s.values
            .iter()
            .zip(t.values.iter())
            .all(|(a, b)| (a * b - Complex64::new(1.0, 0.0)).norm() <= tol)
}

/// Blockwise polar decomposition of a stacked morphism
/// `f : A → X ⊗ A`: per outcome `f̂_i = U_i H_i` with `H_i` PSD and
/// `U_i` unitary (completed deterministically on null spaces).
#[derive(Clone, Debug)]
pub struct XPolar {
    /// Unitary parts; block-diagonally assembled they form the
    /// X-isometry.
    pub isometries: Vec<ComplexMatrix>,
    /// PSD parts; stacked they form the X-positive factor.
    pub positives: Vec<ComplexMatrix>,
    pub rank_deficient: bool,
}

impl XPolar {
    /// The X-positive morphism `g = Σ_i |i⟩ ⊗ H_i`.
    pub fn positive_stack(&self) -> ComplexMatrix {
        stack_blocks(&self.positives)
    }

    /// `V_δ = Σ_i |i⟩⟨i| ⊗ U_i`, the block-diagonal isometry.
    pub fn isometry_blockdiag(&self) -> ComplexMatrix {
        let n = self.isometries.len();
        let d = self.isometries[0].rows();
        ComplexMatrix::from_fn(n * d, n * d, |r, c| {
            if r / d == c / d {
                self.isometries[r / d].get(r % d, c % d)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

pub fn x_polar_decompose(stack: &ComplexMatrix, outcomes: usize, tol: f64) -> PovmResult<XPolar> {
    let mut isometries = Vec::with_capacity(outcomes);
    let mut positives = Vec::with_capacity(outcomes);
    let mut rank_deficient = false;
    for i in 0..outcomes {
        let block = stack_block(stack, outcomes, i);
        let polar = spectral::polar_decompose_completed(&block, tol)?;
        rank_deficient |= polar.rank_deficient;
        isometries.push(polar.isometry);
        positives.push(polar.positive);
    }
    Ok(XPolar {
        isometries,
        positives,
        rank_deficient,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cpm::{density_of, mixed_state};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_pvm() -> Povm {
        Povm::new(
            vec![
                ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
                ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]),
            ],
            true,
        )
        .unwrap()
    }

    pub(crate) fn trine_povm() -> Povm {
        let mut elements = Vec::new();
        for k in 0..3 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let (cos, sin) = (theta.cos(), theta.sin());
            let scale = 2.0 / 3.0;
            elements.push(ComplexMatrix::from_real(&[
                &[scale * cos * cos, scale * cos * sin],
                &[scale * sin * cos, scale * sin * sin],
            ]));
        }
        Povm::new(elements, true).unwrap()
    }

    #[test]
    fn basis_pvm_validates_exactly() {
        let report = validate_povm(&basis_pvm(), 1e-10).unwrap();
        assert!(report.pass);
        assert_eq!(report.completeness_residual, 0.0);
        assert!(report.element_min_eigenvalues.iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn trine_povm_validates() {
        let report = validate_povm(&trine_povm(), 1e-10).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn double_identity_fails_completeness() {
        let p = Povm::new(
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            true,
        )
        .unwrap();
        let report = validate_povm(&p, 1e-10).unwrap();
        assert!(!report.pass);
        assert!((report.completeness_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn padding_completes_a_deficient_family() {
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let p = Povm::new(vec![half.clone()], false).unwrap();
        let padded = pad_incomplete(&p, 1e-10).unwrap();
        assert_eq!(padded.outcomes, 2);
        assert!(padded.complete);
        assert!(padded.elements[1].approx_eq(&half, 1e-12));
        assert!(validate_povm(&padded, 1e-10).unwrap().pass);
        // overshooting families cannot be padded
        let big = ComplexMatrix::identity(2).scale(c(1.5, 0.0));
        let p = Povm::new(vec![big], false).unwrap();
        assert!(matches!(
            pad_incomplete(&p, 1e-10),
            Err(PovmError::NotPositive(_, _))
        ));
        // an already complete family just flips the flag
        let full = Povm::new(vec![ComplexMatrix::identity(2)], false).unwrap();
        let same = pad_incomplete(&full, 1e-10).unwrap();
        assert_eq!(same.outcomes, 1);
        assert!(same.complete);
    }

    #[test]
    fn incomplete_povm_respects_relaxation() {
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let p = Povm::new(vec![half], false).unwrap();
        assert!(validate_povm(&p, 1e-10).unwrap().pass);
        let too_big = ComplexMatrix::identity(2).scale(c(1.5, 0.0));
        let p = Povm::new(vec![too_big], false).unwrap();
        assert!(!validate_povm(&p, 1e-10).unwrap().pass);
    }

    #[test]
    fn trine_on_maximally_mixed_is_uniform() {
        let rho = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let dist = povm_apply(&trine_povm(), &rho, 1e-10).unwrap();
        for i in 0..3 {
            assert!((dist.get(i, i) - c(1.0 / 3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_identity_outcome_is_certain() {
        let p = Povm::new(vec![ComplexMatrix::identity(3)], true).unwrap();
        let rho = ComplexMatrix::identity(3).scale(c(1.0 / 3.0, 0.0));
        let dist = povm_apply(&p, &rho, 1e-10).unwrap();
        assert!((dist.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn povm_apply_rejects_non_density() {
        let not_normalized = ComplexMatrix::identity(2);
        assert!(matches!(
            povm_apply(&basis_pvm(), &not_normalized, 1e-10),
            Err(PovmError::NotDensityMatrix(_))
        ));
    }

    #[test]
    fn basis_spectrum_passes_all_axioms() {
        let p = spectrum_from_projectors(&basis_pvm().elements).unwrap();
        let report = check_spectrum(&p, 1e-10);
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn rotated_basis_spectrum_passes() {
        let plus = ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let minus = ComplexMatrix::from_real(&[&[0.5, -0.5], &[-0.5, 0.5]]);
        let p = spectrum_from_projectors(&[plus, minus]).unwrap();
        let report = check_spectrum(&p, 1e-10);
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn repeated_projector_fails_idempotence() {
        let p0 = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p = spectrum_from_projectors(&[p0.clone(), p0]).unwrap();
        let report = check_spectrum(&p, 1e-10);
        assert!(!report.idempotent);
        assert!(!report.complete);
    }

    #[test]
    fn projective_measurement_on_plus_state() {
        let spec = spectrum_from_projectors(&basis_pvm().elements).unwrap();
        let channel = projective_measurement(&spec, 1e-10).unwrap();
        let plus = ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let out = channel.apply_density(&plus).unwrap();
        assert!((out.get(0, 0) - c(0.5, 0.0)).norm() < 1e-12);
        assert!((out.get(1, 1) - c(0.5, 0.0)).norm() < 1e-12);
        assert!(out.get(0, 1).norm() < 1e-14, "off-diagonals vanish");
    }

    #[test]
    fn eigenstate_gives_certain_outcome() {
        let spec = spectrum_from_projectors(&basis_pvm().elements).unwrap();
        let channel = projective_measurement(&spec, 1e-10).unwrap();
        let rho = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let out = channel.apply_density(&rho).unwrap();
        assert!((out.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(out.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn measurement_routes_agree() {
        // blockwise construction equals the literal doubled composite
        let spec = spectrum_from_projectors(&trine_povm().elements).unwrap();
        let a = measurement_channel(&spec.mat, 3).unwrap();
        let b = measurement_channel_composite(&spec.mat, 3).unwrap();
        assert!(a.mat.approx_eq(&b.mat, 1e-12));
    }

    #[test]
    fn pvm_channel_agrees_with_povm_apply() {
        let pvm = basis_pvm();
        let spec = spectrum_from_projectors(&pvm.elements).unwrap();
        let channel = projective_measurement(&spec, 1e-10).unwrap();
        let rho = ComplexMatrix::from_real(&[&[0.75, 0.25], &[0.25, 0.25]]);
        let via_channel = channel.apply_density(&rho).unwrap();
        let via_sum = povm_apply(&pvm, &rho, 1e-10).unwrap();
        assert!(via_channel.approx_eq(&via_sum, 1e-12));
        // and through the vectorised state explicitly
        let st = mixed_state(&rho, 1e-10, true).unwrap();
        let out = channel.compose(&st).unwrap();
        assert!(density_of(&out).unwrap().approx_eq(&via_sum, 1e-12));
    }

    #[test]
    fn x_scalar_inverse_law() {
        let s = XScalar {
            values: vec![c(2.0, 0.0), c(4.0, 0.0)],
        };
        let t = x_scalar_inverse(&s, 1e-12).unwrap();
        assert_eq!(t.values, vec![c(0.5, 0.0), c(0.25, 0.0)]);
        assert!(x_inverse_check(&s, &t, 1e-12));
        let ones = XScalar::ones(3);
        assert!(x_inverse_check(
            &ones,
            &x_scalar_inverse(&ones, 1e-12).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn zero_component_is_not_invertible() {
        let s = XScalar {
            values: vec![c(1.0, 0.0), c(0.0, 0.0)],
        };
        assert!(matches!(
            x_scalar_inverse(&s, 1e-12),
            Err(PovmError::NotInvertible(1, _))
        ));
    }

    #[test]
    fn x_polar_identity_on_psd_blocks() {
        let pvm = trine_povm();
        let stack = pvm.canonical_stack(1e-10).unwrap();
        let polar = x_polar_decompose(&stack, 3, 1e-10).unwrap();
        // blocks already PSD: reassembly must reproduce the stack
        let v = polar.isometry_blockdiag();
        let g = polar.positive_stack();
        assert!(v.matmul(&g).unwrap().approx_eq(&stack, 1e-9));
        assert!(spectral::is_isometry(&v, 1e-9));
    }

    #[test]
    fn x_polar_on_full_rank_psd_blocks_is_trivial() {
        // √F_i of a generic random POVM is PSD and full rank, so the
        // unitary parts collapse to the identity.
        let (p, _) = crate::random::random_povm(3, 2, 2718).unwrap();
        let stack = p.canonical_stack(1e-10).unwrap();
        let polar = x_polar_decompose(&stack, 2, 1e-10).unwrap();
        assert!(!polar.rank_deficient);
        for u in &polar.isometries {
            assert!(u.approx_eq(&ComplexMatrix::identity(3), 1e-9));
        }
    }

    #[test]
    fn x_polar_leaves_distribution_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut rand_c = |_: usize, _: usize| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        // arbitrary stack with Σ f̂_i†f̂_i rescaled to 1
        let raw: Vec<ComplexMatrix> = (0..3)
            .map(|_| ComplexMatrix::from_fn(2, 2, &mut rand_c))
            .collect();
        let mut sum = ComplexMatrix::zeros(2, 2);
        for b in &raw {
            sum = sum.add(&b.adjoint().matmul(b).unwrap()).unwrap();
        }
        let inv_root = {
            let root = spectral::hermitian_sqrt(&sum, 1e-10).unwrap();
            // invert via eigendecomposition of the root
            let (values, vectors) = spectral::hermitian_eig(&root).unwrap();
            ComplexMatrix::from_fn(2, 2, |r, cc| {
                (0..2)
                    .map(|k| vectors.get(r, k) * vectors.get(cc, k).conj() / values[k])
                    .sum()
            })
        };
        let blocks: Vec<ComplexMatrix> = raw.iter().map(|b| b.matmul(&inv_root).unwrap()).collect();
        let stack = stack_blocks(&blocks);
        let polar = x_polar_decompose(&stack, 3, 1e-10).unwrap();
        let rho = ComplexMatrix::from_real(&[&[0.5, 0.1], &[0.1, 0.5]]);
        for i in 0..3 {
            let f_i = &blocks[i];
            let h_i = &polar.positives[i];
            let p_f = f_i
                .matmul(&rho)
                .unwrap()
                .matmul(&f_i.adjoint())
                .unwrap()
                .trace()
                .unwrap();
            let p_h = h_i
                .matmul(&rho)
                .unwrap()
                .matmul(&h_i.adjoint())
                .unwrap()
                .trace()
                .unwrap();
            assert!((p_f - p_h).norm() < 1e-10, "outcome {i}");
        }
    }
}
