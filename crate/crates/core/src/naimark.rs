//! Naimark dilation: realise a complete POVM as a projective
//! measurement on an extended system, and the converse compression of
//! an extended projective measurement back to a POVM.
//!
//! The dilation isometry is `V = Σ_i |i⟩ ⊗ √F_i : A → C ⊗ A` with
//! ancilla `C = C^n`; the measurement projectors are
//! `Π_i = |i⟩⟨i| ⊗ 1`. For the state-picture replay, `V` is extended
//! to a unitary `W` on `C ⊗ A` (deterministically), the spectrum is
//! conjugated to `W†ΠW`, and the ancilla is prepared in `|0⟩⟨0|`; the
//! X-scalars `s = Tr(√F_i)` and `t = s^{-1}` ride along and are
//! checked against the inverse law.

use crate::matrix::ComplexMatrix;
use crate::povm::{
    check_density, check_spectrum, measurement_channel, povm_apply, spectrum_from_projectors,
    stack_blocks, x_inverse_check, x_scalar_inverse, x_scalar_trace, Povm, PovmError, PovmResult,
    Spectrum, XScalar,
};
use crate::spectral;
use num_complex::Complex64;
use serde::Serialize;

/// A dilation bundle for a complete POVM.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    /// Ancilla dimension, one per outcome.
    pub ancilla_dim: usize,
    /// System dimension.
    pub dim: usize,
    /// `V : A → C ⊗ A`, columns orthonormal.
    pub isometry: ComplexMatrix,
    /// Measurement projectors `Π_i = |i⟩⟨i| ⊗ 1` on the extended space.
    pub projectors: Vec<ComplexMatrix>,
    /// Unitary extension of `V`, used by the state-form replay.
    pub unitary: ComplexMatrix,
    /// Ancilla preparation for the state form.
    pub ancilla_state: ComplexMatrix,
    /// Blockwise traces of the positive parts.
    pub s_scalar: XScalar,
    /// Componentwise inverse of `s_scalar`.
    pub t_scalar: XScalar,
}

impl NaimarkDilation {
    /// The spectrum `Σ_i |i⟩ ⊗ Π_i` of the extended measurement.
    pub fn measurement_spectrum(&self) -> PovmResult<Spectrum> {
        spectrum_from_projectors(&self.projectors)
    }

    /// The spectrum conjugated into the state picture,
    /// `Σ_i |i⟩ ⊗ W†Π_iW`.
    pub fn state_form_spectrum(&self) -> PovmResult<Spectrum> {
        let w = &self.unitary;
        let projs: Vec<ComplexMatrix> = self
            .projectors
            .iter()
            .map(|p| w.adjoint().matmul(p)?.matmul(w))
            .collect::<Result<_, _>>()?;
        spectrum_from_projectors(&projs)
    }
}

/// Serializable form of a dilation: the isometry, the projectors and
/// the X-scalars.
#[derive(Serialize)]
pub struct DilationRepr<'a> {
    pub ancilla_dim: usize,
    pub dim: usize,
    pub isometry: &'a ComplexMatrix,
    pub projectors: &'a [ComplexMatrix],
    pub s: Vec<[f64; 2]>,
    pub t: Vec<[f64; 2]>,
}

impl NaimarkDilation {
    pub fn repr(&self) -> DilationRepr<'_> {
        DilationRepr {
            ancilla_dim: self.ancilla_dim,
            dim: self.dim,
            isometry: &self.isometry,
            projectors: &self.projectors,
            s: self.s_scalar.values.iter().map(|z| [z.re, z.im]).collect(),
            t: self.t_scalar.values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Dilate a complete POVM to a projective measurement on `C ⊗ A`.
///
/// Errors with `NotComplete` when `Σ F_i ≠ 1` and with
/// `NotInvertible` when some positive part has vanishing trace (the
/// abstract X-inverse `t` then does not exist); `allow_zero_trace`
/// skips the scalar construction and runs the concrete dilation only,
/// filling `t` with zeros at the degenerate components.
pub fn naimark_dilate(p: &Povm, tol: f64, allow_zero_trace: bool) -> PovmResult<NaimarkDilation> {
    let sum_residual = p.element_sum().max_diff(&ComplexMatrix::identity(p.dim));
    if !p.complete || sum_residual > tol {
        return Err(PovmError::NotComplete(sum_residual));
    }
    let roots: Vec<ComplexMatrix> = p
        .elements
        .iter()
        .map(|f| spectral::hermitian_sqrt(f, tol.max(1e-9)))
        .collect::<Result<_, _>>()?;
    let isometry = stack_blocks(&roots);
    let (n, d) = (p.outcomes, p.dim);

    let s_scalar = x_scalar_trace(&isometry, n)?;
    let t_scalar = match x_scalar_inverse(&s_scalar, tol) {
        Ok(t) => t,
        Err(PovmError::NotInvertible(i, m)) if !allow_zero_trace => {
            return Err(PovmError::NotInvertible(i, m));
        }
        Err(_) => XScalar {
            values: s_scalar
                .values
                .iter()
                .map(|v| {
                    if v.norm() <= tol {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0) / v
                    }
                })
                .collect(),
        },
    };

    let mut projectors = Vec::with_capacity(n);
    for i in 0..n {
        let mut pi = ComplexMatrix::zeros(n * d, n * d);
        for a in 0..d {
            pi.set(i * d + a, i * d + a, Complex64::new(1.0, 0.0));
        }
        projectors.push(pi);
    }

    let unitary = spectral::unitary_completion(&isometry)?;
    // ancilla prepared in |0⟩⟨0|: W(|0⟩⊗ρ)W† = VρV†
    let mut ancilla_state = ComplexMatrix::zeros(n, n);
    ancilla_state.set(0, 0, Complex64::new(1.0, 0.0));

    Ok(NaimarkDilation {
        ancilla_dim: n,
        dim: d,
        isometry,
        projectors,
        unitary,
        ancilla_state,
        s_scalar,
        t_scalar,
    })
}

/// Verification report for a dilation.
#[derive(Clone, Debug, Serialize)]
pub struct DilationReport {
    pub tol: f64,
    /// ‖V†V − 1‖
    pub isometry_residual: f64,
    /// Largest |Tr(Π_i VρV†) − Tr(F_i ρ)| over states and outcomes.
    pub concrete_residual: f64,
    /// Same comparison through the doubled projective-measurement
    /// channel on the extended space with the ancilla state wired in.
    pub abstract_residual: f64,
    /// X-inverse law residual on (s, t).
    pub scalar_check: bool,
    pub spectrum_ok: bool,
    pub pass: bool,
}

/// Replay both pictures of the dilated measurement over the given
/// states and compare with the POVM's own distributions.
pub fn verify_dilation(
    dl: &NaimarkDilation,
    p: &Povm,
    states: &[ComplexMatrix],
    tol: f64,
) -> PovmResult<DilationReport> {
    let (n, d) = (dl.ancilla_dim, dl.dim);
    let v = &dl.isometry;
    let isometry_residual = v.adjoint().matmul(v)?.max_diff(&ComplexMatrix::identity(d));

    let spectrum_ok = check_spectrum(&dl.measurement_spectrum()?, tol).all_pass()
        && check_spectrum(&dl.state_form_spectrum()?, tol).all_pass();

    // state-form channel: measure W†ΠW on ancilla ⊗ system
    let state_spec = dl.state_form_spectrum()?;
    let channel = measurement_channel(&state_spec.mat, n)?;

    let mut concrete_residual: f64 = 0.0;
    let mut abstract_residual: f64 = 0.0;
    for rho in states {
        check_density(rho, d, tol.max(1e-8))?;
        let expected = povm_apply(p, rho, tol.max(1e-8))?;

        // concrete: Tr(Π_i · V ρ V†)
        let dilated = v.matmul(rho)?.matmul(&v.adjoint())?;
        for (i, pi) in dl.projectors.iter().enumerate() {
            let prob = pi.matmul(&dilated)?.trace()?;
            concrete_residual = concrete_residual.max((prob - expected.get(i, i)).norm());
        }

        // abstract: prepare ρ_C ⊗ ρ, run the doubled measurement
        // channel of the conjugated spectrum, read the distribution.
        let joint = dl.ancilla_state.kron(rho);
        let dist = channel.apply_density(&joint)?;
        for i in 0..n {
            abstract_residual = abstract_residual.max((dist.get(i, i) - expected.get(i, i)).norm());
        }
    }

    let scalar_check = x_inverse_check(&dl.s_scalar, &dl.t_scalar, tol.max(1e-9));
    let pass = isometry_residual <= tol
        && concrete_residual <= tol
        && abstract_residual <= tol
        && scalar_check
        && spectrum_ok;
    Ok(DilationReport {
        tol,
        isometry_residual,
        concrete_residual,
        abstract_residual,
        scalar_check,
        spectrum_ok,
        pass,
    })
}

/// Converse direction: compress a projective measurement on `C ⊗ A`
/// with ancilla preparation `rho_c` into the POVM it realises,
/// `F_i = (Tr_C ⊗ 1)[(ρ_C ⊗ 1) Π_i]`.
pub fn povm_from_projective(
    spectrum: &Spectrum,
    rho_c: &ComplexMatrix,
    dim_a: usize,
    tol: f64,
) -> PovmResult<Povm> {
    let dim_c = rho_c.rows();
    if spectrum.dim != dim_c * dim_a {
        return Err(PovmError::InvalidSpectrum(format!(
            "spectrum dimension {} is not {}x{}",
            spectrum.dim, dim_c, dim_a
        )));
    }
    let report = check_spectrum(spectrum, tol);
    if !report.valid() {
        return Err(PovmError::InvalidSpectrum(format!(
            "idempotence residual {:.3e}, self-adjointness residual {:.3e}",
            report.idempotence, report.self_adjointness
        )));
    }
    check_density(rho_c, dim_c, tol.max(1e-9))
        .map_err(|e| PovmError::NotDensityMatrix(format!("ancilla: {e}")))?;

    let weighted = rho_c.kron(&ComplexMatrix::identity(dim_a));
    let mut elements = Vec::with_capacity(spectrum.outcomes);
    for i in 0..spectrum.outcomes {
        let pi = spectrum.block(i);
        let f = weighted.matmul(&pi)?.partial_trace(&[dim_c, dim_a], 0)?;
        elements.push(f);
    }
    // complete exactly when the spectrum was X-complete and the
    // ancilla has unit trace
    Povm::new(elements, report.complete)
}
