//! The doubled-morphism layer: pure embeddings `f ↦ f ⊗ f̄`, Choi
//! reshuffles, complete-positivity checks, Kraus factorisation, the
//! decoherence map and vectorised mixed states.
//!
//! Vectorisation convention: the name of `ρ` is `(ρ ⊗ 1)∘η`, which
//! with the major-first Kronecker ordering is the row-major flattening
//! of `ρ`. The Choi reshuffle and the Kraus formulas below all assume
//! this one convention.

use crate::matrix::{ComplexMatrix, MatrixError};
use crate::model::{cup_matrix, delta_matrix};
use crate::spectral::{self, SpectralError};
use crate::term::Term;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpmError {
    #[error("map is not completely positive (Choi minimum eigenvalue {0:.3e})")]
    NotCp(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type CpmResult<T> = Result<T, CpmError>;

/// A morphism `A ⊗ A* → B ⊗ B*` stored as its `dim_b² × dim_a²`
/// matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledMap {
    pub mat: ComplexMatrix,
    pub dim_a: usize,
    pub dim_b: usize,
}

impl DoubledMap {
    pub fn new(mat: ComplexMatrix, dim_a: usize, dim_b: usize) -> CpmResult<Self> {
        if mat.rows() != dim_b * dim_b || mat.cols() != dim_a * dim_a {
            return Err(MatrixError::ShapeMismatch(format!(
                "doubled map {}x{} for dims {}->{}",
                mat.rows(),
                mat.cols(),
                dim_a,
                dim_b
            ))
            .into());
        }
        Ok(DoubledMap { mat, dim_a, dim_b })
    }

    /// Apply to a vectorised state and reshape the output.
    pub fn apply_density(&self, rho: &ComplexMatrix) -> CpmResult<ComplexMatrix> {
        let state = mixed_state_unchecked(rho);
        let out = self.mat.matmul(&state.mat)?;
        Ok(ComplexMatrix::unvectorize(&out, self.dim_b, self.dim_b)?)
    }

    pub fn compose(&self, earlier: &DoubledMap) -> CpmResult<DoubledMap> {
        DoubledMap::new(self.mat.matmul(&earlier.mat)?, earlier.dim_a, self.dim_b)
    }
}

/// The pure embedding at the term level: `f ↦ f ⊗ f̄`, with the
/// conjugate as a syntactic marker resolved at evaluation.
pub fn pure_term(t: &Term) -> Term {
    Term::tensor(t.clone(), Term::conjugate(t.clone()))
}

/// The pure embedding at the matrix level.
pub fn pure_map(m: &ComplexMatrix) -> DoubledMap {
    DoubledMap {
        mat: m.kron(&m.conj()),
        dim_a: m.cols(),
        dim_b: m.rows(),
    }
}

/// Choi reshuffle: with `D = Σ K ⊗ K̄`, the Choi matrix is
/// `Σ vec(K) vec(K)†`, indexed by pairs `(i ∈ B, k ∈ A)`. Positive
/// semidefiniteness of this matrix is complete positivity of `D`.
pub fn choi(d: &DoubledMap) -> ComplexMatrix {
    let (da, db) = (d.dim_a, d.dim_b);
    ComplexMatrix::from_fn(da * db, da * db, |row, col| {
        let (i, k) = (row / da, row % da);
        let (j, l) = (col / da, col % da);
        d.mat.get(i * db + j, k * da + l)
    })
}

/// Complete positivity: the Choi matrix is PSD within `tol`.
pub fn is_cp(d: &DoubledMap, tol: f64) -> bool {
    spectral::is_psd(&choi(d), tol)
}

/// Kraus factorisation through the Choi eigendecomposition. Eigenvalues
/// below `tol` are dropped; negative ones beyond `tol` reject the map.
pub fn kraus_decompose(d: &DoubledMap, tol: f64) -> CpmResult<Vec<ComplexMatrix>> {
    let c = choi(d);
    let herm = spectral::hermiticity_residual(&c);
    if herm > tol {
        return Err(CpmError::NotCp(-herm));
    }
    let (values, vectors) = spectral::hermitian_eig(&c)?;
    if let Some(&lo) = values.first() {
        if lo < -tol {
            return Err(CpmError::NotCp(lo));
        }
    }
    let (da, db) = (d.dim_a, d.dim_b);
    let mut kraus = Vec::new();
    for (k, &lambda) in values.iter().enumerate().rev() {
        if lambda <= tol {
            continue;
        }
        let scale = lambda.sqrt();
        kraus.push(ComplexMatrix::from_fn(db, da, |i, j| {
            vectors.get(i * da + j, k) * scale
        }));
    }
    Ok(kraus)
}

/// Reassemble `Σ K ⊗ K̄` from a Kraus family.
pub fn doubled_from_kraus(kraus: &[ComplexMatrix]) -> CpmResult<DoubledMap> {
    let first = kraus
        .first()
        .ok_or_else(|| CpmError::Matrix(MatrixError::ShapeMismatch("empty Kraus family".into())))?;
    let (db, da) = (first.rows(), first.cols());
    let mut mat = ComplexMatrix::zeros(db * db, da * da);
    for k in kraus {
        if k.rows() != db || k.cols() != da {
            return Err(MatrixError::ShapeMismatch("ragged Kraus family".into()).into());
        }
        mat = mat.add(&k.kron(&k.conj()))?;
    }
    DoubledMap::new(mat, da, db)
}

/// The decoherence map on `X ⊗ X`: kills off-diagonal entries,
/// `Σ_i |ii⟩⟨ii|`, computed as `δ ∘ δ†`.
pub fn decohere(n: usize) -> ComplexMatrix {
    let delta = delta_matrix(n);
    delta.matmul(&delta.adjoint()).expect("delta shapes agree")
}

/// The same map built from the multiplication form: copy both wires
/// and cap the middle pair, `(δ ⊗ δ)` then `(1 ⊗ η† ⊗ 1)`.
pub fn decohere_mu_form(n: usize) -> ComplexMatrix {
    let delta = delta_matrix(n);
    let id = ComplexMatrix::identity(n);
    let cap = cup_matrix(n).adjoint();
    let first = delta.kron(&delta);
    let second = id.kron(&cap).kron(&id);
    second.matmul(&first).expect("decohere shapes agree")
}

/// Vectorise a density matrix into the CPM state `I → A ⊗ A*`; the
/// input must be PSD within `tol`, and trace one when `require_unit`.
pub fn mixed_state(rho: &ComplexMatrix, tol: f64, require_unit: bool) -> CpmResult<DoubledMap> {
    let lo = spectral::min_eigenvalue(rho)?;
    if spectral::hermiticity_residual(rho) > tol || lo < -tol {
        return Err(CpmError::NotPsd(lo));
    }
    if require_unit {
        let tr = rho.trace()?;
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(CpmError::NotPsd(tr.re - 1.0));
        }
    }
    Ok(mixed_state_unchecked(rho))
}

fn mixed_state_unchecked(rho: &ComplexMatrix) -> DoubledMap {
    DoubledMap {
        mat: rho.vectorize(),
        dim_a: 1,
        dim_b: rho.rows(),
    }
}

/// Reshape a vectorised state back into its density matrix; exact
/// inverse of [`mixed_state`].
pub fn density_of(state: &DoubledMap) -> CpmResult<ComplexMatrix> {
    Ok(ComplexMatrix::unvectorize(
        &state.mat,
        state.dim_b,
        state.dim_b,
    )?)
}

/// On-disk form of a channel: a Kraus family, a doubled matrix, or
/// both. When both are present the loader checks they describe the
/// same map.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ChannelFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<ComplexMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubled: Option<DoubledFile>,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct DoubledFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub mat: ComplexMatrix,
}

impl ChannelFile {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Self {
        ChannelFile {
            kraus: Some(kraus),
            doubled: None,
        }
    }

    pub fn from_doubled(d: &DoubledMap) -> Self {
        ChannelFile {
            kraus: None,
            doubled: Some(DoubledFile {
                dim_a: d.dim_a,
                dim_b: d.dim_b,
                mat: d.mat.clone(),
            }),
        }
    }

    /// Resolve to a doubled map, validating agreement when both forms
    /// are present.
    pub fn load(&self, tol: f64) -> CpmResult<DoubledMap> {
        match (&self.kraus, &self.doubled) {
            (Some(kraus), None) => doubled_from_kraus(kraus),
            (None, Some(d)) => DoubledMap::new(d.mat.clone(), d.dim_a, d.dim_b),
            (Some(kraus), Some(d)) => {
                let from_kraus = doubled_from_kraus(kraus)?;
                let direct = DoubledMap::new(d.mat.clone(), d.dim_a, d.dim_b)?;
                let diff = from_kraus.mat.max_diff(&direct.mat);
                if diff > tol {
                    return Err(MatrixError::ShapeMismatch(format!(
                        "kraus and doubled forms disagree by {diff:.3e}"
                    ))
                    .into());
                }
                Ok(direct)
            }
            (None, None) => {
                Err(MatrixError::ShapeMismatch("channel file holds neither form".into()).into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eval_closed, swap_matrix};
    use crate::object::{ClassicalObject, Factor, ObjectType};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_identity_is_doubled_identity() {
        let a = ObjectType::single(Factor::generic("A", 2));
        let t = pure_term(&Term::Identity(a));
        let m = eval_closed(&t).unwrap();
        assert!(m.approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn pure_of_rank_one_map_by_hand() {
        // f = |0⟩⟨+|; pure(f) = f ⊗ f̄ computed by hand Kronecker.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = ComplexMatrix::from_real(&[&[s, s], &[0.0, 0.0]]);
        let doubled = pure_map(&f);
        let expect = f.kron(&f.conj());
        assert!(doubled.mat.approx_eq(&expect, 0.0));
        assert!(is_cp(&doubled, 1e-10));
    }

    #[test]
    fn choi_of_identity_channel_is_entangled_projector() {
        let d = pure_map(&ComplexMatrix::identity(2));
        let ch = choi(&d);
        // |φ⟩⟨φ| with φ = (1,0,0,1): twice the maximally entangled projector
        let mut expect = ComplexMatrix::zeros(4, 4);
        for (r, cidx) in [(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            expect.set(r, cidx, c(1.0, 0.0));
        }
        assert!(ch.approx_eq(&expect, 0.0));
        assert!(is_cp(&d, 1e-10));
    }

    #[test]
    fn transpose_map_is_not_cp() {
        // vec(ρᵀ) = SWAP · vec(ρ): the doubled matrix of transposition.
        let d = DoubledMap::new(swap_matrix(2, 2), 2, 2).unwrap();
        let rho = ComplexMatrix::from_fn(2, 2, |r, cc| c((r + 2 * cc) as f64, 0.0));
        let out = d.apply_density(&rho).unwrap();
        assert!(out.approx_eq(&rho.transpose(), 0.0));
        let (values, _) = spectral::hermitian_eig(&choi(&d)).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-12, "lowest Choi eigenvalue -1");
        assert!(!is_cp(&d, 1e-10));
        assert!(matches!(
            kraus_decompose(&d, 1e-10),
            Err(CpmError::NotCp(_))
        ));
    }

    #[test]
    fn decohere_forms_agree_and_pattern() {
        for n in 1..6 {
            let a = decohere(n);
            let b = decohere_mu_form(n);
            assert!(a.approx_eq(&b, 0.0), "n={n}");
        }
        let d2 = decohere(2);
        let mut expect = ComplexMatrix::zeros(4, 4);
        expect.set(0, 0, c(1.0, 0.0));
        expect.set(3, 3, c(1.0, 0.0));
        assert!(d2.approx_eq(&expect, 0.0));
    }

    #[test]
    fn decohere_is_idempotent_self_adjoint_and_cp() {
        for n in 1..6 {
            let d = decohere(n);
            assert!(d.matmul(&d).unwrap().approx_eq(&d, 0.0), "idempotent n={n}");
            assert!(d.approx_eq(&d.adjoint(), 0.0), "self-adjoint n={n}");
        }
        let as_channel = DoubledMap::new(decohere(2), 2, 2).unwrap();
        assert!(is_cp(&as_channel, 1e-10));
        let kraus = kraus_decompose(&as_channel, 1e-10).unwrap();
        assert_eq!(kraus.len(), 2);
    }

    #[test]
    fn pure_of_delta_spider_is_cp() {
        let x = ClassicalObject::new("X", 2);
        let t = Term::compose(Term::delta(&x), Term::dagger(Term::delta(&x))).unwrap();
        let m = eval_closed(&t).unwrap();
        assert!(is_cp(&pure_map(&m), 1e-10));
    }

    #[test]
    fn pure_maps_have_rank_one_kraus() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let f = ComplexMatrix::from_fn(2, 3, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let kraus = kraus_decompose(&pure_map(&f), 1e-10).unwrap();
        assert_eq!(kraus.len(), 1);
        // the single factor is f up to a global phase
        let k = &kraus[0];
        let phase = k.get(0, 0) / f.get(0, 0);
        assert!((phase.norm() - 1.0).abs() < 1e-9);
        assert!(k.approx_eq(&f.scale(phase), 1e-9));
    }

    #[test]
    fn kraus_round_trip_on_seeded_channel() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut ops = Vec::new();
        for _ in 0..3 {
            ops.push(ComplexMatrix::from_fn(3, 3, |_, _| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            }));
        }
        let d = doubled_from_kraus(&ops).unwrap();
        let kraus = kraus_decompose(&d, 1e-10).unwrap();
        let back = doubled_from_kraus(&kraus).unwrap();
        assert!(back.mat.approx_eq(&d.mat, 1e-9));
        let c_rank = kraus.len();
        assert!(c_rank <= 3, "rank grew: {c_rank}");
    }

    #[test]
    fn mixed_state_examples() {
        // |0⟩⟨0| vectorises to e₀⊗e₀.
        let rho = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let st = mixed_state(&rho, 1e-10, true).unwrap();
        assert_eq!(st.mat.get(0, 0), c(1.0, 0.0));
        for i in 1..4 {
            assert_eq!(st.mat.get(i, 0), c(0.0, 0.0));
        }
        // maximally mixed: (½, 0, 0, ½)
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let st = mixed_state(&half, 1e-10, true).unwrap();
        assert_eq!(st.mat.get(0, 0), c(0.5, 0.0));
        assert_eq!(st.mat.get(3, 0), c(0.5, 0.0));
        // round trip is exact
        let back = density_of(&st).unwrap();
        assert!(back.approx_eq(&half, 0.0));
    }

    #[test]
    fn mixed_state_rejects_non_psd() {
        let m = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(
            mixed_state(&m, 1e-10, false),
            Err(CpmError::NotPsd(_))
        ));
    }

    #[test]
    fn channel_file_loads_either_form_and_checks_agreement() {
        let k0 = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let k1 = ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let kraus = vec![k0, k1];
        let reference = doubled_from_kraus(&kraus).unwrap();

        let from_kraus = ChannelFile::from_kraus(kraus.clone()).load(1e-10).unwrap();
        assert!(from_kraus.mat.approx_eq(&reference.mat, 0.0));

        let text = serde_json::to_string(&ChannelFile::from_doubled(&reference)).unwrap();
        let parsed: ChannelFile = serde_json::from_str(&text).unwrap();
        assert!(parsed
            .load(1e-10)
            .unwrap()
            .mat
            .approx_eq(&reference.mat, 0.0));

        let both = ChannelFile {
            kraus: Some(kraus.clone()),
            doubled: Some(DoubledFile {
                dim_a: 2,
                dim_b: 2,
                mat: reference.mat.clone(),
            }),
        };
        assert!(both.load(1e-10).is_ok());

        let disagreeing = ChannelFile {
            kraus: Some(kraus),
            doubled: Some(DoubledFile {
                dim_a: 2,
                dim_b: 2,
                mat: ComplexMatrix::identity(4),
            }),
        };
        assert!(disagreeing.load(1e-10).is_err());
        assert!(ChannelFile {
            kraus: None,
            doubled: None
        }
        .load(1e-10)
        .is_err());
    }

    #[test]
    fn name_of_positive_map_matches_doubled_cup() {
        // name(g†g) = (g† ⊗ g̅†) applied to the cup on the middle space.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let g = ComplexMatrix::from_fn(3, 3, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let gdag = g.adjoint();
        let name = gdag.matmul(&g).unwrap().vectorize();
        let via_cup = gdag.kron(&gdag.conj()).matmul(&cup_matrix(3)).unwrap();
        assert!(name.approx_eq(&via_cup, 1e-12));
    }
}
