//! The concrete model: terms evaluate to dense complex matrices over
//! finite-dimensional Hilbert spaces.
//!
//! Generators take their standard interpretation in the basis fixed by
//! each object: `δ` sends `|i⟩` to `|ii⟩`, `ε` sends `|i⟩` to 1, cups
//! are `Σ_i |ii⟩` and swaps are the permutation matrices.

use crate::matrix::{ComplexMatrix, MatrixError};
use crate::term::Term;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("box {0} is not bound in the model")]
    UnboundBox(String),
    #[error(
        "box {name} is bound to a {got_rows}x{got_cols} matrix, expected {want_rows}x{want_cols}"
    )]
    BoxShape {
        name: String,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type EvalResult<T> = Result<T, EvalError>;

/// Interpretation environment: a matrix for every box name. Object
/// dimensions travel inside the types, so no separate assignment is
/// needed here.
#[derive(Clone, Debug, Default)]
pub struct Model {
    boxes: BTreeMap<String, ComplexMatrix>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn bind_box(&mut self, name: impl Into<String>, matrix: ComplexMatrix) {
        self.boxes.insert(name.into(), matrix);
    }

    pub fn box_matrix(&self, name: &str) -> Option<&ComplexMatrix> {
        self.boxes.get(name)
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// δ on dimension n: the n²×n matrix with `|i⟩ ↦ |ii⟩`.
pub fn delta_matrix(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n * n, n);
    for i in 0..n {
        m.set(i * n + i, i, one());
    }
    m
}

/// ε on dimension n: the 1×n all-ones row, `|i⟩ ↦ 1`.
pub fn epsilon_matrix(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(1, n, |_, _| one())
}

/// η on dimension n: the column Σ_i |ii⟩.
pub fn cup_matrix(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n * n, 1);
    for i in 0..n {
        m.set(i * n + i, 0, one());
    }
    m
}

/// The permutation matrix of σ : A ⊗ B → B ⊗ A.
pub fn swap_matrix(dim_a: usize, dim_b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim_a * dim_b, dim_a * dim_b);
    for i in 0..dim_a {
        for j in 0..dim_b {
            m.set(j * dim_a + i, i * dim_b + j, one());
        }
    }
    m
}

/// Evaluate a term to its matrix. Composition is matrix product,
/// tensor is Kronecker product, dagger is conjugate transpose.
pub fn eval(term: &Term, model: &Model) -> EvalResult<ComplexMatrix> {
    let m = match term {
        Term::Identity(o) => ComplexMatrix::identity(o.dim()),
        Term::Swap(a, b) => swap_matrix(a.dim(), b.dim()),
        Term::Cup(f) => cup_matrix(f.dim()),
        Term::Cap(f) => cup_matrix(f.dim()).adjoint(),
        Term::Delta(x) => delta_matrix(x.dim),
        Term::Epsilon(x) => epsilon_matrix(x.dim),
        Term::Box { name, dom, cod } => {
            let m = model
                .boxes
                .get(name)
                .ok_or_else(|| EvalError::UnboundBox(name.clone()))?;
            if m.rows() != cod.dim() || m.cols() != dom.dim() {
                return Err(EvalError::BoxShape {
                    name: name.clone(),
                    got_rows: m.rows(),
                    got_cols: m.cols(),
                    want_rows: cod.dim(),
                    want_cols: dom.dim(),
                });
            }
            m.clone()
        }
        Term::Dagger(t) => eval(t, model)?.adjoint(),
        Term::Conjugate(t) => eval(t, model)?.conj(),
        Term::Compose(g, f) => eval(g, model)?.matmul(&eval(f, model)?)?,
        Term::Tensor(l, r) => eval(l, model)?.kron(&eval(r, model)?),
    };
    Ok(m)
}

/// Evaluate a box-free term.
pub fn eval_closed(term: &Term) -> EvalResult<ComplexMatrix> {
    eval(term, &Model::new())
}

/// Result of checking one defining identity of the classical
/// structure.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub residual: f64,
    pub pass: bool,
}

/// Report over all eight classical-structure identities.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FrobeniusReport {
    pub dim: usize,
    pub tol: f64,
    pub checks: Vec<AxiomCheck>,
}

impl FrobeniusReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// The generator matrices the Frobenius checks run against.
/// Overridable so tests can corrupt a generator and watch the right
/// axiom fail.
#[derive(Clone, Debug)]
pub struct ClassicalGenerators {
    pub dim: usize,
    pub delta: ComplexMatrix,
    pub epsilon: ComplexMatrix,
    pub cup: ComplexMatrix,
}

impl ClassicalGenerators {
    pub fn standard(dim: usize) -> Self {
        ClassicalGenerators {
            dim,
            delta: delta_matrix(dim),
            epsilon: epsilon_matrix(dim),
            cup: cup_matrix(dim),
        }
    }
}

/// Verify the special dagger-Frobenius identities of the classical
/// structure on dimension `n` as matrix identities within `tol`:
/// coassociativity, cocommutativity, the counit laws, speciality,
/// the Frobenius identity, `η = δ∘ε†` and the two self-adjointness
/// equations.
pub fn check_frobenius(n: usize, tol: f64) -> FrobeniusReport {
    check_frobenius_generators(&ClassicalGenerators::standard(n), tol)
}

pub fn check_frobenius_generators(gens: &ClassicalGenerators, tol: f64) -> FrobeniusReport {
    let n = gens.dim;
    let id = ComplexMatrix::identity(n);
    let delta = &gens.delta;
    let eps = &gens.epsilon;
    let cup = &gens.cup;
    let mu = delta.adjoint(); // multiplication δ†
    let swap = swap_matrix(n, n);

    fn push(checks: &mut Vec<AxiomCheck>, tol: f64, axiom: &'static str, residual: f64) {
        checks.push(AxiomCheck {
            axiom,
            residual,
            pass: residual <= tol,
        });
    }

    let mut checks = Vec::new();
    // (δ⊗1)∘δ = (1⊗δ)∘δ
    push(
        &mut checks,
        tol,
        "coassociativity",
        delta
            .kron(&id)
            .matmul(delta)
            .unwrap()
            .max_diff(&id.kron(delta).matmul(delta).unwrap()),
    );
    // σ∘δ = δ
    push(
        &mut checks,
        tol,
        "cocommutativity",
        swap.matmul(delta).unwrap().max_diff(delta),
    );
    // (ε⊗1)∘δ = 1 = (1⊗ε)∘δ
    let left_counit = eps.kron(&id).matmul(delta).unwrap();
    let right_counit = id.kron(eps).matmul(delta).unwrap();
    push(
        &mut checks,
        tol,
        "counit laws",
        left_counit.max_diff(&id).max(right_counit.max_diff(&id)),
    );
    // δ†∘δ = 1
    push(
        &mut checks,
        tol,
        "speciality",
        mu.matmul(delta).unwrap().max_diff(&id),
    );
    // Frobenius identity: δ∘δ† = (1⊗δ†)∘(δ⊗1), and symmetrically
    let frob_mid = delta.matmul(&mu).unwrap();
    let frob_left = id.kron(&mu).matmul(&delta.kron(&id)).unwrap();
    let frob_right = mu.kron(&id).matmul(&id.kron(delta)).unwrap();
    push(
        &mut checks,
        tol,
        "frobenius identity",
        frob_mid
            .max_diff(&frob_left)
            .max(frob_mid.max_diff(&frob_right)),
    );
    // η = δ∘ε†
    push(
        &mut checks,
        tol,
        "cup from delta",
        cup.max_diff(&delta.matmul(&eps.adjoint()).unwrap()),
    );
    // δ = (1⊗δ†)∘(η⊗1)
    push(
        &mut checks,
        tol,
        "delta self-adjointness",
        delta.max_diff(&id.kron(&mu).matmul(&cup.kron(&id)).unwrap()),
    );
    // ε = η†∘(1⊗ε†)
    push(
        &mut checks,
        tol,
        "epsilon self-adjointness",
        eps.max_diff(&cup.adjoint().matmul(&id.kron(&eps.adjoint())).unwrap()),
    );

    FrobeniusReport {
        dim: n,
        tol,
        checks,
    }
}
