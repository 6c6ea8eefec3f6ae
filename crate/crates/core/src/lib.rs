//! dcnet: a workbench for dagger-compact diagrams with classical
//! copy/delete structure.
//!
//! The pieces fit together like this: [`term`] is the typed expression
//! language over the generators, [`model`] evaluates terms to dense
//! complex matrices ([`matrix`], [`spectral`]), [`network`] turns the
//! classical fragment into open spider graphs that [`normalizer`]
//! rewrites into `(m, n)` normal form, [`cpm`] supplies the doubled
//! (completely positive) layer, and [`povm`] with [`naimark`] builds
//! measurements, dilations and their verifiers on top. [`random`]
//! provides the seeded instance generators everything is tested with.
//!
//! ```
//! use dcnet::{eval_closed, normalize, to_network, ClassicalObject, ComplexMatrix, Term};
//!
//! // copy then merge: δ† ∘ δ = 1 on a two-dimensional classical object
//! let x = ClassicalObject::new("X", 2);
//! let speciality = Term::compose(Term::dagger(Term::delta(&x)), Term::delta(&x))?;
//! let matrix = eval_closed(&speciality)?;
//! assert!(matrix.approx_eq(&ComplexMatrix::identity(2), 1e-12));
//!
//! // as a spider graph the same term rewrites to a bare wire
//! let (nf, steps) = normalize(&to_network(&speciality)?);
//! assert!(nf.components[0].bare_wire);
//! assert_eq!(steps.len(), 3); // fusion, loop removal, unit annihilation
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cpm;
pub mod matrix;
pub mod model;
pub mod naimark;
pub mod network;
pub mod normalizer;
pub mod object;
pub mod povm;
pub mod random;
pub mod spectral;
pub mod term;

/// Default tolerances. Structural identities are exact up to float
/// rounding at these scales; spectral quantities inherit eigensolver
/// noise, so they get an order of magnitude more slack.
pub mod tol {
    /// Structural matrix identities (rewrites, axioms, functoriality).
    pub const STRUCTURAL: f64 = 1e-10;
    /// Spectral operations (eigenvalues, square roots, polar parts).
    pub const SPECTRAL: f64 = 1e-9;
}

pub use matrix::ComplexMatrix;
pub use model::{eval, eval_closed, Model};
pub use network::{to_network, ClassicalNetwork, NormalForm};
pub use normalizer::{normalize, normalize_run, Schedule};
pub use object::{ClassicalObject, Factor, ObjectType};
pub use povm::{Povm, Spectrum};
pub use term::Term;
