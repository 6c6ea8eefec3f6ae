//! Typed expression language for morphisms in a dagger-compact
//! category with distinguished classical objects.
//!
//! Terms are immutable trees over the generators: identities,
//! symmetries, cups and caps, copying `δ` and deleting `ε` on
//! classical objects, and named boxes interpreted by a model. Terms
//! stay purely syntactic; matrices live in [`crate::model`].

use crate::object::{ClassicalObject, Factor, ObjectType};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermError {
    #[error(
        "type mismatch composing: cod {cod} of the first term differs from dom {dom} of the second"
    )]
    TypeMismatch { cod: String, dom: String },
    #[error("{0} requires a classical object")]
    NotClassical(String),
}

pub type TermResult<T> = Result<T, TermError>;

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// 1 : A → A
    Identity(ObjectType),
    /// σ : A ⊗ B → B ⊗ A
    Swap(ObjectType, ObjectType),
    /// η : I → A* ⊗ A
    Cup(Factor),
    /// η† : A* ⊗ A → I
    Cap(Factor),
    /// δ : X → X ⊗ X, copying on a classical object
    Delta(ClassicalObject),
    /// ε : X → I, deleting on a classical object
    Epsilon(ClassicalObject),
    /// Named morphism bound to a matrix by the model
    Box {
        name: String,
        dom: ObjectType,
        cod: ObjectType,
    },
    Dagger(Box<Term>),
    /// Entrywise conjugate; resolved at evaluation time
    Conjugate(Box<Term>),
    /// `Compose(g, f)` is g ∘ f (apply f first)
    Compose(Box<Term>, Box<Term>),
    Tensor(Box<Term>, Box<Term>),
}

impl Term {
    pub fn dom(&self) -> ObjectType {
        match self {
            Term::Identity(o) => o.clone(),
            Term::Swap(a, b) => a.tensor(b),
            Term::Cup(_) => ObjectType::unit(),
            Term::Cap(f) => ObjectType::single(f.dual()).tensor(&ObjectType::single(f.clone())),
            Term::Delta(x) | Term::Epsilon(x) => ObjectType::classical(x),
            Term::Box { dom, .. } => dom.clone(),
            Term::Dagger(t) => t.cod(),
            Term::Conjugate(t) => t.dom().dual(),
            Term::Compose(_, f) => f.dom(),
            Term::Tensor(l, r) => l.dom().tensor(&r.dom()),
        }
    }

    pub fn cod(&self) -> ObjectType {
        match self {
            Term::Identity(o) => o.clone(),
            Term::Swap(a, b) => b.tensor(a),
            Term::Cup(f) => ObjectType::single(f.dual()).tensor(&ObjectType::single(f.clone())),
            Term::Cap(_) => ObjectType::unit(),
            Term::Delta(x) => {
                let x = ObjectType::classical(x);
                x.tensor(&x)
            }
            Term::Epsilon(_) => ObjectType::unit(),
            Term::Box { cod, .. } => cod.clone(),
            Term::Dagger(t) => t.dom(),
            Term::Conjugate(t) => t.cod().dual(),
            Term::Compose(g, _) => g.cod(),
            Term::Tensor(l, r) => l.cod().tensor(&r.cod()),
        }
    }

    pub fn identity(o: ObjectType) -> Term {
        Term::Identity(o)
    }

    pub fn swap(a: ObjectType, b: ObjectType) -> Term {
        Term::Swap(a, b)
    }

    pub fn cup(f: Factor) -> Term {
        Term::Cup(f)
    }

    pub fn cap(f: Factor) -> Term {
        Term::Cap(f)
    }

    pub fn delta(x: &ClassicalObject) -> Term {
        Term::Delta(x.clone())
    }

    pub fn epsilon(x: &ClassicalObject) -> Term {
        Term::Epsilon(x.clone())
    }

    /// Delta on an arbitrary factor; errors on generic factors.
    pub fn delta_on(f: &Factor) -> TermResult<Term> {
        f.as_classical()
            .map(Term::Delta)
            .ok_or_else(|| TermError::NotClassical(format!("delta on {f}")))
    }

    /// Epsilon on an arbitrary factor; errors on generic factors.
    pub fn epsilon_on(f: &Factor) -> TermResult<Term> {
        f.as_classical()
            .map(Term::Epsilon)
            .ok_or_else(|| TermError::NotClassical(format!("eps on {f}")))
    }

    pub fn boxed(name: impl Into<String>, dom: ObjectType, cod: ObjectType) -> Term {
        Term::Box {
            name: name.into(),
            dom,
            cod,
        }
    }

    pub fn dagger(t: Term) -> Term {
        Term::Dagger(Box::new(t))
    }

    pub fn conjugate(t: Term) -> Term {
        Term::Conjugate(Box::new(t))
    }

    /// g ∘ f, checked: `cod(f)` must equal `dom(g)`.
    pub fn compose(g: Term, f: Term) -> TermResult<Term> {
        let cod = f.cod();
        let dom = g.dom();
        if cod != dom {
            return Err(TermError::TypeMismatch {
                cod: cod.to_string(),
                dom: dom.to_string(),
            });
        }
        Ok(Term::Compose(Box::new(g), Box::new(f)))
    }

    pub fn tensor(l: Term, r: Term) -> Term {
        Term::Tensor(Box::new(l), Box::new(r))
    }

    /// Left-to-right composition chain; identity on the empty chain is
    /// not defined, so the iterator must be nonempty.
    pub fn compose_chain(terms: impl IntoIterator<Item = Term>) -> TermResult<Term> {
        let mut it = terms.into_iter();
        let first = it.next().expect("compose_chain of nothing");
        it.try_fold(first, |acc, next| Term::compose(next, acc))
    }

    pub fn tensor_chain(terms: impl IntoIterator<Item = Term>) -> Term {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::Identity(ObjectType::unit()),
            Some(first) => it.fold(first, Term::tensor),
        }
    }

    /// True when the term uses only the classical fragment: identity,
    /// swap, cup, cap, delta, epsilon and daggers thereof, all on a
    /// single classical object.
    pub fn classical_object(&self) -> Option<ClassicalObject> {
        fn note(x: ClassicalObject, found: &mut Option<ClassicalObject>) -> bool {
            match found {
                Some(seen) => *seen == x,
                None => {
                    *found = Some(x);
                    true
                }
            }
        }
        fn note_factor(f: &Factor, found: &mut Option<ClassicalObject>) -> bool {
            match f.as_classical() {
                Some(x) => note(x, found),
                None => false,
            }
        }
        fn walk(t: &Term, found: &mut Option<ClassicalObject>) -> bool {
            match t {
                Term::Identity(o) => o.factors.iter().all(|f| note_factor(f, found)),
                Term::Swap(a, b) => {
                    a.factors.iter().all(|f| note_factor(f, found))
                        && b.factors.iter().all(|f| note_factor(f, found))
                }
                Term::Cup(f) | Term::Cap(f) => note_factor(f, found),
                Term::Delta(x) | Term::Epsilon(x) => note(x.clone(), found),
                Term::Box { .. } => false,
                Term::Dagger(inner) | Term::Conjugate(inner) => walk(inner, found),
                Term::Compose(g, f) => walk(g, found) && walk(f, found),
                Term::Tensor(l, r) => walk(l, found) && walk(r, found),
            }
        }
        let mut found = None;
        if walk(self, &mut found) {
            found
        } else {
            None
        }
    }
}

/// Push daggers to the leaves: `(g∘f)† = f†∘g†`, `(f⊗g)† = f†⊗g†`,
/// `f†† = f`, `η† = cap`, and so on. Daggers survive only immediately
/// around `Delta`, `Epsilon` and `Box` leaves.
pub fn dagger_pushdown(t: &Term) -> Term {
    match t {
        Term::Dagger(inner) => dagger_of(inner),
        Term::Conjugate(inner) => Term::conjugate(dagger_pushdown(inner)),
        Term::Compose(g, f) => {
            Term::Compose(Box::new(dagger_pushdown(g)), Box::new(dagger_pushdown(f)))
        }
        Term::Tensor(l, r) => {
            Term::Tensor(Box::new(dagger_pushdown(l)), Box::new(dagger_pushdown(r)))
        }
        leaf => leaf.clone(),
    }
}

fn dagger_of(t: &Term) -> Term {
    match t {
        Term::Identity(o) => Term::Identity(o.clone()),
        Term::Swap(a, b) => Term::Swap(b.clone(), a.clone()),
        Term::Cup(f) => Term::Cap(f.clone()),
        Term::Cap(f) => Term::Cup(f.clone()),
        Term::Delta(_) | Term::Epsilon(_) | Term::Box { .. } => Term::dagger(t.clone()),
        Term::Dagger(inner) => dagger_pushdown(inner),
        Term::Conjugate(inner) => Term::conjugate(dagger_of(inner)),
        Term::Compose(g, f) => Term::Compose(Box::new(dagger_of(f)), Box::new(dagger_of(g))),
        Term::Tensor(l, r) => Term::Tensor(Box::new(dagger_of(l)), Box::new(dagger_of(r))),
    }
}

/// The n-fold copying map δ_n : X → X^⊗n for n ≥ 1, δ_1 = 1. For
/// n = 0 this is ε† : I → X, the single dot with one outgoing wire.
pub fn delta_n(x: &ClassicalObject, n: usize) -> Term {
    let xt = ObjectType::classical(x);
    match n {
        0 => Term::dagger(Term::epsilon(x)),
        1 => Term::Identity(xt),
        _ => {
            let mut term = Term::delta(x);
            for k in 2..n {
                // δ ⊗ 1^{⊗ k-1} on top of the chain so far
                let layer = Term::tensor(
                    Term::delta(x),
                    Term::Identity(ObjectType::power(x.factor(), k - 1)),
                );
                term = Term::compose(layer, term).expect("delta_n chain is well-typed");
            }
            term
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Identity(o) => write!(f, "id[{o}]"),
            Term::Swap(a, b) => write!(f, "swap[{a}, {b}]"),
            Term::Cup(x) => write!(f, "eta[{x}]"),
            Term::Cap(x) => write!(f, "cap[{x}]"),
            Term::Delta(x) => write!(f, "delta[{}]", x.name),
            Term::Epsilon(x) => write!(f, "eps[{}]", x.name),
            Term::Box { name, .. } => write!(f, "{name}"),
            Term::Dagger(t) => write!(f, "dg({t})"),
            Term::Conjugate(t) => write!(f, "conj({t})"),
            // printed in diagram order: f ; g means g ∘ f
            Term::Compose(g, t) => write!(f, "({t} ; {g})"),
            Term::Tensor(l, r) => write!(f, "({l} * {r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ClassicalObject {
        ClassicalObject::new("X", 2)
    }

    fn a() -> ObjectType {
        ObjectType::single(Factor::generic("A", 3))
    }

    #[test]
    fn compose_identities() {
        let t = Term::compose(Term::identity(a()), Term::identity(a())).unwrap();
        assert_eq!(t.dom(), a());
        assert_eq!(t.cod(), a());
    }

    #[test]
    fn speciality_composite_types() {
        let t = Term::compose(Term::dagger(Term::delta(&x())), Term::delta(&x())).unwrap();
        assert_eq!(t.dom(), ObjectType::classical(&x()));
        assert_eq!(t.cod(), ObjectType::classical(&x()));
    }

    #[test]
    fn ill_typed_compose_is_rejected() {
        // cod(ε) = I ≠ dom(δ) = X
        let err = Term::compose(Term::delta(&x()), Term::epsilon(&x())).unwrap_err();
        assert!(matches!(err, TermError::TypeMismatch { .. }));
    }

    #[test]
    fn delta_on_generic_is_rejected() {
        let err = Term::delta_on(&Factor::generic("A", 3)).unwrap_err();
        assert!(matches!(err, TermError::NotClassical(_)));
    }

    #[test]
    fn dagger_involution_on_box() {
        let f = Term::boxed("f", a(), a());
        assert_eq!(dagger_pushdown(&Term::dagger(Term::dagger(f.clone()))), f);
    }

    #[test]
    fn dagger_contravariance() {
        let xt = ObjectType::classical(&x());
        let g = Term::boxed("g", xt.clone(), xt.clone());
        let fb = Term::boxed("f", xt.clone(), xt.clone());
        let composed = Term::compose(g.clone(), fb.clone()).unwrap();
        let pushed = dagger_pushdown(&Term::dagger(composed));
        let expected = Term::compose(Term::dagger(fb), Term::dagger(g)).unwrap();
        assert_eq!(pushed, expected);
    }

    #[test]
    fn dagger_of_delta_stays_leaf() {
        let pushed = dagger_pushdown(&Term::dagger(Term::delta(&x())));
        assert_eq!(pushed, Term::dagger(Term::delta(&x())));
    }

    #[test]
    fn dagger_swaps_cups_and_caps() {
        let f = x().factor();
        assert_eq!(
            dagger_pushdown(&Term::dagger(Term::cup(f.clone()))),
            Term::cap(f.clone())
        );
        assert_eq!(
            dagger_pushdown(&Term::dagger(Term::cap(f.clone()))),
            Term::cup(f)
        );
    }

    #[test]
    fn delta_n_types() {
        let x = x();
        let d0 = delta_n(&x, 0);
        assert!(d0.dom().is_unit());
        assert_eq!(d0.cod().len(), 1);
        assert_eq!(delta_n(&x, 1), Term::Identity(ObjectType::classical(&x)));
        for n in 1..6 {
            let dn = delta_n(&x, n);
            assert_eq!(dn.dom().len(), 1, "n={n}");
            assert_eq!(dn.cod().len(), n, "n={n}");
        }
        // δ_3 = (δ ⊗ 1) ∘ δ
        let d3 = delta_n(&x, 3);
        let expected = Term::compose(
            Term::tensor(Term::delta(&x), Term::Identity(ObjectType::classical(&x))),
            Term::delta(&x),
        )
        .unwrap();
        assert_eq!(d3, expected);
    }

    #[test]
    fn classical_fragment_detection() {
        let xo = x();
        let t = Term::compose(Term::dagger(Term::delta(&xo)), Term::delta(&xo)).unwrap();
        assert_eq!(t.classical_object(), Some(xo.clone()));
        let boxed = Term::boxed("f", ObjectType::classical(&xo), ObjectType::classical(&xo));
        assert_eq!(boxed.classical_object(), None);
        let mixed = Term::tensor(Term::delta(&xo), Term::delta(&ClassicalObject::new("Y", 3)));
        assert_eq!(mixed.classical_object(), None);
    }
}
