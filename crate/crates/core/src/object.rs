//! Object types of the diagram language: flat lists of base factors
//! under a strict monoidal product, with the empty list as the unit.

use serde::{Deserialize, Serialize};

/// A classical base object: carries copying and deleting structure and
/// is self-dual.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassicalObject {
    pub name: String,
    pub dim: usize,
}

impl ClassicalObject {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        assert!(dim >= 1, "object dimension must be positive");
        ClassicalObject {
            name: name.into(),
            dim,
        }
    }

    pub fn factor(&self) -> Factor {
        Factor::Classical {
            name: self.name.clone(),
            dim: self.dim,
        }
    }
}

/// One base factor of an object type.
///
/// Generic factors carry an explicit dual flag; classical factors are
/// self-dual and never do.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    Generic {
        name: String,
        dim: usize,
        dual: bool,
    },
    Classical {
        name: String,
        dim: usize,
    },
}

impl Factor {
    pub fn generic(name: impl Into<String>, dim: usize) -> Self {
        assert!(dim >= 1, "object dimension must be positive");
        Factor::Generic {
            name: name.into(),
            dim,
            dual: false,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Generic { dim, .. } | Factor::Classical { dim, .. } => *dim,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Factor::Generic { name, .. } | Factor::Classical { name, .. } => name,
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Factor::Classical { .. })
    }

    /// Dualisation: flips the flag on generic factors, identity on
    /// classical ones.
    pub fn dual(&self) -> Factor {
        match self {
            Factor::Generic { name, dim, dual } => Factor::Generic {
                name: name.clone(),
                dim: *dim,
                dual: !dual,
            },
            classical => classical.clone(),
        }
    }

    pub fn as_classical(&self) -> Option<ClassicalObject> {
        match self {
            Factor::Classical { name, dim } => Some(ClassicalObject {
                name: name.clone(),
                dim: *dim,
            }),
            Factor::Generic { .. } => None,
        }
    }
}

impl std::fmt::Display for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factor::Generic {
                name, dual: false, ..
            } => write!(f, "{name}"),
            Factor::Generic {
                name, dual: true, ..
            } => write!(f, "{name}*"),
            Factor::Classical { name, .. } => write!(f, "{name}"),
        }
    }
}

/// An object of the category: an ordered list of base factors. The
/// monoidal product is concatenation and the empty list is the unit I.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ObjectType {
    pub factors: Vec<Factor>,
}

impl ObjectType {
    pub fn unit() -> Self {
        ObjectType {
            factors: Vec::new(),
        }
    }

    pub fn single(f: Factor) -> Self {
        ObjectType { factors: vec![f] }
    }

    pub fn classical(x: &ClassicalObject) -> Self {
        Self::single(x.factor())
    }

    pub fn power(f: Factor, n: usize) -> Self {
        ObjectType {
            factors: vec![f; n],
        }
    }

    pub fn tensor(&self, other: &ObjectType) -> ObjectType {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        ObjectType { factors }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    /// Componentwise dual. Factor order is kept; the symmetry of the
    /// ambient category justifies the in-place convention.
    pub fn dual(&self) -> ObjectType {
        ObjectType {
            factors: self.factors.iter().map(Factor::dual).collect(),
        }
    }
}

impl std::fmt::Display for ObjectType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}
