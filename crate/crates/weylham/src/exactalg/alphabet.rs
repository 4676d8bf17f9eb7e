//! Ordered symbol alphabets shared by polynomials.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::ExactError;

#[derive(Debug)]
struct Inner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// An ordered list of symbol names (phase variables, parameters, time
/// symbols). Names are unique and the order is fixed for the lifetime of
/// any polynomial built over the alphabet: exponent vectors are indexed
/// positionally.
#[derive(Clone)]
pub struct Alphabet(Arc<Inner>);

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, ExactError> {
        let mut index = HashMap::new();
        let mut owned = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref().to_string();
            if index.insert(n.clone(), i).is_some() {
                return Err(ExactError::AlphabetMismatch(format!(
                    "duplicate symbol `{n}`"
                )));
            }
            owned.push(n);
        }
        Ok(Alphabet(Arc::new(Inner {
            names: owned,
            index,
        })))
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, ExactError> {
        self.index_of(name)
            .ok_or_else(|| ExactError::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.index.contains_key(name)
    }

    /// Fast identity check; falls back to name-list equality so that two
    /// independently constructed but identical alphabets are compatible.
    pub fn same_as(&self, other: &Alphabet) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.names == other.0.names
    }

    /// The union of two alphabets, keeping `self`'s order and appending
    /// any new symbols of `other` in their own order.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        if self.same_as(other) {
            return self.clone();
        }
        let mut names = self.0.names.clone();
        for n in &other.0.names {
            if !self.contains(n) {
                names.push(n.clone());
            }
        }
        Alphabet::new(&names).expect("union preserves uniqueness")
    }

    /// Extends with the listed symbols (ignoring ones already present).
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Alphabet {
        let mut names = self.0.names.clone();
        for n in extra {
            if !self.contains(n.as_ref()) {
                names.push(n.as_ref().to_string());
            }
        }
        Alphabet::new(&names).expect("extend preserves uniqueness")
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{:?}", self.0.names)
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}
impl Eq for Alphabet {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        assert!(Alphabet::new(&["x", "y", "x"]).is_err());
    }

    #[test]
    fn union_keeps_left_order() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let b = Alphabet::new(&["z", "y"]).unwrap();
        let u = a.union(&b);
        assert_eq!(u.names(), &["x", "y", "z"]);
    }
}
