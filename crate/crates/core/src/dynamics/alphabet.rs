use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};

/// Index of a letter in its [`Alphabet`].
pub type Letter = u8;

/// Finite ordered alphabet with a real value attached to each letter.
///
/// The values feed potentials and the product metric; letters are compared
/// by index only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    letters: Vec<String>,
    values: Vec<f64>,
}

impl Alphabet {
    pub fn new(letters: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if letters.is_empty() || letters.len() > Letter::MAX as usize {
            return Err(HullError::Domain(format!(
                "alphabet size {} out of range",
                letters.len()
            )));
        }
        if letters.len() != values.len() {
            return Err(HullError::Domain("one value per letter required".into()));
        }
        for (i, l) in letters.iter().enumerate() {
            if letters[i + 1..].contains(l) {
                return Err(HullError::Domain(format!("duplicate letter {l:?}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HullError::Domain("letter values must be finite".into()));
        }
        Ok(Alphabet { letters, values })
    }

    pub fn from_names(names: &[&str], values: &[f64]) -> Result<Self> {
        Self::new(names.iter().map(|s| s.to_string()).collect(), values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|l| l == name).map(|i| i as Letter)
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.letters[l as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn value(&self, l: Letter) -> f64 {
        self.values[l as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.letters.clone(), values)
    }

    /// l = max value − min value, the range of |ω_k − ν_k|.
    pub fn value_span(&self) -> f64 {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    pub fn spell(&self, word: &[Letter]) -> String {
        let single = self.letters.iter().all(|l| l.chars().count() == 1);
        let parts: Vec<&str> = word.iter().map(|&l| self.name(l)).collect();
        if single {
            parts.concat()
        } else {
            parts.join(",")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        let a = Alphabet::from_names(&["-1", "1"], &[-1.0, 1.0]).unwrap();
        assert_eq!(a.letter("1"), Some(1));
        assert_eq!(a.value(0), -1.0);
        assert_eq!(a.value_span(), 2.0);
        assert_eq!(a.spell(&[0, 1, 1]), "-1,1,1");
        let ab = Alphabet::from_names(&["a", "b"], &[0.0, 1.0]).unwrap();
        assert_eq!(ab.spell(&[0, 1, 0]), "aba");
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(Alphabet::from_names(&["a", "a"], &[0.0, 1.0]).is_err());
        assert!(Alphabet::from_names(&["a"], &[0.0, 1.0]).is_err());
        assert!(Alphabet::from_names(&["a"], &[f64::NAN]).is_err());
    }
}
