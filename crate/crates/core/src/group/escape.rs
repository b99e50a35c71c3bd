use serde::{Deserialize, Serialize};

use super::{word_length, GroupElement, GroupSpec};
use crate::error::{HullError, Result};

/// A finite prefix g_1, …, g_M standing in for a sequence g_n → ∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeSequence {
    pub terms: Vec<GroupElement>,
    /// Unit vector η ∈ S^{N−1}, lattice groups only.
    pub claimed_direction: Option<Vec<f64>>,
}

impl EscapeSequence {
    pub fn new(terms: Vec<GroupElement>) -> Self {
        EscapeSequence {
            terms,
            claimed_direction: None,
        }
    }

    /// Attaches a claimed direction, normalized to unit length.
    pub fn with_direction(mut self, eta: &[f64]) -> Result<Self> {
        let group = self
            .group()
            .ok_or_else(|| HullError::Domain("empty sequence".into()))?;
        let GroupSpec::Lattice(n) = group else {
            return Err(HullError::DirectionsUndefined);
        };
        if eta.len() != n as usize {
            return Err(HullError::Domain("direction has wrong dimension".into()));
        }
        let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HullError::Domain("direction must be nonzero".into()));
        }
        self.claimed_direction = Some(eta.iter().map(|x| x / norm).collect());
        Ok(self)
    }

    /// g_n = offset + n·step for n = start, …, start+count−1.
    pub fn arithmetic(offset: GroupElement, step: GroupElement, start: u64, count: usize) -> Self {
        let mut g = offset;
        for _ in 0..start {
            g = g + step;
        }
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            terms.push(g);
            g = g + step;
        }
        EscapeSequence::new(terms)
    }

    pub fn group(&self) -> Option<GroupSpec> {
        self.terms.first().map(|g| g.group())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if every term past `cutoff` has word length > `radius`.
    pub fn escapes_beyond(&self, radius: u32, cutoff: usize) -> Result<bool> {
        for g in self.terms.iter().skip(cutoff) {
            if g.word_length_lower_bound() > radius as u64 {
                continue;
            }
            if word_length(g)? <= radius {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Direction of the last term, the finite-scale stand-in for a limit
    /// point of g_n/|g_n| on the sphere.
    pub fn terminal_direction(&self) -> Result<Vec<f64>> {
        let last = self
            .terms
            .last()
            .ok_or_else(|| HullError::Domain("empty sequence".into()))?;
        let norm = last.euclidean_norm()?;
        if norm == 0.0 {
            return Err(HullError::Domain("terminal term is the identity".into()));
        }
        Ok(last.coords().iter().map(|&x| x as f64 / norm).collect())
    }
}

/// The cap U = {ξ ∈ S^{N−1} : ∠(ξ, η) ≤ half_angle} around a unit vector η.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularCap {
    pub center: Vec<f64>,
    pub half_angle: f64,
}

impl AngularCap {
    pub fn new(center: &[f64], half_angle: f64) -> Result<Self> {
        let norm = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HullError::Domain("cap center must be nonzero".into()));
        }
        Ok(AngularCap {
            center: center.iter().map(|x| x / norm).collect(),
            half_angle,
        })
    }

    pub fn contains_direction(&self, unit: &[f64]) -> bool {
        let dot: f64 = unit.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0).acos() <= self.half_angle
    }
}

/// For each term k: whether k ∈ W_{R,U}, i.e. |k| > R and k/|k| ∈ U.
pub fn direction_memberships(seq: &EscapeSequence, radius: f64, cap: &AngularCap) -> Result<Vec<bool>> {
    seq.terms
        .iter()
        .map(|k| {
            let GroupSpec::Lattice(n) = k.group() else {
                return Err(HullError::DirectionsUndefined);
            };
            if cap.center.len() != n as usize {
                return Err(HullError::Domain("cap dimension mismatch".into()));
            }
            let norm = k.euclidean_norm()?;
            if norm <= radius {
                return Ok(false);
            }
            let unit: Vec<f64> = k.coords().iter().map(|&x| x as f64 / norm).collect();
            Ok(cap.contains_direction(&unit))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn z2(x: i64, y: i64) -> GroupElement {
        GroupElement::lattice(&[x, y]).unwrap()
    }

    #[test]
    fn neighborhoods_at_infinity() {
        let cap = AngularCap::new(&[1.0, 0.0], PI / 8.0).unwrap();
        let seq = EscapeSequence::new(vec![z2(10, 0), z2(0, 10), z2(3, 4)]);
        assert_eq!(direction_memberships(&seq, 5.0, &cap).unwrap(), vec![true, false, false]);
        let wide = AngularCap::new(&[0.6, 0.8], PI).unwrap();
        let only = EscapeSequence::new(vec![z2(3, 4)]);
        assert_eq!(direction_memberships(&only, 5.0, &wide).unwrap(), vec![false]);
    }

    #[test]
    fn heisenberg_has_no_directions() {
        let seq = EscapeSequence::new(vec![GroupElement::heisenberg(5, 0, 0)]);
        let cap = AngularCap::new(&[1.0, 0.0, 0.0], 0.1).unwrap();
        assert_eq!(direction_memberships(&seq, 1.0, &cap), Err(HullError::DirectionsUndefined));
        assert_eq!(seq.with_direction(&[1.0, 0.0, 0.0]).unwrap_err(), HullError::DirectionsUndefined);
    }

    #[test]
    fn escaping() {
        let seq = EscapeSequence::arithmetic(GroupElement::z(0), GroupElement::z(3), 1, 10);
        assert_eq!(seq.terms[0], GroupElement::z(3));
        assert!(seq.escapes_beyond(20, 7).unwrap());
        assert!(!seq.escapes_beyond(20, 5).unwrap());
        let far = EscapeSequence::arithmetic(
            GroupSpec::Heisenberg.identity(),
            GroupElement::heisenberg(1, 0, 0),
            30,
            3,
        );
        // beyond the shared table, decided by the lower bound alone
        assert!(far.escapes_beyond(25, 0).unwrap());
    }

    #[test]
    fn claimed_directions_are_members_eventually() {
        let seq = EscapeSequence::arithmetic(z2(0, 3), z2(5, 0), 1, 20)
            .with_direction(&[2.0, 0.0])
            .unwrap();
        assert_eq!(seq.claimed_direction.as_deref(), Some(&[1.0, 0.0][..]));
        let cap = AngularCap::new(seq.claimed_direction.as_ref().unwrap(), PI / 8.0).unwrap();
        let member = direction_memberships(&seq, 10.0, &cap).unwrap();
        assert!(member[5..].iter().all(|&b| b));
    }
}
