//! Exact arithmetic on the lattices ℤ^N and the discrete Heisenberg group H₃(ℤ).
//!
//! Both groups are written additively: `g + h` is the group law. On H₃(ℤ) the
//! element `(a, b, c)` stands for the unipotent matrix
//!
//! ```text
//! | 1 a c |
//! | 0 1 b |
//! | 0 0 1 |
//! ```
//!
//! and `g + h` is the matrix product `g · h` in that order, which in
//! coordinates reads `(a+a', b+b', c+c'+a·b')`.

mod escape;
mod metric;
mod window;

pub use escape::{direction_memberships, AngularCap, EscapeSequence};
pub use metric::{ball_elements, shells, word_length, WordMetric, HEISENBERG_SEARCH_RADIUS};
pub use window::{Window, WindowDescriptor, WindowSpec, MAX_WINDOW_ELEMENTS};

use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HullError, Result};

/// Largest supported lattice rank.
pub const MAX_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupSpec {
    Lattice(u8),
    Heisenberg,
}

impl GroupSpec {
    pub fn lattice(rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(HullError::Domain(format!(
                "lattice rank must lie in 1..={MAX_RANK}, got {rank}"
            )));
        }
        Ok(GroupSpec::Lattice(rank as u8))
    }

    pub fn heisenberg() -> Self {
        GroupSpec::Heisenberg
    }

    /// Number of integer coordinates carried by an element.
    pub fn coordinate_count(&self) -> usize {
        match self {
            GroupSpec::Lattice(n) => *n as usize,
            GroupSpec::Heisenberg => 3,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, GroupSpec::Lattice(_))
    }

    pub fn is_abelian(&self) -> bool {
        self.is_lattice()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            group: *self,
            coords: [0; MAX_RANK],
        }
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.coordinate_count() {
            return Err(HullError::Domain(format!(
                "{} expects {} coordinates, got {}",
                self,
                self.coordinate_count(),
                coords.len()
            )));
        }
        let mut c = [0i64; MAX_RANK];
        c[..coords.len()].copy_from_slice(coords);
        Ok(GroupElement {
            group: *self,
            coords: c,
        })
    }

    /// Standard generators: the basis vectors e_j, or the two Heisenberg
    /// generators (1,0,0) and (0,1,0).
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            GroupSpec::Lattice(n) => (0..*n as usize)
                .map(|j| {
                    let mut c = [0i64; MAX_RANK];
                    c[j] = 1;
                    GroupElement {
                        group: *self,
                        coords: c,
                    }
                })
                .collect(),
            GroupSpec::Heisenberg => vec![
                GroupElement::heisenberg(1, 0, 0),
                GroupElement::heisenberg(0, 1, 0),
            ],
        }
    }

    /// Generators together with their inverses, in canonical order.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = self
            .generators()
            .into_iter()
            .flat_map(|g| [g, -g])
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Checks the generator invariants: pairwise distinct, none trivial, and
    /// balls keep growing up to `radius`.
    pub fn validate(&self, radius: u32) -> Result<()> {
        let gens = self.generators();
        let id = self.identity();
        for (i, g) in gens.iter().enumerate() {
            if *g == id {
                return Err(HullError::Domain("generator equals identity".into()));
            }
            if gens[i + 1..].contains(g) {
                return Err(HullError::Domain("generators not distinct".into()));
            }
        }
        let metric = WordMetric::new(*self, radius)?;
        for r in 0..radius {
            if metric.ball_size(r + 1) <= metric.ball_size(r) {
                return Err(HullError::Domain(format!("ball growth stalled at radius {r}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Lattice(n) => write!(f, "Z^{n}"),
            GroupSpec::Heisenberg => write!(f, "H3(Z)"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "snake_case")]
enum GroupSpecRepr {
    Lattice { n: usize },
    Heisenberg,
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GroupSpec::Lattice(n) => GroupSpecRepr::Lattice { n: *n as usize },
            GroupSpec::Heisenberg => GroupSpecRepr::Heisenberg,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GroupSpecRepr::deserialize(d)? {
            GroupSpecRepr::Lattice { n } => {
                GroupSpec::lattice(n).map_err(serde::de::Error::custom)
            }
            GroupSpecRepr::Heisenberg => Ok(GroupSpec::Heisenberg),
        }
    }
}

/// An exact group element. Ordering is lexicographic on coordinates, which
/// fixes the canonical row/column order of every finite section.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    group: GroupSpec,
    coords: [i64; MAX_RANK],
}

impl GroupElement {
    pub fn lattice(coords: &[i64]) -> Result<Self> {
        GroupSpec::lattice(coords.len())?.element(coords)
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        GroupElement {
            group: GroupSpec::Heisenberg,
            coords: [a, b, c, 0],
        }
    }

    /// Shorthand for an element of ℤ.
    pub fn z(n: i64) -> Self {
        GroupElement {
            group: GroupSpec::Lattice(1),
            coords: [n, 0, 0, 0],
        }
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.group.coordinate_count()]
    }

    pub fn is_identity(&self) -> bool {
        self.coords == [0; MAX_RANK]
    }

    /// Checked group law.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.group != other.group {
            return Err(HullError::GroupMismatch(format!(
                "cannot compose elements of {} and {}",
                self.group, other.group
            )));
        }
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &GroupElement) -> GroupElement {
        let mut c = [0i64; MAX_RANK];
        match self.group {
            GroupSpec::Lattice(_) => {
                for (i, slot) in c.iter_mut().enumerate() {
                    *slot = self.coords[i] + other.coords[i];
                }
            }
            GroupSpec::Heisenberg => {
                let [a, b, cc, _] = self.coords;
                let [a2, b2, c2, _] = other.coords;
                c[0] = a + a2;
                c[1] = b + b2;
                c[2] = cc + c2 + a * b2;
            }
        }
        GroupElement {
            group: self.group,
            coords: c,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let mut c = [0i64; MAX_RANK];
        match self.group {
            GroupSpec::Lattice(_) => {
                for (i, slot) in c.iter_mut().enumerate() {
                    *slot = -self.coords[i];
                }
            }
            GroupSpec::Heisenberg => {
                let [a, b, cc, _] = self.coords;
                c[0] = -a;
                c[1] = -b;
                c[2] = a * b - cc;
            }
        }
        GroupElement {
            group: self.group,
            coords: c,
        }
    }

    /// Euclidean norm of the coordinate vector (lattice only).
    pub fn euclidean_norm(&self) -> Result<f64> {
        match self.group {
            GroupSpec::Lattice(_) => Ok(self
                .coords()
                .iter()
                .map(|&x| (x as f64) * (x as f64))
                .sum::<f64>()
                .sqrt()),
            GroupSpec::Heisenberg => Err(HullError::DirectionsUndefined),
        }
    }

    /// A cheap lower bound on the word length, valid without a search table.
    pub fn word_length_lower_bound(&self) -> u64 {
        match self.group {
            GroupSpec::Lattice(_) => self.coords().iter().map(|x| x.unsigned_abs()).sum(),
            GroupSpec::Heisenberg => {
                // |a|+|b| via the abelianization; a word of length L reaches
                // |c| ≤ L²/4, so L ≥ 2·sqrt|c|.
                let ab = self.coords[0].unsigned_abs() + self.coords[1].unsigned_abs();
                let c = self.coords[2].unsigned_abs() as f64;
                let from_c = (2.0 * c.sqrt()).ceil() as u64;
                ab.max(from_c.saturating_sub(1))
            }
        }
    }
}

impl Add for GroupElement {
    type Output = GroupElement;

    /// Group law. Panics on mixed groups; use [`GroupElement::compose`] for a
    /// checked variant.
    fn add(self, rhs: GroupElement) -> GroupElement {
        assert_eq!(self.group, rhs.group, "mixed group elements");
        self.compose_unchecked(&rhs)
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        self.inverse()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        match self.group {
            GroupSpec::Heisenberg => write!(f, "H({})", parts.join(",")),
            GroupSpec::Lattice(_) => write!(f, "({})", parts.join(",")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ElementRepr {
    Lattice(Vec<i64>),
    Heisenberg([i64; 3]),
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.group {
            GroupSpec::Lattice(_) => ElementRepr::Lattice(self.coords().to_vec()),
            GroupSpec::Heisenberg => {
                ElementRepr::Heisenberg([self.coords[0], self.coords[1], self.coords[2]])
            }
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ElementRepr::deserialize(d)? {
            ElementRepr::Lattice(c) => GroupElement::lattice(&c).map_err(serde::de::Error::custom),
            ElementRepr::Heisenberg([a, b, c]) => Ok(GroupElement::heisenberg(a, b, c)),
        }
    }
}

/// Checked composition `g + h`.
pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    g.compose(h)
}

pub fn inverse(g: &GroupElement) -> GroupElement {
    g.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 3×3 integer matrix product, the oracle for the Heisenberg law.
    fn mat(a: i64, b: i64, c: i64) -> [[i64; 3]; 3] {
        [[1, a, c], [0, 1, b], [0, 0, 1]]
    }

    fn matmul(x: [[i64; 3]; 3], y: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
        let mut out = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    }

    fn unpack(m: [[i64; 3]; 3]) -> GroupElement {
        assert_eq!((m[0][0], m[1][1], m[2][2], m[1][0], m[2][0], m[2][1]), (1, 1, 1, 0, 0, 0));
        GroupElement::heisenberg(m[0][1], m[1][2], m[0][2])
    }

    #[test]
    fn lattice_sum() {
        let g = GroupElement::lattice(&[1, 0]).unwrap();
        let h = GroupElement::lattice(&[0, 1]).unwrap();
        assert_eq!(compose(&g, &h).unwrap(), GroupElement::lattice(&[1, 1]).unwrap());
    }

    #[test]
    fn heisenberg_products_match_matrices() {
        let x = GroupElement::heisenberg(1, 0, 0);
        let y = GroupElement::heisenberg(0, 1, 0);
        assert_eq!(x + y, GroupElement::heisenberg(1, 1, 1));
        assert_eq!(y + x, GroupElement::heisenberg(1, 1, 0));
        assert_eq!(x + y, unpack(matmul(mat(1, 0, 0), mat(0, 1, 0))));
        assert_eq!(y + x, unpack(matmul(mat(0, 1, 0), mat(1, 0, 0))));
        assert_ne!(x + y, y + x);
    }

    #[test]
    fn inverses() {
        assert_eq!(
            GroupElement::lattice(&[3, -2]).unwrap().inverse(),
            GroupElement::lattice(&[-3, 2]).unwrap()
        );
        assert_eq!(
            GroupElement::heisenberg(1, 1, 1).inverse(),
            GroupElement::heisenberg(-1, -1, 0)
        );
        let id = GroupSpec::Heisenberg.identity();
        assert_eq!(id.inverse(), id);
    }

    #[test]
    fn mixed_groups_are_rejected() {
        let g = GroupElement::z(1);
        let h = GroupElement::heisenberg(1, 0, 0);
        assert!(matches!(compose(&g, &h), Err(HullError::GroupMismatch(_))));
        let g2 = GroupElement::lattice(&[1, 0]).unwrap();
        assert!(compose(&g, &g2).is_err());
    }

    #[test]
    fn generators_are_valid() {
        GroupSpec::lattice(2).unwrap().validate(6).unwrap();
        GroupSpec::Heisenberg.validate(6).unwrap();
        assert_eq!(GroupSpec::Heisenberg.symmetric_generators().len(), 4);
    }

    #[test]
    fn element_serde() {
        let g = GroupElement::heisenberg(1, -2, 3);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"heisenberg":[1,-2,3]}"#);
        assert_eq!(serde_json::from_str::<GroupElement>(&s).unwrap(), g);
        let spec = serde_json::to_string(&GroupSpec::Lattice(2)).unwrap();
        assert_eq!(spec, r#"{"group":"lattice","n":2}"#);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn heis() -> impl Strategy<Value = GroupElement> {
            (-50i64..50, -50i64..50, -500i64..500).prop_map(|(a, b, c)| GroupElement::heisenberg(a, b, c))
        }

        fn z3() -> impl Strategy<Value = GroupElement> {
            prop::array::uniform3(-100i64..100).prop_map(|c| GroupElement::lattice(&c).unwrap())
        }

        proptest! {
            #[test]
            fn heisenberg_associative(g in heis(), h in heis(), k in heis()) {
                prop_assert_eq!((g + h) + k, g + (h + k));
                prop_assert!((g + g.inverse()).is_identity());
                prop_assert!((g.inverse() + g).is_identity());
                let m = matmul(matmul(mat(g.coords[0], g.coords[1], g.coords[2]),
                                      mat(h.coords[0], h.coords[1], h.coords[2])),
                               mat(k.coords[0], k.coords[1], k.coords[2]));
                prop_assert_eq!(unpack(m), g + h + k);
            }

            #[test]
            fn lattice_associative(g in z3(), h in z3(), k in z3()) {
                prop_assert_eq!((g + h) + k, g + (h + k));
                prop_assert_eq!(g + h, h + g);
                prop_assert!((g + (-g)).is_identity());
            }
        }
    }
}
