use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{ball_elements, GroupElement, GroupSpec};
use crate::error::{HullError, Result};

/// Upper bound on the number of elements in any enumerated window.
pub const MAX_WINDOW_ELEMENTS: usize = 1 << 21;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowDescriptor {
    Ball {
        radius: u32,
    },
    /// The box {−w_1..w_1} × … × {−w_N..w_N}.
    Box {
        halfwidths: Vec<u64>,
    },
    /// The box [lo_1, hi_1] × … × [lo_N, hi_N]; used for even-length intervals.
    Range {
        lo: Vec<i64>,
        hi: Vec<i64>,
    },
    Translate {
        base: Box<WindowDescriptor>,
        by: GroupElement,
    },
}

/// A finite index set of group elements in canonical (lexicographic) order.
#[derive(Clone, Debug)]
pub struct Window {
    group: GroupSpec,
    descriptor: WindowDescriptor,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for Window {}

impl Hash for Window {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.elements.hash(state);
    }
}

impl Window {
    fn from_parts(group: GroupSpec, descriptor: WindowDescriptor, mut elements: Vec<GroupElement>) -> Self {
        elements.sort();
        elements.dedup();
        let index = elements.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        Window {
            group,
            descriptor,
            elements,
            index,
        }
    }

    pub fn ball(group: GroupSpec, radius: u32) -> Result<Self> {
        let elements = ball_elements(group, radius)?;
        Ok(Self::from_parts(group, WindowDescriptor::Ball { radius }, elements))
    }

    pub fn centered_box(group: GroupSpec, halfwidths: &[u64]) -> Result<Self> {
        let lo: Vec<i64> = halfwidths.iter().map(|&w| -(w as i64)).collect();
        let hi: Vec<i64> = halfwidths.iter().map(|&w| w as i64).collect();
        let mut w = Self::range(group, &lo, &hi)?;
        w.descriptor = WindowDescriptor::Box {
            halfwidths: halfwidths.to_vec(),
        };
        Ok(w)
    }

    pub fn range(group: GroupSpec, lo: &[i64], hi: &[i64]) -> Result<Self> {
        let GroupSpec::Lattice(n) = group else {
            return Err(HullError::Domain("box windows exist only on lattices".into()));
        };
        let n = n as usize;
        if lo.len() != n || hi.len() != n {
            return Err(HullError::Domain(format!("box needs {n} bounds per side")));
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(HullError::Domain("empty box".into()));
        }
        let size: u128 = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (b - a + 1) as u128)
            .product();
        if size > MAX_WINDOW_ELEMENTS as u128 {
            return Err(HullError::Resource(format!("box has {size} elements")));
        }
        let mut elements = Vec::with_capacity(size as usize);
        let mut cur = lo.to_vec();
        loop {
            elements.push(group.element(&cur)?);
            // odometer, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    return Ok(Self::from_parts(
                        group,
                        WindowDescriptor::Range {
                            lo: lo.to_vec(),
                            hi: hi.to_vec(),
                        },
                        elements,
                    ));
                }
                axis -= 1;
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = lo[axis];
            }
        }
    }

    /// The interval {0, …, len−1} ⊂ ℤ.
    pub fn interval(len: u64) -> Result<Self> {
        if len == 0 {
            return Err(HullError::Domain("empty interval".into()));
        }
        Self::range(GroupSpec::Lattice(1), &[0], &[len as i64 - 1])
    }

    /// The cube {0, …, side−1}^N, or the ball of radius `side` on H₃(ℤ).
    pub fn block(group: GroupSpec, side: u64) -> Result<Self> {
        match group {
            GroupSpec::Lattice(n) => {
                if side == 0 {
                    return Err(HullError::Domain("empty block".into()));
                }
                let lo = vec![0i64; n as usize];
                let hi = vec![side as i64 - 1; n as usize];
                Self::range(group, &lo, &hi)
            }
            GroupSpec::Heisenberg => Self::ball(group, side as u32),
        }
    }

    pub fn from_descriptor(group: GroupSpec, d: &WindowDescriptor) -> Result<Self> {
        match d {
            WindowDescriptor::Ball { radius } => Self::ball(group, *radius),
            WindowDescriptor::Box { halfwidths } => Self::centered_box(group, halfwidths),
            WindowDescriptor::Range { lo, hi } => Self::range(group, lo, hi),
            WindowDescriptor::Translate { base, by } => Self::from_descriptor(group, base)?.translate(by),
        }
    }

    /// {w + g : w ∈ W}.
    pub fn translate(&self, g: &GroupElement) -> Result<Self> {
        if g.group() != self.group {
            return Err(HullError::GroupMismatch("translation by foreign element".into()));
        }
        let elements = self.elements.iter().map(|w| *w + *g).collect();
        Ok(Self::from_parts(
            self.group,
            WindowDescriptor::Translate {
                base: Box::new(self.descriptor.clone()),
                by: *g,
            },
            elements,
        ))
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn descriptor(&self) -> &WindowDescriptor {
        &self.descriptor
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// Axis-aligned bounds if this window is a full lattice box.
    pub fn box_bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let GroupSpec::Lattice(n) = self.group else {
            return None;
        };
        let n = n as usize;
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for g in &self.elements {
            for (i, &c) in g.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let size: u128 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as u128).product();
        (size == self.elements.len() as u128).then_some((lo, hi))
    }

    /// True for a window of consecutive integers in ℤ.
    pub fn is_interval(&self) -> bool {
        matches!(self.group, GroupSpec::Lattice(1)) && self.box_bounds().is_some()
    }
}

/// JSON form `{"group": …, "n": …, "window": {…}}` for a window on a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    #[serde(flatten)]
    pub group: GroupSpec,
    pub window: WindowDescriptor,
}
