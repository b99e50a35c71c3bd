use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{GroupElement, GroupSpec, MAX_RANK};
use crate::error::{HullError, Result};

/// Radius of the shared breadth-first table used for Heisenberg word lengths.
pub const HEISENBERG_SEARCH_RADIUS: u32 = 16;

/// Largest radius for which a Heisenberg search table may be built.
const HEISENBERG_RADIUS_LIMIT: u32 = 28;

/// Word lengths over generators-and-inverses, tabulated by breadth-first
/// search of the Cayley graph out to a fixed radius.
#[derive(Debug)]
pub struct WordMetric {
    group: GroupSpec,
    radius: u32,
    lengths: HashMap<GroupElement, u32>,
    spheres: Vec<Vec<GroupElement>>,
}

impl WordMetric {
    pub fn new(group: GroupSpec, radius: u32) -> Result<Self> {
        if let GroupSpec::Heisenberg = group {
            if radius > HEISENBERG_RADIUS_LIMIT {
                return Err(HullError::Resource(format!(
                    "Heisenberg search radius {radius} over limit {HEISENBERG_RADIUS_LIMIT}"
                )));
            }
        } else {
            let size = lattice_ball_size(group.coordinate_count(), radius);
            if size > super::MAX_WINDOW_ELEMENTS as u128 {
                return Err(HullError::Resource(format!(
                    "ball of radius {radius} in {group} has {size} elements"
                )));
            }
        }
        let steps = group.symmetric_generators();
        let id = group.identity();
        let mut lengths = HashMap::new();
        lengths.insert(id, 0u32);
        let mut spheres = vec![vec![id]];
        for r in 1..=radius {
            let mut next = Vec::new();
            for g in &spheres[r as usize - 1] {
                for s in &steps {
                    let h = *g + *s;
                    if let std::collections::hash_map::Entry::Vacant(e) = lengths.entry(h) {
                        e.insert(r);
                        next.push(h);
                    }
                }
            }
            next.sort();
            spheres.push(next);
        }
        Ok(WordMetric {
            group,
            radius,
            lengths,
            spheres,
        })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn word_length(&self, g: &GroupElement) -> Result<u32> {
        if g.group() != self.group {
            return Err(HullError::GroupMismatch(format!(
                "element of {} measured in {}",
                g.group(),
                self.group
            )));
        }
        self.lengths
            .get(g)
            .copied()
            .ok_or(HullError::RadiusExceeded {
                radius: self.radius,
            })
    }

    pub fn sphere(&self, r: u32) -> &[GroupElement] {
        &self.spheres[r as usize]
    }

    pub fn ball_size(&self, r: u32) -> usize {
        self.spheres[..=r as usize].iter().map(Vec::len).sum()
    }

    pub fn ball(&self, r: u32) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = self.spheres[..=r as usize]
            .iter()
            .flatten()
            .copied()
            .collect();
        out.sort();
        out
    }
}

fn heisenberg_cache() -> &'static Mutex<Option<Arc<WordMetric>>> {
    static CACHE: OnceLock<Mutex<Option<Arc<WordMetric>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(None))
}

/// Shared Heisenberg table of at least the given radius.
fn heisenberg_metric(radius: u32) -> Result<Arc<WordMetric>> {
    let mut guard = heisenberg_cache().lock().expect("metric cache poisoned");
    if let Some(m) = guard.as_ref() {
        if m.radius >= radius {
            return Ok(Arc::clone(m));
        }
    }
    let m = Arc::new(WordMetric::new(GroupSpec::Heisenberg, radius)?);
    *guard = Some(Arc::clone(&m));
    Ok(m)
}

/// Word length of `g`. Closed form (ℓ¹ norm) on lattices; table lookup on
/// H₃(ℤ) with [`HullError::RadiusExceeded`] past the shared search radius.
pub fn word_length(g: &GroupElement) -> Result<u32> {
    match g.group() {
        GroupSpec::Lattice(_) => Ok(g.coords().iter().map(|x| x.unsigned_abs()).sum::<u64>() as u32),
        GroupSpec::Heisenberg => {
            if g.word_length_lower_bound() > HEISENBERG_SEARCH_RADIUS as u64 {
                return Err(HullError::RadiusExceeded {
                    radius: HEISENBERG_SEARCH_RADIUS,
                });
            }
            heisenberg_metric(HEISENBERG_SEARCH_RADIUS)?.word_length(g)
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// |{k ∈ ℤ^N : |k|₁ = r}|.
pub(crate) fn lattice_sphere_size(rank: usize, r: u64) -> u128 {
    if r == 0 {
        return 1;
    }
    (1..=rank.min(r as usize) as u64)
        .map(|i| (1u128 << i) * binomial(rank as u64, i) * binomial(r - 1, i - 1))
        .sum()
}

pub(crate) fn lattice_ball_size(rank: usize, r: u32) -> u128 {
    (0..=r as u64).map(|j| lattice_sphere_size(rank, j)).sum()
}

fn lattice_ball(rank: usize, r: u32) -> Vec<GroupElement> {
    fn rec(dim: usize, rank: usize, budget: i64, cur: &mut [i64; MAX_RANK], out: &mut Vec<GroupElement>) {
        if dim == rank {
            out.push(GroupElement {
                group: GroupSpec::Lattice(rank as u8),
                coords: *cur,
            });
            return;
        }
        for x in -budget..=budget {
            cur[dim] = x;
            rec(dim + 1, rank, budget - x.abs(), cur, out);
        }
        cur[dim] = 0;
    }
    let mut out = Vec::new();
    rec(0, rank, r as i64, &mut [0; MAX_RANK], &mut out);
    out
}

/// All elements of word length ≤ r, in canonical (lexicographic) order.
pub fn ball_elements(group: GroupSpec, r: u32) -> Result<Vec<GroupElement>> {
    match group {
        GroupSpec::Lattice(n) => {
            let size = lattice_ball_size(n as usize, r);
            if size > super::MAX_WINDOW_ELEMENTS as u128 {
                return Err(HullError::Resource(format!(
                    "ball of radius {r} in {group} has {size} elements"
                )));
            }
            // lexicographic by construction
            Ok(lattice_ball(n as usize, r))
        }
        GroupSpec::Heisenberg => {
            let m = heisenberg_metric(r.max(HEISENBERG_SEARCH_RADIUS))?;
            let ball = m.ball(r);
            if ball.len() > super::MAX_WINDOW_ELEMENTS {
                return Err(HullError::Resource(format!(
                    "ball of radius {r} in {group} has {} elements",
                    ball.len()
                )));
            }
            Ok(ball)
        }
    }
}

/// The shells 𝒢_{n+1} \ 𝒢_n for n = 1..=m, each in canonical order.
pub fn shells(group: GroupSpec, m: u32) -> Result<Vec<Vec<GroupElement>>> {
    let mut out = Vec::with_capacity(m as usize);
    let mut prev = ball_elements(group, 1)?;
    for n in 1..=m {
        let next = ball_elements(group, n + 1)?;
        let inner: std::collections::HashSet<_> = prev.iter().copied().collect();
        out.push(next.iter().copied().filter(|g| !inner.contains(g)).collect());
        prev = next;
    }
    Ok(out)
}
