use std::collections::HashMap;

use serde::Serialize;

use super::{Configuration, HullKind, Letter, PrimitivityWitness, SubshiftSpec};
use crate::error::{HullError, Result};
use crate::group::{ball_elements, word_length, GroupElement, GroupSpec, Window};

/// Maximum number of refutation witnesses kept in a report.
pub const MAX_WITNESSES: usize = 16;

/// A big pattern together with the small patterns it does not contain.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceWitness {
    pub pattern: String,
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub n: u64,
    pub big_n: u64,
    pub small_patterns: usize,
    pub big_patterns: usize,
    /// True iff every legal n-block occurs in every legal N-block.
    pub uniformly_recurrent: bool,
    pub witnesses: Vec<RecurrenceWitness>,
    /// Substitution hulls only.
    pub primitivity: Option<PrimitivityWitness>,
}

impl MinimalityReport {
    pub fn certified(&self) -> bool {
        self.uniformly_recurrent
    }
}

/// Translates t with block_n + t ⊆ block_N.
fn inner_translates(small: &Window, big: &Window) -> Result<Vec<GroupElement>> {
    let mut out = Vec::new();
    for t in big.elements() {
        let mut inside = true;
        for w in small.elements() {
            if !big.contains(&w.compose(t)?) {
                inside = false;
                break;
            }
        }
        if inside {
            out.push(*t);
        }
    }
    Ok(out)
}

/// Index tables mapping each inner translate to window positions of the big block.
fn translate_tables(small: &Window, big: &Window) -> Result<Vec<Vec<usize>>> {
    inner_translates(small, big)?
        .iter()
        .map(|t| {
            small
                .elements()
                .iter()
                .map(|w| Ok(big.index_of(&w.compose(t)?).expect("checked inside")))
                .collect()
        })
        .collect()
}

/// Uniform-recurrence check at scales (n, N) on the hull's blocks.
pub fn certify_minimal(hull: &SubshiftSpec, n: u64, big_n: u64) -> Result<MinimalityReport> {
    if n > big_n {
        return Err(HullError::Domain("need n ≤ N".into()));
    }
    let small = hull.block(n)?;
    let big = hull.block(big_n)?;
    let small_patterns = hull.legal_patterns(&small)?;
    let big_patterns = hull.legal_patterns(&big)?;
    let tables = translate_tables(&small, &big)?;
    let alphabet = hull.alphabet();

    let mut witnesses = Vec::new();
    let mut recurrent = true;
    for q in &big_patterns {
        let mut found = vec![false; small_patterns.len()];
        let lookup: HashMap<&[Letter], usize> =
            small_patterns.iter().enumerate().map(|(i, p)| (p.letters(), i)).collect();
        let mut buf = vec![0 as Letter; small.len()];
        let mut remaining = small_patterns.len();
        for table in &tables {
            for (slot, &i) in buf.iter_mut().zip(table) {
                *slot = q.letters()[i];
            }
            if let Some(&i) = lookup.get(buf.as_slice()) {
                if !found[i] {
                    found[i] = true;
                    remaining -= 1;
                    if remaining == 0 {
                        break;
                    }
                }
            }
        }
        if remaining > 0 {
            recurrent = false;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(RecurrenceWitness {
                    pattern: alphabet.spell(q.letters()),
                    missing: small_patterns
                        .iter()
                        .zip(&found)
                        .filter(|(_, f)| !**f)
                        .map(|(p, _)| alphabet.spell(p.letters()))
                        .collect(),
                });
            }
        }
    }
    let primitivity = match hull.kind() {
        HullKind::Substitution(s) => s.primitivity_witness(),
        _ => None,
    };
    Ok(MinimalityReport {
        n,
        big_n,
        small_patterns: small_patterns.len(),
        big_patterns: big_patterns.len(),
        uniformly_recurrent: recurrent,
        witnesses,
        primitivity,
    })
}

/// Search radius that suffices for pseudoergodicity at level n once every
/// legal n-block occurs in every legal N-block (lattices only).
pub fn recurrence_radius(group: GroupSpec, n: u64, big_n: u64) -> Option<u64> {
    match group {
        GroupSpec::Lattice(rank) => Some(rank as u64 * (n + big_n)),
        GroupSpec::Heisenberg => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    /// Some pattern provably never occurs at large word length.
    Refuted,
    /// Some pattern was not found within the search radius.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Occurrence {
    pub pattern: String,
    pub position: GroupElement,
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoergodicReport {
    pub configuration: String,
    pub n: u64,
    pub radius: u64,
    pub verdict: Verdict,
    pub occurrences: Vec<Occurrence>,
    pub missing: Vec<String>,
}

/// Searches ball(R) for an occurrence of every legal n-block of the hull at a
/// position t with |t| ≥ n.
pub fn certify_pseudoergodic(
    omega: &Configuration,
    hull: &SubshiftSpec,
    n: u64,
    radius: u64,
) -> Result<PseudoergodicReport> {
    if omega.group() != hull.group() {
        return Err(HullError::GroupMismatch("configuration and hull live on different groups".into()));
    }
    let block = hull.block(n)?;
    let legal = hull.legal_patterns(&block)?;
    let r = u32::try_from(radius).map_err(|_| HullError::Resource(format!("radius {radius}")))?;
    let mut positions: Vec<(u32, GroupElement)> = Vec::new();
    for t in ball_elements(hull.group(), r)? {
        let len = word_length(&t)?;
        if len as u64 >= n {
            positions.push((len, t));
        }
    }
    // nearest occurrences first
    positions.sort();

    let lookup: HashMap<&[Letter], usize> = legal.iter().enumerate().map(|(i, p)| (p.letters(), i)).collect();
    let mut first: Vec<Option<GroupElement>> = vec![None; legal.len()];
    let mut remaining = legal.len();
    for (_, t) in &positions {
        let letters = omega.letters_at(t, &block)?;
        if let Some(&i) = lookup.get(letters.as_slice()) {
            if first[i].is_none() {
                first[i] = Some(*t);
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
        }
    }

    let alphabet = hull.alphabet();
    let mut occurrences = Vec::new();
    let mut missing = Vec::new();
    for (p, pos) in legal.iter().zip(&first) {
        match pos {
            Some(t) => occurrences.push(Occurrence {
                pattern: alphabet.spell(p.letters()),
                position: *t,
            }),
            None => missing.push(alphabet.spell(p.letters())),
        }
    }
    let verdict = if missing.is_empty() {
        Verdict::Certified
    } else if covers_period_classes(omega, positions.iter().map(|(_, t)| t))? {
        // ω is periodic and every residue class was scanned
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    Ok(PseudoergodicReport {
        configuration: omega.id(),
        n,
        radius,
        verdict,
        occurrences,
        missing,
    })
}

fn covers_period_classes<'a>(omega: &Configuration, positions: impl Iterator<Item = &'a GroupElement>) -> Result<bool> {
    let Some(periods) = omega.periods() else {
        return Ok(false);
    };
    let total: i64 = periods.iter().product();
    let mut seen = std::collections::HashSet::new();
    for t in positions {
        let class: Vec<i64> = t.coords().iter().zip(&periods).map(|(c, q)| c.rem_euclid(*q)).collect();
        seen.insert(class);
        if seen.len() as i64 == total {
            return Ok(true);
        }
    }
    Ok(false)
}
