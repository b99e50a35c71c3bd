use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::{Alphabet, Configuration, FixedPoint, Letter, Pattern, Substitution};
use crate::error::{HullError, Result};
use crate::group::{GroupElement, GroupSpec, Window};
use crate::rng::SplitMix;

/// Upper bound on the number of patterns enumerated for one window.
pub const PATTERN_BUDGET: usize = 1 << 20;

/// Radius of the window generated by seeded sampling of forbidden-pattern hulls.
pub const SAMPLE_RADIUS: u32 = 24;

/// A pattern that may not occur anywhere: cells (offset, letter).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenPattern {
    pub cells: Vec<(GroupElement, Letter)>,
}

#[derive(Clone, Debug)]
pub enum HullKind {
    FullShift,
    Substitution(Substitution),
    Periodic(Configuration),
    Forbidden(Vec<ForbiddenPattern>),
}

/// The compact space Ω, presented by its language.
#[derive(Clone, Debug)]
pub struct SubshiftSpec {
    name: String,
    group: GroupSpec,
    alphabet: Arc<Alphabet>,
    kind: HullKind,
    reference: Option<Configuration>,
    factors: Arc<Mutex<HashMap<usize, Arc<BTreeSet<Vec<Letter>>>>>>,
}

impl SubshiftSpec {
    pub fn new(name: &str, group: GroupSpec, alphabet: Arc<Alphabet>, kind: HullKind) -> Result<Self> {
        match &kind {
            HullKind::Substitution(s) => {
                if group != GroupSpec::Lattice(1) {
                    return Err(HullError::Unsupported("substitution hulls live on ℤ".into()));
                }
                if s.alphabet_len() != alphabet.len() {
                    return Err(HullError::Domain("substitution and alphabet sizes differ".into()));
                }
            }
            HullKind::Periodic(c) => {
                if c.group() != group || c.periods().is_none() {
                    return Err(HullError::Domain("periodic hull needs a periodic configuration".into()));
                }
            }
            HullKind::Forbidden(list) => {
                for p in list {
                    if p.cells.is_empty() {
                        return Err(HullError::Domain("empty forbidden pattern".into()));
                    }
                    for (g, l) in &p.cells {
                        if g.group() != group || *l as usize >= alphabet.len() {
                            return Err(HullError::Domain("forbidden pattern outside group or alphabet".into()));
                        }
                    }
                }
            }
            HullKind::FullShift => {}
        }
        Ok(SubshiftSpec {
            name: name.to_string(),
            group,
            alphabet,
            kind,
            reference: None,
            factors: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Sets the configuration used as the default point of the hull.
    pub fn with_reference(mut self, reference: Configuration) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn kind(&self) -> &HullKind {
        &self.kind
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, HullKind::Periodic(_))
    }

    /// The reference point: substitution fixed point, the periodic generator,
    /// or the configured default.
    pub fn reference(&self) -> Result<Configuration> {
        if let Some(r) = &self.reference {
            return Ok(r.clone());
        }
        match &self.kind {
            HullKind::Substitution(s) => {
                Configuration::fixed_point(self.alphabet.clone(), FixedPoint::new(s.clone(), 0)?)
            }
            HullKind::Periodic(c) => Ok(c.clone()),
            HullKind::FullShift => Ok(Configuration::hashed(self.group, self.alphabet.clone(), 0)),
            HullKind::Forbidden(_) => self.sample(0),
        }
    }

    fn factor_set(&self, len: usize, s: &Substitution) -> Result<Arc<BTreeSet<Vec<Letter>>>> {
        if let Some(f) = self.factors.lock().unwrap().get(&len) {
            return Ok(f.clone());
        }
        let f = Arc::new(s.factors(len)?);
        self.factors.lock().unwrap().insert(len, f.clone());
        Ok(f)
    }

    fn check_window(&self, w: &Window) -> Result<()> {
        if w.group() != self.group {
            return Err(HullError::GroupMismatch(format!("window on {} for a hull on {}", w.group(), self.group)));
        }
        Ok(())
    }

    /// All legal patterns on W, sorted by their letter sequences.
    pub fn legal_patterns(&self, w: &Arc<Window>) -> Result<Vec<Pattern>> {
        self.check_window(w)?;
        let mut words: Vec<Vec<Letter>> = match &self.kind {
            HullKind::FullShift => {
                let a = self.alphabet.len();
                let count = (a as f64).powi(w.len() as i32);
                if count > PATTERN_BUDGET as f64 {
                    return Err(HullError::Resource(format!("{count} patterns on a window of {}", w.len())));
                }
                let mut out = Vec::with_capacity(count as usize);
                let mut cur = vec![0 as Letter; w.len()];
                loop {
                    out.push(cur.clone());
                    let mut i = cur.len();
                    loop {
                        if i == 0 {
                            return self.wrap(w, out);
                        }
                        i -= 1;
                        if (cur[i] as usize) + 1 < a {
                            cur[i] += 1;
                            break;
                        }
                        cur[i] = 0;
                    }
                }
            }
            HullKind::Substitution(s) => {
                let (lo, span) = interval_span(w);
                let factors = self.factor_set(span, s)?;
                let offsets: Vec<usize> = w.elements().iter().map(|g| (g.coords()[0] - lo) as usize).collect();
                let set: BTreeSet<Vec<Letter>> = factors
                    .iter()
                    .map(|f| offsets.iter().map(|&i| f[i]).collect())
                    .collect();
                set.into_iter().collect()
            }
            HullKind::Periodic(c) => {
                let periods = c.periods().expect("checked at construction");
                let domain = Window::range(
                    self.group,
                    &vec![0; periods.len()],
                    &periods.iter().map(|q| q - 1).collect::<Vec<_>>(),
                )?;
                let mut set = BTreeSet::new();
                for t in domain.elements() {
                    set.insert(c.letters_at(t, w)?);
                }
                set.into_iter().collect()
            }
            HullKind::Forbidden(list) => {
                let mut out = Vec::new();
                let mut cur = vec![0 as Letter; w.len()];
                let placements = placements_by_cell(list, w)?;
                forbidden_dfs(self.alphabet.len(), &placements, 0, &mut cur, &mut out)?;
                out
            }
        };
        words.sort();
        self.wrap(w, words)
    }

    fn wrap(&self, w: &Arc<Window>, words: Vec<Vec<Letter>>) -> Result<Vec<Pattern>> {
        words.into_iter().map(|l| Pattern::new(w.clone(), l)).collect()
    }

    pub fn is_legal(&self, p: &Pattern) -> Result<bool> {
        self.check_window(p.window())?;
        if p.letters().iter().any(|&l| l as usize >= self.alphabet.len()) {
            return Ok(false);
        }
        match &self.kind {
            HullKind::FullShift => Ok(true),
            HullKind::Substitution(s) => {
                let (lo, span) = interval_span(p.window());
                if p.window().len() == span {
                    let mut word = vec![0; span];
                    for (g, l) in p.iter() {
                        word[(g.coords()[0] - lo) as usize] = l;
                    }
                    Ok(self.factor_set(span, s)?.contains(&word))
                } else {
                    let legal = self.legal_patterns(p.window())?;
                    Ok(legal.binary_search_by(|q| q.letters().cmp(p.letters())).is_ok())
                }
            }
            HullKind::Periodic(_) => {
                let legal = self.legal_patterns(p.window())?;
                Ok(legal.binary_search_by(|q| q.letters().cmp(p.letters())).is_ok())
            }
            HullKind::Forbidden(list) => {
                let placements = placements_by_cell(list, p.window())?;
                Ok((0..p.letters().len()).all(|i| !violates(&placements[i], p.letters())))
            }
        }
    }

    /// Seeded pseudorandom point of the hull.
    pub fn sample(&self, seed: u64) -> Result<Configuration> {
        let mut rng = SplitMix::new(seed);
        match &self.kind {
            HullKind::FullShift => Ok(Configuration::hashed(self.group, self.alphabet.clone(), seed)),
            HullKind::Substitution(_) => {
                let offset = rng.below(2_000_001) as i64 - 1_000_000;
                self.reference()?.shift(&GroupElement::z(offset))
            }
            HullKind::Periodic(c) => {
                let periods = c.periods().expect("checked at construction");
                let coords: Vec<i64> = periods.iter().map(|&q| rng.below(q as usize) as i64).collect();
                c.shift(&self.group.element(&coords)?)
            }
            HullKind::Forbidden(list) => {
                let w = Arc::new(Window::ball(self.group, SAMPLE_RADIUS)?);
                let placements = placements_by_cell(list, &w)?;
                let mut out = Vec::new();
                let mut cur = vec![0 as Letter; w.len()];
                let a = self.alphabet.len();
                // one seeded letter order per site; stop at the first completion
                let orders: Vec<Vec<Letter>> = (0..w.len())
                    .map(|_| {
                        let mut o: Vec<Letter> = (0..a as Letter).collect();
                        for i in (1..a).rev() {
                            o.swap(i, rng.below(i + 1));
                        }
                        o
                    })
                    .collect();
                forbidden_dfs_ordered(&orders, &placements, 0, &mut cur, &mut out)?;
                let letters = out
                    .pop()
                    .ok_or_else(|| HullError::Domain(format!("hull {} has no legal pattern on ball({SAMPLE_RADIUS})", self.name)))?;
                Configuration::finite(self.alphabet.clone(), Pattern::new(w, letters)?, Some(seed))
            }
        }
    }

    /// The "block" window used for recurrence statements: {0..n−1}^N on a
    /// lattice, ball(n) on the Heisenberg group.
    pub fn block(&self, n: u64) -> Result<Arc<Window>> {
        Ok(Arc::new(Window::block(self.group, n)?))
    }
}

/// (min coordinate, span length) of a window in ℤ.
fn interval_span(w: &Window) -> (i64, usize) {
    let lo = w.elements().first().map(|g| g.coords()[0]).unwrap_or(0);
    let hi = w.elements().last().map(|g| g.coords()[0]).unwrap_or(0);
    (lo, (hi - lo + 1) as usize)
}

/// For each window index i: placements (index list, letters) of forbidden
/// patterns inside W whose largest index is i.
type Placement = Vec<(usize, Letter)>;

fn placements_by_cell(list: &[ForbiddenPattern], w: &Window) -> Result<Vec<Vec<Placement>>> {
    let mut by_cell: Vec<Vec<Placement>> = vec![Vec::new(); w.len()];
    let mut seen = BTreeSet::new();
    for (pi, p) in list.iter().enumerate() {
        for x in w.elements() {
            for (c, _) in &p.cells {
                // base t with c + t = x
                let t = c.inverse().compose(x)?;
                if !seen.insert((pi, t)) {
                    continue;
                }
                let mut cells = Vec::with_capacity(p.cells.len());
                let mut inside = true;
                for (c2, l2) in &p.cells {
                    match w.index_of(&c2.compose(&t)?) {
                        Some(i) => cells.push((i, *l2)),
                        None => {
                            inside = false;
                            break;
                        }
                    }
                }
                if inside {
                    let last = cells.iter().map(|c| c.0).max().unwrap();
                    by_cell[last].push(cells);
                }
            }
        }
    }
    Ok(by_cell)
}

fn violates(placements: &[Placement], letters: &[Letter]) -> bool {
    placements.iter().any(|p| p.iter().all(|&(i, l)| letters[i] == l))
}

fn forbidden_dfs(
    a: usize,
    placements: &[Vec<Placement>],
    i: usize,
    cur: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
) -> Result<()> {
    if i == cur.len() {
        if out.len() >= PATTERN_BUDGET {
            return Err(HullError::Resource("forbidden-pattern enumeration budget exceeded".into()));
        }
        out.push(cur.clone());
        return Ok(());
    }
    for l in 0..a as Letter {
        cur[i] = l;
        if !violates(&placements[i], cur) {
            forbidden_dfs(a, placements, i + 1, cur, out)?;
        }
    }
    Ok(())
}

fn forbidden_dfs_ordered(
    orders: &[Vec<Letter>],
    placements: &[Vec<Placement>],
    i: usize,
    cur: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
) -> Result<bool> {
    if i == cur.len() {
        out.push(cur.clone());
        return Ok(true);
    }
    for &l in &orders[i] {
        cur[i] = l;
        if !violates(&placements[i], cur) && forbidden_dfs_ordered(orders, placements, i + 1, cur, out)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::catalog;

    fn interval(len: u64) -> Arc<Window> {
        Arc::new(Window::interval(len).unwrap())
    }

    #[test]
    fn full_shift_counts() {
        let h = catalog::full_pm1(1).unwrap();
        assert_eq!(h.legal_patterns(&interval(3)).unwrap().len(), 8);
    }

    #[test]
    fn fibonacci_language() {
        let h = catalog::fibonacci();
        let two: Vec<String> = h
            .legal_patterns(&interval(2))
            .unwrap()
            .iter()
            .map(|p| h.alphabet().spell(p.letters()))
            .collect();
        assert_eq!(two, vec!["aa", "ab", "ba"]);
        for n in 1..=8 {
            assert_eq!(h.legal_patterns(&interval(n)).unwrap().len(), n as usize + 1);
        }
    }

    #[test]
    fn periodic_language() {
        let h = catalog::period_q(3).unwrap();
        let p = h.legal_patterns(&interval(5)).unwrap();
        assert_eq!(p.len(), 3);
        for q in &p {
            assert!(h.is_legal(q).unwrap());
        }
    }

    #[test]
    fn closed_under_restriction_and_translation() {
        for h in [catalog::fibonacci(), catalog::thue_morse(), catalog::period_q(3).unwrap()] {
            let big = interval(7);
            let sub = Arc::new(Window::range(GroupSpec::Lattice(1), &[2], &[4]).unwrap());
            for p in h.legal_patterns(&big).unwrap() {
                assert!(h.is_legal(&p.restrict(&sub).unwrap()).unwrap());
                assert!(h.is_legal(&p.translate(&GroupElement::z(-11)).unwrap()).unwrap());
            }
        }
        let hp = catalog::halfplane_ab().unwrap();
        let w = Arc::new(Window::ball(GroupSpec::Lattice(2), 2).unwrap());
        let g = GroupElement::lattice(&[3, -5]).unwrap();
        let tw = Arc::new(w.translate(&g).unwrap());
        let here: Vec<Vec<Letter>> = hp.legal_patterns(&w).unwrap().iter().map(|p| p.letters().to_vec()).collect();
        let there: Vec<Vec<Letter>> = hp.legal_patterns(&tw).unwrap().iter().map(|p| p.letters().to_vec()).collect();
        assert_eq!(here, there);
    }

    #[test]
    fn halfplane_language() {
        let hp = catalog::halfplane_ab().unwrap();
        // on a 3×2 box: columns constant, rows b…b a…a, so 4 patterns
        let w = Arc::new(Window::range(GroupSpec::Lattice(2), &[0, 0], &[2, 1]).unwrap());
        assert_eq!(hp.legal_patterns(&w).unwrap().len(), 4);
        let s = hp.sample(5).unwrap();
        let ball = Arc::new(Window::ball(GroupSpec::Lattice(2), 6).unwrap());
        assert!(hp.is_legal(&s.pattern_on(&ball).unwrap()).unwrap());
    }

    #[test]
    fn samples_are_legal() {
        for h in [catalog::fibonacci(), catalog::thue_morse(), catalog::period_q(4).unwrap()] {
            for seed in 0..5 {
                let w = h.sample(seed).unwrap();
                for start in [-40i64, 0, 33] {
                    let win = Arc::new(interval(9).translate(&GroupElement::z(start)).unwrap());
                    assert!(h.is_legal(&w.pattern_on(&win).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn budget() {
        let h = catalog::full_pm1(1).unwrap();
        assert!(matches!(h.legal_patterns(&interval(40)), Err(HullError::Resource(_))));
    }
}
