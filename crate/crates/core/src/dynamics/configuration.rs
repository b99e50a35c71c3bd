use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{Alphabet, FixedPoint, Letter};
use crate::error::{HullError, Result};
use crate::group::{GroupElement, GroupSpec, Window};
use crate::rng::{reduce, site_hash};

/// A finite pattern: one letter per window element, in window order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    window: Arc<Window>,
    letters: Vec<Letter>,
}

impl Pattern {
    pub fn new(window: Arc<Window>, letters: Vec<Letter>) -> Result<Self> {
        if letters.len() != window.len() {
            return Err(HullError::Domain(format!(
                "pattern has {} letters for a window of {}",
                letters.len(),
                window.len()
            )));
        }
        Ok(Pattern { window, letters })
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn get(&self, g: &GroupElement) -> Option<Letter> {
        self.window.index_of(g).map(|i| self.letters[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, Letter)> {
        self.window.elements().iter().zip(self.letters.iter().copied())
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, sub: &Arc<Window>) -> Result<Pattern> {
        let letters = sub
            .elements()
            .iter()
            .map(|g| {
                self.get(g)
                    .ok_or_else(|| HullError::Domain(format!("{g} outside the pattern window")))
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::new(sub.clone(), letters)
    }

    /// The same letters carried to `window + g`.
    pub fn translate(&self, g: &GroupElement) -> Result<Pattern> {
        let w = Arc::new(self.window.translate(g)?);
        Pattern::new(w, self.letters.clone())
    }
}

/// How a configuration assigns letters to group elements.
#[derive(Clone, Debug)]
pub enum Rule {
    Constant(Letter),
    /// Lattice configuration with period q_i along axis i; the cell is the
    /// pattern on [0,q_1) × … × [0,q_N) in row-major order.
    Periodic {
        periods: Vec<i64>,
        cell: Vec<Letter>,
    },
    FixedPoint(Arc<FixedPoint>),
    /// Independent letters drawn by hashing (seed, site).
    Hashed {
        seed: u64,
    },
    /// Letters known on a finite window only, e.g. a seeded sample or a
    /// stabilized limit pattern.
    Finite {
        seed: Option<u64>,
        pattern: Pattern,
        radius: u64,
    },
    /// Upper letter where coordinate `axis` is ≥ 0, lower letter elsewhere.
    HalfSpace {
        axis: usize,
        upper: Letter,
        lower: Letter,
    },
    Patched {
        base: Configuration,
        overrides: BTreeMap<GroupElement, Letter>,
    },
    Shifted {
        base: Configuration,
        by: GroupElement,
    },
}

/// A point ω of a hull: a total, deterministic map from the group to letters.
#[derive(Clone, Debug)]
pub struct Configuration {
    group: GroupSpec,
    alphabet: Arc<Alphabet>,
    rule: Arc<Rule>,
}

impl Configuration {
    fn make(group: GroupSpec, alphabet: Arc<Alphabet>, rule: Rule) -> Self {
        Configuration {
            group,
            alphabet,
            rule: Arc::new(rule),
        }
    }

    fn check_letter(alphabet: &Alphabet, l: Letter) -> Result<()> {
        if (l as usize) < alphabet.len() {
            Ok(())
        } else {
            Err(HullError::Domain(format!("letter {l} outside alphabet")))
        }
    }

    pub fn constant(group: GroupSpec, alphabet: Arc<Alphabet>, letter: Letter) -> Result<Self> {
        Self::check_letter(&alphabet, letter)?;
        Ok(Self::make(group, alphabet, Rule::Constant(letter)))
    }

    pub fn periodic(group: GroupSpec, alphabet: Arc<Alphabet>, periods: Vec<i64>, cell: Vec<Letter>) -> Result<Self> {
        let GroupSpec::Lattice(n) = group else {
            return Err(HullError::Unsupported("periodic rules are defined on lattices".into()));
        };
        if periods.len() != n as usize || periods.iter().any(|&q| q <= 0) {
            return Err(HullError::Domain("one positive period per axis required".into()));
        }
        let size: i64 = periods.iter().product();
        if cell.len() as i64 != size {
            return Err(HullError::Domain(format!("periodic cell needs {size} letters")));
        }
        for &l in &cell {
            Self::check_letter(&alphabet, l)?;
        }
        Ok(Self::make(group, alphabet, Rule::Periodic { periods, cell }))
    }

    pub fn fixed_point(alphabet: Arc<Alphabet>, fp: FixedPoint) -> Result<Self> {
        if fp.substitution().alphabet_len() != alphabet.len() {
            return Err(HullError::Domain("substitution and alphabet sizes differ".into()));
        }
        Ok(Self::make(GroupSpec::Lattice(1), alphabet, Rule::FixedPoint(Arc::new(fp))))
    }

    pub fn hashed(group: GroupSpec, alphabet: Arc<Alphabet>, seed: u64) -> Self {
        Self::make(group, alphabet, Rule::Hashed { seed })
    }

    /// Configuration known only on a ball-shaped (or other) window.
    pub fn finite(alphabet: Arc<Alphabet>, pattern: Pattern, seed: Option<u64>) -> Result<Self> {
        for &l in pattern.letters() {
            Self::check_letter(&alphabet, l)?;
        }
        let group = pattern.window().group();
        // largest r with ball(r) inside the window
        let mut radius = 0u64;
        if !pattern.window().contains(&group.identity()) {
            return Err(HullError::Domain("finite configurations must contain the identity".into()));
        }
        while radius < 64 {
            let ball = Window::ball(group, radius as u32 + 1)?;
            if !ball.is_subset_of(pattern.window()) {
                break;
            }
            radius += 1;
        }
        Ok(Self::make(group, alphabet, Rule::Finite { seed, pattern, radius }))
    }

    pub fn half_space(group: GroupSpec, alphabet: Arc<Alphabet>, axis: usize, upper: Letter, lower: Letter) -> Result<Self> {
        if !group.is_lattice() || axis >= group.coordinate_count() {
            return Err(HullError::Domain("half-space axis out of range".into()));
        }
        Self::check_letter(&alphabet, upper)?;
        Self::check_letter(&alphabet, lower)?;
        Ok(Self::make(group, alphabet, Rule::HalfSpace { axis, upper, lower }))
    }

    /// ω with the letters of `overrides` written over it.
    pub fn patched(&self, overrides: BTreeMap<GroupElement, Letter>) -> Result<Self> {
        for (g, &l) in &overrides {
            if g.group() != self.group {
                return Err(HullError::GroupMismatch("override outside the group".into()));
            }
            Self::check_letter(&self.alphabet, l)?;
        }
        Ok(Self::make(
            self.group,
            self.alphabet.clone(),
            Rule::Patched {
                base: self.clone(),
                overrides,
            },
        ))
    }

    /// α(g)ω, with evaluate(shift(ω, g), h) = evaluate(ω, h + g).
    pub fn shift(&self, g: &GroupElement) -> Result<Self> {
        if g.group() != self.group {
            return Err(HullError::GroupMismatch(format!("cannot shift a {} configuration by {g}", self.group)));
        }
        if g.is_identity() {
            return Ok(self.clone());
        }
        let (base, by) = match self.rule.as_ref() {
            Rule::Shifted { base, by } => (base.clone(), g.compose(by)?),
            _ => (self.clone(), *g),
        };
        // periodic translates are reduced into the fundamental box
        if let Rule::Periodic { periods, .. } = base.rule.as_ref() {
            let coords: Vec<i64> = by.coords().iter().zip(periods).map(|(c, q)| c.rem_euclid(*q)).collect();
            let by = self.group.element(&coords)?;
            if by.is_identity() {
                return Ok(base);
            }
            return Ok(Self::make(self.group, self.alphabet.clone(), Rule::Shifted { base, by }));
        }
        if by.is_identity() {
            return Ok(base);
        }
        Ok(Self::make(self.group, self.alphabet.clone(), Rule::Shifted { base, by }))
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn evaluate(&self, g: &GroupElement) -> Result<Letter> {
        if g.group() != self.group {
            return Err(HullError::GroupMismatch(format!("{g} is not in {}", self.group)));
        }
        match self.rule.as_ref() {
            Rule::Constant(l) => Ok(*l),
            Rule::Periodic { periods, cell } => {
                let mut idx = 0usize;
                for (c, q) in g.coords().iter().zip(periods) {
                    idx = idx * *q as usize + c.rem_euclid(*q) as usize;
                }
                Ok(cell[idx])
            }
            Rule::FixedPoint(fp) => Ok(fp.letter_at(g.coords()[0])),
            Rule::Hashed { seed } => Ok(reduce(site_hash(*seed, g.coords()), self.alphabet.len()) as Letter),
            Rule::Finite { pattern, radius, .. } => pattern.get(g).ok_or(HullError::ExtendPrefix {
                needed: g.word_length_lower_bound().max(*radius + 1),
                available: *radius,
            }),
            Rule::HalfSpace { axis, upper, lower } => Ok(if g.coords()[*axis] >= 0 { *upper } else { *lower }),
            Rule::Patched { base, overrides } => match overrides.get(g) {
                Some(l) => Ok(*l),
                None => base.evaluate(g),
            },
            Rule::Shifted { base, by } => base.evaluate(&g.compose(by)?),
        }
    }

    pub fn value(&self, g: &GroupElement) -> Result<f64> {
        Ok(self.alphabet.value(self.evaluate(g)?))
    }

    /// The pattern of ω on W.
    pub fn pattern_on(&self, w: &Arc<Window>) -> Result<Pattern> {
        let letters = w.elements().iter().map(|g| self.evaluate(g)).collect::<Result<Vec<_>>>()?;
        Pattern::new(w.clone(), letters)
    }

    /// The letters of shift(ω, k) on W, i.e. ω(w + k) for w ∈ W in order.
    pub fn letters_at(&self, k: &GroupElement, w: &Window) -> Result<Vec<Letter>> {
        w.elements()
            .iter()
            .map(|h| self.evaluate(&h.compose(k)?))
            .collect()
    }

    /// The pattern of shift(ω, k) on W.
    pub fn pattern_at(&self, k: &GroupElement, w: &Arc<Window>) -> Result<Pattern> {
        Pattern::new(w.clone(), self.letters_at(k, w)?)
    }

    /// Per-axis periods if ω is known to be periodic.
    pub fn periods(&self) -> Option<Vec<i64>> {
        match self.rule.as_ref() {
            Rule::Constant(_) => Some(vec![1; self.group.coordinate_count()]).filter(|_| self.group.is_lattice()),
            Rule::Periodic { periods, .. } => Some(periods.clone()),
            Rule::Shifted { base, .. } => base.periods(),
            _ => None,
        }
    }

    /// Largest radius on which evaluation is guaranteed, `None` if unbounded.
    pub fn supported_radius(&self) -> Option<u64> {
        match self.rule.as_ref() {
            Rule::Finite { radius, .. } => Some(*radius),
            Rule::Patched { base, .. } => base.supported_radius(),
            Rule::Shifted { base, by } => base.supported_radius().map(|r| {
                let len = crate::group::word_length(by).map(u64::from).unwrap_or(u64::MAX);
                r.saturating_sub(len)
            }),
            _ => None,
        }
    }

    /// Short human-readable identifier used in provenance records.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule.as_ref() {
            Rule::Constant(l) => write!(f, "constant({})", self.alphabet.name(*l)),
            Rule::Periodic { periods, cell } => {
                let ps: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
                write!(f, "periodic[{}]({})", ps.join("x"), self.alphabet.spell(cell))
            }
            Rule::FixedPoint(fp) => {
                let (l, r) = fp.seeds();
                write!(f, "fixed_point({}.{})", self.alphabet.name(l), self.alphabet.name(r))
            }
            Rule::Hashed { seed } => write!(f, "explicit({seed})"),
            Rule::Finite { seed: Some(s), radius, .. } => write!(f, "explicit({s},r={radius})"),
            Rule::Finite { seed: None, radius, .. } => write!(f, "finite(r={radius})"),
            Rule::HalfSpace { axis, upper, lower } => write!(
                f,
                "half_space(axis={axis},{}|{})",
                self.alphabet.name(*lower),
                self.alphabet.name(*upper)
            ),
            Rule::Patched { base, overrides } => write!(f, "patched({base},{} sites)", overrides.len()),
            Rule::Shifted { base, by } => write!(f, "shift({base},{by})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Substitution;
    use proptest::prelude::*;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_names(&["a", "b"], &[0.0, 1.0]).unwrap())
    }

    fn period2() -> Configuration {
        Configuration::periodic(GroupSpec::Lattice(1), ab(), vec![2], vec![0, 1]).unwrap()
    }

    #[test]
    fn periodic_evaluation() {
        let w = period2();
        assert_eq!(w.evaluate(&GroupElement::z(7)).unwrap(), 1);
        assert_eq!(w.evaluate(&GroupElement::z(-3)).unwrap(), 1);
        let s = w.shift(&GroupElement::z(1)).unwrap();
        assert_eq!(s.evaluate(&GroupElement::z(0)).unwrap(), 1);
        assert_eq!(w.shift(&GroupElement::z(2)).unwrap().id(), w.id());
    }

    #[test]
    fn fibonacci_letters() {
        let fp = FixedPoint::new(Substitution::fibonacci(), 0).unwrap();
        let w = Configuration::fixed_point(ab(), fp).unwrap();
        let word: String = (0..8)
            .map(|n| w.alphabet().name(w.evaluate(&GroupElement::z(n)).unwrap()).to_string())
            .collect();
        assert_eq!(word, "abaababa");
    }

    #[test]
    fn patching() {
        let w = period2();
        let p = w.patched(BTreeMap::from([(GroupElement::z(0), 1)])).unwrap();
        assert_eq!(p.evaluate(&GroupElement::z(0)).unwrap(), 1);
        assert_eq!(p.evaluate(&GroupElement::z(1)).unwrap(), w.evaluate(&GroupElement::z(1)).unwrap());
    }

    #[test]
    fn finite_rule_reports_prefix() {
        let win = Arc::new(Window::ball(GroupSpec::Lattice(1), 3).unwrap());
        let pat = Pattern::new(win.clone(), vec![0; 7]).unwrap();
        let w = Configuration::finite(ab(), pat, Some(1)).unwrap();
        assert_eq!(w.evaluate(&GroupElement::z(-3)).unwrap(), 0);
        assert_eq!(
            w.evaluate(&GroupElement::z(5)),
            Err(HullError::ExtendPrefix { needed: 5, available: 3 })
        );
    }

    #[test]
    fn identity_shift() {
        for group in [GroupSpec::Lattice(2), GroupSpec::Heisenberg] {
            let w = Configuration::hashed(group, ab(), 9);
            let s = w.shift(&group.identity()).unwrap();
            let ball = Arc::new(Window::ball(group, 6).unwrap());
            assert_eq!(w.pattern_on(&ball).unwrap(), s.pattern_on(&ball).unwrap());
        }
    }

    fn element(group: GroupSpec) -> impl Strategy<Value = GroupElement> {
        prop::array::uniform3(-6i64..=6).prop_map(move |c| match group {
            GroupSpec::Heisenberg => GroupElement::heisenberg(c[0], c[1], c[2]),
            _ => GroupElement::lattice(&c[..2]).unwrap(),
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn action_law_lattice(g in element(GroupSpec::Lattice(2)), h in element(GroupSpec::Lattice(2))) {
            action_law(GroupSpec::Lattice(2), g, h);
        }

        #[test]
        fn action_law_heisenberg(g in element(GroupSpec::Heisenberg), h in element(GroupSpec::Heisenberg)) {
            action_law(GroupSpec::Heisenberg, g, h);
        }
    }

    fn action_law(group: GroupSpec, g: GroupElement, h: GroupElement) {
        let w = Configuration::hashed(group, ab(), 3);
        let ball = Window::ball(group, 4).unwrap();
        let lhs = w.shift(&g).unwrap().shift(&h).unwrap();
        let rhs = w.shift(&(h + g)).unwrap();
        for x in ball.elements() {
            assert_eq!(lhs.evaluate(x).unwrap(), rhs.evaluate(x).unwrap());
            assert_eq!(lhs.evaluate(x).unwrap(), w.evaluate(&(*x + h + g)).unwrap());
        }
    }
}
