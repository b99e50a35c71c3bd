use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Letter;
use crate::error::{HullError, Result};

/// Upper bound on the total length of iterated substitution words.
const WORD_BUDGET: usize = 1 << 24;

/// A substitution σ on letters {0, …, n−1}, given by the images σ(x).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    images: Vec<Vec<Letter>>,
}

/// First power of the incidence matrix that is entrywise positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityWitness {
    pub power: usize,
    pub matrix: Vec<Vec<u64>>,
}

impl Substitution {
    pub fn new(images: Vec<Vec<Letter>>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(HullError::Domain("substitution over an empty alphabet".into()));
        }
        for img in &images {
            if img.is_empty() {
                return Err(HullError::Domain("erasing substitutions are not supported".into()));
            }
            if img.iter().any(|&l| l as usize >= n) {
                return Err(HullError::Domain("substitution image uses unknown letter".into()));
            }
        }
        Ok(Substitution { images })
    }

    /// a → ab, b → a.
    pub fn fibonacci() -> Self {
        Substitution {
            images: vec![vec![0, 1], vec![0]],
        }
    }

    /// a → ab, b → ba.
    pub fn thue_morse() -> Self {
        Substitution {
            images: vec![vec![0, 1], vec![1, 0]],
        }
    }

    pub fn alphabet_len(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, x: Letter) -> &[Letter] {
        &self.images[x as usize]
    }

    pub fn apply(&self, word: &[Letter]) -> Vec<Letter> {
        word.iter().flat_map(|&x| self.image(x).iter().copied()).collect()
    }

    pub fn iterate(&self, x: Letter, k: usize) -> Vec<Letter> {
        let mut w = vec![x];
        for _ in 0..k {
            w = self.apply(&w);
        }
        w
    }

    /// M[i][j] = number of occurrences of letter i in σ(j).
    pub fn incidence_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.alphabet_len();
        let mut m = vec![vec![0u64; n]; n];
        for (j, img) in self.images.iter().enumerate() {
            for &i in img {
                m[i as usize][j] += 1;
            }
        }
        m
    }

    /// Checks powers 1, …, n² of the incidence matrix for strict positivity.
    pub fn primitivity_witness(&self) -> Option<PrimitivityWitness> {
        let m = self.incidence_matrix();
        let n = m.len();
        let mut p = m.clone();
        for power in 1..=n * n {
            if p.iter().flatten().all(|&x| x > 0) {
                return Some(PrimitivityWitness { power, matrix: p });
            }
            let mut next = vec![vec![0u64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    next[i][j] = (0..n).fold(0u64, |acc, k| acc.saturating_add(p[i][k].saturating_mul(m[k][j])));
                }
            }
            p = next;
        }
        None
    }

    /// All length-`len` factors of the words σ^k(x), iterated until the
    /// factor set is unchanged over two consecutive iterations.
    pub fn factors(&self, len: usize) -> Result<BTreeSet<Vec<Letter>>> {
        if len == 0 {
            return Ok(BTreeSet::from([Vec::new()]));
        }
        let n = self.alphabet_len();
        let mut words: Vec<Vec<Letter>> = (0..n as Letter).map(|x| vec![x]).collect();
        let mut history: Vec<BTreeSet<Vec<Letter>>> = Vec::new();
        loop {
            let long_enough = words.iter().all(|w| w.len() >= len);
            if long_enough {
                let mut set = BTreeSet::new();
                for w in &words {
                    for f in w.windows(len) {
                        set.insert(f.to_vec());
                    }
                }
                history.push(set);
                let k = history.len();
                if k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3] {
                    return Ok(history.pop().unwrap());
                }
            }
            let total: usize = words.iter().map(|w| w.len()).sum();
            if total > WORD_BUDGET {
                return Err(HullError::Resource(format!(
                    "substitution factors of length {len} did not stabilize within {WORD_BUDGET} letters"
                )));
            }
            words = words.iter().map(|w| self.apply(w)).collect();
        }
    }
}

/// A two-sided fixed point of σ^p: the right half is lim σ^{kp}(r), the left
/// half is lim σ^{kp}(l) read backwards from position −1.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    subst: Substitution,
    right: Letter,
    left: Letter,
    power: usize,
    lengths: Vec<Vec<u64>>,
}

const MAX_LEVELS: usize = 200;

impl FixedPoint {
    /// Fixed point with ω_0 = `seed`. The left seed is the first letter l
    /// (in alphabet order) such that σ^p(l) ends with l and l·seed is legal.
    pub fn new(subst: Substitution, seed: Letter) -> Result<Self> {
        let n = subst.alphabet_len();
        if seed as usize >= n {
            return Err(HullError::Domain("seed letter outside alphabet".into()));
        }
        let pairs = subst.factors(2)?;
        for power in 1..=2 * n + 2 {
            let right_img = subst.iterate(seed, power);
            if right_img[0] != seed || right_img.len() < 2 {
                continue;
            }
            let left = (0..n as Letter).find(|&l| {
                let img = subst.iterate(l, power);
                img.len() >= 2 && *img.last().unwrap() == l && pairs.contains(&vec![l, seed])
            });
            if let Some(left) = left {
                let mut lengths = vec![vec![1u64; n]];
                while lengths.len() < MAX_LEVELS {
                    let prev = lengths.last().unwrap();
                    let next: Vec<u64> = (0..n)
                        .map(|x| {
                            subst.images[x]
                                .iter()
                                .fold(0u64, |acc, &y| acc.saturating_add(prev[y as usize]))
                        })
                        .collect();
                    let done = next[seed as usize] >= 1 << 62 && next[left as usize] >= 1 << 62;
                    lengths.push(next);
                    if done {
                        break;
                    }
                }
                return Ok(FixedPoint {
                    subst,
                    right: seed,
                    left,
                    power,
                    lengths,
                });
            }
        }
        Err(HullError::Domain(
            "no two-sided fixed point found for this substitution and seed".into(),
        ))
    }

    pub fn substitution(&self) -> &Substitution {
        &self.subst
    }

    pub fn seeds(&self) -> (Letter, Letter) {
        (self.left, self.right)
    }

    fn level_for(&self, x: Letter, idx: u64) -> Option<usize> {
        (0..self.lengths.len())
            .step_by(self.power)
            .find(|&k| self.lengths[k][x as usize] > idx && self.lengths[k][x as usize] < u64::MAX)
    }

    fn descend(&self, mut x: Letter, mut level: usize, mut idx: u64) -> Letter {
        while level > 0 {
            for &y in self.subst.image(x) {
                let len = self.lengths[level - 1][y as usize];
                if idx < len {
                    x = y;
                    break;
                }
                idx -= len;
            }
            level -= 1;
        }
        x
    }

    pub fn letter_at(&self, n: i64) -> Letter {
        if n >= 0 {
            let idx = n as u64;
            let level = self.level_for(self.right, idx).expect("position beyond i64 range");
            self.descend(self.right, level, idx)
        } else {
            let back = (-(n + 1)) as u64;
            let level = self.level_for(self.left, back).expect("position beyond i64 range");
            let len = self.lengths[level][self.left as usize];
            self.descend(self.left, level, len - 1 - back)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_prefix() {
        let fp = FixedPoint::new(Substitution::fibonacci(), 0).unwrap();
        let prefix: Vec<Letter> = (0..8).map(|n| fp.letter_at(n)).collect();
        // abaababa
        assert_eq!(prefix, vec![0, 1, 0, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn fixed_point_is_invariant() {
        for subst in [Substitution::fibonacci(), Substitution::thue_morse()] {
            let fp = FixedPoint::new(subst.clone(), 0).unwrap();
            let prefix: Vec<Letter> = (0..500).map(|n| fp.letter_at(n)).collect();
            let image = subst.apply(&prefix);
            assert_eq!(&image[..500], &prefix[..]);
            // left half is the reversed tail of σ^{kp}(left seed)
            let (left, _) = fp.seeds();
            let word = subst.iterate(left, 4 * fp.power);
            let tail: Vec<Letter> = (1..=word.len() as i64).map(|k| fp.letter_at(-k)).collect();
            let rev: Vec<Letter> = word.iter().rev().copied().collect();
            assert_eq!(tail, rev);
        }
    }

    #[test]
    fn two_sided_words_are_legal() {
        let subst = Substitution::fibonacci();
        let fp = FixedPoint::new(subst.clone(), 0).unwrap();
        let legal = subst.factors(12).unwrap();
        for start in -300..300 {
            let w: Vec<Letter> = (start..start + 12).map(|n| fp.letter_at(n)).collect();
            assert!(legal.contains(&w), "illegal factor at {start}");
        }
    }

    #[test]
    fn far_positions_resolve() {
        let fp = FixedPoint::new(Substitution::fibonacci(), 0).unwrap();
        let _ = fp.letter_at(i64::MAX / 4);
        let _ = fp.letter_at(-(i64::MAX / 4));
    }

    #[test]
    fn fibonacci_factor_counts() {
        let s = Substitution::fibonacci();
        let two = s.factors(2).unwrap();
        assert!(two.contains(&vec![0, 1]) && two.contains(&vec![1, 0]) && two.contains(&vec![0, 0]));
        assert!(!two.contains(&vec![1, 1]));
        // Sturmian complexity, checked against direct enumeration of a long prefix
        let fp = FixedPoint::new(s.clone(), 0).unwrap();
        let long: Vec<Letter> = (0..5000).map(|n| fp.letter_at(n)).collect();
        for n in 1..=8 {
            let direct: BTreeSet<Vec<Letter>> = long.windows(n).map(|w| w.to_vec()).collect();
            assert_eq!(direct.len(), n + 1);
            assert_eq!(s.factors(n).unwrap(), direct);
        }
    }

    #[test]
    fn primitivity() {
        let w = Substitution::fibonacci().primitivity_witness().unwrap();
        assert_eq!(Substitution::fibonacci().incidence_matrix(), vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(w.power, 2);
        assert_eq!(w.matrix, vec![vec![2, 1], vec![1, 1]]);
        let tm = Substitution::thue_morse().primitivity_witness().unwrap();
        assert_eq!(tm.power, 1);
        let identity = Substitution::new(vec![vec![0], vec![1]]).unwrap();
        assert!(identity.primitivity_witness().is_none());
    }
}
