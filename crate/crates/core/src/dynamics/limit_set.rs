use std::sync::Arc;

use super::{Configuration, Pattern, SubshiftSpec};
use crate::error::Result;
use crate::group::{EscapeSequence, Window};

/// Default number of final terms that must agree for a probe to count as stabilized.
pub const DEFAULT_STABLE_RUN: usize = 3;

#[derive(Clone, Debug)]
pub struct LimitProbe {
    pub sequence: EscapeSequence,
    /// Pattern of shift(ω, g_n) on W at the last index, if the final terms agree.
    pub pattern: Option<Pattern>,
    /// First index of the final run of identical patterns.
    pub stable_from: Option<usize>,
}

impl LimitProbe {
    pub fn stabilized(&self) -> bool {
        self.pattern.is_some()
    }

    pub fn direction(&self) -> Option<&[f64]> {
        self.sequence.claimed_direction.as_deref()
    }
}

/// Finite sample of L(ω) on a fixed observation window.
#[derive(Clone, Debug)]
pub struct LimitSetSample {
    pub source: Configuration,
    pub window: Arc<Window>,
    pub probes: Vec<LimitProbe>,
}

impl LimitSetSample {
    pub fn patterns(&self) -> Vec<&Pattern> {
        self.probes.iter().filter_map(|p| p.pattern.as_ref()).collect()
    }

    /// Probes recorded under L^η(ω): sequences whose claimed direction is η.
    pub fn directional(&self, eta: &[f64]) -> Vec<&LimitProbe> {
        let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.probes
            .iter()
            .filter(|p| {
                p.direction().is_some_and(|d| {
                    d.len() == eta.len() && d.iter().zip(eta).all(|(a, b)| (a - b / norm).abs() < 1e-12)
                })
            })
            .collect()
    }

    /// Every recorded pattern, moved to W + s for each s, is legal in the hull.
    pub fn invariant_under(&self, hull: &SubshiftSpec, moves: &[crate::GroupElement]) -> Result<bool> {
        for p in self.patterns() {
            for s in moves {
                if !hull.is_legal(&p.translate(s)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// For each sequence, the pattern of shift(ω, g_n) on W once the last `run`
/// terms agree.
pub fn sample_limit_set(
    omega: &Configuration,
    window: &Arc<Window>,
    seqs: &[EscapeSequence],
    run: usize,
) -> Result<LimitSetSample> {
    let run = run.max(1);
    let mut probes = Vec::with_capacity(seqs.len());
    for seq in seqs {
        let patterns = seq
            .terms
            .iter()
            .map(|g| omega.letters_at(g, window))
            .collect::<Result<Vec<_>>>()?;
        let mut probe = LimitProbe {
            sequence: seq.clone(),
            pattern: None,
            stable_from: None,
        };
        if patterns.len() >= run {
            let last = patterns.last().unwrap();
            let tail_ok = patterns[patterns.len() - run..].iter().all(|p| p == last);
            if tail_ok {
                let start = patterns.iter().rposition(|p| p != last).map_or(0, |i| i + 1);
                probe.stable_from = Some(start);
                probe.pattern = Some(Pattern::new(window.clone(), last.clone())?);
            }
        }
        probes.push(probe);
    }
    Ok(LimitSetSample {
        source: omega.clone(),
        window: window.clone(),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::catalog;
    use crate::group::{GroupElement, GroupSpec};

    #[test]
    fn period_two_probes() {
        let h = catalog::period_q(2).unwrap();
        let w = h.reference().unwrap();
        let win = Arc::new(Window::interval(4).unwrap());
        let even = EscapeSequence::arithmetic(GroupElement::z(0), GroupElement::z(2), 1, 10);
        let odd = EscapeSequence::arithmetic(GroupElement::z(1), GroupElement::z(2), 1, 10);
        let s = sample_limit_set(&w, &win, &[even, odd], DEFAULT_STABLE_RUN).unwrap();
        assert_eq!(s.probes[0].stable_from, Some(0));
        assert_eq!(s.probes[0].pattern.as_ref().unwrap(), &w.pattern_on(&win).unwrap());
        assert_eq!(
            s.probes[1].pattern.as_ref().unwrap(),
            &w.shift(&GroupElement::z(1)).unwrap().pattern_on(&win).unwrap()
        );
    }

    #[test]
    fn half_plane_directions() {
        let h = catalog::halfplane_ab().unwrap();
        let w = h.reference().unwrap();
        let win = Arc::new(Window::ball(GroupSpec::Lattice(2), 3).unwrap());
        let z2 = |x, y| GroupElement::lattice(&[x, y]).unwrap();
        let east = EscapeSequence::arithmetic(z2(0, 2), z2(4, 0), 1, 12).with_direction(&[1.0, 0.0]).unwrap();
        let west = EscapeSequence::arithmetic(z2(1, -3), z2(-4, 0), 1, 12).with_direction(&[-1.0, 0.0]).unwrap();
        let s = sample_limit_set(&w, &win, &[east, west], DEFAULT_STABLE_RUN).unwrap();
        let a = h.alphabet().letter("a").unwrap();
        let b = h.alphabet().letter("b").unwrap();
        let e = s.directional(&[1.0, 0.0]);
        assert_eq!(e.len(), 1);
        assert!(e[0].pattern.as_ref().unwrap().letters().iter().all(|&l| l == a));
        let wst = s.directional(&[-2.0, 0.0]);
        assert!(wst[0].pattern.as_ref().unwrap().letters().iter().all(|&l| l == b));
        assert!(s.invariant_under(&h, &GroupSpec::Lattice(2).symmetric_generators()).unwrap());
    }

    #[test]
    fn unstable_probe() {
        let h = catalog::period_q(2).unwrap();
        let w = h.reference().unwrap();
        let win = Arc::new(Window::interval(2).unwrap());
        let seq = EscapeSequence::arithmetic(GroupElement::z(0), GroupElement::z(1), 1, 9);
        let s = sample_limit_set(&w, &win, &[seq], 3).unwrap();
        assert!(!s.probes[0].stabilized());
    }

    #[test]
    fn fibonacci_probes_are_legal() {
        let h = catalog::fibonacci();
        let w = h.reference().unwrap();
        let win = Arc::new(Window::ball(GroupSpec::Lattice(1), 5).unwrap());
        let seqs = catalog::fibonacci_sequences(0..4, 8);
        let s = sample_limit_set(&w, &win, &seqs, DEFAULT_STABLE_RUN).unwrap();
        assert!(s.probes.iter().all(|p| p.stabilized()));
        for p in s.patterns() {
            assert!(h.is_legal(p).unwrap());
        }
        assert!(s.invariant_under(&h, &GroupSpec::Lattice(1).symmetric_generators()).unwrap());
    }
}
