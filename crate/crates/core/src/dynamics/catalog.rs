//! Named hulls used by the CLI and the test suites.

use std::ops::Range;
use std::sync::Arc;

use super::{Alphabet, Configuration, ForbiddenPattern, HullKind, Substitution, SubshiftSpec};
use crate::error::{HullError, Result};
use crate::group::{EscapeSequence, GroupElement, GroupSpec};

pub const NAMES: [&str; 5] = ["fibonacci", "thue_morse", "period_q", "full_pm1", "halfplane_ab"];

fn ab() -> Arc<Alphabet> {
    Arc::new(Alphabet::from_names(&["a", "b"], &[0.0, 1.0]).expect("static alphabet"))
}

/// Hull of the Fibonacci substitution a → ab, b → a; letter values (0, 1).
pub fn fibonacci() -> SubshiftSpec {
    SubshiftSpec::new("fibonacci", GroupSpec::Lattice(1), ab(), HullKind::Substitution(Substitution::fibonacci()))
        .expect("static hull")
}

/// Hull of the Thue–Morse substitution a → ab, b → ba; letter values (0, 1).
pub fn thue_morse() -> SubshiftSpec {
    SubshiftSpec::new("thue_morse", GroupSpec::Lattice(1), ab(), HullKind::Substitution(Substitution::thue_morse()))
        .expect("static hull")
}

/// Orbit of the q-periodic word a b c … on ℤ, letter j carrying value j.
pub fn period_q(q: usize) -> Result<SubshiftSpec> {
    if q == 0 || q > 26 {
        return Err(HullError::Domain(format!("period {q} outside 1..=26")));
    }
    let names: Vec<String> = (0..q).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let values: Vec<f64> = (0..q).map(|i| i as f64).collect();
    let alphabet = Arc::new(Alphabet::new(names, values)?);
    let cell = (0..q as u8).collect();
    let omega = Configuration::periodic(GroupSpec::Lattice(1), alphabet.clone(), vec![q as i64], cell)?;
    SubshiftSpec::new(&format!("period_{q}"), GroupSpec::Lattice(1), alphabet, HullKind::Periodic(omega))
}

/// Full shift over {−1, +1} on ℤ^rank.
pub fn full_pm1(rank: u8) -> Result<SubshiftSpec> {
    let group = GroupSpec::lattice(rank as usize)?;
    let alphabet = Arc::new(Alphabet::from_names(&["-1", "1"], &[-1.0, 1.0])?);
    SubshiftSpec::new("full_pm1", group, alphabet, HullKind::FullShift)
}

/// Full shift over a two-letter alphabet {a, b} on an arbitrary group.
pub fn full_ab(group: GroupSpec) -> Result<SubshiftSpec> {
    SubshiftSpec::new("full_ab", group, ab(), HullKind::FullShift)
}

/// Subshift of ℤ² in which columns are constant and no a is followed by b
/// along the first axis. Its points are the half-planes {k₁ ≥ t} filled
/// with a (b elsewhere) together with the two constants; the reference point
/// is the half-plane with t = 0.
pub fn halfplane_ab() -> Result<SubshiftSpec> {
    let group = GroupSpec::Lattice(2);
    let o = group.identity();
    let e1 = group.element(&[1, 0])?;
    let e2 = group.element(&[0, 1])?;
    let forbidden = vec![
        ForbiddenPattern { cells: vec![(o, 0), (e1, 1)] },
        ForbiddenPattern { cells: vec![(o, 0), (e2, 1)] },
        ForbiddenPattern { cells: vec![(o, 1), (e2, 0)] },
    ];
    let alphabet = ab();
    let reference = Configuration::half_space(group, alphabet.clone(), 0, 0, 1)?;
    Ok(SubshiftSpec::new("halfplane_ab", group, alphabet, HullKind::Forbidden(forbidden))?.with_reference(reference))
}

/// Catalog lookup; `q` parametrizes `period_q`, `rank` the full shift.
pub fn by_name(name: &str, q: usize, rank: u8) -> Result<SubshiftSpec> {
    match name {
        "fibonacci" => Ok(fibonacci()),
        "thue_morse" => Ok(thue_morse()),
        "period_q" => period_q(q),
        "full_pm1" => full_pm1(rank),
        "halfplane_ab" => halfplane_ab(),
        other => Err(HullError::Domain(format!(
            "unknown hull {other:?}; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}

/// Lengths |σ^{2n}(a)| = F_{2n+2} of the even Fibonacci words.
fn even_fibonacci_lengths(first: usize, count: usize) -> Vec<i64> {
    let (mut a, mut b) = (1i64, 1i64);
    let mut fib = vec![0i64, 1, 1];
    while fib.len() < 2 * (first + count) + 3 {
        let c = a + b;
        a = b;
        b = c;
        fib.push(c);
    }
    (first..first + count).map(|n| fib[2 * n + 2]).collect()
}

/// Sequences g_n = F_{2n+2} + c, one per offset c: return times of the
/// Fibonacci fixed point near its origin, shifted by c.
pub fn fibonacci_sequences(offsets: Range<i64>, count: usize) -> Vec<EscapeSequence> {
    let lengths = even_fibonacci_lengths(5, count);
    offsets
        .map(|c| EscapeSequence::new(lengths.iter().map(|&f| GroupElement::z(f + c)).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_resolve() {
        for name in NAMES {
            assert!(by_name(name, 3, 1).is_ok(), "{name}");
        }
        assert!(by_name("nope", 3, 1).is_err());
    }

    #[test]
    fn fibonacci_lengths() {
        let s = Substitution::fibonacci();
        for (n, len) in (1..6).zip(even_fibonacci_lengths(1, 5)) {
            assert_eq!(s.iterate(0, 2 * n).len() as i64, len);
        }
    }
}
