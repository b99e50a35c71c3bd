//! The product metric d(ω,ν) = Σ_k 2^{−|k|} min(|ω_k − ν_k|, 1) on lattice configurations.
//!
//! The sum over ball(M) is exact; the remainder over |k| > M is bounded by
//! l′ · Σ_{j>M} |S_j| 2^{−j}, with l′ = min(l, 1) and |S_j| the size of the
//! ℓ¹ sphere of radius j in ℤ^N:
//!
//!   |S_j| = Σ_{i=1}^{min(N,j)} 2^i C(N,i) C(j−1,i−1).
//!
//! Shell terms are summed explicitly up to j = M + EXPLICIT_SHELLS. Past
//! that, |S_j| 2^{−j} ≤ t_j := 2^N C(j+N−1, N−1) 2^{−j}, and the ratio
//! t_{j+1}/t_j = (j+N)/(2(j+1)) is decreasing in j, so the rest is at most
//! t_J / (1 − ρ) with ρ the ratio at J.

use serde::Serialize;

use super::Configuration;
use crate::error::{HullError, Result};
use crate::group::{ball_elements, GroupSpec};

const EXPLICIT_SHELLS: u64 = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    /// Σ over ball(M).
    pub value: f64,
    /// Upper bound for the remainder over |k| > M.
    pub tail_bound: f64,
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of elements of ℓ¹ word length exactly j in ℤ^N.
pub fn lattice_shell_size(rank: u64, j: u64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    (1..=rank.min(j))
        .map(|i| 2f64.powi(i as i32) * binomial(rank, i) * binomial(j - 1, i - 1))
        .sum()
}

/// Σ_{j>M} |S_j| 2^{−j} for ℤ^N, rounded up.
pub fn lattice_tail_sum(rank: u64, m: u64) -> f64 {
    let last = m + EXPLICIT_SHELLS;
    let mut sum = 0.0;
    for j in m + 1..=last {
        sum += lattice_shell_size(rank, j) * 0.5f64.powi(j as i32);
    }
    let j = last + 1;
    let t = 2f64.powi(rank as i32) * binomial(j + rank - 1, rank - 1) * 0.5f64.powi(j as i32);
    let rho = (j + rank) as f64 / (2.0 * (j + 1) as f64);
    // relative slack for rounding in the explicit sum
    (sum + t / (1.0 - rho)) * (1.0 + 1e-12)
}

/// d(ω, ν) restricted to ball(M), with a certified bound on the rest.
pub fn metric_distance(omega: &Configuration, nu: &Configuration, m: u32) -> Result<MetricValue> {
    if omega.group() != nu.group() {
        return Err(HullError::GroupMismatch("configurations on different groups".into()));
    }
    let GroupSpec::Lattice(rank) = omega.group() else {
        return Err(HullError::Unsupported("the product metric is defined for lattice configurations".into()));
    };
    let mut value = 0.0;
    for k in ball_elements(omega.group(), m)? {
        let gap = (omega.value(&k)? - nu.value(&k)?).abs().min(1.0);
        if gap > 0.0 {
            let len: i64 = k.coords().iter().map(|c| c.abs()).sum();
            value += gap * 0.5f64.powi(len as i32);
        }
    }
    let span = omega.alphabet().value_span().max(nu.alphabet().value_span()).min(1.0);
    Ok(MetricValue {
        value,
        tail_bound: span * lattice_tail_sum(rank as u64, m as u64),
    })
}
