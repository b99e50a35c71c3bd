//! σ_min(λI − M) for sparse, banded sections.
//!
//! The matrix is reordered by reverse Cuthill–McKee when that narrows the
//! band, factored by banded LU with partial pivoting, and the top eigenvalue
//! of (BᴴB)⁻¹ is found by Lanczos with full reorthogonalization.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::smallest_singular_value_dense;
use crate::error::{HullError, Result};
use crate::rng::SplitMix;

/// Matrices up to this size always go through the full SVD.
pub const DENSE_CUTOFF: usize = 64;
/// Lanczos stops once β·|y_k| ≤ LANCZOS_TOL·θ.
pub const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_MAX_STEPS: usize = 400;
const START_SEED: u64 = 0x5EED_0B5E_55ED;

/// Row-major band storage; row i keeps columns i−kl ..= i+kl+ku so that
/// pivoting fill-in fits.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    /// Entry (i, j) = m[perm[i], perm[j]].
    pub fn from_dense(m: &DMatrix<Complex64>, perm: &[usize], kl: usize, ku: usize) -> Self {
        let n = perm.len();
        let w = Self::width(kl, ku);
        let mut data = vec![Complex64::new(0.0, 0.0); n * w];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                data[i * w + j + kl - i] = m[(perm[i], perm[j])];
            }
        }
        BandMatrix { n, kl, ku, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * Self::width(self.kl, self.ku) + j + self.kl - i
    }

    /// Replaces self by z·I + self.
    pub fn shift_diagonal(&mut self, z: Complex64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += z;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    /// Factors in place; `None` on an exactly zero pivot column.
    pub fn factor(mut self) -> Option<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let mut mult = vec![Complex64::new(0.0, 0.0); n * kl];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                mult[k * kl + (i - k - 1)] = l;
                self.data[ik] = Complex64::new(0.0, 0.0);
                if l != Complex64::new(0.0, 0.0) {
                    for j in k + 1..=right {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Some(BandLu { u: self, mult, piv })
    }
}

/// P-L-U factors of a band matrix, stored as elimination steps.
#[derive(Clone, Debug)]
pub struct BandLu {
    u: BandMatrix,
    mult: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn upper_reach(&self) -> usize {
        self.u.kl + self.u.ku
    }

    /// b ← B⁻¹ b.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl) = (self.u.n, self.u.kl);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.mult[k * kl + (i - k - 1)] * bk;
            }
        }
        let reach = self.upper_reach();
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.u.data[self.u.idx(k, j)] * b[j];
            }
            b[k] = s / self.u.data[self.u.idx(k, k)];
        }
    }

    /// b ← B⁻ᴴ b.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let (n, kl) = (self.u.n, self.u.kl);
        let reach = self.upper_reach();
        for k in 0..n {
            let mut s = b[k];
            for i in k.saturating_sub(reach)..k {
                s -= self.u.data[self.u.idx(i, k)].conj() * b[i];
            }
            b[k] = s / self.u.data[self.u.idx(k, k)].conj();
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= self.mult[k * kl + (i - k - 1)].conj() * b[i];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }
}

/// (lower, upper) bandwidth of m[perm, perm].
pub fn bandwidths(m: &DMatrix<Complex64>, perm: &[usize]) -> (usize, usize) {
    let n = perm.len();
    let mut pos = vec![0usize; n];
    for (i, &p) in perm.iter().enumerate() {
        pos[p] = i;
    }
    let (mut kl, mut ku) = (0, 0);
    for c in 0..n {
        for r in 0..n {
            let z = m[(r, c)];
            if z.re != 0.0 || z.im != 0.0 {
                let (i, j) = (pos[r], pos[c]);
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
    }
    (kl, ku)
}

/// Reverse Cuthill–McKee order of the symmetrized sparsity graph.
///
/// Each component starts from a minimum-degree vertex; ties break by index.
pub fn reverse_cuthill_mckee(m: &DMatrix<Complex64>) -> Vec<usize> {
    let n = m.nrows();
    let nz = |z: Complex64| z.re != 0.0 || z.im != 0.0;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && (nz(m[(i, j)]) || nz(m[(j, i)]))).collect())
        .collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (adj[i].len(), i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            next.sort_by_key(|&u| (adj[u].len(), u));
            for u in next {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Largest eigenvalue of the symmetric tridiagonal (α, β) by Sturm bisection.
fn top_ritz_value(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    if k == 1 {
        return alpha[0];
    }
    let off = |i: usize| -> f64 {
        let l = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < k { beta[i].abs() } else { 0.0 };
        l + r
    };
    let mut lo = (0..k).map(|i| alpha[i] - off(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| alpha[i] + off(i)).fold(f64::NEG_INFINITY, f64::max);
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = alpha[0] - x;
        for i in 0..k {
            if i > 0 {
                let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
                d = alpha[i] - x - beta[i - 1] * beta[i - 1] / prev;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if count_below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Solves a general tridiagonal system with partial pivoting (gtsv).
fn tridiagonal_solve(sub: &[f64], diag: &[f64], sup: &[f64], b: &mut [f64]) {
    let n = diag.len();
    let (mut dl, mut d, mut du) = (sub.to_vec(), diag.to_vec(), sup.to_vec());
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let tiny = f64::EPSILON * diag.iter().chain(sub).fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fact * b[i + 1];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

/// Unit eigenvector of T for θ by two steps of inverse iteration.
fn ritz_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let k = alpha.len();
    if k == 1 {
        return vec![1.0];
    }
    let diag: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
    let mut y = vec![1.0; k];
    for _ in 0..2 {
        tridiagonal_solve(&beta[..k - 1], &diag, &beta[..k - 1], &mut y);
        let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            let mut e = vec![0.0; k];
            e[k - 1] = 1.0;
            return e;
        }
        y.iter_mut().for_each(|x| *x /= norm);
    }
    y
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Top eigenvalue of (BᴴB)⁻¹ given the LU factors of B.
fn lanczos_inverse_gram(lu: &BandLu, start: &[Complex64]) -> Result<f64> {
    let n = start.len();
    let steps = LANCZOS_MAX_STEPS.min(n);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let s = norm(start);
    basis.push(start.iter().map(|x| x / s).collect());
    for j in 0..steps {
        let mut w = basis[j].clone();
        lu.solve_adjoint(&mut w);
        lu.solve(&mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Gram–Schmidt against the whole basis; a second pass only when the
        // first one cancelled most of w (Kahan–Parlett criterion)
        let mut b = norm(&w);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            let after = norm(&w);
            let enough = after >= 0.7 * b;
            b = after;
            if enough {
                break;
            }
        }
        beta.push(b);
        let theta = top_ritz_value(&alpha, &beta[..j]);
        if !theta.is_finite() {
            return Ok(f64::INFINITY);
        }
        let y = ritz_vector(&alpha, &beta, theta);
        let residual = b * y[j].abs();
        if residual <= LANCZOS_TOL * theta.abs() || j + 1 == n {
            return Ok(theta);
        }
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(HullError::NoConvergence { budget: steps })
}

/// Precomputed structure for σ_min(zI − M) at many shifts z.
#[derive(Clone, Debug)]
pub struct SigmaMinSolver {
    route: Route,
}

#[derive(Clone, Debug)]
enum Route {
    Dense(DMatrix<Complex64>),
    Band { template: BandMatrix, start: Vec<Complex64> },
}

impl SigmaMinSolver {
    /// Picks the band route when n > DENSE_CUTOFF and the (possibly
    /// reordered) band is narrow; otherwise every shift is a full SVD.
    pub fn new(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(HullError::Domain("σ_min of a non-square shift".into()));
        }
        let n = m.nrows();
        if n <= DENSE_CUTOFF {
            return Ok(SigmaMinSolver { route: Route::Dense(m.clone()) });
        }
        Ok(Self::band(m).unwrap_or_else(|| SigmaMinSolver { route: Route::Dense(m.clone()) }))
    }

    /// Band route regardless of size, if the band is narrow enough to pay off.
    pub fn band(m: &DMatrix<Complex64>) -> Option<Self> {
        let n = m.nrows();
        let natural: Vec<usize> = (0..n).collect();
        let (kl0, ku0) = bandwidths(m, &natural);
        let rcm = reverse_cuthill_mckee(m);
        let (kl1, ku1) = bandwidths(m, &rcm);
        let (perm, kl, ku) = if kl1 + ku1 < kl0 + ku0 { (rcm, kl1, ku1) } else { (natural, kl0, ku0) };
        if 4 * (2 * kl + ku + 1) > n.max(8) {
            return None;
        }
        let mut template = BandMatrix::from_dense(m, &perm, kl, ku);
        template.scale(-1.0);
        let mut rng = SplitMix::new(START_SEED);
        let start = (0..n)
            .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
            .collect();
        Some(SigmaMinSolver { route: Route::Band { template, start } })
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.route, Route::Band { .. })
    }

    /// σ_min(zI − M).
    pub fn at(&self, z: Complex64) -> Result<f64> {
        match &self.route {
            Route::Dense(m) => {
                let n = m.nrows();
                let shifted = DMatrix::<Complex64>::identity(n, n) * z - m;
                Ok(smallest_singular_value_dense(&shifted))
            }
            Route::Band { template, start } => {
                let mut b = template.clone();
                b.shift_diagonal(z);
                let Some(lu) = b.factor() else { return Ok(0.0) };
                let theta = lanczos_inverse_gram(&lu, start)?;
                if !theta.is_finite() || theta <= 0.0 {
                    return Ok(0.0);
                }
                Ok(1.0 / theta.sqrt())
            }
        }
    }
}

/// σ_min(M), banded when profitable.
pub fn smallest_singular_value(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    SigmaMinSolver::new(m)?.at(Complex64::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = SplitMix::new(seed);
        DMatrix::from_fn(n, n, |i, j| {
            if (j + kl >= i) && (j <= i + ku) {
                Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn band_solves_match_dense() {
        let m = random_banded(40, 2, 3, 7);
        let perm: Vec<usize> = (0..40).collect();
        let lu = BandMatrix::from_dense(&m, &perm, 2, 3).factor().unwrap();
        let x: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b = &m * nalgebra::DVector::from_vec(x.clone());
        let mut y: Vec<Complex64> = b.iter().copied().collect();
        lu.solve(&mut y);
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-9));
        let bh = m.adjoint() * nalgebra::DVector::from_vec(x.clone());
        let mut z: Vec<Complex64> = bh.iter().copied().collect();
        lu.solve_adjoint(&mut z);
        assert!(z.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn jordan_block_and_singular_input() {
        let j = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        );
        // J is singular; ((3 − √5)/2)^{1/2} is σ_min of J − I
        assert_eq!(smallest_singular_value(&j).unwrap(), 0.0);
        let shifted = &j - DMatrix::<Complex64>::identity(2, 2);
        let expect = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        assert!((smallest_singular_value(&shifted).unwrap() - expect).abs() < 1e-15);
        // odd path length puts 0 in the spectrum
        let lap = DMatrix::from_fn(101, 101, |i, j| {
            if i.abs_diff(j) == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let solver = SigmaMinSolver::new(&lap).unwrap();
        assert!(solver.is_banded());
        assert!(solver.at(Complex64::new(0.0, 0.0)).unwrap() < 1e-12);
    }

    #[test]
    fn band_route_agrees_with_svd() {
        for (n, kl, ku, seed) in [(80, 1, 1, 1), (120, 2, 1, 2), (200, 3, 3, 3), (150, 0, 2, 4)] {
            let m = random_banded(n, kl, ku, seed);
            let solver = SigmaMinSolver::band(&m).unwrap();
            for z in [Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.2), Complex64::new(1.5, 0.5)] {
                let shifted = DMatrix::<Complex64>::identity(n, n) * z - &m;
                let dense = smallest_singular_value_dense(&shifted);
                let band = solver.at(z).unwrap();
                assert!((band - dense).abs() <= 1e-8 * dense.max(1e-3), "n={n} z={z}: {band} vs {dense}");
            }
        }
    }

    #[test]
    fn rcm_narrows_a_wrapped_band() {
        let n = 90;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            m[(i, (i + 1) % n)] = Complex64::new(1.0, 0.0);
            m[((i + 1) % n, i)] = Complex64::new(2.0, 0.0);
        }
        let natural: Vec<usize> = (0..n).collect();
        let (kl, ku) = bandwidths(&m, &natural);
        assert_eq!(kl.max(ku), n - 1);
        let (kl, ku) = bandwidths(&m, &reverse_cuthill_mckee(&m));
        assert!(kl.max(ku) <= 2);
        let solver = SigmaMinSolver::band(&m).unwrap();
        let z = Complex64::new(0.25, 0.1);
        let dense = smallest_singular_value_dense(&(DMatrix::<Complex64>::identity(n, n) * z - &m));
        assert!((solver.at(z).unwrap() - dense).abs() <= 1e-8 * dense);
    }
}
