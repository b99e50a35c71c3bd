use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{Alphabet, Configuration, Letter};
use crate::error::{HullError, Result};
use crate::group::{word_length, GroupElement, GroupSpec, Window};

/// Maps (offset index, letters on the stencil) to a d×d block.
pub type CoeffFn = dyn Fn(usize, &[Letter]) -> DMatrix<Complex64> + Send + Sync;

/// Largest alphabet^stencil count enumerated when computing the norm bound.
const BOUND_BUDGET: f64 = (1 << 16) as f64;

pub const NAMES: [&str; 5] = [
    "fibonacci_jacobi",
    "feinberg_zee",
    "free_laplacian",
    "period_q_jacobi",
    "heisenberg_adjacency",
];

/// An equivariant family ω ↦ A(ω) of finite propagation:
/// entry(k, h) = coeff(s, ω on stencil + k) when h = s + k for s ∈ S, else 0.
#[derive(Clone)]
pub struct CoefficientScheme {
    name: String,
    group: GroupSpec,
    alphabet: Arc<Alphabet>,
    offsets: Vec<GroupElement>,
    stencil: Arc<Window>,
    block_dim: usize,
    coeff: Arc<CoeffFn>,
    pattern_free: bool,
    bound: f64,
    propagation: u32,
}

impl fmt::Debug for CoefficientScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientScheme")
            .field("name", &self.name)
            .field("group", &self.group)
            .field("offsets", &self.offsets)
            .field("radius", &self.radius())
            .field("block_dim", &self.block_dim)
            .finish()
    }
}

fn scalar(d: usize, z: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(d, d, z)
}

fn real(d: usize, x: f64) -> DMatrix<Complex64> {
    scalar(d, Complex64::new(x, 0.0))
}

impl CoefficientScheme {
    /// `pattern_free` marks coefficients that ignore ω; such schemes accept
    /// periodic boundaries on any configuration.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        group: GroupSpec,
        alphabet: Arc<Alphabet>,
        offsets: Vec<GroupElement>,
        radius: u32,
        block_dim: usize,
        pattern_free: bool,
        coeff: Arc<CoeffFn>,
    ) -> Result<Self> {
        if block_dim == 0 {
            return Err(HullError::Domain("block dimension must be positive".into()));
        }
        if offsets.is_empty() {
            return Err(HullError::Domain("empty offset set".into()));
        }
        for (i, s) in offsets.iter().enumerate() {
            if s.group() != group {
                return Err(HullError::GroupMismatch(format!("offset {s} not in {group}")));
            }
            if offsets[..i].contains(s) {
                return Err(HullError::Domain(format!("duplicate offset {s}")));
            }
        }
        let stencil = Arc::new(Window::ball(group, radius)?);
        let propagation = offsets.iter().map(word_length).collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(0);
        let mut scheme = CoefficientScheme {
            name: name.to_string(),
            group,
            alphabet,
            offsets,
            stencil,
            block_dim,
            coeff,
            pattern_free,
            bound: 0.0,
            propagation,
        };
        scheme.bound = scheme.compute_bound()?;
        Ok(scheme)
    }

    /// Σ_s max over all stencil patterns of ‖coeff(s, ·)‖₂.
    fn compute_bound(&self) -> Result<f64> {
        let a = self.alphabet.len();
        let cells = self.stencil.len();
        if (a as f64).powi(cells as i32) > BOUND_BUDGET {
            return Err(HullError::Resource(format!("{a}^{cells} stencil patterns")));
        }
        let mut best = vec![0.0f64; self.offsets.len()];
        let mut cur = vec![0 as Letter; cells];
        loop {
            for (i, b) in best.iter_mut().enumerate() {
                let block = (self.coeff)(i, &cur);
                if block.nrows() != self.block_dim || block.ncols() != self.block_dim {
                    return Err(HullError::Domain(format!("coefficient block of scheme {} has wrong size", self.name)));
                }
                *b = b.max(crate::spectral::sigma_max(&block));
            }
            let mut i = cells;
            loop {
                if i == 0 {
                    return Ok(best.iter().sum());
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

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn offsets(&self) -> &[GroupElement] {
        &self.offsets
    }

    pub fn radius(&self) -> u32 {
        match self.stencil.descriptor() {
            crate::group::WindowDescriptor::Ball { radius } => *radius,
            _ => unreachable!("stencil is a ball"),
        }
    }

    pub fn stencil(&self) -> &Arc<Window> {
        &self.stencil
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn is_pattern_free(&self) -> bool {
        self.pattern_free
    }

    /// Max word length over S.
    pub fn propagation(&self) -> u32 {
        self.propagation
    }

    /// Upper bound for ‖A(ω)‖₂, uniform in ω.
    pub fn norm_upper_bound(&self) -> f64 {
        self.bound
    }

    pub fn coeff(&self, offset: usize, letters: &[Letter]) -> DMatrix<Complex64> {
        (self.coeff)(offset, letters)
    }

    fn check(&self, omega: &Configuration) -> Result<()> {
        if omega.group() != self.group {
            return Err(HullError::GroupMismatch(format!(
                "scheme {} on {} applied to a configuration on {}",
                self.name,
                self.group,
                omega.group()
            )));
        }
        if omega.alphabet().len() != self.alphabet.len() {
            return Err(HullError::Domain("configuration alphabet does not match the scheme".into()));
        }
        Ok(())
    }

    /// Offset index s with h = s + k, if any.
    pub fn offset_between(&self, k: &GroupElement, h: &GroupElement) -> Result<Option<usize>> {
        let s = h.compose(&k.inverse())?;
        Ok(self.offsets.iter().position(|t| *t == s))
    }

    /// Nonzero blocks of row k: (column h, offset index, block).
    pub fn row(&self, omega: &Configuration, k: &GroupElement) -> Result<Vec<(GroupElement, usize, DMatrix<Complex64>)>> {
        self.check(omega)?;
        let letters = omega.letters_at(k, &self.stencil)?;
        self.offsets
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((s.compose(k)?, i, (self.coeff)(i, &letters))))
            .collect()
    }

    /// The d×d block of A(ω) at (k, h).
    pub fn entry(&self, omega: &Configuration, k: &GroupElement, h: &GroupElement) -> Result<DMatrix<Complex64>> {
        self.check(omega)?;
        match self.offset_between(k, h)? {
            Some(i) => Ok((self.coeff)(i, &omega.letters_at(k, &self.stencil)?)),
            None => Ok(DMatrix::zeros(self.block_dim, self.block_dim)),
        }
    }

    /// Checks entry(shift(ω,g), k, h) = entry(ω, k+g, h+g) bit for bit on W × W.
    pub fn verify_equivariance(&self, omega: &Configuration, g: &GroupElement, w: &Window) -> Result<bool> {
        self.check(omega)?;
        let shifted = omega.shift(g)?;
        let translated: Vec<GroupElement> = w.elements().iter().map(|h| h.compose(g)).collect::<Result<_>>()?;
        for (k, kg) in w.elements().iter().zip(&translated) {
            for (h, hg) in w.elements().iter().zip(&translated) {
                // both blocks structurally zero: nothing to compare
                if self.offset_between(k, h)?.is_none() && self.offset_between(kg, hg)?.is_none() {
                    continue;
                }
                let lhs = self.entry(&shifted, k, h)?;
                let rhs = self.entry(omega, kg, hg)?;
                let same = lhs
                    .iter()
                    .zip(rhs.iter())
                    .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
                if !same {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Offsets {0} ∪ generators± in canonical order.
fn nearest_neighbor_offsets(group: GroupSpec) -> Vec<GroupElement> {
    let mut offsets = group.symmetric_generators();
    offsets.push(group.identity());
    offsets.sort();
    offsets
}

/// Nearest-neighbour hopping I_d plus `diag(letters)`·I_d on the diagonal.
fn nearest_neighbor(
    name: &str,
    group: GroupSpec,
    alphabet: Arc<Alphabet>,
    radius: u32,
    block_dim: usize,
    pattern_free: bool,
    diag: impl Fn(&[Letter]) -> f64 + Send + Sync + 'static,
) -> Result<CoefficientScheme> {
    let offsets = nearest_neighbor_offsets(group);
    let zero = offsets.iter().position(|s| s.is_identity()).unwrap();
    let d = block_dim;
    let coeff: Arc<CoeffFn> = Arc::new(move |i, letters| if i == zero { real(d, diag(letters)) } else { real(d, 1.0) });
    CoefficientScheme::new(name, group, alphabet, offsets, radius, block_dim, pattern_free, coeff)
}

/// Discrete Laplacian-type adjacency Σ_s V_s with zero diagonal.
pub fn free_laplacian(group: GroupSpec, alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    nearest_neighbor("free_laplacian", group, alphabet, 0, block_dim, true, |_| 0.0)
}

/// Schrödinger-type operator: adjacency plus the letter value at the site.
pub fn jacobi(name: &str, group: GroupSpec, alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    let values = alphabet.values().to_vec();
    nearest_neighbor(name, group, alphabet, 0, block_dim, false, move |l| values[l[0] as usize])
}

pub fn fibonacci_jacobi(alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    jacobi("fibonacci_jacobi", GroupSpec::Lattice(1), alphabet, block_dim)
}

pub fn period_q_jacobi(alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    jacobi("period_q_jacobi", GroupSpec::Lattice(1), alphabet, block_dim)
}

/// Random-hopping model on ℤ: (Ax)_k = ω_k x_{k−1} + x_{k+1}.
pub fn feinberg_zee(alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    let g = GroupSpec::Lattice(1);
    let values = alphabet.values().to_vec();
    let d = block_dim;
    let coeff: Arc<CoeffFn> =
        Arc::new(move |i, l| if i == 0 { real(d, values[l[0] as usize]) } else { real(d, 1.0) });
    CoefficientScheme::new(
        "feinberg_zee",
        g,
        alphabet,
        vec![GroupElement::z(-1), GroupElement::z(1)],
        0,
        block_dim,
        false,
        coeff,
    )
}

/// Adjacency of the Cayley graph of H₃(ℤ) plus the mean letter value over
/// the unit ball as potential.
pub fn heisenberg_adjacency(alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    let values = alphabet.values().to_vec();
    nearest_neighbor("heisenberg_adjacency", GroupSpec::Heisenberg, alphabet, 1, block_dim, false, move |l| {
        l.iter().map(|&x| values[x as usize]).sum::<f64>() / l.len() as f64
    })
}

/// A(ω) = I.
pub fn identity(group: GroupSpec, alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    let d = block_dim;
    CoefficientScheme::new("identity", group, alphabet, vec![group.identity()], 0, block_dim, true, Arc::new(move |_, _| real(d, 1.0)))
}

/// Multiplication by the letter value.
pub fn potential(group: GroupSpec, alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    let values = alphabet.values().to_vec();
    let d = block_dim;
    CoefficientScheme::new(
        "potential",
        group,
        alphabet,
        vec![group.identity()],
        0,
        block_dim,
        false,
        Arc::new(move |_, l| real(d, values[l[0] as usize])),
    )
}

/// Catalog lookup. The group is taken from the hull for the lattice-generic
/// schemes.
pub fn by_name(name: &str, group: GroupSpec, alphabet: Arc<Alphabet>, block_dim: usize) -> Result<CoefficientScheme> {
    match name {
        "fibonacci_jacobi" | "period_q_jacobi" => jacobi(name, group, alphabet, block_dim),
        "feinberg_zee" => {
            if group != GroupSpec::Lattice(1) {
                return Err(HullError::Unsupported("feinberg_zee is defined on ℤ".into()));
            }
            feinberg_zee(alphabet, block_dim)
        }
        "free_laplacian" => free_laplacian(group, alphabet, block_dim),
        "heisenberg_adjacency" => {
            if group != GroupSpec::Heisenberg {
                return Err(HullError::Unsupported("heisenberg_adjacency needs the Heisenberg group".into()));
            }
            heisenberg_adjacency(alphabet, block_dim)
        }
        "identity" => identity(group, alphabet, block_dim),
        "potential" => potential(group, alphabet, block_dim),
        other => Err(HullError::Domain(format!(
            "unknown scheme {other:?}; expected one of {}, identity, potential",
            NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::catalog;

    fn one(z: DMatrix<Complex64>) -> Complex64 {
        assert_eq!(z.shape(), (1, 1));
        z[(0, 0)]
    }

    #[test]
    fn laplacian_entries() {
        let h = catalog::fibonacci();
        let a = free_laplacian(h.group(), h.alphabet().clone(), 1).unwrap();
        let w = h.reference().unwrap();
        assert_eq!(one(a.entry(&w, &GroupElement::z(3), &GroupElement::z(4)).unwrap()).re, 1.0);
        assert_eq!(one(a.entry(&w, &GroupElement::z(3), &GroupElement::z(8)).unwrap()).re, 0.0);
        assert_eq!(a.norm_upper_bound(), 2.0);
        assert_eq!(a.propagation(), 1);
    }

    #[test]
    fn fibonacci_diagonal() {
        let h = catalog::fibonacci();
        let a = fibonacci_jacobi(h.alphabet().clone(), 1).unwrap();
        let w = h.reference().unwrap();
        let o = GroupElement::z(0);
        assert_eq!(one(a.entry(&w, &o, &o).unwrap()).re, h.alphabet().value(0));
        assert_eq!(a.norm_upper_bound(), 3.0);
    }

    #[test]
    fn feinberg_zee_rows() {
        let h = catalog::full_pm1(1).unwrap();
        let a = feinberg_zee(h.alphabet().clone(), 1).unwrap();
        let w = h.sample(42).unwrap();
        assert_eq!(a.norm_upper_bound(), 2.0);
        for k in -5..5 {
            let kk = GroupElement::z(k);
            let nonzero = (-10..10)
                .filter(|&j| one(a.entry(&w, &kk, &GroupElement::z(j)).unwrap()).norm() > 0.0)
                .count();
            assert_eq!(nonzero, 2);
            let below = one(a.entry(&w, &kk, &GroupElement::z(k - 1)).unwrap()).re;
            assert_eq!(below, w.value(&kk).unwrap());
        }
    }

    #[test]
    fn identity_shift_equivariance() {
        let h = catalog::fibonacci();
        let w = h.reference().unwrap();
        let a = fibonacci_jacobi(h.alphabet().clone(), 1).unwrap();
        let ball = Window::ball(GroupSpec::Lattice(1), 10).unwrap();
        assert!(a.verify_equivariance(&w, &GroupElement::z(0), &ball).unwrap());
        assert!(a.verify_equivariance(&w, &GroupElement::z(7), &ball).unwrap());
    }

    #[test]
    fn heisenberg_equivariance() {
        let h = catalog::full_ab(GroupSpec::Heisenberg).unwrap();
        let w = h.sample(11).unwrap();
        let a = heisenberg_adjacency(h.alphabet().clone(), 1).unwrap();
        let ball = Window::ball(GroupSpec::Heisenberg, 3).unwrap();
        assert!(a.verify_equivariance(&w, &GroupElement::heisenberg(1, 1, 1), &ball).unwrap());
        assert_eq!(a.norm_upper_bound(), 5.0);
    }

    #[test]
    fn non_equivariant_family_is_detected() {
        // entries built from ω at k (left translate) instead of k·g break the law on H₃
        let h = catalog::full_ab(GroupSpec::Heisenberg).unwrap();
        let w = h.sample(3).unwrap();
        let a = heisenberg_adjacency(h.alphabet().clone(), 1).unwrap();
        let g = GroupElement::heisenberg(1, 0, 0);
        let ball = Window::ball(GroupSpec::Heisenberg, 2).unwrap();
        let shifted = w.shift(&g).unwrap();
        let mut differs = false;
        for k in ball.elements() {
            let left = g.compose(k).unwrap();
            let lhs = a.entry(&shifted, k, k).unwrap();
            let rhs = a.entry(&w, &left, &left).unwrap();
            differs |= lhs != rhs;
        }
        assert!(differs);
    }
}
