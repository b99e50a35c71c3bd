use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CoefficientScheme;
use crate::dynamics::Configuration;
use crate::error::{HullError, Result};
use crate::group::Window;

/// Largest section dimension |W|·d assembled densely.
pub const MAX_SECTION_DIM: usize = 2500;

const FSEC_MAGIC: &[u8; 4] = b"FSEC";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Truncate,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Truncate => "truncate",
            Boundary::Periodic => "periodic",
        })
    }
}

/// The compression P_W A(ω) P_W as a dense matrix, blocks in window order.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub window: Arc<Window>,
    pub boundary: Boundary,
    pub block_dim: usize,
    pub matrix: DMatrix<Complex64>,
    pub scheme: String,
    pub configuration: String,
}

impl FiniteSection {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Nonzero entries as `row,col,re,im` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        let n = self.dim();
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix[(r, c)];
                if z.re != 0.0 || z.im != 0.0 {
                    writeln!(out, "{r},{c},{},{}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }

    /// Header `FSEC`, u32 size, u32 block dim, then row-major (re, im) pairs,
    /// all little-endian.
    pub fn to_fsec(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(12 + 16 * n * n);
        out.extend_from_slice(FSEC_MAGIC);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&(self.block_dim as u32).to_le_bytes());
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix[(r, c)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }
}

/// Parses an `FSEC` dump into (block dim, matrix).
pub fn read_fsec(bytes: &[u8]) -> Result<(usize, DMatrix<Complex64>)> {
    if bytes.len() < 12 || &bytes[..4] != FSEC_MAGIC {
        return Err(HullError::Domain("not an FSEC dump".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() != 12 + 16 * n * n {
        return Err(HullError::Domain("truncated FSEC dump".into()));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[12 + 8 * i..20 + 8 * i].try_into().unwrap());
    let m = DMatrix::from_fn(n, n, |r, c| {
        let i = 2 * (r * n + c);
        Complex64::new(f(i), f(i + 1))
    });
    Ok((d, m))
}

/// Assembles the section of A(ω) on W.
///
/// Periodic boundaries wrap offsets modulo the box side lengths, adding
/// blocks that land on the same site; they need a lattice box and periods of
/// ω dividing its sides (unless the scheme ignores ω).
pub fn section(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    w: &Arc<Window>,
    boundary: Boundary,
) -> Result<FiniteSection> {
    if w.group() != scheme.group() {
        return Err(HullError::GroupMismatch("window and scheme live on different groups".into()));
    }
    let d = scheme.block_dim();
    let n = w.len() * d;
    if n > MAX_SECTION_DIM {
        return Err(HullError::Resource(format!("section of dimension {n} exceeds {MAX_SECTION_DIM}")));
    }
    let wrap = match boundary {
        Boundary::Truncate => None,
        Boundary::Periodic => {
            let (lo, hi) = w
                .box_bounds()
                .ok_or_else(|| HullError::Domain("periodic boundary needs a lattice box window".into()))?;
            let sides: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
            if !scheme.is_pattern_free() {
                let periods = omega
                    .periods()
                    .ok_or_else(|| HullError::Domain(format!("periodic boundary needs a periodic configuration, got {omega}")))?;
                if periods.iter().zip(&sides).any(|(q, l)| l % q != 0) {
                    return Err(HullError::Domain(format!("periods {periods:?} do not divide box sides {sides:?}")));
                }
            }
            Some((lo, sides))
        }
    };
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (row, k) in w.elements().iter().enumerate() {
        for (h, _, block) in scheme.row(omega, k)? {
            let col = match &wrap {
                None => w.index_of(&h),
                Some((lo, sides)) => {
                    let coords: Vec<i64> = h
                        .coords()
                        .iter()
                        .zip(lo.iter().zip(sides))
                        .map(|(c, (a, l))| a + (c - a).rem_euclid(*l))
                        .collect();
                    w.index_of(&w.group().element(&coords)?)
                }
            };
            if let Some(col) = col {
                let mut view = m.view_mut((row * d, col * d), (d, d));
                view += &block;
            }
        }
    }
    Ok(FiniteSection {
        window: w.clone(),
        boundary,
        block_dim: d,
        matrix: m,
        scheme: scheme.name().to_string(),
        configuration: omega.id(),
    })
}
