use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use super::band::SigmaMinSolver;
use super::dense;
use crate::error::Result;
use crate::group::Window;
use crate::operators::{Boundary, FiniteSection};

/// Residual constant c in σ_min(λI − M) ≤ c·‖M‖·u·n.
pub const BACKWARD_ERROR_CONSTANT: f64 = 64.0;

/// Eigenvalues of a finite section with their provenance.
#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub points: Vec<Complex64>,
    pub window: Arc<Window>,
    pub boundary: Boundary,
    pub scheme: String,
    pub configuration: String,
}

impl SpectrumSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `re,im` per point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im")?;
        for z in &self.points {
            writeln!(out, "{},{}", z.re, z.im)?;
        }
        Ok(())
    }
}

pub fn eigenvalues(sec: &FiniteSection) -> Result<SpectrumSample> {
    Ok(SpectrumSample {
        points: dense::eigenvalues(&sec.matrix)?,
        window: sec.window.clone(),
        boundary: sec.boundary,
        scheme: sec.scheme.clone(),
        configuration: sec.configuration.clone(),
    })
}

/// max over returned λ of σ_min(λI − M), and the bound c·‖M‖·u·n it must obey.
pub fn eigenvalue_residual(sec: &FiniteSection, sample: &SpectrumSample) -> Result<(f64, f64)> {
    let n = sec.dim();
    let bound = BACKWARD_ERROR_CONSTANT * dense::sigma_max(&sec.matrix).max(1.0) * f64::EPSILON * n as f64;
    let solver = SigmaMinSolver::new(&sec.matrix)?;
    let mut worst = 0.0f64;
    for z in &sample.points {
        worst = worst.max(solver.at(*z)?);
    }
    Ok((worst, bound))
}
