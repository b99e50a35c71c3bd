use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::band::SigmaMinSolver;
use crate::dynamics::Configuration;
use crate::error::{HullError, Result};
use crate::group::Window;
use crate::operators::{section, Boundary, CoefficientScheme, FiniteSection};

/// Estimated flop budget for one grid.
pub const GRID_WORK_BUDGET: f64 = 2e12;
/// 1/σ_min is reported as this value when σ_min underflows it.
pub const RESOLVENT_CLAMP: f64 = 1e16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

/// Nodes re_min + (re_max − re_min)·i/n_re, i = 0..n_re (likewise for im),
/// so the rectangle is sampled left-closed, right-open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rectangle: Rectangle,
    pub resolution: [usize; 2],
}

impl GridSpec {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Self {
        GridSpec {
            rectangle: Rectangle { re_min: re.0, re_max: re.1, im_min: im.0, im_max: im.1 },
            resolution: [n_re, n_im],
        }
    }

    pub fn len(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node i (re index), j (im index).
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let r = &self.rectangle;
        Complex64::new(
            r.re_min + (r.re_max - r.re_min) * i as f64 / self.resolution[0] as f64,
            r.im_min + (r.im_max - r.im_min) * j as f64 / self.resolution[1] as f64,
        )
    }

    /// Flat index, imaginary part outer.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution[0] + i
    }

    fn validate(&self) -> Result<()> {
        let r = &self.rectangle;
        let ok = [r.re_min, r.re_max, r.im_min, r.im_max].iter().all(|x| x.is_finite())
            && r.re_min < r.re_max
            && r.im_min < r.im_max
            && self.resolution.iter().all(|&n| n > 0);
        if ok {
            Ok(())
        } else {
            Err(HullError::Domain(format!("degenerate grid {self:?}")))
        }
    }
}

/// σ_min(λI − section) on every grid node.
#[derive(Clone, Debug)]
pub struct PseudospectrumGrid {
    pub spec: GridSpec,
    pub sigma_min: Vec<f64>,
    pub window: Arc<Window>,
    pub boundary: Boundary,
    pub scheme: String,
    pub configuration: String,
}

impl PseudospectrumGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma_min[self.spec.index(i, j)]
    }

    /// ‖(λ − A)⁻¹‖ at a node, clamped; the flag marks clamped nodes.
    pub fn resolvent_norm(&self, i: usize, j: usize) -> (f64, bool) {
        let s = self.get(i, j);
        if s * RESOLVENT_CLAMP <= 1.0 {
            (RESOLVENT_CLAMP, true)
        } else {
            (1.0 / s, false)
        }
    }

    /// Nodes with σ_min < ε.
    pub fn sublevel_count(&self, eps: f64) -> usize {
        self.sigma_min.iter().filter(|&&s| s < eps).count()
    }

    /// max |σ − σ'| over nodes where both exceed `floor`.
    pub fn max_deviation(&self, other: &PseudospectrumGrid, floor: f64) -> Result<f64> {
        if self.spec != other.spec {
            return Err(HullError::Domain("grids on different node sets".into()));
        }
        Ok(self
            .sigma_min
            .iter()
            .zip(&other.sigma_min)
            .filter(|(a, b)| **a > floor && **b > floor)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `re,im,sigma_min`, imaginary part outer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im,sigma_min")?;
        let [nr, ni] = self.spec.resolution;
        for j in 0..ni {
            for i in 0..nr {
                let z = self.spec.node(i, j);
                writeln!(out, "{},{},{}", z.re, z.im, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

fn estimated_work(solver: &SigmaMinSolver, n: usize) -> f64 {
    let n = n as f64;
    if solver.is_banded() {
        // factorization plus ~64 Lanczos steps with reorthogonalization
        64.0 * n * (64.0 + 16.0)
    } else {
        8.0 * n * n * n
    }
}

/// Grid over an already assembled section.
pub fn section_grid(sec: &FiniteSection, spec: &GridSpec) -> Result<PseudospectrumGrid> {
    spec.validate()?;
    let solver = SigmaMinSolver::new(&sec.matrix)?;
    let work = estimated_work(&solver, sec.dim()) * spec.len() as f64;
    if work > GRID_WORK_BUDGET {
        let scale = (GRID_WORK_BUDGET / work).sqrt();
        let suggest = spec.resolution.map(|n| ((n as f64 * scale).floor() as usize).max(1));
        return Err(HullError::Resource(format!(
            "grid {}×{} on a section of size {} exceeds the work budget; try resolution {}×{}",
            spec.resolution[0],
            spec.resolution[1],
            sec.dim(),
            suggest[0],
            suggest[1]
        )));
    }
    let nr = spec.resolution[0];
    let sigma_min = (0..spec.len())
        .into_par_iter()
        .map(|idx| solver.at(spec.node(idx % nr, idx / nr)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PseudospectrumGrid {
        spec: *spec,
        sigma_min,
        window: sec.window.clone(),
        boundary: sec.boundary,
        scheme: sec.scheme.clone(),
        configuration: sec.configuration.clone(),
    })
}

pub fn pseudospectrum_grid(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    w: &Arc<Window>,
    boundary: Boundary,
    spec: &GridSpec,
) -> Result<PseudospectrumGrid> {
    section_grid(&section(scheme, omega, w, boundary)?, spec)
}
