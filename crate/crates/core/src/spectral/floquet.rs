use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense;
use super::sample::SpectrumSample;
use crate::dynamics::Configuration;
use crate::error::{HullError, Result};
use crate::group::{GroupElement, GroupSpec, Window};
use crate::operators::{Boundary, CoefficientScheme};

/// qd×qd symbol at phase θ: site k of the period cell couples to k + s with
/// weight e^{iθ·⌊(k+s)/q⌋}.
pub fn floquet_symbol(scheme: &CoefficientScheme, omega: &Configuration, theta: f64) -> Result<DMatrix<Complex64>> {
    if scheme.group() != GroupSpec::Lattice(1) || omega.group() != GroupSpec::Lattice(1) {
        return Err(HullError::Domain("Floquet symbol needs a scheme and configuration on ℤ".into()));
    }
    let q = match omega.periods().as_deref() {
        Some([q]) => *q,
        _ => return Err(HullError::Domain(format!("{omega} is not periodic"))),
    };
    let d = scheme.block_dim();
    let n = q as usize * d;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..q {
        for (h, _, block) in scheme.row(omega, &GroupElement::z(k))? {
            let x = h.coords()[0];
            let col = x.rem_euclid(q) as usize;
            let phase = Complex64::from_polar(1.0, theta * x.div_euclid(q) as f64);
            let mut view = m.view_mut((k as usize * d, col * d), (d, d));
            view += block * phase;
        }
    }
    Ok(m)
}

/// Union of symbol eigenvalues over θ_j = 2πj/n, j = 0..n.
pub fn floquet_oracle(scheme: &CoefficientScheme, omega: &Configuration, theta_samples: usize) -> Result<SpectrumSample> {
    if theta_samples == 0 {
        return Err(HullError::Domain("floquet_oracle needs at least one θ sample".into()));
    }
    let q = match omega.periods().as_deref() {
        Some([q]) => *q as u64,
        _ => return Err(HullError::Domain(format!("{omega} is not periodic on ℤ"))),
    };
    let mut points = Vec::new();
    for j in 0..theta_samples {
        let theta = 2.0 * PI * j as f64 / theta_samples as f64;
        points.extend(dense::eigenvalues(&floquet_symbol(scheme, omega, theta)?)?);
    }
    dense::sort_complex(&mut points);
    Ok(SpectrumSample {
        points,
        window: Arc::new(Window::interval(q)?),
        boundary: Boundary::Periodic,
        scheme: scheme.name().to_string(),
        configuration: omega.id(),
    })
}
