use num_complex::Complex64;

use crate::error::{HullError, Result};

/// sup_{p∈P} min_{q∈Q} |p − q|.
pub fn directed_hausdorff(p: &[Complex64], q: &[Complex64]) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(HullError::Domain("Hausdorff distance of an empty point set".into()));
    }
    Ok(p.iter()
        .map(|a| q.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

pub fn hausdorff_distance(p: &[Complex64], q: &[Complex64]) -> Result<f64> {
    Ok(directed_hausdorff(p, q)?.max(directed_hausdorff(q, p)?))
}

/// Distance from z to the nearest point of P (∞ for empty P).
pub fn distance_to_set(z: Complex64, p: &[Complex64]) -> f64 {
    p.iter().map(|a| (z - a).norm()).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn examples() {
        let p = [r(0.0), r(1.0), Complex64::new(0.5, 2.0)];
        assert_eq!(hausdorff_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&[r(0.0)], &[Complex64::new(3.0, 4.0)]).unwrap(), 5.0);
        let d = hausdorff_distance(&[r(0.0), r(1.0)], &[r(0.0), r(1.0), r(1.1)]).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        assert_eq!(directed_hausdorff(&[r(0.0), r(1.0)], &[r(0.0), r(1.0), r(1.1)]).unwrap(), 0.0);
        assert!(hausdorff_distance(&[], &p).is_err());
    }
}
