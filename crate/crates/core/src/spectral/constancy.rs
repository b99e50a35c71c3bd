use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dense;
use super::grid::{section_grid, GridSpec, PseudospectrumGrid};
use super::hausdorff::{directed_hausdorff, distance_to_set, hausdorff_distance};
use super::sample::{eigenvalues, SpectrumSample};
use crate::dynamics::{certify_minimal, certify_pseudoergodic, Configuration, SubshiftSpec, Verdict};
use crate::error::{HullError, Result};
use crate::group::{GroupSpec, Window, WindowDescriptor};
use crate::operators::{section, Boundary, CoefficientScheme, LimitOperatorProbe};

/// Slack allowed when checking that distances do not increase.
pub const TREND_SLACK: f64 = 1e-12;

/// Window of a given size: {0..n−1} on ℤ, {0..n−1}^N on ℤ^N, ball(n) on H₃.
pub fn window_for_size(group: GroupSpec, size: u64) -> Result<Window> {
    match group {
        GroupSpec::Lattice(1) => Window::interval(size),
        _ => Window::block(group, size),
    }
}

/// The window grown by `margin` in every direction (boxes and balls only).
pub fn enlarge(w: &Window, margin: u64) -> Result<Window> {
    let m = margin as i64;
    if let Some((lo, hi)) = w.box_bounds() {
        let lo: Vec<i64> = lo.iter().map(|x| x - m).collect();
        let hi: Vec<i64> = hi.iter().map(|x| x + m).collect();
        return Window::range(w.group(), &lo, &hi);
    }
    match w.descriptor() {
        WindowDescriptor::Ball { radius } => Window::ball(w.group(), radius + margin as u32),
        d => Err(HullError::Domain(format!("cannot enlarge window {d:?}"))),
    }
}

/// Keep the eigenvalues of a section that reappear, within δ, in every
/// section of the same operator on the window enlarged by one of `margins`.
///
/// Boundary states move when the boundary moves; several margins make an
/// accidental reappearance unlikely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceSpec {
    pub margins: Vec<u64>,
    pub delta: f64,
}

fn filter_persistent(points: &[Complex64], companions: &[Vec<Complex64>], delta: f64) -> Vec<Complex64> {
    points
        .iter()
        .copied()
        .filter(|z| companions.iter().all(|c| distance_to_set(*z, c) <= delta))
        .collect()
}

/// Eigenvalues of the section on W, filtered by persistence when given.
///
/// Periodic boundaries are not filtered: the enlarged box would break the
/// period compatibility and periodic sections carry no edge states.
pub fn persistent_spectrum(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    w: &Arc<Window>,
    boundary: Boundary,
    persistence: Option<&PersistenceSpec>,
) -> Result<SpectrumSample> {
    let mut sample = eigenvalues(&section(scheme, omega, w, boundary)?)?;
    if let (Some(p), Boundary::Truncate) = (persistence, boundary) {
        let companions = p
            .margins
            .iter()
            .map(|&m| dense::eigenvalues(&section(scheme, omega, &Arc::new(enlarge(w, m)?), boundary)?.matrix))
            .collect::<Result<Vec<_>>>()?;
        sample.points = filter_persistent(&sample.points, &companions, p.delta);
    }
    Ok(sample)
}

/// Grid comparison settings for the resolvent part of a constancy report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCheck {
    pub window_size: u64,
    pub grid: GridSpec,
    /// Nodes where either grid has σ_min ≤ floor are skipped.
    pub sigma_floor: f64,
    pub epsilons: Vec<f64>,
}

/// How the hypothesis (minimal hull or pseudoergodic points) is checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    pub n: u64,
    /// Certify the hull minimal at (n, big_n).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<u64>,
    /// Certify each configuration n-pseudoergodic within this radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstancyParams {
    pub window_sizes: Vec<u64>,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistence: Option<PersistenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySpec>,
}

/// Pass thresholds; a missing entry is not checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstancyTolerances {
    pub spectral: Option<f64>,
    pub grid: Option<f64>,
    /// Largest allowed |area difference| as a fraction of the node count.
    pub area_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub verified: bool,
    pub method: String,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistances {
    pub pair: (usize, usize),
    /// One Hausdorff distance per window size.
    pub distances: Vec<f64>,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGrid {
    pub pair: (usize, usize),
    pub max_deviation: f64,
    /// (ε, |#{σ < ε} − #{σ' < ε}|).
    pub area_differences: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub hull: String,
    pub scheme: String,
    pub configurations: Vec<String>,
    pub params: ConstancyParams,
    pub tolerances: ConstancyTolerances,
    pub hypothesis: Hypothesis,
    pub spectral: Vec<PairDistances>,
    pub grids: Vec<PairGrid>,
    pub grid_nodes: usize,
    pub trend_ok: bool,
    pub final_spectral_max: f64,
    pub grid_max_deviation: Option<f64>,
    pub max_area_fraction: Option<f64>,
    pub pass: bool,
}

/// Report plus the samples and grids it was computed from.
#[derive(Clone, Debug)]
pub struct ConstancyOutcome {
    pub report: ConstancyReport,
    /// spectra[w][c]: persistent spectrum of configuration c at window w.
    pub spectra: Vec<Vec<SpectrumSample>>,
    pub grids: Vec<PseudospectrumGrid>,
}

fn check_hypothesis(hull: &SubshiftSpec, configs: &[Configuration], spec: Option<&CertifySpec>) -> Result<Hypothesis> {
    let Some(spec) = spec else {
        return Ok(Hypothesis { verified: false, method: "none".into(), details: vec![] });
    };
    let mut details = Vec::new();
    if let Some(big_n) = spec.big_n {
        let report = certify_minimal(hull, spec.n, big_n)?;
        details.push(format!(
            "minimality at (n, N) = ({}, {}): uniformly recurrent = {}, primitivity = {}",
            spec.n,
            big_n,
            report.uniformly_recurrent,
            report.primitivity.is_some()
        ));
        if report.certified() {
            return Ok(Hypothesis { verified: true, method: "minimal hull".into(), details });
        }
    }
    if let Some(radius) = spec.radius {
        let verdicts = configs
            .par_iter()
            .map(|c| certify_pseudoergodic(c, hull, spec.n, radius).map(|r| r.verdict))
            .collect::<Result<Vec<_>>>()?;
        for (c, v) in configs.iter().zip(&verdicts) {
            details.push(format!("{c}: {}-pseudoergodic within {radius}: {v:?}", spec.n));
        }
        if verdicts.iter().all(|v| *v == Verdict::Certified) {
            return Ok(Hypothesis { verified: true, method: "pseudoergodic points".into(), details });
        }
    }
    Ok(Hypothesis { verified: false, method: "hypothesis unverified".into(), details })
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Pairwise spectral distances over a window schedule and, optionally,
/// pairwise σ_min grid deviations.
pub fn constancy_report(
    scheme: &CoefficientScheme,
    hull: &SubshiftSpec,
    configs: &[Configuration],
    params: &ConstancyParams,
    tolerances: &ConstancyTolerances,
) -> Result<ConstancyOutcome> {
    if configs.len() < 2 {
        return Err(HullError::Domain("constancy needs at least two configurations".into()));
    }
    if params.window_sizes.is_empty() {
        return Err(HullError::Domain("constancy needs at least one window size".into()));
    }
    let hypothesis = check_hypothesis(hull, configs, params.certify.as_ref())?;
    let group = scheme.group();

    let mut spectra = Vec::with_capacity(params.window_sizes.len());
    for &size in &params.window_sizes {
        let w = Arc::new(window_for_size(group, size)?);
        let row = configs
            .par_iter()
            .map(|c| persistent_spectrum(scheme, c, &w, params.boundary, params.persistence.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        spectra.push(row);
    }

    let mut spectral = Vec::new();
    for (i, j) in pairs(configs.len()) {
        let distances = spectra
            .iter()
            .map(|row| hausdorff_distance(&row[i].points, &row[j].points))
            .collect::<Result<Vec<f64>>>()?;
        let non_increasing = distances.windows(2).all(|d| d[1] <= d[0] + TREND_SLACK);
        spectral.push(PairDistances { pair: (i, j), distances, non_increasing });
    }
    let trend_ok = spectral.iter().all(|p| p.non_increasing);
    let final_spectral_max = spectral.iter().map(|p| *p.distances.last().unwrap()).fold(0.0, f64::max);

    let mut grids = Vec::new();
    let mut pair_grids = Vec::new();
    let mut grid_nodes = 0;
    if let Some(check) = &params.grid {
        let w = Arc::new(window_for_size(group, check.window_size)?);
        grid_nodes = check.grid.len();
        for c in configs {
            grids.push(section_grid(&section(scheme, c, &w, params.boundary)?, &check.grid)?);
        }
        for (i, j) in pairs(configs.len()) {
            let max_deviation = grids[i].max_deviation(&grids[j], check.sigma_floor)?;
            let area_differences = check
                .epsilons
                .iter()
                .map(|&e| (e, grids[i].sublevel_count(e).abs_diff(grids[j].sublevel_count(e))))
                .collect();
            pair_grids.push(PairGrid { pair: (i, j), max_deviation, area_differences });
        }
    }
    let grid_max_deviation = params.grid.as_ref().map(|_| pair_grids.iter().map(|p| p.max_deviation).fold(0.0, f64::max));
    let max_area_fraction = params.grid.as_ref().map(|_| {
        pair_grids
            .iter()
            .flat_map(|p| p.area_differences.iter().map(|(_, d)| *d as f64 / grid_nodes as f64))
            .fold(0.0, f64::max)
    });

    let below = |value: Option<f64>, tol: Option<f64>| match (value, tol) {
        (Some(v), Some(t)) => v <= t,
        _ => true,
    };
    let pass = trend_ok
        && below(Some(final_spectral_max), tolerances.spectral)
        && below(grid_max_deviation, tolerances.grid)
        && below(max_area_fraction, tolerances.area_fraction);

    let report = ConstancyReport {
        hull: hull.name().to_string(),
        scheme: scheme.name().to_string(),
        configurations: configs.iter().map(|c| c.id()).collect(),
        params: params.clone(),
        tolerances: tolerances.clone(),
        hypothesis,
        spectral,
        grids: pair_grids,
        grid_nodes,
        trend_ok,
        final_spectral_max,
        grid_max_deviation,
        max_area_fraction,
        pass,
    };
    Ok(ConstancyOutcome { report, spectra, grids })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionParams {
    /// A(ω) is sectioned on ball(reference_radius).
    pub reference_radius: u32,
    pub persistence: PersistenceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeInclusion {
    pub last_term: Vec<i64>,
    pub points: usize,
    pub persistent_points: usize,
    pub distance: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub scheme: String,
    pub configuration: String,
    pub params: InclusionParams,
    pub tolerance: f64,
    pub reference_points: usize,
    pub probes: Vec<ProbeInclusion>,
    pub max_distance: f64,
    pub all_consistent: bool,
}

/// Directed Hausdorff distance from each probe's persistent spectrum to the
/// persistent spectrum of A(ω) on a reference ball.
///
/// A probe's section lives on ball(m); its companions for the persistence
/// filter are sections of the last translate shift(ω, g_last) on
/// ball(m + margin), which agrees with the limit operator on ball(m).
pub fn inclusion_check(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    probes: &[LimitOperatorProbe],
    params: &InclusionParams,
    tol: f64,
) -> Result<InclusionReport> {
    let group = scheme.group();
    let reference_window = Arc::new(Window::ball(group, params.reference_radius)?);
    let reference = persistent_spectrum(scheme, omega, &reference_window, Boundary::Truncate, Some(&params.persistence))?;

    let rows = probes
        .par_iter()
        .map(|probe| -> Result<ProbeInclusion> {
            let sec = probe
                .limit_section
                .as_ref()
                .filter(|_| probe.stabilized)
                .ok_or_else(|| HullError::Domain("inclusion_check needs stabilized probes".into()))?;
            let last = probe.sequence.terms.last().expect("stabilized probes have terms");
            let points = dense::eigenvalues(&sec.matrix)?;
            let translate = omega.shift(last)?;
            let companions = params
                .persistence
                .margins
                .iter()
                .map(|&m| {
                    let big = Arc::new(Window::ball(group, probe.m + m as u32)?);
                    dense::eigenvalues(&section(scheme, &translate, &big, Boundary::Truncate)?.matrix)
                })
                .collect::<Result<Vec<_>>>()?;
            let kept = filter_persistent(&points, &companions, params.persistence.delta);
            let distance = if kept.is_empty() {
                0.0
            } else if reference.points.is_empty() {
                f64::INFINITY
            } else {
                directed_hausdorff(&kept, &reference.points)?
            };
            Ok(ProbeInclusion {
                last_term: last.coords().to_vec(),
                points: points.len(),
                persistent_points: kept.len(),
                distance,
                consistent: distance <= tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(InclusionReport {
        scheme: scheme.name().to_string(),
        configuration: omega.id(),
        params: params.clone(),
        tolerance: tol,
        reference_points: reference.points.len(),
        all_consistent: rows.iter().all(|r| r.consistent),
        probes: rows,
        max_distance,
    })
}
