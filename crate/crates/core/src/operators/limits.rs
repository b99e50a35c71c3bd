use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{section, Boundary, CoefficientScheme, FiniteSection};
use crate::dynamics::{Configuration, Pattern, SubshiftSpec, DEFAULT_STABLE_RUN};
use crate::error::Result;
use crate::group::{ball_elements, word_length, EscapeSequence, GroupElement, Window};
use crate::spectral::sigma_max;

/// p_m(A(ω) − A(ν)) = ‖P_m D P_M‖₂ + ‖P_M D P_m‖₂ with M = m + prop.
///
/// For a band operator the rows (columns) meeting ball(m) have no entries
/// outside ball(M), so the two compressions carry the full seminorm.
pub fn window_seminorm(scheme: &CoefficientScheme, omega: &Configuration, nu: &Configuration, m: u32) -> Result<f64> {
    let group = scheme.group();
    let small = Window::ball(group, m)?;
    let big = Window::ball(group, m + scheme.propagation())?;
    let d = scheme.block_dim();

    let difference = |rows: &Window, cols: &Window| -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::<Complex64>::zeros(rows.len() * d, cols.len() * d);
        for (r, k) in rows.elements().iter().enumerate() {
            let a = scheme.row(omega, k)?;
            let b = scheme.row(nu, k)?;
            for ((h, _, x), (_, _, y)) in a.into_iter().zip(b) {
                if let Some(c) = cols.index_of(&h) {
                    let mut view = out.view_mut((r * d, c * d), (d, d));
                    view += x - y;
                }
            }
        }
        Ok(out)
    };
    let left = difference(&small, &big)?;
    let right = difference(&big, &small)?;
    Ok(sigma_max(&left) + sigma_max(&right))
}

/// Finite-scale stand-in for the limit operator of A(ω) along (g_n).
#[derive(Clone, Debug)]
pub struct LimitOperatorProbe {
    pub sequence: EscapeSequence,
    pub m: u32,
    /// r + max |s| + m.
    pub observation_radius: u32,
    pub stabilized: bool,
    pub stable_from: Option<usize>,
    pub limit_pattern: Option<Pattern>,
    /// Section of A(ν) on ball(m) for any ν extending the limit pattern.
    pub limit_section: Option<FiniteSection>,
    /// p_m between consecutive translates V_{g_n} A(ω) V_{−g_n}.
    pub seminorm_trace: Vec<f64>,
    /// σ_max of the translated sections on ball(m), one per term.
    pub translated_sigma_max: Vec<f64>,
    pub limit_sigma_max: Option<f64>,
}

impl LimitOperatorProbe {
    pub fn is_legal(&self, hull: &SubshiftSpec) -> Result<bool> {
        match &self.limit_pattern {
            Some(p) => hull.is_legal(p),
            None => Ok(false),
        }
    }

    /// Configuration determined by the limit pattern (undefined outside it).
    pub fn limit_configuration(&self, source: &Configuration) -> Result<Option<Configuration>> {
        self.limit_pattern
            .as_ref()
            .map(|p| Configuration::finite(source.alphabet().clone(), p.clone(), None))
            .transpose()
    }
}

/// Tracks the pattern of shift(ω, g_n) on the observation ball; once the last
/// three agree, the limit section is the section of that pattern on ball(m).
pub fn approximate_limit_operator(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    seq: &EscapeSequence,
    m: u32,
) -> Result<LimitOperatorProbe> {
    let group = scheme.group();
    let observation_radius = scheme.radius() + scheme.propagation() + m;
    let observe = Arc::new(Window::ball(group, observation_radius)?);
    let inner = Arc::new(Window::ball(group, m)?);

    let mut patterns = Vec::with_capacity(seq.len());
    let mut translated = Vec::with_capacity(seq.len());
    let mut trace = Vec::new();
    let mut prev: Option<Configuration> = None;
    for g in &seq.terms {
        let shifted = omega.shift(g)?;
        patterns.push(shifted.pattern_on(&observe)?);
        let sec = section(scheme, &shifted, &inner, Boundary::Truncate)?;
        translated.push(sigma_max(&sec.matrix));
        if let Some(p) = &prev {
            trace.push(window_seminorm(scheme, p, &shifted, m)?);
        }
        prev = Some(shifted);
    }

    let mut probe = LimitOperatorProbe {
        sequence: seq.clone(),
        m,
        observation_radius,
        stabilized: false,
        stable_from: None,
        limit_pattern: None,
        limit_section: None,
        seminorm_trace: trace,
        translated_sigma_max: translated,
        limit_sigma_max: None,
    };
    if patterns.len() >= DEFAULT_STABLE_RUN {
        let last = patterns.last().unwrap();
        if patterns[patterns.len() - DEFAULT_STABLE_RUN..].iter().all(|p| p == last) {
            let start = patterns.iter().rposition(|p| p != last).map_or(0, |i| i + 1);
            let nu = Configuration::finite(omega.alphabet().clone(), last.clone(), None)?;
            let sec = section(scheme, &nu, &inner, Boundary::Truncate)?;
            probe.stabilized = true;
            probe.stable_from = Some(start);
            probe.limit_sigma_max = Some(sigma_max(&sec.matrix));
            probe.limit_section = Some(sec);
            probe.limit_pattern = Some(last.clone());
        }
    }
    Ok(probe)
}

/// Stabilized probes only, in input order.
pub fn operator_spectrum_sample(
    scheme: &CoefficientScheme,
    omega: &Configuration,
    seqs: &[EscapeSequence],
    m: u32,
) -> Result<Vec<LimitOperatorProbe>> {
    let probes = seqs
        .par_iter()
        .map(|s| approximate_limit_operator(scheme, omega, s, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(probes.into_iter().filter(|p| p.stabilized).collect())
}

/// Occurrences of `target` in ω at increasing word length within ball(R),
/// keeping the farthest `count`.
pub fn recurrence_sequence(omega: &Configuration, target: &Pattern, radius: u32, count: usize) -> Result<Option<EscapeSequence>> {
    let mut hits: Vec<(u32, GroupElement)> = Vec::new();
    for t in ball_elements(omega.group(), radius)? {
        if omega.letters_at(&t, target.window())? == target.letters() {
            hits.push((word_length(&t)?, t));
        }
    }
    hits.sort();
    let mut terms: Vec<GroupElement> = Vec::new();
    let mut last_len = None;
    for (len, t) in hits {
        if last_len.is_some_and(|l| len <= l) {
            continue;
        }
        last_len = Some(len);
        terms.push(t);
    }
    if terms.len() < count.max(1) {
        return Ok(None);
    }
    Ok(Some(EscapeSequence::new(terms.split_off(terms.len() - count))))
}

/// One recurrence sequence per legal pattern of the hull on `window`.
pub fn pattern_sequences(
    omega: &Configuration,
    hull: &SubshiftSpec,
    window: &Arc<Window>,
    radius: u32,
    count: usize,
) -> Result<Vec<EscapeSequence>> {
    let mut out = Vec::new();
    for p in hull.legal_patterns(window)? {
        if let Some(s) = recurrence_sequence(omega, &p, radius, count)? {
            out.push(s);
        }
    }
    Ok(out)
}
