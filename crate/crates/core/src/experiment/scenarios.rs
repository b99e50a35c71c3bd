use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ProbeConfig};
use super::svg;
use super::tolerances::{Tolerances, SAFETY_FACTOR, THRESHOLD_FLOOR};
use crate::dynamics::{
    catalog, certify_minimal, certify_pseudoergodic, sample_limit_set, Configuration, SubshiftSpec, Verdict,
    DEFAULT_STABLE_RUN,
};
use crate::error::{HullError, Result};
use crate::group::{EscapeSequence, GroupSpec, Window};
use crate::operators::{approximate_limit_operator, pattern_sequences, section, Boundary, CoefficientScheme};
use crate::spectral::{
    constancy_report, eigenvalue_residual, eigenvalues, floquet_oracle, hausdorff_distance, inclusion_check,
    section_grid, window_for_size, ConstancyParams, ConstancyTolerances, GridCheck, InclusionParams,
};

pub const SCENARIOS: [&str; 7] = ["spectrum", "pseudospectrum", "constancy", "limitops", "dynsys-check", "inclusion", "calibrate"];

/// Eigenvalue residuals above this fail the spectrum scenario.
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// Eigensolver residual scale; Floquet comparisons pass within this.
pub const FLOQUET_FLOOR: f64 = 1e-8;
/// Slack in the norm-dominance check.
pub const DOMINANCE_SLACK: f64 = 1e-10;
/// Sections up to this dimension are also dumped in FSEC form.
const FSEC_DUMP_LIMIT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Inconclusive => 3,
        }
    }
}

/// A calibratable quantity produced by a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub key: String,
    pub value: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub svg: bool,
    /// Use these thresholds instead of locating the calibration file.
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub status: Status,
    pub report: Value,
    pub measurements: Vec<Measurement>,
    /// Paths relative to `out_dir`, in write order.
    pub artifacts: Vec<String>,
    pub out_dir: PathBuf,
    pub messages: Vec<String>,
}

impl ScenarioOutcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    tolerances: Tolerances,
    svg: bool,
    out_dir: PathBuf,
    artifacts: Vec<(String, usize)>,
    measurements: Vec<Measurement>,
    messages: Vec<String>,
    status: Status,
}

impl Run<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| HullError::Io(format!("{}: {e}", path.display())))?;
        self.artifacts.push((name.to_string(), bytes.len()));
        Ok(())
    }

    fn write_with<F: FnOnce(&mut Vec<u8>) -> Result<()>>(&mut self, name: &str, f: F) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| HullError::Domain(e.to_string()))? + "\n";
        self.write(name, text.as_bytes())
    }

    fn key(&self, suffix: Option<&str>) -> Option<String> {
        self.config.tolerance_key().map(|k| match suffix {
            Some(s) => format!("{k}.{s}"),
            None => k.to_string(),
        })
    }

    fn measure(&mut self, key: Option<String>, value: f64, floor: f64) {
        if let Some(key) = key {
            self.measurements.push(Measurement { key, value, floor });
        }
    }

    fn threshold(&self, key: &Option<String>) -> Option<f64> {
        key.as_ref().and_then(|k| self.tolerances.threshold(k))
    }

    fn note(&mut self, status: Status, message: String) {
        self.status = self.status.max(status);
        self.messages.push(message);
    }

    /// Records a `value ≤ limit` check.
    fn check(&mut self, what: &str, value: f64, limit: Option<f64>) -> bool {
        match limit {
            Some(t) if value <= t => {
                self.messages.push(format!("pass: {what} = {value:e} ≤ {t:e}"));
                true
            }
            Some(t) => {
                self.note(Status::Fail, format!("FAIL: {what} = {value:e} > {t:e}"));
                false
            }
            None => {
                self.messages.push(format!("info: {what} = {value:e} (no threshold)"));
                true
            }
        }
    }
}

fn threads_for(opts: &RunOptions, config: &ExperimentConfig) -> usize {
    opts.threads
        .or(config.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Runs a named scenario, writing its artifacts and `manifest.json`.
pub fn run_scenario(name: &str, config: &ExperimentConfig, opts: &RunOptions) -> Result<ScenarioOutcome> {
    if !SCENARIOS.contains(&name) {
        return Err(HullError::Domain(format!("unknown scenario {name:?}; expected one of {}", SCENARIOS.join(", "))));
    }
    let started = Instant::now();
    let threads = threads_for(opts, config);
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hullspec-out").join(name));
    std::fs::create_dir_all(&out_dir).map_err(|e| HullError::Io(format!("{}: {e}", out_dir.display())))?;
    let tolerances = match &opts.tolerances {
        Some(t) => t.clone(),
        None => {
            let configured = config.tolerances.as_ref().and_then(|t| t.file.as_deref()).map(|f| config.resolve(f));
            Tolerances::locate(configured)?
        }
    };
    let mut run = Run {
        config,
        tolerances,
        svg: opts.svg,
        out_dir: out_dir.clone(),
        artifacts: Vec::new(),
        measurements: Vec::new(),
        messages: Vec::new(),
        status: Status::Pass,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HullError::Resource(format!("thread pool: {e}")))?;
    let report = pool.install(|| match name {
        "spectrum" => spectrum(&mut run),
        "pseudospectrum" => pseudospectrum(&mut run),
        "constancy" => constancy(&mut run),
        "limitops" => limitops(&mut run),
        "dynsys-check" => dynsys_check(&mut run),
        "inclusion" => inclusion(&mut run),
        "calibrate" => calibrate(&mut run, opts),
        _ => unreachable!(),
    })?;

    let manifest = json!({
        "tool": "hullspec",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": name,
        "status": run.status,
        "exit_code": run.status.exit_code(),
        "threads": threads,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "config": config,
        "config_toml": config.to_toml()?,
        "tolerances": {
            "source": run.tolerances.source.as_ref().map(|p| p.display().to_string()),
            "entries": &run.tolerances.entries,
        },
        "measurements": &run.measurements,
        "messages": &run.messages,
        "artifacts": run.artifacts.iter().map(|(p, b)| json!({"path": p, "bytes": b})).collect::<Vec<_>>(),
    });
    run.write_json("manifest.json", &manifest)?;
    Ok(ScenarioOutcome {
        scenario: name.to_string(),
        status: run.status,
        report,
        measurements: run.measurements,
        artifacts: run.artifacts.into_iter().map(|(p, _)| p).collect(),
        out_dir,
        messages: run.messages,
    })
}

struct Model {
    hull: SubshiftSpec,
    scheme: CoefficientScheme,
    configs: Vec<Configuration>,
}

fn model(config: &ExperimentConfig) -> Result<Model> {
    let hull = config.hull()?;
    let scheme = config.scheme(&hull)?;
    let configs = config.configurations(&hull)?;
    Ok(Model { hull, scheme, configs })
}

fn spectrum(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let Model { scheme, configs, .. } = model(cfg)?;
    let schedule = cfg.windows()?;
    let mut rows = Vec::new();
    let mut scatter = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut per_config_samples = Vec::new();
    for (c, omega) in configs.iter().enumerate() {
        let mut samples = Vec::new();
        for &size in &schedule.sizes {
            let w = Arc::new(window_for_size(scheme.group(), size)?);
            let sec = section(&scheme, omega, &w, schedule.boundary)?;
            let sample = eigenvalues(&sec)?;
            let (residual, bound) = eigenvalue_residual(&sec, &sample)?;
            worst_residual = worst_residual.max(residual);
            run.write_with(&format!("spectrum_c{c}_n{size}.csv"), |b| sample.write_csv(b))?;
            if sec.dim() <= FSEC_DUMP_LIMIT {
                run.write(&format!("section_c{c}_n{size}.fsec"), &sec.to_fsec())?;
            }
            rows.push(json!({
                "configuration": omega.id(),
                "window_size": size,
                "dimension": sec.dim(),
                "eigenvalues": sample.len(),
                "max_residual": residual,
                "backward_error_bound": bound,
            }));
            scatter.push((format!("c{c} n={size}"), sample.points.clone()));
            samples.push(sample);
        }
        per_config_samples.push(samples);
    }
    run.check("max eigenvalue residual σ_min(λI − M)", worst_residual, Some(RESIDUAL_LIMIT));

    let mut floquet = Vec::new();
    if let Some(fq) = &cfg.floquet {
        let key = run.key(None);
        let limit = run.threshold(&key).unwrap_or(FLOQUET_FLOOR);
        let mut worst = 0.0f64;
        for (c, omega) in configs.iter().enumerate() {
            let oracle = floquet_oracle(&scheme, omega, fq.theta_samples)?;
            run.write_with(&format!("floquet_c{c}.csv"), |b| oracle.write_csv(b))?;
            for sample in &per_config_samples[c] {
                let d = hausdorff_distance(&sample.points, &oracle.points)?;
                worst = worst.max(d);
                floquet.push(json!({"configuration": omega.id(), "window_size": sample.window.len(), "hausdorff": d}));
            }
        }
        run.measure(key, worst, SAFETY_FACTOR * FLOQUET_FLOOR);
        run.check("Floquet oracle Hausdorff distance", worst, Some(limit));
    }
    if run.svg {
        let title = format!("{} spectra", scheme.name());
        run.write("spectra.svg", svg::spectra_scatter(&title, &scatter).as_bytes())?;
    }
    let report = json!({"scheme": scheme.name(), "boundary": schedule.boundary, "sections": rows, "floquet": floquet});
    run.write_json("spectrum_report.json", &report)?;
    Ok(report)
}

fn grid_window(cfg: &ExperimentConfig, explicit: Option<u64>) -> Result<(u64, Boundary)> {
    let boundary = cfg.windows.as_ref().map_or(Boundary::Truncate, |w| w.boundary);
    let size = match explicit {
        Some(s) => s,
        None => *cfg.windows()?.sizes.last().unwrap(),
    };
    Ok((size, boundary))
}

fn pseudoergodic_hypothesis(run: &mut Run, hull: &SubshiftSpec, configs: &[Configuration]) -> Result<Vec<Value>> {
    let Some(spec) = &run.config.certify else { return Ok(Vec::new()) };
    let Some(radius) = spec.radius else { return Ok(Vec::new()) };
    let reports = configs
        .par_iter()
        .map(|c| certify_pseudoergodic(c, hull, spec.n, radius))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for r in reports {
        if r.verdict != Verdict::Certified {
            run.note(
                Status::Inconclusive,
                format!("hypothesis unverified: {} is {:?} at n = {}, R = {radius}", r.configuration, r.verdict, spec.n),
            );
        }
        out.push(json!({"configuration": r.configuration, "n": r.n, "radius": r.radius, "verdict": r.verdict, "missing": r.missing}));
    }
    Ok(out)
}

fn pseudospectrum(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let Model { hull, scheme, configs } = model(cfg)?;
    let gc = cfg.grid.as_ref().ok_or_else(|| HullError::Domain("pseudospectrum needs [grid]".into()))?;
    let (size, boundary) = grid_window(cfg, gc.window_size)?;
    let w = Arc::new(window_for_size(scheme.group(), size)?);
    let spec = gc.spec();
    let hypothesis = pseudoergodic_hypothesis(run, &hull, &configs)?;

    let mut grids = Vec::new();
    for (c, omega) in configs.iter().enumerate() {
        let grid = section_grid(&section(&scheme, omega, &w, boundary)?, &spec)?;
        run.write_with(&format!("grid_c{c}.csv"), |b| grid.write_csv(b))?;
        if run.svg {
            let title = format!("σ_min, {} on {}", scheme.name(), omega);
            run.write(&format!("grid_c{c}.svg"), svg::sigma_heatmap(&title, &grid, &gc.epsilons).as_bytes())?;
        }
        grids.push(grid);
    }
    let clamped: Vec<usize> = grids
        .iter()
        .map(|g| g.sigma_min.iter().filter(|s| **s * crate::spectral::RESOLVENT_CLAMP <= 1.0).count())
        .collect();

    let mut pairs = Vec::new();
    let (mut max_dev, mut max_area) = (0.0f64, 0.0f64);
    for i in 0..grids.len() {
        for j in i + 1..grids.len() {
            let dev = grids[i].max_deviation(&grids[j], gc.sigma_floor)?;
            let areas: Vec<Value> = gc
                .epsilons
                .iter()
                .map(|&e| {
                    let (a, b) = (grids[i].sublevel_count(e), grids[j].sublevel_count(e));
                    let frac = a.abs_diff(b) as f64 / spec.len() as f64;
                    max_area = max_area.max(frac);
                    json!({"epsilon": e, "counts": [a, b], "fraction": frac})
                })
                .collect();
            max_dev = max_dev.max(dev);
            pairs.push(json!({"pair": [i, j], "max_deviation": dev, "areas": areas}));
        }
    }
    if grids.len() >= 2 {
        let key = run.key(Some("grid"));
        let t = run.threshold(&key);
        run.measure(key, max_dev, 0.0);
        run.check(&format!("max |σ_min difference| over nodes with σ_min > {}", gc.sigma_floor), max_dev, t);
        if !gc.epsilons.is_empty() {
            let key = run.key(Some("area_fraction"));
            let t = run.threshold(&key);
            run.measure(key, max_area, 0.0);
            run.check("max ε-sublevel area difference / node count", max_area, t);
            if let Some(limit) = gc.area_fraction_limit {
                run.check("max ε-sublevel area difference / node count (hard bound)", max_area, Some(limit));
            }
        }
    }
    let report = json!({
        "scheme": scheme.name(),
        "configurations": configs.iter().map(|c| c.id()).collect::<Vec<_>>(),
        "window_size": size,
        "boundary": boundary,
        "grid": spec,
        "clamped_nodes": clamped,
        "hypothesis": hypothesis,
        "pairs": pairs,
    });
    run.write_json("pseudospectrum_report.json", &report)?;
    Ok(report)
}

fn constancy(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let Model { hull, scheme, configs } = model(cfg)?;
    let schedule = cfg.windows()?;
    let grid = match &cfg.grid {
        Some(g) => Some(GridCheck {
            window_size: grid_window(cfg, g.window_size)?.0,
            grid: g.spec(),
            sigma_floor: g.sigma_floor,
            epsilons: g.epsilons.clone(),
        }),
        None => None,
    };
    let params = ConstancyParams {
        window_sizes: schedule.sizes.clone(),
        boundary: schedule.boundary,
        persistence: cfg.persistence.clone(),
        grid,
        certify: cfg.certify.clone(),
    };
    let (ks, kg, ka) = (run.key(Some("spectral")), run.key(Some("grid")), run.key(Some("area_fraction")));
    let tolerances = ConstancyTolerances {
        spectral: run.threshold(&ks),
        grid: run.threshold(&kg),
        area_fraction: match (run.threshold(&ka), cfg.grid.as_ref().and_then(|g| g.area_fraction_limit)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
    };
    let outcome = constancy_report(&scheme, &hull, &configs, &params, &tolerances)?;
    let r = &outcome.report;

    for (w, row) in outcome.spectra.iter().enumerate() {
        for (c, sample) in row.iter().enumerate() {
            run.write_with(&format!("spectrum_c{c}_n{}.csv", schedule.sizes[w]), |b| sample.write_csv(b))?;
        }
    }
    for (c, g) in outcome.grids.iter().enumerate() {
        run.write_with(&format!("grid_c{c}.csv"), |b| g.write_csv(b))?;
    }
    if run.svg {
        let last = outcome.spectra.last().expect("nonempty schedule");
        let sets: Vec<(String, Vec<_>)> = last.iter().map(|s| (s.configuration.clone(), s.points.clone())).collect();
        let title = format!("persistent spectra, window {}", schedule.sizes.last().unwrap());
        run.write("spectra.svg", svg::spectra_scatter(&title, &sets).as_bytes())?;
        let eps = cfg.grid.as_ref().map(|g| g.epsilons.clone()).unwrap_or_default();
        for (c, g) in outcome.grids.iter().enumerate() {
            let title = format!("σ_min, {}", g.configuration);
            run.write(&format!("grid_c{c}.svg"), svg::sigma_heatmap(&title, g, &eps).as_bytes())?;
        }
    }

    run.measure(ks, r.final_spectral_max, 0.0);
    if let Some(d) = r.grid_max_deviation {
        run.measure(kg, d, 0.0);
    }
    if let Some(a) = r.max_area_fraction {
        run.measure(ka, a, 0.0);
    }
    if r.trend_ok {
        run.messages.push("pass: pairwise distances non-increasing in window size".into());
    } else {
        run.note(Status::Fail, "FAIL: pairwise distances increase with window size".into());
    }
    run.check("final pairwise Hausdorff distance", r.final_spectral_max, r.tolerances.spectral);
    if let Some(d) = r.grid_max_deviation {
        run.check("max |σ_min difference|", d, r.tolerances.grid);
    }
    if let Some(a) = r.max_area_fraction {
        run.check("max ε-sublevel area difference / node count", a, r.tolerances.area_fraction);
    }
    if r.params.certify.is_some() && !r.hypothesis.verified {
        run.note(Status::Inconclusive, "hypothesis unverified".into());
    }
    let report = serde_json::to_value(r).map_err(|e| HullError::Domain(e.to_string()))?;
    run.write_json("constancy_report.json", &report)?;
    Ok(report)
}

fn escape_sequences(probes: &ProbeConfig, hull: &SubshiftSpec, omega: &Configuration) -> Result<Vec<EscapeSequence>> {
    match probes {
        ProbeConfig::Fibonacci { offsets, count, .. } => Ok(catalog::fibonacci_sequences(offsets[0]..offsets[1], *count)),
        ProbeConfig::Patterns { pattern_radius, radius, count, .. } => {
            pattern_sequences(omega, hull, &Arc::new(Window::ball(hull.group(), *pattern_radius)?), *radius, *count)
        }
        ProbeConfig::Arithmetic { steps, start, count, .. } => {
            let group = hull.group();
            steps
                .iter()
                .map(|s| {
                    let step = group.element(s)?;
                    let seq = EscapeSequence::arithmetic(group.identity(), step, *start, *count);
                    match group {
                        GroupSpec::Lattice(_) => seq.with_direction(&s.iter().map(|&x| x as f64).collect::<Vec<_>>()),
                        GroupSpec::Heisenberg => Ok(seq),
                    }
                })
                .collect()
        }
    }
}

fn spell(omega: &Configuration, letters: &[u8]) -> String {
    omega.alphabet().spell(letters)
}

fn limitops(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let Model { hull, scheme, configs } = model(cfg)?;
    let pc = cfg.probes.as_ref().ok_or_else(|| HullError::Domain("limitops needs [probes]".into()))?;
    let m = pc.m();
    let observe = Arc::new(Window::ball(hull.group(), m)?);
    let mut per_config = Vec::new();
    let mut csv = String::from("configuration,probe,stabilized,legal,limit_sigma_max,max_translated_sigma_max\n");
    let (mut stabilized_total, mut violations, mut illegal) = (0usize, 0usize, 0usize);
    for (c, omega) in configs.iter().enumerate() {
        let seqs = escape_sequences(pc, &hull, omega)?;
        let probes = seqs
            .par_iter()
            .map(|s| approximate_limit_operator(&scheme, omega, s, m))
            .collect::<Result<Vec<_>>>()?;
        let limit_set = sample_limit_set(omega, &observe, &seqs, DEFAULT_STABLE_RUN)?;
        let mut rows = Vec::new();
        for (i, p) in probes.iter().enumerate() {
            let translated = p.translated_sigma_max.iter().copied().fold(0.0, f64::max);
            let legal = if p.stabilized { p.is_legal(&hull)? } else { false };
            let dominated = p.limit_sigma_max.map(|s| s <= translated + DOMINANCE_SLACK);
            if p.stabilized {
                stabilized_total += 1;
                if !legal {
                    illegal += 1;
                }
                if dominated == Some(false) {
                    violations += 1;
                }
            }
            csv.push_str(&format!(
                "{c},{i},{},{},{},{}\n",
                p.stabilized,
                legal,
                p.limit_sigma_max.map_or(String::new(), |s| s.to_string()),
                translated
            ));
            rows.push(json!({
                "last_term": p.sequence.terms.last().map(|g| g.coords().to_vec()),
                "direction": p.sequence.claimed_direction,
                "stabilized": p.stabilized,
                "stable_from": p.stable_from,
                "legal": legal,
                "limit_pattern": p.limit_pattern.as_ref().map(|q| spell(omega, q.letters())),
                "limit_sigma_max": p.limit_sigma_max,
                "max_translated_sigma_max": translated,
                "dominated": dominated,
                "seminorm_trace": p.seminorm_trace,
            }));
        }
        // directional limit sets on ball(m)
        let mut by_direction: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for probe in &limit_set.probes {
            if let (Some(d), Some(pat)) = (probe.direction(), &probe.pattern) {
                by_direction.entry(format!("{d:?}")).or_default().insert(spell(omega, pat.letters()));
            }
        }
        let all: BTreeSet<String> = limit_set.patterns().iter().map(|p| spell(omega, p.letters())).collect();
        let union: BTreeSet<String> = by_direction.values().flatten().cloned().collect();
        per_config.push(json!({
            "configuration": omega.id(),
            "probes": rows,
            "directional_patterns": by_direction,
            "all_patterns": all,
            "directional_union_equals_all": union == all,
        }));
    }
    if stabilized_total == 0 {
        run.note(Status::Inconclusive, "no probe stabilized".into());
    } else {
        run.messages.push(format!("{stabilized_total} stabilized probes"));
    }
    if violations > 0 {
        run.note(Status::Fail, format!("FAIL: {violations} probes violate σ_max(limit) ≤ max σ_max(translates) + {DOMINANCE_SLACK:e}"));
    } else {
        run.messages.push("pass: norm dominance on every stabilized probe".into());
    }
    if illegal > 0 {
        run.note(Status::Fail, format!("FAIL: {illegal} limit patterns are illegal in the hull"));
    }
    run.write("probes.csv", csv.as_bytes())?;
    let report = json!({"scheme": scheme.name(), "hull": hull.name(), "m": m, "configurations": per_config});
    run.write_json("limitops_report.json", &report)?;
    Ok(report)
}

fn dynsys_check(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let hull = cfg.hull()?;
    let spec = cfg.certify.as_ref().ok_or_else(|| HullError::Domain("dynsys-check needs [certify]".into()))?;
    let mut minimality = Value::Null;
    if let Some(big_n) = spec.big_n {
        let report = certify_minimal(&hull, spec.n, big_n)?;
        if report.certified() {
            run.messages.push(format!("pass: {} is minimal at (n, N) = ({}, {big_n})", hull.name(), spec.n));
        } else {
            run.note(Status::Fail, format!("refuted: {} is not uniformly recurrent at (n, N) = ({}, {big_n})", hull.name(), spec.n));
        }
        minimality = serde_json::to_value(&report).map_err(|e| HullError::Domain(e.to_string()))?;
    }
    let mut pseudo = Vec::new();
    if let Some(radius) = spec.radius {
        let configs = if cfg.configurations.is_empty() { Vec::new() } else { cfg.configurations(&hull)? };
        let reports = configs
            .par_iter()
            .map(|c| certify_pseudoergodic(c, &hull, spec.n, radius))
            .collect::<Result<Vec<_>>>()?;
        for r in reports {
            match r.verdict {
                Verdict::Certified => run.messages.push(format!("pass: {} is {}-pseudoergodic within {radius}", r.configuration, spec.n)),
                Verdict::Refuted => run.note(Status::Fail, format!("refuted: {} misses legal {}-blocks", r.configuration, spec.n)),
                Verdict::Inconclusive => run.note(
                    Status::Inconclusive,
                    format!("inconclusive: {} misses {} legal {}-blocks within {radius}", r.configuration, r.missing.len(), spec.n),
                ),
            }
            pseudo.push(serde_json::to_value(&r).map_err(|e| HullError::Domain(e.to_string()))?);
        }
    }
    let report = json!({"hull": hull.name(), "minimality": minimality, "pseudoergodicity": pseudo});
    run.write_json("certificate.json", &report)?;
    Ok(report)
}

fn inclusion(run: &mut Run) -> Result<Value> {
    let cfg = run.config;
    let Model { hull, scheme, configs } = model(cfg)?;
    let pc = cfg.probes.as_ref().ok_or_else(|| HullError::Domain("inclusion needs [probes]".into()))?;
    let ic = cfg.inclusion.as_ref().ok_or_else(|| HullError::Domain("inclusion needs [inclusion]".into()))?;
    let key = run.key(None);
    let tol = run.threshold(&key).or(ic.tolerance);
    let params = InclusionParams { reference_radius: ic.reference_radius, persistence: ic.persistence.clone() };
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for omega in &configs {
        let seqs = escape_sequences(pc, &hull, omega)?;
        let probes = seqs
            .par_iter()
            .map(|s| approximate_limit_operator(&scheme, omega, s, pc.m()))
            .collect::<Result<Vec<_>>>()?;
        let stabilized: Vec<_> = probes.into_iter().filter(|p| p.stabilized).collect();
        if stabilized.len() < seqs.len() {
            run.note(Status::Inconclusive, format!("{} of {} probes did not stabilize", seqs.len() - stabilized.len(), seqs.len()));
        }
        let report = inclusion_check(&scheme, omega, &stabilized, &params, tol.unwrap_or(f64::INFINITY))?;
        worst = worst.max(report.max_distance);
        let mut csv = String::from("probe,persistent_points,distance,consistent\n");
        for (i, p) in report.probes.iter().enumerate() {
            csv.push_str(&format!("{i},{},{},{}\n", p.persistent_points, p.distance, p.consistent));
        }
        run.write(&format!("inclusion_c{}.csv", reports.len()), csv.as_bytes())?;
        reports.push(report);
    }
    run.measure(key, worst, 0.0);
    run.check("max directed Hausdorff distance probe → A(ω)", worst, tol);
    let report = serde_json::to_value(&reports).map_err(|e| HullError::Domain(e.to_string()))?;
    run.write_json("inclusion_report.json", &report)?;
    Ok(report)
}

fn calibrate(run: &mut Run, opts: &RunOptions) -> Result<Value> {
    let cfg = run.config;
    let cal = cfg.calibration.as_ref().ok_or_else(|| HullError::Domain("calibrate needs [calibration]".into()))?;
    let mut tolerances = Tolerances::new();
    let mut runs = Vec::new();
    for target in &cal.runs {
        if target.scenario == "calibrate" {
            return Err(HullError::Domain("calibration cannot run itself".into()));
        }
        let path = cfg.resolve(&target.config);
        let sub = ExperimentConfig::load(&path)?;
        let stem = path.file_stem().map_or_else(|| target.scenario.clone(), |s| s.to_string_lossy().into_owned());
        let sub_opts = RunOptions {
            out_dir: Some(run.out_dir.join(&stem)),
            threads: opts.threads,
            svg: false,
            tolerances: Some(Tolerances::new()),
        };
        let outcome = run_scenario(&target.scenario, &sub, &sub_opts)?;
        if outcome.status == Status::Fail {
            run.note(Status::Fail, format!("oracle divergence in {stem}: {}", outcome.messages.join("; ")));
        }
        for m in &outcome.measurements {
            tolerances.record(&m.key, m.value, m.floor.max(THRESHOLD_FLOOR));
        }
        runs.push(json!({"scenario": target.scenario, "config": target.config, "status": outcome.status, "measurements": outcome.measurements}));
    }
    let text = tolerances.to_json();
    run.write("tolerances.json", text.as_bytes())?;
    if run.status != Status::Fail {
        if let Some(file) = cfg.tolerances.as_ref().and_then(|t| t.file.as_deref()) {
            let dest = cfg.resolve(file);
            std::fs::write(&dest, &text).map_err(|e| HullError::Io(format!("{}: {e}", dest.display())))?;
            run.messages.push(format!("wrote {}", dest.display()));
        }
    }
    let report = json!({"runs": runs, "tolerances": tolerances});
    run.write_json("calibration_report.json", &report)?;
    Ok(report)
}

/// Loads a config and runs it; the CLI entry point.
pub fn run_file(name: &str, path: &Path, opts: &RunOptions) -> Result<ScenarioOutcome> {
    run_scenario(name, &ExperimentConfig::load(path)?, opts)
}

