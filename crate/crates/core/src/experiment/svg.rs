use std::fmt::Write;

use num_complex::Complex64;

use crate::spectral::PseudospectrumGrid;

const SIZE: f64 = 480.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    re: (f64, f64),
    im: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = Complex64>) -> Self {
        let (mut re, mut im) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for z in points {
            re = (re.0.min(z.re), re.1.max(z.re));
            im = (im.0.min(z.im), im.1.max(z.im));
        }
        if !re.0.is_finite() {
            re = (-1.0, 1.0);
            im = (-1.0, 1.0);
        }
        let pad = |(a, b): (f64, f64)| {
            let w = (b - a).max(1e-9);
            (a - 0.05 * w - 0.5, b + 0.05 * w + 0.5)
        };
        Frame { re: pad(re), im: pad(im) }
    }

    fn x(&self, re: f64) -> f64 {
        PAD + (re - self.re.0) / (self.re.1 - self.re.0) * SIZE
    }

    fn y(&self, im: f64) -> f64 {
        PAD + (self.im.1 - im) / (self.im.1 - self.im.0) * SIZE
    }
}

fn header(out: &mut String, title: &str) {
    let total = SIZE + 2.0 * PAD;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="14">{}</text>"#, PAD - 14.0, escape(title));
}

fn axes(out: &mut String, f: &Frame) {
    let _ = writeln!(out, r##"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#444"/>"##);
    if f.im.0 < 0.0 && f.im.1 > 0.0 {
        let y = f.y(0.0);
        let _ = writeln!(out, r##"<line x1="{PAD}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#bbb"/>"##, PAD + SIZE);
    }
    if f.re.0 < 0.0 && f.re.1 > 0.0 {
        let x = f.x(0.0);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{PAD}" x2="{x:.2}" y2="{:.2}" stroke="#bbb"/>"##, PAD + SIZE);
    }
    let labels = [
        (PAD, PAD + SIZE + 16.0, format!("{:.3}", f.re.0)),
        (PAD + SIZE - 40.0, PAD + SIZE + 16.0, format!("{:.3}", f.re.1)),
        (2.0, PAD + SIZE, format!("{:.2}", f.im.0)),
        (2.0, PAD + 10.0, format!("{:.2}", f.im.1)),
    ];
    for (x, y, t) in labels {
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="10">{t}</text>"#);
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of point sets in the complex plane, one color per set.
pub fn spectra_scatter(title: &str, sets: &[(String, Vec<Complex64>)]) -> String {
    let f = Frame::fit(sets.iter().flat_map(|(_, p)| p.iter().copied()));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f);
    for (i, (label, points)) in sets.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(out, r#"<g fill="{color}" fill-opacity="0.7">"#);
        for z in points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, f.x(z.re), f.y(z.im));
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" fill="{color}">{}</text>"#,
            PAD + 4.0,
            PAD + 14.0 + 12.0 * i as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn heat_color(t: f64) -> String {
    // dark blue (small σ) to pale yellow (large σ)
    let t = t.clamp(0.0, 1.0);
    let r = (20.0 + 235.0 * t) as u8;
    let g = (30.0 + 210.0 * t) as u8;
    let b = (110.0 + 60.0 * (1.0 - t) + 20.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Marching-squares segments of the level set {σ = level} on the node lattice.
fn contour_segments(grid: &PseudospectrumGrid, level: f64) -> Vec<(Complex64, Complex64)> {
    let [nr, ni] = grid.spec.resolution;
    let mut segs = Vec::new();
    let lerp = |a: (Complex64, f64), b: (Complex64, f64)| {
        let t = (level - a.1) / (b.1 - a.1);
        a.0 + (b.0 - a.0) * t
    };
    for j in 0..ni.saturating_sub(1) {
        for i in 0..nr.saturating_sub(1) {
            let c = [
                (grid.spec.node(i, j), grid.get(i, j)),
                (grid.spec.node(i + 1, j), grid.get(i + 1, j)),
                (grid.spec.node(i + 1, j + 1), grid.get(i + 1, j + 1)),
                (grid.spec.node(i, j + 1), grid.get(i, j + 1)),
            ];
            let crossings: Vec<Complex64> = (0..4)
                .filter_map(|e| {
                    let (a, b) = (c[e], c[(e + 1) % 4]);
                    ((a.1 < level) != (b.1 < level)).then(|| lerp(a, b))
                })
                .collect();
            if crossings.len() == 2 {
                segs.push((crossings[0], crossings[1]));
            } else if crossings.len() == 4 {
                segs.push((crossings[0], crossings[1]));
                segs.push((crossings[2], crossings[3]));
            }
        }
    }
    segs
}

/// log₁₀ σ_min heatmap with ε-contours.
pub fn sigma_heatmap(title: &str, grid: &PseudospectrumGrid, epsilons: &[f64]) -> String {
    let r = &grid.spec.rectangle;
    let f = Frame { re: (r.re_min, r.re_max), im: (r.im_min, r.im_max) };
    let [nr, ni] = grid.spec.resolution;
    let logs: Vec<f64> = grid.sigma_min.iter().map(|s| s.max(1e-16).log10()).collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = (hi - lo).max(1e-12);
    let (w, h) = (SIZE / nr as f64, SIZE / ni as f64);
    let mut out = String::new();
    header(&mut out, title);
    for j in 0..ni {
        for i in 0..nr {
            let t = (logs[grid.spec.index(i, j)] - lo) / span;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                PAD + i as f64 * w,
                PAD + SIZE - (j + 1) as f64 * h,
                w + 0.05,
                h + 0.05,
                heat_color(t)
            );
        }
    }
    // nodes sit at lower-left cell corners; shift contours by half a cell
    let half = Complex64::new((r.re_max - r.re_min) / nr as f64 / 2.0, (r.im_max - r.im_min) / ni as f64 / 2.0);
    for (k, &eps) in epsilons.iter().enumerate() {
        let color = COLORS[(k + 1) % COLORS.len()];
        let _ = writeln!(out, r#"<g stroke="{color}" stroke-width="1.2" fill="none">"#);
        for (a, b) in contour_segments(grid, eps) {
            let (a, b) = (a + half, b + half);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                f.x(a.re),
                f.y(a.im),
                f.x(b.re),
                f.y(b.im)
            );
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" fill="{color}">ε = {eps}</text>"#,
            PAD + SIZE - 70.0,
            PAD + 14.0 + 12.0 * k as f64
        );
    }
    axes(&mut out, &f);
    out.push_str("</svg>\n");
    out
}
