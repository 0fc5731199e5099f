//! PlotSpec JSON to self-contained SVG.
//!
//! The drawing uses a 4000 x 3000 user-unit canvas so that coordinates
//! printed with three decimals still resolve the data to about 1e-7 of the
//! axis range. The plot-area group carries `data-*` attributes with the axis
//! ranges and pixel bounds, which is enough to map a polyline back to data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sphens::analytics;
use sphens::estimators::nn_spacing_values;
use sphens::geom::SpherePoint;
use sphens::io::read_points;
use sphens::rng::mix_seed;
use sphens::samplers::{sample, SamplerKind};

use crate::CliError;

pub const WIDTH: f64 = 4000.0;
pub const HEIGHT: f64 = 3000.0;
const LEFT: f64 = 420.0;
const RIGHT: f64 = 3850.0;
const TOP: f64 = 220.0;
const BOTTOM: f64 = 2620.0;
const DEFAULT_BINS: usize = 40;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    #[serde(rename = "histogram")]
    Histogram,
    #[serde(rename = "curve")]
    Curve,
    #[serde(rename = "scatter3d_projection")]
    Scatter3DProjection,
}

/// Analytic curves available as data sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Function {
    GapDensity,
    GapCdfLimit,
    GapCdfFinite { n: usize },
    /// `e^(-x)`, the spacing density of independent points.
    ExpNeg,
    CorollaryCoeff,
    RszCoeff,
    MinSpacingLimitCdf,
    IidMinSpacingLimitCdf,
}

impl Function {
    pub fn eval(&self, x: f64) -> sphens::Result<f64> {
        match *self {
            Function::GapDensity => analytics::gap_density(x),
            Function::GapCdfLimit => analytics::gap_cdf_limit(x),
            Function::GapCdfFinite { n } => analytics::gap_cdf_finite(n, x),
            Function::ExpNeg => Ok((-x).exp()),
            Function::CorollaryCoeff => analytics::energy_bounds(x).map(|b| b.corollary_coeff),
            Function::RszCoeff => analytics::energy_bounds(x).map(|b| b.rsz_coeff),
            Function::MinSpacingLimitCdf => analytics::min_spacing_limit_cdf(x),
            Function::IidMinSpacingLimitCdf => analytics::iid_min_spacing_limit_cdf(x),
        }
    }
}

fn default_samples() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    /// Raw values (histograms).
    Values { values: Vec<f64> },
    /// `(x, y)` pairs (curves).
    Points { points: Vec<[f64; 2]> },
    /// A function sampled at `samples` equispaced points of `[from, to]`.
    Function {
        function: Function,
        from: f64,
        to: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// One numeric column of a CSV file, keeping rows whose columns equal `filter`.
    Csv {
        path: PathBuf,
        column: String,
        #[serde(default)]
        filter: BTreeMap<String, String>,
    },
    /// Points of a configuration file (scatter plots).
    Configuration { path: PathBuf },
    /// A freshly sampled configuration (scatter plots).
    Sample { sampler: SamplerKind, n: usize, seed: u64 },
    /// Pooled `(n/4) d_j^2` over `replicates` samples (histograms).
    NnSpacings { sampler: SamplerKind, n: usize, replicates: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub source: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub x_label: String,
    #[serde(default)]
    pub y_label: String,
    #[serde(default)]
    pub bins: Option<usize>,
    pub series: Vec<Series>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

enum Data {
    Values(Vec<f64>),
    Curve(Vec<(f64, f64)>),
    Sphere(Vec<SpherePoint>),
}

fn resolve(source: &DataSource, base: &Path) -> Result<Data, CliError> {
    let rel = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    Ok(match source {
        DataSource::Values { values } => Data::Values(values.clone()),
        DataSource::Points { points } => Data::Curve(points.iter().map(|p| (p[0], p[1])).collect()),
        DataSource::Function { function, from, to, samples } => {
            if *samples < 2 || !(to > from) {
                return Err(CliError::Usage("function sources need samples >= 2 and from < to".into()));
            }
            let step = (to - from) / (*samples - 1) as f64;
            Data::Curve(
                (0..*samples)
                    .map(|i| {
                        let x = if i + 1 == *samples { *to } else { from + step * i as f64 };
                        (x, function.eval(x).unwrap_or(f64::NAN))
                    })
                    .collect(),
            )
        }
        DataSource::Csv { path, column, filter } => {
            let mut rdr = csv::Reader::from_path(rel(path)).map_err(|e| CliError::Runtime(e.to_string()))?;
            let headers = rdr.headers().map_err(|e| CliError::Runtime(e.to_string()))?.clone();
            let find = |name: &str| {
                headers.iter().position(|h| h == name).ok_or_else(|| CliError::Usage(format!("csv has no column `{name}`")))
            };
            let col = find(column)?;
            let filters: Vec<(usize, &String)> =
                filter.iter().map(|(k, v)| find(k).map(|i| (i, v))).collect::<Result<_, _>>()?;
            let mut values = Vec::new();
            for row in rdr.records() {
                let row = row.map_err(|e| CliError::Runtime(e.to_string()))?;
                if filters.iter().all(|(i, v)| &row[*i] == v.as_str()) {
                    let v: f64 = row[col].parse().map_err(|_| CliError::Runtime(format!("bad number `{}`", &row[col])))?;
                    if v.is_finite() {
                        values.push(v);
                    }
                }
            }
            Data::Values(values)
        }
        DataSource::Configuration { path } => Data::Sphere(read_points(&rel(path))?),
        DataSource::Sample { sampler, n, seed } => {
            Data::Sphere(sample(*sampler, *n, sphens::RngSeed(*seed))?.points().to_vec())
        }
        DataSource::NnSpacings { sampler, n, replicates, seed } => {
            let mut values = Vec::new();
            for r in 0..*replicates {
                let c = sample(*sampler, *n, mix_seed(*seed, sampler.name(), *n, r))?;
                values.extend(nn_spacing_values(&c)?);
            }
            Data::Values(values)
        }
    })
}

fn is_empty(d: &Data) -> bool {
    match d {
        Data::Values(v) => v.is_empty(),
        Data::Curve(v) => v.is_empty(),
        Data::Sphere(v) => v.is_empty(),
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Rounds `[lo, hi]` outward to a multiple of a 1-2-5 step; returns
/// `(lo, hi, step)`.
pub fn nice_range(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let nlo = (lo / step).floor() * step;
    let nhi = (hi / step).ceil() * step;
    (nlo, nhi, step)
}

/// Affine map from data to canvas coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
}

impl Frame {
    pub fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x_min) / (self.x_max - self.x_min) * (self.right - self.left)
    }

    pub fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y_min) / (self.y_max - self.y_min) * (self.bottom - self.top)
    }

    pub fn data_x(&self, px: f64) -> f64 {
        self.x_min + (px - self.left) / (self.right - self.left) * (self.x_max - self.x_min)
    }

    pub fn data_y(&self, py: f64) -> f64 {
        self.y_min + (self.bottom - py) / (self.bottom - self.top) * (self.y_max - self.y_min)
    }
}

struct Histogram {
    edges_lo: f64,
    width: f64,
    density: Vec<f64>,
}

fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = values.len() as f64;
    Histogram { edges_lo: lo, width, density: counts.iter().map(|&c| c as f64 / (total * width)).collect() }
}

/// Renders the spec; `base` resolves relative file paths in data sources.
pub fn render(spec: &PlotSpec, base: &Path) -> Result<String, CliError> {
    if spec.series.is_empty() {
        return Err(CliError::Usage("plot spec has no series".into()));
    }
    let bins = spec.bins.unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(CliError::Usage("histogram bin count must be at least 1".into()));
    }
    let mut data = Vec::with_capacity(spec.series.len());
    for s in &spec.series {
        let d = resolve(&s.source, base)?;
        if is_empty(&d) {
            return Err(CliError::Usage(format!("series `{}` is empty", s.label)));
        }
        let ok = match (spec.kind, &d) {
            (PlotKind::Scatter3DProjection, Data::Sphere(_)) => true,
            (PlotKind::Scatter3DProjection, _) | (_, Data::Sphere(_)) => false,
            (PlotKind::Curve, Data::Values(_)) => false,
            _ => true,
        };
        if !ok {
            return Err(CliError::Usage(format!("series `{}` does not fit a {:?} plot", s.label, spec.kind)));
        }
        data.push(d);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="130" font-size="90" text-anchor="middle">{}</text>"#, (LEFT + RIGHT) / 2.0, esc(&spec.title));
    }
    match spec.kind {
        PlotKind::Scatter3DProjection => scatter(&mut svg, spec, &data),
        _ => cartesian(&mut svg, spec, &data, bins),
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn cartesian(svg: &mut String, spec: &PlotSpec, data: &[Data], bins: usize) {
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut value_range = (f64::INFINITY, f64::NEG_INFINITY);
    for d in data {
        if let Data::Values(v) = d {
            for &x in v {
                value_range = (value_range.0.min(x), value_range.1.max(x));
            }
        }
    }
    let hists: Vec<Option<Histogram>> = data
        .iter()
        .map(|d| match d {
            Data::Values(v) => Some(histogram(v, value_range.0, value_range.1, bins)),
            _ => None,
        })
        .collect();
    for (d, h) in data.iter().zip(&hists) {
        if let Some(h) = h {
            x_lo = x_lo.min(h.edges_lo);
            x_hi = x_hi.max(h.edges_lo + h.width * bins as f64);
            y_lo = y_lo.min(0.0);
            y_hi = h.density.iter().fold(y_hi, |m, &v| m.max(v));
        } else if let Data::Curve(pts) = d {
            for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x_min, x_max, x_step) = nice_range(x_lo, x_hi);
    let (y_min, y_max, y_step) = nice_range(y_lo, y_hi);
    let f = Frame { x_min, x_max, y_min, y_max, left: LEFT, right: RIGHT, top: TOP, bottom: BOTTOM };
    axes(svg, spec, &f, x_step, y_step);

    let _ = writeln!(
        svg,
        r#"<g class="plot-area" data-x-min="{x_min}" data-x-max="{x_max}" data-y-min="{y_min}" data-y-max="{y_max}" data-left="{LEFT}" data-right="{RIGHT}" data-top="{TOP}" data-bottom="{BOTTOM}">"#
    );
    // bars first so curves stay visible on top
    let order = (0..data.len()).filter(|&i| hists[i].is_some()).chain((0..data.len()).filter(|&i| hists[i].is_none()));
    for i in order {
        let (s, d, h) = (&spec.series[i], &data[i], &hists[i]);
        let color = PALETTE[i % PALETTE.len()];
        let label = esc(&s.label);
        if let Some(h) = h {
            let _ = writeln!(svg, r#"<g class="histogram" data-label="{label}" fill="{color}" fill-opacity="0.35" stroke="{color}" stroke-width="3">"#);
            for (b, &dens) in h.density.iter().enumerate() {
                let x0 = f.px(h.edges_lo + h.width * b as f64);
                let x1 = f.px(h.edges_lo + h.width * (b + 1) as f64);
                let y = f.py(dens);
                let _ = writeln!(svg, r#"<rect x="{x0:.3}" y="{y:.3}" width="{:.3}" height="{:.3}"/>"#, x1 - x0, f.py(0.0) - y);
            }
            svg.push_str("</g>\n");
        } else if let Data::Curve(pts) = d {
            // non-finite values split the curve
            for run in pts.split(|p| !(p.0.is_finite() && p.1.is_finite())) {
                if run.is_empty() {
                    continue;
                }
                let coords: Vec<String> = run.iter().map(|&(x, y)| format!("{:.3},{:.3}", f.px(x), f.py(y))).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline class="series" data-label="{label}" fill="none" stroke="{color}" stroke-width="8" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
    }
    svg.push_str("</g>\n");
    legend(svg, spec);
}

fn axes(svg: &mut String, spec: &PlotSpec, f: &Frame, x_step: f64, y_step: f64) {
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black" stroke-width="4"/>"#,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let ticks = |lo: f64, hi: f64, step: f64| {
        let k = ((hi - lo) / step).round() as i64;
        (0..=k).map(move |i| lo + step * i as f64)
    };
    let label = |v: f64, step: f64| {
        let digits = (-step.log10().floor()).max(0.0) as usize;
        format!("{v:.digits$}")
    };
    for x in ticks(f.x_min, f.x_max, x_step) {
        let px = f.px(x);
        let _ = writeln!(svg, r#"<line x1="{px:.3}" y1="{BOTTOM}" x2="{px:.3}" y2="{}" stroke="black" stroke-width="4"/>"#, BOTTOM + 30.0);
        let _ = writeln!(svg, r#"<text x="{px:.3}" y="{}" font-size="60" text-anchor="middle">{}</text>"#, BOTTOM + 100.0, label(x, x_step));
    }
    for y in ticks(f.y_min, f.y_max, y_step) {
        let py = f.py(y);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{py:.3}" x2="{LEFT}" y2="{py:.3}" stroke="black" stroke-width="4"/>"#, LEFT - 30.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.3}" font-size="60" text-anchor="end">{}</text>"#, LEFT - 45.0, py + 20.0, label(y, y_step));
    }
    if !spec.x_label.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="70" text-anchor="middle">{}</text>"#, (LEFT + RIGHT) / 2.0, BOTTOM + 230.0, esc(&spec.x_label));
    }
    if !spec.y_label.is_empty() {
        let cy = (TOP + BOTTOM) / 2.0;
        let _ = writeln!(svg, r#"<text x="120" y="{cy}" font-size="70" text-anchor="middle" transform="rotate(-90 120 {cy})">{}</text>"#, esc(&spec.y_label));
    }
}

fn legend(svg: &mut String, spec: &PlotSpec) {
    svg.push_str("<g class=\"legend\">\n");
    for (i, s) in spec.series.iter().enumerate() {
        let y = TOP + 90.0 + 90.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="90" height="40" fill="{color}"/>"#, RIGHT - 1200.0, y - 35.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{y}" font-size="60">{}</text>"#, RIGHT - 1080.0, esc(&s.label));
    }
    svg.push_str("</g>\n");
}

/// Orthographic view of the sphere from a fixed oblique direction; points on
/// the far hemisphere are drawn hollow.
fn scatter(svg: &mut String, spec: &PlotSpec, data: &[Data]) {
    let view = normalize([0.55, -0.7, 0.45]);
    let e1 = normalize(cross([0.0, 0.0, 1.0], view));
    let e2 = cross(view, e1);
    let (cx, cy, r) = ((LEFT + RIGHT) / 2.0, (TOP + BOTTOM) / 2.0, (BOTTOM - TOP) / 2.0 - 40.0);
    let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="black" stroke-width="4"/>"#);
    svg.push_str("<g class=\"plot-area\">\n");
    for (i, (s, d)) in spec.series.iter().zip(data).enumerate() {
        let Data::Sphere(points) = d else { continue };
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="scatter" data-label="{}">"#, esc(&s.label));
        for p in points {
            let a = p.to_array();
            let u = dot(a, e1);
            let v = dot(a, e2);
            let front = dot(a, view) >= 0.0;
            let fill = if front { color } else { "none" };
            let opacity = if front { 1.0 } else { 0.4 };
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.3}" cy="{:.3}" r="14" fill="{fill}" stroke="{color}" stroke-width="3" opacity="{opacity}"/>"#,
                cx + r * u,
                cy - r * v
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</g>\n");
    legend(svg, spec);
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Nearest-neighbour spacing density of the ensemble against independent
/// points; with `replicates > 0` an empirical histogram is overlaid.
pub fn figure1(replicates: u64, n: usize, seed: u64) -> PlotSpec {
    let mut series = vec![
        Series {
            label: "spherical ensemble Q(x)".into(),
            source: DataSource::Function { function: Function::GapDensity, from: 0.0, to: 4.0, samples: 401 },
        },
        Series {
            label: "independent points e^(-x)".into(),
            source: DataSource::Function { function: Function::ExpNeg, from: 0.0, to: 4.0, samples: 401 },
        },
    ];
    if replicates > 0 {
        series.push(Series {
            label: format!("matrix model n = {n}"),
            source: DataSource::NnSpacings { sampler: SamplerKind::Matrix, n, replicates, seed },
        });
    }
    PlotSpec {
        kind: if replicates > 0 { PlotKind::Histogram } else { PlotKind::Curve },
        title: "Nearest-neighbour spacing density".into(),
        x_label: "x = (n/4) d^2".into(),
        y_label: "density".into(),
        bins: Some(40),
        series,
        output: None,
    }
}

/// The two energy-bound coefficients over `s` in `(-2, 2)`.
pub fn figure2() -> PlotSpec {
    let range = |function| DataSource::Function { function, from: -1.98, to: 1.98, samples: 400 };
    PlotSpec {
        kind: PlotKind::Curve,
        title: "Energy bound coefficients".into(),
        x_label: "s".into(),
        y_label: "coefficient".into(),
        bins: None,
        series: vec![
            Series { label: "Gamma(1 - s/2) / 2^s".into(), source: range(Function::CorollaryCoeff) },
            Series { label: "(2 sqrt(2 pi))^(-s)".into(), source: range(Function::RszCoeff) },
        ],
        output: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_ranges() {
        assert_eq!(nice_range(0.0, 0.74), (0.0, 0.8, 0.2));
        let (lo, hi, step) = nice_range(-1.98, 1.98);
        assert_eq!((lo, hi, step), (-2.0, 2.0, 1.0));
        let (lo, hi, _) = nice_range(3.0, 3.0);
        assert!(lo < 3.0 && hi > 3.0);
    }

    #[test]
    fn empty_series_rejected() {
        let mut spec = figure2();
        spec.series.clear();
        assert!(matches!(render(&spec, Path::new(".")), Err(CliError::Usage(_))));
        spec.series.push(Series { label: "none".into(), source: DataSource::Points { points: vec![] } });
        assert!(matches!(render(&spec, Path::new(".")), Err(CliError::Usage(_))));
    }

    #[test]
    fn histogram_needs_bins() {
        let spec = PlotSpec {
            kind: PlotKind::Histogram,
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            bins: Some(0),
            series: vec![Series { label: "v".into(), source: DataSource::Values { values: vec![1.0, 2.0] } }],
            output: None,
        };
        assert!(render(&spec, Path::new(".")).is_err());
    }

    #[test]
    fn histogram_density_integrates_to_one() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = histogram(&v, -1.0, 1.0, 17);
        let total: f64 = h.density.iter().map(|d| d * h.width).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
