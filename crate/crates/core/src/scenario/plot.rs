use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{PlotSpec, RunError, RunReport, INDEX_FILE};
use crate::output::CsvTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Default, PartialEq)]
pub struct PlotOutcome {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let t: Vec<f64> = values.map(|v| if log { v.log10() } else { v }).collect();
        let lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            (lo - pad, hi + pad)
        };
        Some(Self { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

fn collect_series(table: &CsvTable, spec: &PlotSpec) -> Result<Vec<Series>, String> {
    let col = |name: &str| table.columns.iter().position(|c| c == name).ok_or(format!("missing column `{name}`"));
    let xi = col(&spec.x)?;
    let yi: Vec<(usize, &String)> = spec.y.iter().map(|y| col(y).map(|i| (i, y))).collect::<Result<_, _>>()?;
    let gi = spec.group_by.as_deref().map(col).transpose()?;
    let mut groups: Vec<String> = Vec::new();
    for row in &table.rows {
        let g = gi.map_or(String::new(), |i| row[i].clone());
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    let keep = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let mut out = Vec::new();
    for g in &groups {
        for &(i, name) in &yi {
            let points: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| gi.is_none_or(|k| &r[k] == g))
                .filter_map(|r| Some((r[xi].parse::<f64>().ok()?, r[i].parse::<f64>().ok()?)))
                .filter(|&(x, y)| keep(x, spec.log_x) && keep(y, spec.log_y))
                .collect();
            if !points.is_empty() {
                let label = match &spec.group_by {
                    Some(k) => format!("{name} ({k}={g})"),
                    None => name.clone(),
                };
                out.push(Series { label, points });
            }
        }
    }
    if out.is_empty() {
        return Err("no plottable data".into());
    }
    Ok(out)
}

/// Renders one table as an SVG line plot. Output depends only on the inputs.
pub fn render_svg(table: &CsvTable, spec: &PlotSpec) -> Result<String, String> {
    let series = collect_series(table, spec)?;
    let all = || series.iter().flat_map(|s| s.points.iter());
    let xa = Axis::new(all().map(|p| p.0), spec.log_x).ok_or("empty x range")?;
    let ya = Axis::new(all().map(|p| p.1), spec.log_y).ok_or("empty y range")?;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + pw * xa.frac(x);
    let py = |y: f64| TOP + ph * (1.0 - ya.frac(y));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in xa.ticks() {
        let x = px(t);
        let _ =
            writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t));
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, label(t));
    }
    let axis_note = |name: &str, log: bool| if log { format!("{name} (log)") } else { name.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&axis_note(&spec.x, spec.log_x))
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        if ser.points.len() <= 12 {
            for &(x, y) in &ser.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
            }
        }
        let ly = TOP + 14.0 * k as f64 + 8.0;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 16.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Draws every table of the run in `dir` that carries a plot spec.
///
/// Missing index, files or columns produce warnings, not errors.
pub fn plot_dir(dir: &Path) -> Result<PlotOutcome, RunError> {
    let mut out = PlotOutcome::default();
    if !dir.join(INDEX_FILE).exists() {
        out.warnings.push(format!("{}: no {INDEX_FILE}, nothing to plot", dir.display()));
        return Ok(out);
    }
    let report = RunReport::read(dir)?;
    for entry in &report.files {
        let Some(spec) = &entry.plot else { continue };
        let path = dir.join(&entry.name);
        let table = match fs::read_to_string(&path).ok().and_then(|t| CsvTable::parse(&t)) {
            Some(t) => t,
            None => {
                out.warnings.push(format!("{}: missing or unreadable, skipped", path.display()));
                continue;
            }
        };
        match render_svg(&table, spec) {
            Ok(svg) => {
                let target = path.with_extension("svg");
                fs::write(&target, svg).map_err(|source| RunError::Io { path: target.clone(), source })?;
                out.written.push(target);
            }
            Err(why) => out.warnings.push(format!("{}: {why}, skipped", path.display())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CsvTable {
        let mut t = CsvTable::new(["N", "t", "d"]);
        for n in [2.0, 3.0] {
            for t_ in [0.5, 1.0, 1.5] {
                t.push_floats(&[n, t_, t_ / n]);
            }
        }
        t
    }

    #[test]
    fn grouped_plot_has_one_series_per_group() {
        let svg = render_svg(&table(), &PlotSpec::lines("d", "t", &["d"]).grouped("N")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("N=2.0000000000000000e0"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = PlotSpec::lines("d", "N", &["d"]).log_log();
        assert_eq!(render_svg(&table(), &spec).unwrap(), render_svg(&table(), &spec).unwrap());
    }

    #[test]
    fn missing_column_is_reported() {
        assert!(render_svg(&table(), &PlotSpec::lines("d", "t", &["nope"])).unwrap_err().contains("nope"));
    }

    #[test]
    fn empty_dir_warns_without_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = plot_dir(dir.path()).unwrap();
        assert!(out.written.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }
}
