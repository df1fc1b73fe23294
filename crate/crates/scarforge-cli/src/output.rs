//! CSV tables with a metadata header, and minimal SVG renderings.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Parameters that determine the numbers in an output file.
#[derive(Debug, Clone, Default)]
pub struct RunMeta {
    pub command: String,
    pub model: String,
    pub len: Option<usize>,
    pub params: Vec<(String, String)>,
}

impl RunMeta {
    pub fn new(command: &str, model: &str, len: Option<usize>) -> Self {
        Self { command: command.into(), model: model.into(), len, params: Vec::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    /// SHA-256 over the sorted parameter list.
    pub fn config_hash(&self) -> String {
        let mut items = self.params.clone();
        items.push(("command".into(), self.command.clone()));
        items.push(("model".into(), self.model.clone()));
        if let Some(l) = self.len {
            items.push(("L".into(), l.to_string()));
        }
        items.sort();
        let mut h = Sha256::new();
        for (k, v) in &items {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# scarforge {}", scarforge::VERSION),
            format!("# command: {}", self.command),
            format!("# model: {}", self.model),
        ];
        if let Some(l) = self.len {
            out.push(format!("# L: {l}"));
        }
        out.push(format!("# config: {}", self.config_hash()));
        out
    }
}

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.11e}")
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, meta: &RunMeta) -> String {
        let mut s = String::new();
        for line in meta.header_lines() {
            s.push_str(&line);
            s.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

pub fn write(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Frame {
    fn fit(xs: &[f64], ys: &[f64], log_y: bool) -> Self {
        let ys: Vec<f64> = ys.iter().map(|&y| if log_y { y.max(1e-300).log10() } else { y }).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() && hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) }
        };
        Self { x: range(xs), y: range(&ys), log_y }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let y = if self.log_y { y.max(1e-300).log10() } else { y };
        let u = PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD);
        let v = H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD);
        (u, v)
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let _ = write!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let ylab = if self.log_y { format!("log10 {ylabel}") } else { ylabel.to_string() };
        let _ = write!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel} [{:.3}, {:.3}]</text>"#,
            W / 2.0,
            H - 15.0,
            self.x.0,
            self.x.1
        );
        let _ = write!(
            s,
            r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">{ylab} [{:.3}, {:.3}]</text>"#,
            H / 2.0,
            H / 2.0,
            self.y.0,
            self.y.1
        );
    }
}

fn open() -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#000000"];

/// Line plot of several series sharing the x axis.
pub fn line_svg(xs: &[f64], series: &[(&str, &[f64])], xlabel: &str, log_y: bool) -> String {
    let all: Vec<f64> = series.iter().flat_map(|(_, y)| y.iter().copied()).collect();
    let frame = Frame::fit(xs, &all, log_y);
    let mut s = open();
    frame.axes(&mut s, xlabel, series.first().map_or("", |(n, _)| *n));
    for (k, (name, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = xs
            .iter()
            .zip(ys.iter())
            .map(|(&x, &y)| {
                let (u, v) = frame.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let c = COLORS[k % COLORS.len()];
        let _ = write!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1" points="{}"/>"#, pts.join(" "));
        let _ = write!(s, r#"<text x="{}" y="{}" font-size="11" fill="{c}">{name}</text>"#, W - PAD - 80.0, PAD + 15.0 * (k as f64 + 1.0));
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter plot; highlighted points are drawn as crosses.
pub fn scatter_svg(xs: &[f64], ys: &[f64], highlight: &[bool], xlabel: &str, ylabel: &str) -> String {
    let frame = Frame::fit(xs, ys, false);
    let mut s = open();
    frame.axes(&mut s, xlabel, ylabel);
    for ((&x, &y), &h) in xs.iter().zip(ys).zip(highlight) {
        let (u, v) = frame.px(x, y);
        if h {
            let _ = write!(
                s,
                r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="black" stroke-width="1.5"/>"#,
                u - 4.0,
                v - 4.0,
                u + 4.0,
                v + 4.0,
                u - 4.0,
                v + 4.0,
                u + 4.0,
                v - 4.0
            );
        } else {
            let _ = write!(s, r##"<circle cx="{u:.2}" cy="{v:.2}" r="1.5" fill="#1f77b4"/>"##);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-1.0 / 3.0), "-3.33333333333e-1");
    }

    #[test]
    fn hash_ignores_param_order() {
        let a = RunMeta::new("rules", "pxp", Some(8)).param("type", "II").param("tol", 1e-9);
        let b = RunMeta::new("rules", "pxp", Some(8)).param("tol", 1e-9).param("type", "II");
        assert_eq!(a.config_hash(), b.config_hash());
        let c = RunMeta::new("rules", "pxp", Some(10)).param("type", "II").param("tol", 1e-9);
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn svg_marks_highlights() {
        let s = scatter_svg(&[0.0, 1.0], &[1.0, 2.0], &[true, false], "E", "IPR");
        assert_eq!(s.matches("<path").count(), 1);
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
