//! Result tables, CSV round-tripping and a minimal SVG line plot.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{MlabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Where a table came from. Written as `# key: value` lines ahead of the CSV header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new(), provenance: Provenance::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(MlabError::invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| MlabError::invalid(format!("no column named `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }
}

/// Shortest string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn header_name(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') {
        quote(s)
    } else {
        s.to_string()
    }
}

/// CSV text: provenance comment lines, a header row, then one line per row.
/// Numbers are bare, text cells are always quoted.
pub fn to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    let p = &table.provenance;
    let _ = writeln!(out, "# experiment: {}", p.experiment);
    let _ = writeln!(out, "# config_sha256: {}", p.config_hash);
    let _ = writeln!(out, "# seed: {}", p.seed);
    let _ = writeln!(out, "# version: {}", p.version);
    out.push_str(&table.columns.iter().map(|c| header_name(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(s) => quote(s),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(table)).map_err(|e| MlabError::Io(format!("{}: {e}", path.display())))
}

/// Splits one CSV record; returns `(field, was_quoted)` pairs.
fn split_record(line: &str) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        let mut field = String::new();
        let quoted = chars.peek() == Some(&'"');
        if quoted {
            chars.next();
            loop {
                match chars.next() {
                    Some('"') if chars.peek() == Some(&'"') => {
                        chars.next();
                        field.push('"');
                    }
                    Some('"') => break,
                    Some(c) => field.push(c),
                    None => return Err(MlabError::invalid("unterminated quoted CSV field")),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ',' {
                    break;
                }
                field.push(c);
                chars.next();
            }
        }
        out.push((field, quoted));
        match chars.next() {
            Some(',') => continue,
            None => break,
            Some(c) => return Err(MlabError::invalid(format!("unexpected `{c}` after quoted CSV field"))),
        }
    }
    Ok(out)
}

/// Inverse of [`to_csv`]. Records are assumed not to contain line breaks.
pub fn parse_csv(text: &str) -> Result<ResultTable> {
    let mut provenance = Provenance::default();
    let mut lines = text.lines();
    let mut header = None;
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ").or_else(|| rest.strip_suffix(':').map(|k| (k, ""))) {
                match k {
                    "experiment" => provenance.experiment = v.to_string(),
                    "config_sha256" => provenance.config_hash = v.to_string(),
                    "seed" => provenance.seed = v.parse().map_err(|_| MlabError::invalid("bad seed line"))?,
                    "version" => provenance.version = v.to_string(),
                    _ => {}
                }
            }
            continue;
        }
        header = Some(line);
        break;
    }
    let header = header.ok_or_else(|| MlabError::invalid("CSV has no header row"))?;
    let columns: Vec<String> = if header.is_empty() {
        Vec::new()
    } else {
        split_record(header)?.into_iter().map(|(f, _)| f).collect()
    };
    let mut table = ResultTable { columns, rows: Vec::new(), provenance };
    for line in lines {
        let row = split_record(line)?
            .into_iter()
            .map(|(f, quoted)| {
                if quoted {
                    Ok(Cell::Text(f))
                } else {
                    f.parse::<f64>().map(Cell::Num).map_err(|_| MlabError::invalid(format!("bad number `{f}`")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        table.push(row)?;
    }
    Ok(table)
}

/// Plot description for [`emit_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const W: f64 = 720.0;
const H: f64 = 460.0;
const ML: f64 = 70.0;
const MR: f64 = 170.0;
const MT: f64 = 30.0;
const MB: f64 = 50.0;

fn axis_value(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() || (log && v <= 0.0) {
        None
    } else if log {
        Some(v.log10())
    } else {
        Some(v)
    }
}

fn tick_label(v: f64, log: bool) -> String {
    let x = if log { 10f64.powf(v) } else { v };
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-3 {
        format!("{x:.2e}")
    } else {
        format!("{}", (x * 1e4).round() / 1e4)
    }
}

/// One polyline per y column against the x column, with a legend.
pub fn to_svg(table: &ResultTable, spec: &PlotSpec) -> Result<String> {
    let xi = table.column_index(&spec.x)?;
    let yis: Vec<usize> = spec.ys.iter().map(|y| table.column_index(y)).collect::<Result<_>>()?;
    let mut series: Vec<Vec<(f64, f64)>> = Vec::new();
    for &yi in &yis {
        let pts = table
            .rows
            .iter()
            .filter_map(|r| {
                let x = axis_value(r[xi].as_f64()?, spec.log_x)?;
                let y = axis_value(r[yi].as_f64()?, spec.log_y)?;
                Some((x, y))
            })
            .collect();
        series.push(pts);
    }
    let all = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 == 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 == 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MT + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<!-- {} {} -->", table.provenance.experiment, table.provenance.version);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MT + ph,
            MT + ph + 5.0,
            MT + ph + 18.0,
            tick_label(xv, spec.log_x)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{ML}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ML - 5.0,
            ML - 8.0,
            py + 4.0,
            tick_label(yv, spec.log_y)
        );
    }
    let scale = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        ML + pw / 2.0,
        H - 10.0,
        xml_escape(&spec.x),
        scale(spec.log_x)
    );
    let _ = writeln!(
        s,
        r#"<text x="{ML}" y="{:.2}">{}</text>"#,
        MT - 10.0,
        xml_escape(&format!("{}{}", table.provenance.experiment, scale(spec.log_y)))
    );
    for (k, pts) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = MT + 10.0 + 18.0 * k as f64;
        let lx = W - MR + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            xml_escape(&spec.ys[k])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn emit_svg(table: &ResultTable, spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = to_svg(table, spec)?;
    std::fs::write(path, svg).map_err(|e| MlabError::Io(format!("{}: {e}", path.display())))
}
