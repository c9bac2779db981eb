use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 30.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Which columns of a CSV to draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSpec {
    pub x: String,
    pub series: Vec<String>,
    /// Columns whose values split rows into separate lines. `None` picks
    /// every non-numeric column other than booleans.
    pub group: Option<Vec<String>>,
    pub logy: bool,
}

impl PlotSpec {
    pub fn new(series: Vec<String>) -> Self {
        Self {
            x: "layer".into(),
            series,
            group: None,
            logy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOutput {
    pub svg: String,
    /// Dropped points and similar notices.
    pub warnings: Vec<String>,
}

struct Table {
    header: Vec<String>,
    /// `(line number, cells)`.
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty CSV".into(),
    })?;
    let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if cells.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {} fields, found {}", header.len(), cells.len()),
            });
        }
        rows.push((i + 1, cells));
    }
    Ok(Table { header, rows })
}

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}`"),
        })
}

fn number(line: usize, cell: &str) -> Result<f64> {
    cell.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{cell}` is not a number"),
    })
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders `spec` from CSV text as a static line chart, one polyline per
/// series and group. Output depends only on the inputs.
pub fn emit_svg(csv: &str, spec: &PlotSpec) -> Result<SvgOutput> {
    if spec.series.is_empty() {
        return Err(Error::invalid("no series selected"));
    }
    let table = parse_csv(csv)?;
    let xcol = column(&table, &spec.x)?;
    let ycols: Vec<usize> = spec
        .series
        .iter()
        .map(|s| column(&table, s))
        .collect::<Result<_>>()?;
    let gcols: Vec<usize> = match &spec.group {
        Some(g) => g.iter().map(|s| column(&table, s)).collect::<Result<_>>()?,
        None => (0..table.header.len())
            .filter(|c| *c != xcol && !ycols.contains(c))
            .filter(|&c| {
                table.rows.iter().any(|(_, r)| r[c].parse::<f64>().is_err())
                    && table
                        .rows
                        .iter()
                        .all(|(_, r)| r[c] != "true" && r[c] != "false")
            })
            .collect(),
    };

    let mut warnings = Vec::new();
    // BTreeMap keeps line order stable; first-seen order is kept in `order`.
    let mut lines: BTreeMap<usize, (String, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (line, row) in &table.rows {
        let x = number(*line, &row[xcol])?;
        let group: Vec<&str> = gcols.iter().map(|&c| row[c].as_str()).collect();
        for (s, &yc) in spec.series.iter().zip(&ycols) {
            let label = if group.is_empty() {
                s.clone()
            } else {
                format!("{s} [{}]", group.join(" "))
            };
            let y = number(*line, &row[yc])?;
            let idx = match order.iter().position(|l| *l == label) {
                Some(i) => i,
                None => {
                    order.push(label.clone());
                    order.len() - 1
                }
            };
            let entry = lines
                .entry(idx)
                .or_insert_with(|| (label.clone(), Vec::new()));
            if !x.is_finite() || !y.is_finite() || (spec.logy && y <= 0.0) {
                warnings.push(format!("line {line}: dropped {label} point ({x}, {y})"));
                continue;
            }
            entry.1.push((x, if spec.logy { y.log10() } else { y }));
        }
    }

    let points = lines.values().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_Y + (y1 - y) / (y1 - y0) * plot_h;
    let ylabel = |y: f64| {
        if spec.logy {
            format!("1e{y:.2}")
        } else {
            format!("{y:.4e}")
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{v}</text>"#,
            fmt_coord(px(v)),
            fmt_coord(HEIGHT - MARGIN_Y + 14.0)
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt_coord(MARGIN_LEFT - 4.0),
            fmt_coord(py(v) + 3.0),
            ylabel(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 4.0),
        escape(&spec.x)
    );
    for (i, (label, pts)) in lines.values().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(px(x)), fmt_coord(py(y))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN_Y + 12.0 * i as f64 + 8.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            fmt_coord(WIDTH - MARGIN_RIGHT + 8.0),
            fmt_coord(ly),
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(SvgOutput { svg, warnings })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "layer,iso_gap\n0,1.0\n1,0.5\n2,inf\n3,0.125\n";

    #[test]
    fn single_series_has_one_polyline() {
        let out = emit_svg(CSV, &PlotSpec::new(vec!["iso_gap".into()])).unwrap();
        assert_eq!(out.svg.matches("<polyline").count(), 1);
        assert!(!out.svg.contains("NaN"));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn byte_stable() {
        let mut spec = PlotSpec::new(vec!["iso_gap".into()]);
        spec.logy = true;
        assert_eq!(emit_svg(CSV, &spec).unwrap(), emit_svg(CSV, &spec).unwrap());
    }

    #[test]
    fn empty_selection_rejected() {
        assert!(emit_svg(CSV, &PlotSpec::new(vec![])).is_err());
    }

    #[test]
    fn malformed_row_reports_line() {
        let bad = "layer,iso_gap\n0,1.0\n1\n";
        match emit_svg(bad, &PlotSpec::new(vec!["iso_gap".into()])) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = "layer,iso_gap\n0,abc\n";
        assert!(matches!(
            emit_svg(bad, &PlotSpec::new(vec!["iso_gap".into()])),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn groups_split_lines() {
        let csv =
            "activation,layer,v,ok\nrelu,0,1,true\nrelu,1,2,false\ntanh,0,3,true\ntanh,1,4,true\n";
        let out = emit_svg(csv, &PlotSpec::new(vec!["v".into()])).unwrap();
        assert_eq!(out.svg.matches("<polyline").count(), 2);
    }
}
