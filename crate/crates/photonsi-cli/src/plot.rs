use std::fs;
use std::path::Path;

use crate::err::Fail;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
// Plot rectangle; the strip on the right holds the legend.
const PX0: f64 = 70.0;
const PX1: f64 = 620.0;
const PY0: f64 = 20.0;
const PY1: f64 = 440.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, name: &str) -> Result<usize, Fail> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Fail::Config(format!("csv has no column '{name}'")))
    }
}

fn parse_csv(text: &str) -> Result<Table, Fail> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header: Vec<String> = lines
        .next()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| Fail::Config("csv is empty".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Fail::Config(format!(
                "csv line {} has {} fields, header has {}",
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn cell(table: &Table, row: usize, col: usize) -> Result<f64, Fail> {
    table.rows[row][col].parse().map_err(|_| {
        Fail::Config(format!(
            "csv line {}, column '{}': '{}' is not a number",
            row + 2,
            table.header[col],
            table.rows[row][col]
        ))
    })
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

pub fn run(
    csv_path: &Path,
    out: &Path,
    x: &str,
    y_spec: &str,
    series_col: Option<&str>,
    gnuplot: bool,
) -> Result<(), Fail> {
    let text = fs::read_to_string(csv_path)
        .map_err(|e| Fail::Config(format!("{}: {e}", csv_path.display())))?;
    let table = parse_csv(&text)?;
    let xcol = table.column(x)?;
    let ynames: Vec<&str> = y_spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if ynames.is_empty() {
        return Err(Fail::Config("--y needs at least one column name".into()));
    }
    if series_col.is_some() && ynames.len() > 1 {
        return Err(Fail::Config("--series takes a single --y column".into()));
    }

    let mut series: Vec<Series> = Vec::new();
    match series_col {
        None => {
            for name in &ynames {
                let ycol = table.column(name)?;
                let mut points = Vec::with_capacity(table.rows.len());
                for r in 0..table.rows.len() {
                    points.push((cell(&table, r, xcol)?, cell(&table, r, ycol)?));
                }
                series.push(Series { label: name.to_string(), points });
            }
        }
        Some(sname) => {
            let scol = table.column(sname)?;
            let ycol = table.column(ynames[0])?;
            for r in 0..table.rows.len() {
                let key = &table.rows[r][scol];
                let point = (cell(&table, r, xcol)?, cell(&table, r, ycol)?);
                match series.iter_mut().find(|s| s.label == format!("{sname}={key}")) {
                    Some(s) => s.points.push(point),
                    None => series
                        .push(Series { label: format!("{sname}={key}"), points: vec![point] }),
                }
            }
            // No rows: still draw the empty frame.
            if series.is_empty() {
                series.push(Series { label: ynames[0].to_string(), points: Vec::new() });
            }
        }
    }

    let svg = render_svg(x, &series);
    fs::write(out, svg).map_err(|e| Fail::Config(format!("{}: {e}", out.display())))?;
    if gnuplot {
        write_gnuplot(out, x, &series)?;
    }
    Ok(())
}

fn ranges(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = xs;
    for s in series {
        for &(x, y) in &s.points {
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    let pad = |(lo, hi): (f64, f64)| {
        if lo > hi {
            return (0.0, 1.0);
        }
        let span = hi - lo;
        if span == 0.0 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo - 0.05 * span, hi + 0.05 * span)
        }
    };
    (pad(xs), pad(ys))
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_svg(x_name: &str, series: &[Series]) -> String {
    let ((xmin, xmax), (ymin, ymax)) = ranges(series);
    let sx = |v: f64| PX0 + (v - xmin) / (xmax - xmin) * (PX1 - PX0);
    let sy = |v: f64| PY1 - (v - ymin) / (ymax - ymin) * (PY1 - PY0);
    let mut svg = format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" ",
            "font-family=\"monospace\" font-size=\"12\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        ),
        w = WIDTH,
        h = HEIGHT
    );
    // Frame and ticks.
    svg.push_str(&format!(
        "<rect x=\"{PX0}\" y=\"{PY0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        PX1 - PX0,
        PY1 - PY0
    ));
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let xp = sx(xv);
        let yp = sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{PY1}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"#cccccc\"/>\n",
            PY0
        ));
        svg.push_str(&format!(
            "<line x1=\"{PX0}\" y1=\"{yp:.2}\" x2=\"{PX1}\" y2=\"{yp:.2}\" stroke=\"#cccccc\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            PY1 + 18.0,
            tick_label(xv)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            PX0 - 6.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (PX0 + PX1) / 2.0,
        PY1 + 40.0,
        escape(x_name)
    ));
    // Data and legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        } else if !s.points.is_empty() {
            let pts: Vec<String> =
                s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        let ly = 30.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            PX1 + 14.0,
            PX1 + 38.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            PX1 + 44.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

// Sidecar files for people who want gnuplot instead of the built-in
// renderer: a whitespace table with one index block per series, plus a
// script that reproduces the chart.
fn write_gnuplot(out: &Path, x_name: &str, series: &[Series]) -> Result<(), Fail> {
    let dat_path = out.with_extension("dat");
    let gp_path = out.with_extension("gp");
    let mut dat = String::new();
    for s in series {
        dat.push_str(&format!("# {}\n", s.label));
        for &(x, y) in &s.points {
            dat.push_str(&format!("{x} {y}\n"));
        }
        dat.push_str("\n\n");
    }
    fs::write(&dat_path, dat).map_err(|e| Fail::Config(format!("{}: {e}", dat_path.display())))?;
    let dat_name = dat_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dat_path.display().to_string());
    let svg_name = out
        .with_extension("gnuplot.svg")
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let quote = |s: &str| s.replace('\'', "''");
    let mut gp = format!(
        "set terminal svg size {WIDTH},{HEIGHT}\nset output '{}'\nset xlabel '{}'\nset key outside right\n",
        quote(&svg_name),
        quote(x_name)
    );
    let plots: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!("'{}' index {i} using 1:2 with lines title '{}'", quote(&dat_name), quote(&s.label))
        })
        .collect();
    gp.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    fs::write(&gp_path, gp).map_err(|e| Fail::Config(format!("{}: {e}", gp_path.display())))?;
    Ok(())
}
