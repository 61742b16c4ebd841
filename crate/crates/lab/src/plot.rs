//! Standalone SVG line charts, generated in-binary with no plotting
//! dependency. Output bytes are a pure function of the inputs.

use crate::error::{LabError, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct PlotSpec {
    pub x_col: String,
    pub y_cols: Vec<String>,
    pub log_y: bool,
    pub title: String,
}

/// Parse a `--columns` argument of the form `x:y1,y2,...`.
pub fn parse_columns(arg: &str) -> Result<(String, Vec<String>)> {
    let (x, ys) = arg.split_once(':').ok_or_else(|| {
        LabError::Validation(format!("--columns must look like `t:col1,col2`, got `{arg}`"))
    })?;
    let y_cols: Vec<String> = ys
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if x.trim().is_empty() || y_cols.is_empty() {
        return Err(LabError::Validation(format!(
            "--columns must name an x column and at least one y column, got `{arg}`"
        )));
    }
    Ok((x.trim().to_string(), y_cols))
}

pub struct SeriesTable {
    pub label: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesTable {
    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| {
                LabError::Validation(format!(
                    "column `{name}` not present in {} (available: {})",
                    self.label,
                    self.headers.join(", ")
                ))
            })?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

struct Line {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + 1e-12 * span {
        ticks.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let lo_exp = lo.log10().floor() as i32;
    let hi_exp = hi.log10().ceil() as i32;
    let mut ticks = Vec::new();
    let mut stride = 1;
    let span = (hi_exp - lo_exp).max(1);
    if span > 8 {
        stride = (span as usize).div_ceil(8) as i32;
    }
    let mut e = lo_exp;
    while e <= hi_exp {
        ticks.push(10f64.powi(e));
        e += stride;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        // trim trailing zeros of a fixed representation
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the chart. Points with non-positive y are dropped under log scaling
/// (the polyline breaks there).
pub fn render_svg(tables: &[SeriesTable], spec: &PlotSpec) -> Result<String> {
    let mut lines = Vec::new();
    let multi = tables.len() > 1;
    for (ti, table) in tables.iter().enumerate() {
        let xs = table.column(&spec.x_col)?;
        for (ci, ycol) in spec.y_cols.iter().enumerate() {
            let ys = table.column(ycol)?;
            let label = if multi {
                format!("{}:{}", table.label, ycol)
            } else {
                ycol.clone()
            };
            let color = PALETTE[(ti * spec.y_cols.len() + ci) % PALETTE.len()];
            lines.push(Line {
                label,
                color,
                points: xs.iter().cloned().zip(ys.iter().cloned()).collect(),
            });
        }
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for line in &lines {
        for &(x, y) in &line.points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            if spec.log_y && y <= 0.0 {
                continue;
            }
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() || !y_min.is_finite() {
        return Err(LabError::Validation(
            "no plottable points (log scaling drops non-positive values)".into(),
        ));
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + y_min.abs().max(1.0) * 0.1;
        if spec.log_y {
            y_max = y_min * 10.0;
        }
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_of = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let y_of = |y: f64| {
        let f = if spec.log_y {
            (y.ln() - y_min.ln()) / (y_max.ln() - y_min.ln())
        } else {
            (y - y_min) / (y_max - y_min)
        };
        HEIGHT - MARGIN_B - f * plot_h
    };

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13px\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    if !spec.title.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15px\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            xml_escape(&spec.title)
        ));
    }

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L:.1}\" y=\"{MARGIN_T:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
    ));

    for t in nice_ticks(x_min, x_max) {
        let x = x_of(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 20.0,
            fmt_tick(t)
        ));
    }
    let y_ticks = if spec.log_y { log_ticks(y_min, y_max) } else { nice_ticks(y_min, y_max) };
    for t in y_ticks {
        if spec.log_y && (t < y_min / 1.0001 || t > y_max * 1.0001) {
            continue;
        }
        let y = y_of(t);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n",
            MARGIN_L,
            MARGIN_L + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0,
            fmt_tick(t)
        ));
    }

    // axis labels from the column names
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        xml_escape(&spec.x_col)
    ));
    let y_label = spec.y_cols.join(", ");
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(&y_label)
    ));

    for line in &lines {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &line.points {
            let drop = !x.is_finite() || !y.is_finite() || (spec.log_y && y <= 0.0);
            if drop {
                pen_down = false;
                continue;
            }
            d.push_str(if pen_down { "L" } else { "M" });
            d.push_str(&format!("{:.2} {:.2} ", x_of(x), y_of(y)));
            pen_down = true;
        }
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"/>\n",
            d.trim_end(),
            line.color
        ));
    }

    // legend
    for (i, line) in lines.iter().enumerate() {
        let y = MARGIN_T + 16.0 + 18.0 * i as f64;
        let x = MARGIN_L + plot_w - 180.0;
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            y - 4.0,
            x + 22.0,
            y - 4.0,
            line.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\">{}</text>\n",
            x + 28.0,
            xml_escape(&line.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
