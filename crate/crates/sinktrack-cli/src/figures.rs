//! Static SVG summaries of result tables: per-group boxplots of the
//! performance index and mean-index line plots.
//!
//! Boxes follow the usual convention: the box spans the lower and upper
//! quartiles (linear interpolation between order statistics), the median is
//! drawn as an orange line, whiskers reach the most extreme data inside
//! 1.5 IQR of the box, and anything beyond is drawn as an outlier circle.
//! All coordinates are formatted with fixed precision, so a given input
//! always produces byte-identical SVG.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::{CliError, Result, ResultRow};
use crate::report::format_sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    Boxplot,
    Lineplot,
}

impl FigureKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boxplot" => Some(FigureKind::Boxplot),
            "lineplot" => Some(FigureKind::Lineplot),
            _ => None,
        }
    }
}

/// A grouping cell: numeric columns sort numerically, text columns lexically.
#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn label(&self) -> String {
        match self {
            Cell::Num(x) => format_sig6(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn cell_cmp(a: &Cell, b: &Cell) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (Cell::Num(x), Cell::Num(y)) => x.partial_cmp(y).unwrap_or(Ordering::Equal),
        (Cell::Text(x), Cell::Text(y)) => x.cmp(y),
        (Cell::Num(_), Cell::Text(_)) => Ordering::Less,
        (Cell::Text(_), Cell::Num(_)) => Ordering::Greater,
    }
}

fn column(row: &ResultRow, key: &str) -> Option<Cell> {
    Some(match key {
        "sim_id" => Cell::Num(row.sim_id as f64),
        "method" => Cell::Text(row.method.name().to_string()),
        "n" => Cell::Num(row.n as f64),
        "m" => Cell::Num(row.m),
        "sigma2" => Cell::Num(row.sigma2),
        "lambda" => Cell::Num(row.lambda),
        "seed" => Cell::Num(row.seed as f64),
        "performance_index" => Cell::Num(row.performance_index),
        "iterations" => Cell::Num(row.iterations as f64),
        "converged" => Cell::Text(row.converged.to_string()),
        "runtime_ms" => Cell::Num(row.runtime_ms),
        _ => return None,
    })
}

/// Lower quartile, median, upper quartile by linear interpolation between
/// order statistics.
pub fn quartiles(sorted: &[f64]) -> (f64, f64, f64) {
    (
        quantile(sorted, 0.25),
        quantile(sorted, 0.50),
        quantile(sorted, 0.75),
    )
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n >= 1);
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 58.0;

fn method_color(name: &str) -> &'static str {
    match name {
        "speed" => "#1f77b4",
        "accel3d" => "#ff7f0e",
        "accel2d" => "#2ca02c",
        _ => "#7f7f7f",
    }
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new() -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
             width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        Canvas { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"{width:.2}\"/>\n"
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, stroke: &str, fill: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             stroke=\"{stroke}\" fill=\"{fill}\" stroke-width=\"1\"/>\n"
        ));
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, stroke: &str, fill: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" stroke=\"{stroke}\" \
             fill=\"{fill}\" stroke-width=\"1\"/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\" font-size=\"{size:.0}\">{}</text>\n",
            xml_escape(content)
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Index values live in [0, 1]; the y axis is fixed to that range.
fn y_pos(value: f64) -> f64 {
    let plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    MARGIN_TOP + plot_height * (1.0 - value)
}

fn draw_frame(canvas: &mut Canvas, x_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = y_pos(0.0);
    // gridlines and y ticks at 0.0, 0.2, ... 1.0
    for tick in 0..=5 {
        let value = tick as f64 * 0.2;
        let y = y_pos(value);
        canvas.line(x0, y, x1, y, "#dddddd", 0.8);
        canvas.text(x0 - 8.0, y + 4.0, "end", 11.0, &format!("{value:.1}"));
    }
    canvas.line(x0, MARGIN_TOP, x0, y0, "black", 1.0);
    canvas.line(x0, y0, x1, y0, "black", 1.0);
    canvas.text(
        (x0 + x1) / 2.0,
        HEIGHT - 10.0,
        "middle",
        12.0,
        x_label,
    );
    // y-axis label, rotated
    canvas.body.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" transform=\"rotate(-90 16 {:.2})\">performance index</text>\n",
        (MARGIN_TOP + y_pos(0.0)) / 2.0,
        (MARGIN_TOP + y_pos(0.0)) / 2.0,
    ));
}

fn grouped(
    rows: &[ResultRow],
    keys: &[String],
) -> Result<Vec<(Vec<Cell>, Vec<f64>)>> {
    for key in keys {
        if column(&rows[0], key).is_none() {
            return Err(CliError::Usage(format!("unknown group key `{key}`")));
        }
    }
    let mut groups: Vec<(Vec<Cell>, Vec<f64>)> = Vec::new();
    for row in rows {
        let cells: Vec<Cell> = keys.iter().map(|k| column(row, k).unwrap()).collect();
        match groups.iter_mut().find(|(g, _)| *g == cells) {
            Some((_, values)) => values.push(row.performance_index),
            None => groups.push((cells, vec![row.performance_index])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| cell_cmp(x, y))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(groups)
}

pub fn svg_figure(rows: &[ResultRow], kind: FigureKind, group_keys: &[String]) -> Result<String> {
    if rows.is_empty() {
        return Err(CliError::Usage("no rows to plot".into()));
    }
    if group_keys.is_empty() {
        return Err(CliError::Usage("at least one group key is required".into()));
    }
    match kind {
        FigureKind::Boxplot => boxplot(rows, group_keys),
        FigureKind::Lineplot => lineplot(rows, group_keys),
    }
}

fn boxplot(rows: &[ResultRow], group_keys: &[String]) -> Result<String> {
    let groups = grouped(rows, group_keys)?;
    let mut canvas = Canvas::new();
    draw_frame(&mut canvas, &group_keys.join(", "));

    let x0 = MARGIN_LEFT;
    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let slot = plot_width / groups.len() as f64;
    let box_width = (slot * 0.5).min(48.0);

    for (idx, (cells, values)) in groups.iter().enumerate() {
        let center = x0 + slot * (idx as f64 + 0.5);
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (q1, median, q3) = quartiles(&sorted);
        let iqr = q3 - q1;
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let whisker_lo = sorted
            .iter()
            .copied()
            .find(|&x| x >= lo_fence)
            .unwrap_or(q1);
        let whisker_hi = sorted
            .iter()
            .rev()
            .copied()
            .find(|&x| x <= hi_fence)
            .unwrap_or(q3);

        let (bx0, bx1) = (center - box_width / 2.0, center + box_width / 2.0);
        // whiskers with caps
        canvas.line(center, y_pos(whisker_lo), center, y_pos(q1), "black", 1.0);
        canvas.line(center, y_pos(q3), center, y_pos(whisker_hi), "black", 1.0);
        let cap = box_width / 2.5;
        canvas.line(center - cap / 2.0, y_pos(whisker_lo), center + cap / 2.0, y_pos(whisker_lo), "black", 1.0);
        canvas.line(center - cap / 2.0, y_pos(whisker_hi), center + cap / 2.0, y_pos(whisker_hi), "black", 1.0);
        // box and median
        canvas.rect(bx0, y_pos(q3), box_width, (y_pos(q1) - y_pos(q3)).max(0.0), "black", "none");
        canvas.line(bx0, y_pos(median), bx1, y_pos(median), "#ff7f0e", 1.5);
        // outliers
        for &x in sorted.iter().filter(|&&x| x < lo_fence || x > hi_fence) {
            canvas.circle(center, y_pos(x), 3.0, "black", "white");
        }

        let label: Vec<String> = cells.iter().map(Cell::label).collect();
        canvas.text(center, y_pos(0.0) + 16.0, "middle", 10.0, &label.join(","));
    }

    Ok(canvas.finish())
}

fn lineplot(rows: &[ResultRow], group_keys: &[String]) -> Result<String> {
    let x_key = &group_keys[0];
    match column(&rows[0], x_key) {
        None => return Err(CliError::Usage(format!("unknown group key `{x_key}`"))),
        Some(Cell::Text(_)) => {
            return Err(CliError::Usage(format!(
                "lineplot x-axis `{x_key}` must be a numeric column"
            )))
        }
        Some(Cell::Num(_)) => {}
    }

    // mean index per (method, x)
    let mut methods: Vec<&'static str> = Vec::new();
    for row in rows {
        if !methods.contains(&row.method.name()) {
            methods.push(row.method.name());
        }
    }
    methods.sort_unstable();

    let mut xs: Vec<f64> = Vec::new();
    for row in rows {
        let Some(Cell::Num(x)) = column(row, x_key) else { unreachable!() };
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if xs.len() < 2 {
        return Err(CliError::Usage(format!(
            "lineplot needs at least two distinct `{x_key}` values"
        )));
    }

    let mut canvas = Canvas::new();
    draw_frame(&mut canvas, x_key);
    let x0 = MARGIN_LEFT;
    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let (xmin, xmax) = (xs[0], xs[xs.len() - 1]);
    let x_pos = |x: f64| x0 + plot_width * (x - xmin) / (xmax - xmin);

    for &x in &xs {
        canvas.line(x_pos(x), y_pos(0.0), x_pos(x), y_pos(0.0) + 5.0, "black", 1.0);
        canvas.text(x_pos(x), y_pos(0.0) + 18.0, "middle", 10.0, &format_sig6(x));
    }

    for (series_idx, method) in methods.iter().enumerate() {
        let color = method_color(method);
        let mut points = Vec::new();
        for &x in &xs {
            let selected: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.method.name() == *method
                        && matches!(column(r, x_key), Some(Cell::Num(v)) if v == x)
                })
                .map(|r| r.performance_index)
                .collect();
            if !selected.is_empty() {
                let mean = selected.iter().sum::<f64>() / selected.len() as f64;
                points.push((x_pos(x), y_pos(mean)));
            }
        }
        if points.len() >= 2 {
            canvas.polyline(&points, color);
        }
        for &(px, py) in &points {
            canvas.circle(px, py, 3.0, color, color);
        }
        // legend, top right
        let ly = MARGIN_TOP + 14.0 + 16.0 * series_idx as f64;
        let lx = WIDTH - MARGIN_RIGHT - 110.0;
        canvas.line(lx, ly - 4.0, lx + 22.0, ly - 4.0, color, 1.5);
        canvas.text(lx + 28.0, ly, "start", 11.0, method);
    }

    Ok(canvas.finish())
}

pub fn emit_figure(
    rows: &[ResultRow],
    kind: FigureKind,
    group_keys: &[String],
    path: &Path,
) -> Result<()> {
    let svg = svg_figure(rows, kind, group_keys)?;
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(svg.as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sinktrack::Method;

    fn row(method: Method, n: usize, sigma2: f64, pi: f64) -> ResultRow {
        ResultRow {
            sim_id: 1,
            method,
            n,
            m: 0.5,
            sigma2,
            lambda: 100.0,
            seed: 1,
            performance_index: pi,
            iterations: 10,
            converged: true,
            runtime_ms: 0.0,
        }
    }

    #[test]
    fn quartiles_by_linear_interpolation() {
        let values = [0.0, 0.25, 0.5, 0.75, 1.0];
        let (q1, median, q3) = quartiles(&values);
        assert_eq!(q1, 0.25);
        assert_eq!(median, 0.5);
        assert_eq!(q3, 0.75);

        let pair = [1.0, 2.0];
        let (q1, median, q3) = quartiles(&pair);
        assert_eq!(q1, 1.25);
        assert_eq!(median, 1.5);
        assert_eq!(q3, 1.75);
    }

    #[test]
    fn degenerate_box_for_identical_values() {
        let rows: Vec<ResultRow> = (0..5).map(|_| row(Method::Speed, 100, 0.0, 0.7)).collect();
        let svg = svg_figure(&rows, FigureKind::Boxplot, &["method".to_string()]).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("</svg>"));
        // box has zero height
        assert!(svg.contains("height=\"0.00\""));
    }

    #[test]
    fn unknown_group_key_is_rejected() {
        let rows = vec![row(Method::Speed, 100, 0.0, 0.5)];
        assert!(svg_figure(&rows, FigureKind::Boxplot, &["banana".to_string()]).is_err());
        assert!(svg_figure(&rows, FigureKind::Lineplot, &["banana".to_string()]).is_err());
    }

    #[test]
    fn lineplot_draws_one_series_per_method() {
        let mut rows = Vec::new();
        for (s2, pi_speed, pi_accel) in [(0.1, 0.8, 0.9), (0.5, 0.6, 0.7), (1.0, 0.4, 0.45)] {
            for rep in 0..3 {
                let jitter = rep as f64 * 0.01;
                rows.push(row(Method::Speed, 100, s2, pi_speed + jitter));
                rows.push(row(Method::Accel3d, 100, s2, pi_accel + jitter));
            }
        }
        let svg = svg_figure(&rows, FigureKind::Lineplot, &["sigma2".to_string()]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("accel3d"));
        assert!(svg.contains("speed"));
    }

    #[test]
    fn output_is_deterministic() {
        let rows: Vec<ResultRow> = (0..10)
            .map(|i| row(Method::Speed, 100, 0.0, 0.1 * i as f64))
            .collect();
        let a = svg_figure(&rows, FigureKind::Boxplot, &["n".to_string()]).unwrap();
        let b = svg_figure(&rows, FigureKind::Boxplot, &["n".to_string()]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn outliers_are_drawn_as_circles() {
        let mut rows: Vec<ResultRow> = (0..9).map(|_| row(Method::Speed, 100, 0.0, 0.5)).collect();
        rows.push(row(Method::Speed, 100, 0.0, 1.0));
        let svg = svg_figure(&rows, FigureKind::Boxplot, &["method".to_string()]).unwrap();
        assert!(svg.contains("<circle"));
    }
}
