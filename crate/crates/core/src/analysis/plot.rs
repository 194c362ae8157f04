//! SVG point-and-interval plots of a [`SummaryTable`].
//!
//! The first factor runs along the x axis, the second (if any) picks the
//! series, and any further factors split the figure into side-by-side panels.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::{Factor, GroupSummary, SummaryTable};
use crate::error::{Error, Result};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"];
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOutput {
    pub svg: PathBuf,
    /// Companion data table in summary CSV format.
    pub csv: PathBuf,
    /// Factor combinations with no rows; omitted from the figure.
    pub warnings: Vec<String>,
}

/// A standard figure: its file stem, grouping factors, and whether only
/// recurrent architectures belong in it.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub name: &'static str,
    pub factors: Vec<Factor>,
    pub recurrent_only: bool,
}

/// Accuracy by grammar and architecture, lamination effects, and input-size
/// curves per recurrent architecture.
pub fn figure_analogues() -> Vec<FigureSpec> {
    vec![
        FigureSpec { name: "level_architecture", factors: vec![Factor::Level, Factor::Architecture], recurrent_only: false },
        FigureSpec { name: "level_laminations", factors: vec![Factor::Level, Factor::Laminations], recurrent_only: false },
        FigureSpec {
            name: "architecture_laminations",
            factors: vec![Factor::Architecture, Factor::Laminations],
            recurrent_only: false,
        },
        FigureSpec {
            name: "window_level_architecture",
            factors: vec![Factor::Window, Factor::Level, Factor::Architecture],
            recurrent_only: true,
        },
    ]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn product(levels: &[Vec<String>]) -> Vec<Vec<String>> {
    levels.iter().fold(vec![Vec::new()], |acc, labels| {
        acc.iter()
            .flat_map(|prefix| {
                labels.iter().map(move |l| {
                    let mut next = prefix.clone();
                    next.push(l.clone());
                    next
                })
            })
            .collect()
    })
}

/// Writes `<factors>.svg` and `<factors>.csv` into `out_dir`.
pub fn emit_plots(summary: &SummaryTable, out_dir: &Path) -> Result<PlotOutput> {
    if summary.groups.is_empty() {
        return Err(Error::input("cannot plot an empty summary"));
    }
    let stem: Vec<&str> = summary.factors.iter().map(|f| f.name()).collect();
    let stem = stem.join("_");
    let svg_path = out_dir.join(format!("{stem}.svg"));
    let csv_path = out_dir.join(format!("{stem}.csv"));

    let (svg, warnings) = render_svg(summary);
    fs::write(&svg_path, svg)?;
    summary.write_csv(BufWriter::new(File::create(&csv_path)?))?;
    Ok(PlotOutput { svg: svg_path, csv: csv_path, warnings })
}

fn render_svg(summary: &SummaryTable) -> (String, Vec<String>) {
    let nf = summary.factors.len();
    let labels: Vec<Vec<String>> = (0..nf).map(|i| summary.levels_of(i)).collect();
    let xs = &labels[0];
    let series = if nf > 1 { labels[1].clone() } else { vec![String::new()] };
    let panels = if nf > 2 { product(&labels[2..]) } else { vec![Vec::new()] };

    let mut warnings = Vec::new();
    for combo in product(&labels) {
        let refs: Vec<&str> = combo.iter().map(String::as_str).collect();
        if summary.group(&refs).is_none() {
            let parts: Vec<String> = summary.factors.iter().zip(&combo).map(|(f, v)| format!("{f}={v}")).collect();
            warnings.push(format!("no rows for {}", parts.join(", ")));
        }
    }

    let lows = summary.groups.iter().map(|g| g.percent_lower);
    let y_min = (lows.fold(100.0_f64, f64::min) / 10.0).floor() * 10.0;
    let y_min = if y_min >= 100.0 { 90.0 } else { y_min.max(0.0) };
    let y_max = 100.0;

    let slot = (18.0 * series.len() as f64).max(50.0);
    let plot_w = slot * xs.len() as f64;
    let panel_w = MARGIN_LEFT + plot_w + 20.0;
    let width = panel_w * panels.len() as f64;
    let height = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
    let y_of = |v: f64| MARGIN_TOP + PANEL_HEIGHT * (y_max - v) / (y_max - y_min);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    if nf > 1 {
        for (si, name) in series.iter().enumerate() {
            let x = MARGIN_LEFT + 110.0 * si as f64;
            let color = PALETTE[si % PALETTE.len()];
            let _ = writeln!(s, "<circle cx=\"{:.1}\" cy=\"14\" r=\"4\" fill=\"{color}\"/>", x);
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"18\">{}={}</text>",
                x + 8.0,
                summary.factors[1],
                escape(name)
            );
        }
    }

    for (pi, panel) in panels.iter().enumerate() {
        let x0 = panel_w * pi as f64 + MARGIN_LEFT;
        if !panel.is_empty() {
            let title: Vec<String> =
                summary.factors[2..].iter().zip(panel).map(|(f, v)| format!("{f}={}", escape(v))).collect();
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"40\" font-weight=\"bold\">{}</text>", x0, title.join(" "));
        }
        let _ = writeln!(
            s,
            "<rect x=\"{x0:.1}\" y=\"{MARGIN_TOP:.1}\" width=\"{plot_w:.1}\" height=\"{PANEL_HEIGHT:.1}\" \
             fill=\"none\" stroke=\"black\"/>"
        );
        let mut tick = y_min;
        while tick <= y_max + 1e-9 {
            let y = y_of(tick);
            let _ = writeln!(
                s,
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>",
                x0 - 4.0
            );
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{tick:.0}</text>", x0 - 6.0, y + 4.0);
            tick += if y_max - y_min > 30.0 { 10.0 } else { 2.0 };
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" transform=\"rotate(-90 {:.1} {:.1})\" text-anchor=\"middle\">percent correct</text>",
            x0 - 40.0,
            MARGIN_TOP + PANEL_HEIGHT / 2.0,
            x0 - 40.0,
            MARGIN_TOP + PANEL_HEIGHT / 2.0
        );
        for (xi, xl) in xs.iter().enumerate() {
            let cx = x0 + slot * (xi as f64 + 0.5);
            let _ = writeln!(
                s,
                "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
                MARGIN_TOP + PANEL_HEIGHT + 16.0,
                escape(xl)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            x0 + plot_w / 2.0,
            MARGIN_TOP + PANEL_HEIGHT + 36.0,
            summary.factors[0]
        );

        for (si, sl) in series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let offset = (si as f64 - (series.len() - 1) as f64 / 2.0) * (slot * 0.7 / series.len() as f64);
            let mut points = Vec::new();
            for (xi, xl) in xs.iter().enumerate() {
                let mut key: Vec<&str> = vec![xl.as_str()];
                if nf > 1 {
                    key.push(sl.as_str());
                }
                key.extend(panel.iter().map(String::as_str));
                if let Some(g) = summary.group(&key) {
                    points.push((x0 + slot * (xi as f64 + 0.5) + offset, g));
                }
            }
            if points.len() > 1 && summary.factors[0] == Factor::Window {
                let path: Vec<String> =
                    points.iter().map(|(x, g)| format!("{x:.1},{:.1}", y_of(g.mean_percent))).collect();
                let _ = writeln!(
                    s,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-opacity=\"0.5\"/>",
                    path.join(" ")
                );
            }
            for (x, g) in points {
                point(&mut s, x, g, color, &y_of);
            }
        }
    }
    s.push_str("</svg>\n");
    (s, warnings)
}

fn point(s: &mut String, x: f64, g: &GroupSummary, color: &str, y_of: &dyn Fn(f64) -> f64) {
    let (ylo, yhi, ym) = (y_of(g.percent_lower), y_of(g.percent_upper), y_of(g.mean_percent));
    let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{ylo:.1}\" x2=\"{x:.1}\" y2=\"{yhi:.1}\" stroke=\"{color}\"/>");
    for y in [ylo, yhi] {
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{color}\"/>",
            x - 3.0,
            x + 3.0
        );
    }
    let _ = writeln!(
        s,
        "<circle cx=\"{x:.1}\" cy=\"{ym:.1}\" r=\"3.5\" fill=\"{color}\"><title>{} n={} mean={:.2} [{:.2}, {:.2}]</title></circle>",
        escape(&g.values.join(" ")),
        g.count,
        g.mean_percent,
        g.percent_lower,
        g.percent_upper
    );
}
