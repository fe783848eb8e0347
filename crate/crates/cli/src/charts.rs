//! Deterministic SVG renderers for the report data files.
//!
//! Layout is a pure function of the input data: no timestamps, no
//! randomness, fixed canvas geometry. Rerunning on identical report files
//! produces byte-identical images.

use std::path::Path;

use mcp_risk_core::surfaces::ThreatSurface;
use mcp_risk_core::tables;

use crate::errors::{CliError, CliResult};
use crate::pipeline::write_all;
use crate::report;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_BOTTOM: f64 = 90.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_RIGHT: f64 = 30.0;

/// Renders the five chart files from a report directory.
pub fn render_charts(report_dir: &Path, out_dir: &Path) -> CliResult<()> {
    let read = |name: &str| -> CliResult<String> {
        let path = report_dir.join(name);
        std::fs::read_to_string(&path)
            .map_err(|_| CliError::config(format!("missing report file {}", path.display())))
    };

    let cwe_rows = report::parse_cwe_frequency(&read("cwe_frequency.csv")?)?;
    let scatter_rows = report::parse_scatter(&read("repo_scatter.csv")?)?;
    let share_rows =
        tables::parse_shares_table(&read("surface_shares.csv")?).map_err(CliError::parse)?;
    let band_rows = report::parse_bands(&read("band_distribution.csv")?)?;
    let grid =
        tables::parse_cooccurrence_grid(&read("cooccurrence_matrix.csv")?).map_err(CliError::parse)?;

    let files = vec![
        (out_dir.join("cwe_frequency.svg"), cwe_frequency_chart(&cwe_rows)),
        (out_dir.join("repo_scatter.svg"), scatter_chart(&scatter_rows)),
        (out_dir.join("surface_shares.svg"), shares_chart(&share_rows)),
        (out_dir.join("band_distribution.svg"), band_chart(&band_rows)),
        (out_dir.join("cooccurrence_heatmap.svg"), heat_grid_chart(&grid)),
    ];
    write_all(files)
}

fn svg_open(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        cx = WIDTH / 2.0,
        title = title
    )
}

/// Blue-to-red ramp over a 0-100 value.
fn risk_color(value: f64) -> String {
    let t = (value / 100.0).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(49.0, 222.0), lerp(130.0, 45.0), lerp(189.0, 38.0))
}

/// Percentage formatted to one decimal with a trailing ".0" trimmed.
fn fmt_pct(value: f64) -> String {
    let rounded = format!("{value:.1}");
    rounded.strip_suffix(".0").map(str::to_string).unwrap_or(rounded)
}

fn cwe_frequency_chart(rows: &[report::CweFrequencyRow]) -> String {
    let mut svg = svg_open("Observed CWE classes by finding frequency");
    if rows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_freq = rows.iter().map(|r| r.frequency).max().unwrap_or(1).max(1);
    let band = plot_w / rows.len() as f64;
    let bar_w = (band * 0.8).min(60.0);

    for (i, row) in rows.iter().enumerate() {
        let h = plot_h * f64::from(row.frequency) / f64::from(max_freq);
        let x = MARGIN_LEFT + band * i as f64 + (band - bar_w) / 2.0;
        let y = MARGIN_TOP + plot_h - h;
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" \
             fill=\"{color}\" data-cwe=\"{cwe}\"/>\n",
            color = risk_color(row.risk_index),
            cwe = row.cwe_id,
        ));
        svg.push_str(&format!(
            "<text x=\"{tx:.2}\" y=\"{ty:.2}\" text-anchor=\"end\" font-size=\"10\" \
             transform=\"rotate(-60 {tx:.2} {ty:.2})\">CWE-{cwe}</text>\n",
            tx = x + bar_w / 2.0,
            ty = MARGIN_TOP + plot_h + 14.0,
            cwe = row.cwe_id,
        ));
        svg.push_str(&format!(
            "<text x=\"{vx:.2}\" y=\"{vy:.2}\" text-anchor=\"middle\" font-size=\"10\">{f}</text>\n",
            vx = x + bar_w / 2.0,
            vy = y - 4.0,
            f = row.frequency,
        ));
    }
    svg.push_str(&axis_lines());
    svg.push_str("</svg>\n");
    svg
}

fn scatter_chart(rows: &[report::ScatterRow]) -> String {
    let mut svg = svg_open("Repository severity versus finding volume");
    if rows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_n = rows.iter().map(|r| r.n_findings).max().unwrap_or(1).max(1);
    let max_rms = rows.iter().map(|r| r.rms).fold(1.0f64, f64::max);

    for row in rows {
        let x = MARGIN_LEFT + plot_w * f64::from(row.n_findings) / f64::from(max_n);
        let y = MARGIN_TOP + plot_h - plot_h * row.rms / max_rms;
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\" fill=\"{color}\" \
             data-repo=\"{repo}\"><title>{repo}: n={n}, rms={rms:.1}</title></circle>\n",
            color = risk_color(row.normalized),
            repo = row.repo_id,
            n = row.n_findings,
            rms = row.rms,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\">total findings</text>\n",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 20.0,
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 18 {y:.2})\">RMS severity</text>\n",
        y = MARGIN_TOP + plot_h / 2.0,
    ));
    svg.push_str(&axis_lines());
    svg.push_str("</svg>\n");
    svg
}

fn shares_chart(rows: &[(ThreatSurface, f64, f64)]) -> String {
    let mut svg = svg_open("Share of findings and exposure per threat surface");
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let band = plot_w / rows.len().max(1) as f64;
    let bar_w = (band * 0.35).min(50.0);

    for (i, (surface, finding, exposure)) in rows.iter().enumerate() {
        let x0 = MARGIN_LEFT + band * i as f64 + band / 2.0;
        for (offset, value, color, series) in [
            (-bar_w, *finding, "#5b8fc9", "findings"),
            (0.0, *exposure, "#d1766b", "exposure"),
        ] {
            let h = plot_h * value / 100.0;
            let y = MARGIN_TOP + plot_h - h;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" \
                 fill=\"{color}\" data-surface=\"{surface}\" data-series=\"{series}\"/>\n",
                x = x0 + offset,
                surface = surface.label(),
            ));
            svg.push_str(&format!(
                "<text x=\"{vx:.2}\" y=\"{vy:.2}\" text-anchor=\"middle\" font-size=\"10\">{v}%</text>\n",
                vx = x0 + offset + bar_w / 2.0,
                vy = y - 4.0,
                v = fmt_pct(value),
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\">{label}</text>\n",
            x = x0,
            y = MARGIN_TOP + plot_h + 20.0,
            label = surface.label(),
        ));
    }
    svg.push_str(
        "<rect x=\"700\" y=\"40\" width=\"12\" height=\"12\" fill=\"#5b8fc9\"/>\
         <text x=\"718\" y=\"50\" font-size=\"11\">findings</text>\
         <rect x=\"700\" y=\"58\" width=\"12\" height=\"12\" fill=\"#d1766b\"/>\
         <text x=\"718\" y=\"68\" font-size=\"11\">exposure</text>\n",
    );
    svg.push_str(&axis_lines());
    svg.push_str("</svg>\n");
    svg
}

fn band_chart(rows: &[(String, u32)]) -> String {
    let mut svg = svg_open("Repositories per risk band");
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_count = rows.iter().map(|(_, c)| *c).max().unwrap_or(1).max(1);
    let band = plot_w / rows.len().max(1) as f64;
    let bar_w = (band * 0.6).min(90.0);

    for (i, (label, count)) in rows.iter().enumerate() {
        let h = plot_h * f64::from(*count) / f64::from(max_count);
        let x = MARGIN_LEFT + band * i as f64 + (band - bar_w) / 2.0;
        let y = MARGIN_TOP + plot_h - h;
        let color = match label.as_str() {
            "VeryLow" => "#74add1",
            "Low" => "#abd9e9",
            "Medium" => "#fdae61",
            "High" => "#f46d43",
            _ => "#d73027",
        };
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" \
             fill=\"{color}\" data-band=\"{label}\"/>\n",
        ));
        svg.push_str(&format!(
            "<text x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" font-size=\"11\">{count}</text>\n",
            cx = x + bar_w / 2.0,
            cy = y - 5.0,
        ));
        svg.push_str(&format!(
            "<text x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" font-size=\"12\">{label}</text>\n",
            cx = x + bar_w / 2.0,
            cy = MARGIN_TOP + plot_h + 20.0,
        ));
    }
    svg.push_str(&axis_lines());
    svg.push_str("</svg>\n");
    svg
}

/// 4x4 annotated heat grid; each cell carries `data-from`/`data-to`
/// attributes and its percentage as text, or an em-dash when undefined.
fn heat_grid_chart(cells: &[[Option<f64>; 4]; 4]) -> String {
    let mut svg = svg_open("Conditional co-occurrence of threat surfaces");
    let cell = 90.0;
    let x0 = 220.0;
    let y0 = 90.0;

    for (j, to) in ThreatSurface::NAMED.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\">{label}</text>\n",
            x = x0 + cell * j as f64 + cell / 2.0,
            y = y0 - 12.0,
            label = to.label(),
        ));
    }
    for (i, from) in ThreatSurface::NAMED.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"12\">{label}</text>\n",
            x = x0 - 12.0,
            y = y0 + cell * i as f64 + cell / 2.0 + 4.0,
            label = from.label(),
        ));
        for (j, to) in ThreatSurface::NAMED.iter().enumerate() {
            let x = x0 + cell * j as f64;
            let y = y0 + cell * i as f64;
            match cells[i][j] {
                Some(value) => {
                    svg.push_str(&format!(
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell}\" height=\"{cell}\" \
                         fill=\"{color}\" stroke=\"white\"/>\n",
                        color = risk_color(value),
                    ));
                    svg.push_str(&format!(
                        "<text x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" font-size=\"16\" \
                         fill=\"white\" data-from=\"{from}\" data-to=\"{to}\">{text}</text>\n",
                        cx = x + cell / 2.0,
                        cy = y + cell / 2.0 + 5.0,
                        from = from.label(),
                        to = to.label(),
                        text = fmt_pct(value),
                    ));
                }
                None => {
                    svg.push_str(&format!(
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell}\" height=\"{cell}\" \
                         fill=\"#eeeeee\" stroke=\"white\"/>\n",
                    ));
                    svg.push_str(&format!(
                        "<text x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" font-size=\"16\" \
                         fill=\"#999999\" data-from=\"{from}\" data-to=\"{to}\">&#8212;</text>\n",
                        cx = x + cell / 2.0,
                        cy = y + cell / 2.0 + 5.0,
                        from = from.label(),
                        to = to.label(),
                    ));
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn axis_lines() -> String {
    format!(
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"#333333\"/>\n\
         <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#333333\"/>\n",
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
        r = WIDTH - MARGIN_RIGHT,
    )
}
