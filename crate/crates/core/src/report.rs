//! Static SVG line charts of metric columns.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::{RoundMetrics, METRICS_COLUMNS};

pub const DEFAULT_COLUMNS: [&str; 3] =
    ["server_val_acc", "server_test_acc", "avg_device_train_acc"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

pub fn column_value(m: &RoundMetrics, column: &str) -> Option<f64> {
    Some(match column {
        "round" => m.round as f64,
        "trainings" => m.trainings as f64,
        "comm_events" => m.comm_events as f64,
        "clusters" => m.clusters as f64,
        "avg_device_train_acc" => m.avg_device_train_acc,
        "avg_device_test_acc" => m.avg_device_test_acc,
        "server_val_loss" => m.server_val_loss,
        "server_val_acc" => m.server_val_acc,
        "server_test_loss" => m.server_test_loss,
        "server_test_acc" => m.server_test_acc,
        "modeled_t_comm" => m.modeled_t_comm,
        "modeled_t_train" => m.modeled_t_train,
        "modeled_t_total" => m.modeled_t_total,
        _ => return None,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One polyline per column against the round number. Output depends only
/// on the inputs.
pub fn render_svg(metrics: &[RoundMetrics], columns: &[&str], title: &str) -> Result<String> {
    if metrics.is_empty() {
        return Err(Error::contract("no rows to plot"));
    }
    if columns.is_empty() {
        return Err(Error::config("columns", "name at least one column"));
    }
    let mut series = Vec::with_capacity(columns.len());
    for &c in columns {
        if c == "round" || column_value(&metrics[0], c).is_none() {
            return Err(Error::config(
                "columns",
                format!(
                    "unknown column `{c}`; choose from {:?}",
                    &METRICS_COLUMNS[1..]
                ),
            ));
        }
        let ys: Vec<f64> = metrics
            .iter()
            .map(|m| column_value(m, c).unwrap_or(f64::NAN))
            .collect();
        series.push((c, ys));
    }

    let xs: Vec<f64> = metrics.iter().map(|m| m.round as f64).collect();
    let (x_lo, x_hi) = bounds(&xs);
    let all_y: Vec<f64> = series
        .iter()
        .flat_map(|(_, ys)| ys.iter().copied())
        .collect();
    let (y_lo, y_hi) = bounds(&all_y);
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    );
    for (label, x, y, anchor) in [
        (format!("{x_lo:.0}"), x0, y0 + 16.0, "middle"),
        (format!("{x_hi:.0}"), x1, y0 + 16.0, "middle"),
        (format!("{y_lo:.3}"), x0 - 4.0, y0, "end"),
        (format!("{y_hi:.3}"), x0 - 4.0, y1 + 4.0, "end"),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{label}</text>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">round</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );

    for (i, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#,
            WIDTH - MARGIN - 150.0,
            ly - 9.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            WIDTH - MARGIN - 135.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Finite min and max, widened when degenerate.
fn bounds(v: &[f64]) -> (f64, f64) {
    let finite = v.iter().copied().filter(|x| x.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
