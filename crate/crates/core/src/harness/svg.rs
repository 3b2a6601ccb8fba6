// Minimal SVG line chart of mean ρ̄ against coupling norm.

use std::fmt::Write as _;

use crate::harness::experiments::SweepResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

// log10(1 + x) keeps the zero-coupling point on the axis
fn symlog(x: f64) -> f64 {
    x.max(0.0).ln_1p() / std::f64::consts::LN_10
}

/// Renders one polyline per network size, x on a `log10(1 + ‖C‖)` scale and
/// y fixed to `[0, 1]`.
pub fn sweep_svg(sweep: &SweepResult) -> String {
    let mut sizes: Vec<usize> = sweep.rows.iter().map(|r| r.n).collect();
    sizes.dedup();
    let x_max = sweep
        .rows
        .iter()
        .map(|r| symlog(r.coupling_norm))
        .fold(1.0, f64::max)
        .ceil();
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + plot_w * symlog(x) / x_max;
    let py = |y: f64| TOP + plot_h * (1.0 - y.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (LEFT, TOP + plot_h, LEFT + plot_w, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );

    for decade in 0..=(x_max as i32) {
        let value = if decade == 0 { 0.0 } else { 10f64.powi(decade) };
        let x = if decade == 0 { LEFT } else { px(value) };
        let label = if decade == 0 {
            "0".to_string()
        } else {
            format!("1e{decade}")
        };
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            y0 + 5.0,
            y0 + 18.0
        );
    }
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">coupling norm ||C|| (log10(1+x) scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean rho bar</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, &n) in sizes.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = sweep
            .curve(n)
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.coupling_norm), py(r.mean_rho_bar)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-n="{n}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let ly = TOP + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">N = {n}</text>"#,
            x1 + 12.0,
            x1 + 32.0,
            x1 + 38.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
