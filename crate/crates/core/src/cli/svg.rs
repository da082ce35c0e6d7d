//! Minimal standalone SVG line charts: one polyline per series, linear axes
//! with tick labels, and a legend. No external plotting dependency.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub struct SvgSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Write a line chart of the given series. Needs at least one series.
pub fn emit_svg(series: &[SvgSeries], path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("no series to plot".into()));
    }
    let (x0, x1) = extent(series.iter().flat_map(|s| s.times.iter().copied()));
    let (y0, y1) = extent(series.iter().flat_map(|s| s.values.iter().copied()));
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // axes
    out.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B,
    ));

    // ticks
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xp = sx(xv);
        let yp = sy(yv);
        out.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{b:.2}\" x2=\"{xp:.2}\" y2=\"{b2:.2}\" stroke=\"black\"/>\n\
             <text x=\"{xp:.2}\" y=\"{bl:.2}\" text-anchor=\"middle\">{xv}</text>\n",
            b = HEIGHT - MARGIN_B,
            b2 = HEIGHT - MARGIN_B + 6.0,
            bl = HEIGHT - MARGIN_B + 22.0,
            xv = format_tick(xv),
        ));
        out.push_str(&format!(
            "<line x1=\"{l2:.2}\" y1=\"{yp:.2}\" x2=\"{l:.2}\" y2=\"{yp:.2}\" stroke=\"black\"/>\n\
             <text x=\"{ll:.2}\" y=\"{yt:.2}\" text-anchor=\"end\">{yv}</text>\n",
            l = MARGIN_L,
            l2 = MARGIN_L - 6.0,
            ll = MARGIN_L - 10.0,
            yt = yp + 4.0,
            yv = format_tick(yv),
        ));
    }

    // series
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = s
            .times
            .iter()
            .zip(&s.values)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }

    // legend, top right
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_T + 16.0 + idx as f64 * 18.0;
        let x = WIDTH - MARGIN_R - 150.0;
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{ym:.2}\" x2=\"{x2:.2}\" y2=\"{ym:.2}\" \
             stroke=\"{color}\" stroke-width=\"2.5\"/>\n\
             <text x=\"{xt:.2}\" y=\"{yt:.2}\">{label}</text>\n",
            ym = y - 4.0,
            x2 = x + 24.0,
            xt = x + 30.0,
            yt = y,
            label = escape(&s.label),
        ));
    }

    out.push_str("</svg>\n");

    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.4}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}
