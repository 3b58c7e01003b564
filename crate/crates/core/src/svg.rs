// Minimal line chart: axes, one polyline of estimates, dashed reference line.

use crate::types::ConvergenceTrace;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

pub(crate) fn line_chart(trace: &ConvergenceTrace, title: &str) -> String {
    let points: Vec<(f64, f64)> =
        trace.n_values().iter().zip(trace.estimates()).filter_map(|(&n, e)| e.map(|v| (n as f64, v))).collect();
    let n_min = trace.n_values().first().copied().unwrap_or(1).max(1) as f64;
    let n_max = trace.n_values().last().copied().unwrap_or(1).max(1) as f64;
    let log_x = n_max / n_min >= 100.0;
    let tx = |n: f64| if log_x { n.log10() } else { n };
    let (x_lo, x_hi) = (tx(n_min), tx(n_max).max(tx(n_min) + 1e-9));

    let mut y_lo = points.iter().map(|p| p.1).chain(trace.reference()).fold(f64::INFINITY, f64::min);
    let mut y_hi = points.iter().map(|p| p.1).chain(trace.reference()).fold(f64::NEG_INFINITY, f64::max);
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    let pad = ((y_hi - y_lo) * 0.1).max(1e-3);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

    let px = |n: f64| MARGIN + (tx(n) - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    s.push_str(&format!(
        "<polyline points=\"{x0:.1},{y1:.1} {x0:.1},{y0:.1} {x1:.1},{y0:.1}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{text}</text>\n"
        )
    };
    s.push_str(&label(x0, y0 + 16.0, "start", format!("{n_min}")));
    s.push_str(&label(x1, y0 + 16.0, "end", format!("{n_max}")));
    s.push_str(&label(WIDTH / 2.0, HEIGHT - 12.0, "middle", if log_x { "n (log scale)".into() } else { "n".into() }));
    s.push_str(&label(x0 - 6.0, y0, "end", format!("{y_lo:.3}")));
    s.push_str(&label(x0 - 6.0, y1 + 4.0, "end", format!("{y_hi:.3}")));
    s.push_str(&label(16.0, HEIGHT / 2.0, "middle", "bits".into()));
    if let Some(r) = trace.reference() {
        let y = py(r);
        s.push_str(&format!(
            "<line x1=\"{x0:.1}\" y1=\"{y:.2}\" x2=\"{x1:.1}\" y2=\"{y:.2}\" stroke=\"firebrick\" stroke-dasharray=\"6,4\"/>\n"
        ));
        s.push_str(&label(x1, y - 6.0, "end", format!("reference {r:.4}")));
    }
    if !points.is_empty() {
        let coords: Vec<String> = points.iter().map(|&(n, v)| format!("{:.2},{:.2}", px(n), py(v))).collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
