//! Minimal SVG rendering of traces. The CSV is the contract; these plots
//! are a convenience for eyeballing runs, so the renderer is a small
//! hand-rolled polyline plotter rather than a charting dependency.

use crate::neuron::{Block, Trace};

const W: f64 = 900.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 55.0;

struct Panel<'a> {
    title: &'a str,
    series: Vec<(&'a str, &'a str, Vec<(f64, f64)>)>,
}

fn polyline(points: &[(f64, f64)], x_rng: (f64, f64), y_rng: (f64, f64), y_off: f64) -> String {
    let (x0, x1) = x_rng;
    let (y0, y1) = y_rng;
    let sx = (W - 2.0 * MARGIN) / (x1 - x0).max(f64::MIN_POSITIVE);
    let sy = (PANEL_H - 2.0 * MARGIN) / (y1 - y0).max(f64::MIN_POSITIVE);
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            format!(
                "{:.1},{:.1}",
                MARGIN + (x - x0) * sx,
                y_off + PANEL_H - MARGIN - (y - y0) * sy
            )
        })
        .collect();
    pts.join(" ")
}

fn render_panel(p: &Panel<'_>, index: usize, t_end: f64) -> String {
    let y_off = index as f64 * PANEL_H;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, _, pts) in &p.series {
        for &(_, y) in pts {
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if !lo.is_finite() || lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let mut out = format!(
        "<text x=\"{}\" y=\"{:.1}\" font-size=\"14\" font-family=\"sans-serif\">{}</text>\n",
        MARGIN,
        y_off + 22.0,
        p.title
    );
    out += &format!(
        "<rect x=\"{m}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#999\"/>\n",
        y_off + MARGIN,
        W - 2.0 * MARGIN,
        PANEL_H - 2.0 * MARGIN,
        m = MARGIN
    );
    out += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">{:.3e}</text>\n",
        MARGIN - 4.0,
        y_off + MARGIN + 10.0,
        hi
    );
    out += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">{:.3e}</text>\n",
        MARGIN - 4.0,
        y_off + PANEL_H - MARGIN,
        lo
    );
    for (label, color, pts) in &p.series {
        if pts.is_empty() {
            continue;
        }
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
            polyline(pts, (0.0, t_end), (lo, hi), y_off)
        );
        let _ = label;
    }
    let legend: Vec<String> = p
        .series
        .iter()
        .map(|(label, color, _)| format!("<tspan fill=\"{color}\">{label}</tspan>"))
        .collect();
    out += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
        W - MARGIN - 220.0,
        y_off + 22.0,
        legend.join("  ")
    );
    out
}

/// Render current and temperature panels of a trace as an SVG document.
pub fn render_trace_svg(trace: &Trace) -> String {
    let pick = |block: Block, f: &dyn Fn(&crate::neuron::TraceSample) -> f64| -> Vec<(f64, f64)> {
        trace
            .samples
            .iter()
            .filter(|s| s.block == block)
            .map(|s| (s.time, f(s)))
            .collect()
    };
    let current = Panel {
        title: "branch current [A]",
        series: vec![
            ("integration", "#1f77b4", pick(Block::Integration, &|s| s.current)),
            ("refractory", "#d62728", pick(Block::Refractory, &|s| s.current)),
        ],
    };
    let temperature = Panel {
        title: "device temperature [K]",
        series: vec![
            ("integration", "#1f77b4", pick(Block::Integration, &|s| s.temperature)),
            ("refractory", "#d62728", pick(Block::Refractory, &|s| s.temperature)),
        ],
    };
    let mut body = String::new();
    for (i, p) in [&current, &temperature].into_iter().enumerate() {
        body += &render_panel(p, i, trace.t_end);
    }
    // Spike markers on the current panel.
    for e in &trace.events {
        let x = MARGIN + e.time / trace.t_end * (W - 2.0 * MARGIN);
        body += &format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#2ca02c\" stroke-dasharray=\"2,3\"/>\n",
            MARGIN,
            PANEL_H - MARGIN
        );
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{}\" viewBox=\"0 0 {W} {}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
        2.0 * PANEL_H,
        2.0 * PANEL_H
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::{simulate, NeuronConfig};
    use crate::stimulus::Waveform;

    #[test]
    fn svg_is_well_formed_enough() {
        let cfg = NeuronConfig::regular_spiking();
        let w = Waveform::constant(-1.6, 5e-6);
        let tr = simulate(&cfg, &w, 5e-6, Some(100e-9)).unwrap();
        let svg = render_trace_svg(&tr);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("temperature"));
    }

    #[test]
    fn empty_trace_renders() {
        let tr = Trace {
            t_end: 1e-6,
            ..Default::default()
        };
        let svg = render_trace_svg(&tr);
        assert!(svg.starts_with("<svg"));
    }
}
