//! Static SVG rendering of a benchmark run: fidelity (red dotted),
//! observed probability (blue solid), and the ideal-driving reference
//! probability (black dashed) over time, y fixed to [0, 1].
//!
//! Output is a standalone SVG 1.1 document, 800x500, and is a pure function
//! of the run record (byte-identical on repeated invocation).

use std::fmt::Write as _;
use std::path::Path;

use crate::csvio::write_atomic;
use crate::experiment::RunOutput;
use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 22.0;
const MARGIN_BOTTOM: f64 = 48.0;
/// Curves are decimated to at most this many points.
const MAX_POINTS: usize = 1600;

struct Frame {
    t0: f64,
    t1: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        let w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (t - self.t0) / (self.t1 - self.t0) * w
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + (1.0 - v) * h
    }
}

fn polyline(frame: &Frame, points: &[(f64, f64)], style: &str) -> String {
    let mut path = String::new();
    for (i, &(t, v)) in points.iter().enumerate() {
        let _ = write!(
            path,
            "{}{:.2},{:.2}",
            if i == 0 { "" } else { " " },
            frame.x(t),
            frame.y(v.clamp(0.0, 1.0))
        );
    }
    format!("<polyline fill=\"none\" {style} points=\"{path}\"/>\n")
}

/// Renders the run to an SVG document. Fails on an empty record.
pub fn render_svg(run: &RunOutput) -> Result<String, CliError> {
    if run.rows.is_empty() {
        return Err(CliError::Validation("cannot plot an empty run".into()));
    }
    let t0 = run.rows.first().unwrap().t;
    let t1 = run.rows.last().unwrap().t;
    let frame = Frame { t0, t1: if t1 > t0 { t1 } else { t0 + 1.0 } };

    let stride = run.rows.len().div_ceil(MAX_POINTS).max(1);
    let mut fidelity = Vec::new();
    let mut prob = Vec::new();
    let mut ideal = Vec::new();
    for (i, row) in run.rows.iter().enumerate() {
        if i % stride == 0 || i == run.rows.len() - 1 {
            fidelity.push((row.t, row.fidelity));
            prob.push((row.t, row.prob_s2_plus));
            ideal.push((row.t, row.prob_ideal));
        }
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<!-- {} perturbation={} -->",
        run.config.echo(),
        run.config.perturbation
    );

    // gridlines and ticks
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = frame.y(v);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            frame.x(t0),
            frame.x(frame.t1),
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"end\" font-family=\"sans-serif\">{v:.1}</text>",
            MARGIN_LEFT - 8.0,
            y + 4.0,
        );
    }
    for i in 0..=5 {
        let t = t0 + (frame.t1 - t0) * i as f64 / 5.0;
        let x = frame.x(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            frame.y(0.0),
            frame.y(1.0),
        );
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{t:.1}</text>",
            frame.y(0.0) + 20.0,
        );
    }
    // axes
    let _ = writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
        frame.x(t0),
        frame.y(1.0),
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\">t</text>",
        frame.x((t0 + frame.t1) / 2.0),
        HEIGHT - 8.0,
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {:.2})\">fidelity / probability</text>",
        frame.y(0.5),
        frame.y(0.5),
    );

    // curves: ideal reference under the measured ones
    out.push_str(&polyline(
        &frame,
        &ideal,
        "stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"9,6\"",
    ));
    out.push_str(&polyline(
        &frame,
        &prob,
        "stroke=\"#1f4fcc\" stroke-width=\"1.5\"",
    ));
    out.push_str(&polyline(
        &frame,
        &fidelity,
        "stroke=\"#cc0000\" stroke-width=\"1.5\" stroke-dasharray=\"2,4\"",
    ));

    // legend
    let lx = WIDTH - MARGIN_RIGHT - 230.0;
    let ly = MARGIN_TOP + 12.0;
    let _ = writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"222\" height=\"64\" fill=\"white\" stroke=\"#888888\"/>",
        lx,
        ly - 12.0,
    );
    for (i, (style, label)) in [
        ("stroke=\"#cc0000\" stroke-dasharray=\"2,4\"", "fidelity"),
        ("stroke=\"#1f4fcc\"", "probability S2=+1"),
        ("stroke=\"black\" stroke-dasharray=\"9,6\"", "ideal driving"),
    ]
    .iter()
    .enumerate()
    {
        let y = ly + 18.0 * i as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" {style} stroke-width=\"1.5\"/>",
            lx + 8.0,
            lx + 48.0,
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" font-family=\"sans-serif\">{label}</text>",
            lx + 56.0,
            y + 4.0,
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(path: &Path, run: &RunOutput) -> Result<(), CliError> {
    write_atomic(path, render_svg(run)?.as_bytes())
}
