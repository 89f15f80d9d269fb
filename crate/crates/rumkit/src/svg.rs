//! Minimal SVG renderers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rumkit_core::geometry::Segment;
use rumkit_core::multigrid::Tiling;
use rumkit_core::symbol::SpectrumScan;
use rumkit_core::{FiniteFramework, LineFigure};

const SIZE: f64 = 600.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Canvas {
    out: String,
    // maps [lo, hi]^2 onto the viewport, y up
    lo: f64,
    hi: f64,
}

impl Canvas {
    fn new(lo: f64, hi: f64, title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(out, "<title>{}</title>", escape(title));
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
        Canvas { out, lo, hi }
    }

    fn x(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo) * SIZE
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - self.x(v)
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, width: f64) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{stroke}" stroke-width="{width}"/>"#,
            self.x(a[0]),
            self.y(a[1]),
            self.x(b[0]),
            self.y(b[1])
        );
    }

    fn frame(&mut self, lo: f64, hi: f64) {
        let (x0, y0) = (self.x(lo), self.y(hi));
        let w = self.x(hi) - x0;
        let _ = writeln!(
            self.out,
            r##"<rect x="{x0:.3}" y="{y0:.3}" width="{w:.3}" height="{w:.3}" fill="none" stroke="#000" stroke-width="1"/>"##
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Lines through the origin drawn across `[-1, 1]^2`, one `<line>` each.
pub fn figure_svg(figure: &LineFigure, title: &str) -> String {
    let mut c = Canvas::new(-1.1, 1.1, title);
    c.frame(-1.0, 1.0);
    for (i, l) in figure.lines().iter().enumerate() {
        let d = l.direction();
        // reach the frame boundary along the line
        let s = 1.0 / d.x.abs().max(d.y.abs());
        c.line([-s * d.x, -s * d.y], [s * d.x, s * d.y], color(i), 2.0);
    }
    c.finish()
}

/// Reduced segments in `[-1/2, 1/2)^2`, one `<line>` per segment, coloured by
/// the line they come from.
pub fn reduced_svg(segments: &[Vec<Segment>], truncation: f64) -> String {
    let mut c = Canvas::new(-0.55, 0.55, &format!("reduced figure, T = {truncation}"));
    c.frame(-0.5, 0.5);
    for (i, segs) in segments.iter().enumerate() {
        for s in segs {
            c.line([s.start.x, s.start.y], [s.end.x, s.end.y], color(i), 1.0);
        }
    }
    c.finish()
}

/// Tile edges coloured by the grid family of their edge vector.
pub fn tiling_svg(t: &Tiling) -> String {
    let r = t
        .vertices
        .iter()
        .map(|v| v.pos.x.abs().max(v.pos.y.abs()))
        .fold(1.0, f64::max)
        * 1.02;
    let mut c = Canvas::new(-r, r, "tiling");
    let mut seen = BTreeSet::new();
    for tile in &t.tiles {
        let [j, l] = tile.families;
        for e in 0..4 {
            let (a, b) = (tile.verts[e], tile.verts[(e + 1) % 4]);
            if !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            // sides 0 and 2 carry v_j, sides 1 and 3 carry v_l
            let family = if e % 2 == 0 { j } else { l };
            let (p, q) = (t.vertices[a].pos, t.vertices[b].pos);
            c.line([p.x, p.y], [q.x, q.y], color(family), 0.8);
        }
    }
    c.finish()
}

/// Bars of a finite framework.
pub fn framework_svg(fw: &FiniteFramework) -> String {
    let w = fw.window();
    let r = w.min.x.abs().max(w.min.y.abs()).max(w.max.x.abs()).max(w.max.y.abs()).max(1e-9) * 1.05;
    let mut c = Canvas::new(-r, r, "framework");
    let p = fw.joints();
    for &(i, j) in fw.bars() {
        c.line([p[i].x, p[i].y], [p[j].x, p[j].y], "#000", 1.0);
    }
    c.finish()
}

/// Heat map of `log10 sigma_min` on the torus; samples below tolerance are
/// drawn black.
pub fn scan_svg(s: &SpectrumScan) -> String {
    let mut c = Canvas::new(0.0, 1.0, &format!("sigma_min, R = {}", s.resolution));
    let r = s.resolution.max(1) as f64;
    let cell = SIZE / r;
    let max = s.samples.iter().cloned().fold(s.tol, f64::max);
    let (lo, hi) = (s.tol.max(1e-300).log10(), max.log10());
    for i in 0..s.resolution {
        for j in 0..s.resolution {
            let v = s.value(i, j);
            let shade = if v <= s.tol || hi <= lo {
                0
            } else {
                (55.0 + 200.0 * ((v.log10() - lo) / (hi - lo)).clamp(0.0, 1.0)) as u8
            };
            let _ = writeln!(
                c.out,
                r#"<rect x="{:.3}" y="{:.3}" width="{cell:.3}" height="{cell:.3}" fill="rgb({shade},{shade},{shade})"/>"#,
                i as f64 * cell,
                SIZE - (j as f64 + 1.0) * cell
            );
        }
    }
    c.finish()
}

/// Number of `<line` elements, for tests and sanity checks.
pub fn count_lines(svg: &str) -> usize {
    svg.matches("<line ").count()
}
