//! Plain CSV emitters. Floats use 17 significant digits.

use std::fmt::Write as _;

use rumkit_core::multigrid::Ribbon;
use rumkit_core::symbol::{SpectralLineSet, SpectrumScan};

use crate::doc::FigureDoc;
use crate::json::format_f64 as f;

pub const SCAN_HEADER: &str = "gamma1,gamma2,sigma_min";
pub const FIGURE_HEADER: &str = "angle_rad,dir_x,dir_y,kind";

/// One row per torus sample in row-major order (`gamma1 = i/R` outer).
pub fn scan_csv(s: &SpectrumScan) -> String {
    let mut out = String::with_capacity(64 * (s.samples.len() + 1));
    out.push_str(SCAN_HEADER);
    out.push('\n');
    for i in 0..s.resolution {
        for j in 0..s.resolution {
            let g = s.gamma(i, j);
            let _ = writeln!(out, "{},{},{}", f(g[0]), f(g[1]), f(s.value(i, j)));
        }
    }
    out
}

/// One row per line, sorted by angle.
pub fn figure_csv(d: &FigureDoc) -> String {
    let mut out = String::from(FIGURE_HEADER);
    out.push('\n');
    for l in d.figure.lines() {
        let v = l.direction();
        let _ = writeln!(out, "{},{},{},{}", f(l.angle()), f(v.x), f(v.y), d.kind);
    }
    out
}

/// Spectral lines with their integer direction and offset.
pub fn lines_csv(set: &SpectralLineSet) -> String {
    let mut out = String::from("d1,d2,offset,angle_rad\n");
    for l in &set.lines {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            l.direction[0],
            l.direction[1],
            f(l.offset),
            f(l.line().angle())
        );
    }
    out
}

pub fn ribbons_csv(ribbons: &[Ribbon]) -> String {
    let mut out = String::from("family,index,tiles,angle_rad,fitted_angle_rad,analytic_angle_rad\n");
    for r in ribbons {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.family,
            r.index,
            r.tiles.len(),
            f(r.direction.angle()),
            f(r.fitted.angle()),
            f(r.analytic.angle())
        );
    }
    out
}
