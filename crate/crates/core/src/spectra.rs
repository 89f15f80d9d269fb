//! Phase fields, closeness of velocity fields, and slippage / limit spectra
//! as reciprocal line figures.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::framework::{cnorm, cscale, csub, cvec, CVec2, FiniteFramework, VelocityField, Window};
use crate::geometry::{
    reciprocal_figure, reduce_line_segments, Basis2, LineFigure, ProjLine, Segment, Vector2, RATIONAL_DEN_BOUND,
    RATIONAL_TOL,
};
use crate::multigrid::{self, family_phase, framework_of, pair_slippage_flex, Tiling};
use crate::symbol::cpow;
use crate::math;

/// A scalar field on the plane.
pub trait ScalarField {
    fn value(&self, p: Vector2) -> Complex64;
}

/// `omega_1^k1 omega_2^k2` on the cell `origin + [k1, k1+1) a1 + [k2, k2+1) a2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseField {
    pub omega: [Complex64; 2],
    pub basis: Basis2,
    pub origin: Vector2,
}

impl ScalarField for PhaseField {
    fn value(&self, p: Vector2) -> Complex64 {
        let (s1, s2) = self.basis.coefficients(p - self.origin).expect("valid basis");
        cpow(self.omega[0], s1.floor() as i64) * cpow(self.omega[1], s2.floor() as i64)
    }
}

/// `lambda^k` on the band `k <= s2 < k + 1`, where `s2` is the `t2`
/// coefficient of `p - origin` in the basis `{t1, t2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandedPhaseField {
    pub t1: Vector2,
    pub t2: Vector2,
    pub origin: Vector2,
    pub lambda: Complex64,
}

impl BandedPhaseField {
    pub fn new(t1: Vector2, t2: Vector2, origin: Vector2, lambda: Complex64) -> Result<Self> {
        Basis2::new(t1, t2)?;
        if (math::modulus(lambda) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("lambda must be unimodular"));
        }
        Ok(BandedPhaseField { t1, t2, origin, lambda })
    }

    pub fn band(&self, p: Vector2) -> i64 {
        let b = Basis2 { a1: self.t1, a2: self.t2 };
        let (_, s2) = b.coefficients(p - self.origin).expect("checked basis");
        s2.floor() as i64
    }

    /// Banded field whose band index is `floor(phi(p) / n)` for the linear
    /// approximation `phi(p) = <w, p> + c` of the family-`j` index `K_j`.
    pub fn for_family(t: &Tiling, j: usize, n: i64, lambda: Complex64) -> Result<Self> {
        let (w, c) = family_phase(&t.spec, j)?;
        let w2 = w.norm_sq();
        let t1 = w.rotate90();
        let t2 = w * (n as f64 / w2);
        let origin = w * (-c / w2);
        Self::new(t1, t2, origin, lambda)
    }
}

impl ScalarField for BandedPhaseField {
    fn value(&self, p: Vector2) -> Complex64 {
        cpow(self.lambda, self.band(p))
    }
}

/// `phi_{omega, a} (x) B`: the cell phase times the entry of the `L x M`
/// matrix `B` for the sub-cell containing the point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatricialPhaseField {
    pub omega: [Complex64; 2],
    pub basis: Basis2,
    pub origin: Vector2,
    pub cells: Vec<Vec<CVec2>>,
}

impl MatricialPhaseField {
    pub fn new(omega: [Complex64; 2], basis: Basis2, origin: Vector2, cells: Vec<Vec<CVec2>>) -> Result<Self> {
        if cells.is_empty() || cells[0].is_empty() || cells.iter().any(|r| r.len() != cells[0].len()) {
            return Err(Error::invalid("unit cell matrix must be a nonempty rectangle"));
        }
        if omega.iter().any(|w| (math::modulus(*w) - 1.0).abs() > 1e-12) {
            return Err(Error::invalid("multiphase entries must be unimodular"));
        }
        Ok(MatricialPhaseField { omega, basis, origin, cells })
    }

    pub fn value(&self, p: Vector2) -> CVec2 {
        let (s1, s2) = self.basis.coefficients(p - self.origin).expect("valid basis");
        let (k1, k2) = (s1.floor(), s2.floor());
        let (l, m) = (self.cells.len(), self.cells[0].len());
        let a = (((s1 - k1) * l as f64).floor() as usize).min(l - 1);
        let b = (((s2 - k2) * m as f64).floor() as usize).min(m - 1);
        let phase = cpow(self.omega[0], k1 as i64) * cpow(self.omega[1], k2 as i64);
        cscale(phase, &self.cells[a][b])
    }

    pub fn restrict(&self, fw: &FiniteFramework) -> VelocityField {
        VelocityField {
            values: fw.joints().iter().map(|&p| self.value(p)).collect(),
        }
    }
}

/// Pointwise product `phi(p) u(p)`.
pub fn modulate(phi: &impl ScalarField, fw: &FiniteFramework, u: &VelocityField) -> Result<VelocityField> {
    if u.len() != fw.num_joints() {
        return Err(Error::MissingJoint(u.len().min(fw.num_joints())));
    }
    Ok(VelocityField {
        values: fw
            .joints()
            .iter()
            .zip(&u.values)
            .map(|(&p, v)| cscale(phi.value(p), v))
            .collect(),
    })
}

/// Conjugate phase field, used to undo a modulation.
pub struct Conjugate<'a, F: ScalarField>(pub &'a F);

impl<F: ScalarField> ScalarField for Conjugate<'_, F> {
    fn value(&self, p: Vector2) -> Complex64 {
        self.0.value(p).conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessOptions {
    /// Anchor stride as a fraction of `N`.
    pub stride_fraction: f64,
    /// Distance trimmed from every side of the framework window.
    pub margin: f64,
}

impl Default for ClosenessOptions {
    fn default() -> Self {
        ClosenessOptions {
            stride_fraction: 0.25,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closeness {
    pub close: bool,
    /// Largest deviating fraction over the tested squares.
    pub worst_fraction: f64,
    pub squares_tested: usize,
}

/// Slides a `2N x 2N` square over anchors at stride `N * stride_fraction`
/// and checks that in every nonempty square fewer than an `eps` fraction of
/// joints have `|u(p) - z(p)| > eps`.
pub fn mostly_epsilon_close(
    u: &VelocityField,
    z: &VelocityField,
    eps: f64,
    n: f64,
    fw: &FiniteFramework,
    opts: ClosenessOptions,
) -> Result<Closeness> {
    let nj = fw.num_joints();
    if u.len() != nj || z.len() != nj {
        return Err(Error::MissingJoint(u.len().min(z.len()).min(nj)));
    }
    if !(n > 0.0) || !(opts.stride_fraction > 0.0) {
        return Err(Error::invalid("square size and stride must be positive"));
    }
    let w = fw.window().shrink(opts.margin);
    let stride = n * opts.stride_fraction;
    let side = 2.0 * n;
    if w.width() < side || w.height() < side {
        return Err(Error::WindowTooSmall);
    }
    // cell counts on a grid of pitch `stride`; squares are unions of cells
    let per_side = (side / stride).round() as usize;
    let nx = (w.width() / stride).floor() as usize;
    let ny = (w.height() / stride).floor() as usize;
    let mut total = vec![0u32; (nx + 1) * (ny + 1)];
    let mut bad = vec![0u32; (nx + 1) * (ny + 1)];
    let at = |x: usize, y: usize| x * (ny + 1) + y;
    for (i, p) in fw.joints().iter().enumerate() {
        if !w.contains(*p) {
            continue;
        }
        let cx = (((p.x - w.min.x) / stride).floor() as usize).min(nx.saturating_sub(1));
        let cy = (((p.y - w.min.y) / stride).floor() as usize).min(ny.saturating_sub(1));
        total[at(cx + 1, cy + 1)] += 1;
        if cnorm(&csub(&u.values[i], &z.values[i])) > eps {
            bad[at(cx + 1, cy + 1)] += 1;
        }
    }
    for x in 1..=nx {
        for y in 1..=ny {
            for arr in [&mut total, &mut bad] {
                arr[at(x, y)] += arr[at(x - 1, y)] + arr[at(x, y - 1)] - arr[at(x - 1, y - 1)];
            }
        }
    }
    let rect = |arr: &[u32], x0: usize, y0: usize| -> u32 {
        let (x1, y1) = (x0 + per_side, y0 + per_side);
        arr[at(x1, y1)] + arr[at(x0, y0)] - arr[at(x0, y1)] - arr[at(x1, y0)]
    };
    let mut worst = 0.0f64;
    let mut tested = 0;
    if nx >= per_side && ny >= per_side {
        for x0 in 0..=nx - per_side {
            for y0 in 0..=ny - per_side {
                let t = rect(&total, x0, y0);
                if t == 0 {
                    continue;
                }
                tested += 1;
                worst = worst.max(rect(&bad, x0, y0) as f64 / t as f64);
            }
        }
    }
    Ok(Closeness {
        close: worst < eps,
        worst_fraction: worst,
        squares_tested: tested,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Slippage,
    Limit,
}

/// Where a line figure came from.
#[derive(Debug, Clone, Copy)]
pub enum SpectrumSource<'a> {
    Tiling(&'a Tiling),
    /// An ambient figure supplied directly (not known to be multigrid).
    Ambient(&'a LineFigure),
}

#[derive(Debug, Clone)]
pub struct SpectrumFigure {
    pub kind: SpectrumKind,
    /// Reciprocal-space figure.
    pub figure: LineFigure,
    /// The ambient figure it is the image of.
    pub ambient: LineFigure,
    pub basis: Basis2,
    pub from_multigrid: bool,
}

impl SpectrumFigure {
    /// Lines whose direction is not rational with small denominator.
    pub fn irrational_lines(&self) -> Vec<ProjLine> {
        self.figure
            .lines()
            .iter()
            .filter(|l| l.rational_direction(RATIONAL_DEN_BOUND, RATIONAL_TOL).is_none())
            .copied()
            .collect()
    }

    /// The reduced figure mod `Z^2` is dense iff some line is irrational.
    pub fn is_dense(&self) -> bool {
        !self.irrational_lines().is_empty()
    }

    /// Segments of every line reduced into `[-1/2, 1/2)^2`.
    pub fn reduced(&self, truncation: f64) -> Vec<Vec<Segment>> {
        self.figure
            .lines()
            .iter()
            .map(|l| reduce_line_segments(l, truncation))
            .collect()
    }
}

/// The reciprocal image of the periodic slippage figure. For tilings this is
/// the ribbon figure.
pub fn slippage_spectrum(source: SpectrumSource<'_>, a: &Basis2) -> Result<SpectrumFigure> {
    let (ambient, from_multigrid) = match source {
        SpectrumSource::Tiling(t) => (multigrid::ribbon_figure(t)?.figure, true),
        SpectrumSource::Ambient(f) => (f.clone(), false),
    };
    Ok(SpectrumFigure {
        kind: SpectrumKind::Slippage,
        figure: reciprocal_figure(&ambient, a)?,
        ambient,
        basis: *a,
        from_multigrid,
    })
}

/// Limit spectrum of a multigrid framework, equal to its slippage spectrum.
pub fn limit_spectrum_multigrid(source: SpectrumSource<'_>, a: &Basis2) -> Result<SpectrumFigure> {
    match source {
        SpectrumSource::Tiling(_) => {
            let mut s = slippage_spectrum(source, a)?;
            s.kind = SpectrumKind::Limit;
            Ok(s)
        }
        SpectrumSource::Ambient(_) => Err(Error::NotMultigrid),
    }
}

#[derive(Debug, Clone)]
pub struct SlippageWitness {
    /// Band width in ribbon indices.
    pub m: i64,
    /// Ribbon indices left out at each band edge.
    pub gap: i64,
    pub b: Vector2,
    pub field: VelocityField,
    pub closeness: Closeness,
    /// Fraction of interior joints where the witness differs from `tau_b`.
    pub deviation_fraction: f64,
}

#[derive(Debug, Clone)]
pub enum SlippageVerdict {
    Certified(SlippageWitness),
    Failed(&'static str),
}

impl SlippageVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, SlippageVerdict::Certified(_))
    }
}

/// Sum of pair-slippage flexes over bands of `M` consecutive family-`j`
/// ribbons, checked for mostly-`eps` closeness to the translation `tau_b`,
/// with `b` perpendicular to `v_j`. Doubles `M` from 4 until it fits.
pub fn verify_periodic_slippage(t: &Tiling, j: usize, eps: f64) -> Result<SlippageVerdict> {
    let fw = framework_of(t)?;
    let b = t.spec.families()[j].edge.rotate90();
    let margin = 2.0 * t.spec.max_edge();
    let (w, c) = family_phase(&t.spec, j)?;
    let phi = |p: Vector2| w.dot(p) + c;
    let kmin = t.vertices.iter().map(|v| v.k[j]).min().unwrap_or(0);
    let kmax = t.vertices.iter().map(|v| v.k[j]).max().unwrap_or(0);
    let tau = fw.rigid_motion_field(crate::framework::RigidMotion::Translation(b));
    let interior = fw.window().shrink(margin);
    let mut m = 4;
    loop {
        let side = 2.0 * m as f64 / w.norm();
        if interior.width() < side || interior.height() < side {
            return if m == 4 {
                Err(Error::WindowTooSmall)
            } else {
                Ok(SlippageVerdict::Failed("window exhausted before closeness"))
            };
        }
        // smallest gap whose band supports fall inside the geometric bands
        let mut found = None;
        for gap in 0..m / 2 {
            let ok = t.vertices.iter().all(|v| {
                let r = v.k[j].rem_euclid(m);
                if r < gap || r > m - 1 - gap {
                    return true;
                }
                (phi(v.pos) / m as f64).floor() as i64 == v.k[j].div_euclid(m)
            });
            if ok {
                found = Some(gap);
                break;
            }
        }
        if let Some(gap) = found {
            let mut field = VelocityField::zeros(fw.num_joints());
            let mut k = kmin.div_euclid(m);
            while k * m <= kmax {
                let (lo, hi) = (k * m + gap - 1, (k + 1) * m - 1 - gap);
                if lo < hi {
                    let u = pair_slippage_flex(t, j, lo, hi, b)?;
                    field = field.combine(Complex64::new(1.0, 0.0), &u, Complex64::new(1.0, 0.0));
                }
                k += 1;
            }
            let squares = ClosenessOptions {
                stride_fraction: 0.25,
                margin,
            };
            let closeness = mostly_epsilon_close(&field, &tau, eps, m as f64 / w.norm(), &fw, squares)?;
            if closeness.close && fw.flex_residual_max(&field)? <= 1e-10 {
                let inside: Vec<usize> = (0..fw.num_joints()).filter(|&i| interior.contains(fw.joints()[i])).collect();
                let dev = inside
                    .iter()
                    .filter(|&&i| cnorm(&csub(&field.values[i], &tau.values[i])) > eps)
                    .count() as f64
                    / inside.len().max(1) as f64;
                return Ok(SlippageVerdict::Certified(SlippageWitness {
                    m,
                    gap,
                    b,
                    field,
                    closeness,
                    deviation_fraction: dev,
                }));
            }
        }
        m *= 2;
    }
}

/// Periodic slippage test for a generic finite framework and a candidate
/// ambient line `h`: strips of width `width` parallel to `h` are cut at a
/// few offsets, and a common velocity `b` perpendicular to every bar cut by
/// the strip boundaries is sought.
pub fn verify_periodic_slippage_generic(
    fw: &FiniteFramework,
    h: &ProjLine,
    width: f64,
    eps: f64,
) -> Result<SlippageVerdict> {
    let n = h.normal();
    let interior = fw.window().shrink(fw.max_bar_length());
    if interior.width() < 2.0 * width || interior.height() < 2.0 * width {
        return Err(Error::WindowTooSmall);
    }
    let step = fw.max_bar_length().max(1e-9) / 10.0;
    for shift in 0..10 {
        let o = shift as f64 * step + step * 0.5;
        let band = |p: Vector2| ((p.dot(n) - o) / width).floor() as i64;
        let mut crossing: Option<Vector2> = None;
        let mut consistent = true;
        for (bi, &(i, j)) in fw.bars().iter().enumerate() {
            if band(fw.joints()[i]) != band(fw.joints()[j]) {
                let d = fw.bar_vector(bi);
                match crossing {
                    None => crossing = Some(d),
                    Some(c) if c.cross(d).abs() <= 1e-9 * c.norm() * d.norm() => {}
                    Some(_) => {
                        consistent = false;
                        break;
                    }
                }
            }
        }
        if !consistent {
            continue;
        }
        let b = match crossing {
            Some(d) => d.rotate90().normalized().expect("nonzero bar"),
            None => h.direction(),
        };
        // one band of every two carries b
        let bv = cvec(b);
        let field = VelocityField {
            values: fw
                .joints()
                .iter()
                .map(|&p| if band(p).rem_euclid(2) == 0 { bv } else { [Complex64::new(0.0, 0.0); 2] })
                .collect(),
        };
        if fw.flex_residual_max(&field)? > 1e-10 {
            continue;
        }
        // the band sum equals tau_b: every band carries the translate b
        let summed = fw.rigid_motion_field(crate::framework::RigidMotion::Translation(b));
        let closeness = mostly_epsilon_close(
            &summed,
            &fw.rigid_motion_field(crate::framework::RigidMotion::Translation(b)),
            eps,
            width,
            fw,
            ClosenessOptions::default(),
        )?;
        return Ok(SlippageVerdict::Certified(SlippageWitness {
            m: 1,
            gap: 0,
            b,
            field,
            closeness,
            deviation_fraction: 0.0,
        }));
    }
    Ok(SlippageVerdict::Failed("no strip decomposition admits a common translation"))
}

fn clipped_segment(l: &ProjLine, n: f64) -> (Vector2, Vector2) {
    let d = l.direction();
    let t = n / d.x.abs().max(d.y.abs());
    (d * -t, d * t)
}

fn point_segment_distance(p: Vector2, a: Vector2, b: Vector2) -> f64 {
    let ab = b - a;
    let s = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + ab * s)
}

fn directed_distance(f1: &LineFigure, f2: &LineFigure, n: f64) -> f64 {
    let targets: Vec<(Vector2, Vector2)> = f2.lines().iter().map(|l| clipped_segment(l, n)).collect();
    let stride = n / 1000.0;
    let mut worst = 0.0f64;
    for l in f1.lines() {
        let (a, b) = clipped_segment(l, n);
        let len = a.dist(b);
        let steps = (len / stride).ceil() as usize;
        for s in 0..=steps {
            let p = a + (b - a) * (s as f64 / steps as f64);
            let d = targets
                .iter()
                .map(|&(x, y)| point_segment_distance(p, x, y))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

/// Hausdorff distance between the unions of the lines of two figures,
/// clipped to `[-N, N]^2`.
pub fn figure_distance_clipped(f1: &LineFigure, f2: &LineFigure, n: f64) -> Result<f64> {
    if f1.is_empty() || f2.is_empty() {
        return Err(Error::EmptyFigure);
    }
    Ok(directed_distance(f1, f2, n).max(directed_distance(f2, f1, n)))
}

/// The window trimmed by the multigrid margin of `2 max |v_j|`.
pub fn interior_window(t: &Tiling) -> Window {
    t.window().shrink(2.0 * t.spec.max_edge())
}
