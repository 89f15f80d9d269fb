//! Finite and periodic bar-joint frameworks and velocity fields on them.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{Basis2, IntegralMatrix2, Vector2};

/// Complex velocity vector at a joint.
pub type CVec2 = [Complex64; 2];

pub const CZERO2: CVec2 = [Complex64 { re: 0.0, im: 0.0 }; 2];

pub fn cvec(v: Vector2) -> CVec2 {
    [Complex64::new(v.x, 0.0), Complex64::new(v.y, 0.0)]
}

pub fn cnorm(v: &CVec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn cscale(s: Complex64, v: &CVec2) -> CVec2 {
    [s * v[0], s * v[1]]
}

pub fn csub(a: &CVec2, b: &CVec2) -> CVec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn cadd(a: &CVec2, b: &CVec2) -> CVec2 {
    [a[0] + b[0], a[1] + b[1]]
}

/// Complex-bilinear pairing with a real vector (no conjugation).
pub fn cpair(u: &CVec2, w: Vector2) -> Complex64 {
    u[0] * w.x + u[1] * w.y
}

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub min: Vector2,
    pub max: Vector2,
}

impl Window {
    pub fn bounding(points: &[Vector2]) -> Window {
        let mut w = Window {
            min: Vector2::new(f64::INFINITY, f64::INFINITY),
            max: Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in points {
            w.min.x = w.min.x.min(p.x);
            w.min.y = w.min.y.min(p.y);
            w.max.x = w.max.x.max(p.x);
            w.max.y = w.max.y.max(p.y);
        }
        w
    }

    pub fn contains(&self, p: Vector2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn shrink(&self, margin: f64) -> Window {
        Window {
            min: Vector2::new(self.min.x + margin, self.min.y + margin),
            max: Vector2::new(self.max.x - margin, self.max.y - margin),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Vector2 {
        (self.min + self.max) * 0.5
    }
}

/// A finite bar-joint framework in the plane.
#[derive(Debug, Clone)]
pub struct FiniteFramework {
    joints: Vec<Vector2>,
    bars: Vec<(usize, usize)>,
    window: Window,
}

impl FiniteFramework {
    /// Builds a framework, checking the joint/bar invariants. The window is
    /// the bounding box of the joints.
    pub fn new(joints: Vec<Vector2>, bars: Vec<(usize, usize)>) -> Result<Self> {
        let window = Window::bounding(&joints);
        Self::with_window(joints, bars, window)
    }

    pub fn with_window(joints: Vec<Vector2>, bars: Vec<(usize, usize)>, window: Window) -> Result<Self> {
        let n = joints.len();
        if let Some(i) = joints.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("joint {i} has a non-finite position")));
        }
        if let Some(i) = joints.iter().position(|p| !window.contains(*p)) {
            return Err(Error::invalid(format!("joint {i} lies outside the window")));
        }
        let mut seen = BTreeSet::new();
        for (b, &(i, j)) in bars.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("bar {b} references a missing joint")));
            }
            if i == j {
                return Err(Error::invalid(format!("bar {b} is a loop")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::invalid(format!("bar {b} is a duplicate")));
            }
        }
        if n >= 2 && min_pairwise_distance(&joints) <= 0.0 {
            return Err(Error::invalid("joints are not well separated"));
        }
        Ok(FiniteFramework { joints, bars, window })
    }

    pub fn joints(&self) -> &[Vector2] {
        &self.joints
    }

    pub fn bars(&self) -> &[(usize, usize)] {
        &self.bars
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn bar_vector(&self, bar: usize) -> Vector2 {
        let (i, j) = self.bars[bar];
        self.joints[i] - self.joints[j]
    }

    pub fn max_bar_length(&self) -> f64 {
        (0..self.bars.len())
            .map(|b| self.bar_vector(b).norm())
            .fold(0.0, f64::max)
    }

    /// `|<u_i - u_j, p_i - p_j>|` for one bar.
    pub fn bar_residual(&self, u: &VelocityField, bar: usize) -> f64 {
        let (i, j) = self.bars[bar];
        cpair(&csub(&u.values[i], &u.values[j]), self.joints[i] - self.joints[j]).norm()
    }

    /// Maximum first-order length change over all bars.
    pub fn flex_residual_max(&self, u: &VelocityField) -> Result<f64> {
        self.flex_residual_max_where(u, |_| true)
    }

    /// As [`Self::flex_residual_max`], restricted to bars accepted by `keep`.
    pub fn flex_residual_max_where(
        &self,
        u: &VelocityField,
        keep: impl Fn(usize) -> bool,
    ) -> Result<f64> {
        if u.values.len() < self.joints.len() {
            return Err(Error::MissingJoint(u.values.len()));
        }
        Ok((0..self.bars.len())
            .filter(|&b| keep(b))
            .map(|b| self.bar_residual(u, b))
            .fold(0.0, f64::max))
    }

    /// Scale-aware flex test: residual at most
    /// `1e-10 * max bar length * max |u|`.
    pub fn is_flex(&self, u: &VelocityField) -> Result<bool> {
        let r = self.flex_residual_max(u)?;
        Ok(r <= 1e-10 * self.max_bar_length().max(1e-300) * u.max_norm().max(1e-300))
    }

    pub fn rigid_motion_field(&self, kind: RigidMotion) -> VelocityField {
        let values = self
            .joints
            .iter()
            .map(|&p| match kind {
                RigidMotion::Translation(b) => cvec(b),
                RigidMotion::Rotation { center } => cvec((p - center).rotate90()),
            })
            .collect();
        VelocityField { values }
    }

    /// Separation, sampled covering radius of the central half of the window,
    /// and the maximum bar length.
    pub fn delone_parameters(&self) -> Result<DeloneParameters> {
        if self.joints.len() < 2 {
            return Err(Error::invalid("need at least two joints"));
        }
        let separation = min_pairwise_distance(&self.joints);
        let index = NearestIndex::new(&self.joints);
        let w = self.window;
        let interior = Window {
            min: w.min + Vector2::new(0.25 * w.width(), 0.25 * w.height()),
            max: w.max - Vector2::new(0.25 * w.width(), 0.25 * w.height()),
        };
        let samples = 48;
        let mut covering = 0.0f64;
        for i in 0..=samples {
            for j in 0..=samples {
                let p = Vector2::new(
                    interior.min.x + interior.width() * i as f64 / samples as f64,
                    interior.min.y + interior.height() * j as f64 / samples as f64,
                );
                covering = covering.max(index.nearest(p).1);
            }
        }
        Ok(DeloneParameters {
            separation,
            covering_radius_estimate: covering,
            max_bar_length: self.max_bar_length(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeloneParameters {
    pub separation: f64,
    pub covering_radius_estimate: f64,
    pub max_bar_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RigidMotion {
    Translation(Vector2),
    /// Infinitesimal rotation `u(p) = J (p - center)`.
    Rotation { center: Vector2 },
}

fn min_pairwise_distance(points: &[Vector2]) -> f64 {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.partial_cmp(&points[b].x).unwrap());
    let mut best = f64::INFINITY;
    for (s, &i) in order.iter().enumerate() {
        for &j in &order[s + 1..] {
            if points[j].x - points[i].x >= best {
                break;
            }
            best = best.min(points[i].dist(points[j]));
        }
    }
    best
}

/// Uniform bucket grid for nearest-joint queries.
pub struct NearestIndex<'a> {
    points: &'a [Vector2],
    origin: Vector2,
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: Vec<Vec<usize>>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [Vector2]) -> Self {
        let w = Window::bounding(points);
        let area = (w.width() * w.height()).max(1e-12);
        let cell = (area / points.len().max(1) as f64).sqrt().max(1e-9);
        let nx = ((w.width() / cell).floor() as i64 + 1).max(1);
        let ny = ((w.height() / cell).floor() as i64 + 1).max(1);
        let mut buckets = vec![Vec::new(); (nx * ny) as usize];
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.x - w.min.x) / cell).floor() as i64).clamp(0, nx - 1);
            let cy = (((p.y - w.min.y) / cell).floor() as i64).clamp(0, ny - 1);
            buckets[(cx * ny + cy) as usize].push(i);
        }
        NearestIndex {
            points,
            origin: w.min,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Index and distance of the nearest point.
    pub fn nearest(&self, p: Vector2) -> (usize, f64) {
        let cx = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let cy = ((p.y - self.origin.y) / self.cell).floor() as i64;
        let mut best = (usize::MAX, f64::INFINITY);
        let max_ring = self.nx.max(self.ny) + cx.abs().max(cy.abs()) + 1;
        for ring in 0..=max_ring {
            // any point in ring r is at least (r - 1) * cell away
            if best.0 != usize::MAX && ((ring - 1) as f64) * self.cell > best.1 {
                break;
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (x, y) = (cx + dx, cy + dy);
                    if x < 0 || y < 0 || x >= self.nx || y >= self.ny {
                        continue;
                    }
                    for &i in &self.buckets[(x * self.ny + y) as usize] {
                        let d = self.points[i].dist(p);
                        if d < best.1 {
                            best = (i, d);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Complex velocity field indexed by joint.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub values: Vec<CVec2>,
}

impl VelocityField {
    pub fn zeros(n: usize) -> Self {
        VelocityField {
            values: vec![CZERO2; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(cnorm).fold(0.0, f64::max)
    }

    /// Joints whose velocity has modulus above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| cnorm(&self.values[i]) > tol)
            .collect()
    }

    pub fn scaled(&self, s: Complex64) -> VelocityField {
        VelocityField {
            values: self.values.iter().map(|v| cscale(s, v)).collect(),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: Complex64, other: &VelocityField, beta: Complex64) -> VelocityField {
        VelocityField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| cadd(&cscale(alpha, a), &cscale(beta, b)))
                .collect(),
        }
    }

    /// Largest pointwise distance to another field.
    pub fn max_distance(&self, other: &VelocityField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| cnorm(&csub(a, b)))
            .fold(0.0, f64::max)
    }

    /// Distance to the closest complex multiple `c * other` (least squares
    /// choice of `c`), relative to `|self|`.
    pub fn distance_up_to_scalar(&self, other: &VelocityField) -> f64 {
        let mut num = Complex64::zero();
        let mut den = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            num += b[0].conj() * a[0] + b[1].conj() * a[1];
            den += b[0].norm_sqr() + b[1].norm_sqr();
        }
        if den == 0.0 {
            return self.max_norm();
        }
        let c = num / den;
        let scale = self.max_norm().max(1e-300);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| cnorm(&csub(a, &cscale(c, b))))
            .fold(0.0, f64::max)
            / scale
    }
}

/// A bar of a crystal framework: from joint `(from, 0)` to joint
/// `(to, offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MotifEdge {
    pub from: usize,
    pub to: usize,
    pub offset: [i64; 2],
}

impl MotifEdge {
    pub const fn new(from: usize, to: usize, offset: [i64; 2]) -> Self {
        MotifEdge { from, to, offset }
    }

    /// Orientation-independent key.
    fn canonical(&self) -> (usize, usize, [i64; 2]) {
        let rev = (self.to, self.from, [-self.offset[0], -self.offset[1]]);
        let fwd = (self.from, self.to, self.offset);
        fwd.min(rev)
    }
}

/// A periodic framework generated by a motif and a periodicity basis.
/// Joint `(kappa, k)` sits at `motif_joints[kappa] + k1 a1 + k2 a2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalFramework {
    basis: Basis2,
    motif_joints: Vec<Vector2>,
    motif_edges: Vec<MotifEdge>,
}

impl CrystalFramework {
    pub fn new(basis: Basis2, motif_joints: Vec<Vector2>, motif_edges: Vec<MotifEdge>) -> Result<Self> {
        let basis = Basis2::new(basis.a1, basis.a2)?;
        let n = motif_joints.len();
        if n == 0 {
            return Err(Error::invalid("motif has no joints"));
        }
        for i in 0..n {
            if !motif_joints[i].is_finite() {
                return Err(Error::invalid(format!("motif joint {i} is not finite")));
            }
            for j in 0..i {
                if motif_joints[i].dist(motif_joints[j]) <= 1e-12 {
                    return Err(Error::invalid(format!("motif joints {j} and {i} coincide")));
                }
            }
        }
        let c = CrystalFramework {
            basis,
            motif_joints,
            motif_edges,
        };
        let mut seen = BTreeSet::new();
        for (e, edge) in c.motif_edges.iter().enumerate() {
            if edge.from >= n || edge.to >= n {
                return Err(Error::invalid(format!("motif edge {e} references a missing joint")));
            }
            if edge.from == edge.to && edge.offset == [0, 0] {
                return Err(Error::invalid(format!("motif edge {e} is a loop")));
            }
            if c.bar_vector(edge).norm() <= 1e-12 {
                return Err(Error::invalid(format!("motif edge {e} has zero length")));
            }
            if !seen.insert(edge.canonical()) {
                return Err(Error::invalid(format!("duplicate motif edge {e}")));
            }
        }
        Ok(c)
    }

    pub fn basis(&self) -> &Basis2 {
        &self.basis
    }

    pub fn motif_joints(&self) -> &[Vector2] {
        &self.motif_joints
    }

    pub fn motif_edges(&self) -> &[MotifEdge] {
        &self.motif_edges
    }

    pub fn num_motif_joints(&self) -> usize {
        self.motif_joints.len()
    }

    pub fn joint_position(&self, kappa: usize, k: [i64; 2]) -> Vector2 {
        self.motif_joints[kappa] + self.basis.lattice(k)
    }

    /// `p_{to} + delta . a - p_{from}`.
    pub fn bar_vector(&self, e: &MotifEdge) -> Vector2 {
        self.joint_position(e.to, e.offset) - self.motif_joints[e.from]
    }

    pub fn max_bar_length(&self) -> f64 {
        self.motif_edges
            .iter()
            .map(|e| self.bar_vector(e).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|offset_2|` over the motif edges.
    pub fn max_offset(&self) -> [i64; 2] {
        let mut m = [0, 0];
        for e in &self.motif_edges {
            m[0] = m[0].max(e.offset[0].abs());
            m[1] = m[1].max(e.offset[1].abs());
        }
        m
    }

    /// The same framework described with the basis `a*_i = Z_i1 a1 + Z_i2 a2`
    /// for a unimodular integral `Z`.
    pub fn change_basis(&self, z: &IntegralMatrix2) -> Result<CrystalFramework> {
        if !z.is_unimodular() {
            return Err(Error::invalid("change of periodicity basis must be unimodular"));
        }
        let basis = self.basis.transformed(z)?;
        // k = Z^T k*, so k* = Z^{-T} k
        let zit = z.transpose().inverse()?;
        let edges = self
            .motif_edges
            .iter()
            .map(|e| {
                let off = zit
                    .apply_int(e.offset)
                    .ok_or_else(|| Error::invalid("non-integral offset after change of basis"))?;
                Ok(MotifEdge::new(e.from, e.to, off))
            })
            .collect::<Result<Vec<_>>>()?;
        CrystalFramework::new(basis, self.motif_joints.clone(), edges)
    }

    /// Lattice coordinates of cell `k` in the basis produced by
    /// [`Self::change_basis`] with the same `Z`.
    pub fn cell_in_new_basis(z: &IntegralMatrix2, k: [i64; 2]) -> Option<[i64; 2]> {
        z.transpose().inverse().ok()?.apply_int(k)
    }

    /// The crystal with periodicity basis `{k1 a1, k2 a2}`. Motif joint
    /// `(kappa, s)` of the original becomes index `kappa * k1 * k2 + s1 * k2 + s2`.
    pub fn supercell(&self, k: [i64; 2]) -> Result<CrystalFramework> {
        if k[0] < 1 || k[1] < 1 {
            return Err(Error::invalid("supercell factors must be positive"));
        }
        let cells = (k[0] * k[1]) as usize;
        let idx = |kappa: usize, s: [i64; 2]| kappa * cells + (s[0] * k[1] + s[1]) as usize;
        let mut joints = vec![Vector2::ZERO; self.motif_joints.len() * cells];
        for kappa in 0..self.motif_joints.len() {
            for s0 in 0..k[0] {
                for s1 in 0..k[1] {
                    joints[idx(kappa, [s0, s1])] = self.joint_position(kappa, [s0, s1]);
                }
            }
        }
        let mut edges = Vec::new();
        for e in &self.motif_edges {
            for s0 in 0..k[0] {
                for s1 in 0..k[1] {
                    let t = [s0 + e.offset[0], s1 + e.offset[1]];
                    let cell = [t[0].div_euclid(k[0]), t[1].div_euclid(k[1])];
                    let local = [t[0].rem_euclid(k[0]), t[1].rem_euclid(k[1])];
                    edges.push(MotifEdge::new(idx(e.from, [s0, s1]), idx(e.to, local), cell));
                }
            }
        }
        let basis = Basis2::new(self.basis.a1 * k[0] as f64, self.basis.a2 * k[1] as f64)?;
        CrystalFramework::new(basis, joints, edges)
    }

    /// Finite realization on the cells `k_range`, with joints indexed
    /// kappa-major and then lexicographically in `k`.
    pub fn realize_window(&self, range: KRange) -> Result<Realization> {
        if range.is_empty() {
            return Err(Error::invalid("empty cell range"));
        }
        let n = self.motif_joints.len();
        let mut joints = Vec::with_capacity(n * range.cells());
        let mut labels = Vec::with_capacity(n * range.cells());
        for kappa in 0..n {
            for k in range.iter() {
                joints.push(self.joint_position(kappa, k));
                labels.push((kappa, k));
            }
        }
        let mut bars = Vec::new();
        for e in &self.motif_edges {
            for k in range.iter() {
                let t = [k[0] + e.offset[0], k[1] + e.offset[1]];
                if range.contains(t) {
                    bars.push((range.index(n, e.from, k), range.index(n, e.to, t)));
                }
            }
        }
        let framework = FiniteFramework::new(joints, bars)?;
        Ok(Realization {
            framework,
            labels,
            range,
            motif_size: n,
        })
    }
}

/// Half-open box of cells `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRange {
    pub lo: [i64; 2],
    pub hi: [i64; 2],
}

impl KRange {
    pub const fn new(lo: [i64; 2], hi: [i64; 2]) -> Self {
        KRange { lo, hi }
    }

    /// `[-r, r]^2`.
    pub const fn centered(r: i64) -> Self {
        KRange {
            lo: [-r, -r],
            hi: [r + 1, r + 1],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi[0] <= self.lo[0] || self.hi[1] <= self.lo[1]
    }

    pub fn dims(&self) -> [i64; 2] {
        [
            (self.hi[0] - self.lo[0]).max(0),
            (self.hi[1] - self.lo[1]).max(0),
        ]
    }

    pub fn cells(&self) -> usize {
        let d = self.dims();
        (d[0] * d[1]) as usize
    }

    pub fn contains(&self, k: [i64; 2]) -> bool {
        k[0] >= self.lo[0] && k[0] < self.hi[0] && k[1] >= self.lo[1] && k[1] < self.hi[1]
    }

    pub fn iter(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        let r = *self;
        (r.lo[0]..r.hi[0]).flat_map(move |a| (r.lo[1]..r.hi[1]).map(move |b| [a, b]))
    }

    fn index(&self, _n: usize, kappa: usize, k: [i64; 2]) -> usize {
        let d = self.dims();
        kappa * self.cells() + ((k[0] - self.lo[0]) * d[1] + (k[1] - self.lo[1])) as usize
    }

    pub fn encloses(&self, other: &KRange) -> bool {
        self.lo[0] <= other.lo[0]
            && self.lo[1] <= other.lo[1]
            && self.hi[0] >= other.hi[0]
            && self.hi[1] >= other.hi[1]
    }
}

/// A finite window of a crystal framework, remembering the `(kappa, k)`
/// label of each joint.
#[derive(Debug, Clone)]
pub struct Realization {
    pub framework: FiniteFramework,
    pub labels: Vec<(usize, [i64; 2])>,
    pub range: KRange,
    motif_size: usize,
}

impl Realization {
    pub fn index_of(&self, kappa: usize, k: [i64; 2]) -> Option<usize> {
        (kappa < self.motif_size && self.range.contains(k))
            .then(|| self.range.index(self.motif_size, kappa, k))
    }

    pub fn motif_size(&self) -> usize {
        self.motif_size
    }

    /// Builds a field from a function of the joint label.
    pub fn field(&self, f: impl Fn(usize, [i64; 2]) -> CVec2) -> VelocityField {
        VelocityField {
            values: self.labels.iter().map(|&(kappa, k)| f(kappa, k)).collect(),
        }
    }

    /// Lattice translate `(T_k u)(kappa, m) = u(kappa, m - k)`.
    pub fn translate_field(&self, u: &VelocityField, k: [i64; 2]) -> Result<VelocityField> {
        if u.values.len() != self.labels.len() {
            return Err(Error::MissingJoint(u.values.len().min(self.labels.len())));
        }
        let mut out = VelocityField::zeros(u.values.len());
        for (i, &(kappa, m)) in self.labels.iter().enumerate() {
            if cnorm(&u.values[i]) == 0.0 {
                continue;
            }
            let target = self
                .index_of(kappa, [m[0] + k[0], m[1] + k[1]])
                .ok_or(Error::WindowExceeded)?;
            out.values[target] = u.values[i];
        }
        Ok(out)
    }

    /// Bars whose endpoints both lie in cells at least `margin` away from the
    /// boundary of the range.
    pub fn is_interior_bar(&self, bar: usize, margin: i64) -> bool {
        let (i, j) = self.framework.bars()[bar];
        let inner = KRange::new(
            [self.range.lo[0] + margin, self.range.lo[1] + margin],
            [self.range.hi[0] - margin, self.range.hi[1] - margin],
        );
        inner.contains(self.labels[i].1) && inner.contains(self.labels[j].1)
    }
}
