//! Planar vectors, bases, lines through the origin and line figures.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};


use crate::error::{Error, Result};
use crate::TOL_ANGLE;
use crate::math;

/// Point or vector of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector2 {
    pub x: f64,
    pub y: f64,
}

impl Vector2 {
    pub const ZERO: Vector2 = Vector2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vector2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vector2::new(math::cos(theta), math::sin(theta))
    }

    pub fn dot(self, o: Vector2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vector2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn rotate90(self) -> Vector2 {
        Vector2::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Vector2 {
        let (s, c) = theta.sin_cos();
        Vector2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn normalized(self) -> Option<Vector2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, o: Vector2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    fn add(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vector2 {
    fn add_assign(&mut self, o: Vector2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    fn sub(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    fn neg(self) -> Vector2 {
        Vector2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vector2 {
    type Output = Vector2;
    fn mul(self, s: f64) -> Vector2 {
        Vector2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vector2> for f64 {
    type Output = Vector2;
    fn mul(self, v: Vector2) -> Vector2 {
        v * self
    }
}

/// An ordered basis `{a1, a2}` of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis2 {
    pub a1: Vector2,
    pub a2: Vector2,
}

impl Basis2 {
    pub fn new(a1: Vector2, a2: Vector2) -> Result<Self> {
        let b = Basis2 { a1, a2 };
        if !a1.is_finite() || !a2.is_finite() || b.det().abs() <= 1e-12 {
            return Err(Error::DegenerateBasis);
        }
        Ok(b)
    }

    pub fn standard() -> Self {
        Basis2 {
            a1: Vector2::new(1.0, 0.0),
            a2: Vector2::new(0.0, 1.0),
        }
    }

    pub fn det(&self) -> f64 {
        self.a1.cross(self.a2)
    }

    /// Coefficients `(s1, s2)` with `s1 a1 + s2 a2 = v`.
    pub fn coefficients(&self, v: Vector2) -> Result<(f64, f64)> {
        let d = self.det();
        if !(d.abs() > 1e-12) {
            return Err(Error::DegenerateBasis);
        }
        Ok((v.cross(self.a2) / d, self.a1.cross(v) / d))
    }

    pub fn point(&self, s1: f64, s2: f64) -> Vector2 {
        self.a1 * s1 + self.a2 * s2
    }

    /// Lattice point `k1 a1 + k2 a2`.
    pub fn lattice(&self, k: [i64; 2]) -> Vector2 {
        self.point(k[0] as f64, k[1] as f64)
    }

    /// The basis `{Z11 a1 + Z12 a2, Z21 a1 + Z22 a2}`.
    pub fn transformed(&self, z: &IntegralMatrix2) -> Result<Basis2> {
        let e = z.to_f64();
        Basis2::new(
            self.a1 * e[0][0] + self.a2 * e[0][1],
            self.a1 * e[1][0] + self.a2 * e[1][1],
        )
    }

    /// Dual basis `{b1, b2}` with `<a_i, b_j> = delta_ij`.
    pub fn dual(&self) -> Basis2 {
        let d = self.det();
        Basis2 {
            a1: Vector2::new(self.a2.y / d, -self.a2.x / d),
            a2: Vector2::new(-self.a1.y / d, self.a1.x / d),
        }
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ok(Rational {
            num: s * num / g,
            den: s * den / g,
        })
    }

    pub const fn int(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn recip(self) -> Result<Self> {
        Rational::new(self.den, self.num)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, o: Rational) -> Rational {
        let g = gcd(self.den, o.den).max(1);
        let den = self.den / g * o.den;
        Rational::new(self.num * (o.den / g) + o.num * (self.den / g), den).unwrap()
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, o: Rational) -> Rational {
        self + (-o)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, o: Rational) -> Rational {
        let g1 = gcd(self.num, o.den).max(1);
        let g2 = gcd(o.num, self.den).max(1);
        Rational::new((self.num / g1) * (o.num / g2), (self.den / g2) * (o.den / g1)).unwrap()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Change-of-basis matrix `[[alpha1, beta1], [alpha2, beta2]]`.
///
/// Row `i` holds the coefficients of the new basis vector `a*_i` in the old
/// basis. Acting on reciprocal coordinates `gamma` as a column vector it maps
/// the line figure of the old spectrum onto the line figure of the new one.
/// Entries are rational; the integral case is the periodicity-preserving one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegralMatrix2 {
    pub m: [[Rational; 2]; 2],
}

impl IntegralMatrix2 {
    pub fn new(m: [[Rational; 2]; 2]) -> Result<Self> {
        let z = IntegralMatrix2 { m };
        if z.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(z)
    }

    pub fn from_ints(m: [[i64; 2]; 2]) -> Result<Self> {
        Self::new([
            [Rational::int(m[0][0]), Rational::int(m[0][1])],
            [Rational::int(m[1][0]), Rational::int(m[1][1])],
        ])
    }

    pub fn identity() -> Self {
        Self::from_ints([[1, 0], [0, 1]]).unwrap()
    }

    pub fn det(&self) -> Rational {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_integral(&self) -> bool {
        self.m.iter().flatten().all(Rational::is_integer)
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.det();
        self.is_integral() && d.is_integer() && d.num().abs() == 1
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &IntegralMatrix2) -> IntegralMatrix2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[Rational::int(0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        IntegralMatrix2 { m: out }
    }

    pub fn inverse(&self) -> Result<IntegralMatrix2> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let inv_d = d.recip()?;
        let m = &self.m;
        Ok(IntegralMatrix2 {
            m: [
                [m[1][1] * inv_d, -m[0][1] * inv_d],
                [-m[1][0] * inv_d, m[0][0] * inv_d],
            ],
        })
    }

    pub fn transpose(&self) -> IntegralMatrix2 {
        let m = &self.m;
        IntegralMatrix2 {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        let m = &self.m;
        [
            [m[0][0].to_f64(), m[0][1].to_f64()],
            [m[1][0].to_f64(), m[1][1].to_f64()],
        ]
    }

    /// `Z w` for a real column vector `w`.
    pub fn apply(&self, w: Vector2) -> Vector2 {
        let e = self.to_f64();
        Vector2::new(e[0][0] * w.x + e[0][1] * w.y, e[1][0] * w.x + e[1][1] * w.y)
    }

    /// `Z k` for an integer vector; `None` when the result is not integral.
    pub fn apply_int(&self, k: [i64; 2]) -> Option<[i64; 2]> {
        let r0 = self.m[0][0] * Rational::int(k[0]) + self.m[0][1] * Rational::int(k[1]);
        let r1 = self.m[1][0] * Rational::int(k[0]) + self.m[1][1] * Rational::int(k[1]);
        (r0.is_integer() && r1.is_integer()).then(|| [r0.num(), r1.num()])
    }

    /// A unimodular matrix whose first row is `(d2, -d1)`, for a primitive
    /// integer direction `(d1, d2)`. It maps the direction to `(0, 1)`.
    pub fn aligning(d: [i64; 2]) -> Result<IntegralMatrix2> {
        let (g, x, y) = ext_gcd(d[0], d[1]);
        if g != 1 {
            return Err(Error::invalid("direction is not primitive"));
        }
        // first row (d2, -d1); det = d2 * z22 + d1 * z21 = 1
        Self::from_ints([[d[1], -d[0]], [x, y]])
    }
}

/// Normalises an angle into `[0, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t < 0.0 {
        t += PI;
    }
    if t >= PI {
        t -= PI;
    }
    t
}

/// Distance between two line angles on the circle of length `pi`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(PI - d)
}

/// A line through the origin, stored by its angle in `[0, pi)` and unit
/// direction.
#[derive(Debug, Clone, Copy)]
pub struct ProjLine {
    angle: f64,
    direction: Vector2,
}

impl ProjLine {
    pub fn from_direction(v: Vector2) -> Result<Self> {
        let u = v
            .normalized()
            .ok_or_else(|| Error::invalid("line direction must be nonzero"))?;
        Ok(Self::from_angle(math::atan2(u.y, u.x)))
    }

    pub fn from_angle(theta: f64) -> Self {
        let angle = normalize_angle(theta);
        ProjLine {
            angle,
            direction: Vector2::from_angle(angle),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn direction(&self) -> Vector2 {
        self.direction
    }

    pub fn normal(&self) -> Vector2 {
        self.direction.rotate90()
    }

    pub fn angle_to(&self, other: &ProjLine) -> f64 {
        angle_distance(self.angle, other.angle)
    }

    pub fn approx_eq(&self, other: &ProjLine, tol: f64) -> bool {
        self.angle_to(other) < tol
    }

    /// Distance of a point from the line.
    pub fn distance(&self, p: Vector2) -> f64 {
        self.direction.cross(p).abs()
    }

    pub fn rotated(&self, theta: f64) -> ProjLine {
        ProjLine::from_angle(self.angle + theta)
    }

    /// Primitive integer direction `(q, p)` (slope `p / q`) when the slope is
    /// rational with denominators at most `max_den`, to within `tol`.
    pub fn rational_direction(&self, max_den: i64, tol: f64) -> Option<[i64; 2]> {
        let d = self.direction;
        // expand the smaller-over-larger ratio for stability
        let swap = d.y.abs() > d.x.abs();
        let (num, den) = if swap { (d.x, d.y) } else { (d.y, d.x) };
        let x = num / den;
        let (p, q) = best_rational(x, max_den, tol)?;
        let v = if swap { [p, q] } else { [q, p] };
        Some(primitive(v))
    }
}

impl PartialEq for ProjLine {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, TOL_ANGLE)
    }
}

fn primitive(v: [i64; 2]) -> [i64; 2] {
    let g = gcd(v[0], v[1]).max(1);
    let (a, b) = (v[0] / g, v[1] / g);
    if a < 0 || (a == 0 && b < 0) {
        [-a, -b]
    } else {
        [a, b]
    }
}

/// Continued-fraction search for `p / q` with `|x - p/q| < tol`, `q <= max_den`.
fn best_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// A finite set of lines through the origin, kept sorted by angle and free of
/// duplicates (pairwise angular distance above the tolerance).
#[derive(Debug, Clone, Default)]
pub struct LineFigure {
    lines: Vec<ProjLine>,
}

impl LineFigure {
    pub fn new() -> Self {
        LineFigure { lines: Vec::new() }
    }

    pub fn from_lines(lines: impl IntoIterator<Item = ProjLine>) -> Self {
        let mut f = LineFigure::new();
        for l in lines {
            f.insert(l);
        }
        f
    }

    /// Inserts unless an equal line (within `TOL_ANGLE`) is present.
    pub fn insert(&mut self, line: ProjLine) -> bool {
        self.insert_with_tol(line, TOL_ANGLE)
    }

    pub fn insert_with_tol(&mut self, line: ProjLine, tol: f64) -> bool {
        if self.lines.iter().any(|l| l.approx_eq(&line, tol)) {
            return false;
        }
        let pos = self
            .lines
            .partition_point(|l| l.angle() < line.angle());
        self.lines.insert(pos, line);
        true
    }

    pub fn lines(&self) -> &[ProjLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn contains(&self, line: &ProjLine, tol: f64) -> bool {
        self.lines.iter().any(|l| l.approx_eq(line, tol))
    }

    /// Set equality up to an angular tolerance.
    pub fn set_eq(&self, other: &LineFigure, tol: f64) -> bool {
        self.len() == other.len()
            && self.lines.iter().all(|l| other.contains(l, tol))
            && other.lines.iter().all(|l| self.contains(l, tol))
    }

    /// Largest angular distance from a line of `self` to the nearest line of
    /// `other` and vice versa.
    pub fn angular_mismatch(&self, other: &LineFigure) -> f64 {
        let one_way = |a: &LineFigure, b: &LineFigure| {
            a.lines
                .iter()
                .map(|l| {
                    b.lines
                        .iter()
                        .map(|m| l.angle_to(m))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }

    pub fn rotated(&self, theta: f64) -> LineFigure {
        LineFigure::from_lines(self.lines.iter().map(|l| l.rotated(theta)))
    }

    /// Sorted angular gaps between consecutive lines, wrapping at `pi`.
    pub fn angular_gaps(&self) -> Vec<f64> {
        let n = self.lines.len();
        let mut gaps: Vec<f64> = (0..n)
            .map(|i| {
                let a = self.lines[i].angle();
                let b = if i + 1 < n {
                    self.lines[i + 1].angle()
                } else {
                    self.lines[0].angle() + PI
                };
                b - a
            })
            .collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        gaps
    }
}

impl FromIterator<ProjLine> for LineFigure {
    fn from_iter<I: IntoIterator<Item = ProjLine>>(iter: I) -> Self {
        LineFigure::from_lines(iter)
    }
}

/// The reciprocal line `H^a`: for `H = R(alpha a1 + beta a2)` this is the
/// line `R(beta, -alpha)` of reciprocal space.
pub fn reciprocal_line(h: &ProjLine, a: &Basis2) -> Result<ProjLine> {
    let (alpha, beta) = a.coefficients(h.direction())?;
    ProjLine::from_direction(Vector2::new(beta, -alpha))
}

/// Inverse of [`reciprocal_line`]: the ambient line whose reciprocal is `l`.
pub fn ambient_line(l: &ProjLine, a: &Basis2) -> Result<ProjLine> {
    if a.det().abs() <= 1e-12 {
        return Err(Error::DegenerateBasis);
    }
    let w = l.direction();
    // (beta, -alpha) = w  =>  alpha = -w.y, beta = w.x
    ProjLine::from_direction(a.point(-w.y, w.x))
}

pub fn reciprocal_figure(f: &LineFigure, a: &Basis2) -> Result<LineFigure> {
    f.lines().iter().map(|h| reciprocal_line(h, a)).collect()
}

/// Image of a line figure under `R w -> R (Z w)`.
pub fn transform_figure(z: &IntegralMatrix2, f: &LineFigure) -> Result<LineFigure> {
    if z.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    f.lines()
        .iter()
        .map(|l| ProjLine::from_direction(z.apply(l.direction())))
        .collect()
}

/// A straight segment of the reduced square `[-1/2, 1/2)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Vector2,
    pub end: Vector2,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.start.dist(self.end)
    }

    pub fn point_at(&self, s: f64) -> Vector2 {
        self.start + (self.end - self.start) * s
    }
}

/// Denominator bound used when deciding whether a reduced line is compact.
pub const RATIONAL_DEN_BOUND: i64 = 64;
/// Residual used by the continued-fraction rationality test.
pub const RATIONAL_TOL: f64 = 1e-9;

/// Reduces `{t d : |t| <= T}` modulo `Z^2` into `[-1/2, 1/2)^2`, returning
/// maximal segments. Pieces that land on the same reduced line are merged.
pub fn reduce_line_segments(line: &ProjLine, truncation: f64) -> Vec<Segment> {
    if !(truncation > 0.0) {
        return Vec::new();
    }
    let mut dir = line.direction();
    if let Some([q, p]) = line.rational_direction(RATIONAL_DEN_BOUND, RATIONAL_TOL) {
        dir = Vector2::new(q as f64, p as f64).normalized().unwrap();
    }
    let t_max = truncation;
    let mut breaks: Vec<f64> = alloc::vec![-t_max, t_max];
    for comp in [dir.x, dir.y] {
        if comp.abs() < 1e-15 {
            continue;
        }
        // crossings of comp * t = h + 1/2
        let lo = (-t_max * comp.abs() - 0.5).floor() as i64 - 1;
        let hi = (t_max * comp.abs() - 0.5).ceil() as i64 + 1;
        for h in lo..=hi {
            let t = (h as f64 + 0.5) / comp;
            if t > -t_max && t < t_max {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let normal = dir.rotate90();
    // (offset, u_start, u_end) per reduced piece
    let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        if tb - ta < 1e-12 {
            continue;
        }
        let mid = dir * (0.5 * (ta + tb));
        let shift = Vector2::new((mid.x + 0.5).floor(), (mid.y + 0.5).floor());
        let pa = dir * ta - shift;
        let pb = dir * tb - shift;
        pieces.push((normal.dot(pa), dir.dot(pa), dir.dot(pb)));
    }
    pieces.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
    });

    let mut out: Vec<Segment> = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        let c = pieces[i].0;
        let mut j = i;
        while j < pieces.len() && (pieces[j].0 - c).abs() < 1e-9 {
            j += 1;
        }
        let group = &mut pieces[i..j];
        group.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (mut lo, mut hi) = (group[0].1, group[0].2);
        for g in group.iter().skip(1) {
            if g.1 <= hi + 1e-9 {
                hi = hi.max(g.2);
            } else {
                out.push(segment_from(dir, normal, c, lo, hi));
                lo = g.1;
                hi = g.2;
            }
        }
        out.push(segment_from(dir, normal, c, lo, hi));
        i = j;
    }
    out
}

fn segment_from(dir: Vector2, normal: Vector2, c: f64, u0: f64, u1: f64) -> Segment {
    Segment {
        start: normal * c + dir * u0,
        end: normal * c + dir * u1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(x: f64, y: f64) -> ProjLine {
        ProjLine::from_direction(Vector2::new(x, y)).unwrap()
    }

    #[test]
    fn coefficients_examples() {
        let std = Basis2::standard();
        assert_eq!(std.coefficients(std.a1).unwrap(), (1.0, 0.0));
        assert_eq!(std.coefficients(Vector2::ZERO).unwrap(), (0.0, 0.0));
        let a = Basis2::new(Vector2::new(2.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        let (s1, s2) = a.coefficients(Vector2::new(3.0, 1.0)).unwrap();
        assert_abs_diff_eq!(s1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_basis_rejected() {
        let r = Basis2::new(Vector2::new(1.0, 2.0), Vector2::new(2.0, 4.0));
        assert_eq!(r, Err(Error::DegenerateBasis));
        let bad = Basis2 {
            a1: Vector2::new(1.0, 1.0),
            a2: Vector2::new(1.0, 1.0),
        };
        assert_eq!(bad.coefficients(Vector2::new(1.0, 0.0)), Err(Error::DegenerateBasis));
    }

    #[test]
    fn reciprocal_line_examples() {
        let a = Basis2::new(Vector2::new(1.0, 0.3), Vector2::new(-0.2, 2.0)).unwrap();
        let h1 = ProjLine::from_direction(a.a1).unwrap();
        assert!(reciprocal_line(&h1, &a).unwrap().approx_eq(&line(0.0, -1.0), 1e-12));
        let h2 = ProjLine::from_direction(a.a2).unwrap();
        assert!(reciprocal_line(&h2, &a).unwrap().approx_eq(&line(1.0, 0.0), 1e-12));
        let std = Basis2::standard();
        assert!(reciprocal_line(&line(1.0, 1.0), &std)
            .unwrap()
            .approx_eq(&line(1.0, -1.0), 1e-12));
    }

    #[test]
    fn ambient_line_inverts_reciprocal() {
        let a = Basis2::new(Vector2::new(1.0, 0.0), Vector2::new(0.5, 0.8)).unwrap();
        for k in 0..12 {
            let h = ProjLine::from_angle(0.26 * k as f64);
            let back = ambient_line(&reciprocal_line(&h, &a).unwrap(), &a).unwrap();
            assert!(back.approx_eq(&h, 1e-12));
        }
    }

    #[test]
    fn transform_figure_examples() {
        let f = LineFigure::from_lines([line(1.0, 0.0), line(0.0, 1.0)]);
        let id = IntegralMatrix2::identity();
        assert!(transform_figure(&id, &f).unwrap().set_eq(&f, 1e-12));
        let swap = IntegralMatrix2::from_ints([[0, 1], [1, 0]]).unwrap();
        let g1 = LineFigure::from_lines([line(1.0, 0.0)]);
        let out = transform_figure(&swap, &g1).unwrap();
        assert!(out.set_eq(&LineFigure::from_lines([line(0.0, 1.0)]), 1e-12));
        let shear = IntegralMatrix2::from_ints([[1, 1], [0, 1]]).unwrap();
        let out = transform_figure(&shear, &f).unwrap();
        assert!(out.set_eq(&LineFigure::from_lines([line(1.0, 0.0), line(1.0, 1.0)]), 1e-12));
    }

    #[test]
    fn singular_matrix_rejected() {
        assert_eq!(
            IntegralMatrix2::from_ints([[1, 2], [2, 4]]),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn aligning_matrix_is_unimodular() {
        for d in [[1, 0], [0, 1], [1, 1], [2, -3], [5, 7], [-4, 9]] {
            let z = IntegralMatrix2::aligning(d).unwrap();
            assert!(z.is_unimodular());
            let w = z.apply_int(d).unwrap();
            assert_eq!(w, [0, 1]);
        }
        assert!(IntegralMatrix2::aligning([2, 4]).is_err());
    }

    #[test]
    fn rational_directions() {
        assert_eq!(line(1.0, 0.0).rational_direction(64, 1e-9), Some([1, 0]));
        assert_eq!(line(0.0, 1.0).rational_direction(64, 1e-9), Some([0, 1]));
        assert_eq!(line(-3.0, 2.0).rational_direction(64, 1e-9), Some([3, -2]));
        assert_eq!(line(7.0, 60.0).rational_direction(64, 1e-9), Some([7, 60]));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(line(1.0, golden).rational_direction(64, 1e-9), None);
    }

    #[test]
    fn reduce_axis_line() {
        for t in [1.0, 2.5, 7.0] {
            let segs = reduce_line_segments(&line(1.0, 0.0), t);
            assert_eq!(segs.len(), 1);
            let s = segs[0];
            assert_abs_diff_eq!(s.start.x, -0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(s.end.x, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(s.start.y, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduce_diagonal_wraps_onto_itself() {
        let segs = reduce_line_segments(&line(1.0, 1.0), 2.0);
        assert_eq!(segs.len(), 1);
        let s = segs[0];
        assert_abs_diff_eq!(s.length(), 2f64.sqrt(), epsilon = 1e-9);
    }

    /// Independent count: sample points densely along the line, reduce them
    /// one by one, and count distinct reduced offsets.
    fn brute_force_offsets(l: &ProjLine, t: f64) -> usize {
        let d = l.direction();
        let n = d.rotate90();
        let steps = (t * 4000.0) as i64;
        let mut offs: Vec<f64> = Vec::new();
        for i in -steps..=steps {
            let p = d * (t * i as f64 / steps as f64);
            let r = Vector2::new(p.x - (p.x + 0.5).floor(), p.y - (p.y + 0.5).floor());
            let c = n.dot(r);
            if !offs.iter().any(|o| (o - c).abs() < 1e-6) {
                offs.push(c);
            }
        }
        offs.len()
    }

    #[test]
    fn reduce_irrational_count_doubles() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let l = line(1.0, golden);
        let n20 = reduce_line_segments(&l, 20.0).len();
        let n40 = reduce_line_segments(&l, 40.0).len();
        assert_eq!(n20, brute_force_offsets(&l, 20.0));
        assert_eq!(n40, brute_force_offsets(&l, 40.0));
        let ratio = n40 as f64 / n20 as f64;
        assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
    }

    #[test]
    fn reduced_points_lie_on_line_mod_z2() {
        let l = line(0.37, 1.0);
        for s in reduce_line_segments(&l, 9.0) {
            for k in 0..=10 {
                let p = s.point_at(k as f64 / 10.0);
                assert!(p.x >= -0.5 - 1e-9 && p.x <= 0.5 + 1e-9);
                assert!(p.y >= -0.5 - 1e-9 && p.y <= 0.5 + 1e-9);
                // re-lift: some integer translate of p lies on the line
                let n = l.normal();
                let ok = (-12..=12).any(|i| {
                    (-12..=12).any(|j| n.dot(p + Vector2::new(i as f64, j as f64)).abs() < 1e-9)
                });
                assert!(ok);
            }
        }
    }

    #[test]
    fn figure_dedup_and_gaps() {
        let f = LineFigure::from_lines((0..10).map(|k| ProjLine::from_angle(k as f64 * PI / 5.0)));
        assert_eq!(f.len(), 5);
        for g in f.angular_gaps() {
            assert_abs_diff_eq!(g, PI / 5.0, epsilon = 1e-12);
        }
        assert!(f.rotated(PI / 5.0).set_eq(&f, 1e-9));
    }

    #[test]
    fn rational_arithmetic() {
        let a = Rational::new(2, 4).unwrap();
        assert_eq!((a.num(), a.den()), (1, 2));
        let b = Rational::new(1, -3).unwrap();
        assert_eq!(a + b, Rational::new(1, 6).unwrap());
        assert_eq!(a * b, Rational::new(-1, 6).unwrap());
        let z = IntegralMatrix2::from_ints([[2, 1], [1, 1]]).unwrap();
        let zi = z.inverse().unwrap();
        assert_eq!(z.compose(&zi), IntegralMatrix2::identity());
    }
}
