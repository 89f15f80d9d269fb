//! Multigrids, their de Bruijn dual parallelogram tilings, ribbons and
//! slippage flexes.
//!
//! Family `j` is the set of lines `<x, n_j> = k + gamma_j`, `k` in Z, and
//! contributes the edge vector `v_j`. The vertex with index vector `K` sits
//! at `sum_j K_j v_j`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::framework::{cvec, CrystalFramework, FiniteFramework, MotifEdge, VelocityField, Window};
use crate::geometry::{normalize_angle, Basis2, LineFigure, ProjLine, Vector2};
use crate::symbol::cpow;
use crate::math;

/// Two intersection points closer than this count as a triple point.
pub const REGULARITY_TOL: f64 = 1e-7;
/// Offsets of the symmetric Penrose pentagrid.
pub const PENROSE_OFFSETS: [f64; 5] = [0.2, 0.1, 0.05, -0.15, -0.2];
pub const AMMANN_BEENKER_OFFSETS: [f64; 4] = [0.1, 0.27, 0.33, 0.18];
const APPROXIMANT_ATTEMPTS: usize = 32;
pub const RHOMBILLE_OFFSETS: [f64; 3] = [0.1, 0.2, 0.3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFamily {
    pub normal: Vector2,
    pub offset: f64,
    pub edge: Vector2,
}

/// `r` grid families and a disk window of radius `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultigridSpec {
    families: Vec<GridFamily>,
    window: f64,
}

impl MultigridSpec {
    pub fn new(families: Vec<GridFamily>, window: f64) -> Result<Self> {
        if families.len() < 2 {
            return Err(Error::invalid("a multigrid needs at least two families"));
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::invalid("window radius must be positive"));
        }
        for (j, f) in families.iter().enumerate() {
            if !f.normal.is_finite() || f.normal.norm() <= 1e-12 {
                return Err(Error::invalid(format!("family {j} has a degenerate normal")));
            }
            if !f.edge.is_finite() || f.edge.norm() <= 1e-12 {
                return Err(Error::invalid(format!("family {j} has a degenerate edge vector")));
            }
            if !f.offset.is_finite() {
                return Err(Error::invalid(format!("family {j} has a non-finite offset")));
            }
        }
        for j in 0..families.len() {
            for l in 0..j {
                let (a, b) = (families[l].normal, families[j].normal);
                if a.cross(b).abs() <= 1e-12 * a.norm() * b.norm() {
                    return Err(Error::ParallelFamilies(l, j));
                }
            }
        }
        Ok(MultigridSpec { families, window })
    }

    /// `r` unit normals spread evenly over a half turn (odd `r`: angles
    /// `2 pi j / r`; even `r`: `pi j / r`) with `v_j = n_j`.
    pub fn symmetric(offsets: &[f64], window: f64) -> Result<Self> {
        let r = offsets.len();
        let step = if r % 2 == 1 { 2.0 * PI / r as f64 } else { PI / r as f64 };
        let families = offsets
            .iter()
            .enumerate()
            .map(|(j, &g)| {
                let n = Vector2::from_angle(step * j as f64);
                GridFamily {
                    normal: n,
                    offset: g,
                    edge: n,
                }
            })
            .collect();
        Self::new(families, window)
    }

    pub fn penrose(window: f64) -> Result<Self> {
        Self::symmetric(&PENROSE_OFFSETS, window)
    }

    pub fn ammann_beenker(window: f64) -> Result<Self> {
        Self::symmetric(&AMMANN_BEENKER_OFFSETS, window)
    }

    pub fn rhombille(window: f64) -> Result<Self> {
        Self::symmetric(&RHOMBILLE_OFFSETS, window)
    }

    /// Orthogonal 2-grid dual to the unit square grid.
    pub fn square(window: f64) -> Result<Self> {
        Self::symmetric(&[0.5, 0.5], window)
    }

    pub fn preset(name: &str, window: f64) -> Option<Result<Self>> {
        Some(match name {
            "penrose" => Self::penrose(window),
            "ammann-beenker" => Self::ammann_beenker(window),
            "rhombille" => Self::rhombille(window),
            "square" => Self::square(window),
            _ => return None,
        })
    }

    pub fn families(&self) -> &[GridFamily] {
        &self.families
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn r(&self) -> usize {
        self.families.len()
    }

    pub fn with_window(&self, window: f64) -> Result<Self> {
        Self::new(self.families.clone(), window)
    }

    /// Unit direction of the family-`j` lines.
    pub fn line_direction(&self, j: usize) -> Vector2 {
        self.families[j].normal.rotate90().normalized().expect("nonzero normal")
    }

    pub fn max_edge(&self) -> f64 {
        self.families.iter().map(|f| f.edge.norm()).fold(0.0, f64::max)
    }

    /// `L = sum_i v_i n_i^T` as `[[L11, L12], [L21, L22]]`.
    pub fn edge_normal_map(&self) -> [[f64; 2]; 2] {
        let mut l = [[0.0; 2]; 2];
        for f in &self.families {
            l[0][0] += f.edge.x * f.normal.x;
            l[0][1] += f.edge.x * f.normal.y;
            l[1][0] += f.edge.y * f.normal.x;
            l[1][1] += f.edge.y * f.normal.y;
        }
        l
    }

    /// Intersection of line `k` of family `j` with line `m` of family `l`.
    pub fn intersection(&self, j: usize, l: usize, k: i64, m: i64) -> Vector2 {
        let (a, b) = (self.families[j].normal, self.families[l].normal);
        let rhs = (k as f64 + self.families[j].offset, m as f64 + self.families[l].offset);
        let det = a.x * b.y - a.y * b.x;
        Vector2::new(
            (rhs.0 * b.y - a.y * rhs.1) / det,
            (a.x * rhs.1 - b.x * rhs.0) / det,
        )
    }

    fn index_range(&self, j: usize) -> (i64, i64) {
        let f = &self.families[j];
        let reach = self.window * f.normal.norm();
        (
            (-reach - f.offset).floor() as i64 - 1,
            (reach - f.offset).ceil() as i64 + 1,
        )
    }

    /// All pairwise intersections inside the window, ordered by `(j, l, k, m)`.
    pub fn intersections(&self) -> Vec<Intersection> {
        let mut out = Vec::new();
        let r = self.r();
        for j in 0..r {
            for l in j + 1..r {
                let (k0, k1) = self.index_range(j);
                let (m0, m1) = self.index_range(l);
                for k in k0..=k1 {
                    for m in m0..=m1 {
                        let x = self.intersection(j, l, k, m);
                        if x.norm() <= self.window {
                            out.push(Intersection {
                                families: [j, l],
                                indices: [k, m],
                                point: x,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// `ceil(<x, n_i> - gamma_i)`.
    pub fn index_vector(&self, x: Vector2) -> Vec<i64> {
        self.families
            .iter()
            .map(|f| (x.dot(f.normal) - f.offset).ceil() as i64)
            .collect()
    }

    pub fn vertex_position(&self, k: &[i64]) -> Vector2 {
        k.iter()
            .zip(&self.families)
            .fold(Vector2::ZERO, |acc, (&ki, f)| acc + f.edge * ki as f64)
    }

    /// Lattice of common periods of all families, as ambient translations
    /// `x` with every `<x, n_i>` integral, searched with coefficients up to
    /// `bound` against the first two families.
    pub fn period_lattice(&self, bound: i64) -> Option<[Vector2; 2]> {
        let valid = |a: i64, b: i64| -> Option<Vector2> {
            let x = self.intersection_raw(a as f64, b as f64);
            let ok = self.families[2..].iter().all(|f| {
                let t = x.dot(f.normal);
                (t - t.round()).abs() < 1e-9
            });
            ok.then_some(x)
        };
        let mut best_a: Option<(i64, i64)> = None;
        'outer: for a in 1..=bound {
            for b in -bound..=bound {
                if valid(a, b).is_some() {
                    best_a = Some((a, b));
                    break 'outer;
                }
            }
        }
        let (a1, b1) = best_a?;
        let c = (1..=bound).find(|&c| valid(0, c).is_some())?;
        let p1 = valid(a1, b1)?;
        let p2 = valid(0, c)?;
        Some(gauss_reduce(p1, p2))
    }

    fn intersection_raw(&self, s: f64, t: f64) -> Vector2 {
        let (a, b) = (self.families[0].normal, self.families[1].normal);
        let det = a.x * b.y - a.y * b.x;
        Vector2::new((s * b.y - a.y * t) / det, (a.x * t - b.x * s) / det)
    }
}

fn gauss_reduce(mut u: Vector2, mut v: Vector2) -> [Vector2; 2] {
    loop {
        if v.norm_sq() < u.norm_sq() {
            core::mem::swap(&mut u, &mut v);
        }
        let mu = (u.dot(v) / u.norm_sq()).round();
        if mu == 0.0 {
            break;
        }
        v = v - u * mu;
        if v.norm_sq() >= u.norm_sq() {
            break;
        }
    }
    if u.cross(v) < 0.0 {
        v = -v;
    }
    [u, v]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub families: [usize; 2],
    pub indices: [i64; 2],
    pub point: Vector2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub intersections: usize,
    /// Pairs of intersections closer than [`REGULARITY_TOL`] (at most 16 kept).
    pub flagged: Vec<(Intersection, Intersection)>,
    pub flagged_count: usize,
    pub min_separation: f64,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.flagged_count == 0
    }
}

pub fn check_regularity(spec: &MultigridSpec) -> RegularityReport {
    let mut pts = spec.intersections();
    pts.sort_by(|a, b| a.point.x.partial_cmp(&b.point.x).unwrap());
    let mut flagged = Vec::new();
    let mut flagged_count = 0;
    let mut min_sep = f64::INFINITY;
    for i in 0..pts.len() {
        for q in &pts[i + 1..] {
            let dx = q.point.x - pts[i].point.x;
            if dx >= REGULARITY_TOL.max(min_sep.min(1.0)) {
                break;
            }
            let d = pts[i].point.dist(q.point);
            min_sep = min_sep.min(d);
            if d < REGULARITY_TOL {
                flagged_count += 1;
                if flagged.len() < 16 {
                    flagged.push((pts[i], *q));
                }
            }
        }
    }
    RegularityReport {
        intersections: pts.len(),
        flagged,
        flagged_count,
        min_separation: min_sep,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub k: Vec<i64>,
    pub pos: Vector2,
}

/// Parallelogram dual to the intersection of line `indices[0]` of family
/// `families[0]` with line `indices[1]` of family `families[1]`. Vertices run
/// `K, K + e_j, K + e_j + e_l, K + e_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub families: [usize; 2],
    pub indices: [i64; 2],
    pub verts: [usize; 4],
    pub dual_point: Vector2,
}

impl Tile {
    pub fn center(&self, t: &Tiling) -> Vector2 {
        self.verts
            .iter()
            .fold(Vector2::ZERO, |a, &v| a + t.vertices[v].pos)
            * 0.25
    }
}

#[derive(Debug, Clone)]
pub struct Tiling {
    pub spec: MultigridSpec,
    pub vertices: Vec<Vertex>,
    pub tiles: Vec<Tile>,
}

/// Dualizes a regular multigrid.
pub fn dualize(spec: &MultigridSpec) -> Result<Tiling> {
    let report = check_regularity(spec);
    if !report.is_regular() {
        let (a, _) = report.flagged[0];
        return Err(Error::SingularMultigrid(format!(
            "{} near-coincident intersections, first near ({:.6}, {:.6})",
            report.flagged_count, a.point.x, a.point.y
        )));
    }
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut tiles = Vec::new();
    for x in spec.intersections() {
        let [j, l] = x.families;
        let mut base = spec.index_vector(x.point);
        base[j] = x.indices[0];
        base[l] = x.indices[1];
        let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let mut verts = [0usize; 4];
        for (c, &(dj, dl)) in corners.iter().enumerate() {
            let mut k = base.clone();
            k[j] += dj;
            k[l] += dl;
            let next = vertices.len();
            let id = *index.entry(k.clone()).or_insert(next);
            if id == next {
                let pos = spec.vertex_position(&k);
                vertices.push(Vertex { k, pos });
            }
            verts[c] = id;
        }
        tiles.push(Tile {
            families: x.families,
            indices: x.indices,
            verts,
            dual_point: x.point,
        });
    }
    Ok(Tiling {
        spec: spec.clone(),
        vertices,
        tiles,
    })
}

impl Tiling {
    /// Reassembles a tiling from stored parts and re-checks its invariants.
    pub fn from_parts(spec: MultigridSpec, vertices: Vec<Vertex>, raw: Vec<([usize; 2], [i64; 2], [usize; 4])>) -> Result<Tiling> {
        let r = spec.r();
        let tiles = raw
            .into_iter()
            .enumerate()
            .map(|(i, (families, indices, verts))| {
                if families[0] >= r || families[1] >= r || families[0] == families[1] {
                    return Err(Error::invalid(format!("tile {i}: bad family pair")));
                }
                if verts.iter().any(|&v| v >= vertices.len()) {
                    return Err(Error::invalid(format!("tile {i}: missing vertex")));
                }
                Ok(Tile {
                    families,
                    indices,
                    verts,
                    dual_point: spec.intersection(families[0], families[1], indices[0], indices[1]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let t = Tiling {
            spec,
            vertices,
            tiles,
        };
        t.validate()?;
        Ok(t)
    }

    /// Checks vertex positions, tile shapes, index steps and edge sharing.
    pub fn validate(&self) -> Result<()> {
        let r = self.spec.r();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.k.len() != r {
                return Err(Error::invalid(format!("vertex {i}: index vector has wrong length")));
            }
            if v.pos.dist(self.spec.vertex_position(&v.k)) > 1e-9 * (1.0 + v.pos.norm()) {
                return Err(Error::invalid(format!("vertex {i}: position does not match its index vector")));
            }
        }
        let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, t) in self.tiles.iter().enumerate() {
            let [j, l] = t.families;
            let (vj, vl) = (self.spec.families[j].edge, self.spec.families[l].edge);
            let p: Vec<Vector2> = t.verts.iter().map(|&v| self.vertices[v].pos).collect();
            let sides = [(p[1] - p[0], vj), (p[2] - p[1], vl), (p[2] - p[3], vj), (p[3] - p[0], vl)];
            if sides.iter().any(|(a, b)| a.dist(*b) > 1e-9) {
                return Err(Error::invalid(format!("tile {i}: not a parallelogram with edges v_{j}, v_{l}")));
            }
            let k0 = &self.vertices[t.verts[0]].k;
            let steps = [(1, 0), (1, 1), (0, 1)];
            for (c, &(dj, dl)) in steps.iter().enumerate() {
                let kc = &self.vertices[t.verts[c + 1]].k;
                let ok = (0..r).all(|s| {
                    let d = if s == j { dj } else if s == l { dl } else { 0 };
                    kc[s] - k0[s] == d
                });
                if !ok {
                    return Err(Error::invalid(format!("tile {i}: index vectors are not those of a tile")));
                }
            }
            for e in 0..4 {
                let (a, b) = (t.verts[e], t.verts[(e + 1) % 4]);
                let n = edge_use.entry((a.min(b), a.max(b))).or_insert(0);
                *n += 1;
                if *n > 2 {
                    return Err(Error::invalid(format!("tile {i}: edge shared by more than two tiles")));
                }
            }
        }
        Ok(())
    }

    /// Tiles of every grid line `(family, index)`.
    pub fn ribbon_index(&self) -> BTreeMap<(usize, i64), Vec<usize>> {
        let mut map: BTreeMap<(usize, i64), Vec<usize>> = BTreeMap::new();
        for (i, t) in self.tiles.iter().enumerate() {
            for s in 0..2 {
                map.entry((t.families[s], t.indices[s])).or_default().push(i);
            }
        }
        map
    }

    pub fn tile_angles(&self) -> Vec<f64> {
        self.tiles
            .iter()
            .map(|t| {
                let (a, b) = (self.spec.families[t.families[0]].edge, self.spec.families[t.families[1]].edge);
                math::atan2(a.cross(b).abs(), a.dot(b))
            })
            .collect()
    }

    pub fn window(&self) -> Window {
        Window::bounding(&self.vertices.iter().map(|v| v.pos).collect::<Vec<_>>())
    }

    /// Vertices within distance `radius` of the origin.
    pub fn vertices_within(&self, radius: f64) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].pos.norm() <= radius)
            .collect()
    }
}

/// Vertex-edge framework of a tiling, joints in vertex order.
pub fn framework_of(t: &Tiling) -> Result<FiniteFramework> {
    let mut seen = BTreeSet::new();
    let mut bars = Vec::new();
    for tile in &t.tiles {
        for e in 0..4 {
            let (a, b) = (tile.verts[e], tile.verts[(e + 1) % 4]);
            if seen.insert((a.min(b), a.max(b))) {
                bars.push((a, b));
            }
        }
    }
    FiniteFramework::new(t.vertices.iter().map(|v| v.pos).collect(), bars)
}

/// The chain of tiles dual to one grid line.
#[derive(Debug, Clone)]
pub struct Ribbon {
    pub family: usize,
    pub index: i64,
    /// Tiles ordered along the grid line.
    pub tiles: Vec<usize>,
    /// Total-least-squares line through the tile centres.
    pub fitted: ProjLine,
    /// Asymptotic direction from the crossing densities.
    pub direction: ProjLine,
    /// `sum_{l != j} <d_j, n_l> v_l`.
    pub analytic: ProjLine,
    /// Set when `fitted` and `direction` differ by more than half a degree.
    pub fit_disagrees: bool,
}

/// Minimum tile count for a ribbon to enter a ribbon figure.
pub const MIN_RIBBON_TILES: usize = 20;
const FIT_AGREEMENT: f64 = 0.5 * PI / 180.0;

pub fn extract_ribbon(t: &Tiling, j: usize, k: i64) -> Result<Ribbon> {
    if j >= t.spec.r() {
        return Err(Error::invalid("no such family"));
    }
    let members: Vec<usize> = t
        .tiles
        .iter()
        .enumerate()
        .filter(|(_, tile)| (0..2).any(|s| tile.families[s] == j && tile.indices[s] == k))
        .map(|(i, _)| i)
        .collect();
    ribbon_from_tiles(t, j, k, members)
}

fn ribbon_from_tiles(t: &Tiling, j: usize, k: i64, mut members: Vec<usize>) -> Result<Ribbon> {
    if members.len() < 3 {
        return Err(Error::WindowTooSmall);
    }
    let d = t.spec.line_direction(j);
    members.sort_by(|&a, &b| {
        t.tiles[a]
            .dual_point
            .dot(d)
            .partial_cmp(&t.tiles[b].dual_point.dot(d))
            .unwrap()
    });
    let centers: Vec<Vector2> = members.iter().map(|&i| t.tiles[i].center(t)).collect();
    let fitted = total_least_squares(&centers)?;

    // Crossings with family l are equally spaced along the grid line, so
    // (count - 1) / span is the exact crossing density of that family.
    let mut per_family: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for &i in &members {
        let tile = &t.tiles[i];
        let l = if tile.families[0] == j { tile.families[1] } else { tile.families[0] };
        let s = tile.dual_point.dot(d);
        let e = per_family.entry(l).or_insert((s, s, 0));
        e.0 = e.0.min(s);
        e.1 = e.1.max(s);
        e.2 += 1;
    }
    let mut dir = Vector2::ZERO;
    for (&l, &(lo, hi, count)) in &per_family {
        if count < 2 || hi - lo <= 0.0 {
            continue;
        }
        let f = &t.spec.families[l];
        let sgn = d.dot(f.normal).signum();
        dir += f.edge * (sgn * (count - 1) as f64 / (hi - lo));
    }
    let analytic = analytic_ribbon_direction(&t.spec, j)?;
    let direction = ProjLine::from_direction(dir).unwrap_or(analytic);
    let fit_disagrees = direction.angle_to(&fitted) > FIT_AGREEMENT;
    Ok(Ribbon {
        family: j,
        index: k,
        tiles: members,
        fitted,
        direction,
        analytic,
        fit_disagrees,
    })
}

/// Principal axis of a point cloud.
pub fn total_least_squares(points: &[Vector2]) -> Result<ProjLine> {
    if points.len() < 2 {
        return Err(Error::WindowTooSmall);
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vector2::ZERO, |a, &p| a + p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let q = *p - mean;
        sxx += q.x * q.x;
        sxy += q.x * q.y;
        syy += q.y * q.y;
    }
    Ok(ProjLine::from_angle(0.5 * math::atan2(2.0 * sxy, sxx - syy)))
}

pub fn analytic_ribbon_direction(spec: &MultigridSpec, j: usize) -> Result<ProjLine> {
    let d = spec.line_direction(j);
    let v = spec
        .families
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != j)
        .fold(Vector2::ZERO, |acc, (_, f)| acc + f.edge * d.dot(f.normal));
    ProjLine::from_direction(v)
}

/// Ribbon figure with the per-family directions it was built from.
#[derive(Debug, Clone)]
pub struct RibbonFigure {
    pub figure: LineFigure,
    pub per_family: Vec<ProjLine>,
    /// Largest angular spread of the ribbon directions used per family.
    pub spread: f64,
    pub ribbons_used: Vec<usize>,
}

/// Median ribbon direction per family over the longer ribbons (at least
/// [`MIN_RIBBON_TILES`] tiles and at least half the longest).
pub fn ribbon_figure(t: &Tiling) -> Result<RibbonFigure> {
    let index = t.ribbon_index();
    let mut per_family = Vec::new();
    let mut spread = 0.0f64;
    let mut used = Vec::new();
    for j in 0..t.spec.r() {
        let lines: Vec<(&(usize, i64), &Vec<usize>)> = index.iter().filter(|((f, _), _)| *f == j).collect();
        let longest = lines.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let min_len = MIN_RIBBON_TILES.max(longest / 2).min(longest);
        let mut dirs = Vec::new();
        for (&(_, k), tiles) in &lines {
            if tiles.len() >= min_len.max(3) {
                dirs.push(ribbon_from_tiles(t, j, k, (*tiles).clone())?.direction);
            }
        }
        if dirs.len() < 3 {
            return Err(Error::WindowTooSmall);
        }
        let reference = dirs[0].angle();
        let mut devs: Vec<f64> = dirs
            .iter()
            .map(|l| signed_angle(reference, l.angle()))
            .collect();
        devs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = devs[devs.len() / 2];
        spread = spread.max(devs[devs.len() - 1] - devs[0]);
        used.push(dirs.len());
        per_family.push(ProjLine::from_angle(reference + med));
    }
    let figure = LineFigure::from_lines(per_family.iter().copied());
    Ok(RibbonFigure {
        figure,
        per_family,
        spread,
        ribbons_used: used,
    })
}

/// `b - a` reduced to `(-pi/2, pi/2]`.
fn signed_angle(a: f64, b: f64) -> f64 {
    let d = normalize_angle(b - a);
    if d > PI / 2.0 {
        d - PI
    } else {
        d
    }
}

fn check_shear(t: &Tiling, j: usize, b: Vector2) -> Result<()> {
    if j >= t.spec.r() {
        return Err(Error::invalid("no such family"));
    }
    let v = t.spec.families[j].edge;
    if b.dot(v).abs() > 1e-12 * b.norm().max(1.0) * v.norm().max(1.0) {
        return Err(Error::NotAShear);
    }
    Ok(())
}

fn indicator_field(t: &Tiling, b: Vector2, f: impl Fn(&[i64]) -> Option<Complex64>) -> VelocityField {
    let bv = cvec(b);
    VelocityField {
        values: t
            .vertices
            .iter()
            .map(|v| match f(&v.k) {
                Some(s) => [s * bv[0], s * bv[1]],
                None => [Complex64::new(0.0, 0.0); 2],
            })
            .collect(),
    }
}

/// `b` on the side `K_j >= k + 1` of ribbon `(j, k)`, zero on the other.
pub fn shear_flex(t: &Tiling, j: usize, k: i64, b: Vector2) -> Result<VelocityField> {
    check_shear(t, j, b)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(indicator_field(t, b, |kv| (kv[j] >= k + 1).then_some(one)))
}

/// `b` between ribbons `k1` and `k2` of family `j` (`k1 + 1 <= K_j <= k2`).
pub fn pair_slippage_flex(t: &Tiling, j: usize, k1: i64, k2: i64, b: Vector2) -> Result<VelocityField> {
    check_shear(t, j, b)?;
    if k1 >= k2 {
        return Err(Error::invalid("pair slippage needs k1 < k2"));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(indicator_field(t, b, |kv| (kv[j] > k1 && kv[j] <= k2).then_some(one)))
}

/// `lambda^{floor(K_j / N)} b`.
pub fn modulated_ribbon_flex(t: &Tiling, j: usize, n: i64, lambda: Complex64, b: Vector2) -> Result<VelocityField> {
    check_shear(t, j, b)?;
    if n < 2 {
        return Err(Error::invalid("band width N must be at least 2"));
    }
    if (math::modulus(lambda) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("lambda must be unimodular"));
    }
    Ok(indicator_field(t, b, |kv| Some(cpow(lambda, kv[j].div_euclid(n)))))
}

/// Linear functional `phi(p) = <w, p> + c` approximating `K_j` at the vertex
/// at `p`: `w = L^{-T} n_j`, `c = <w, sum_i (gamma_i - 1/2) v_i> - gamma_j + 1/2`.
pub fn family_phase(spec: &MultigridSpec, j: usize) -> Result<(Vector2, f64)> {
    let l = spec.edge_normal_map();
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::SingularMatrix);
    }
    let n = spec.families[j].normal;
    // solve L^T w = n
    let w = Vector2::new(
        (l[1][1] * n.x - l[1][0] * n.y) / det,
        (-l[0][1] * n.x + l[0][0] * n.y) / det,
    );
    let shift = spec
        .families
        .iter()
        .fold(Vector2::ZERO, |acc, f| acc + f.edge * (f.offset - 0.5));
    Ok((w, w.dot(shift) - spec.families[j].offset + 0.5))
}

/// Replaces every normal by its nearest point of `(1/q) Z^2` (skipping
/// points parallel to an earlier replacement); the result has a periodic
/// dual. Returns the new spec and the angular deviation of each normal.
///
/// Rational grids with simple offsets tend to have triple points; when the
/// result is not regular the offsets are nudged (by at most 0.05 each, along
/// a fixed quasi-random sequence) until it is. Line directions do not depend
/// on the offsets.
pub fn rational_approximant(spec: &MultigridSpec, q: i64) -> Result<(MultigridSpec, Vec<f64>)> {
    if q < 1 {
        return Err(Error::invalid("q must be positive"));
    }
    let qf = q as f64;
    let mut devs = Vec::new();
    let mut chosen: Vec<Vector2> = Vec::new();
    for f in &spec.families {
        let target = f.normal * qf;
        let (cx, cy) = (target.x.round() as i64, target.y.round() as i64);
        let mut candidates: Vec<Vector2> = Vec::new();
        for dx in -2..=2 {
            for dy in -2..=2 {
                let p = Vector2::new((cx + dx) as f64, (cy + dy) as f64);
                if p.norm() > 0.0 && p.x.abs() <= 4.0 * qf && p.y.abs() <= 4.0 * qf {
                    candidates.push(p);
                }
            }
        }
        candidates.sort_by(|a, b| a.dist(target).partial_cmp(&b.dist(target)).unwrap());
        let p = candidates
            .into_iter()
            .find(|p| chosen.iter().all(|c| c.cross(*p).abs() > 1e-9))
            .ok_or_else(|| Error::invalid("no admissible rational normal"))?;
        chosen.push(p);
        let line = |v: Vector2| ProjLine::from_direction(v).expect("nonzero");
        devs.push(line(p).angle_to(&line(f.normal)));
    }
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let r = spec.families.len();
    for attempt in 0..APPROXIMANT_ATTEMPTS {
        let families = spec
            .families
            .iter()
            .zip(&chosen)
            .enumerate()
            .map(|(j, (f, p))| {
                let nudge = if attempt == 0 {
                    0.0
                } else {
                    0.1 * (crate::symbol::frac(((attempt * r + j) as f64 + 1.0) * GOLDEN) - 0.5)
                };
                GridFamily {
                    normal: *p * (1.0 / qf),
                    offset: f.offset + nudge,
                    edge: f.edge,
                }
            })
            .collect();
        let candidate = MultigridSpec::new(families, spec.window)?;
        if check_regularity(&candidate).is_regular() {
            return Ok((candidate, devs));
        }
    }
    Err(Error::SingularMultigrid(format!(
        "no regular offsets found for the q = {q} approximant"
    )))
}

/// Crystal form of a periodic tiling: motif = one representative per
/// translation class of vertices in the central part of the window.
pub fn crystal_form(t: &Tiling) -> Result<CrystalFramework> {
    let spec = &t.spec;
    let [x1, x2] = spec
        .period_lattice(64)
        .ok_or_else(|| Error::invalid("multigrid is not periodic"))?;
    let kshift = |x: Vector2| -> Vec<i64> {
        spec.families.iter().map(|f| x.dot(f.normal).round() as i64).collect()
    };
    let (p1, p2) = (kshift(x1), kshift(x2));
    let basis = Basis2::new(spec.vertex_position(&p1), spec.vertex_position(&p2))?;
    let margin = 2.0 * (basis.a1.norm() + basis.a2.norm()) + 2.0 * spec.max_edge();
    let radius = spec.window - margin;
    if radius < basis.a1.norm() + basis.a2.norm() {
        return Err(Error::WindowTooSmall);
    }
    let mut reps: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut joints = Vec::new();
    let mut label: Vec<Option<(usize, [i64; 2])>> = vec![None; t.vertices.len()];
    for (i, v) in t.vertices.iter().enumerate() {
        if v.pos.norm() > radius {
            continue;
        }
        let (s1, s2) = basis.coefficients(v.pos)?;
        let cell = [(s1 + 1e-9).floor() as i64, (s2 + 1e-9).floor() as i64];
        let k: Vec<i64> = (0..spec.r())
            .map(|s| v.k[s] - cell[0] * p1[s] - cell[1] * p2[s])
            .collect();
        let next = joints.len();
        let id = *reps.entry(k).or_insert(next);
        if id == next {
            joints.push(v.pos - basis.lattice(cell));
        }
        label[i] = Some((id, cell));
    }
    let fw = framework_of(t)?;
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for &(a, b) in fw.bars() {
        if let (Some((ka, ca)), Some((kb, cb))) = (label[a], label[b]) {
            let e = MotifEdge::new(ka, kb, [cb[0] - ca[0], cb[1] - ca[1]]);
            let rev = (kb, ka, [ca[0] - cb[0], ca[1] - cb[1]]);
            let key = (e.from, e.to, e.offset).min(rev);
            if seen.insert(key) {
                edges.push(e);
            }
        }
    }
    CrystalFramework::new(basis, joints, edges)
}
