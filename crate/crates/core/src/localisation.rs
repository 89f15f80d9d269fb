//! Linearly localised flexes from spectral lines, local flexes from full
//! spectra, and the reverse passage from a localised flex to phase-periodic
//! flexes.
//!
//! Bands run along `a1`. A band flex of height `m` lives on the joints
//! `(kappa, (k1, k2))` with `0 <= k2 < m`, is `lambda1`-phase-periodic in `k1`
//! and vanishes on every joint of a bar leaving the band.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::framework::{cnorm, CVec2, CrystalFramework, KRange, Realization, VelocityField, CZERO2};
use crate::geometry::{IntegralMatrix2, ProjLine, Vector2};
use crate::linalg::{self, CMatrix};
use crate::symbol::{self, cpow, golden_samples, SpectralLine};
use crate::math;

/// Residual bound for accepted flexes.
pub const FLEX_TOL: f64 = 1e-9;
const SUPPORT_TOL: f64 = 1e-9;

/// The band `0 <= k2 < m` with phase `lambda1` along `a1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub m: usize,
    pub lambda1: Complex64,
}

/// Joints `(kappa, k2)` of the band that sit on a bar leaving it, with the
/// outer endpoint reduced mod `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapSet {
    pub joints: Vec<(usize, i64)>,
}

impl OverlapSet {
    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }
}

fn col(m: usize, kappa: usize, k2: i64) -> usize {
    2 * (kappa * m + k2 as usize)
}

/// Constraint matrix of the band problem: flex rows for bars inside the band
/// and unit rows pinning the overlap joints to zero.
fn band_system(c: &CrystalFramework, spec: BandSpec) -> (CMatrix, OverlapSet) {
    let m = spec.m as i64;
    let n = c.num_motif_joints();
    let reach = c.max_offset()[1];
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut pinned = BTreeSet::new();
    let zero_row = || vec![Complex64::zero(); 2 * n * spec.m];
    for e in c.motif_edges() {
        let b = c.bar_vector(e);
        for k2 in -reach..m + reach {
            let t2 = k2 + e.offset[1];
            let (src_in, tgt_in) = (0 <= k2 && k2 < m, 0 <= t2 && t2 < m);
            if src_in && tgt_in {
                let mut row = zero_row();
                let w = cpow(spec.lambda1, e.offset[0]);
                let (a, z) = (col(spec.m, e.from, k2), col(spec.m, e.to, t2));
                row[a] += b.x;
                row[a + 1] += b.y;
                row[z] -= w * b.x;
                row[z + 1] -= w * b.y;
                rows.push(row);
            } else if src_in || tgt_in {
                pinned.insert((e.from, k2.rem_euclid(m)));
                pinned.insert((e.to, t2.rem_euclid(m)));
            }
        }
    }
    for &(kappa, k2) in &pinned {
        for d in 0..2 {
            let mut row = zero_row();
            row[col(spec.m, kappa, k2) + d] = Complex64::new(1.0, 0.0);
            rows.push(row);
        }
    }
    let mat = if rows.is_empty() {
        CMatrix::zeros(0, 2 * n * spec.m)
    } else {
        CMatrix::from_rows(&rows)
    };
    (
        mat,
        OverlapSet {
            joints: pinned.into_iter().collect(),
        },
    )
}

pub fn overlap_set(c: &CrystalFramework, m: usize) -> OverlapSet {
    band_system(c, BandSpec { m, lambda1: Complex64::new(1.0, 0.0) }).1
}

/// Solves `mat x = 0` for a sparse nonzero `x`: kernel basis, sparsest
/// combination, then a re-solve on that support.
fn sparse_kernel_vector(mat: &CMatrix, tol: f64) -> Option<Vec<Complex64>> {
    let svd = linalg::svd(mat);
    // wide matrices report their surplus columns as zero singular values
    let kernel = svd.null_space(tol);
    let v = linalg::sparsest_in_span(&kernel, SUPPORT_TOL)?;
    let scale = linalg::max_abs(&v);
    let support: Vec<usize> = (0..v.len())
        .filter(|&i| math::modulus(v[i]) > SUPPORT_TOL * scale)
        .collect();
    let sub = mat.select_columns(&support);
    let sub_svd = linalg::svd(&sub);
    let refined = if sub_svd.smallest() <= tol || sub.rows() < sub.cols() {
        let w = &sub_svd.v[0];
        let mut full = vec![Complex64::zero(); v.len()];
        for (k, &i) in support.iter().enumerate() {
            full[i] = w[k];
        }
        full
    } else {
        v
    };
    let mut out = refined;
    linalg::normalize_max(&mut out);
    Some(out)
}

/// A band flex: per-row velocities `w(kappa, k2)` for `0 <= k2 < m`; the
/// field is `lambda1^k1 w(kappa, k2)` on the band and zero elsewhere.
#[derive(Debug, Clone)]
pub struct BandFlex {
    pub crystal: CrystalFramework,
    pub gamma1: f64,
    pub lambda1: Complex64,
    pub m: usize,
    pub rows: Vec<CVec2>,
    pub overlap: OverlapSet,
    pub residual: f64,
}

impl BandFlex {
    pub fn value(&self, kappa: usize, k: [i64; 2]) -> CVec2 {
        if k[1] < 0 || k[1] >= self.m as i64 {
            return CZERO2;
        }
        let w = cpow(self.lambda1, k[0]);
        let r = self.rows[kappa * self.m + k[1] as usize];
        [w * r[0], w * r[1]]
    }

    /// Window spanning five periods along the band and the band plus a
    /// margin across it.
    pub fn check_window(&self) -> KRange {
        let reach = self.crystal.max_offset()[1] + 1;
        KRange::new([-2, -reach], [3, self.m as i64 + reach])
    }

    pub fn realize(&self, range: KRange) -> Result<(Realization, VelocityField)> {
        let r = self.crystal.realize_window(range)?;
        let f = r.field(|kappa, k| self.value(kappa, k));
        Ok((r, f))
    }

    /// Largest distance from the line `R a1` of a joint of the band.
    pub fn localisation_bound(&self) -> f64 {
        let a = self.crystal.basis();
        let h = ProjLine::from_direction(a.a1).expect("nonzero basis vector");
        let mut bound = 0.0f64;
        for p in self.crystal.motif_joints() {
            for k2 in [0, self.m as i64 - 1] {
                bound = bound.max(h.distance(*p + a.a2 * k2 as f64));
            }
        }
        bound
    }

    /// The phase-periodic flex `sum_k lambda2^k T_{(0,k)} z` on `window`.
    pub fn synthesize(&self, lambda2: Complex64, window: KRange) -> Result<(Realization, VelocityField)> {
        let (zr, zf) = self.realize(KRange::new([0, 0], [1, self.m as i64]))?;
        synthesize_ifm(&self.crystal, &zr, &zf, self.lambda1, lambda2, window)
    }
}

/// Finds a flex localised along `R a1` that is `e^{2 pi i gamma1}`-phase
/// periodic along `a1`, trying band heights `2, 4, 8, ..., m_max`.
pub fn extract_band_flex(c: &CrystalFramework, gamma1: f64, m_max: usize, tol: f64) -> Result<BandFlex> {
    if m_max < 2 {
        return Err(Error::invalid("m_max must be at least 2"));
    }
    if golden_samples(10).any(|t| symbol::sigma_min(c, [gamma1, t]) > tol) {
        return Err(Error::LineNotInSpectrum);
    }
    let lambda1 = math::cis(2.0 * core::f64::consts::PI * gamma1);
    let n = c.num_motif_joints();
    let mut m = 2;
    while m <= m_max {
        let (mat, overlap) = band_system(c, BandSpec { m, lambda1 });
        if let Some(v) = sparse_kernel_vector(&mat, tol) {
            let rows = (0..n * m).map(|i| [v[2 * i], v[2 * i + 1]]).collect();
            let mut band = BandFlex {
                crystal: c.clone(),
                gamma1,
                lambda1,
                m,
                rows,
                overlap,
                residual: f64::INFINITY,
            };
            let (r, f) = band.realize(band.check_window())?;
            let residual = r.framework.flex_residual_max(&f)?;
            let periodic = phase_periodic_along(&r, &f, 0, lambda1) <= 1e-10;
            if residual <= FLEX_TOL && periodic && f.max_norm() > 0.5 {
                band.residual = residual;
                return Ok(band);
            }
        }
        m *= 2;
    }
    Err(Error::MmaxExhausted(m / 2))
}

/// Largest `|u(kappa, k + e_axis) - lambda u(kappa, k)|` inside a realization.
pub fn phase_periodic_along(r: &Realization, u: &VelocityField, axis: usize, lambda: Complex64) -> f64 {
    let mut worst = 0.0f64;
    for (i, &(kappa, k)) in r.labels.iter().enumerate() {
        let mut next = k;
        next[axis] += 1;
        if let Some(j) = r.index_of(kappa, next) {
            for d in 0..2 {
                worst = worst.max(math::modulus(u.values[j][d] - lambda * u.values[i][d]));
            }
        }
    }
    worst
}

/// A band flex for an arbitrary rational spectral line, computed in a basis
/// in which the line becomes `{gamma_1 = offset}`.
#[derive(Debug, Clone)]
pub struct LineLocalisation {
    pub line: SpectralLine,
    /// `Z` with `a*_i = Z_i1 a1 + Z_i2 a2`; wave vectors map as `Z gamma`.
    pub z: IntegralMatrix2,
    pub band: BandFlex,
}

impl LineLocalisation {
    /// Wave vector, in the original basis, of the multiphase
    /// `(lambda1, e^{2 pi i t})` in the aligned basis.
    pub fn gamma_for(&self, t: f64) -> Result<[f64; 2]> {
        let zi = self.z.inverse()?;
        let g = zi.apply(Vector2::new(self.band.gamma1, t));
        Ok([g.x, g.y])
    }

    /// The ambient line along which the flex is localised.
    pub fn ambient_line(&self) -> ProjLine {
        ProjLine::from_direction(self.band.crystal.basis().a1).expect("nonzero basis vector")
    }
}

pub fn localise_line(c: &CrystalFramework, line: &SpectralLine, m_max: usize, tol: f64) -> Result<LineLocalisation> {
    let z = IntegralMatrix2::aligning(line.direction)?;
    let aligned = c.change_basis(&z)?;
    let band = extract_band_flex(&aligned, line.offset, m_max, tol)?;
    Ok(LineLocalisation { line: *line, z, band })
}

/// A finitely supported flex on the `m x m` block of cells `[0, m)^2`.
#[derive(Debug, Clone)]
pub struct LocalFlex {
    pub crystal: CrystalFramework,
    pub m: usize,
    /// Indexed `kappa * m^2 + k1 * m + k2`.
    pub values: Vec<CVec2>,
    pub residual: f64,
}

impl LocalFlex {
    pub fn value(&self, kappa: usize, k: [i64; 2]) -> CVec2 {
        let m = self.m as i64;
        if k[0] < 0 || k[1] < 0 || k[0] >= m || k[1] >= m {
            return CZERO2;
        }
        self.values[kappa * self.m * self.m + (k[0] * m + k[1]) as usize]
    }

    pub fn realize(&self, range: KRange) -> Result<(Realization, VelocityField)> {
        let r = self.crystal.realize_window(range)?;
        let f = r.field(|kappa, k| self.value(kappa, k));
        Ok((r, f))
    }

    pub fn check_window(&self) -> KRange {
        let reach = self.crystal.max_offset();
        let p = reach[0].max(reach[1]) + 1;
        KRange::new([-p, -p], [self.m as i64 + p, self.m as i64 + p])
    }
}

fn torus_system(c: &CrystalFramework, m: usize) -> CMatrix {
    let mi = m as i64;
    let n = c.num_motif_joints();
    let ncols = 2 * n * m * m;
    let idx = |kappa: usize, k: [i64; 2]| {
        2 * (kappa * m * m + (k[0].rem_euclid(mi) * mi + k[1].rem_euclid(mi)) as usize)
    };
    let inside = |k: [i64; 2]| (0..mi).contains(&k[0]) && (0..mi).contains(&k[1]);
    let reach = c.max_offset();
    let r = reach[0].max(reach[1]);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut pinned = BTreeSet::new();
    for e in c.motif_edges() {
        let b = c.bar_vector(e);
        for k1 in -r..mi + r {
            for k2 in -r..mi + r {
                let s = [k1, k2];
                let t = [k1 + e.offset[0], k2 + e.offset[1]];
                match (inside(s), inside(t)) {
                    (true, true) => {
                        let mut row = vec![Complex64::zero(); ncols];
                        let (a, z) = (idx(e.from, s), idx(e.to, t));
                        row[a] += b.x;
                        row[a + 1] += b.y;
                        row[z] -= b.x;
                        row[z + 1] -= b.y;
                        rows.push(row);
                    }
                    (true, false) | (false, true) => {
                        pinned.insert(idx(e.from, s));
                        pinned.insert(idx(e.to, t));
                    }
                    _ => {}
                }
            }
        }
    }
    for &c0 in &pinned {
        for d in 0..2 {
            let mut row = vec![Complex64::zero(); ncols];
            row[c0 + d] = Complex64::new(1.0, 0.0);
            rows.push(row);
        }
    }
    if rows.is_empty() {
        CMatrix::zeros(0, ncols)
    } else {
        CMatrix::from_rows(&rows)
    }
}

/// Finds a finitely supported flex of a crystal whose spectrum is the whole
/// torus.
pub fn extract_local_flex(c: &CrystalFramework, m_max: usize, tol: f64) -> Result<LocalFlex> {
    if m_max < 2 {
        return Err(Error::invalid("m_max must be at least 2"));
    }
    let scan = symbol::scan_spectrum(c, 16, tol)?;
    if !scan.is_full() {
        return Err(Error::ProperSpectrum);
    }
    let n = c.num_motif_joints();
    let mut m = 2;
    while m <= m_max {
        let mat = torus_system(c, m);
        if let Some(v) = sparse_kernel_vector(&mat, tol) {
            let values = (0..n * m * m).map(|i| [v[2 * i], v[2 * i + 1]]).collect();
            let mut flex = LocalFlex {
                crystal: c.clone(),
                m,
                values,
                residual: f64::INFINITY,
            };
            let (r, f) = flex.realize(flex.check_window())?;
            let residual = r.framework.flex_residual_max(&f)?;
            if residual <= FLEX_TOL && f.max_norm() > 0.5 {
                flex.residual = residual;
                return Ok(flex);
            }
        }
        m *= 2;
    }
    Err(Error::MmaxExhausted(m / 2))
}

/// `u = sum_k lambda2^k T_{(0,k)} z` evaluated on `window`, where `z` is a
/// field on the realization `zr` that is localised along `a1` and
/// `lambda1`-phase-periodic in `k1`. The result has multiphase
/// `(lambda1, lambda2)`: `u(kappa, k + e_i) = lambda_i u(kappa, k)`.
pub fn synthesize_ifm(
    c: &CrystalFramework,
    zr: &Realization,
    z: &VelocityField,
    lambda1: Complex64,
    lambda2: Complex64,
    window: KRange,
) -> Result<(Realization, VelocityField)> {
    if z.len() != zr.labels.len() {
        return Err(Error::MissingJoint(z.len().min(zr.labels.len())));
    }
    for l in [lambda1, lambda2] {
        if (math::modulus(l) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("phases must be unimodular"));
        }
    }
    let support = z.support(1e-12);
    let rows: Vec<i64> = support.iter().map(|&i| zr.labels[i].1[1]).collect();
    if let (Some(&lo), Some(&hi)) = (rows.iter().min(), rows.iter().max()) {
        if lo <= zr.range.lo[1] && hi >= zr.range.hi[1] - 1 && zr.range.dims()[1] > 1 {
            return Err(Error::NotLocalised);
        }
    }
    // profile w(kappa, k2) = lambda1^{-k1} z(kappa, (k1, k2)) on one column
    let k1ref = zr.range.lo[0];
    let unphase = cpow(lambda1, -k1ref);
    let mut profile: Vec<(usize, i64, CVec2)> = Vec::new();
    for &i in &support {
        let (kappa, k) = zr.labels[i];
        if k[0] == k1ref {
            let v = z.values[i];
            profile.push((kappa, k[1], [unphase * v[0], unphase * v[1]]));
        }
    }
    let r = c.realize_window(window)?;
    let f = r.field(|kappa, k| {
        let mut acc = CZERO2;
        for &(kk, k2, w) in &profile {
            if kk == kappa {
                let s = cpow(lambda1, k[0]) * cpow(lambda2, k[1] - k2);
                acc[0] += s * w[0];
                acc[1] += s * w[1];
            }
        }
        acc
    });
    Ok((r, f))
}

/// True iff every joint carrying velocity above `1e-12` lies within `bound`
/// of the line `h`.
pub fn verify_localisation(joints: &[Vector2], u: &VelocityField, h: &ProjLine, bound: f64) -> bool {
    joints
        .iter()
        .zip(&u.values)
        .all(|(p, v)| cnorm(v) <= 1e-12 || h.distance(*p) <= bound)
}
