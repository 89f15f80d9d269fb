//! The symbol matrix of the flex condition under the multiphase ansatz
//! `u_{kappa,k} = omega^k u_{kappa,0}`, torus scans of its smallest singular
//! value, and spectral line detection.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::framework::{CVec2, CrystalFramework, KRange, Realization, VelocityField};
use crate::geometry::{gcd, LineFigure, ProjLine, Vector2};
use crate::linalg::{self, CMatrix};
use crate::math;

/// `(e^{2 pi i gamma_1}, e^{2 pi i gamma_2})`.
pub fn multiphase(gamma: [f64; 2]) -> [Complex64; 2] {
    [
        math::cis(2.0 * PI * gamma[0]),
        math::cis(2.0 * PI * gamma[1]),
    ]
}

/// `x mod 1` in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `omega^delta`.
pub fn phase_power(omega: [Complex64; 2], delta: [i64; 2]) -> Complex64 {
    cpow(omega[0], delta[0]) * cpow(omega[1], delta[1])
}

pub(crate) fn cpow(z: Complex64, k: i64) -> Complex64 {
    if k >= 0 {
        z.powu(k as u32)
    } else {
        z.conj().powu((-k) as u32)
    }
}

#[derive(Debug, Clone)]
pub struct SymbolEvaluation {
    pub omega: [Complex64; 2],
    pub matrix: CMatrix,
    pub sigma_min: f64,
}

/// Assembles the `|E| x 2n` symbol matrix. Row `e` carries `+b_e` on the
/// columns of `from` and `-omega^delta b_e` on the columns of `to`.
pub fn symbol_matrix_raw(c: &CrystalFramework, omega: [Complex64; 2]) -> CMatrix {
    let n = c.num_motif_joints();
    let mut m = CMatrix::zeros(c.motif_edges().len(), 2 * n);
    for (r, e) in c.motif_edges().iter().enumerate() {
        let b = c.bar_vector(e);
        let w = phase_power(omega, e.offset);
        m[(r, 2 * e.from)] += Complex64::new(b.x, 0.0);
        m[(r, 2 * e.from + 1)] += Complex64::new(b.y, 0.0);
        m[(r, 2 * e.to)] -= w * b.x;
        m[(r, 2 * e.to + 1)] -= w * b.y;
    }
    m
}

pub fn symbol_matrix(c: &CrystalFramework, omega: [Complex64; 2]) -> Result<SymbolEvaluation> {
    if omega.iter().any(|w| (math::modulus(*w) - 1.0).abs() > 1e-12) {
        return Err(Error::invalid("multiphase entries must be unimodular"));
    }
    let matrix = symbol_matrix_raw(c, omega);
    let sigma_min = linalg::sigma_min(&matrix);
    Ok(SymbolEvaluation {
        omega,
        matrix,
        sigma_min,
    })
}

/// Smallest singular value of the symbol at the wave vector `gamma`.
pub fn sigma_min(c: &CrystalFramework, gamma: [f64; 2]) -> f64 {
    let g = [frac(gamma[0]), frac(gamma[1])];
    linalg::sigma_min(&symbol_matrix_raw(c, multiphase(g)))
}

/// Default spectrum tolerance `1e-8 * (max bar length)^2`.
pub fn default_tol(c: &CrystalFramework) -> f64 {
    let l = c.max_bar_length();
    if l > 0.0 {
        1e-8 * l * l
    } else {
        1e-8
    }
}

/// Fraction of below-tolerance samples above which the spectrum is reported
/// as the whole torus.
pub const FULL_FRACTION: f64 = 0.99;

/// `sigma_min` on the `R x R` grid `gamma = (i/R, j/R)`, row-major in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScan {
    pub resolution: usize,
    pub samples: Vec<f64>,
    pub tol: f64,
}

impl SpectrumScan {
    pub fn from_rows(resolution: usize, rows: Vec<Vec<f64>>, tol: f64) -> Result<SpectrumScan> {
        if rows.len() != resolution || rows.iter().any(|r| r.len() != resolution) {
            return Err(Error::invalid("scan rows do not match the resolution"));
        }
        Ok(SpectrumScan {
            resolution,
            samples: rows.into_iter().flatten().collect(),
            tol,
        })
    }

    pub fn gamma(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.resolution as f64;
        [i as f64 / r, j as f64 / r]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.resolution + j]
    }

    /// Grid indices of the below-tolerance samples.
    pub fn below_tol(&self) -> Vec<(usize, usize)> {
        let r = self.resolution;
        (0..r * r)
            .filter(|&s| self.samples[s] <= self.tol)
            .map(|s| (s / r, s % r))
            .collect()
    }

    pub fn below_fraction(&self) -> f64 {
        self.below_tol().len() as f64 / self.samples.len() as f64
    }

    pub fn is_full(&self) -> bool {
        self.below_fraction() > FULL_FRACTION
    }

    /// Same samples judged at another tolerance.
    pub fn with_tol(&self, tol: f64) -> SpectrumScan {
        SpectrumScan {
            tol,
            ..self.clone()
        }
    }
}

/// One row `i` of a scan.
pub fn scan_row(c: &CrystalFramework, resolution: usize, i: usize) -> Vec<f64> {
    let r = resolution as f64;
    (0..resolution)
        .map(|j| sigma_min(c, [i as f64 / r, j as f64 / r]))
        .collect()
}

pub fn scan_spectrum(c: &CrystalFramework, resolution: usize, tol: f64) -> Result<SpectrumScan> {
    if resolution < 8 {
        return Err(Error::invalid("scan resolution must be at least 8"));
    }
    let rows = (0..resolution).map(|i| scan_row(c, resolution, i)).collect();
    SpectrumScan::from_rows(resolution, rows, tol)
}

/// A phase-periodic flex on a finite window.
#[derive(Debug, Clone)]
pub struct Ifm {
    pub gamma: [f64; 2],
    pub omega: [Complex64; 2],
    /// Velocities of the motif joints in cell `(0, 0)`.
    pub unit_cell: Vec<CVec2>,
    pub realization: Realization,
    pub field: VelocityField,
}

/// Lifts a kernel vector of the symbol at `gamma` to a field on `window`.
pub fn extract_ifm(c: &CrystalFramework, gamma: [f64; 2], window: KRange, tol: f64) -> Result<Ifm> {
    let omega = multiphase([frac(gamma[0]), frac(gamma[1])]);
    let m = symbol_matrix_raw(c, omega);
    let svd = linalg::svd(&m);
    let sigma = if m.rows() < m.cols() { 0.0 } else { svd.smallest() };
    if sigma > tol {
        return Err(Error::NotInSpectrum(sigma));
    }
    // For wide matrices the smallest right singular vector returned by the
    // solver spans part of the kernel, which is all we need.
    let mut v = svd.v[0].clone();
    linalg::normalize_max(&mut v);
    let unit_cell: Vec<CVec2> = (0..c.num_motif_joints())
        .map(|k| [v[2 * k], v[2 * k + 1]])
        .collect();
    let realization = c.realize_window(window)?;
    let field = realization.field(|kappa, k| {
        let w = phase_power(omega, k);
        [w * unit_cell[kappa][0], w * unit_cell[kappa][1]]
    });
    Ok(Ifm {
        gamma,
        omega,
        unit_cell,
        realization,
        field,
    })
}

/// A line `{gamma : d2 gamma_1 - d1 gamma_2 = offset}` of the periodic
/// spectrum, with primitive integer direction `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub direction: [i64; 2],
    pub offset: f64,
}

impl SpectralLine {
    pub fn line(&self) -> ProjLine {
        ProjLine::from_direction(Vector2::new(self.direction[0] as f64, self.direction[1] as f64))
            .expect("nonzero direction")
    }

    /// Point of the line closest to the origin.
    pub fn base_point(&self) -> [f64; 2] {
        let (d1, d2) = (self.direction[0] as f64, self.direction[1] as f64);
        let n2 = d1 * d1 + d2 * d2;
        [self.offset * d2 / n2, -self.offset * d1 / n2]
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        let b = self.base_point();
        [
            b[0] + t * self.direction[0] as f64,
            b[1] + t * self.direction[1] as f64,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SpectralLineSet {
    pub lines: Vec<SpectralLine>,
    /// Origin parallels of the detected lines.
    pub figure: LineFigure,
    pub rum_dimension: u8,
}

pub const DEFAULT_DENOMINATOR_BOUND: i64 = 12;
pub const REFINEMENT_SAMPLES: usize = 50;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Parameters `frac(s * golden)` for `s = 1..=count`.
pub fn golden_samples(count: usize) -> impl Iterator<Item = f64> {
    (1..=count).map(|s| (s as f64 * GOLDEN).fract())
}

/// Candidate-driven line detection. For each primitive direction `d` with
/// `|d_i| <= bound`, scan points are grouped by the exact offset
/// `d2 i - d1 j mod R`; well-populated offsets are then confirmed by
/// `REFINEMENT_SAMPLES` off-grid evaluations along the line.
pub fn detect_spectral_lines(
    c: &CrystalFramework,
    scan: &SpectrumScan,
    bound: i64,
) -> Result<SpectralLineSet> {
    if scan.is_full() {
        return Err(Error::FullSpectrum);
    }
    let r = scan.resolution as i64;
    let hits = scan.below_tol();
    let mut lines = Vec::new();
    for d1 in -bound..=bound {
        for d2 in -bound..=bound {
            if gcd(d1, d2) != 1 || !canonical_direction(d1, d2) {
                continue;
            }
            // each offset class holds exactly R grid points of the torus line
            let needed = (scan.resolution / 2).max(3);
            let mut counts = alloc::collections::BTreeMap::<i64, usize>::new();
            for &(i, j) in &hits {
                let key = (d2 * i as i64 - d1 * j as i64).rem_euclid(r);
                *counts.entry(key).or_default() += 1;
            }
            for (&key, &count) in &counts {
                if count < needed {
                    continue;
                }
                let line = SpectralLine {
                    direction: [d1, d2],
                    offset: key as f64 / r as f64,
                };
                let confirmed = golden_samples(REFINEMENT_SAMPLES)
                    .all(|t| sigma_min(c, line.point(t)) <= scan.tol);
                if confirmed {
                    lines.push(line);
                }
            }
        }
    }
    let figure = LineFigure::from_lines(lines.iter().map(|l| l.line()));
    let rum_dimension = if lines.is_empty() { 0 } else { 1 };
    Ok(SpectralLineSet {
        lines,
        figure,
        rum_dimension,
    })
}

/// One representative of `{d, -d}`.
fn canonical_direction(d1: i64, d2: i64) -> bool {
    d1 > 0 || (d1 == 0 && d2 > 0)
}

/// `(k1 gamma_1, k2 gamma_2) mod 1`, each image checked against the spectrum
/// of the supercell crystal.
pub fn scale_spectrum_map(
    c: &CrystalFramework,
    points: &[[f64; 2]],
    k: [i64; 2],
    tol: f64,
) -> Result<Vec<[f64; 2]>> {
    if k[0] < 1 || k[1] < 1 {
        return Err(Error::invalid("scale factors must be positive"));
    }
    let sc = c.supercell(k)?;
    points
        .iter()
        .map(|g| {
            let img = [
                frac(k[0] as f64 * g[0]),
                frac(k[1] as f64 * g[1]),
            ];
            let s = sigma_min(&sc, img);
            if s <= tol {
                Ok(img)
            } else {
                Err(Error::NotInSpectrum(s))
            }
        })
        .collect()
}

/// Smallest `sigma_min` over the `k1 k2` preimages of a supercell wave vector.
pub fn min_over_preimages(c: &CrystalFramework, gamma: [f64; 2], k: [i64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..k[0] {
        for b in 0..k[1] {
            let g = [
                (gamma[0] + a as f64) / k[0] as f64,
                (gamma[1] + b as f64) / k[1] as f64,
            ];
            best = best.min(sigma_min(c, g));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::IntegralMatrix2;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    #[test]
    fn origin_contains_translations() {
        for c in fixtures::connected_crystals() {
            let ev = symbol_matrix(&c, [C::new(1.0, 0.0); 2]).unwrap();
            assert!(ev.sigma_min <= 1e-12);
            let svd = linalg::svd(&ev.matrix);
            assert!(svd.null_space(1e-10).len() >= 2);
        }
    }

    #[test]
    fn square_grid_row_shear_in_kernel() {
        let c = fixtures::square_grid();
        let m = symbol_matrix_raw(&c, multiphase([0.0, 0.3]));
        let u = m.mul_vec(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        assert!(linalg::vec_norm(&u) < 1e-15);
        assert!(sigma_min(&c, [0.5, 0.5]) > 0.01);
    }

    #[test]
    fn sigma_min_examples() {
        let sq = fixtures::square_grid();
        assert!(sigma_min(&sq, [0.0, 0.0]) <= 1e-12);
        assert!(sigma_min(&sq, [0.0, 0.37]) <= 1e-12);
        assert!(sigma_min(&fixtures::kagome(), [0.25, 1.0 / 3.0]) > 1e-3);
    }

    #[test]
    fn unimodular_multiphase_required() {
        let c = fixtures::square_grid();
        assert!(symbol_matrix(&c, [C::new(2.0, 0.0), C::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn square_grid_scan_is_the_axes() {
        let c = fixtures::square_grid();
        let scan = scan_spectrum(&c, 20, 1e-8).unwrap();
        let hits = scan.below_tol();
        assert_eq!(hits.len(), 2 * 20 - 1);
        assert!(hits.iter().all(|&(i, j)| i == 0 || j == 0));
        assert!(!scan.is_full());
    }

    #[test]
    fn free_joints_are_full() {
        let scan = scan_spectrum(&fixtures::free_joints(), 8, 1e-8).unwrap();
        assert!(scan.is_full());
        assert_eq!(
            detect_spectral_lines(&fixtures::free_joints(), &scan, 4).unwrap_err(),
            Error::FullSpectrum
        );
    }

    #[test]
    fn line_counts() {
        let sq = fixtures::square_grid();
        let s = detect_spectral_lines(&sq, &scan_spectrum(&sq, 24, 1e-8).unwrap(), 12).unwrap();
        assert_eq!(s.lines.len(), 2);
        assert_eq!(s.rum_dimension, 1);
        let br = fixtures::braced_grid();
        let s = detect_spectral_lines(&br, &scan_spectrum(&br, 24, 1e-8).unwrap(), 12).unwrap();
        assert_eq!(s.lines.len(), 0);
        assert_eq!(s.rum_dimension, 0);
        let kg = fixtures::kagome();
        let tol = default_tol(&kg);
        let s = detect_spectral_lines(&kg, &scan_spectrum(&kg, 24, tol).unwrap(), 12).unwrap();
        assert_eq!(s.lines.len(), 3);
        assert!(s.lines.iter().all(|l| l.offset == 0.0));
    }

    #[test]
    fn ifm_examples() {
        let c = fixtures::square_grid();
        let ifm = extract_ifm(&c, [0.0, 0.5], KRange::centered(3), 1e-8).unwrap();
        let fw = &ifm.realization.framework;
        assert!(fw.flex_residual_max(&ifm.field).unwrap() <= 1e-9);
        // horizontal component only, alternating by row
        let a = ifm.realization.index_of(0, [0, 0]).unwrap();
        let b = ifm.realization.index_of(0, [0, 1]).unwrap();
        assert!(ifm.field.values[a][1].norm() < 1e-12);
        assert!((ifm.field.values[a][0] + ifm.field.values[b][0]).norm() < 1e-12);
        assert!(matches!(
            extract_ifm(&c, [0.5, 0.5], KRange::centered(1), 1e-8),
            Err(Error::NotInSpectrum(_))
        ));
        let t = extract_ifm(&fixtures::kagome(), [0.0, 0.0], KRange::centered(2), 1e-8).unwrap();
        // at the origin the field is periodic
        for (v, &(kappa, _)) in t.field.values.iter().zip(&t.realization.labels) {
            let w = t.unit_cell[kappa];
            assert!((v[0] - w[0]).norm() < 1e-12 && (v[1] - w[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn kagome_ifm_on_line() {
        let c = fixtures::kagome();
        let ifm = extract_ifm(&c, [0.0, 0.31], KRange::centered(3), default_tol(&c)).unwrap();
        assert!(ifm.realization.framework.flex_residual_max(&ifm.field).unwrap() <= 1e-9);
    }

    #[test]
    fn ifm_demodulates_to_periodic() {
        let c = fixtures::kagome();
        let gamma = [0.2, 0.2];
        let ifm = extract_ifm(&c, gamma, KRange::centered(2), default_tol(&c)).unwrap();
        for (i, &(kappa, k)) in ifm.realization.labels.iter().enumerate() {
            let w = phase_power(ifm.omega, k).conj();
            for a in 0..2 {
                assert!((ifm.field.values[i][a] * w - ifm.unit_cell[kappa][a]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn change_of_basis_consistency() {
        let c = fixtures::square_grid();
        let z = IntegralMatrix2::from_ints([[1, 1], [0, 1]]).unwrap();
        let c2 = c.change_basis(&z).unwrap();
        let f1 = detect_spectral_lines(&c, &scan_spectrum(&c, 24, 1e-8).unwrap(), 12).unwrap();
        let f2 = detect_spectral_lines(&c2, &scan_spectrum(&c2, 24, 1e-8).unwrap(), 12).unwrap();
        let expected = crate::geometry::transform_figure(&z, &f1.figure).unwrap();
        assert!(f2.figure.set_eq(&expected, crate::TOL_ANGLE));
    }

    #[test]
    fn supercell_examples() {
        let c = fixtures::square_grid();
        let out = scale_spectrum_map(&c, &[[0.0, 1.0 / 3.0]], [1, 3], 1e-8).unwrap();
        assert!(out[0][0].abs() < 1e-12 && (out[0][1].abs() < 1e-12 || (out[0][1] - 1.0).abs() < 1e-12));
        assert_eq!(scale_spectrum_map(&c, &[[0.0, 0.3]], [1, 1], 1e-8).unwrap(), [[0.0, 0.3]]);
        let kg = fixtures::kagome();
        let tol = default_tol(&kg);
        assert!(scale_spectrum_map(&kg, &[[0.0, 0.27], [0.41, 0.41]], [2, 2], tol).is_ok());
    }

    proptest! {
        #[test]
        fn symbol_is_periodic(g1 in 0.0f64..1.0, g2 in 0.0f64..1.0, m1 in -3i64..3, m2 in -3i64..3) {
            let c = fixtures::kagome();
            let a = sigma_min(&c, [g1, g2]);
            let b = sigma_min(&c, [g1 + m1 as f64, g2 + m2 as f64]);
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn opposite_convention_is_conjugate(g1 in 0.0f64..1.0, g2 in 0.0f64..1.0) {
            let c = fixtures::kagome();
            let a = sigma_min(&c, [g1, g2]);
            let b = sigma_min(&c, [-g1, -g2]);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
