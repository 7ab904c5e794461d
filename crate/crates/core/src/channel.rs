//! Statistical channel model for the BS-RIS, RIS-UE and BS-UE links.
//!
//! Every link is a log-distance pathloss amplitude multiplying a unit-power
//! Rician matrix. Line-of-sight entries are random unit-modulus phasors, so no
//! array geometry is needed beyond the three node coordinates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::design::SystemConfig;
use crate::error::{HrisError, Result};

pub type Point3 = [f64; 3];

/// Node placement: BS and RIS are fixed, the UE is drawn from an axis-aligned
/// rectangle at constant height.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub ue_region_corner: Point3,
    /// Span of the UE rectangle along x and y, meters.
    pub ue_region_extent: [f64; 2],
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            bs_position: [0.0, 0.0, 0.0],
            ris_position: [20.0, 13.0, 3.0],
            ue_region_corner: [18.0, 8.0, 0.0],
            ue_region_extent: [3.0, 10.0],
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let coords = self
            .bs_position
            .iter()
            .chain(&self.ris_position)
            .chain(&self.ue_region_corner)
            .chain(&self.ue_region_extent);
        if coords.clone().any(|v| !v.is_finite()) {
            return Err(HrisError::Domain("geometry coordinates must be finite".into()));
        }
        if self.ue_region_extent.iter().any(|&e| e < 0.0) {
            return Err(HrisError::Domain(format!(
                "UE region extent must be non-negative, got {:?}",
                self.ue_region_extent
            )));
        }
        if distance(&self.bs_position, &self.ris_position) <= 0.0 {
            return Err(HrisError::Domain("BS and RIS positions coincide".into()));
        }
        Ok(())
    }
}

/// Euclidean distance between two points.
pub fn distance(a: &Point3, b: &Point3) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-link Rician factors (linear) and the log-distance pathloss law.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSpec {
    pub rho_bu: f64,
    pub rho_br: f64,
    pub rho_ru: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_exponent_coeff_db: f64,
}

impl Default for FadingSpec {
    fn default() -> Self {
        Self {
            rho_bu: 10.0,
            rho_br: 10.0,
            rho_ru: 0.0,
            pathloss_intercept_db: 30.0,
            pathloss_exponent_coeff_db: 22.0,
        }
    }
}

impl FadingSpec {
    /// Sets the same Rician factor on all three links.
    pub fn with_common_rho(mut self, rho: f64) -> Self {
        self.rho_bu = rho;
        self.rho_br = rho;
        self.rho_ru = rho;
        self
    }
}

/// One realization of the three links.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS to RIS, N x M.
    pub h_br: DMatrix<Complex64>,
    /// RIS to UE, length N. The link enters the signal model as `h_ru^H`.
    pub h_ru: DVector<Complex64>,
    /// BS to UE, length M. The link enters the signal model as `h_bu^H`.
    pub h_bu: DVector<Complex64>,
    pub ue_position: Point3,
}

impl ChannelSet {
    pub fn num_elements(&self) -> usize {
        self.h_ru.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.h_bu.len()
    }

    /// Checks dimensions against each other and that every entry is finite.
    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.h_ru.len(), self.h_bu.len());
        if self.h_br.nrows() != n || self.h_br.ncols() != m {
            return Err(HrisError::Domain(format!(
                "H_br is {}x{}, expected {n}x{m}",
                self.h_br.nrows(),
                self.h_br.ncols()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(self.h_br.iter().all(finite) && self.h_ru.iter().all(finite) && self.h_bu.iter().all(finite)) {
            return Err(HrisError::Domain("channel contains non-finite entries".into()));
        }
        Ok(())
    }
}

/// Draws a UE position uniformly from the configured rectangle.
pub fn sample_ue_position<R: Rng + ?Sized>(geometry: &Geometry, rng: &mut R) -> Point3 {
    let [cx, cy, cz] = geometry.ue_region_corner;
    let [ex, ey] = geometry.ue_region_extent;
    let ux: f64 = rng.random();
    let uy: f64 = rng.random();
    [cx + ex * ux, cy + ey * uy, cz]
}

/// Amplitude gain of the log-distance law `intercept + coeff * log10(d)` dB.
pub fn pathloss_linear(d: f64, spec: &FadingSpec) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(HrisError::Domain(format!(
            "pathloss distance must be positive and finite, got {d}"
        )));
    }
    let loss_db = spec.pathloss_intercept_db + spec.pathloss_exponent_coeff_db * d.log10();
    Ok(10f64.powf(-loss_db / 20.0))
}

fn rician_weights(rho: f64) -> Result<(f64, f64)> {
    if rho.is_nan() || rho < 0.0 {
        return Err(HrisError::Domain(format!("Rician factor must be >= 0, got {rho}")));
    }
    if rho.is_infinite() {
        return Ok((1.0, 0.0));
    }
    Ok(((rho / (1.0 + rho)).sqrt(), (1.0 / (1.0 + rho)).sqrt()))
}

/// Unit-power Rician matrix `sqrt(rho/(1+rho)) H_los + sqrt(1/(1+rho)) H_nlos`.
///
/// `H_los[i][m] = exp(j(a_i + b_m))` is a rank-one outer product of random
/// phase vectors, the far-field LOS shape with unknown array orientation.
/// Row phases, column phases, then the NLOS Gaussians (row-major) are drawn
/// in that order, so the random stream consumed does not depend on `rho`.
pub fn rician_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rho: f64, rng: &mut R) -> Result<DMatrix<Complex64>> {
    let (los_w, nlos_w) = rician_weights(rho)?;
    let row_phase: Vec<f64> = (0..rows).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
    let col_phase: Vec<f64> = (0..cols).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
    let mut entries = Vec::with_capacity(rows * cols);
    for a in &row_phase {
        for b in &col_phase {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let nlos = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            entries.push(Complex64::from_polar(los_w, a + b) + nlos * nlos_w);
        }
    }
    Ok(DMatrix::from_row_slice(rows, cols, &entries))
}

fn rician_vector<R: Rng + ?Sized>(len: usize, rho: f64, rng: &mut R) -> Result<DVector<Complex64>> {
    let m = rician_matrix(len, 1, rho, rng)?;
    Ok(DVector::from_column_slice(m.as_slice()))
}

fn link_gain(a: &Point3, b: &Point3, spec: &FadingSpec) -> Result<f64> {
    pathloss_linear(distance(a, b), spec)
}

/// Draws one channel realization: UE position, then `H_br`, `h_ru`, `h_bu`.
pub fn generate_channels<R: Rng + ?Sized>(
    config: &SystemConfig,
    geometry: &Geometry,
    spec: &FadingSpec,
    rng: &mut R,
) -> Result<ChannelSet> {
    if config.num_antennas == 0 || config.num_elements == 0 {
        return Err(HrisError::Domain("antenna and element counts must be positive".into()));
    }
    geometry.validate()?;
    let (n, m) = (config.num_elements, config.num_antennas);
    let ue = sample_ue_position(geometry, rng);

    let g_br = link_gain(&geometry.bs_position, &geometry.ris_position, spec)?;
    let g_ru = link_gain(&geometry.ris_position, &ue, spec)?;
    let g_bu = link_gain(&geometry.bs_position, &ue, spec)?;

    let h_br = rician_matrix(n, m, spec.rho_br, rng)? * Complex64::from(g_br);
    let h_ru = rician_vector(n, spec.rho_ru, rng)? * Complex64::from(g_ru);
    let h_bu = rician_vector(m, spec.rho_bu, rng)? * Complex64::from(g_bu);

    Ok(ChannelSet {
        h_br,
        h_ru,
        h_bu,
        ue_position: ue,
    })
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of a sweep rooted at `root`:
/// `splitmix64(root ^ splitmix64(trial))`.
pub fn trial_seed(root: u64, trial: u64) -> u64 {
    splitmix64(root ^ splitmix64(trial))
}

/// Stream used for channel draws of a trial.
pub const CHANNEL_STREAM: u64 = 0;
/// Stream used for the arbitrary-placement baseline of a trial.
pub const PLACEMENT_STREAM: u64 = 1;

/// ChaCha8 generator for `seed` on an independent stream.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
