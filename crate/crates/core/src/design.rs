//! Signal model, closed-form placement and coefficients, and the alternating
//! precoder / placement / coefficient solver.
//!
//! Conventions: the overall channel is `h^H = h_bu^H + h_ru^H diag(w) H_br`.
//! After fixing a precoder `p` the received amplitude splits into a direct
//! term `f = h_bu^H p` and per-element cascaded terms
//! `g_i = conj(h_ru[i]) * (H_br p)[i]`, so that `h^H p = f + w^T g`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{HrisError, Result};

/// Relative slack applied when checking amplitude and power constraints.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Converts a power ratio in dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts an amplitude gain given as a power ratio in dB to a linear amplitude.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Scalar system parameters. Powers and noise variances share one linear
/// unit (milliwatts when loaded from a config file).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antennas (M).
    pub num_antennas: usize,
    /// HRIS elements (N).
    pub num_elements: usize,
    /// Active elements (L).
    pub num_active: usize,
    /// Maximum amplification of an active element, linear amplitude.
    pub eta: f64,
    pub tx_power: f64,
    pub ris_power_max: f64,
    /// Receiver noise variance.
    pub noise_var: f64,
    /// Noise variance injected by each active element.
    pub ris_noise_var: f64,
    pub max_iter: usize,
    /// Relative change of the SNR lower bound below which the solver stops.
    pub conv_tol: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_antennas: 8,
            num_elements: 100,
            num_active: 20,
            eta: db_to_amplitude(10.0),
            tx_power: db_to_linear(10.0),
            ris_power_max: db_to_linear(0.0),
            noise_var: db_to_linear(-80.0),
            ris_noise_var: db_to_linear(-80.0),
            max_iter: 20,
            conv_tol: 1e-8,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HrisError::Config(msg));
        if self.num_antennas == 0 {
            return fail("M must be positive".into());
        }
        if self.num_elements == 0 {
            return fail("N must be positive".into());
        }
        if self.num_active > self.num_elements {
            return fail(format!("L = {} exceeds N = {}", self.num_active, self.num_elements));
        }
        if !(self.eta >= 1.0) || !self.eta.is_finite() {
            return fail(format!("eta must be a finite amplitude >= 1, got {}", self.eta));
        }
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            return fail(format!("transmit power must be positive, got {}", self.tx_power));
        }
        if !(self.ris_power_max >= 0.0) {
            return fail(format!("RIS power budget must be >= 0, got {}", self.ris_power_max));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return fail(format!("sigma2 must be positive, got {}", self.noise_var));
        }
        if !(self.ris_noise_var >= 0.0) || !self.ris_noise_var.is_finite() {
            return fail(format!("nu2 must be >= 0, got {}", self.ris_noise_var));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if !(self.conv_tol >= 0.0) {
            return fail(format!("conv_tol must be >= 0, got {}", self.conv_tol));
        }
        Ok(())
    }
}

/// Direct and cascaded channels seen after precoding.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    /// `f = h_bu^H p`.
    pub direct: Complex64,
    /// `g_i = conj(h_ru[i]) (H_br p)[i]`.
    pub cascaded: DVector<Complex64>,
}

impl EffectiveChannels {
    /// Received amplitude `f + w^T g` for coefficients `w`.
    pub fn combined(&self, omega: &DVector<Complex64>) -> Complex64 {
        self.direct
            + omega
                .iter()
                .zip(self.cascaded.iter())
                .map(|(w, g)| w * g)
                .sum::<Complex64>()
    }

    /// `|f| + eta * sum_{A} |g_i| + sum_{A^c} |g_i|`, the largest received
    /// amplitude any coefficient vector can reach for placement `active_set`.
    pub fn amplitude_bound(&self, active_set: &[usize], eta: f64) -> f64 {
        let mut weights = vec![1.0; self.cascaded.len()];
        for &i in active_set {
            weights[i] = eta;
        }
        self.direct.norm()
            + self
                .cascaded
                .iter()
                .zip(&weights)
                .map(|(g, w)| w * g.norm())
                .sum::<f64>()
    }
}

/// Precoder, coefficients and active set of one HRIS configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HrisDesign {
    pub precoder: DVector<Complex64>,
    pub coefficients: DVector<Complex64>,
    /// Active element indices, in the order they were selected.
    pub active_set: Vec<usize>,
}

impl HrisDesign {
    pub fn is_active(&self) -> Vec<bool> {
        let mut mask = vec![false; self.coefficients.len()];
        for &i in &self.active_set {
            mask[i] = true;
        }
        mask
    }

    /// Checks the precoder norm, the amplitude constraints and the shape of
    /// the active set. `eta` is the amplification limit for active elements.
    pub fn check(&self, eta: f64, num_antennas: usize, num_elements: usize) -> Result<()> {
        let bad = |msg: String| Err(HrisError::InfeasibleDesign(msg));
        if self.precoder.len() != num_antennas {
            return bad(format!("precoder length {} != M = {num_antennas}", self.precoder.len()));
        }
        if self.coefficients.len() != num_elements {
            return bad(format!(
                "coefficient length {} != N = {num_elements}",
                self.coefficients.len()
            ));
        }
        let p_norm = self.precoder.norm();
        if !(p_norm <= 1.0 + FEASIBILITY_TOL) {
            return bad(format!("||p||_2 = {p_norm} exceeds 1"));
        }
        let mut seen = vec![false; num_elements];
        for &i in &self.active_set {
            if i >= num_elements {
                return bad(format!("active index {i} out of range [0, {num_elements})"));
            }
            if seen[i] {
                return bad(format!("active index {i} repeated"));
            }
            seen[i] = true;
        }
        for (i, w) in self.coefficients.iter().enumerate() {
            let a = w.norm();
            if !a.is_finite() {
                return bad(format!("|w_{i}| is not finite"));
            }
            if seen[i] {
                if a > eta * (1.0 + FEASIBILITY_TOL) {
                    return bad(format!("|w_{i}| = {a} exceeds eta = {eta} on active element"));
                }
            } else if (a - 1.0).abs() > FEASIBILITY_TOL {
                return bad(format!("|w_{i}| = {a} != 1 on passive element"));
            }
        }
        Ok(())
    }
}

/// Per-design SNR figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBreakdown {
    pub gamma: f64,
    /// SNR with the RIS noise replaced by its worst case `r_max`.
    pub gamma_min: f64,
    /// `|f + w^T g|`.
    pub c_abs: f64,
    pub ris_noise: f64,
    pub ris_noise_max: f64,
    pub ris_power: f64,
    /// `log2(1 + gamma)`, bits/s/Hz.
    pub spectral_efficiency: f64,
}

/// Phase with the convention `theta(0) = 0`.
pub fn phase(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

/// Column vector `h` with `h^H = h_bu^H + h_ru^H diag(w) H_br`.
pub fn overall_channel(channels: &ChannelSet, omega: &DVector<Complex64>) -> DVector<Complex64> {
    let weighted: DVector<Complex64> = omega.zip_map(&channels.h_ru, |w, h| w.conj() * h);
    &channels.h_bu + channels.h_br.ad_mul(&weighted)
}

/// Maximal ratio transmission toward the overall channel for coefficients `omega`.
pub fn mrt_precoder(channels: &ChannelSet, omega: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let h = overall_channel(channels, omega);
    let norm = h.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(HrisError::DegenerateChannel);
    }
    Ok(h.unscale(norm))
}

pub fn effective_channels(channels: &ChannelSet, precoder: &DVector<Complex64>) -> EffectiveChannels {
    let direct = channels.h_bu.dotc(precoder);
    let incident = &channels.h_br * precoder;
    let cascaded = channels.h_ru.zip_map(&incident, |h, u| h.conj() * u);
    EffectiveChannels { direct, cascaded }
}

/// Indices sorted by descending value, ties kept in ascending index order.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// The `num_active` elements with the largest `|g_i|`, strongest first.
pub fn optimal_placement(eff: &EffectiveChannels, num_active: usize) -> Vec<usize> {
    let mags: Vec<f64> = eff.cascaded.iter().map(|g| g.norm()).collect();
    let mut order = rank_descending(&mags);
    order.truncate(num_active.min(order.len()));
    order
}

/// Phase-aligned coefficients: amplitude `eta` on `active_set`, unit elsewhere,
/// each rotating its cascaded term onto the phase of the direct term.
pub fn optimal_coefficients(eff: &EffectiveChannels, active_set: &[usize], eta: f64) -> DVector<Complex64> {
    let ref_phase = phase(eff.direct);
    let mut omega: DVector<Complex64> = eff
        .cascaded
        .map(|g| Complex64::from_polar(1.0, -(phase(g) - ref_phase)));
    for &i in active_set {
        omega[i] *= eta;
    }
    omega
}

/// Noise power at the UE contributed by the active elements.
pub fn ris_noise_power(
    h_ru: &DVector<Complex64>,
    omega: &DVector<Complex64>,
    active_set: &[usize],
    ris_noise_var: f64,
) -> f64 {
    ris_noise_var
        * active_set
            .iter()
            .map(|&i| h_ru[i].norm_sqr() * omega[i].norm_sqr())
            .sum::<f64>()
}

/// Sum of the `count` largest entries of `values`.
pub fn top_sum(values: &[f64], count: usize) -> f64 {
    rank_descending(values).iter().take(count).map(|&i| values[i]).sum()
}

/// Worst-case RIS noise power over every placement of `num_active` elements
/// amplifying by at most `eta`.
pub fn r_max_bound(h_ru: &DVector<Complex64>, num_active: usize, eta: f64, ris_noise_var: f64) -> f64 {
    let powers: Vec<f64> = h_ru.iter().map(|h| h.norm_sqr()).collect();
    ris_noise_var * eta * eta * top_sum(&powers, num_active)
}

/// Power drawn by the active elements: incident signal plus amplified noise.
pub fn ris_power(config: &SystemConfig, channels: &ChannelSet, design: &HrisDesign) -> f64 {
    let incident = &channels.h_br * &design.precoder;
    design
        .active_set
        .iter()
        .map(|&i| design.coefficients[i].norm_sqr() * (config.tx_power * incident[i].norm_sqr() + config.ris_noise_var))
        .sum()
}

/// Exact SNR, its lower bound, and the bookkeeping terms for one design.
///
/// The lower bound uses `r_max` for `|A|` active elements, so designs with a
/// different active count than `config.num_active` are scored consistently.
pub fn snr(config: &SystemConfig, channels: &ChannelSet, design: &HrisDesign) -> Result<SnrBreakdown> {
    design.check(config.eta, channels.num_antennas(), channels.num_elements())?;
    let eff = effective_channels(channels, &design.precoder);
    let c_abs = eff.combined(&design.coefficients).norm();
    let signal = config.tx_power * c_abs * c_abs;
    let ris_noise = ris_noise_power(
        &channels.h_ru,
        &design.coefficients,
        &design.active_set,
        config.ris_noise_var,
    );
    let ris_noise_max = r_max_bound(
        &channels.h_ru,
        design.active_set.len(),
        config.eta,
        config.ris_noise_var,
    );
    let gamma = signal / (ris_noise + config.noise_var);
    Ok(SnrBreakdown {
        gamma,
        gamma_min: signal / (ris_noise_max + config.noise_var),
        c_abs,
        ris_noise,
        ris_noise_max,
        ris_power: ris_power(config, channels, design),
        spectral_efficiency: (1.0 + gamma).log2(),
    })
}

/// Scales the active coefficients down so the design consumes at most the
/// RIS power budget. Feasible designs are returned unchanged.
pub fn enforce_ris_power(design: &HrisDesign, config: &SystemConfig, channels: &ChannelSet) -> HrisDesign {
    let consumed = ris_power(config, channels, design);
    if consumed <= config.ris_power_max {
        return design.clone();
    }
    let scale = (config.ris_power_max / consumed).sqrt();
    let mut out = design.clone();
    for &i in &design.active_set {
        out.coefficients[i] *= scale;
    }
    out
}

/// Outcome of [`alternating_solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    /// Final design after RIS power enforcement.
    pub design: HrisDesign,
    /// Exact SNR of [`Solution::design`].
    pub breakdown: SnrBreakdown,
    /// Design at the end of the loop, before power enforcement.
    pub unconstrained: HrisDesign,
    /// SNR lower bound after each iteration.
    pub trace: Vec<f64>,
    /// Whether the relative change dropped below `conv_tol` before `max_iter`.
    pub converged: bool,
    /// Whether power enforcement rescaled the active coefficients.
    pub power_scaled: bool,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

enum PlacementRule<'a> {
    Optimal(usize),
    Frozen(&'a [usize]),
}

fn alternate(config: &SystemConfig, channels: &ChannelSet, rule: PlacementRule<'_>) -> Result<Solution> {
    config.validate()?;
    channels.validate()?;
    if channels.num_elements() != config.num_elements || channels.num_antennas() != config.num_antennas {
        return Err(HrisError::Domain(format!(
            "channel is {}x{} but config has N = {}, M = {}",
            channels.num_elements(),
            channels.num_antennas(),
            config.num_elements,
            config.num_antennas
        )));
    }
    let n = config.num_elements;
    let num_active = match rule {
        PlacementRule::Optimal(l) => l,
        PlacementRule::Frozen(set) => set.len(),
    };
    let r_max = r_max_bound(&channels.h_ru, num_active, config.eta, config.ris_noise_var);

    // Start from w = [eta, 0, ..., 0] and A = {0, ..., L-1}.
    let mut omega = DVector::from_element(n, Complex64::new(0.0, 0.0));
    omega[0] = Complex64::from(config.eta);
    let mut active_set: Vec<usize> = match rule {
        PlacementRule::Optimal(l) => (0..l).collect(),
        PlacementRule::Frozen(set) => set.to_vec(),
    };
    let mut precoder = DVector::from_element(config.num_antennas, Complex64::new(0.0, 0.0));
    let mut trace: Vec<f64> = Vec::with_capacity(config.max_iter);
    let mut converged = false;

    for _ in 0..config.max_iter {
        precoder = mrt_precoder(channels, &omega)?;
        let eff = effective_channels(channels, &precoder);
        if let PlacementRule::Optimal(l) = rule {
            active_set = optimal_placement(&eff, l);
        }
        omega = optimal_coefficients(&eff, &active_set, config.eta);
        let c = eff.combined(&omega).norm();
        let gamma_min = config.tx_power * c * c / (r_max + config.noise_var);
        if let Some(&prev) = trace.last() {
            let change = (gamma_min - prev).abs();
            trace.push(gamma_min);
            if change <= config.conv_tol * prev.abs() {
                converged = true;
                break;
            }
        } else {
            trace.push(gamma_min);
        }
    }

    let unconstrained = HrisDesign {
        precoder,
        coefficients: omega,
        active_set,
    };
    let design = enforce_ris_power(&unconstrained, config, channels);
    let power_scaled = design != unconstrained;
    let breakdown = snr(config, channels, &design)?;
    Ok(Solution {
        design,
        breakdown,
        unconstrained,
        trace,
        converged,
        power_scaled,
    })
}

/// Alternates MRT precoding, top-`L` placement by `|g_i|` and phase-aligned
/// coefficients until the SNR lower bound settles, then enforces the RIS
/// power budget once and scores the result with the exact SNR.
pub fn alternating_solve(config: &SystemConfig, channels: &ChannelSet) -> Result<Solution> {
    alternate(config, channels, PlacementRule::Optimal(config.num_active))
}

/// Same loop as [`alternating_solve`] with the active set held fixed.
pub fn solve_with_placement(config: &SystemConfig, channels: &ChannelSet, active_set: &[usize]) -> Result<Solution> {
    if active_set.iter().any(|&i| i >= config.num_elements) {
        return Err(HrisError::InfeasibleDesign(format!(
            "active set {active_set:?} has indices outside [0, {})",
            config.num_elements
        )));
    }
    alternate(config, channels, PlacementRule::Frozen(active_set))
}
