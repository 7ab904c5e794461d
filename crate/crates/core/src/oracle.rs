//! Exhaustive placement search with exact per-placement coefficient optimization.
//!
//! For a fixed precoder and placement the SNR denominator does not depend on
//! coefficient phases, so phase alignment is optimal and only the active
//! amplitudes remain. Those are found by cyclic coordinate ascent over a
//! refining grid.

use std::cmp::Ordering;

use itertools::Itertools;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelSet;
use crate::design::{effective_channels, phase, EffectiveChannels, SystemConfig};
use crate::error::{HrisError, Result};

const GRID_POINTS: usize = 64;
const REFINE_LEVELS: usize = 2;
const MAX_SWEEPS: usize = 500;

/// Size guards for the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_elements: usize,
    pub max_placements: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_elements: 16,
            max_placements: 100_000,
        }
    }
}

/// Best coefficients found for one placement.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementCandidate {
    /// Sorted ascending.
    pub active_set: Vec<usize>,
    pub coefficients: DVector<Complex64>,
    pub gamma: f64,
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact SNR as a function of the active amplitudes, phases already aligned.
struct AmplitudeObjective {
    /// `|f| + sum_{A^c} |g_i|`.
    fixed: f64,
    /// `|g_i|` for each active element.
    gains: Vec<f64>,
    /// `nu2 |h_ru[i]|^2` for each active element.
    noise: Vec<f64>,
    noise_var: f64,
    tx_power: f64,
}

impl AmplitudeObjective {
    fn value(&self, mags: &[f64]) -> f64 {
        let amp = self.fixed + self.gains.iter().zip(mags).map(|(g, m)| g * m).sum::<f64>();
        let den = self.noise_var + self.noise.iter().zip(mags).map(|(q, m)| q * m * m).sum::<f64>();
        self.tx_power * amp * amp / den
    }

    /// Best value of coordinate `k` with the others held, by grid then two
    /// local refinements. Returns `(magnitude, objective)`.
    fn line_search(&self, mags: &mut [f64], k: usize, eta: f64) -> (f64, f64) {
        let current = mags[k];
        let mut best = (current, self.value(mags));
        let try_point = |mags: &mut [f64], x: f64, best: &mut (f64, f64)| {
            mags[k] = x;
            let v = self.value(mags);
            if v > best.1 {
                *best = (x, v);
            }
        };
        let step = eta / (GRID_POINTS - 1) as f64;
        for j in 0..GRID_POINTS {
            try_point(mags, step * j as f64, &mut best);
        }
        let mut half_width = step;
        for _ in 0..REFINE_LEVELS {
            let lo = (best.0 - half_width).max(0.0);
            let hi = (best.0 + half_width).min(eta);
            let fine = (hi - lo) / (GRID_POINTS - 1) as f64;
            for j in 0..GRID_POINTS {
                try_point(mags, lo + fine * j as f64, &mut best);
            }
            half_width = fine;
        }
        mags[k] = best.0;
        best
    }
}

fn check_elements(num_elements: usize, limits: &OracleLimits) -> Result<()> {
    if num_elements > limits.max_elements {
        return Err(HrisError::OracleScale(format!(
            "N = {num_elements} exceeds the oracle guard of {} elements",
            limits.max_elements
        )));
    }
    Ok(())
}

/// Phase-aligned coefficients with active amplitudes chosen to maximize the
/// exact SNR for `active_set`. Coordinate ascent starts from amplitude `eta`
/// and only accepts strict improvements.
pub fn exact_coefficients_for_placement(
    eff: &EffectiveChannels,
    h_ru: &DVector<Complex64>,
    active_set: &[usize],
    config: &SystemConfig,
    limits: &OracleLimits,
) -> Result<DVector<Complex64>> {
    check_elements(eff.cascaded.len(), limits)?;
    let (omega, _) = optimize_amplitudes(eff, h_ru, active_set, config);
    Ok(omega)
}

fn optimize_amplitudes(
    eff: &EffectiveChannels,
    h_ru: &DVector<Complex64>,
    active_set: &[usize],
    config: &SystemConfig,
) -> (DVector<Complex64>, f64) {
    let n = eff.cascaded.len();
    let mut active = vec![false; n];
    for &i in active_set {
        active[i] = true;
    }
    let passive_sum: f64 = (0..n).filter(|&i| !active[i]).map(|i| eff.cascaded[i].norm()).sum();
    let objective = AmplitudeObjective {
        fixed: eff.direct.norm() + passive_sum,
        gains: active_set.iter().map(|&i| eff.cascaded[i].norm()).collect(),
        noise: active_set
            .iter()
            .map(|&i| config.ris_noise_var * h_ru[i].norm_sqr())
            .collect(),
        noise_var: config.noise_var,
        tx_power: config.tx_power,
    };

    let mut mags = vec![config.eta; active_set.len()];
    let mut value = objective.value(&mags);
    if config.ris_noise_var > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for k in 0..mags.len() {
                let before = mags[k];
                let (_, v) = objective.line_search(&mut mags, k, config.eta);
                if mags[k] != before {
                    moved = true;
                    value = v;
                }
            }
            if !moved {
                break;
            }
        }
    }

    let ref_phase = phase(eff.direct);
    let mut omega: DVector<Complex64> = eff
        .cascaded
        .map(|g| Complex64::from_polar(1.0, -(phase(g) - ref_phase)));
    for (&i, &m) in active_set.iter().zip(&mags) {
        omega[i] *= m;
    }
    (omega, value)
}

fn better(a: &PlacementCandidate, b: &PlacementCandidate) -> Ordering {
    // larger gamma wins, ties go to the lexicographically smaller set
    a.gamma
        .total_cmp(&b.gamma)
        .then_with(|| b.active_set.cmp(&a.active_set))
}

/// Enumerates every placement of `config.num_active` elements for the fixed
/// precoder and returns the one with the highest exact SNR.
pub fn exhaustive_oracle(
    config: &SystemConfig,
    channels: &ChannelSet,
    precoder: &DVector<Complex64>,
    limits: &OracleLimits,
) -> Result<PlacementCandidate> {
    let n = channels.num_elements();
    let l = config.num_active;
    if l > n {
        return Err(HrisError::Domain(format!("L = {l} exceeds N = {n}")));
    }
    check_elements(n, limits)?;
    let count = binomial(n, l);
    if count > limits.max_placements {
        return Err(HrisError::OracleScale(format!(
            "C({n}, {l}) = {count} placements exceeds the cap of {}",
            limits.max_placements
        )));
    }
    let eff = effective_channels(channels, precoder);
    let placements: Vec<Vec<usize>> = (0..n).combinations(l).collect();
    placements
        .into_par_iter()
        .map(|active_set| {
            let (coefficients, gamma) = optimize_amplitudes(&eff, &channels.h_ru, &active_set, config);
            PlacementCandidate {
                active_set,
                coefficients,
                gamma,
            }
        })
        .max_by(better)
        .ok_or_else(|| HrisError::InternalConsistency("no placement enumerated".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channels, seeded_rng, FadingSpec, Geometry};
    use crate::design::{mrt_precoder, optimal_coefficients, snr, HrisDesign};
    use approx::assert_relative_eq;

    fn unit_instance(n: usize, l: usize, seed: u64) -> (SystemConfig, ChannelSet) {
        let cfg = SystemConfig {
            num_antennas: 2,
            num_elements: n,
            num_active: l,
            eta: 3.0,
            tx_power: 1.0,
            ris_power_max: f64::INFINITY,
            noise_var: 1.0,
            ris_noise_var: 0.5,
            ..SystemConfig::default()
        };
        let spec = FadingSpec {
            pathloss_intercept_db: 0.0,
            pathloss_exponent_coeff_db: 0.0,
            ..FadingSpec::default()
        };
        let ch = generate_channels(&cfg, &Geometry::default(), &spec, &mut seeded_rng(seed, 0)).unwrap();
        (cfg, ch)
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 20), 535_983_370_403_809_682_970);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn noiseless_amplifiers_run_at_full_gain() {
        let (mut cfg, ch) = unit_instance(6, 3, 1);
        cfg.ris_noise_var = 0.0;
        let p = mrt_precoder(&ch, &DVector::from_element(6, Complex64::from(1.0))).unwrap();
        let eff = effective_channels(&ch, &p);
        let omega =
            exact_coefficients_for_placement(&eff, &ch.h_ru, &[0, 2, 5], &cfg, &OracleLimits::default()).unwrap();
        for &i in &[0, 2, 5] {
            assert_relative_eq!(omega[i].norm(), cfg.eta, max_relative = 1e-15);
        }
    }

    #[test]
    fn single_amplitude_matches_dense_grid() {
        for seed in 0..20 {
            let (mut cfg, ch) = unit_instance(5, 1, seed);
            cfg.ris_noise_var = 4.0;
            let p = mrt_precoder(&ch, &DVector::from_element(5, Complex64::from(1.0))).unwrap();
            let eff = effective_channels(&ch, &p);
            let active = [seed as usize % 5];
            let omega =
                exact_coefficients_for_placement(&eff, &ch.h_ru, &active, &cfg, &OracleLimits::default()).unwrap();
            let design = HrisDesign {
                precoder: p.clone(),
                coefficients: omega,
                active_set: active.to_vec(),
            };
            let found = snr(&cfg, &ch, &design).unwrap().gamma;

            // brute force over 10^4 amplitudes
            let aligned = optimal_coefficients(&eff, &[], 1.0);
            let mut dense_best: f64 = 0.0;
            for j in 0..10_000 {
                let m = cfg.eta * j as f64 / 9_999.0;
                let mut w = aligned.clone();
                w[active[0]] *= m;
                let d = HrisDesign {
                    precoder: p.clone(),
                    coefficients: w,
                    active_set: active.to_vec(),
                };
                dense_best = dense_best.max(snr(&cfg, &ch, &d).unwrap().gamma);
            }
            assert!(
                found >= dense_best * (1.0 - 1e-6),
                "seed {seed}: {found} vs {dense_best}"
            );
            assert_relative_eq!(found, dense_best, max_relative = 1e-6);
        }
    }

    #[test]
    fn weak_ris_noise_keeps_full_gain() {
        let (mut cfg, ch) = unit_instance(6, 2, 4);
        cfg.ris_noise_var = 1e-12;
        let p = mrt_precoder(&ch, &DVector::from_element(6, Complex64::from(1.0))).unwrap();
        let eff = effective_channels(&ch, &p);
        let omega = exact_coefficients_for_placement(&eff, &ch.h_ru, &[1, 4], &cfg, &OracleLimits::default()).unwrap();
        assert_relative_eq!(omega[1].norm(), cfg.eta, max_relative = 1e-9);
        assert_relative_eq!(omega[4].norm(), cfg.eta, max_relative = 1e-9);
    }

    #[test]
    fn trivial_placement_counts() {
        let (mut cfg, ch) = unit_instance(6, 0, 2);
        let p = mrt_precoder(&ch, &DVector::from_element(6, Complex64::from(1.0))).unwrap();
        let best = exhaustive_oracle(&cfg, &ch, &p, &OracleLimits::default()).unwrap();
        assert!(best.active_set.is_empty());
        assert!(best.coefficients.iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));

        cfg.num_active = 6;
        let best = exhaustive_oracle(&cfg, &ch, &p, &OracleLimits::default()).unwrap();
        assert_eq!(best.active_set, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn guards_reject_large_instances() {
        let (cfg, ch) = unit_instance(20, 2, 3);
        let p = mrt_precoder(&ch, &DVector::from_element(20, Complex64::from(1.0))).unwrap();
        let err = exhaustive_oracle(&cfg, &ch, &p, &OracleLimits::default()).unwrap_err();
        assert!(matches!(err, HrisError::OracleScale(_)));
        let (cfg, ch) = unit_instance(14, 7, 3);
        let limits = OracleLimits {
            max_placements: 1000,
            ..OracleLimits::default()
        };
        let err = exhaustive_oracle(&cfg, &ch, &p_for(&ch), &limits).unwrap_err();
        assert!(err.to_string().contains("3432"), "{err}");
    }

    fn p_for(ch: &ChannelSet) -> DVector<Complex64> {
        mrt_precoder(ch, &DVector::from_element(ch.num_elements(), Complex64::from(1.0))).unwrap()
    }

    #[test]
    fn oracle_reported_gamma_is_exact_snr() {
        let (cfg, ch) = unit_instance(8, 2, 9);
        let p = p_for(&ch);
        let best = exhaustive_oracle(&cfg, &ch, &p, &OracleLimits::default()).unwrap();
        let design = HrisDesign {
            precoder: p,
            coefficients: best.coefficients.clone(),
            active_set: best.active_set.clone(),
        };
        assert_relative_eq!(snr(&cfg, &ch, &design).unwrap().gamma, best.gamma, max_relative = 1e-12);
    }

    #[test]
    fn ties_resolve_to_smallest_set() {
        // identical elements: every placement scores the same
        let cfg = SystemConfig {
            num_antennas: 1,
            num_elements: 4,
            num_active: 2,
            eta: 2.0,
            tx_power: 1.0,
            noise_var: 1.0,
            ris_noise_var: 0.0,
            ..SystemConfig::default()
        };
        let ch = ChannelSet {
            h_br: nalgebra::DMatrix::from_element(4, 1, Complex64::from(1.0)),
            h_ru: DVector::from_element(4, Complex64::from(1.0)),
            h_bu: DVector::from_element(1, Complex64::from(1.0)),
            ue_position: [0.0; 3],
        };
        let p = DVector::from_element(1, Complex64::from(1.0));
        let best = exhaustive_oracle(&cfg, &ch, &p, &OracleLimits::default()).unwrap();
        assert_eq!(best.active_set, vec![0, 1]);
    }
}
