//! Suboptimality gap between the closed-form solver and the exhaustive oracle.

use crate::channel::ChannelSet;
use crate::design::{alternating_solve, effective_channels, optimal_placement, snr, top_sum, SystemConfig};
use crate::error::{HrisError, Result};
use crate::oracle::{exhaustive_oracle, OracleLimits};

/// Relative slack on the bound-chain comparisons (rounding only).
pub const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub gamma_prop: f64,
    pub gamma_opt: f64,
    pub gamma_lb: f64,
    pub gamma_ub: f64,
    /// Largest attainable received power `P_t (|f| + eta sum_top |g| + sum_rest |g|)^2`.
    pub c_max: f64,
    pub epsilon: f64,
    /// Normalized gap `(sigma2 / c_max) |gamma_opt - gamma_prop|`.
    pub normalized_gap: f64,
    pub delta: f64,
    /// Amplification limit that guarantees `normalized_gap <= delta`.
    pub eta_max: f64,
}

impl GapReport {
    /// `epsilon / (1 + epsilon)`, the bound on the normalized gap.
    pub fn gap_bound(&self) -> f64 {
        self.epsilon / (1.0 + self.epsilon)
    }

    /// Checks `gamma_lb <= gamma_prop <= gamma_opt <= gamma_ub` and the gap bound.
    pub fn check_chain(&self) -> Result<()> {
        let le = |a: f64, b: f64| a <= b + CHAIN_TOL * b.abs().max(a.abs());
        let violations: Vec<String> = [
            (
                le(self.gamma_lb, self.gamma_prop),
                format!("gamma_lb {} > gamma_prop {}", self.gamma_lb, self.gamma_prop),
            ),
            (
                le(self.gamma_prop, self.gamma_opt),
                format!("gamma_prop {} > gamma_opt {}", self.gamma_prop, self.gamma_opt),
            ),
            (
                le(self.gamma_opt, self.gamma_ub),
                format!("gamma_opt {} > gamma_ub {}", self.gamma_opt, self.gamma_ub),
            ),
            (
                self.normalized_gap <= self.gap_bound() + CHAIN_TOL,
                format!("gap {} > eps/(1+eps) = {}", self.normalized_gap, self.gap_bound()),
            ),
        ]
        .into_iter()
        .filter_map(|(ok, msg)| (!ok).then_some(msg))
        .collect();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(HrisError::InternalConsistency(violations.join("; ")))
        }
    }
}

/// Largest amplification keeping the normalized gap below `delta`:
/// `sqrt(delta sigma2 / ((1 - delta) nu2 S_L))` with `S_L` the sum of the `L`
/// largest `|h_ru[i]|^2`. Returns `+inf` when the denominator vanishes.
pub fn eta_max_bound(
    h_ru: &nalgebra::DVector<num_complex::Complex64>,
    num_active: usize,
    delta: f64,
    noise_var: f64,
    ris_noise_var: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(HrisError::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let powers: Vec<f64> = h_ru.iter().map(|h| h.norm_sqr()).collect();
    let top = top_sum(&powers, num_active);
    let den = (1.0 - delta) * ris_noise_var * top;
    if num_active == 0 || !(den > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((delta * noise_var / den).sqrt())
}

/// Runs the proposed solver and the oracle at the solver's final precoder and
/// reports every quantity of the gap bound. Power enforcement is not applied
/// to either side. A broken bound chain is returned as an error.
pub fn gap_analysis(
    config: &SystemConfig,
    channels: &ChannelSet,
    delta: f64,
    limits: &OracleLimits,
) -> Result<GapReport> {
    let report = gap_report(config, channels, delta, limits)?;
    report.check_chain()?;
    Ok(report)
}

/// Same as [`gap_analysis`] without the final chain check.
pub fn gap_report(
    config: &SystemConfig,
    channels: &ChannelSet,
    delta: f64,
    limits: &OracleLimits,
) -> Result<GapReport> {
    let eta_max = eta_max_bound(
        &channels.h_ru,
        config.num_active,
        delta,
        config.noise_var,
        config.ris_noise_var,
    )?;
    let sol = alternating_solve(config, channels)?;
    let proposed = &sol.unconstrained;
    let gamma_prop = snr(config, channels, proposed)?.gamma;
    let oracle = exhaustive_oracle(config, channels, &proposed.precoder, limits)?;

    let eff = effective_channels(channels, &proposed.precoder);
    let best_set = optimal_placement(&eff, config.num_active);
    let amp = eff.amplitude_bound(&best_set, config.eta);
    let c_max = config.tx_power * amp * amp;

    let powers: Vec<f64> = channels.h_ru.iter().map(|h| h.norm_sqr()).collect();
    let epsilon =
        config.ris_noise_var * config.eta * config.eta * top_sum(&powers, config.num_active) / config.noise_var;
    let gamma_ub = c_max / config.noise_var;
    let gamma_lb = gamma_ub / (1.0 + epsilon);
    let normalized_gap = if c_max > 0.0 {
        config.noise_var / c_max * (oracle.gamma - gamma_prop).abs()
    } else {
        0.0
    };

    Ok(GapReport {
        gamma_prop,
        gamma_opt: oracle.gamma,
        gamma_lb,
        gamma_ub,
        c_max,
        epsilon,
        normalized_gap,
        delta,
        eta_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channels, seeded_rng, FadingSpec, Geometry};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn h(values: &[f64]) -> DVector<Complex64> {
        DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::from(v)))
    }

    #[test]
    fn eta_max_unit_case() {
        assert_relative_eq!(eta_max_bound(&h(&[1.0, 0.5]), 1, 0.5, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn eta_max_formula() {
        // top-2 power sum = 1 + 1 = 2
        let v = eta_max_bound(&h(&[1.0, 0.1, 1.0]), 2, 0.1, 1e-8, 1e-8).unwrap();
        assert_relative_eq!(v, (0.1f64 / (0.9 * 2.0)).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn eta_max_vanishes_with_delta() {
        let mut prev = f64::INFINITY;
        for k in 1..10 {
            let v = eta_max_bound(&h(&[1.0]), 1, 10f64.powi(-k), 1.0, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn eta_max_edge_cases() {
        assert_eq!(eta_max_bound(&h(&[1.0]), 0, 0.5, 1.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(eta_max_bound(&h(&[1.0]), 1, 0.5, 1.0, 0.0).unwrap(), f64::INFINITY);
        assert!(eta_max_bound(&h(&[1.0]), 1, 0.0, 1.0, 1.0).is_err());
        assert!(eta_max_bound(&h(&[1.0]), 1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn noiseless_collapse() {
        let cfg = SystemConfig {
            num_elements: 8,
            num_active: 2,
            ris_noise_var: 0.0,
            ..SystemConfig::default()
        };
        let ch = generate_channels(
            &cfg,
            &Geometry::default(),
            &FadingSpec::default(),
            &mut seeded_rng(6, 0),
        )
        .unwrap();
        let r = gap_analysis(&cfg, &ch, 0.1, &OracleLimits::default()).unwrap();
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.normalized_gap, 0.0);
        for g in [r.gamma_prop, r.gamma_opt, r.gamma_lb] {
            assert_relative_eq!(g, r.gamma_ub, max_relative = 1e-9);
        }
    }

    #[test]
    fn chain_holds_on_default_scaled_instances() {
        let cfg = SystemConfig {
            num_elements: 10,
            num_active: 3,
            ..SystemConfig::default()
        };
        for seed in 0..20 {
            let ch = generate_channels(
                &cfg,
                &Geometry::default(),
                &FadingSpec::default(),
                &mut seeded_rng(seed, 0),
            )
            .unwrap();
            gap_analysis(&cfg, &ch, 0.1, &OracleLimits::default()).unwrap();
        }
    }

    #[test]
    fn broken_chain_is_reported() {
        let r = GapReport {
            gamma_prop: 2.0,
            gamma_opt: 1.0,
            gamma_lb: 0.5,
            gamma_ub: 3.0,
            c_max: 1.0,
            epsilon: 0.1,
            normalized_gap: 0.0,
            delta: 0.1,
            eta_max: 1.0,
        };
        let err = r.check_chain().unwrap_err();
        assert!(matches!(err, HrisError::InternalConsistency(_)));
        assert!(err.to_string().contains("gamma_prop"));
    }
}
