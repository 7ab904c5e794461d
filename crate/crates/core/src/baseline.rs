//! Reference designs the proposed solver is compared against.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use crate::channel::{seeded_rng, ChannelSet, PLACEMENT_STREAM};
use crate::design::{alternating_solve, solve_with_placement, HrisDesign, SnrBreakdown, SystemConfig};
use crate::error::{HrisError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Every element passive (`L = 0`).
    Passive,
    /// Every element active (`L = N`), RIS power budget enforced.
    FullyActive,
    /// Direct link only, MRT toward `h_bu`.
    NoRis,
    /// Uniformly random placement of `L` active elements drawn from `seed`.
    Arbitrary { seed: u64 },
}

/// Uniformly random size-`num_active` subset of `0..num_elements`, sorted.
pub fn random_placement<R: Rng + ?Sized>(num_elements: usize, num_active: usize, rng: &mut R) -> Vec<usize> {
    let mut set = index::sample(rng, num_elements, num_active).into_vec();
    set.sort_unstable();
    set
}

/// Direct-link-only SNR. The returned design has an empty coefficient vector.
pub fn no_ris_design(config: &SystemConfig, channels: &ChannelSet) -> Result<(HrisDesign, SnrBreakdown)> {
    let norm = channels.h_bu.norm();
    if !(norm > 0.0) {
        return Err(HrisError::DegenerateChannel);
    }
    let gamma = config.tx_power * norm * norm / config.noise_var;
    let design = HrisDesign {
        precoder: channels.h_bu.unscale(norm),
        coefficients: DVector::<Complex64>::zeros(0),
        active_set: Vec::new(),
    };
    let breakdown = SnrBreakdown {
        gamma,
        gamma_min: gamma,
        c_abs: norm,
        ris_noise: 0.0,
        ris_noise_max: 0.0,
        ris_power: 0.0,
        spectral_efficiency: (1.0 + gamma).log2(),
    };
    Ok((design, breakdown))
}

pub fn baseline_design(
    kind: BaselineKind,
    config: &SystemConfig,
    channels: &ChannelSet,
) -> Result<(HrisDesign, SnrBreakdown)> {
    match kind {
        BaselineKind::NoRis => no_ris_design(config, channels),
        BaselineKind::Passive => {
            let cfg = SystemConfig {
                num_active: 0,
                ..config.clone()
            };
            let sol = alternating_solve(&cfg, channels)?;
            Ok((sol.design, sol.breakdown))
        }
        BaselineKind::FullyActive => {
            let cfg = SystemConfig {
                num_active: config.num_elements,
                ..config.clone()
            };
            let sol = alternating_solve(&cfg, channels)?;
            Ok((sol.design, sol.breakdown))
        }
        BaselineKind::Arbitrary { seed } => {
            let mut rng = seeded_rng(seed, PLACEMENT_STREAM);
            let placement = random_placement(config.num_elements, config.num_active, &mut rng);
            let sol = solve_with_placement(config, channels, &placement)?;
            Ok((sol.design, sol.breakdown))
        }
    }
}
