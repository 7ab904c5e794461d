//! Seeded Monte-Carlo sweeps with paired channels and CSV output.
//!
//! Trial `t` of every sweep value draws its channel from
//! [`trial_seed`]`(root_seed, t)` on [`CHANNEL_STREAM`], so all methods and
//! all sweep values of that trial see the same random numbers. Trials run on
//! the ambient rayon pool and are reduced in trial order, which keeps the
//! output independent of the thread count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::baseline::{baseline_design, random_placement, BaselineKind};
use crate::channel::FadingSpec;
use crate::channel::{generate_channels, seeded_rng, trial_seed, ChannelSet, CHANNEL_STREAM, PLACEMENT_STREAM};
use crate::config::{ConfigBundle, Method, SweepVariable};
use crate::design::{alternating_solve, db_to_amplitude, solve_with_placement, SystemConfig};
use crate::error::{HrisError, Result};
use crate::oracle::exhaustive_oracle;

/// Aggregate of one method at one sweep value.
///
/// For [`Method::Arbitrary`] the spread columns are the trial-averaged worst
/// and best of the random placements drawn in each trial; for every other
/// method they are the extremes over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub method: Method,
    pub mean_se: f64,
    pub min_se: f64,
    pub max_se: f64,
    pub mean_gamma_db: f64,
    pub trials: usize,
}

/// Per-trial result of one method.
#[derive(Debug, Clone, Copy)]
struct TrialScore {
    se: f64,
    low_se: f64,
    high_se: f64,
    gamma_db: f64,
}

impl TrialScore {
    fn single(gamma: f64) -> Self {
        let se = (1.0 + gamma).log2();
        Self {
            se,
            low_se: se,
            high_se: se,
            gamma_db: 10.0 * gamma.log10(),
        }
    }
}

/// System and fading parameters at one sweep point.
pub fn apply_sweep_value(bundle: &ConfigBundle, value: f64) -> (SystemConfig, FadingSpec) {
    let mut system = bundle.system.clone();
    let mut fading = bundle.fading.clone();
    match bundle.sweep.variable {
        SweepVariable::Rho => {
            fading.rho_bu = value;
            fading.rho_br = value;
            if bundle.sweep.tie_rho_links {
                fading.rho_ru = value;
            }
        }
        SweepVariable::EtaDb => system.eta = db_to_amplitude(value),
        SweepVariable::Active => system.num_active = value as usize,
    }
    (system, fading)
}

fn score_method(
    method: Method,
    bundle: &ConfigBundle,
    system: &SystemConfig,
    channels: &ChannelSet,
    seed: u64,
) -> Result<TrialScore> {
    let gamma = match method {
        Method::Proposed => alternating_solve(system, channels)?.breakdown.gamma,
        Method::Passive => baseline_design(BaselineKind::Passive, system, channels)?.1.gamma,
        Method::Active => baseline_design(BaselineKind::FullyActive, system, channels)?.1.gamma,
        Method::NoRis => baseline_design(BaselineKind::NoRis, system, channels)?.1.gamma,
        Method::Oracle => {
            let sol = alternating_solve(system, channels)?;
            exhaustive_oracle(system, channels, &sol.unconstrained.precoder, &bundle.oracle)?.gamma
        }
        Method::Arbitrary => {
            let mut rng = seeded_rng(seed, PLACEMENT_STREAM);
            let k = bundle.sweep.arbitrary_placements;
            let (mut sum_se, mut sum_db) = (0.0, 0.0);
            let (mut low, mut high) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..k {
                let placement = random_placement(system.num_elements, system.num_active, &mut rng);
                let gamma = solve_with_placement(system, channels, &placement)?.breakdown.gamma;
                let s = TrialScore::single(gamma);
                sum_se += s.se;
                sum_db += s.gamma_db;
                low = low.min(s.se);
                high = high.max(s.se);
            }
            return Ok(TrialScore {
                se: sum_se / k as f64,
                low_se: low,
                high_se: high,
                gamma_db: sum_db / k as f64,
            });
        }
    };
    Ok(TrialScore::single(gamma))
}

fn run_trial(bundle: &ConfigBundle, system: &SystemConfig, fading: &FadingSpec, seed: u64) -> Result<Vec<TrialScore>> {
    let mut rng = seeded_rng(seed, CHANNEL_STREAM);
    let channels = generate_channels(system, &bundle.geometry, fading, &mut rng)?;
    bundle
        .sweep
        .methods
        .iter()
        .map(|&m| score_method(m, bundle, system, &channels, seed))
        .collect()
}

fn aggregate(bundle: &ConfigBundle, value: f64, method_idx: usize, scores: &[Vec<TrialScore>]) -> SweepRow {
    let method = bundle.sweep.methods[method_idx];
    let n = scores.len() as f64;
    let column = || scores.iter().map(|s| s[method_idx]);
    let mean_se = column().map(|s| s.se).sum::<f64>() / n;
    let mean_gamma_db = column().map(|s| s.gamma_db).sum::<f64>() / n;
    let (min_se, max_se) = if method == Method::Arbitrary {
        (
            column().map(|s| s.low_se).sum::<f64>() / n,
            column().map(|s| s.high_se).sum::<f64>() / n,
        )
    } else {
        (
            column().map(|s| s.se).fold(f64::INFINITY, f64::min),
            column().map(|s| s.se).fold(f64::NEG_INFINITY, f64::max),
        )
    };
    SweepRow {
        variable: bundle.sweep.variable,
        value,
        method,
        // summation order can leave the mean an ulp outside the extremes
        mean_se: mean_se.clamp(min_se, max_se),
        min_se,
        max_se,
        mean_gamma_db,
        trials: scores.len(),
    }
}

/// Runs every method on every (sweep value, trial) pair and aggregates one
/// row per value and method, in sweep-value then method order.
pub fn run_sweep(bundle: &ConfigBundle) -> Result<Vec<SweepRow>> {
    bundle.validate()?;
    let sweep = &bundle.sweep;
    if sweep.methods.contains(&Method::Oracle) {
        let n = bundle.system.num_elements;
        if n > bundle.oracle.max_elements {
            return Err(HrisError::OracleScale(format!(
                "oracle method requested with N = {n} above the guard of {}",
                bundle.oracle.max_elements
            )));
        }
    }
    let mut rows = Vec::with_capacity(sweep.values.len() * sweep.methods.len());
    for &value in &sweep.values {
        let (system, fading) = apply_sweep_value(bundle, value);
        let results: Vec<Result<Vec<TrialScore>>> = (0..sweep.trials)
            .into_par_iter()
            .map(|t| run_trial(bundle, &system, &fading, trial_seed(sweep.root_seed, t as u64)))
            .collect();
        let mut scores = Vec::with_capacity(results.len());
        for (t, r) in results.into_iter().enumerate() {
            match r {
                Ok(s) => scores.push(s),
                Err(e) => {
                    return Err(HrisError::Trial {
                        trial: t,
                        seed: trial_seed(sweep.root_seed, t as u64),
                        source: Box::new(e),
                    })
                }
            }
        }
        for idx in 0..sweep.methods.len() {
            rows.push(aggregate(bundle, value, idx, &scores));
        }
    }
    Ok(rows)
}

/// `%.10g`-style formatting: ten significant digits, trailing zeros trimmed.
pub fn format_sig10(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

pub const CSV_HEADER: &str = "variable,value,method,mean_se,min_se,max_se,mean_gamma_db,trials";

/// Renders rows as CSV text with LF line endings.
pub fn format_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.variable,
            format_sig10(r.value),
            r.method,
            format_sig10(r.mean_se),
            format_sig10(r.min_se),
            format_sig10(r.max_se),
            format_sig10(r.mean_gamma_db),
            r.trials
        );
    }
    out
}

/// Writes rows to `path` as CSV.
pub fn emit_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(HrisError::Domain("no sweep rows to write".into()));
    }
    std::fs::write(path, format_csv(rows)).map_err(|source| HrisError::Io {
        path: path.to_path_buf(),
        source,
    })
}
