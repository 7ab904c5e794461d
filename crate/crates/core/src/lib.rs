//! Joint design of the transmit precoder, hybrid-RIS coefficients and
//! active-element placement for SNR maximization in a RIS-assisted MISO
//! downlink.
//!
//! - [`channel`]: pathloss + Rician channel realizations.
//! - [`design`]: signal model, closed-form placement/coefficients, alternating solver.
//! - [`oracle`], [`baseline`], [`gap`]: exhaustive search, reference designs, gap bound.
//! - [`config`], [`sweep`]: config files, Monte-Carlo sweeps, CSV output.

// `!(x > 0.0)` is used on purpose so NaN lands on the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod config;
pub mod design;
pub mod error;
pub mod gap;
pub mod oracle;
pub mod sweep;

pub use baseline::{baseline_design, BaselineKind};
pub use channel::{generate_channels, ChannelSet, FadingSpec, Geometry};
pub use config::{load_config, parse_config, ConfigBundle, Method, SweepSpec, SweepVariable};
pub use design::{alternating_solve, EffectiveChannels, HrisDesign, SnrBreakdown, Solution, SystemConfig};
pub use error::{HrisError, Result};
pub use gap::{eta_max_bound, gap_analysis, GapReport};
pub use oracle::{exhaustive_oracle, OracleLimits, PlacementCandidate};
pub use sweep::{emit_csv, run_sweep, SweepRow};
