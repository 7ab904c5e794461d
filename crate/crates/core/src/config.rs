//! Flat key-value configuration files and the CLI list arguments.
//!
//! A config file is a TOML document without tables. Every key is optional
//! and falls back to the reference scenario: M = 8, N = 100, L = 20,
//! eta = 10 dB, P_t = 10 dBm, P_ris,max = 0 dBm, sigma2 = nu2 = -80 dBm,
//! BS at (0,0,0), RIS at (20,13,3), UE rectangle corner (18,8,0) with
//! extent (3,10), Rician factors 10 / 10 / 0 on BS-UE / BS-RIS / RIS-UE.
//!
//! | key | meaning |
//! |-----|---------|
//! | `M`, `N`, `L` | antennas, elements, active elements |
//! | `eta_db` or `eta` | amplification as a power gain in dB, or linear amplitude |
//! | `pt_dbm` or `pt_mw` | transmit power |
//! | `p_ris_max_dbm` or `p_ris_max_mw` | RIS power budget |
//! | `sigma2_dbm` or `sigma2_mw` | receiver noise variance |
//! | `nu2_dbm` or `nu2_mw` | RIS noise variance |
//! | `max_iter`, `conv_tol` | solver stopping rule |
//! | `bs_position`, `ris_position`, `ue_corner` | 3-element arrays, meters |
//! | `ue_extent` | 2-element array, meters |
//! | `rho` or `rho_bu`, `rho_br`, `rho_ru` | linear Rician factors |
//! | `pathloss_intercept_db`, `pathloss_slope_db` | `intercept + slope * log10(d)` |
//! | `sweep`, `values`, `trials`, `seed`, `methods` | sweep definition |
//! | `tie_rho_links` | a `rho` sweep drives all three links (true) or only BS-UE and BS-RIS |
//! | `arbitrary_placements` | random placements per trial for the `arbitrary` method |
//! | `oracle_max_elements`, `oracle_cap` | exhaustive-search guards |
//!
//! All powers are converted to linear milliwatts.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use toml::{Table, Value};

use crate::channel::{FadingSpec, Geometry};
use crate::design::{db_to_amplitude, db_to_linear, SystemConfig};
use crate::error::{HrisError, Result};
use crate::oracle::OracleLimits;

/// Parameter driven by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Linear Rician factor.
    Rho,
    /// Amplification, power gain in dB.
    EtaDb,
    /// Number of active elements.
    Active,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Rho => "rho",
            SweepVariable::EtaDb => "eta_db",
            SweepVariable::Active => "L",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = HrisError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rho" => Ok(SweepVariable::Rho),
            "eta_db" => Ok(SweepVariable::EtaDb),
            "L" => Ok(SweepVariable::Active),
            other => Err(HrisError::Config(format!(
                "unknown sweep variable {other:?} (expected rho, eta_db or L)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Proposed,
    Arbitrary,
    Passive,
    Active,
    NoRis,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Proposed,
        Method::Arbitrary,
        Method::Passive,
        Method::Active,
        Method::NoRis,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Arbitrary => "arbitrary",
            Method::Passive => "passive",
            Method::Active => "active",
            Method::NoRis => "no_ris",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HrisError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HrisError::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub root_seed: u64,
    pub methods: Vec<Method>,
    pub tie_rho_links: bool,
    pub arbitrary_placements: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: SweepVariable::EtaDb,
            values: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 100,
            root_seed: 0,
            methods: vec![
                Method::Proposed,
                Method::Arbitrary,
                Method::Passive,
                Method::Active,
                Method::NoRis,
            ],
            tie_rho_links: true,
            arbitrary_placements: 10,
        }
    }
}

/// Everything a sweep or audit needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigBundle {
    pub system: SystemConfig,
    pub geometry: Geometry,
    pub fading: FadingSpec,
    pub sweep: SweepSpec,
    pub oracle: OracleLimits,
}

impl ConfigBundle {
    /// Validates every part, including the sweep values against N.
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.geometry.validate().map_err(|e| HrisError::Config(e.to_string()))?;
        for (name, rho) in [
            ("rho_bu", self.fading.rho_bu),
            ("rho_br", self.fading.rho_br),
            ("rho_ru", self.fading.rho_ru),
        ] {
            if !(rho >= 0.0) {
                return Err(HrisError::Config(format!("{name} must be >= 0, got {rho}")));
            }
        }
        for (name, v) in [
            ("pathloss_intercept_db", self.fading.pathloss_intercept_db),
            ("pathloss_slope_db", self.fading.pathloss_exponent_coeff_db),
        ] {
            if !v.is_finite() {
                return Err(HrisError::Config(format!("{name} must be finite")));
            }
        }
        validate_sweep(&self.sweep, &self.system)
    }
}

fn validate_sweep(sweep: &SweepSpec, system: &SystemConfig) -> Result<()> {
    let fail = |msg: String| Err(HrisError::Config(msg));
    if sweep.values.is_empty() {
        return fail("sweep values must not be empty".into());
    }
    if sweep.values.iter().any(|v| !v.is_finite()) {
        return fail("sweep values must be finite".into());
    }
    if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
        return fail(format!(
            "sweep values must be strictly increasing, got {:?}",
            sweep.values
        ));
    }
    if sweep.trials == 0 {
        return fail("trials must be >= 1".into());
    }
    if sweep.methods.is_empty() {
        return fail("at least one method is required".into());
    }
    if sweep.methods.contains(&Method::Arbitrary) && sweep.arbitrary_placements == 0 {
        return fail("arbitrary_placements must be >= 1".into());
    }
    for &v in &sweep.values {
        match sweep.variable {
            SweepVariable::Rho if v < 0.0 => return fail(format!("rho sweep value {v} is negative")),
            SweepVariable::EtaDb if v < 0.0 => {
                return fail(format!("eta_db sweep value {v} gives an amplitude below 1"))
            }
            SweepVariable::Active if v.fract() != 0.0 || v < 0.0 => {
                return fail(format!("L sweep value {v} is not a non-negative integer"))
            }
            SweepVariable::Active if v > system.num_elements as f64 => {
                return fail(format!("L sweep value {v} exceeds N = {}", system.num_elements))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Parses a comma-separated list of finite numbers.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|item| {
            let item = item.trim();
            let v: f64 = item
                .parse()
                .map_err(|_| HrisError::Config(format!("invalid sweep value {item:?}")))?;
            if !v.is_finite() {
                return Err(HrisError::Config(format!("sweep value {item:?} is not finite")));
            }
            Ok(v)
        })
        .collect()
}

/// Parses a comma-separated list of method names, rejecting repeats.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list.split(',').map(Method::from_str).collect::<Result<Vec<_>>>()?;
    let unique: BTreeSet<_> = methods.iter().collect();
    if unique.len() != methods.len() {
        return Err(HrisError::Config(format!("repeated method in {list:?}")));
    }
    Ok(methods)
}

const KNOWN_KEYS: &[&str] = &[
    "M",
    "N",
    "L",
    "eta_db",
    "eta",
    "pt_dbm",
    "pt_mw",
    "p_ris_max_dbm",
    "p_ris_max_mw",
    "sigma2_dbm",
    "sigma2_mw",
    "nu2_dbm",
    "nu2_mw",
    "max_iter",
    "conv_tol",
    "bs_position",
    "ris_position",
    "ue_corner",
    "ue_extent",
    "rho",
    "rho_bu",
    "rho_br",
    "rho_ru",
    "pathloss_intercept_db",
    "pathloss_slope_db",
    "sweep",
    "values",
    "trials",
    "seed",
    "methods",
    "tie_rho_links",
    "arbitrary_placements",
    "oracle_max_elements",
    "oracle_cap",
];

/// Keys whose unit must be spelled out in the key name.
const UNIT_REQUIRED: &[(&str, &str)] = &[
    ("pt", "pt_dbm or pt_mw"),
    ("p_ris_max", "p_ris_max_dbm or p_ris_max_mw"),
    ("sigma2", "sigma2_dbm or sigma2_mw"),
    ("nu2", "nu2_dbm or nu2_mw"),
    ("eta_dbm", "eta_db (a gain) or eta (linear amplitude)"),
    ("rho_db", "rho (linear)"),
];

struct Reader<'a> {
    table: &'a Table,
}

impl<'a> Reader<'a> {
    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::Float(f)) if f.is_finite() || f.is_infinite() && *f > 0.0 => Ok(Some(*f)),
            Some(Value::Float(f)) => Err(HrisError::Config(format!("{key} = {f} is not a usable number"))),
            Some(other) => Err(HrisError::Config(format!(
                "{key} must be a number, got {}",
                other.type_str()
            ))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(other) => Err(HrisError::Config(format!(
                "{key} must be a non-negative integer, got {other}"
            ))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(HrisError::Config(format!(
                "{key} must be a boolean, got {}",
                other.type_str()
            ))),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) => Ok(*i as f64),
                    Value::Float(f) if f.is_finite() => Ok(*f),
                    other => Err(HrisError::Config(format!(
                        "{key} entries must be finite numbers, got {other}"
                    ))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(other) => Err(HrisError::Config(format!(
                "{key} must be an array, got {}",
                other.type_str()
            ))),
        }
    }

    fn point<const D: usize>(&self, key: &str) -> Result<Option<[f64; D]>> {
        match self.numbers(key)? {
            None => Ok(None),
            Some(v) => v
                .try_into()
                .map(Some)
                .map_err(|v: Vec<f64>| HrisError::Config(format!("{key} needs {D} entries, got {}", v.len()))),
        }
    }

    /// Value given either in dBm or linear mW, never both.
    fn power(&self, stem: &str) -> Result<Option<f64>> {
        let dbm_key = format!("{stem}_dbm");
        let mw_key = format!("{stem}_mw");
        match (self.number(&dbm_key)?, self.number(&mw_key)?) {
            (Some(_), Some(_)) => Err(HrisError::Config(format!("{dbm_key} and {mw_key} both given"))),
            (Some(db), None) => Ok(Some(db_to_linear(db))),
            (None, Some(mw)) => Ok(Some(mw)),
            (None, None) => Ok(None),
        }
    }
}

/// Parses and validates the text of a config file.
pub fn parse_config(text: &str) -> Result<ConfigBundle> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| HrisError::Config(e.message().to_string()))?;
    for (key, value) in &table {
        if value.is_table() {
            return Err(HrisError::Config(format!("{key}: nested tables are not allowed")));
        }
        if let Some((_, hint)) = UNIT_REQUIRED.iter().find(|(k, _)| k == key) {
            return Err(HrisError::Config(format!("{key} has no unit; use {hint}")));
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(HrisError::Config(format!("unknown key {key:?}")));
        }
    }
    let r = Reader { table: &table };
    let mut bundle = ConfigBundle::default();

    let sys = &mut bundle.system;
    if let Some(v) = r.count("M")? {
        sys.num_antennas = v;
    }
    if let Some(v) = r.count("N")? {
        sys.num_elements = v;
    }
    if let Some(v) = r.count("L")? {
        sys.num_active = v;
    }
    match (r.number("eta_db")?, r.number("eta")?) {
        (Some(_), Some(_)) => return Err(HrisError::Config("eta_db and eta both given".into())),
        (Some(db), None) => sys.eta = db_to_amplitude(db),
        (None, Some(lin)) => sys.eta = lin,
        (None, None) => {}
    }
    if let Some(v) = r.power("pt")? {
        sys.tx_power = v;
    }
    if let Some(v) = r.power("p_ris_max")? {
        sys.ris_power_max = v;
    }
    if let Some(v) = r.power("sigma2")? {
        sys.noise_var = v;
    }
    if let Some(v) = r.power("nu2")? {
        sys.ris_noise_var = v;
    }
    if let Some(v) = r.count("max_iter")? {
        sys.max_iter = v;
    }
    if let Some(v) = r.number("conv_tol")? {
        sys.conv_tol = v;
    }

    let geo = &mut bundle.geometry;
    if let Some(v) = r.point("bs_position")? {
        geo.bs_position = v;
    }
    if let Some(v) = r.point("ris_position")? {
        geo.ris_position = v;
    }
    if let Some(v) = r.point("ue_corner")? {
        geo.ue_region_corner = v;
    }
    if let Some(v) = r.point("ue_extent")? {
        geo.ue_region_extent = v;
    }

    let fading = &mut bundle.fading;
    if let Some(rho) = r.number("rho")? {
        if ["rho_bu", "rho_br", "rho_ru"].iter().any(|k| table.contains_key(*k)) {
            return Err(HrisError::Config(
                "rho conflicts with per-link rho_bu / rho_br / rho_ru".into(),
            ));
        }
        *fading = fading.clone().with_common_rho(rho);
    }
    if let Some(v) = r.number("rho_bu")? {
        fading.rho_bu = v;
    }
    if let Some(v) = r.number("rho_br")? {
        fading.rho_br = v;
    }
    if let Some(v) = r.number("rho_ru")? {
        fading.rho_ru = v;
    }
    if let Some(v) = r.number("pathloss_intercept_db")? {
        fading.pathloss_intercept_db = v;
    }
    if let Some(v) = r.number("pathloss_slope_db")? {
        fading.pathloss_exponent_coeff_db = v;
    }

    let sweep = &mut bundle.sweep;
    match table.get("sweep") {
        None => {}
        Some(Value::String(s)) => sweep.variable = s.parse()?,
        Some(other) => {
            return Err(HrisError::Config(format!(
                "sweep must be a string, got {}",
                other.type_str()
            )))
        }
    }
    if let Some(v) = r.numbers("values")? {
        sweep.values = v;
    }
    if let Some(v) = r.count("trials")? {
        sweep.trials = v;
    }
    match table.get("seed") {
        None => {}
        Some(Value::Integer(i)) if *i >= 0 => sweep.root_seed = *i as u64,
        Some(Value::String(s)) => {
            sweep.root_seed = s
                .trim()
                .parse()
                .map_err(|_| HrisError::Config(format!("seed {s:?} is not a u64")))?;
        }
        Some(other) => {
            return Err(HrisError::Config(format!(
                "seed must be a non-negative integer, got {other}"
            )))
        }
    }
    match table.get("methods") {
        None => {}
        Some(Value::Array(items)) => {
            let names = items
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| HrisError::Config("methods entries must be strings".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            sweep.methods = parse_methods(&names.join(","))?;
        }
        Some(Value::String(s)) => sweep.methods = parse_methods(s)?,
        Some(other) => {
            return Err(HrisError::Config(format!(
                "methods must be a list of names, got {}",
                other.type_str()
            )))
        }
    }
    if let Some(v) = r.boolean("tie_rho_links")? {
        sweep.tie_rho_links = v;
    }
    if let Some(v) = r.count("arbitrary_placements")? {
        sweep.arbitrary_placements = v;
    }
    if let Some(v) = r.count("oracle_max_elements")? {
        bundle.oracle.max_elements = v;
    }
    if let Some(v) = r.count("oracle_cap")? {
        bundle.oracle.max_placements = v as u128;
    }

    bundle.validate()?;
    Ok(bundle)
}

/// Reads and parses a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HrisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
