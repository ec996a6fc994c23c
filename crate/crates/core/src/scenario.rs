//! Scenario configuration: strict TOML schema, validation, and assembly of
//! everything a verification run needs (coefficient field, gauges, angular
//! basis, radial grid, seed state, check list). A small built-in catalog
//! covers the standard coefficient families end to end.

use crate::coeff::{CoefficientField, RadialGauges, Side};
use crate::functionals::SlackPolicy;
use crate::media::{build_layered_field, build_potential_field, ray_set, LayeredMedium, PotentialModel};
use crate::sphere::{ModeVector, SphereBasis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Field(#[from] crate::coeff::FieldError),
    #[error("invalid config: {0}")]
    Sphere(#[from] crate::sphere::SphereError),
}

fn bad(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub cutoff_degree: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Override for the monotone-check slack; the remaining slacks keep
    /// their defaults.
    #[serde(default)]
    pub slack: Option<f64>,
    /// Relative integrator tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    /// Pinned power-lift exponent; when absent the run calibrates one.
    #[serde(default)]
    pub weight_exponent: Option<f64>,
    /// Angular quadrature oversampling factor for jumpy coefficients.
    #[serde(default = "default_oversample")]
    pub quadrature_oversample: usize,
    pub window: WindowConfig,
    pub family: FamilyConfig,
    pub gauges: GaugeConfig,
    #[serde(default)]
    pub initial: InitialConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_oversample() -> usize {
    1
}

fn default_checks() -> Vec<String> {
    vec![
        "audit".into(),
        "consistency".into(),
        "damped_energy".into(),
        "energy_domination".into(),
        "dichotomy".into(),
    ]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub r_start: f64,
    pub r_end: f64,
    pub grid_points: usize,
}

fn default_inner() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FamilyConfig {
    /// Homogeneous exterior: q = -k^2.
    Constant {
        k_squared: f64,
        #[serde(default = "default_inner")]
        inner_radius: f64,
    },
    /// Decaying radial potential: q = -background + A r^-p + i B r^-s.
    Potential {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        background: f64,
        long_range_amplitude: f64,
        long_range_power: f64,
        short_range_amplitude: f64,
        short_range_power: f64,
    },
    /// Concentric layers: q = -wavenumber * value(shell containing x).
    Shells {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        radii: Vec<f64>,
        values: Vec<f64>,
        wavenumber: f64,
    },
    /// Plane-parallel layers cut by level sets of the last coordinate.
    Slabs {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        cuts: Vec<f64>,
        values: Vec<f64>,
        wavenumber: f64,
    },
    /// Piecewise-constant radial profile: q = -level(r) from a table.
    Tabulated {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        radii: Vec<f64>,
        levels: Vec<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    pub damping: DampingChoice,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingChoice {
    InversePower,
    TwoOverR,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub mode: usize,
    #[serde(default)]
    pub value: [f64; 2],
    #[serde(default = "default_derivative")]
    pub derivative: [f64; 2],
    /// Seed every mode from the scenario's random stream instead.
    #[serde(default)]
    pub random: bool,
}

fn default_derivative() -> [f64; 2] {
    [1.0, 0.0]
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            mode: 0,
            value: [0.0, 0.0],
            derivative: default_derivative(),
            random: false,
        }
    }
}

/// Checks a run can perform, in their execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Audit,
    Consistency,
    SeparatingCondition,
    RadialMonotonicity,
    DampedEnergy,
    LiftedEnergy,
    EnergyDomination,
    SurfaceBound,
    Dichotomy,
    QuotientForm,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Audit,
        CheckKind::Consistency,
        CheckKind::SeparatingCondition,
        CheckKind::RadialMonotonicity,
        CheckKind::DampedEnergy,
        CheckKind::LiftedEnergy,
        CheckKind::EnergyDomination,
        CheckKind::SurfaceBound,
        CheckKind::Dichotomy,
        CheckKind::QuotientForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Audit => "audit",
            CheckKind::Consistency => "consistency",
            CheckKind::SeparatingCondition => "separating_condition",
            CheckKind::RadialMonotonicity => "radial_monotonicity",
            CheckKind::DampedEnergy => "damped_energy",
            CheckKind::LiftedEnergy => "lifted_energy",
            CheckKind::EnergyDomination => "energy_domination",
            CheckKind::SurfaceBound => "surface_bound",
            CheckKind::Dichotomy => "dichotomy",
            CheckKind::QuotientForm => "quotient_form",
        }
    }

    /// True for checks that probe the standing assumptions rather than the
    /// proved conclusions.
    pub fn is_assumption_check(self) -> bool {
        matches!(
            self,
            CheckKind::Audit | CheckKind::SeparatingCondition | CheckKind::RadialMonotonicity
        )
    }
}

impl std::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| bad(format!("unknown check '{s}'")))
    }
}

/// Fully assembled scenario, ready to run.
pub struct Scenario {
    pub name: String,
    pub field: CoefficientField,
    pub gauges: RadialGauges,
    pub basis: SphereBasis,
    pub medium: Option<LayeredMedium>,
    pub probes: Vec<[f64; 3]>,
    pub grid: Vec<f64>,
    pub window: (f64, f64),
    pub v0: ModeVector,
    pub dv0: ModeVector,
    pub checks: Vec<CheckKind>,
    pub slack: SlackPolicy,
    pub tolerance: f64,
    pub seed: u64,
    pub weight_exponent: Option<f64>,
    pub config_hash: String,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("grid_points", &self.grid.len())
            .field("modes", &self.basis.mode_count())
            .field("checks", &self.checks)
            .field("seed", &self.seed)
            .field("config_hash", &self.config_hash)
            .finish_non_exhaustive()
    }
}

pub fn load_str(text: &str) -> Result<Scenario, ScenarioError> {
    let cfg: ScenarioConfig = toml::from_str(text)?;
    assemble(cfg, text)
}

/// Load after applying command-line overrides to the parsed config. The
/// config hash still reflects the raw text; the overridden knobs are
/// reported separately by the run.
pub fn load_str_with(
    text: &str,
    tweak: impl FnOnce(&mut ScenarioConfig),
) -> Result<Scenario, ScenarioError> {
    let mut cfg: ScenarioConfig = toml::from_str(text)?;
    tweak(&mut cfg);
    assemble(cfg, text)
}

pub fn load_path(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    load_str(&text)
}

fn assemble(cfg: ScenarioConfig, raw: &str) -> Result<Scenario, ScenarioError> {
    if cfg.dimension != 2 && cfg.dimension != 3 {
        return Err(bad(format!("dimension must be 2 or 3, got {}", cfg.dimension)));
    }
    if !(cfg.window.r_end > cfg.window.r_start) {
        return Err(bad(format!(
            "window [{}, {}] is empty",
            cfg.window.r_start, cfg.window.r_end
        )));
    }
    if cfg.window.grid_points < 8 {
        return Err(bad(format!(
            "grid_points must be at least 8, got {}",
            cfg.window.grid_points
        )));
    }
    if !(cfg.tolerance > 0.0 && cfg.tolerance <= 1e-2) {
        return Err(bad(format!(
            "tolerance must lie in (0, 1e-2], got {}",
            cfg.tolerance
        )));
    }
    if let Some(m) = cfg.weight_exponent {
        if !(m > 0.0) {
            return Err(bad(format!("weight_exponent must be positive, got {m}")));
        }
    }
    if let Some(s) = cfg.slack {
        if !(s >= 0.0) {
            return Err(bad(format!("slack must be nonnegative, got {s}")));
        }
    }
    if let Some(e) = cfg.gauges.epsilon {
        if !(e > 0.0 && e < 2.0) {
            return Err(bad(format!("epsilon must lie in (0, 2), got {e}")));
        }
    }
    if let Some(b) = cfg.gauges.beta {
        if !(b > 0.0 && b < 1.0) {
            return Err(bad(format!("beta must lie in (0, 1), got {b}")));
        }
    }
    if cfg.quadrature_oversample == 0 || cfg.quadrature_oversample > 8 {
        return Err(bad(format!(
            "quadrature_oversample must lie in 1..=8, got {}",
            cfg.quadrature_oversample
        )));
    }

    let mut checks = Vec::with_capacity(cfg.checks.len());
    for s in &cfg.checks {
        let kind = CheckKind::from_str(s)?;
        if checks.contains(&kind) {
            return Err(bad(format!("check '{s}' listed twice")));
        }
        checks.push(kind);
    }
    if checks.is_empty() {
        return Err(bad("the checks list is empty"));
    }

    let basis = SphereBasis::build_oversampled(
        cfg.dimension,
        cfg.cutoff_degree,
        cfg.quadrature_oversample,
    )?;

    let mut probes = ray_set(cfg.dimension, 16)?;
    if matches!(cfg.family, FamilyConfig::Slabs { .. }) {
        // Declare the interface crossings of every quadrature direction,
        // not just the scan rays, so the integrator restarts exactly where
        // the sampled operator jumps.
        probes.extend_from_slice(basis.nodes());
    }

    let needs_inverse_power = matches!(
        cfg.family,
        FamilyConfig::Potential { .. } | FamilyConfig::Shells { .. } | FamilyConfig::Slabs { .. }
    );
    if needs_inverse_power && cfg.gauges.damping == DampingChoice::TwoOverR {
        return Err(bad(
            "this family fixes the damping to the inverse_power gauge",
        ));
    }

    let mut medium = None;
    let (field, gauges) = match &cfg.family {
        FamilyConfig::Constant {
            k_squared,
            inner_radius,
        } => {
            if !(*k_squared > 0.0) {
                return Err(bad(format!("k_squared must be positive, got {k_squared}")));
            }
            let field =
                CoefficientField::constant(cfg.dimension, *k_squared, *inner_radius)
                    .certify_divergence();
            (field, build_direct_gauges(&cfg.gauges)?)
        }
        FamilyConfig::Potential {
            inner_radius,
            background,
            long_range_amplitude,
            long_range_power,
            short_range_amplitude,
            short_range_power,
        } => {
            let epsilon = cfg
                .gauges
                .epsilon
                .ok_or_else(|| bad("the potential family requires gauges.epsilon"))?;
            if !(*long_range_power > 0.0) || !(*short_range_power > 0.0) {
                return Err(bad("decay powers must be positive"));
            }
            let bg = *background;
            let (la, lp) = (*long_range_amplitude, *long_range_power);
            let (sa, sp) = (*short_range_amplitude, *short_range_power);
            let model = PotentialModel {
                dimension: cfg.dimension,
                inner_radius: *inner_radius,
                floor: bg,
                background: Arc::new(move |_, _, _| bg),
                long_range: Arc::new(move |r: f64, _: &[f64; 3]| la * r.powf(-lp)),
                long_range_slope: Arc::new(move |r: f64, _: &[f64; 3]| {
                    -lp * la * r.powf(-lp - 1.0)
                }),
                short_range: Arc::new(move |r: f64, _: &[f64; 3]| {
                    Complex64::new(0.0, sa * r.powf(-sp))
                }),
                epsilon,
                jump_radii: vec![],
                radial: true,
            };
            build_potential_field(&model)?
        }
        FamilyConfig::Shells {
            inner_radius,
            radii,
            values,
            wavenumber,
        } => {
            let mut m = LayeredMedium::shells(
                cfg.dimension,
                *inner_radius,
                radii.clone(),
                values.clone(),
                *wavenumber,
            );
            if let Some(e) = cfg.gauges.epsilon {
                m.epsilon = e;
            }
            let built = build_layered_field(&m, &probes)?;
            medium = Some(m);
            built
        }
        FamilyConfig::Slabs {
            inner_radius,
            cuts,
            values,
            wavenumber,
        } => {
            let mut m = LayeredMedium::slabs(
                cfg.dimension,
                *inner_radius,
                cuts.clone(),
                values.clone(),
                *wavenumber,
            );
            if let Some(e) = cfg.gauges.epsilon {
                m.epsilon = e;
            }
            let built = build_layered_field(&m, &probes)?;
            medium = Some(m);
            built
        }
        FamilyConfig::Tabulated {
            inner_radius,
            radii,
            levels,
        } => (
            build_tabulated_field(cfg.dimension, *inner_radius, radii, levels)?,
            build_direct_gauges(&cfg.gauges)?,
        ),
    };

    let gauges = match cfg.gauges.beta {
        Some(b) => gauges.with_beta(b)?,
        None => gauges,
    };

    if !(cfg.window.r_start > field.inner_radius()) {
        return Err(bad(format!(
            "r_start {} must exceed the inner radius {}",
            cfg.window.r_start,
            field.inner_radius()
        )));
    }

    for kind in &checks {
        if matches!(
            kind,
            CheckKind::SeparatingCondition | CheckKind::RadialMonotonicity
        ) && medium.is_none()
        {
            return Err(bad(format!(
                "check '{kind}' requires a layered family"
            )));
        }
    }

    let nm = basis.mode_count();
    let (v0, dv0) = if cfg.initial.random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut v = ModeVector::zeros(nm);
        let mut d = ModeVector::zeros(nm);
        for i in 0..nm {
            v.coeffs[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            d.coeffs[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        (v, d)
    } else {
        if cfg.initial.mode >= nm {
            return Err(bad(format!(
                "initial.mode {} is outside the {} basis modes",
                cfg.initial.mode, nm
            )));
        }
        let mut v = ModeVector::zeros(nm);
        let mut d = ModeVector::zeros(nm);
        v.coeffs[cfg.initial.mode] = Complex64::new(cfg.initial.value[0], cfg.initial.value[1]);
        d.coeffs[cfg.initial.mode] =
            Complex64::new(cfg.initial.derivative[0], cfg.initial.derivative[1]);
        if v.norm_sq() == 0.0 && d.norm_sq() == 0.0 {
            return Err(bad("initial state is identically zero"));
        }
        (v, d)
    };

    let slack = match cfg.slack {
        Some(s) => SlackPolicy {
            monotone: s,
            ..SlackPolicy::default()
        },
        None => SlackPolicy::default(),
    };

    let mut hasher = Sha256::new();
    hasher.update(raw.as_bytes());
    let config_hash = format!("{:x}", hasher.finalize());

    Ok(Scenario {
        name: cfg.name,
        field,
        gauges,
        basis,
        medium,
        probes,
        grid: crate::quad::linspace(cfg.window.r_start, cfg.window.r_end, cfg.window.grid_points),
        window: (cfg.window.r_start, cfg.window.r_end),
        v0,
        dv0,
        checks,
        slack,
        tolerance: cfg.tolerance,
        seed: cfg.seed,
        weight_exponent: cfg.weight_exponent,
        config_hash,
    })
}

fn build_direct_gauges(cfg: &GaugeConfig) -> Result<RadialGauges, ScenarioError> {
    match cfg.damping {
        DampingChoice::InversePower => {
            let e = cfg
                .epsilon
                .ok_or_else(|| bad("the inverse_power damping requires gauges.epsilon"))?;
            Ok(RadialGauges::inverse_power(e)?)
        }
        DampingChoice::TwoOverR => {
            if cfg.epsilon.is_some() {
                return Err(bad("epsilon only applies to the inverse_power damping"));
            }
            Ok(RadialGauges::two_over_r())
        }
    }
}

fn build_tabulated_field(
    dimension: usize,
    inner_radius: f64,
    radii: &[f64],
    levels: &[f64],
) -> Result<CoefficientField, ScenarioError> {
    if radii.is_empty() || radii.len() != levels.len() {
        return Err(bad(
            "tabulated family needs matching nonempty radii and levels",
        ));
    }
    for w in radii.windows(2) {
        if w[1] <= w[0] {
            return Err(bad("tabulated radii must be strictly increasing"));
        }
    }
    let table: Arc<Vec<(f64, f64)>> =
        Arc::new(radii.iter().copied().zip(levels.iter().copied()).collect());
    let lookup = move |table: &[(f64, f64)], r: f64, side: Side| -> f64 {
        let idx = match side {
            Side::Above => table.partition_point(|&(b, _)| b <= r),
            Side::Below => table.partition_point(|&(b, _)| b < r),
        };
        table[idx.saturating_sub(1)].1
    };
    let t = table.clone();
    let q = move |r: f64, _: &[f64; 3], s: Side| Complex64::new(-lookup(&t, r, s), 0.0);
    let t = table.clone();
    let leading = move |r: f64, _: &[f64; 3], s: Side| -lookup(&t, r, s);
    let shift_dim = dimension;
    let pert = move |r: f64, _: &[f64; 3], _: Side| {
        Complex64::new(crate::coeff::reduction_shift(shift_dim, r), 0.0)
    };
    let t = table.clone();
    let slope_mean = move |r: f64, _: &[f64; 3], h: f64| {
        (-lookup(&t, r + h, Side::Above) + lookup(&t, r, Side::Above)) / h
    };
    let jumps: Vec<f64> = radii[1..].to_vec();
    let certified = levels.iter().all(|&l| l > 0.0);
    let field = CoefficientField::new(
        dimension,
        inner_radius,
        0.25,
        jumps,
        true,
        Arc::new(q),
        Arc::new(leading),
        Arc::new(pert),
        Arc::new(|_, _, _| 0.0),
        Arc::new(slope_mean),
    )?;
    Ok(if certified {
        field.certify_divergence()
    } else {
        field
    })
}

/// Built-in scenarios, in presentation order.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("kato", KATO),
        ("decaying-potential", DECAYING_POTENTIAL),
        ("two-shell", TWO_SHELL),
        ("four-shell", FOUR_SHELL),
        ("slab-stack", SLAB_STACK),
        ("faded-tail", FADED_TAIL),
        ("inverted-shells", INVERTED_SHELLS),
    ]
}

pub fn catalog_entry(name: &str) -> Option<&'static str> {
    catalog().into_iter().find(|(n, _)| *n == name).map(|(_, t)| t)
}

const KATO: &str = r#"
name = "kato"
dimension = 3
cutoff_degree = 0
seed = 1
checks = [
  "audit", "consistency", "damped_energy", "lifted_energy",
  "energy_domination", "surface_bound", "dichotomy", "quotient_form",
]

[window]
r_start = 1.0
r_end = 50.0
grid_points = 600

[family]
kind = "constant"
k_squared = 1.0
inner_radius = 0.5

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
mode = 0
value = [0.0, 0.0]
derivative = [1.0, 0.0]
"#;

const DECAYING_POTENTIAL: &str = r#"
name = "decaying-potential"
dimension = 3
cutoff_degree = 0
seed = 2
checks = [
  "audit", "consistency", "damped_energy", "lifted_energy",
  "energy_domination", "surface_bound", "dichotomy", "quotient_form",
]

[window]
r_start = 1.2
r_end = 40.0
grid_points = 500

[family]
kind = "potential"
inner_radius = 0.5
background = 1.0
long_range_amplitude = 1.0
long_range_power = 0.5
short_range_amplitude = 1.0
short_range_power = 1.5

[gauges]
damping = "inverse_power"
epsilon = 0.5

[initial]
mode = 0
value = [0.3, 0.0]
derivative = [1.0, 0.2]
"#;

const TWO_SHELL: &str = r#"
name = "two-shell"
dimension = 3
cutoff_degree = 0
seed = 3
checks = [
  "audit", "consistency", "separating_condition", "radial_monotonicity",
  "damped_energy", "lifted_energy", "energy_domination", "surface_bound",
  "dichotomy",
]

[window]
r_start = 1.0
r_end = 30.0
grid_points = 400

[family]
kind = "shells"
inner_radius = 0.5
radii = [2.0]
values = [1.0, 4.0]
wavenumber = 1.0

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
mode = 0
value = [0.0, 0.0]
derivative = [1.0, 0.0]
"#;

const FOUR_SHELL: &str = r#"
name = "four-shell"
dimension = 3
cutoff_degree = 1
seed = 4
checks = [
  "audit", "consistency", "separating_condition", "radial_monotonicity",
  "damped_energy", "lifted_energy", "energy_domination", "surface_bound",
  "dichotomy",
]

[window]
r_start = 1.2
r_end = 40.0
grid_points = 500

[family]
kind = "shells"
inner_radius = 0.5
radii = [2.0, 4.0, 7.0]
values = [1.0, 2.0, 3.0, 5.0]
wavenumber = 1.0

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
random = true
"#;

const SLAB_STACK: &str = r#"
name = "slab-stack"
dimension = 3
cutoff_degree = 4
seed = 5
quadrature_oversample = 2
checks = [
  "audit", "consistency", "separating_condition", "radial_monotonicity",
  "damped_energy", "lifted_energy", "energy_domination", "surface_bound",
  "dichotomy",
]

[window]
r_start = 1.0
r_end = 12.0
grid_points = 300

[family]
kind = "slabs"
inner_radius = 0.5
cuts = [-5.0, -2.0, 2.0, 5.0]
values = [1.8, 1.4, 1.0, 1.5, 2.0]
wavenumber = 1.0

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
random = true
"#;

const FADED_TAIL: &str = r#"
name = "faded-tail"
dimension = 3
cutoff_degree = 0
seed = 6
checks = ["damped_energy"]

[window]
r_start = 1.0
r_end = 20.0
grid_points = 240

[family]
kind = "tabulated"
inner_radius = 0.5
radii = [1.0, 5.0]
levels = [1.0, 0.25]

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
mode = 0
value = [0.0, 0.0]
derivative = [1.0, 0.0]
"#;

const INVERTED_SHELLS: &str = r#"
name = "inverted-shells"
dimension = 3
cutoff_degree = 0
seed = 7
checks = ["audit", "separating_condition", "damped_energy"]

[window]
r_start = 1.0
r_end = 20.0
grid_points = 240

[family]
kind = "shells"
inner_radius = 0.5
radii = [2.0]
values = [2.0, 1.0]
wavenumber = 1.0

[gauges]
damping = "inverse_power"
epsilon = 1.0

[initial]
mode = 0
value = [0.0, 0.0]
derivative = [1.0, 0.0]
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_assembles() {
        for (name, text) in catalog() {
            let sc = load_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(sc.name, name);
            assert!(!sc.grid.is_empty());
            assert!(!sc.checks.is_empty());
            assert_eq!(sc.config_hash.len(), 64);
        }
    }

    #[test]
    fn hashes_are_stable_and_content_sensitive() {
        let a = load_str(KATO).unwrap();
        let b = load_str(KATO).unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        let c = load_str(TWO_SHELL).unwrap();
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = KATO.replace("seed = 1", "seed = 1\nfrobnicate = true");
        assert!(matches!(load_str(&text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn out_of_range_epsilon_is_rejected() {
        let text = KATO.replace("epsilon = 1.0", "epsilon = 3.0");
        let err = load_str(&text).unwrap_err();
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn unknown_check_names_are_rejected() {
        let text = KATO.replace("\"consistency\"", "\"telepathy\"");
        let err = load_str(&text).unwrap_err();
        assert!(err.to_string().contains("telepathy"), "{err}");
    }

    #[test]
    fn medium_checks_require_a_layered_family() {
        let text = KATO.replace("\"consistency\"", "\"separating_condition\"");
        let err = load_str(&text).unwrap_err();
        assert!(err.to_string().contains("layered"), "{err}");
    }

    #[test]
    fn two_over_r_damping_is_refused_for_built_families() {
        let text = TWO_SHELL
            .replace("damping = \"inverse_power\"\nepsilon = 1.0", "damping = \"two_over_r\"");
        let err = load_str(&text).unwrap_err();
        assert!(err.to_string().contains("inverse_power"), "{err}");
    }

    #[test]
    fn random_initial_state_is_reproducible() {
        let a = load_str(FOUR_SHELL).unwrap();
        let b = load_str(FOUR_SHELL).unwrap();
        assert_eq!(a.v0.coeffs, b.v0.coeffs);
        assert_eq!(a.dv0.coeffs, b.dv0.coeffs);
        assert!(a.v0.norm_sq() > 0.0);
        let other = load_str(&FOUR_SHELL.replace("seed = 4", "seed = 14")).unwrap();
        assert_ne!(a.v0.coeffs, other.v0.coeffs);
    }

    #[test]
    fn grid_and_window_are_respected() {
        let sc = load_str(KATO).unwrap();
        assert_eq!(sc.grid.len(), 600);
        assert_eq!(sc.grid[0], 1.0);
        assert_eq!(*sc.grid.last().unwrap(), 50.0);
        let coarse = KATO.replace("grid_points = 600", "grid_points = 4");
        assert!(load_str(&coarse).is_err());
    }

    #[test]
    fn tabulated_field_steps_where_declared() {
        let sc = load_str(FADED_TAIL).unwrap();
        let n = [0.0, 0.0, 1.0];
        assert_eq!(sc.field.q_at(3.0, &n, Side::Above).re, -1.0);
        assert_eq!(sc.field.q_at(5.0, &n, Side::Below).re, -1.0);
        assert_eq!(sc.field.q_at(5.0, &n, Side::Above).re, -0.25);
        assert_eq!(sc.field.jump_radii(), &[5.0]);
        assert!(sc.field.divergence_certified());
        // The mean slope across the step matches the level difference.
        let mean = sc.field.leading_slope_mean_at(4.9, &n, 0.2);
        assert!((mean - 0.75 / 0.2).abs() < 1e-12, "{mean}");
    }

    #[test]
    fn slab_probe_set_includes_quadrature_nodes() {
        let sc = load_str(SLAB_STACK).unwrap();
        assert!(sc.probes.len() > 16);
        assert!(!sc.field.jump_radii().is_empty());
        assert!(sc.medium.is_some());
    }

    #[test]
    fn beta_pin_flows_into_the_gauges() {
        let text = KATO.replace("epsilon = 1.0", "epsilon = 1.0\nbeta = 0.5");
        let sc = load_str(&text).unwrap();
        assert_eq!(sc.gauges.pinned_beta(), Some(0.5));
        let bad_beta = KATO.replace("epsilon = 1.0", "epsilon = 1.0\nbeta = 1.5");
        assert!(load_str(&bad_beta).is_err());
    }

    #[test]
    fn zero_initial_state_is_rejected() {
        let text = KATO.replace("derivative = [1.0, 0.0]", "derivative = [0.0, 0.0]");
        let err = load_str(&text).unwrap_err();
        assert!(err.to_string().contains("zero"), "{err}");
    }
}
