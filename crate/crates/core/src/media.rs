//! Builders for the concrete coefficient families and the layered-media
//! geometry checkers.
//!
//! The potential family has q = -lambda(x) + V_l(x) + V_s(x): a background
//! lambda bounded below by a positive floor (right-continuous and
//! nondecreasing along rays where it steps), a C1 long-range part V_l whose
//! radial slope decays, and a short-range part V_s. Its shifted split is
//! Q0 = -lambda + V_l and Q1 = V_s + shift. The finite-h quotient dominator
//! of Q0 is the integral mean of the V_l slope over [r, r+h]; by the
//! fundamental theorem of calculus that mean equals the plain difference
//! quotient of V_l, which is what the builder installs. The background has
//! no dominator term at all: its steps only push Q0 downward, so they are
//! dominated by zero.
//!
//! The weighted family -Delta u - w mu(x) u = 0 with mu = mu0 + mu_l + mu_s
//! reduces to the potential family by lambda(x) = w mu0(x), V_l = -w mu_l,
//! V_s = -w mu_s, so that q = -w mu exactly. The piecewise constant main
//! term mu0 comes from a layered geometry: concentric shells, or planar
//! slabs orthogonal to the last coordinate axis. A layered medium is
//! admissible when every interface separates the lower value from the
//! higher one in the outward direction; for shells that is monotonicity of
//! the layer table, for slabs it is a sign pattern against the plane
//! levels. The stronger ray hypothesis (the main term nondecreasing along
//! almost every ray from the origin) is checked on a deterministic
//! low-discrepancy ray sample.

use crate::coeff::{reduction_shift, CoefficientField, FieldError, RadialGauges, Side};
use num_complex::Complex64;
use std::sync::Arc;

pub type AngularReal = Arc<dyn Fn(f64, &[f64; 3]) -> f64 + Send + Sync>;
pub type AngularComplex = Arc<dyn Fn(f64, &[f64; 3]) -> Complex64 + Send + Sync>;
pub type SteppedReal = Arc<dyn Fn(f64, &[f64; 3], Side) -> f64 + Send + Sync>;

/// Long/short-range potential family over a positive background.
#[derive(Clone)]
pub struct PotentialModel {
    pub dimension: usize,
    pub inner_radius: f64,
    /// Positive lower bound for the background.
    pub floor: f64,
    /// Background lambda(x) >= floor. Side-aware so stepped backgrounds
    /// stay right-continuous along rays.
    pub background: SteppedReal,
    /// Long-range part, C1 in the radius.
    pub long_range: AngularReal,
    pub long_range_slope: AngularReal,
    pub short_range: AngularComplex,
    /// Decay exponent in (0, 2) shared by the slope and short-range bounds.
    pub epsilon: f64,
    /// Radii where the background steps.
    pub jump_radii: Vec<f64>,
    /// True when every coefficient is angle-independent.
    pub radial: bool,
}

impl PotentialModel {
    /// Constant background, no perturbations.
    pub fn constant_background(
        dimension: usize,
        inner_radius: f64,
        level: f64,
        epsilon: f64,
    ) -> Self {
        PotentialModel {
            dimension,
            inner_radius,
            floor: level,
            background: Arc::new(move |_, _, _| level),
            long_range: Arc::new(|_, _| 0.0),
            long_range_slope: Arc::new(|_, _| 0.0),
            short_range: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
            epsilon,
            jump_radii: Vec::new(),
            radial: true,
        }
    }
}

/// Difference-quotient horizon installed on built fields.
const HORIZON: f64 = 0.25;

/// Geometric scan deciding whether the divergence of r^2 inf Re(-q) can be
/// certified from the model structure: the long-range part must visibly
/// decay below the background floor and the short-range part must stay
/// inside its power-law envelope. Sampled, so it only grants or withholds
/// the certificate; the audit re-checks divergence empirically either way.
fn decay_scan(model: &PotentialModel) -> bool {
    let dirs = scan_directions(model.dimension);
    let start = (2.0 * model.inner_radius).max(2.0);
    let radii: Vec<f64> = (0..20).map(|k| start * f64::powi(2.0, k)).collect();
    let sup_long = |r: f64| {
        dirs.iter()
            .map(|d| (model.long_range)(r, d).abs())
            .fold(0.0, f64::max)
    };
    let first = sup_long(radii[0]);
    let last = sup_long(*radii.last().unwrap());
    if !(last <= 0.1 * model.floor && (last <= 0.5 * first + 1e-12)) {
        return false;
    }
    let envelope = |r: f64| {
        dirs.iter()
            .map(|d| r.powf(1.0 + model.epsilon) * (model.short_range)(r, d).norm())
            .fold(0.0, f64::max)
    };
    let head = radii[..10].iter().copied().map(envelope).fold(0.0, f64::max);
    let tail = radii[10..].iter().copied().map(envelope).fold(0.0, f64::max);
    tail.is_finite() && tail <= 2.0 * head + 1.0
}

fn scan_directions(dimension: usize) -> Vec<[f64; 3]> {
    match dimension {
        2 => (0..8)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 4.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        _ => {
            let mut dirs = vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ];
            let s = 1.0 / 3f64.sqrt();
            dirs.push([s, s, s]);
            dirs.push([-s, s, -s]);
            dirs
        }
    }
}

/// Build the coefficient field and catalog gauges for a potential model:
/// damping r^(-1-epsilon/2) and logarithmic weight.
pub fn build_potential_field(
    model: &PotentialModel,
) -> Result<(CoefficientField, RadialGauges), FieldError> {
    if !(model.epsilon > 0.0 && model.epsilon < 2.0) {
        return Err(FieldError::BadEpsilon(model.epsilon));
    }
    if !(model.floor > 0.0) {
        return Err(FieldError::NonPositiveFloor(model.floor));
    }
    let dimension = model.dimension;

    let bg = model.background.clone();
    let lr = model.long_range.clone();
    let sr = model.short_range.clone();
    let q = Arc::new(move |r: f64, w: &[f64; 3], side: Side| {
        Complex64::new(-bg(r, w, side) + lr(r, w), 0.0) + sr(r, w)
    });

    let bg = model.background.clone();
    let lr = model.long_range.clone();
    let leading = Arc::new(move |r: f64, w: &[f64; 3], side: Side| -bg(r, w, side) + lr(r, w));

    let sr = model.short_range.clone();
    let perturbation = Arc::new(move |r: f64, w: &[f64; 3], _side: Side| {
        sr(r, w) + reduction_shift(dimension, r)
    });

    let slope = model.long_range_slope.clone();
    let leading_slope = Arc::new(move |r: f64, w: &[f64; 3], _side: Side| slope(r, w));

    let lr = model.long_range.clone();
    let leading_slope_mean =
        Arc::new(move |r: f64, w: &[f64; 3], h: f64| (lr(r + h, w) - lr(r, w)) / h);

    let field = CoefficientField::new(
        model.dimension,
        model.inner_radius,
        HORIZON,
        model.jump_radii.clone(),
        model.radial,
        q,
        leading,
        perturbation,
        leading_slope,
        leading_slope_mean,
    )?;
    let field = if decay_scan(model) {
        field.certify_divergence()
    } else {
        field
    };
    Ok((field, RadialGauges::inverse_power(model.epsilon)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerGeometry {
    /// Concentric shells; region k is the annulus between consecutive
    /// radii, with the last region unbounded.
    Shells { radii: Vec<f64> },
    /// Planar layers orthogonal to the last coordinate axis, bounded by
    /// the cut levels; the level list must straddle zero.
    Slabs { cuts: Vec<f64> },
}

/// Weighted medium with a piecewise constant main term over a layered
/// geometry, plus optional long/short-range perturbations.
#[derive(Clone)]
pub struct LayeredMedium {
    pub dimension: usize,
    pub inner_radius: f64,
    pub geometry: LayerGeometry,
    /// One value per region: innermost first for shells, bottom-to-top for
    /// slabs.
    pub values: Vec<f64>,
    /// Positive factor multiplying the whole medium.
    pub wavenumber: f64,
    pub epsilon: f64,
    /// Long-range perturbation of the medium and its radial slope.
    pub long_range: Option<(AngularReal, AngularReal)>,
    pub short_range: Option<AngularComplex>,
    /// Set false when the optional perturbations depend on the angle.
    pub radial_perturbations: bool,
}

impl LayeredMedium {
    pub fn shells(
        dimension: usize,
        inner_radius: f64,
        radii: Vec<f64>,
        values: Vec<f64>,
        wavenumber: f64,
    ) -> Self {
        LayeredMedium {
            dimension,
            inner_radius,
            geometry: LayerGeometry::Shells { radii },
            values,
            wavenumber,
            epsilon: 1.0,
            long_range: None,
            short_range: None,
            radial_perturbations: true,
        }
    }

    pub fn slabs(
        dimension: usize,
        inner_radius: f64,
        cuts: Vec<f64>,
        values: Vec<f64>,
        wavenumber: f64,
    ) -> Self {
        LayeredMedium {
            dimension,
            inner_radius,
            geometry: LayerGeometry::Slabs { cuts },
            values,
            wavenumber,
            epsilon: 1.0,
            long_range: None,
            short_range: None,
            radial_perturbations: true,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(FieldError::UnsupportedDimension(self.dimension));
        }
        if !(self.wavenumber > 0.0 && self.wavenumber.is_finite()) {
            return Err(FieldError::BadLayerTable(format!(
                "wavenumber must be positive and finite, got {}",
                self.wavenumber
            )));
        }
        if self.values.is_empty() || !self.values.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(FieldError::BadLayerTable(
                "layer values must be positive and finite".to_string(),
            ));
        }
        let boundary_count = match &self.geometry {
            LayerGeometry::Shells { radii } => {
                if !radii.windows(2).all(|w| w[0] < w[1]) || radii.iter().any(|&r| r <= 0.0) {
                    return Err(FieldError::BadLayerTable(
                        "shell radii must be positive and strictly increasing".to_string(),
                    ));
                }
                radii.len()
            }
            LayerGeometry::Slabs { cuts } => {
                if !cuts.windows(2).all(|w| w[0] < w[1]) {
                    return Err(FieldError::BadLayerTable(
                        "slab cuts must be strictly increasing".to_string(),
                    ));
                }
                if cuts.iter().any(|&c| c == 0.0)
                    || !cuts.iter().any(|&c| c < 0.0)
                    || !cuts.iter().any(|&c| c > 0.0)
                {
                    return Err(FieldError::BadLayerTable(
                        "slab cuts must straddle zero with no cut at zero".to_string(),
                    ));
                }
                cuts.len()
            }
        };
        if self.values.len() != boundary_count + 1 {
            return Err(FieldError::BadLayerTable(format!(
                "expected {} layer values for {} interfaces, got {}",
                boundary_count + 1,
                boundary_count,
                self.values.len()
            )));
        }
        Ok(())
    }

    /// Main term mu0 at radius r in direction omega, side-aware so the
    /// value at a crossing radius is the limit from the requested side
    /// along the ray.
    pub fn main_term(&self, r: f64, omega: &[f64; 3], side: Side) -> f64 {
        match &self.geometry {
            LayerGeometry::Shells { radii } => {
                let idx = match side {
                    Side::Above => radii.partition_point(|&x| x <= r),
                    Side::Below => radii.partition_point(|&x| x < r),
                };
                self.values[idx]
            }
            LayerGeometry::Slabs { cuts } => {
                let axis = omega[self.dimension - 1];
                let xn = r * axis;
                // Moving outward along the ray, xn moves with the sign of
                // the axis component; the requested radial side maps to the
                // matching side in xn.
                let from_above_in_xn = match side {
                    Side::Above => axis > 0.0,
                    Side::Below => axis < 0.0,
                };
                let idx = if from_above_in_xn {
                    cuts.partition_point(|&c| c <= xn)
                } else {
                    cuts.partition_point(|&c| c < xn)
                };
                self.values[idx]
            }
        }
    }

    /// Radii at which mu0 jumps along the given directions.
    pub fn crossing_radii(&self, probes: &[[f64; 3]]) -> Vec<f64> {
        match &self.geometry {
            LayerGeometry::Shells { radii } => radii.clone(),
            LayerGeometry::Slabs { cuts } => {
                let mut out = Vec::new();
                for w in probes {
                    let axis = w[self.dimension - 1];
                    if axis == 0.0 {
                        continue;
                    }
                    for &c in cuts {
                        let r = c / axis;
                        if r > 0.0 && r.is_finite() {
                            out.push(r);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Build the coefficient field and gauges for a layered medium by reducing
/// it to the potential family with lambda = w mu0, V_l = -w mu_l,
/// V_s = -w mu_s, so the built field has q = -w mu exactly. Slab media jump
/// where the probe rays cross the cut planes, so the probe set must be the
/// angular node set used downstream.
pub fn build_layered_field(
    medium: &LayeredMedium,
    probes: &[[f64; 3]],
) -> Result<(CoefficientField, RadialGauges), FieldError> {
    medium.validate()?;
    if probes.is_empty() && matches!(medium.geometry, LayerGeometry::Slabs { .. }) {
        return Err(FieldError::NoProbes);
    }
    let w = medium.wavenumber;
    let m = medium.clone();
    let background: SteppedReal =
        Arc::new(move |r: f64, omega: &[f64; 3], side: Side| w * m.main_term(r, omega, side));

    let long_range: AngularReal = match &medium.long_range {
        Some((f, _)) => {
            let f = f.clone();
            Arc::new(move |r, om| -w * f(r, om))
        }
        None => Arc::new(|_, _| 0.0),
    };
    let long_range_slope: AngularReal = match &medium.long_range {
        Some((_, df)) => {
            let df = df.clone();
            Arc::new(move |r, om| -w * df(r, om))
        }
        None => Arc::new(|_, _| 0.0),
    };
    let short_range: AngularComplex = match &medium.short_range {
        Some(f) => {
            let f = f.clone();
            Arc::new(move |r, om| -w * f(r, om))
        }
        None => Arc::new(|_, _| Complex64::new(0.0, 0.0)),
    };

    let floor = w * medium.values.iter().copied().fold(f64::INFINITY, f64::min);
    let radial = matches!(medium.geometry, LayerGeometry::Shells { .. })
        && (medium.radial_perturbations
            || (medium.long_range.is_none() && medium.short_range.is_none()));

    let model = PotentialModel {
        dimension: medium.dimension,
        inner_radius: medium.inner_radius,
        floor,
        background,
        long_range,
        long_range_slope,
        short_range,
        epsilon: medium.epsilon,
        jump_radii: medium.crossing_radii(probes),
        radial,
    };
    build_potential_field(&model)
}

/// One offending interface of a layered medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceViolation {
    pub interface_index: usize,
    /// Shell radius or slab plane level.
    pub location: f64,
    pub below: f64,
    pub above: f64,
}

/// Interface separating condition: across every interface, the value jump
/// times the outward alignment of the interface normal must be nonnegative.
/// For shells the normal points along the ray, so the layer table must be
/// nondecreasing; for slabs the alignment carries the sign of the plane
/// level. Returns the first offending interface, or None on pass.
pub fn check_separating_condition(
    medium: &LayeredMedium,
) -> Result<Option<InterfaceViolation>, FieldError> {
    medium.validate()?;
    match &medium.geometry {
        LayerGeometry::Shells { radii } => {
            for (k, &rk) in radii.iter().enumerate() {
                if medium.values[k + 1] < medium.values[k] {
                    return Ok(Some(InterfaceViolation {
                        interface_index: k,
                        location: rk,
                        below: medium.values[k],
                        above: medium.values[k + 1],
                    }));
                }
            }
            Ok(None)
        }
        LayerGeometry::Slabs { cuts } => {
            for (k, &c) in cuts.iter().enumerate() {
                let below = medium.values[k];
                let above = medium.values[k + 1];
                if (above - below) * c.signum() < 0.0 {
                    return Ok(Some(InterfaceViolation {
                        interface_index: k,
                        location: c,
                        below,
                        above,
                    }));
                }
            }
            Ok(None)
        }
    }
}

/// One ray along which the main term decreases.
#[derive(Debug, Clone, Copy)]
pub struct RayViolation {
    pub ray: [f64; 3],
    pub radius: f64,
    pub drop: f64,
}

/// Ray hypothesis: mu0(r omega) nondecreasing in r along every sampled
/// ray, checked on the given radial grid. Returns the first violation.
pub fn check_radial_monotonicity(
    medium: &LayeredMedium,
    rays: &[[f64; 3]],
    grid: &[f64],
) -> Result<Option<RayViolation>, FieldError> {
    medium.validate()?;
    if rays.is_empty() || grid.len() < 2 {
        return Err(FieldError::NoProbes);
    }
    for ray in rays {
        let mut prev = medium.main_term(grid[0], ray, Side::Above);
        for &r in &grid[1..] {
            let cur = medium.main_term(r, ray, Side::Above);
            if cur < prev {
                return Ok(Some(RayViolation {
                    ray: *ray,
                    radius: r,
                    drop: prev - cur,
                }));
            }
            prev = cur;
        }
    }
    Ok(None)
}

/// Deterministic low-discrepancy ray sample: golden-angle points on the
/// circle for dimension 2, a Fibonacci sphere for dimension 3.
pub fn ray_set(dimension: usize, count: usize) -> Result<Vec<[f64; 3]>, FieldError> {
    if count == 0 {
        return Err(FieldError::NoProbes);
    }
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    match dimension {
        2 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * ((k as f64 / golden) % 1.0);
                [t.cos(), t.sin(), 0.0]
            })
            .collect()),
        3 => Ok((0..count)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).sqrt();
                let t = 2.0 * std::f64::consts::PI * ((k as f64 / golden) % 1.0);
                [rho * t.cos(), rho * t.sin(), z]
            })
            .collect()),
        d => Err(FieldError::UnsupportedDimension(d)),
    }
}

/// Outward-alignment predicate for user-supplied nested-boundary samples:
/// every (point, normal) pair must have a nonnegative inner product.
/// Returns the first misaligned sample index.
pub fn check_outward_alignment(samples: &[([f64; 3], [f64; 3])]) -> Option<usize> {
    samples
        .iter()
        .position(|(p, n)| p[0] * n[0] + p[1] * n[1] + p[2] * n[2] < 0.0)
}
