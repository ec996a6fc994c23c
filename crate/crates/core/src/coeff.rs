//! Coefficient fields for the reduced wave equation and the radial gauge
//! functions measured against them.
//!
//! A field carries q(x) on the exterior domain |x| > R0 together with the
//! split Q = Q0 + Q1 of the shifted coefficient
//!
//!   Q(x) = q(x) + (N-1)(N-3) / (4 r^2),
//!
//! where Q0 is real and nonpositive and Q1 collects everything else. The
//! radial slope of Q0 enters through a difference-quotient dominator: a
//! function Q0r(x; h) with
//!
//!   (1/h) * (Q0((r+h) omega) - Q0(r omega)) <= Q0r(r omega; h)
//!
//! for 0 < h <= h0, together with its limit Q0r(x) as h drops to zero. Step
//! interfaces contribute nothing to the dominator as long as Q0 only jumps
//! downward in r (the medium gets denser outward), which is exactly the
//! structure the growth estimates need.
//!
//! Evaluators take an explicit side so that a declared jump radius can be
//! queried for both its from-above value (the stored one; all evaluation is
//! right-continuous by convention) and its left limit.
//!
//! The gauges pair the field with a positive radial damping h(r) <= 2/r and
//! a positive weight F(r): from these the derived radial quantities
//!
//!   a(r) = sup_{|x|=r} |Q1| / h(r),
//!   b(r) = inf_{|x|=r} -(Q0 + Q0r / h(r)),
//!   p(r) = inf_{|x|=r} -(2 Q0 + r Q0r)
//!
//! feed every later estimate. Suprema and infima over spheres are taken over
//! a supplied angular probe set (normally the basis quadrature nodes), which
//! makes them sampled quantities by construction.

use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("unsupported dimension {0}: supported ambient dimensions are 2 and 3")]
    UnsupportedDimension(usize),
    #[error("inner radius must be positive, got {0}")]
    BadInnerRadius(f64),
    #[error("difference-quotient horizon h0 must be positive, got {0}")]
    BadHorizon(f64),
    #[error("radius {r} is not inside the exterior domain (inner radius {inner})")]
    OutsideDomain { r: f64, inner: f64 },
    #[error("gauge parameter epsilon must lie in (0, 2), got {0}")]
    BadEpsilon(f64),
    #[error("domination constant beta must lie in (0, 1), got {0}")]
    BadBeta(f64),
    #[error("empty angular probe set")]
    NoProbes,
    #[error("background floor must be positive, got {0}")]
    NonPositiveFloor(f64),
    #[error("bad layer table: {0}")]
    BadLayerTable(String),
}

/// Which one-sided value to take at a declared jump radius. Everywhere else
/// the two sides agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Shift picked up by the substitution v = r^((N-1)/2) u(r omega):
/// (N-1)(N-3) / (4 r^2). Zero in dimension 3, -1/(4 r^2) in dimension 2.
pub fn reduction_shift(dimension: usize, r: f64) -> f64 {
    let n = dimension as f64;
    (n - 1.0) * (n - 3.0) / (4.0 * r * r)
}

pub type RealEvaluator = Arc<dyn Fn(f64, &[f64; 3], Side) -> f64 + Send + Sync>;
pub type ComplexEvaluator = Arc<dyn Fn(f64, &[f64; 3], Side) -> Complex64 + Send + Sync>;
/// (r, omega, h) -> dominator of the forward difference quotient of Q0.
pub type QuotientEvaluator = Arc<dyn Fn(f64, &[f64; 3], f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CoefficientField {
    dimension: usize,
    inner_radius: f64,
    horizon: f64,
    jump_radii: Vec<f64>,
    /// Angularly constant fields admit a diagonal radial system.
    radial_symmetric: bool,
    /// Set when the family guarantees inf Re(-q) stays above a positive
    /// constant analytically, so r^2 inf Re(-q) diverges without needing a
    /// numeric trend argument.
    divergence_certified: bool,
    q: ComplexEvaluator,
    leading: RealEvaluator,
    perturbation: ComplexEvaluator,
    leading_slope: RealEvaluator,
    leading_slope_mean: QuotientEvaluator,
}

impl CoefficientField {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dimension: usize,
        inner_radius: f64,
        horizon: f64,
        mut jump_radii: Vec<f64>,
        radial_symmetric: bool,
        q: ComplexEvaluator,
        leading: RealEvaluator,
        perturbation: ComplexEvaluator,
        leading_slope: RealEvaluator,
        leading_slope_mean: QuotientEvaluator,
    ) -> Result<Self, FieldError> {
        if dimension != 2 && dimension != 3 {
            return Err(FieldError::UnsupportedDimension(dimension));
        }
        if !(inner_radius > 0.0) {
            return Err(FieldError::BadInnerRadius(inner_radius));
        }
        if !(horizon > 0.0) {
            return Err(FieldError::BadHorizon(horizon));
        }
        jump_radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        jump_radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        jump_radii.retain(|&r| r > inner_radius);
        Ok(CoefficientField {
            dimension,
            inner_radius,
            horizon,
            jump_radii,
            radial_symmetric,
            divergence_certified: false,
            q,
            leading,
            perturbation,
            leading_slope,
            leading_slope_mean,
        })
    }

    /// Mark the divergence of r^2 inf Re(-q) as analytically certain (for
    /// families whose leading coefficient has a positive floor).
    pub fn certify_divergence(mut self) -> Self {
        self.divergence_certified = true;
        self
    }

    pub fn divergence_certified(&self) -> bool {
        self.divergence_certified
    }

    /// Constant-coefficient field q = -k^2 with the whole shift carried by
    /// the perturbing part.
    pub fn constant(dimension: usize, k_squared: f64, inner_radius: f64) -> Self {
        let q = move |_r: f64, _n: &[f64; 3], _s: Side| Complex64::new(-k_squared, 0.0);
        let leading = move |_r: f64, _n: &[f64; 3], _s: Side| -k_squared;
        let pert =
            move |r: f64, _n: &[f64; 3], _s: Side| Complex64::new(reduction_shift(dimension, r), 0.0);
        CoefficientField::new(
            dimension,
            inner_radius,
            1.0,
            Vec::new(),
            true,
            Arc::new(q),
            Arc::new(leading),
            Arc::new(pert),
            Arc::new(|_, _, _| 0.0),
            Arc::new(|_, _, _| 0.0),
        )
        .expect("constant field parameters are valid")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// Largest h for which the difference-quotient dominator is declared.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_radii(&self) -> &[f64] {
        &self.jump_radii
    }

    pub fn is_radial(&self) -> bool {
        self.radial_symmetric
    }

    fn check_radius(&self, r: f64) -> Result<(), FieldError> {
        if r > self.inner_radius && r.is_finite() {
            Ok(())
        } else {
            Err(FieldError::OutsideDomain {
                r,
                inner: self.inner_radius,
            })
        }
    }

    pub fn q_at(&self, r: f64, omega: &[f64; 3], side: Side) -> Complex64 {
        (self.q)(r, omega, side)
    }

    /// Nonpositive part Q0 of the shifted coefficient.
    pub fn leading_at(&self, r: f64, omega: &[f64; 3], side: Side) -> f64 {
        (self.leading)(r, omega, side)
    }

    /// Remainder part Q1 of the shifted coefficient.
    pub fn perturbation_at(&self, r: f64, omega: &[f64; 3], side: Side) -> Complex64 {
        (self.perturbation)(r, omega, side)
    }

    /// Limit dominator Q0r(x) of the forward difference quotients of Q0.
    pub fn leading_slope_at(&self, r: f64, omega: &[f64; 3], side: Side) -> f64 {
        (self.leading_slope)(r, omega, side)
    }

    /// Finite-h dominator Q0r(x; h).
    pub fn leading_slope_mean_at(&self, r: f64, omega: &[f64; 3], h: f64) -> f64 {
        (self.leading_slope_mean)(r, omega, h)
    }

    /// Shifted coefficient Q = q + (N-1)(N-3)/(4 r^2); by construction this
    /// must equal Q0 + Q1 wherever the field is consistent.
    pub fn shifted_at(&self, r: f64, omega: &[f64; 3], side: Side) -> Complex64 {
        self.q_at(r, omega, side) + reduction_shift(self.dimension, r)
    }

    /// sup over the probe set of |Q1| on the sphere of radius r.
    pub fn perturbation_sup(&self, probes: &[[f64; 3]], r: f64) -> Result<f64, FieldError> {
        self.check_radius(r)?;
        if probes.is_empty() {
            return Err(FieldError::NoProbes);
        }
        Ok(probes
            .iter()
            .map(|n| self.perturbation_at(r, n, Side::Above).norm())
            .fold(0.0, f64::max))
    }

    /// inf over the probe set of Re(-q) on the sphere of radius r.
    pub fn neg_q_floor(&self, probes: &[[f64; 3]], r: f64) -> Result<f64, FieldError> {
        self.check_radius(r)?;
        if probes.is_empty() {
            return Err(FieldError::NoProbes);
        }
        Ok(probes
            .iter()
            .map(|n| -self.q_at(r, n, Side::Above).re)
            .fold(f64::INFINITY, f64::min))
    }

    /// Gauge-normalized perturbation sup a(r) = sup |Q1| / h(r).
    pub fn gauged_perturbation(
        &self,
        gauges: &RadialGauges,
        probes: &[[f64; 3]],
        r: f64,
    ) -> Result<f64, FieldError> {
        Ok(self.perturbation_sup(probes, r)? / gauges.damping(r))
    }

    /// Damped leading floor b(r) = inf -(Q0 + Q0r / h(r)).
    pub fn damped_leading_floor(
        &self,
        gauges: &RadialGauges,
        probes: &[[f64; 3]],
        r: f64,
    ) -> Result<f64, FieldError> {
        self.check_radius(r)?;
        if probes.is_empty() {
            return Err(FieldError::NoProbes);
        }
        let hinv = 1.0 / gauges.damping(r);
        Ok(probes
            .iter()
            .map(|n| {
                -(self.leading_at(r, n, Side::Above) + hinv * self.leading_slope_at(r, n, Side::Above))
            })
            .fold(f64::INFINITY, f64::min))
    }

    /// Radially weighted leading floor p(r) = inf -(2 Q0 + r Q0r).
    pub fn weighted_leading_floor(&self, probes: &[[f64; 3]], r: f64) -> Result<f64, FieldError> {
        self.check_radius(r)?;
        if probes.is_empty() {
            return Err(FieldError::NoProbes);
        }
        Ok(probes
            .iter()
            .map(|n| {
                -(2.0 * self.leading_at(r, n, Side::Above)
                    + r * self.leading_slope_at(r, n, Side::Above))
            })
            .fold(f64::INFINITY, f64::min))
    }
}

/// Catalog of radial damping gauges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingKind {
    /// h(r) = r^(-1 - epsilon/2) with epsilon in (0, 2); integrable tail.
    InversePower { epsilon: f64 },
    /// h(r) = 2/r, the extreme admissible damping; not integrable.
    TwoOverR,
}

/// Catalog of radial weights. Only the logarithm is shipped: it is positive
/// beyond r = 1, unbounded, and has r * F'(r) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Log,
}

#[derive(Debug, Clone)]
pub struct RadialGauges {
    damping: DampingKind,
    weight: WeightKind,
    /// Pinned domination constant; when absent the audit selects the largest
    /// passing value from its ladder.
    beta: Option<f64>,
}

impl RadialGauges {
    pub fn new(damping: DampingKind, weight: WeightKind, beta: Option<f64>) -> Result<Self, FieldError> {
        if let DampingKind::InversePower { epsilon } = damping {
            if !(epsilon > 0.0 && epsilon < 2.0) {
                return Err(FieldError::BadEpsilon(epsilon));
            }
        }
        if let Some(b) = beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(FieldError::BadBeta(b));
            }
        }
        Ok(RadialGauges {
            damping,
            weight,
            beta,
        })
    }

    pub fn inverse_power(epsilon: f64) -> Result<Self, FieldError> {
        Self::new(DampingKind::InversePower { epsilon }, WeightKind::Log, None)
    }

    pub fn two_over_r() -> Self {
        Self::new(DampingKind::TwoOverR, WeightKind::Log, None).unwrap()
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self, FieldError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(FieldError::BadBeta(beta));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    pub fn damping_kind(&self) -> DampingKind {
        self.damping
    }

    pub fn pinned_beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.damping {
            DampingKind::InversePower { epsilon } => Some(epsilon),
            DampingKind::TwoOverR => None,
        }
    }

    /// h(r).
    pub fn damping(&self, r: f64) -> f64 {
        match self.damping {
            DampingKind::InversePower { epsilon } => r.powf(-1.0 - 0.5 * epsilon),
            DampingKind::TwoOverR => 2.0 / r,
        }
    }

    /// Closed-form cumulative integral of h from `from` to `to`.
    pub fn damping_integral(&self, from: f64, to: f64) -> f64 {
        match self.damping {
            DampingKind::InversePower { epsilon } => {
                let e2 = 0.5 * epsilon;
                (from.powf(-e2) - to.powf(-e2)) / e2
            }
            DampingKind::TwoOverR => 2.0 * (to / from).ln(),
        }
    }

    /// Tail integral of h from `from` to infinity; infinite for the 2/r gauge.
    pub fn damping_tail(&self, from: f64) -> f64 {
        match self.damping {
            DampingKind::InversePower { epsilon } => {
                let e2 = 0.5 * epsilon;
                from.powf(-e2) / e2
            }
            DampingKind::TwoOverR => f64::INFINITY,
        }
    }

    /// Whether the damping has a finite tail integral. Known analytically for
    /// every catalog gauge.
    pub fn damping_integrable(&self) -> bool {
        matches!(self.damping, DampingKind::InversePower { .. })
    }

    /// F(r).
    pub fn weight(&self, r: f64) -> f64 {
        match self.weight {
            WeightKind::Log => r.ln(),
        }
    }

    /// F'(r).
    pub fn weight_deriv(&self, r: f64) -> f64 {
        match self.weight {
            WeightKind::Log => 1.0 / r,
        }
    }

    /// Radius beyond which F is strictly positive.
    pub fn weight_positive_beyond(&self) -> f64 {
        match self.weight {
            WeightKind::Log => 1.0,
        }
    }

    /// Whether F(r) -> infinity, known analytically for the catalog.
    pub fn weight_unbounded(&self) -> bool {
        match self.weight {
            WeightKind::Log => true,
        }
    }
}
