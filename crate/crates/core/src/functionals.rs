//! Growth functionals along radial trajectories and the checks proved for
//! them: damped energy monotonicity, weighted monotonicity after a power
//! lift, the domination bound between the two energies, the surface-flux
//! bound, and the recurrent/expanding tail dichotomy.
//!
//! Every functional is a quadratic form of the state (v, v') against the
//! node-sampled coefficient operators, so the inequalities proved for the
//! continuous forms carry over verbatim: the sampled forms are convex
//! combinations of pointwise values with positive quadrature weights, and
//! the proofs only use pointwise sign information and Cauchy-Schwarz.

use crate::audit::AuditConstants;
use crate::coeff::{CoefficientField, FieldError, RadialGauges, Side};
use crate::radial::Trajectory;
use crate::sphere::{ModeVector, SphereBasis, SphereError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalsError {
    #[error("field dimension {field} does not match basis dimension {basis}")]
    DimensionMismatch { field: usize, basis: usize },
    #[error("trajectory has no rows")]
    EmptyTrajectory,
    #[error("weight exponent must be positive, got {0}")]
    BadExponent(f64),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Tolerances for the trajectory checks. All slacks are relative: a drop is
/// tolerated up to slack times the local magnitude scale.
#[derive(Debug, Clone, Copy)]
pub struct SlackPolicy {
    /// Monotone sequences (damped energy, lifted weighted energy).
    pub monotone: f64,
    /// Pointwise inequality chains in the expanding case.
    pub chain: f64,
    /// Surface-flux comparison.
    pub surface: f64,
    /// Domination of the full energy by the scaled leading energy.
    pub beta_floor: f64,
}

impl Default for SlackPolicy {
    fn default() -> Self {
        SlackPolicy {
            monotone: 1e-8,
            chain: 1e-10,
            surface: 1e-9,
            beta_floor: 1e-10,
        }
    }
}

/// Exponent ladder scanned when calibrating the power lift empirically.
pub const EXPONENT_LADDER: [f64; 9] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Evaluates the quadratic-form functionals at single rows.
pub struct FunctionalEngine<'a> {
    field: &'a CoefficientField,
    basis: &'a SphereBasis,
}

impl<'a> FunctionalEngine<'a> {
    pub fn new(
        field: &'a CoefficientField,
        basis: &'a SphereBasis,
    ) -> Result<Self, FunctionalsError> {
        if field.dimension() != basis.dimension() {
            return Err(FunctionalsError::DimensionMismatch {
                field: field.dimension(),
                basis: basis.dimension(),
            });
        }
        Ok(FunctionalEngine { field, basis })
    }

    fn real_form<G: Fn(&[f64; 3]) -> f64>(
        &self,
        g: G,
        v: &ModeVector,
    ) -> Result<f64, SphereError> {
        let samples: Vec<Complex64> = self
            .basis
            .nodes()
            .iter()
            .map(|n| Complex64::new(g(n), 0.0))
            .collect();
        Ok(self.basis.sampled_form(&samples, v)?.re)
    }

    /// (Q0(r .) v, v), the leading-part form.
    pub fn leading_form(&self, r: f64, side: Side, v: &ModeVector) -> Result<f64, SphereError> {
        self.real_form(|n| self.field.leading_at(r, n, side), v)
    }

    /// (Re q(r .) v, v), the unshifted real coefficient form.
    pub fn re_q_form(&self, r: f64, side: Side, v: &ModeVector) -> Result<f64, SphereError> {
        self.real_form(|n| self.field.q_at(r, n, side).re, v)
    }

    /// (Re Q(r .) v, v), the shifted real coefficient form.
    pub fn re_shifted_form(&self, r: f64, side: Side, v: &ModeVector) -> Result<f64, SphereError> {
        self.real_form(|n| self.field.shifted_at(r, n, side).re, v)
    }

    /// Centrifugal form (B(r) v, v) = sum_i lambda_i r^-2 |v_i|^2.
    pub fn centrifugal_form(&self, r: f64, v: &ModeVector) -> f64 {
        let r2 = r * r;
        v.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.basis.eigenvalue(i) / r2 * c.norm_sqr())
            .sum()
    }

    /// Leading energy |v'|^2 - (Q0 v, v) - (B v, v). Nonnegative-definite
    /// coefficient parts make this the quantity whose damped version grows.
    pub fn mplus(
        &self,
        r: f64,
        side: Side,
        v: &ModeVector,
        dv: &ModeVector,
    ) -> Result<f64, SphereError> {
        Ok(dv.norm_sq() - self.leading_form(r, side, v)? - self.centrifugal_form(r, v))
    }

    /// Full energy |v'|^2 - (Re Q v, v), without the centrifugal part.
    pub fn full_energy(
        &self,
        r: f64,
        side: Side,
        v: &ModeVector,
        dv: &ModeVector,
    ) -> Result<f64, SphereError> {
        Ok(dv.norm_sq() - self.re_shifted_form(r, side, v)?)
    }

    /// Weighted energy of the power lift w = r^m v:
    /// M+(w, r) + (m(m+1) - F(r)) r^-2 |w|^2, with F supplied by the caller.
    pub fn lifted_energy(
        &self,
        r: f64,
        side: Side,
        v: &ModeVector,
        dv: &ModeVector,
        exponent: f64,
        weight_value: f64,
    ) -> Result<f64, SphereError> {
        let lift = r.powf(exponent);
        let w = v.scale(Complex64::new(lift, 0.0));
        let wp = dv
            .add_scaled(Complex64::new(exponent / r, 0.0), v)
            .scale(Complex64::new(lift, 0.0));
        let correction =
            (exponent * (exponent + 1.0) - weight_value) / (r * r) * w.norm_sq();
        Ok(self.mplus(r, side, &w, &wp)? + correction)
    }

    /// Surface flux r^(N-1) * integral of |du/dr|^2 - Re q |u|^2 over the
    /// sphere, expressed through the reduced state:
    /// |v' - (N-1)/(2r) v|^2 - (Re q v, v).
    pub fn surface_flux(
        &self,
        r: f64,
        side: Side,
        v: &ModeVector,
        dv: &ModeVector,
    ) -> Result<f64, SphereError> {
        let a = (self.field.dimension() as f64 - 1.0) / (2.0 * r);
        let shifted = dv.add_scaled(Complex64::new(-a, 0.0), v);
        Ok(shifted.norm_sq() - self.re_q_form(r, side, v)?)
    }
}

/// Functionals sampled along a trajectory. Rows are evaluated from above at
/// every radius, so the series is right-continuous across interfaces.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    pub radii: Vec<f64>,
    pub mplus: Vec<f64>,
    pub full: Vec<f64>,
    pub lifted: Vec<f64>,
    pub abs_v2: Vec<f64>,
    pub two_re_vpv: Vec<f64>,
    pub abs_dv2: Vec<f64>,
    pub surface: Vec<f64>,
    pub damped: Vec<f64>,
    /// Per-row dichotomy marker: 1 when 2 Re(v', v) <= F/(2 m r) |v|^2,
    /// else 2.
    pub case_flags: Vec<u8>,
    /// Power-lift exponent used for the lifted energy and the flags.
    pub exponent: f64,
}

impl FunctionalSeries {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,Mplus,M,N_m,absV2,twoReVpV,S,E,case_flag\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.radii[i],
                self.mplus[i],
                self.full[i],
                self.lifted[i],
                self.abs_v2[i],
                self.two_re_vpv[i],
                self.surface[i],
                self.damped[i],
                self.case_flags[i],
            ));
        }
        out
    }

    /// Restriction to rows with radius at or beyond `start`.
    pub fn tail(&self, start: f64) -> FunctionalSeries {
        let from = self.radii.partition_point(|&r| r < start);
        FunctionalSeries {
            radii: self.radii[from..].to_vec(),
            mplus: self.mplus[from..].to_vec(),
            full: self.full[from..].to_vec(),
            lifted: self.lifted[from..].to_vec(),
            abs_v2: self.abs_v2[from..].to_vec(),
            two_re_vpv: self.two_re_vpv[from..].to_vec(),
            abs_dv2: self.abs_dv2[from..].to_vec(),
            surface: self.surface[from..].to_vec(),
            damped: self.damped[from..].to_vec(),
            case_flags: self.case_flags[from..].to_vec(),
            exponent: self.exponent,
        }
    }
}

/// Evaluate all functionals along a trajectory. The damped energy uses the
/// first trajectory radius as its normalization point, so its first value
/// equals the leading energy there.
pub fn evaluate_series(
    field: &CoefficientField,
    gauges: &RadialGauges,
    basis: &SphereBasis,
    traj: &Trajectory,
    exponent: f64,
) -> Result<FunctionalSeries, FunctionalsError> {
    if traj.is_empty() {
        return Err(FunctionalsError::EmptyTrajectory);
    }
    if !(exponent > 0.0) {
        return Err(FunctionalsError::BadExponent(exponent));
    }
    let engine = FunctionalEngine::new(field, basis)?;
    let r1 = traj.radii[0];
    let n = traj.len();
    let mut series = FunctionalSeries {
        radii: traj.radii.clone(),
        mplus: Vec::with_capacity(n),
        full: Vec::with_capacity(n),
        lifted: Vec::with_capacity(n),
        abs_v2: Vec::with_capacity(n),
        two_re_vpv: Vec::with_capacity(n),
        abs_dv2: Vec::with_capacity(n),
        surface: Vec::with_capacity(n),
        damped: Vec::with_capacity(n),
        case_flags: Vec::with_capacity(n),
        exponent,
    };
    for i in 0..n {
        let r = traj.radii[i];
        let (v, dv) = (&traj.states[i], &traj.derivatives[i]);
        let side = Side::Above;
        let mp = engine.mplus(r, side, v, dv)?;
        let weight = gauges.weight(r);
        series.mplus.push(mp);
        series.full.push(engine.full_energy(r, side, v, dv)?);
        series
            .lifted
            .push(engine.lifted_energy(r, side, v, dv, exponent, weight)?);
        let vv = v.norm_sq();
        let growth = 2.0 * dv.inner(v).re;
        series.abs_v2.push(vv);
        series.two_re_vpv.push(growth);
        series.abs_dv2.push(dv.norm_sq());
        series.surface.push(engine.surface_flux(r, side, v, dv)?);
        series
            .damped
            .push(gauges.damping_integral(r1, r).exp() * mp);
        let recurrent = growth <= weight / (2.0 * exponent * r) * vv;
        series.case_flags.push(if recurrent { 1 } else { 2 });
    }
    Ok(series)
}

/// Result of a single sequence or pointwise comparison check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// Most negative scaled margin observed; nonnegative margins everywhere
    /// report the smallest one.
    pub worst_margin: f64,
    pub at_radius: Option<f64>,
    pub rows: usize,
}

/// Check that a sampled sequence never drops by more than slack times the
/// local scale between consecutive rows.
pub fn check_nondecreasing(name: &str, radii: &[f64], values: &[f64], slack: f64) -> CheckOutcome {
    assert_eq!(radii.len(), values.len());
    let mut worst = f64::INFINITY;
    let mut at = None;
    for i in 1..values.len() {
        let scale = values[i - 1].abs().max(values[i].abs()).max(1.0);
        let margin = (values[i] - values[i - 1]) / scale;
        if margin < worst {
            worst = margin;
            at = Some(radii[i]);
        }
    }
    if values.len() < 2 {
        return CheckOutcome {
            name: name.to_string(),
            pass: true,
            worst_margin: 0.0,
            at_radius: None,
            rows: values.len(),
        };
    }
    CheckOutcome {
        name: name.to_string(),
        pass: worst >= -slack,
        worst_margin: worst,
        at_radius: at,
        rows: values.len(),
    }
}

/// Damped energy monotonicity: exp(int h) M+ never decreases.
pub fn check_damped_energy(series: &FunctionalSeries, slack: &SlackPolicy) -> CheckOutcome {
    check_nondecreasing("damped-energy", &series.radii, &series.damped, slack.monotone)
}

/// Weighted monotonicity after the power lift: r^2 N never decreases.
pub fn check_lifted_energy(series: &FunctionalSeries, slack: &SlackPolicy) -> CheckOutcome {
    let vals: Vec<f64> = series
        .radii
        .iter()
        .zip(&series.lifted)
        .map(|(&r, &n)| r * r * n)
        .collect();
    check_nondecreasing("lifted-energy", &series.radii, &vals, slack.monotone)
}

/// Domination of the full energy: M >= beta M+ along the series.
pub fn check_energy_domination(
    series: &FunctionalSeries,
    beta: f64,
    slack: &SlackPolicy,
) -> CheckOutcome {
    let mut worst = f64::INFINITY;
    let mut at = None;
    for i in 0..series.len() {
        let scale = series.mplus[i].abs().max(series.full[i].abs()).max(1.0);
        let margin = (series.full[i] - beta * series.mplus[i]) / scale;
        if margin < worst {
            worst = margin;
            at = Some(series.radii[i]);
        }
    }
    CheckOutcome {
        name: "energy-domination".to_string(),
        pass: worst >= -slack.beta_floor,
        worst_margin: if series.is_empty() { 0.0 } else { worst },
        at_radius: at,
        rows: series.len(),
    }
}

/// First radius from which -r^2 Re q stays above (N^2 - 1)/4 for the rest of
/// the grid, the regime where the surface-flux bound applies.
pub fn surface_bound_start(
    field: &CoefficientField,
    probes: &[[f64; 3]],
    radii: &[f64],
) -> Result<Option<f64>, FieldError> {
    let quarter = (field.dimension() as f64).powi(2) - 1.0;
    let mut start = None;
    for &r in radii.iter().rev() {
        if r * r * field.neg_q_floor(probes, r)? > quarter / 4.0 {
            start = Some(r);
        } else {
            break;
        }
    }
    Ok(start)
}

/// Surface-flux bound beyond `start`: 0 <= M and M <= 2 S.
pub fn check_surface_bound(
    series: &FunctionalSeries,
    start: f64,
    slack: &SlackPolicy,
) -> CheckOutcome {
    let mut worst = f64::INFINITY;
    let mut at = None;
    let mut rows = 0;
    for i in 0..series.len() {
        if series.radii[i] < start {
            continue;
        }
        rows += 1;
        let m = series.full[i];
        let two_s = 2.0 * series.surface[i];
        let scale = m.abs().max(two_s.abs()).max(1.0);
        for margin in [m / scale, (two_s - m) / scale] {
            if margin < worst {
                worst = margin;
                at = Some(series.radii[i]);
            }
        }
    }
    CheckOutcome {
        name: "surface-bound".to_string(),
        pass: rows == 0 || worst >= -slack.surface,
        worst_margin: if rows == 0 { 0.0 } else { worst },
        at_radius: at,
        rows,
    }
}

/// Outcome of the empirical power-lift calibration.
#[derive(Debug, Clone)]
pub struct WeightCalibration {
    /// Smallest ladder exponent whose lifted energy is monotone, if any.
    pub empirical: Option<f64>,
    /// Exponent bound computed from the audited constants.
    pub analytic: f64,
    /// First radius where the calibration window opens.
    pub start_radius: Option<f64>,
    /// Every ladder rung tried, with its verdict.
    pub ladder: Vec<(f64, bool)>,
}

/// Scan the exponent ladder for the smallest power lift that makes r^2 N
/// nondecreasing beyond the opening radius r0, defined by r^2 p >= 2 c1
/// with p the radially weighted leading floor.
pub fn calibrate_exponent(
    field: &CoefficientField,
    gauges: &RadialGauges,
    basis: &SphereBasis,
    traj: &Trajectory,
    probes: &[[f64; 3]],
    constants: &AuditConstants,
    slack: &SlackPolicy,
) -> Result<WeightCalibration, FunctionalsError> {
    if traj.is_empty() {
        return Err(FunctionalsError::EmptyTrajectory);
    }
    let engine = FunctionalEngine::new(field, basis)?;
    let mut start_idx = None;
    for (i, &r) in traj.radii.iter().enumerate() {
        if r * r * field.weighted_leading_floor(probes, r)? >= 2.0 * constants.c1 {
            start_idx = Some(i);
            break;
        }
    }
    let mut cal = WeightCalibration {
        empirical: None,
        analytic: constants.analytic_exponent,
        start_radius: start_idx.map(|i| traj.radii[i]),
        ladder: Vec::new(),
    };
    let Some(s) = start_idx else {
        return Ok(cal);
    };
    let radii = &traj.radii[s..];
    for &m in EXPONENT_LADDER.iter() {
        let mut vals = Vec::with_capacity(radii.len());
        for (k, &r) in radii.iter().enumerate() {
            let i = s + k;
            let n = engine.lifted_energy(
                r,
                Side::Above,
                &traj.states[i],
                &traj.derivatives[i],
                m,
                gauges.weight(r),
            )?;
            vals.push(r * r * n);
        }
        let ok = check_nondecreasing("lift-scan", radii, &vals, slack.monotone).pass;
        cal.ladder.push((m, ok));
        if ok {
            cal.empirical = Some(m);
            break;
        }
    }
    Ok(cal)
}

/// Tail behavior of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailCase {
    /// The radial growth rate keeps returning below the weighted threshold.
    Recurrent,
    /// The growth rate stays above the threshold from some radius on.
    Expanding,
}

/// Dichotomy classification of a functional series, together with the
/// case-specific consequences checked along the data.
#[derive(Debug, Clone)]
pub struct DichotomyReport {
    pub case: TailCase,
    pub exponent: f64,
    /// First radius after the last sub-threshold row (expanding case).
    pub split_radius: Option<f64>,
    /// Start of the inequality chain (expanding case).
    pub chain_start: Option<f64>,
    /// Sub-threshold rows observed in the final third (recurrent case).
    pub recurrent_rows: usize,
    /// Witness radii where positivity of the leading energy is required.
    pub witnesses: Vec<f64>,
    /// Leading energy positive at every witness.
    pub positivity_ok: bool,
    /// Expanding-case inequality chain outcomes.
    pub chain: Vec<CheckOutcome>,
    /// Lower bound carried to the tail end, when one could be formed.
    pub floor: Option<f64>,
    pub floor_ok: bool,
    pub floor_margin: f64,
    /// Set when the tail state is too small to classify meaningfully.
    pub compact_shadow: bool,
}

/// Classify the tail of a series as recurrent or expanding and check the
/// consequences the dichotomy proves for that case.
///
/// The decision rule: find the last row whose growth rate sits below the
/// weighted threshold. If it lies in the first two thirds of the window (or
/// there is none), the trajectory is expanding beyond it; otherwise it is
/// recurrent. In the expanding case the chain
///   d|v|^2/dr >= 2/r |v|^2,  r^-2 |v|^2 nondecreasing,
///   |v|/r <= |v'|,           M >= |v(r3)|^2 / r3^2
/// is checked from the first radius r3 where F >= 4m. In the recurrent case
/// the leading energy must be positive at every sub-threshold row in the
/// final third with F > 2m(2m+1), and the damped-energy floor
/// beta exp(-int h) M+ propagates from the first witness.
pub fn classify_tail(
    series: &FunctionalSeries,
    gauges: &RadialGauges,
    beta: f64,
    slack: &SlackPolicy,
) -> DichotomyReport {
    let n = series.len();
    let m1 = series.exponent;
    let mut report = DichotomyReport {
        case: TailCase::Recurrent,
        exponent: m1,
        split_radius: None,
        chain_start: None,
        recurrent_rows: 0,
        witnesses: Vec::new(),
        positivity_ok: true,
        chain: Vec::new(),
        floor: None,
        floor_ok: true,
        floor_margin: 0.0,
        compact_shadow: false,
    };
    if n == 0 {
        return report;
    }

    let global_peak = series.abs_v2.iter().cloned().fold(0.0, f64::max);
    let third = n - n / 3;
    let tail_peak = series.abs_v2[third.min(n - 1)..]
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    if tail_peak <= 1e-20 * global_peak {
        report.compact_shadow = true;
        return report;
    }

    let last_sub = (0..n).rev().find(|&i| series.case_flags[i] == 1);
    let split_idx = 2 * n / 3;

    match last_sub {
        Some(i) if i >= split_idx => {
            // Recurrent: sub-threshold rows persist into the final third.
            report.case = TailCase::Recurrent;
            let gate = 2.0 * m1 * (2.0 * m1 + 1.0);
            for j in third..n {
                if series.case_flags[j] != 1 {
                    continue;
                }
                report.recurrent_rows += 1;
                if gauges.weight(series.radii[j]) > gate {
                    report.witnesses.push(series.radii[j]);
                    if series.mplus[j] <= 0.0 {
                        report.positivity_ok = false;
                    }
                }
            }
            if let (true, Some(&first)) = (report.positivity_ok, report.witnesses.first()) {
                let j = series.radii.partition_point(|&r| r < first);
                let end = series.radii[n - 1];
                let floor = beta * (-gauges.damping_integral(first, end)).exp() * series.mplus[j];
                report.floor = Some(floor);
                let mut worst = f64::INFINITY;
                for k in j..n {
                    let scale = series.full[k].abs().max(floor.abs()).max(1.0);
                    worst = worst.min((series.full[k] - floor) / scale);
                }
                report.floor_margin = worst;
                report.floor_ok = worst >= -slack.chain;
            }
        }
        _ => {
            // Expanding: the growth rate stays above threshold from the
            // split radius onward.
            report.case = TailCase::Expanding;
            let from = last_sub.map(|i| i + 1).unwrap_or(0);
            report.split_radius = Some(series.radii[from]);
            let chain_idx =
                (from..n).find(|&i| gauges.weight(series.radii[i]) >= 4.0 * m1);
            let Some(s) = chain_idx else {
                return report;
            };
            report.chain_start = Some(series.radii[s]);

            let radii = &series.radii[s..];
            let mut growth_margin = f64::INFINITY;
            let mut growth_at = None;
            let mut deriv_margin = f64::INFINITY;
            let mut deriv_at = None;
            for k in s..n {
                let r = series.radii[k];
                let scale = series.abs_v2[k].max(1.0);
                let g = (series.two_re_vpv[k] - 2.0 / r * series.abs_v2[k]) / scale;
                if g < growth_margin {
                    growth_margin = g;
                    growth_at = Some(r);
                }
                let dscale = series.abs_dv2[k].max(series.abs_v2[k]).max(1.0);
                let d = (series.abs_dv2[k] - series.abs_v2[k] / (r * r)) / dscale;
                if d < deriv_margin {
                    deriv_margin = d;
                    deriv_at = Some(r);
                }
            }
            report.chain.push(CheckOutcome {
                name: "growth-rate-floor".to_string(),
                pass: growth_margin >= -slack.chain,
                worst_margin: growth_margin,
                at_radius: growth_at,
                rows: n - s,
            });
            let scaled: Vec<f64> = (s..n)
                .map(|k| series.abs_v2[k] / (series.radii[k] * series.radii[k]))
                .collect();
            report.chain.push(check_nondecreasing(
                "scaled-amplitude",
                radii,
                &scaled,
                slack.chain,
            ));
            report.chain.push(CheckOutcome {
                name: "derivative-floor".to_string(),
                pass: deriv_margin >= -slack.chain,
                worst_margin: deriv_margin,
                at_radius: deriv_at,
                rows: n - s,
            });

            let floor = series.abs_v2[s] / (series.radii[s] * series.radii[s]);
            report.floor = Some(floor);
            let mut worst = f64::INFINITY;
            let mut at = None;
            for k in s..n {
                let scale = series.full[k].abs().max(floor.abs()).max(1.0);
                let margin = (series.full[k] - floor) / scale;
                if margin < worst {
                    worst = margin;
                    at = Some(series.radii[k]);
                }
            }
            report.floor_margin = worst;
            report.floor_ok = worst >= -slack.chain;
            report.chain.push(CheckOutcome {
                name: "energy-floor".to_string(),
                pass: report.floor_ok,
                worst_margin: worst,
                at_radius: at,
                rows: n - s,
            });
        }
    }
    report
}

/// One-sided difference quotients of the leading-part form against the
/// matching finite-scale dominator form, at the given probe scales. The
/// pointwise domination transfers to the forms through the positive
/// quadrature weights; this measures how much slack survives evaluation.
/// Returns the worst margin (dominator form minus quotient, scaled).
pub fn verify_form_derivative_bound(
    field: &CoefficientField,
    basis: &SphereBasis,
    v: &ModeVector,
    r: f64,
    scales: &[f64],
) -> Result<f64, FunctionalsError> {
    let engine = FunctionalEngine::new(field, basis)?;
    let mut worst = f64::INFINITY;
    for &s in scales {
        let ahead = engine.leading_form(r + s, Side::Above, v)?;
        let here = engine.leading_form(r, Side::Above, v)?;
        let quotient = (ahead - here) / s;
        let dom = engine.real_form(|n| field.leading_slope_mean_at(r, n, s), v)?;
        let scale = dom.abs().max(quotient.abs()).max(1.0);
        worst = worst.min((dom - quotient) / scale);
    }
    Ok(worst)
}
