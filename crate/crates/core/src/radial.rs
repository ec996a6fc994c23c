//! Radial reduction of the exterior problem and its trajectory driver.
//!
//! A solution u of -Delta u + q u = 0 outside a ball is represented through
//! v(r) = r^((N-1)/2) u(r .), expanded over the angular basis. The mode
//! coefficient vector then solves the second-order system
//! v'' = B(r) v + Q(r .) v, where B is the diagonal centrifugal operator
//! with entries lambda_i / r^2 and Q = q + shift acts by multiplication on
//! the sphere (a dense coupling matrix for angular coefficients, a scalar
//! for radially symmetric ones).
//!
//! The driver integrates the first-order form of that system with the
//! one-step integrator, restarting at every declared coefficient jump so no
//! step straddles a discontinuity. Within a smooth segment the field is
//! evaluated from above, except at the segment's right endpoint where the
//! value from below is used: the final stages of a step ending exactly on
//! an interface must see the piece the step lives in, not the next one.
//! Solutions are continuously differentiable across interfaces, so the
//! state itself carries over unchanged.

use crate::coeff::{CoefficientField, Side};
use crate::ode::{self, Dopri5Options, IntegrationStats, OdeError, OdeRhs};
use crate::sphere::{GramOperator, ModeVector, SphereBasis, SphereError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("field dimension {field} does not match basis dimension {basis}")]
    DimensionMismatch { field: usize, basis: usize },
    #[error("mode vector length {got} does not match the basis mode count {want}")]
    BadState { got: usize, want: usize },
    #[error("window [{start}, {end}] is invalid for inner radius {inner}")]
    BadWindow { start: f64, end: f64, inner: f64 },
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
}

/// First-order system for one smooth segment. State layout: mode-major
/// blocks [Re v | Im v | Re v' | Im v'].
pub struct RadialSystem<'a> {
    field: &'a CoefficientField,
    basis: &'a SphereBasis,
    /// Right endpoint of the active segment; the field is evaluated from
    /// below there.
    segment_end: f64,
    node_vals: Vec<Complex64>,
}

impl<'a> RadialSystem<'a> {
    pub fn new(field: &'a CoefficientField, basis: &'a SphereBasis) -> Result<Self, RadialError> {
        if field.dimension() != basis.dimension() {
            return Err(RadialError::DimensionMismatch {
                field: field.dimension(),
                basis: basis.dimension(),
            });
        }
        Ok(RadialSystem {
            field,
            basis,
            segment_end: f64::INFINITY,
            node_vals: vec![Complex64::new(0.0, 0.0); basis.node_count()],
        })
    }

    pub fn mode_count(&self) -> usize {
        self.basis.mode_count()
    }

    pub fn set_segment_end(&mut self, r: f64) {
        self.segment_end = r;
    }

    fn side_for(&self, r: f64) -> Side {
        if r >= self.segment_end {
            Side::Below
        } else {
            Side::Above
        }
    }

    /// Dense coupling operator B(r) + Q(r .) in basis coordinates, for
    /// inspection and tests. The hot path never builds it.
    pub fn matrix(&self, r: f64, side: Side) -> Result<GramOperator, RadialError> {
        let gram = self
            .basis
            .gram(|node| self.field.shifted_at(r, node, side))?;
        let r2 = r * r;
        let diag: Vec<f64> = (0..self.basis.mode_count())
            .map(|i| self.basis.eigenvalue(i) / r2)
            .collect();
        Ok(gram.add_diagonal(&diag))
    }
}

impl OdeRhs for RadialSystem<'_> {
    fn dim(&self) -> usize {
        4 * self.basis.mode_count()
    }

    fn eval(&mut self, r: f64, y: &[f64], dy: &mut [f64]) {
        let nm = self.basis.mode_count();
        let side = self.side_for(r);
        let r2 = r * r;

        // v' block of the state is the derivative of the v block.
        dy[..2 * nm].copy_from_slice(&y[2 * nm..]);

        if self.field.is_radial() {
            let q = self.field.shifted_at(r, &self.basis.nodes()[0], side);
            for i in 0..nm {
                let c = self.basis.eigenvalue(i) / r2 + q.re;
                let (vr, vi) = (y[i], y[nm + i]);
                dy[2 * nm + i] = c * vr - q.im * vi;
                dy[3 * nm + i] = c * vi + q.im * vr;
            }
            return;
        }

        // Synthesize v on the nodes, multiply by Q there, analyze back.
        let nodes = self.basis.nodes();
        for (k, node) in nodes.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..nm {
                let yi = self.basis.mode_value(k, i);
                if yi != 0.0 {
                    acc += Complex64::new(y[i], y[nm + i]) * yi;
                }
            }
            self.node_vals[k] = acc * self.field.shifted_at(r, node, side);
        }
        let weights = self.basis.weights();
        for i in 0..nm {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..nodes.len() {
                let yi = self.basis.mode_value(k, i);
                if yi != 0.0 {
                    acc += self.node_vals[k] * (weights[k] * yi);
                }
            }
            let c = self.basis.eigenvalue(i) / r2;
            dy[2 * nm + i] = acc.re + c * y[i];
            dy[3 * nm + i] = acc.im + c * y[nm + i];
        }
    }
}

/// Sampled trajectory of the radial system over a window.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub radii: Vec<f64>,
    pub states: Vec<ModeVector>,
    pub derivatives: Vec<ModeVector>,
    /// True on rows where the integration restarted at a coefficient jump.
    pub restarts: Vec<bool>,
    pub stats: IntegrationStats,
    /// False when growth overflow cut the run short; the rows then cover
    /// only the reached prefix.
    pub complete: bool,
    pub overflow_radius: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.states.first().map(|v| v.len()).unwrap_or(0)
    }

    /// CSV rows: radius, per-mode value and derivative split into real and
    /// imaginary parts, and the restart marker.
    pub fn to_csv(&self) -> String {
        let nm = self.mode_count();
        let mut out = String::from("r");
        for i in 0..nm {
            out.push_str(&format!(",v{i}_re,v{i}_im,dv{i}_re,dv{i}_im"));
        }
        out.push_str(",restart\n");
        for row in 0..self.len() {
            out.push_str(&format!("{}", self.radii[row]));
            for i in 0..nm {
                let v = self.states[row].coeffs[i];
                let d = self.derivatives[row].coeffs[i];
                out.push_str(&format!(",{},{},{},{}", v.re, v.im, d.re, d.im));
            }
            out.push_str(if self.restarts[row] { ",1\n" } else { ",0\n" });
        }
        out
    }
}

fn pack_state(v: &ModeVector, dv: &ModeVector) -> Vec<f64> {
    let nm = v.len();
    let mut y = vec![0.0; 4 * nm];
    for i in 0..nm {
        y[i] = v.coeffs[i].re;
        y[nm + i] = v.coeffs[i].im;
        y[2 * nm + i] = dv.coeffs[i].re;
        y[3 * nm + i] = dv.coeffs[i].im;
    }
    y
}

fn unpack_state(y: &[f64], nm: usize) -> (ModeVector, ModeVector) {
    let mut v = ModeVector::zeros(nm);
    let mut dv = ModeVector::zeros(nm);
    for i in 0..nm {
        v.coeffs[i] = Complex64::new(y[i], y[nm + i]);
        dv.coeffs[i] = Complex64::new(y[2 * nm + i], y[3 * nm + i]);
    }
    (v, dv)
}

/// Integrate the radial system across [r_start, r_end], sampling at the
/// requested radii plus every declared jump radius in between. Growth
/// overflow is not an error: the returned trajectory is then marked
/// incomplete and carries the reached prefix.
#[allow(clippy::too_many_arguments)]
pub fn integrate_radial(
    field: &CoefficientField,
    basis: &SphereBasis,
    r_start: f64,
    r_end: f64,
    grid: &[f64],
    v0: &ModeVector,
    dv0: &ModeVector,
    opts: &Dopri5Options,
) -> Result<Trajectory, RadialError> {
    let mut sys = RadialSystem::new(field, basis)?;
    let nm = basis.mode_count();
    if v0.len() != nm || dv0.len() != nm {
        return Err(RadialError::BadState {
            got: v0.len().max(dv0.len()),
            want: nm,
        });
    }
    if !(r_start > field.inner_radius()) || !(r_end > r_start) {
        return Err(RadialError::BadWindow {
            start: r_start,
            end: r_end,
            inner: field.inner_radius(),
        });
    }

    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    let cuts: Vec<f64> = field
        .jump_radii()
        .iter()
        .copied()
        .filter(|&j| j > r_start && j < r_end && !close(j, r_start) && !close(j, r_end))
        .collect();

    // Sample radii: requested grid clipped to the window, plus the window
    // ends and every cut.
    let mut sample: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&r| r >= r_start && r <= r_end)
        .collect();
    sample.push(r_start);
    sample.push(r_end);
    sample.extend_from_slice(&cuts);
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sample.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    // Snap samples onto cuts so segment endpoints match rows exactly.
    for s in sample.iter_mut() {
        if let Some(&c) = cuts.iter().find(|&&c| close(*s, c)) {
            *s = c;
        }
    }
    sample.dedup();

    let mut radii = Vec::with_capacity(sample.len());
    let mut states = Vec::with_capacity(sample.len());
    let mut derivatives = Vec::with_capacity(sample.len());
    let mut restarts = Vec::with_capacity(sample.len());
    let mut stats = IntegrationStats::default();

    let mut segments = Vec::with_capacity(cuts.len() + 1);
    {
        let mut a = r_start;
        for &c in &cuts {
            segments.push((a, c));
            a = c;
        }
        segments.push((a, r_end));
    }

    let mut y = pack_state(v0, dv0);
    let mut complete = true;
    let mut overflow_radius = None;

    for (si, &(a, b)) in segments.iter().enumerate() {
        sys.set_segment_end(b);
        let seg_samples: Vec<f64> = sample
            .iter()
            .copied()
            .filter(|&r| (r > a || (si == 0 && r == a)) && r <= b)
            .collect();
        let first_count = seg_samples.len();
        match ode::integrate(&mut sys, a, b, &y, &seg_samples, opts) {
            Ok(sol) => {
                debug_assert_eq!(sol.samples.len(), first_count);
                for (row, &r) in sol.samples.iter().zip(&seg_samples) {
                    let (v, dv) = unpack_state(row, nm);
                    radii.push(r);
                    states.push(v);
                    derivatives.push(dv);
                    restarts.push(cuts.contains(&r));
                }
                y = sol.y_end;
                stats.steps += sol.stats.steps;
                stats.accepted += sol.stats.accepted;
                stats.rejected += sol.stats.rejected;
                stats.rhs_evals += sol.stats.rhs_evals;
            }
            Err(OdeError::GrowthOverflow { t, partial, .. }) => {
                for (row, &r) in partial.samples.iter().zip(&seg_samples) {
                    let (v, dv) = unpack_state(row, nm);
                    radii.push(r);
                    states.push(v);
                    derivatives.push(dv);
                    restarts.push(cuts.contains(&r));
                }
                stats.steps += partial.stats.steps;
                stats.accepted += partial.stats.accepted;
                stats.rejected += partial.stats.rejected;
                stats.rhs_evals += partial.stats.rhs_evals;
                complete = false;
                overflow_radius = Some(t);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    Ok(Trajectory {
        radii,
        states,
        derivatives,
        restarts,
        stats,
        complete,
        overflow_radius,
    })
}

/// Physical surface values u(r omega_k) at the quadrature nodes:
/// u = r^(-(N-1)/2) * sum_i v_i Y_i.
pub fn physical_values(
    basis: &SphereBasis,
    r: f64,
    v: &ModeVector,
) -> Result<Vec<Complex64>, SphereError> {
    let scale = r.powf(-((basis.dimension() as f64 - 1.0) / 2.0));
    let mut vals = basis.synthesize(v)?;
    for x in vals.iter_mut() {
        *x *= scale;
    }
    Ok(vals)
}

/// Radial derivative of u at the nodes:
/// du/dr = r^(-(N-1)/2) * sum_i (v'_i - (N-1)/(2r) v_i) Y_i.
pub fn physical_radial_derivative(
    basis: &SphereBasis,
    r: f64,
    v: &ModeVector,
    dv: &ModeVector,
) -> Result<Vec<Complex64>, SphereError> {
    let n1 = basis.dimension() as f64 - 1.0;
    let combo = dv.add_scaled(Complex64::new(-n1 / (2.0 * r), 0.0), v);
    let scale = r.powf(-(n1 / 2.0));
    let mut vals = basis.synthesize(&combo)?;
    for x in vals.iter_mut() {
        *x *= scale;
    }
    Ok(vals)
}

/// Largest relative defect of the second-order equation along a sampled
/// trajectory, measured with a three-point difference on interior rows that
/// do not straddle a restart. The returned value is limited from below by
/// the difference scheme's truncation error, roughly the grid spacing
/// squared times the solution scale, so it is a consistency check rather
/// than an error estimate.
pub fn residual_sup(
    field: &CoefficientField,
    basis: &SphereBasis,
    traj: &Trajectory,
) -> Result<f64, RadialError> {
    let sys = RadialSystem::new(field, basis)?;
    let mut worst = 0.0f64;
    for i in 1..traj.len().saturating_sub(1) {
        if traj.restarts[i - 1] || traj.restarts[i] || traj.restarts[i + 1] {
            continue;
        }
        let (rm, r0, rp) = (traj.radii[i - 1], traj.radii[i], traj.radii[i + 1]);
        let (hm, hp) = (r0 - rm, rp - r0);
        let a = sys.matrix(r0, Side::Above)?;
        let av = a.apply(&traj.states[i]);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..traj.mode_count() {
            let vm = traj.states[i - 1].coeffs[j];
            let v0 = traj.states[i].coeffs[j];
            let vp = traj.states[i + 1].coeffs[j];
            let second =
                2.0 * (hm * vp - (hm + hp) * v0 + hp * vm) / (hm * hp * (hm + hp));
            num = num.max((second - av.coeffs[j]).norm());
            den = den.max(av.coeffs[j].norm().max(second.norm()));
        }
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{build_layered_field, LayeredMedium};
    use crate::quad::linspace;
    use std::sync::Arc;

    fn opts() -> Dopri5Options {
        Dopri5Options {
            rtol: 1e-9,
            atol: 1e-12,
            ..Dopri5Options::default()
        }
    }

    fn seed(nm: usize, v: Complex64, dv: Complex64) -> (ModeVector, ModeVector) {
        let mut v0 = ModeVector::zeros(nm);
        let mut d0 = ModeVector::zeros(nm);
        v0.coeffs[0] = v;
        d0.coeffs[0] = dv;
        (v0, d0)
    }

    #[test]
    fn constant_unit_coefficient_reproduces_the_shifted_sine() {
        // Dimension 3, lowest mode: v'' = -v, v(1) = 0, v'(1) = 1 gives
        // v(r) = sin(r - 1).
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 50.0, 200);
        let (v0, d0) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let traj = integrate_radial(&field, &basis, 1.0, 50.0, &grid, &v0, &d0, &opts()).unwrap();
        assert!(traj.complete);
        assert_eq!(traj.len(), grid.len());
        let mut worst = 0.0f64;
        for (i, &r) in traj.radii.iter().enumerate() {
            let expect = (r - 1.0).sin();
            let got = traj.states[i].coeffs[0].re;
            worst = worst.max((got - expect).abs());
            assert!((traj.derivatives[i].coeffs[0].re - (r - 1.0).cos()).abs() < 1e-8);
            assert_eq!(traj.states[i].coeffs[0].im, 0.0);
        }
        assert!(worst < 1e-8, "worst sine defect {worst}");
    }

    #[test]
    fn two_shell_medium_matches_the_piecewise_closed_form() {
        // Inner wavenumber 1, outer wavenumber 2 beyond the interface at 2:
        // the solution and its derivative glue continuously.
        let medium = LayeredMedium::shells(3, 0.5, vec![2.0], vec![1.0, 4.0], 1.0);
        let (field, _) = build_layered_field(&medium, &[[0.0, 0.0, 1.0]]).unwrap();
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 30.0, 400);
        let (v0, d0) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let traj = integrate_radial(&field, &basis, 1.0, 30.0, &grid, &v0, &d0, &opts()).unwrap();

        let s1 = 1f64.sin();
        let c1 = 1f64.cos();
        let mut saw_restart = false;
        for (i, &r) in traj.radii.iter().enumerate() {
            let expect = if r <= 2.0 {
                (r - 1.0).sin()
            } else {
                s1 * (2.0 * (r - 2.0)).cos() + 0.5 * c1 * (2.0 * (r - 2.0)).sin()
            };
            let got = traj.states[i].coeffs[0].re;
            assert!(
                (got - expect).abs() < 1e-8,
                "r = {r}: {got} vs {expect}"
            );
            if traj.restarts[i] {
                assert_eq!(r, 2.0);
                saw_restart = true;
            }
        }
        assert!(saw_restart, "interface row missing");
        // Derivative is continuous at the interface.
        let k = traj.radii.iter().position(|&r| r == 2.0).unwrap();
        assert!((traj.derivatives[k].coeffs[0].re - c1).abs() < 1e-8);
    }

    #[test]
    fn coupling_matrix_is_diagonal_for_radial_fields() {
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 1).unwrap();
        let sys = RadialSystem::new(&field, &basis).unwrap();
        let m = sys.matrix(2.0, Side::Above).unwrap();
        assert!(m.is_hermitian());
        for i in 0..4 {
            for j in 0..4 {
                let got = m.entry(i, j);
                if i == j {
                    let expect = if i == 0 { -1.0 } else { 2.0 / 4.0 - 1.0 };
                    assert!((got.re - expect).abs() < 1e-12, "({i},{j}): {got}");
                    assert!(got.im.abs() < 1e-14);
                } else {
                    assert!(got.norm() < 1e-12, "({i},{j}): {got}");
                }
            }
        }
    }

    #[test]
    fn declared_angular_fields_agree_with_the_diagonal_path() {
        // Same constant coefficient, once declared radial and once not:
        // the coupled synthesize-multiply-analyze path must match.
        let radial = CoefficientField::constant(3, 1.0, 0.5);
        let coupled = CoefficientField::new(
            3,
            0.5,
            0.25,
            vec![],
            false,
            Arc::new(|_, _, _| Complex64::new(-1.0, 0.0)),
            Arc::new(|_, _, _| -1.0),
            Arc::new(|_, _, _| Complex64::new(0.0, 0.0)),
            Arc::new(|_, _, _| 0.0),
            Arc::new(|_, _, _| 0.0),
        )
        .unwrap();
        let basis = SphereBasis::build(3, 2).unwrap();
        let nm = basis.mode_count();
        let mut v0 = ModeVector::zeros(nm);
        let mut d0 = ModeVector::zeros(nm);
        for i in 0..nm {
            v0.coeffs[i] = Complex64::new(0.3 + 0.1 * i as f64, -0.2);
            d0.coeffs[i] = Complex64::new(0.05 * i as f64, 0.4 - 0.02 * i as f64);
        }
        let grid = linspace(1.0, 12.0, 60);
        let a = integrate_radial(&radial, &basis, 1.0, 12.0, &grid, &v0, &d0, &opts()).unwrap();
        let b = integrate_radial(&coupled, &basis, 1.0, 12.0, &grid, &v0, &d0, &opts()).unwrap();
        let scale: f64 = a
            .states
            .iter()
            .map(|v| v.max_abs())
            .fold(0.0, f64::max);
        for i in 0..a.len() {
            for j in 0..nm {
                let d = (a.states[i].coeffs[j] - b.states[i].coeffs[j]).norm();
                assert!(d <= 1e-9 * scale, "row {i} mode {j}: defect {d}");
            }
        }
    }

    #[test]
    fn superposition_holds_for_the_linear_system() {
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 20.0, 50);
        let (va, da) = seed(1, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5));
        let (vb, db) = seed(1, Complex64::new(0.0, -0.3), Complex64::new(1.0, 0.0));
        let sum_v = va.add_scaled(Complex64::new(1.0, 0.0), &vb);
        let sum_d = da.add_scaled(Complex64::new(1.0, 0.0), &db);
        let ta = integrate_radial(&field, &basis, 1.0, 20.0, &grid, &va, &da, &opts()).unwrap();
        let tb = integrate_radial(&field, &basis, 1.0, 20.0, &grid, &vb, &db, &opts()).unwrap();
        let ts = integrate_radial(&field, &basis, 1.0, 20.0, &grid, &sum_v, &sum_d, &opts()).unwrap();
        for i in 0..ts.len() {
            let lin = ta.states[i].coeffs[0] + tb.states[i].coeffs[0];
            assert!((ts.states[i].coeffs[0] - lin).norm() < 1e-7);
        }
    }

    #[test]
    fn wronskian_is_conserved_across_interfaces() {
        let medium = LayeredMedium::shells(3, 0.5, vec![2.0, 4.0], vec![1.0, 2.0, 3.0], 1.0);
        let (field, _) = build_layered_field(&medium, &[[0.0, 0.0, 1.0]]).unwrap();
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 25.0, 120);
        let tight = Dopri5Options {
            rtol: 1e-11,
            atol: 1e-13,
            ..Dopri5Options::default()
        };
        let (va, da) = seed(1, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let (vb, db) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let ta = integrate_radial(&field, &basis, 1.0, 25.0, &grid, &va, &da, &tight).unwrap();
        let tb = integrate_radial(&field, &basis, 1.0, 25.0, &grid, &vb, &db, &tight).unwrap();
        for i in 0..ta.len() {
            let w = ta.states[i].coeffs[0] * tb.derivatives[i].coeffs[0]
                - ta.derivatives[i].coeffs[0] * tb.states[i].coeffs[0];
            assert!(
                (w - Complex64::new(1.0, 0.0)).norm() < 1e-8,
                "drift at r = {}: {w}",
                ta.radii[i]
            );
        }
    }

    #[test]
    fn sampled_rows_satisfy_the_equation_to_difference_accuracy() {
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 6.0, 501);
        let (v0, d0) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let traj = integrate_radial(&field, &basis, 1.0, 6.0, &grid, &v0, &d0, &opts()).unwrap();
        let res = residual_sup(&field, &basis, &traj).unwrap();
        assert!(res < 1e-4, "residual {res}");
    }

    #[test]
    fn physical_values_invert_the_reduction() {
        // Lowest mode, dimension 3: u = v Y0 / r and
        // du/dr = (v' - v/r) Y0 / r.
        let basis = SphereBasis::build(3, 0).unwrap();
        let r = 2.5;
        let mut v = ModeVector::zeros(1);
        let mut dv = ModeVector::zeros(1);
        v.coeffs[0] = Complex64::new(1.5, -0.5);
        dv.coeffs[0] = Complex64::new(0.25, 1.0);
        let y0 = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        let u = physical_values(&basis, r, &v).unwrap();
        let du = physical_radial_derivative(&basis, r, &v, &dv).unwrap();
        for k in 0..basis.node_count() {
            let expect_u = v.coeffs[0] * y0 / r;
            let expect_du = (dv.coeffs[0] - v.coeffs[0] / r) * y0 / r;
            assert!((u[k] - expect_u).norm() < 1e-14);
            assert!((du[k] - expect_du).norm() < 1e-14);
        }
    }

    #[test]
    fn csv_export_round_trips_radii_and_flags() {
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 0).unwrap();
        let grid = linspace(1.0, 3.0, 5);
        let (v0, d0) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let traj = integrate_radial(&field, &basis, 1.0, 3.0, &grid, &v0, &d0, &opts()).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "r,v0_re,v0_im,dv0_re,dv0_im,restart");
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), traj.len());
        for (row, line) in body.iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 6);
            assert_eq!(cells[0].parse::<f64>().unwrap(), traj.radii[row]);
            assert_eq!(cells[5], "0");
        }
    }

    #[test]
    fn window_and_state_validation() {
        let field = CoefficientField::constant(3, 1.0, 0.5);
        let basis = SphereBasis::build(3, 0).unwrap();
        let (v0, d0) = seed(1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(
            integrate_radial(&field, &basis, 0.2, 3.0, &[], &v0, &d0, &opts()),
            Err(RadialError::BadWindow { .. })
        ));
        let long = ModeVector::zeros(2);
        assert!(matches!(
            integrate_radial(&field, &basis, 1.0, 3.0, &[], &long, &d0, &opts()),
            Err(RadialError::BadState { .. })
        ));
        let basis2 = SphereBasis::build(2, 0).unwrap();
        assert!(matches!(
            RadialSystem::new(&field, &basis2),
            Err(RadialError::DimensionMismatch { .. })
        ));
    }
}
