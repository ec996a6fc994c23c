//! End-to-end verification runs. A run integrates the radial system for a
//! scenario, audits the standing assumptions, evaluates the energy
//! functionals along the trajectory, and checks every proved inequality on
//! the data. Assumption-level failures and conclusion-level failures are
//! kept apart so the exit code says which layer broke.

use crate::audit::{audit_assumptions, check_derived_inequalities, AuditReport};
use crate::functionals::{
    calibrate_exponent, check_damped_energy, check_energy_domination, check_lifted_energy,
    check_surface_bound, classify_tail, evaluate_series, surface_bound_start,
    verify_form_derivative_bound, DichotomyReport, FunctionalSeries, TailCase, WeightCalibration,
};
use crate::media::{check_radial_monotonicity, check_separating_condition};
use crate::ode::Dopri5Options;
use crate::radial::{integrate_radial, residual_sup, Trajectory};
use crate::scenario::{CheckKind, Scenario};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("integration failed: {0}")]
    Radial(#[from] crate::radial::RadialError),
    #[error("functional evaluation failed: {0}")]
    Functionals(#[from] crate::functionals::FunctionalsError),
    #[error("coefficient evaluation failed: {0}")]
    Field(#[from] crate::coeff::FieldError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of one requested check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub pass: bool,
    /// True when a failure here discredits the assumptions rather than the
    /// proved conclusions.
    pub assumption_level: bool,
    /// Radius the check was restricted to, when the audit gated it.
    pub gated_from: Option<f64>,
    pub detail: String,
}

/// Full result of a verification run.
#[derive(Debug)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub rows: usize,
    pub trajectory_complete: bool,
    /// Power-lift exponent the run settled on.
    pub exponent: f64,
    pub exponent_pinned: bool,
    pub calibration: Option<WeightCalibration>,
    pub audit: Option<AuditReport>,
    pub audit_reported: bool,
    /// Radius from which conclusion checks are read off.
    pub gate: f64,
    pub beta: f64,
    pub beta_pinned: bool,
    pub dichotomy: Option<DichotomyReport>,
    pub checks: Vec<CheckReport>,
}

impl RunReport {
    pub fn assumption_failure(&self) -> bool {
        self.checks.iter().any(|c| c.assumption_level && !c.pass)
    }

    pub fn conclusion_failure(&self) -> bool {
        self.checks.iter().any(|c| !c.assumption_level && !c.pass)
    }

    /// 0 all green, 2 a proved conclusion failed on the data, 3 the
    /// standing assumptions failed. Config problems exit 4 upstream.
    pub fn exit_code(&self) -> i32 {
        if self.assumption_failure() {
            3
        } else if self.conclusion_failure() {
            2
        } else {
            0
        }
    }

    pub fn passed(&self) -> bool {
        self.exit_code() == 0
    }

    /// Deterministic human-readable block, one line per fact.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "config: {}", self.config_hash);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(
            s,
            "rows: {} ({})",
            self.rows,
            if self.trajectory_complete {
                "complete"
            } else {
                "overflowed"
            }
        );
        let _ = writeln!(s, "gate: r >= {}", self.gate);
        let _ = writeln!(
            s,
            "exponent: {} ({})",
            self.exponent,
            if self.exponent_pinned {
                "pinned"
            } else {
                "calibrated"
            }
        );
        if let Some(cal) = &self.calibration {
            let _ = writeln!(
                s,
                "calibration: empirical={:?} analytic={} start={:?}",
                cal.empirical, cal.analytic, cal.start_radius
            );
        }
        let _ = writeln!(
            s,
            "beta: {} ({})",
            self.beta,
            if self.beta_pinned { "pinned" } else { "audited" }
        );
        if let Some(a) = &self.audit {
            if self.audit_reported {
                for line in a.summary_lines() {
                    let _ = writeln!(s, "audit: {line}");
                }
            }
        }
        let _ = writeln!(s, "checks:");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  {} {}  {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.kind,
                c.detail
            );
        }
        if let Some(d) = &self.dichotomy {
            let case = match d.case {
                TailCase::Recurrent => "recurrent",
                TailCase::Expanding => "expanding",
            };
            let _ = writeln!(
                s,
                "dichotomy: {} shadow={} witnesses={} split={:?} chain_start={:?} floor={:?} floor_margin={}",
                case, d.compact_shadow, d.witnesses.len(), d.split_radius, d.chain_start, d.floor, d.floor_margin
            );
        }
        let _ = writeln!(s, "verdict: exit {}", self.exit_code());
        s
    }
}

/// Report plus the raw data it was computed from.
pub struct RunArtifacts {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub series: FunctionalSeries,
}

pub fn run_scenario(sc: &Scenario) -> Result<RunArtifacts, RunError> {
    let wants = |k: CheckKind| sc.checks.contains(&k);

    // The stepper controls local error only; over a long window the global
    // drift accumulates to roughly ten times the per-step tolerance. Run a
    // decade tighter than configured so the configured figure is what the
    // output actually honors.
    let opts = Dopri5Options {
        rtol: sc.tolerance * 0.1,
        atol: sc.tolerance * 1e-4,
        ..Dopri5Options::default()
    };
    let traj = integrate_radial(
        &sc.field,
        &sc.basis,
        sc.window.0,
        sc.window.1,
        &sc.grid,
        &sc.v0,
        &sc.dv0,
        &opts,
    )?;

    // The audit also runs silently when another check needs its calibrated
    // constants; it is only reported (and only gates the conclusions) when
    // requested.
    let needs_constants = wants(CheckKind::Consistency)
        || ((wants(CheckKind::LiftedEnergy) || wants(CheckKind::Dichotomy))
            && sc.weight_exponent.is_none())
        || ((wants(CheckKind::EnergyDomination) || wants(CheckKind::Dichotomy))
            && sc.gauges.pinned_beta().is_none());
    let audit = if wants(CheckKind::Audit) || needs_constants {
        Some(audit_assumptions(&sc.field, &sc.gauges, &sc.probes, &sc.grid)?)
    } else {
        None
    };
    let audit_tail = audit
        .as_ref()
        .and_then(|a| a.tail_start())
        .unwrap_or(sc.window.0);
    let gate = if wants(CheckKind::Audit) {
        audit_tail.max(sc.window.0)
    } else {
        sc.window.0
    };

    let (beta, beta_pinned) = match sc.gauges.pinned_beta() {
        Some(b) => (b, true),
        None => (audit.as_ref().map(|a| a.constants.beta).unwrap_or(0.5), false),
    };

    let (exponent, exponent_pinned, calibration) = match sc.weight_exponent {
        Some(m) => (m, true, None),
        None if wants(CheckKind::LiftedEnergy) || wants(CheckKind::Dichotomy) => {
            let constants = &audit.as_ref().expect("audited for constants").constants;
            let cal = calibrate_exponent(
                &sc.field, &sc.gauges, &sc.basis, &traj, &sc.probes, constants, &sc.slack,
            )?;
            let m = cal.empirical.unwrap_or(cal.analytic).max(1e-6);
            (m, false, Some(cal))
        }
        None => (1.0, false, None),
    };

    let series = evaluate_series(&sc.field, &sc.gauges, &sc.basis, &traj, exponent)?;
    let gated = series.tail(gate);

    let mut checks = Vec::new();
    let mut dichotomy = None;
    for kind in CheckKind::ALL {
        if !wants(kind) {
            continue;
        }
        let report = match kind {
            CheckKind::Audit => {
                let a = audit.as_ref().expect("requested audit always runs");
                let pass = !a.failed();
                let detail = if pass {
                    format!("all clauses hold, joint threshold {:?}", a.tail_start())
                } else {
                    let failing: Vec<String> = a
                        .clauses
                        .iter()
                        .filter(|c| c.verdict.is_fail())
                        .map(|c| format!("{:?}", c.clause))
                        .collect();
                    format!("failing clauses: {}", failing.join(", "))
                };
                CheckReport {
                    kind,
                    pass,
                    assumption_level: true,
                    gated_from: None,
                    detail,
                }
            }
            CheckKind::Consistency => {
                let residual = residual_sup(&sc.field, &sc.basis, &traj)?;
                let dr_max = traj
                    .radii
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(0.0f64, f64::max);
                // The finite-difference residual carries an O(dr^2) term
                // scaled by the operator norm, largest at the inner radius.
                let sys = crate::radial::RadialSystem::new(&sc.field, &sc.basis)?;
                let a0 = sys.matrix(traj.radii[0], crate::coeff::Side::Above)?;
                let nm = sc.basis.mode_count();
                let mut op_scale = 0.0f64;
                for i in 0..nm {
                    let e = crate::sphere::ModeVector::basis_vector(nm, i);
                    op_scale = op_scale.max(a0.apply(&e).norm_sq().sqrt());
                }
                let threshold = dr_max * dr_max * (op_scale + 1.0) / 3.0;
                let mut pass = residual <= threshold;
                let mut detail = format!("residual {residual:.3e} (cap {threshold:.3e})");
                let constants = &audit.as_ref().expect("audited for constants").constants;
                let derived = check_derived_inequalities(
                    &sc.field, &sc.gauges, &sc.probes, &sc.grid, constants, audit_tail,
                )?;
                for d in derived {
                    if !d.pass {
                        pass = false;
                    }
                    let _ = write!(
                        detail,
                        "; {} {} margin {:.3e} at r={}",
                        d.name,
                        if d.pass { "holds" } else { "fails" },
                        d.worst_margin,
                        d.at_radius
                    );
                }
                CheckReport {
                    kind,
                    pass,
                    assumption_level: false,
                    gated_from: None,
                    detail,
                }
            }
            CheckKind::SeparatingCondition => {
                let medium = sc.medium.as_ref().expect("validated as layered");
                let violation = check_separating_condition(medium)?;
                let (pass, detail) = match violation {
                    None => (true, "every interface jump points outward".to_string()),
                    Some(v) => (
                        false,
                        format!(
                            "interface {} at {} drops from {} to {}",
                            v.interface_index, v.location, v.below, v.above
                        ),
                    ),
                };
                CheckReport {
                    kind,
                    pass,
                    assumption_level: true,
                    gated_from: None,
                    detail,
                }
            }
            CheckKind::RadialMonotonicity => {
                let medium = sc.medium.as_ref().expect("validated as layered");
                let violation = check_radial_monotonicity(medium, &sc.probes, &sc.grid)?;
                let (pass, detail) = match violation {
                    None => (
                        true,
                        "main term nondecreasing along every sampled ray".to_string(),
                    ),
                    Some(v) => (
                        false,
                        format!(
                            "drop {:.3e} at r={} along ray [{:.3}, {:.3}, {:.3}]",
                            v.drop, v.radius, v.ray[0], v.ray[1], v.ray[2]
                        ),
                    ),
                };
                CheckReport {
                    kind,
                    pass,
                    assumption_level: true,
                    gated_from: None,
                    detail,
                }
            }
            CheckKind::DampedEnergy => {
                let out = check_damped_energy(&gated, &sc.slack);
                CheckReport {
                    kind,
                    pass: out.pass,
                    assumption_level: false,
                    gated_from: Some(gate),
                    detail: outcome_detail(&out),
                }
            }
            CheckKind::LiftedEnergy => {
                let out = check_lifted_energy(&gated, &sc.slack);
                CheckReport {
                    kind,
                    pass: out.pass,
                    assumption_level: false,
                    gated_from: Some(gate),
                    detail: format!("m={exponent}; {}", outcome_detail(&out)),
                }
            }
            CheckKind::EnergyDomination => {
                let out = check_energy_domination(&gated, beta, &sc.slack);
                CheckReport {
                    kind,
                    pass: out.pass,
                    assumption_level: false,
                    gated_from: Some(gate),
                    detail: format!("beta={beta}; {}", outcome_detail(&out)),
                }
            }
            CheckKind::SurfaceBound => {
                match surface_bound_start(&sc.field, &sc.probes, &series.radii)? {
                    None => CheckReport {
                        kind,
                        pass: true,
                        assumption_level: false,
                        gated_from: None,
                        detail: "window never reaches the bound threshold (vacuous)".to_string(),
                    },
                    Some(s) => {
                        let start = s.max(gate);
                        let out = check_surface_bound(&series, start, &sc.slack);
                        CheckReport {
                            kind,
                            pass: out.pass,
                            assumption_level: false,
                            gated_from: Some(start),
                            detail: outcome_detail(&out),
                        }
                    }
                }
            }
            CheckKind::Dichotomy => {
                let d = classify_tail(&gated, &sc.gauges, beta, &sc.slack);
                let pass = d.compact_shadow
                    || (d.positivity_ok && d.floor_ok && d.chain.iter().all(|c| c.pass));
                let detail = if d.compact_shadow {
                    "tail numerically dead; classification vacuous".to_string()
                } else {
                    let case = match d.case {
                        TailCase::Recurrent => "recurrent",
                        TailCase::Expanding => "expanding",
                    };
                    format!(
                        "{case}; positivity {} floor {} chain {}/{} ok",
                        d.positivity_ok,
                        d.floor_ok,
                        d.chain.iter().filter(|c| c.pass).count(),
                        d.chain.len()
                    )
                };
                dichotomy = Some(d);
                CheckReport {
                    kind,
                    pass,
                    assumption_level: false,
                    gated_from: Some(gate),
                    detail,
                }
            }
            CheckKind::QuotientForm => {
                let h0 = sc.field.horizon();
                let scales = [h0 / 2.0, h0 / 4.0, h0 / 8.0];
                let mut worst = f64::INFINITY;
                let mut at = sc.window.0;
                let n = traj.len();
                for q in 1..=5usize {
                    let i = (q * (n - 1)) / 6;
                    let m = verify_form_derivative_bound(
                        &sc.field,
                        &sc.basis,
                        &traj.states[i],
                        traj.radii[i],
                        &scales,
                    )?;
                    if m < worst {
                        worst = m;
                        at = traj.radii[i];
                    }
                }
                CheckReport {
                    kind,
                    pass: worst >= -1e-8,
                    assumption_level: false,
                    gated_from: None,
                    detail: format!("worst margin {worst:.3e} at r={at}"),
                }
            }
        };
        checks.push(report);
    }

    let report = RunReport {
        scenario: sc.name.clone(),
        config_hash: sc.config_hash.clone(),
        seed: sc.seed,
        rows: traj.len(),
        trajectory_complete: traj.complete,
        exponent,
        exponent_pinned,
        calibration,
        audit,
        audit_reported: wants(CheckKind::Audit),
        gate,
        beta,
        beta_pinned,
        dichotomy,
        checks,
    };
    Ok(RunArtifacts {
        report,
        trajectory: traj,
        series,
    })
}

fn outcome_detail(out: &crate::functionals::CheckOutcome) -> String {
    format!(
        "worst margin {:.3e} at r={:?} over {} rows",
        out.worst_margin, out.at_radius, out.rows
    )
}

/// Paths written by `write_outputs`.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub trajectory: PathBuf,
    pub functionals: PathBuf,
    pub summary: PathBuf,
}

/// Write the trajectory CSV, the functional-series CSV, and the summary
/// text for a finished run. Files are deterministic for a fixed scenario.
pub fn write_outputs(art: &RunArtifacts, dir: &Path) -> Result<OutputPaths, RunError> {
    std::fs::create_dir_all(dir)?;
    let base = art.report.scenario.replace([' ', '/'], "_");
    let paths = OutputPaths {
        trajectory: dir.join(format!("{base}.trajectory.csv")),
        functionals: dir.join(format!("{base}.functionals.csv")),
        summary: dir.join(format!("{base}.summary.txt")),
    };
    std::fs::write(&paths.trajectory, art.trajectory.to_csv())?;
    std::fs::write(&paths.functionals, art.series.to_csv())?;
    std::fs::write(&paths.summary, art.report.summary())?;
    Ok(paths)
}
