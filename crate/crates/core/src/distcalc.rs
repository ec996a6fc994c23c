//! Piecewise-differentiable radial profiles and their distributional
//! calculus: signed derivative scans, bump-averaged increments, and the
//! mollified difference-quotient domination that downward jumps preserve.
//!
//! The reference construction pairs an upward drift with a single downward
//! step so that every difference quotient over the probe window crosses the
//! step exactly once: with slope (2 eta / 3) / h over the window and a jump
//! of -eta inside it, the increment f(r + h) - f(r) equals -eta / 3 at
//! every probe radius, so its average against any normalized bump is
//! exactly -eta / 3 regardless of the bump shape.

use crate::quad::{integrate_adaptive, integrate_with_breakpoints, linspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("piece starts must be strictly increasing, got {0} after {1}")]
    UnorderedPieces(f64, f64),
    #[error("domain end {end} does not exceed the last piece start {start}")]
    EmptyLastPiece { start: f64, end: f64 },
    #[error("no pieces supplied")]
    NoPieces,
    #[error("bump support [{0}, {1}] is empty")]
    EmptySupport(f64, f64),
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One smooth piece: closed-form value and derivative from its start radius
/// to the start of the next piece.
#[derive(Clone)]
pub struct Piece {
    pub start: f64,
    pub f: RealFn,
    pub df: RealFn,
}

/// Right-continuous piecewise-C1 function on a bounded window. Jumps are
/// computed, not declared: each breakpoint compares the incoming piece's
/// limit with the outgoing piece's value.
#[derive(Clone)]
pub struct PiecewiseFunction {
    pieces: Vec<Piece>,
    end: f64,
}

impl PiecewiseFunction {
    pub fn new(pieces: Vec<Piece>, end: f64) -> Result<Self, DistError> {
        if pieces.is_empty() {
            return Err(DistError::NoPieces);
        }
        for w in pieces.windows(2) {
            if w[1].start <= w[0].start {
                return Err(DistError::UnorderedPieces(w[1].start, w[0].start));
            }
        }
        let last = pieces.last().unwrap().start;
        if end <= last {
            return Err(DistError::EmptyLastPiece { start: last, end });
        }
        Ok(PiecewiseFunction { pieces, end })
    }

    /// Single smooth piece over a window.
    pub fn smooth(start: f64, end: f64, f: RealFn, df: RealFn) -> Result<Self, DistError> {
        PiecewiseFunction::new(vec![Piece { start, f, df }], end)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].start, self.end)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.start).collect()
    }

    fn piece_at(&self, r: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.start <= r);
        &self.pieces[idx.saturating_sub(1)]
    }

    /// Right-continuous value.
    pub fn value(&self, r: f64) -> f64 {
        (self.piece_at(r).f)(r)
    }

    /// Limit from below; differs from `value` only at breakpoints.
    pub fn left_value(&self, r: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.start < r);
        ((self.pieces[idx.saturating_sub(1)].f))(r)
    }

    /// Within-piece derivative, right-continuous at breakpoints.
    pub fn derivative(&self, r: f64) -> f64 {
        (self.piece_at(r).df)(r)
    }

    pub fn jump_at(&self, b: f64) -> f64 {
        self.value(b) - self.left_value(b)
    }

    /// Every breakpoint with its computed jump.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.breakpoints()
            .into_iter()
            .map(|b| (b, self.jump_at(b)))
            .collect()
    }
}

/// Location where a sign scan failed.
#[derive(Debug, Clone, Copy)]
pub struct SignWitness {
    pub location: f64,
    pub value: f64,
    /// True when the offending quantity is a jump rather than a slope.
    pub is_jump: bool,
}

/// Scan the distributional derivative for a sign violation: the smooth
/// slope is sampled densely inside every piece and each jump is inspected
/// directly. Returns the first witness where either goes negative, or None
/// when the function is nondecreasing in the distributional sense.
pub fn derivative_sign(f: &PiecewiseFunction, samples_per_piece: usize) -> Option<SignWitness> {
    let (start, end) = f.domain();
    let mut cuts = f.breakpoints();
    cuts.insert(0, start);
    cuts.push(end);
    for w in cuts.windows(2) {
        if w[0] > start {
            let jump = f.jump_at(w[0]);
            if jump < 0.0 {
                return Some(SignWitness {
                    location: w[0],
                    value: jump,
                    is_jump: true,
                });
            }
        }
        // Sample strictly inside the piece so breakpoint ambiguity cannot
        // leak in.
        let pad = (w[1] - w[0]) * 1e-9;
        for r in linspace(w[0] + pad, w[1] - pad, samples_per_piece.max(2)) {
            let slope = f.derivative(r);
            if slope < 0.0 {
                return Some(SignWitness {
                    location: r,
                    value: slope,
                    is_jump: false,
                });
            }
        }
    }
    None
}

/// Check monotonicity of the sampled values over a grid merged with the
/// breakpoints (a pure grid scan can miss a downward jump between rows).
/// Returns the first (radius, drop) pair, comparing both across rows and
/// across each breakpoint's two one-sided values.
pub fn is_nondecreasing(f: &PiecewiseFunction, grid: &[f64]) -> Option<(f64, f64)> {
    let (start, end) = f.domain();
    let mut rs: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&r| r >= start && r <= end)
        .chain(f.breakpoints())
        .collect();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rs.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    let breaks = f.breakpoints();
    let mut prev = f.value(rs[0]);
    for &r in &rs[1..] {
        if breaks.iter().any(|&b| b == r) {
            let before = f.left_value(r);
            if before < prev {
                return Some((r, before - prev));
            }
            prev = before;
        }
        let cur = f.value(r);
        if cur < prev {
            return Some((r, cur - prev));
        }
        prev = cur;
    }
    None
}

/// Normalized smooth bump supported on a closed interval:
/// c exp(-1 / (1 - t^2)) in the rescaled coordinate, zero outside, with c
/// fixed so the integral is one.
#[derive(Debug, Clone)]
pub struct Bump {
    a: f64,
    b: f64,
    norm: f64,
}

impl Bump {
    pub fn new(a: f64, b: f64) -> Result<Self, DistError> {
        if !(b > a) {
            return Err(DistError::EmptySupport(a, b));
        }
        let mut bump = Bump { a, b, norm: 1.0 };
        let mass = integrate_adaptive(&|x| bump.eval(x), a, b, 1e-13);
        bump.norm = 1.0 / mass;
        Ok(bump)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        if t.abs() >= 1.0 {
            return 0.0;
        }
        self.norm * (-1.0 / (1.0 - t * t)).exp()
    }
}

fn shifted_breakpoints(f: &PiecewiseFunction, h: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .flat_map(|b| [b, b - h])
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts
}

/// Average of the increment f(r + h) - f(r) against a normalized bump,
/// integrated with the quadrature split at every radius where either the
/// function or its shift changes piece.
pub fn averaged_increment(f: &PiecewiseFunction, bump: &Bump, h: f64) -> f64 {
    let (lo, hi) = bump.support();
    let cuts = shifted_breakpoints(f, h, lo, hi);
    integrate_with_breakpoints(
        &|r| bump.eval(r) * (f.value(r + h) - f.value(r)),
        lo,
        hi,
        &cuts,
        24,
    )
}

/// Both sides of the mollified difference-quotient domination at scale h:
/// the averaged quotient of f against the bump on the left, the averaged
/// mean of the absolutely continuous slope over [r, r + h] on the right.
/// When every jump of f is downward the left side never exceeds the right.
pub fn mollified_quotient_check(f: &PiecewiseFunction, bump: &Bump, h: f64) -> (f64, f64) {
    let lhs = averaged_increment(f, bump, h) / h;
    let (lo, hi) = bump.support();
    let cuts = shifted_breakpoints(f, h, lo, hi);
    let breaks = f.breakpoints();
    let rhs = integrate_with_breakpoints(
        &|r| {
            let inner: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&b| b > r && b < r + h)
                .collect();
            let mean =
                integrate_with_breakpoints(&|s| f.derivative(s), r, r + h, &inner, 12) / h;
            bump.eval(r) * mean
        },
        lo,
        hi,
        &cuts,
        24,
    );
    (lhs, rhs)
}

/// Probe window [r0, r1] of the reference construction: the band of radii
/// whose forward window of width h always straddles the step at s.
pub fn instance_window(s: f64, h: f64) -> (f64, f64) {
    (s - 0.9 * h, s - 0.1 * h)
}

/// The reference drift-plus-step profile: slope (2 eta / 3) / h everywhere,
/// one downward jump of -eta at s. Every increment over width h taken from
/// the probe window is exactly -eta / 3.
pub fn step_instance(eta: f64, h: f64, s: f64) -> PiecewiseFunction {
    let slope = 2.0 * eta / (3.0 * h);
    let lo = s - 1.5 * h;
    let hi = s + 1.5 * h;
    let drift: RealFn = Arc::new(move |r| slope * (r - lo));
    let dropped: RealFn = Arc::new(move |r| slope * (r - lo) - eta);
    let d: RealFn = Arc::new(move |_| slope);
    PiecewiseFunction::new(
        vec![
            Piece {
                start: lo,
                f: drift,
                df: d.clone(),
            },
            Piece {
                start: s,
                f: dropped,
                df: d,
            },
        ],
        hi,
    )
    .expect("reference construction is always well formed")
}

/// One randomized trial of the averaged-increment identity.
#[derive(Debug, Clone, Copy)]
pub struct LemmaTrial {
    pub eta: f64,
    pub h: f64,
    pub s: f64,
    pub measured: f64,
    pub expected: f64,
    pub rel_err: f64,
}

/// Randomized suite: for each random (eta, h, s) instance, average the
/// increment against several random bumps inside the probe window and
/// record the relative error against -eta / 3.
pub fn lemma_suite(seed: u64, instances: usize, bumps_per: usize) -> Vec<LemmaTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(instances * bumps_per);
    for _ in 0..instances {
        let eta = rng.gen_range(0.1..10.0);
        let h = rng.gen_range(0.05..0.5);
        let s = rng.gen_range(2.0..8.0);
        let f = step_instance(eta, h, s);
        let (r0, r1) = instance_window(s, h);
        let expected = -eta / 3.0;
        for _ in 0..bumps_per {
            let a = rng.gen_range(r0..r0 + 0.6 * (r1 - r0));
            let b = rng.gen_range(a + 0.2 * (r1 - r0)..r1);
            let bump = Bump::new(a, b).unwrap();
            let measured = averaged_increment(&f, &bump, h);
            out.push(LemmaTrial {
                eta,
                h,
                s,
                measured,
                expected,
                rel_err: (measured - expected).abs() / expected.abs(),
            });
        }
    }
    out
}

/// Random piecewise profile with smooth drift and only downward jumps, the
/// shape class for which quotient domination holds.
pub fn random_descending_staircase(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> PiecewiseFunction {
    let k = rng.gen_range(1..=4usize);
    let mut starts = vec![lo];
    for _ in 0..k {
        starts.push(rng.gen_range(lo + 0.1 * (hi - lo)..hi - 0.1 * (hi - lo)));
    }
    starts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    starts.dedup_by(|a, b| (*a - *b).abs() < 0.05 * (hi - lo));
    let mut pieces = Vec::with_capacity(starts.len());
    let mut offset = 0.0f64;
    let mut prev_end_value = 0.0f64;
    for (i, &start) in starts.iter().enumerate() {
        let lin = rng.gen_range(-1.5..1.5);
        let amp = rng.gen_range(-0.8..0.8);
        let freq = rng.gen_range(0.5..3.0);
        if i > 0 {
            let jump = -rng.gen_range(0.01..2.0);
            let incoming = prev_end_value;
            let raw = lin * start + amp * (freq * start).sin();
            offset = incoming + jump - raw;
        }
        let base = offset;
        let f: RealFn = Arc::new(move |r| base + lin * r + amp * (freq * r).sin());
        let df: RealFn = Arc::new(move |r| lin + amp * freq * (freq * r).cos());
        let next = starts.get(i + 1).copied().unwrap_or(hi);
        prev_end_value = base + lin * next + amp * (freq * next).sin();
        pieces.push(Piece { start, f, df });
    }
    PiecewiseFunction::new(pieces, hi).expect("starts are sorted and distinct")
}
