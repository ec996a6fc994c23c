//! Orthonormal angular bases on the unit circle and unit sphere, with the
//! quadrature rules used to project angular coefficients onto them.
//!
//! Dimension 2 uses the real Fourier basis 1/sqrt(2*pi), cos(l*t)/sqrt(pi),
//! sin(l*t)/sqrt(pi); dimension 3 uses real spherical harmonics built from
//! associated Legendre polynomials. Both are eigenbases of the angular
//! Laplacian with eigenvalues l*(l+N-2), which is what makes the radial
//! reduction of -Delta + q block-structured: the centrifugal part acts as the
//! diagonal matrix l*(l+N-2)/r^2 in these coordinates.
//!
//! Quadrature: dimension 3 pairs Gauss-Legendre in cos(theta) (L+1 points)
//! with a uniform azimuthal rule (2L+1 points), which integrates products of
//! two basis functions exactly; dimension 2 uses 2L+1 uniform nodes, exact on
//! trigonometric polynomials of that degree. An oversampling factor is
//! available for coefficients with angular jumps, where plain quadrature
//! degrades to roughly 1e-3 accuracy and denser sampling buys the rest.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::quad::gauss_legendre;

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("unsupported dimension {0}: supported ambient dimensions are 2 and 3")]
    UnsupportedDimension(usize),
    #[error("cutoff degree {0} exceeds the supported maximum {1}")]
    CutoffTooLarge(u32, u32),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("angular sample at node {index} is not finite: {value}")]
    NonFiniteSample { index: usize, value: Complex64 },
    #[error("coefficient vector has length {got}, basis has {want} modes")]
    LengthMismatch { got: usize, want: usize },
}

pub const MAX_CUTOFF: u32 = 8;

/// One basis mode: degree l and an order tag.
///
/// Dimension 2: order +l marks cos(l t), order -l marks sin(l t), 0 the
/// constant. Dimension 3: order runs over -l..=l as usual for real harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub degree: u32,
    pub order: i32,
}

/// Complex coefficient vector over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    pub coeffs: Vec<Complex64>,
}

impl ModeVector {
    pub fn zeros(n: usize) -> Self {
        ModeVector {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Unit vector along coefficient `i`.
    pub fn basis_vector(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coeffs[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        ModeVector { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Hermitian inner product; the conjugate sits on `other`.
    pub fn inner(&self, other: &ModeVector) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> ModeVector {
        ModeVector {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// self + s * other.
    pub fn add_scaled(&self, s: Complex64, other: &ModeVector) -> ModeVector {
        ModeVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Dense matrix of an angular multiplication operator in basis coordinates:
/// entries G_ij = integral of f * Y_i * Y_j over the sphere (real basis, so
/// no conjugation on the basis functions). Hermitian exactly when f is real.
#[derive(Debug, Clone)]
pub struct GramOperator {
    pub dim: usize,
    data: Vec<Complex64>,
    hermitian: bool,
}

impl GramOperator {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn apply(&self, v: &ModeVector) -> ModeVector {
        let n = self.dim;
        let mut out = ModeVector::zeros(n);
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.data[i * n + j] * v.coeffs[j];
            }
            out.coeffs[i] = acc;
        }
        out
    }

    /// Quadratic form (G v, v) with the inner product conjugating the second
    /// argument. Real (up to round-off) when the operator is Hermitian.
    pub fn form(&self, v: &ModeVector) -> Complex64 {
        self.apply(v).inner(v)
    }

    /// Add a real diagonal in place and return the operator. Keeps the
    /// Hermitian flag: a real diagonal never breaks symmetry.
    pub fn add_diagonal(mut self, diag: &[f64]) -> GramOperator {
        assert_eq!(diag.len(), self.dim);
        for (i, d) in diag.iter().enumerate() {
            self.data[i * self.dim + i] += d;
        }
        self
    }
}

/// Angular basis together with its quadrature rule and a precomputed table of
/// basis values at the nodes.
#[derive(Debug)]
pub struct SphereBasis {
    dimension: usize,
    cutoff: u32,
    modes: Vec<Mode>,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    /// table[k * mode_count + i] = Y_i(node_k)
    table: Vec<f64>,
}

impl SphereBasis {
    pub fn build(dimension: usize, cutoff: u32) -> Result<Self, SphereError> {
        Self::build_oversampled(dimension, cutoff, 1)
    }

    /// Oversampled quadrature for angular coefficients with jumps; the mode
    /// set is unchanged, only the node count grows.
    pub fn build_oversampled(
        dimension: usize,
        cutoff: u32,
        factor: usize,
    ) -> Result<Self, SphereError> {
        if dimension != 2 && dimension != 3 {
            return Err(SphereError::UnsupportedDimension(dimension));
        }
        if cutoff > MAX_CUTOFF {
            return Err(SphereError::CutoffTooLarge(cutoff, MAX_CUTOFF));
        }
        let factor = factor.max(1);
        let l = cutoff as usize;

        let mut modes = Vec::new();
        if dimension == 2 {
            modes.push(Mode {
                degree: 0,
                order: 0,
            });
            for deg in 1..=cutoff {
                modes.push(Mode {
                    degree: deg,
                    order: deg as i32,
                });
                modes.push(Mode {
                    degree: deg,
                    order: -(deg as i32),
                });
            }
        } else {
            for deg in 0..=cutoff {
                for ord in -(deg as i32)..=(deg as i32) {
                    modes.push(Mode {
                        degree: deg,
                        order: ord,
                    });
                }
            }
        }

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        if dimension == 2 {
            let n = factor * (2 * l + 1).max(1);
            for k in 0..n {
                let t = 2.0 * PI * k as f64 / n as f64;
                nodes.push([t.cos(), t.sin(), 0.0]);
                weights.push(2.0 * PI / n as f64);
            }
        } else {
            let n_theta = factor * (l + 1);
            let n_phi = factor * (2 * l + 1).max(1);
            let (ct_nodes, ct_weights) = gauss_legendre(n_theta);
            for (ct, wt) in ct_nodes.iter().zip(&ct_weights) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for p in 0..n_phi {
                    let phi = 2.0 * PI * p as f64 / n_phi as f64;
                    nodes.push([st * phi.cos(), st * phi.sin(), *ct]);
                    weights.push(wt * 2.0 * PI / n_phi as f64);
                }
            }
        }

        let nm = modes.len();
        let mut table = vec![0.0; nodes.len() * nm];
        for (k, node) in nodes.iter().enumerate() {
            for (i, mode) in modes.iter().enumerate() {
                table[k * nm + i] = if dimension == 2 {
                    fourier_value(mode, node)
                } else {
                    harmonic_value(mode, node)
                };
            }
        }

        Ok(SphereBasis {
            dimension,
            cutoff,
            modes,
            nodes,
            weights,
            table,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Angular Laplacian eigenvalue of mode `i`: l*(l+N-2).
    pub fn eigenvalue(&self, i: usize) -> f64 {
        let l = self.modes[i].degree as f64;
        l * (l + self.dimension as f64 - 2.0)
    }

    /// Eigenvalues of the centrifugal operator at radius r, i.e.
    /// l*(l+N-2)/r^2 per mode. Rejects non-positive radii.
    pub fn centrifugal_eigenvalues(&self, r: f64) -> Result<Vec<f64>, SphereError> {
        if !(r > 0.0) {
            return Err(SphereError::NonPositiveRadius(r));
        }
        Ok((0..self.mode_count())
            .map(|i| self.eigenvalue(i) / (r * r))
            .collect())
    }

    pub fn mode_value(&self, node_index: usize, mode_index: usize) -> f64 {
        self.table[node_index * self.mode_count() + mode_index]
    }

    /// Values of the synthesized function sum_i c_i Y_i at every node.
    pub fn synthesize(&self, v: &ModeVector) -> Result<Vec<Complex64>, SphereError> {
        let nm = self.mode_count();
        if v.len() != nm {
            return Err(SphereError::LengthMismatch {
                got: v.len(),
                want: nm,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.node_count()];
        for (k, slot) in out.iter_mut().enumerate() {
            let row = &self.table[k * nm..(k + 1) * nm];
            let mut acc = Complex64::new(0.0, 0.0);
            for (y, c) in row.iter().zip(&v.coeffs) {
                acc += c * y;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Project node values back onto the basis by quadrature.
    pub fn analyze(&self, node_values: &[Complex64]) -> ModeVector {
        let nm = self.mode_count();
        let mut out = ModeVector::zeros(nm);
        for (k, f) in node_values.iter().enumerate() {
            let w = self.weights[k];
            let row = &self.table[k * nm..(k + 1) * nm];
            for (i, y) in row.iter().enumerate() {
                out.coeffs[i] += f * (w * y);
            }
        }
        out
    }

    /// Matrix of multiplication by the angular function `f` sampled at the
    /// quadrature nodes. Entries approximate the integral of f*Y_i*Y_j; the
    /// result is flagged Hermitian exactly when every sample is real.
    pub fn gram<F>(&self, f: F) -> Result<GramOperator, SphereError>
    where
        F: Fn(&[f64; 3]) -> Complex64,
    {
        let nm = self.mode_count();
        let mut samples = Vec::with_capacity(self.node_count());
        let mut real = true;
        for (k, node) in self.nodes.iter().enumerate() {
            let val = f(node);
            if !val.re.is_finite() || !val.im.is_finite() {
                return Err(SphereError::NonFiniteSample {
                    index: k,
                    value: val,
                });
            }
            if val.im != 0.0 {
                real = false;
            }
            samples.push(val);
        }
        let mut data = vec![Complex64::new(0.0, 0.0); nm * nm];
        for k in 0..self.node_count() {
            let wf = samples[k] * self.weights[k];
            let row = &self.table[k * nm..(k + 1) * nm];
            for i in 0..nm {
                let yi = row[i];
                if yi == 0.0 {
                    continue;
                }
                let base = i * nm;
                for j in 0..nm {
                    data[base + j] += wf * (yi * row[j]);
                }
            }
        }
        Ok(GramOperator {
            dim: nm,
            data,
            hermitian: real,
        })
    }

    /// Quadratic form of multiplication by node-sampled values against a
    /// coefficient vector, evaluated through synthesis: sum_k w_k f_k |phi_k|^2.
    /// Identical to gram(f).form(v) but linear instead of quadratic in the
    /// mode count.
    pub fn sampled_form(
        &self,
        samples: &[Complex64],
        v: &ModeVector,
    ) -> Result<Complex64, SphereError> {
        let phi = self.synthesize(v)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, p), w) in samples.iter().zip(&phi).zip(&self.weights) {
            acc += s * (w * p.norm_sqr());
        }
        Ok(acc)
    }
}

fn fourier_value(mode: &Mode, node: &[f64; 3]) -> f64 {
    let t = node[1].atan2(node[0]);
    let l = mode.degree as f64;
    if mode.degree == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else if mode.order > 0 {
        (l * t).cos() / PI.sqrt()
    } else {
        (l * t).sin() / PI.sqrt()
    }
}

/// Real spherical harmonic of the given mode at a unit vector.
fn harmonic_value(mode: &Mode, node: &[f64; 3]) -> f64 {
    let l = mode.degree;
    let m_abs = mode.order.unsigned_abs();
    let ct = node[2];
    let phi = node[1].atan2(node[0]);
    let p = associated_legendre(l, m_abs, ct);
    let norm = harmonic_norm(l, m_abs);
    if mode.order == 0 {
        norm * p
    } else if mode.order > 0 {
        std::f64::consts::SQRT_2 * norm * (m_abs as f64 * phi).cos() * p
    } else {
        std::f64::consts::SQRT_2 * norm * (m_abs as f64 * phi).sin() * p
    }
}

/// sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)
fn harmonic_norm(l: u32, m: u32) -> f64 {
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    ((2.0 * l as f64 + 1.0) / (4.0 * PI) * ratio).sqrt()
}

/// Associated Legendre P_l^m(x) without the Condon-Shortley phase folded into
/// the normalization (the phase cancels in the quadratic forms used here, so
/// the standard (-1)^m-free recurrence is fine as long as it is consistent).
fn associated_legendre(l: u32, m: u32, x: f64) -> f64 {
    debug_assert!(m <= l);
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}
