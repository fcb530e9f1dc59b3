//! Anisotropy functions as truncated Fourier series
//! `σ(ν) = σ₀ + 2 Re Σ_{k≥1} σ_k e^{ikν}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{LengthSpectrum, Point};
use crate::linalg::{hermitian_from_real_block, hermitian_min_eigenvalue, hermitian_toeplitz};
use crate::sdp::{self, IpmOptions, LinearForm, SdpStandardForm, SolveStatus};

/// Samples used for membership tests and extrema.
pub const GRID_SAMPLES: usize = 4096;

#[derive(Debug, Error)]
pub enum AnisotropyError {
    #[error("anisotropy needs at least one Fourier mode")]
    Empty,
    #[error("sigma_0 must be real, got imaginary part {0}")]
    ComplexMean(f64),
    #[error("non-finite Fourier coefficient at mode {0}")]
    NonFinite(usize),
    #[error("re and im arrays have lengths {re} and {im}, expected modes = {modes}")]
    LengthMismatch { modes: usize, re: usize, im: usize },
    #[error("anisotropy has {sigma} modes but the spectrum only {spectrum}")]
    ModeMismatch { sigma: usize, spectrum: usize },
    #[error("Wulff area {0} is not positive; sigma lies outside the cone")]
    NonPositiveWulffArea(f64),
    #[error("sigma({nu}) = {value} is not positive; sigma lies outside the cone")]
    NonPositiveSigma { nu: f64, value: f64 },
    #[error("sigma_0 = {0} must be positive")]
    NonPositiveMean(f64),
    #[error("scale factor {0} must be positive")]
    InvalidScale(f64),
    #[error("requested {requested} modes, only {available} available")]
    ModesOutOfRange { requested: usize, available: usize },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("Sobolev index must be 0, 1 or 2, got {0}")]
    SobolevIndex(u32),
    #[error("cone-membership solver failed: {0}")]
    Solver(String),
}

/// Truncated Fourier anisotropy with coefficients `σ_0..σ_{N-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaJson", into = "SigmaJson")]
pub struct AnisotropyFn {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SigmaJson {
    modes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<SigmaJson> for AnisotropyFn {
    type Error = AnisotropyError;

    fn try_from(j: SigmaJson) -> Result<Self, Self::Error> {
        if j.re.len() != j.modes || j.im.len() != j.modes {
            return Err(AnisotropyError::LengthMismatch {
                modes: j.modes,
                re: j.re.len(),
                im: j.im.len(),
            });
        }
        AnisotropyFn::from_parts(&j.re, &j.im)
    }
}

impl From<AnisotropyFn> for SigmaJson {
    fn from(s: AnisotropyFn) -> Self {
        SigmaJson {
            modes: s.modes(),
            re: s.coeffs.iter().map(|z| z.re).collect(),
            im: s.coeffs.iter().map(|z| z.im).collect(),
        }
    }
}

impl AnisotropyFn {
    /// Requires `σ_0` to be exactly real.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, AnisotropyError> {
        if coeffs.is_empty() {
            return Err(AnisotropyError::Empty);
        }
        if let Some(k) = coeffs.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AnisotropyError::NonFinite(k));
        }
        if coeffs[0].im != 0.0 {
            return Err(AnisotropyError::ComplexMean(coeffs[0].im));
        }
        Ok(Self { coeffs })
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self, AnisotropyError> {
        if re.len() != im.len() {
            return Err(AnisotropyError::LengthMismatch {
                modes: re.len(),
                re: re.len(),
                im: im.len(),
            });
        }
        Self::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }

    /// Real coefficients only: `σ = σ₀ + 2 Σ a_k cos kν`.
    pub fn from_real(re: &[f64]) -> Result<Self, AnisotropyError> {
        Self::from_parts(re, &vec![0.0; re.len()])
    }

    /// `σ ≡ 1` with `modes` coefficients.
    pub fn isotropic(modes: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modes.max(1)];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    fn series(coeffs: impl Iterator<Item = (usize, Complex64)>, nu: f64) -> f64 {
        let mut total = 0.0;
        for (k, c) in coeffs {
            if k == 0 {
                total += c.re;
            } else {
                let e = Complex64::from_polar(1.0, k as f64 * nu);
                total += 2.0 * (c * e).re;
            }
        }
        total
    }

    pub fn evaluate(&self, nu: f64) -> f64 {
        Self::series(self.coeffs.iter().copied().enumerate(), nu)
    }

    /// `σ + σ''`, from the coefficients `(1 − k²) σ_k`.
    pub fn evaluate_stiffness(&self, nu: f64) -> f64 {
        Self::series(self.stiffness_coeffs().into_iter().enumerate(), nu)
    }

    /// `σ'`, from the coefficients `i k σ_k`.
    pub fn derivative(&self, nu: f64) -> f64 {
        Self::series(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (k, Complex64::new(0.0, k as f64) * c)),
            nu,
        )
    }

    pub fn stiffness_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (1.0 - (k * k) as f64))
            .collect()
    }

    /// Values of σ and σ+σ'' on `m` uniform angles `2πj/m`.
    pub fn sample(&self, m: usize) -> Vec<(f64, f64, f64)> {
        (0..m)
            .map(|j| {
                let nu = 2.0 * PI * j as f64 / m as f64;
                (nu, self.evaluate(nu), self.evaluate_stiffness(nu))
            })
            .collect()
    }

    /// `π σ₀² + 2π Σ (1 − k²)|σ_k|²`; negative values signal a non-convex Wulff boundary.
    pub fn wulff_area(&self) -> f64 {
        let mut a = PI * self.coeffs[0].re * self.coeffs[0].re;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            a += 2.0 * PI * (1.0 - (k * k) as f64) * c.norm_sqr();
        }
        a
    }

    /// Interface energy `c₀σ₀ + 2 Re Σ conj(c_k) σ_k`.
    pub fn interface_energy(&self, spec: &LengthSpectrum) -> Result<f64, AnisotropyError> {
        let c = spec.coeffs();
        if self.modes() > c.len() {
            return Err(AnisotropyError::ModeMismatch {
                sigma: self.modes(),
                spectrum: c.len(),
            });
        }
        let mut e = c[0].re * self.coeffs[0].re;
        for k in 1..self.modes() {
            e += 2.0 * (c[k].conj() * self.coeffs[k]).re;
        }
        Ok(e)
    }

    /// `Π = L_σ² / (4 |W_σ| A)`.
    pub fn anisoperimetric_ratio(&self, spec: &LengthSpectrum) -> Result<f64, AnisotropyError> {
        let w = self.wulff_area();
        if !(w > 0.0) {
            return Err(AnisotropyError::NonPositiveWulffArea(w));
        }
        let l = self.interface_energy(spec)?;
        Ok(l * l / (4.0 * w * spec.enclosed_area()))
    }

    /// Toeplitz matrix of `σ_0..σ_{n-1}` and its smallest eigenvalue.
    pub fn bochner_toeplitz(&self, n: usize) -> Result<(DMatrix<Complex64>, f64), AnisotropyError> {
        if n == 0 || n > self.modes() {
            return Err(AnisotropyError::ModesOutOfRange {
                requested: n,
                available: self.modes(),
            });
        }
        let t = hermitian_toeplitz(&self.coeffs, n);
        let e = hermitian_min_eigenvalue(&t);
        Ok((t, e))
    }

    /// Wulff boundary `x(ν) = −σ n + σ' t` at `m` uniform angles.
    pub fn wulff_boundary(&self, m: usize) -> Result<Vec<Point>, AnisotropyError> {
        check_samples(m)?;
        Ok((0..m)
            .map(|j| {
                let nu = 2.0 * PI * j as f64 / m as f64;
                let (s, c) = nu.sin_cos();
                let sig = self.evaluate(nu);
                let d = self.derivative(nu);
                // t = (cos, sin), n = (−sin, cos)
                [sig * s + d * c, -sig * c + d * s]
            })
            .collect())
    }

    /// Frank diagram boundary `−n/σ` at `m` uniform angles.
    pub fn frank_boundary(&self, m: usize) -> Result<Vec<Point>, AnisotropyError> {
        check_samples(m)?;
        (0..m)
            .map(|j| {
                let nu = 2.0 * PI * j as f64 / m as f64;
                let sig = self.evaluate(nu);
                if !(sig > 0.0) {
                    return Err(AnisotropyError::NonPositiveSigma { nu, value: sig });
                }
                let (s, c) = nu.sin_cos();
                Ok([s / sig, -c / sig])
            })
            .collect()
    }

    /// `(σ_max − σ_min) / (2σ₀)` over the membership grid.
    pub fn anisotropy_strength(&self) -> Result<f64, AnisotropyError> {
        let s0 = self.mean();
        if !(s0 > 0.0) {
            return Err(AnisotropyError::NonPositiveMean(s0));
        }
        let (lo, hi) = (0..GRID_SAMPLES)
            .map(|j| self.evaluate(2.0 * PI * j as f64 / GRID_SAMPLES as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok((hi - lo) / (2.0 * s0))
    }

    /// `‖σ‖_{r,2}`: weights `1 + k^{2r}` for r ≥ 1 (weight 1 at k = 0) and 1 for r = 0.
    pub fn sobolev_norm(&self, r: u32) -> Result<f64, AnisotropyError> {
        if r > 2 {
            return Err(AnisotropyError::SobolevIndex(r));
        }
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let w = if r == 0 || k == 0 {
                    1.0
                } else {
                    1.0 + (k as f64).powi(2 * r as i32)
                };
                w * c.norm_sqr()
            })
            .sum();
        Ok(sum.sqrt())
    }

    pub fn scale(&self, t: f64) -> Result<Self, AnisotropyError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(AnisotropyError::InvalidScale(t));
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        })
    }

    pub fn truncated(&self, n: usize) -> Result<Self, AnisotropyError> {
        if n == 0 || n > self.modes() {
            return Err(AnisotropyError::ModesOutOfRange {
                requested: n,
                available: self.modes(),
            });
        }
        Ok(Self {
            coeffs: self.coeffs[..n].to_vec(),
        })
    }

    pub fn cone_membership(&self, method: ConeMethod) -> Result<ConeMembership, AnisotropyError> {
        match method {
            ConeMethod::Grid => Ok(self.grid_membership()),
            ConeMethod::Sdp => self.sdp_membership(),
        }
    }

    fn grid_membership(&self) -> ConeMembership {
        let scale = self.mean().abs().max(1.0);
        let (min_sigma, min_stiffness) = self
            .sample(GRID_SAMPLES)
            .into_iter()
            .fold((f64::INFINITY, f64::INFINITY), |(a, b), (_, s, g)| (a.min(s), b.min(g)));
        let margin = min_sigma.min(min_stiffness);
        ConeMembership {
            method: ConeMethod::Grid,
            member: margin >= -1e-9 * scale,
            boundary: margin.abs() < 1e-4 * scale,
            margin,
            min_sigma,
            min_stiffness,
            certificate: None,
        }
    }

    /// Decide membership through the Hermitian system: maximize the smallest
    /// shift `t` with `F − tI ⪰ 0`, `G − tI ⪰ 0`. The shifted matrices are
    /// strictly feasible, so the solve never sits on an empty interior.
    fn sdp_membership(&self) -> Result<ConeMembership, AnisotropyError> {
        let n = self.modes();
        let g_coeffs = self.stiffness_coeffs();
        // blocks: real embeddings of F − t_F I and G − t_G I, then u_F, u_G ≥ 0
        let mut p = SdpStandardForm::new(vec![2 * n, 2 * n, 1, 1]);
        let mut obj = LinearForm::new();
        obj.add(2, 0, 0, 1.0).add(3, 0, 0, 1.0);
        p.add_objective(obj);
        for (blk, coeffs) in [(0usize, &self.coeffs), (1usize, &g_coeffs)] {
            for (k, c) in coeffs.iter().enumerate() {
                let (mut re, im) = subdiagonal_sum_forms(blk, n, k);
                if k == 0 {
                    // tr Ŷ = n·u, with t = σ₀/n − u
                    re.add(2 + blk, 0, 0, -(n as f64));
                    p.add_constraint(re, 0.0);
                } else {
                    p.add_constraint(re, c.re);
                    p.add_constraint(im, c.im);
                }
            }
        }
        let opts = IpmOptions {
            max_iterations: 200,
            ..IpmOptions::default()
        };
        let sol = sdp::solve(&p, &opts).map_err(|e| AnisotropyError::Solver(e.to_string()))?;
        if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::NearOptimal) {
            return Err(AnisotropyError::Solver(format!(
                "status {:?} after {} iterations",
                sol.status, sol.iterations
            )));
        }
        let s0 = self.mean();
        let build = |blk: usize| {
            let t = s0 / n as f64 - sol.primal.blocks[2 + blk][(0, 0)];
            let mut h = hermitian_from_real_block(&sol.primal.blocks[blk]);
            for i in 0..n {
                h[(i, i)] += t;
            }
            (t, h)
        };
        let (tf, f) = build(0);
        let (tg, g) = build(1);
        let margin = tf.min(tg);
        let scale = s0.abs().max(1.0);
        let member = margin >= -1e-7 * scale;
        let grid = self.grid_membership();
        Ok(ConeMembership {
            method: ConeMethod::Sdp,
            member,
            boundary: grid.boundary,
            margin,
            min_sigma: grid.min_sigma,
            min_stiffness: grid.min_stiffness,
            certificate: member.then_some(ConeCertificate { f, g }),
        })
    }
}

fn check_samples(m: usize) -> Result<(), AnisotropyError> {
    if m < 8 {
        return Err(AnisotropyError::TooFewSamples { min: 8, got: m });
    }
    Ok(())
}

/// Linear forms for the real and imaginary parts of `Σ_p H(Y)_{p+k,p}` where
/// `Y` is the real `2n × 2n` block `blk` and `H(Y) = (Y₁₁+Y₂₂) + i(Y₂₁−Y₁₂)`.
pub(crate) fn subdiagonal_sum_forms(blk: usize, n: usize, k: usize) -> (LinearForm, LinearForm) {
    let mut re = LinearForm::new();
    let mut im = LinearForm::new();
    for q in 0..n.saturating_sub(k) {
        let p = q + k;
        re.add(blk, p, q, 1.0).add(blk, n + p, n + q, 1.0);
        im.add(blk, n + p, q, 1.0).add(blk, p, n + q, -1.0);
    }
    (re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeMethod {
    Grid,
    Sdp,
}

/// Hermitian PSD witnesses with `Σ_p F_{p+k,p} = σ_k` and
/// `Σ_p G_{p+k,p} = (1 − k²)σ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeCertificate {
    pub f: DMatrix<Complex64>,
    pub g: DMatrix<Complex64>,
}

impl ConeCertificate {
    /// Largest violation of the sub-diagonal sum equations.
    pub fn coupling_residual(&self, sigma: &AnisotropyFn) -> f64 {
        let n = self.f.nrows();
        let g_coeffs = sigma.stiffness_coeffs();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let sf: Complex64 = (k..n).map(|p| self.f[(p, p - k)]).sum();
            let sg: Complex64 = (k..n).map(|p| self.g[(p, p - k)]).sum();
            let want_f = sigma.coeffs().get(k).copied().unwrap_or_default();
            let want_g = g_coeffs.get(k).copied().unwrap_or_default();
            worst = worst.max((sf - want_f).norm()).max((sg - want_g).norm());
        }
        worst
    }

    pub fn min_eigenvalues(&self) -> (f64, f64) {
        (hermitian_min_eigenvalue(&self.f), hermitian_min_eigenvalue(&self.g))
    }
}

#[derive(Debug, Clone)]
pub struct ConeMembership {
    pub method: ConeMethod,
    pub member: bool,
    /// Grid minimum within `1e-4 · max(1, σ₀)` of zero; the sdp verdict is authoritative there.
    pub boundary: bool,
    /// Grid: `min(min σ, min σ+σ'')`. Sdp: the largest common shift of F and G.
    pub margin: f64,
    pub min_sigma: f64,
    pub min_stiffness: f64,
    pub certificate: Option<ConeCertificate>,
}
