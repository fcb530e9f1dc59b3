//! Closed polygonal curves and their Fourier length spectrum.
//!
//! A [`PlanarCurve`] is a counterclockwise vertex loop; the closing edge from
//! the last vertex back to the first is implicit. Tangents are estimated by
//! cyclic central differences, and the length spectrum
//! `c_p = ∫_Γ (t₁ − i t₂)^p ds` is approximated by the weighted sum over those
//! tangents.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{hermitian_min_eigenvalue, hermitian_toeplitz};

pub type Point = [f64; 2];

/// Smallest vertex count accepted for a sampled builtin curve.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curve needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("unknown builtin curve `{0}` (expected circle, capsule, testcurve or polygon)")]
    UnknownBuiltin(String),
    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: &'static str, reason: String },
    #[error("sample count {0} is too small (need at least {MIN_SAMPLES})")]
    TooFewSamples(usize),
    #[error("spectrum has {available} coefficients, {requested} requested")]
    SpectrumTooShort { available: usize, requested: usize },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("malformed curve input{}: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, reason: String },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CurveError {
    /// True for errors caused by malformed input rather than by geometry.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            CurveError::Parse { .. }
                | CurveError::Io { .. }
                | CurveError::UnknownBuiltin(_)
                | CurveError::InvalidParams { .. }
                | CurveError::TooFewSamples(_)
        )
    }
}

/// A closed polygonal curve with counterclockwise orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    vertices: Vec<Point>,
    /// Set when the input was clockwise and had to be reversed.
    reversed: bool,
}

impl PlanarCurve {
    /// Ingest a vertex loop.
    ///
    /// A trailing vertex equal to the first is dropped, consecutive vertices
    /// closer than `1e-12` times the bounding-box diagonal are merged, and a
    /// clockwise loop is reversed. Self-intersection is not checked.
    pub fn new(vertices: Vec<Point>) -> Result<Self, CurveError> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CurveError::Degenerate("non-finite vertex coordinate".into()));
        }
        let diag = bbox_diagonal(&vertices);
        let merge_tol = 1e-12 * diag;
        let mut pts: Vec<Point> = Vec::with_capacity(vertices.len());
        for v in vertices {
            match pts.last() {
                Some(last) if dist(last, &v) <= merge_tol => {}
                _ => pts.push(v),
            }
        }
        while pts.len() > 1 && dist(&pts[0], pts.last().unwrap()) <= merge_tol {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(CurveError::TooFewVertices(pts.len()));
        }
        let area = signed_area(&pts);
        if area.abs() <= 1e-14 * diag * diag {
            return Err(CurveError::Degenerate("enclosed area is zero".into()));
        }
        let reversed = area < 0.0;
        if reversed {
            pts.reverse();
        }
        Ok(Self {
            vertices: pts,
            reversed,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Whether ingestion reversed a clockwise input.
    pub fn was_reversed(&self) -> bool {
        self.reversed
    }

    /// Sum of segment lengths including the closing segment.
    pub fn polyline_length(&self) -> f64 {
        let k = self.vertices.len();
        (0..k)
            .map(|i| dist(&self.vertices[i], &self.vertices[(i + 1) % k]))
            .sum()
    }

    /// Shoelace area; fails if the loop is not counterclockwise.
    pub fn enclosed_area(&self) -> Result<f64, CurveError> {
        let a = signed_area(&self.vertices);
        if a > 0.0 {
            Ok(a)
        } else {
            Err(CurveError::Degenerate(format!(
                "signed area {a} is not positive (orientation violated)"
            )))
        }
    }

    /// Area of the midpoint polygon `(x_k + x_{k+1})/2`. Its edge vectors are
    /// exactly `w_k t_k` from [`Self::discrete_tangents`], so it is the curve
    /// the length spectrum describes; pairing the spectrum with this area
    /// keeps the anisoperimetric inequality `Π ≥ 1` exact at finite K.
    pub fn tangent_polygon_area(&self) -> Result<f64, CurveError> {
        let k = self.vertices.len();
        let mid: Vec<Point> = (0..k)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
            })
            .collect();
        let a = signed_area(&mid);
        if a > 0.0 {
            Ok(a)
        } else {
            Err(CurveError::Degenerate(format!(
                "midpoint polygon has nonpositive signed area {a}"
            )))
        }
    }

    /// Unit tangents and arclength weights from cyclic central differences:
    /// `t_k ∝ x_{k+1} − x_{k−1}`, `w_k = ½‖x_{k+1} − x_{k−1}‖`.
    pub fn discrete_tangents(&self) -> Result<Vec<Tangent>, CurveError> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                let next = self.vertices[(i + 1) % k];
                let prev = self.vertices[(i + k - 1) % k];
                let d = [next[0] - prev[0], next[1] - prev[1]];
                let norm = d[0].hypot(d[1]);
                if norm == 0.0 || !norm.is_finite() {
                    return Err(CurveError::Degenerate(format!(
                        "zero-length central chord at vertex {i}"
                    )));
                }
                Ok(Tangent {
                    direction: [d[0] / norm, d[1] / norm],
                    weight: 0.5 * norm,
                })
            })
            .collect()
    }

    /// Complex Fourier length spectrum `c_0 .. c_{N-1}`.
    pub fn length_spectrum(&self, modes: usize) -> Result<LengthSpectrum, CurveError> {
        if modes < 2 {
            return Err(CurveError::InvalidSpectrum(format!(
                "at least 2 modes are required, got {modes}"
            )));
        }
        let tangents = self.discrete_tangents()?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modes];
        for t in &tangents {
            let z = Complex64::new(t.direction[0], -t.direction[1]);
            let mut power = Complex64::new(t.weight, 0.0);
            for c in coeffs.iter_mut() {
                *c += power;
                power *= z;
            }
        }
        // c_0 is a sum of positive weights; drop the zero imaginary part exactly
        coeffs[0] = Complex64::new(coeffs[0].re, 0.0);
        LengthSpectrum::new(coeffs, self.tangent_polygon_area()?, self.len())
    }

    /// Parse a curve from text: either a JSON array of `[x, y]` pairs or one
    /// whitespace-separated `x y` pair per line (`#` starts a comment).
    pub fn parse(text: &str) -> Result<Self, CurveError> {
        let trimmed = text.trim_start();
        if trimmed.is_empty() {
            return Err(CurveError::Parse {
                line: None,
                reason: "input is empty".into(),
            });
        }
        let vertices: Vec<Point> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| CurveError::Parse {
                line: Some(e.line()),
                reason: e.to_string(),
            })?
        } else {
            let mut out = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(CurveError::Parse {
                        line: Some(i + 1),
                        reason: format!("expected two numbers, found {}", fields.len()),
                    });
                }
                let mut p = [0.0; 2];
                for (slot, f) in p.iter_mut().zip(&fields) {
                    *slot = f.parse().map_err(|_| CurveError::Parse {
                        line: Some(i + 1),
                        reason: format!("`{f}` is not a number"),
                    })?;
                }
                out.push(p);
            }
            out
        };
        if vertices.is_empty() {
            return Err(CurveError::Parse {
                line: None,
                reason: "no vertices".into(),
            });
        }
        Self::new(vertices)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, CurveError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CurveError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Unit tangent and arclength weight at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub direction: [f64; 2],
    pub weight: f64,
}

/// Named curve families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum BuiltinCurve {
    Circle { radius: f64 },
    /// Two horizontal segments of length `l` joined by half circles of radius `r`.
    Capsule { l: f64, r: f64 },
    /// `x₁ = cos 2πu`, `x₂ = 0.7 sin 2πu + sin(cos 2πu) + (sin 6πu · sin 2πu)²`.
    TestCurve,
    Polygon { vertices: Vec<Point> },
}

impl BuiltinCurve {
    /// Build a family from its name and a flat parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, CurveError> {
        let curve = match name.to_ascii_lowercase().as_str() {
            "circle" => match params {
                [] => BuiltinCurve::Circle { radius: 1.0 },
                [r] => BuiltinCurve::Circle { radius: *r },
                _ => {
                    return Err(CurveError::InvalidParams {
                        family: "circle",
                        reason: format!("expected 1 parameter (radius), got {}", params.len()),
                    })
                }
            },
            "capsule" => match params {
                [l, r] => BuiltinCurve::Capsule { l: *l, r: *r },
                _ => {
                    return Err(CurveError::InvalidParams {
                        family: "capsule",
                        reason: format!("expected 2 parameters (l, r), got {}", params.len()),
                    })
                }
            },
            "testcurve" => {
                if !params.is_empty() {
                    return Err(CurveError::InvalidParams {
                        family: "testcurve",
                        reason: "takes no parameters".into(),
                    });
                }
                BuiltinCurve::TestCurve
            }
            "polygon" => {
                if params.len() < 6 || !params.len().is_multiple_of(2) {
                    return Err(CurveError::InvalidParams {
                        family: "polygon",
                        reason: "expected a flat list x0,y0,x1,y1,... with at least 3 vertices"
                            .into(),
                    });
                }
                BuiltinCurve::Polygon {
                    vertices: params.chunks(2).map(|c| [c[0], c[1]]).collect(),
                }
            }
            other => return Err(CurveError::UnknownBuiltin(other.to_string())),
        };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<(), CurveError> {
        let positive = |family, what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CurveError::InvalidParams {
                    family,
                    reason: format!("{what} must be positive, got {v}"),
                })
            }
        };
        match self {
            BuiltinCurve::Circle { radius } => positive("circle", "radius", *radius),
            BuiltinCurve::Capsule { l, r } => {
                positive("capsule", "l", *l)?;
                positive("capsule", "r", *r)
            }
            BuiltinCurve::TestCurve => Ok(()),
            BuiltinCurve::Polygon { vertices } => {
                if vertices.iter().flatten().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(CurveError::InvalidParams {
                        family: "polygon",
                        reason: "non-finite vertex".into(),
                    })
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinCurve::Circle { .. } => "circle",
            BuiltinCurve::Capsule { .. } => "capsule",
            BuiltinCurve::TestCurve => "testcurve",
            BuiltinCurve::Polygon { .. } => "polygon",
        }
    }

    /// Flat parameter list, inverse of [`BuiltinCurve::from_name`].
    pub fn params(&self) -> Vec<f64> {
        match self {
            BuiltinCurve::Circle { radius } => vec![*radius],
            BuiltinCurve::Capsule { l, r } => vec![*l, *r],
            BuiltinCurve::TestCurve => vec![],
            BuiltinCurve::Polygon { vertices } => vertices.iter().flatten().copied().collect(),
        }
    }

    /// Sample the curve with `samples` vertices, counterclockwise.
    pub fn sample(&self, samples: usize) -> Result<PlanarCurve, CurveError> {
        if samples < MIN_SAMPLES {
            return Err(CurveError::TooFewSamples(samples));
        }
        self.validate()?;
        let k = samples;
        let vertices: Vec<Point> = match self {
            BuiltinCurve::Circle { radius } => (0..k)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / k as f64;
                    [radius * a.cos(), radius * a.sin()]
                })
                .collect(),
            BuiltinCurve::Capsule { l, r } => sample_capsule(*l, *r, k),
            BuiltinCurve::TestCurve => (0..k)
                .map(|j| {
                    let u = j as f64 / k as f64;
                    let a = 2.0 * PI * u;
                    let bump = (3.0 * a).sin() * a.sin();
                    [a.cos(), 0.7 * a.sin() + a.cos().sin() + bump * bump]
                })
                .collect(),
            BuiltinCurve::Polygon { vertices } => sample_polygon(vertices, k)?,
        };
        PlanarCurve::new(vertices)
    }
}

impl fmt::Display for BuiltinCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

/// Sample a named builtin curve.
pub fn builtin_curve(name: &str, params: &[f64], samples: usize) -> Result<PlanarCurve, CurveError> {
    BuiltinCurve::from_name(name, params)?.sample(samples)
}

/// Arclength-uniform samples of the capsule, centred at the origin, starting
/// at the left end of the lower segment.
fn sample_capsule(l: f64, r: f64, k: usize) -> Vec<Point> {
    let total = 2.0 * l + 2.0 * PI * r;
    (0..k)
        .map(|j| {
            let s = total * j as f64 / k as f64;
            if s < l {
                [-0.5 * l + s, -r]
            } else if s < l + PI * r {
                let a = -0.5 * PI + (s - l) / r;
                [0.5 * l + r * a.cos(), r * a.sin()]
            } else if s < 2.0 * l + PI * r {
                [0.5 * l - (s - l - PI * r), r]
            } else {
                let a = 0.5 * PI + (s - 2.0 * l - PI * r) / r;
                [-0.5 * l + r * a.cos(), r * a.sin()]
            }
        })
        .collect()
}

/// Distribute `k` samples over the polygon edges proportionally to edge
/// length, always keeping the original corners.
fn sample_polygon(corners: &[Point], k: usize) -> Result<Vec<Point>, CurveError> {
    let n = corners.len();
    if n < 3 {
        return Err(CurveError::TooFewVertices(n));
    }
    if k < n {
        return Err(CurveError::InvalidParams {
            family: "polygon",
            reason: format!("{k} samples cannot resolve {n} corners"),
        });
    }
    let lengths: Vec<f64> = (0..n).map(|i| dist(&corners[i], &corners[(i + 1) % n])).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        return Err(CurveError::Degenerate("polygon has zero perimeter".into()));
    }
    // largest-remainder apportionment with at least one sample per edge
    let extra = (k - n) as f64;
    let quotas: Vec<f64> = lengths.iter().map(|l| extra * l / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| 1 + q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(k - assigned) {
        counts[i] += 1;
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        for j in 0..counts[i] {
            let t = j as f64 / counts[i] as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    Ok(out)
}

/// Fourier length spectrum of a closed curve plus its length and area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    coeffs: Vec<Complex64>,
    enclosed_area: f64,
    sample_count: usize,
}

impl LengthSpectrum {
    /// Only `c_p` for `p ≥ 0` are stored; `c_{−p} = conj(c_p)`.
    pub fn new(
        coeffs: Vec<Complex64>,
        enclosed_area: f64,
        sample_count: usize,
    ) -> Result<Self, CurveError> {
        let Some(c0) = coeffs.first() else {
            return Err(CurveError::InvalidSpectrum("no coefficients".into()));
        };
        if c0.im != 0.0 || !(c0.re > 0.0) {
            return Err(CurveError::InvalidSpectrum(format!(
                "c_0 must be real and positive, got {c0}"
            )));
        }
        if !(enclosed_area > 0.0) {
            return Err(CurveError::InvalidSpectrum(format!(
                "enclosed area must be positive, got {enclosed_area}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CurveError::InvalidSpectrum("non-finite coefficient".into()));
        }
        Ok(Self {
            coeffs,
            enclosed_area,
            sample_count,
        })
    }

    /// Closed-form spectrum of the capsule: `c_0 = 2l + 2πr`, `c_{2k} = 2l`,
    /// `c_{2k+1} = 0`, area `2lr + πr²`.
    pub fn capsule_exact(l: f64, r: f64, modes: usize) -> Result<Self, CurveError> {
        let coeffs = (0..modes)
            .map(|p| match p {
                0 => Complex64::new(2.0 * l + 2.0 * PI * r, 0.0),
                p if p % 2 == 0 => Complex64::new(2.0 * l, 0.0),
                _ => Complex64::new(0.0, 0.0),
            })
            .collect();
        Self::new(coeffs, 2.0 * l * r + PI * r * r, 0)
    }

    /// Closed-form spectrum of a circle of radius `r`.
    pub fn circle_exact(r: f64, modes: usize) -> Result<Self, CurveError> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modes];
        if let Some(c0) = coeffs.first_mut() {
            *c0 = Complex64::new(2.0 * PI * r, 0.0);
        }
        Self::new(coeffs, PI * r * r, 0)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_p` for any integer `p` within range, using conjugate symmetry.
    pub fn get(&self, p: isize) -> Option<Complex64> {
        let c = *self.coeffs.get(p.unsigned_abs())?;
        Some(if p < 0 { c.conj() } else { c })
    }

    /// Curve length, `c_0`.
    pub fn length(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn enclosed_area(&self) -> f64 {
        self.enclosed_area
    }

    /// Vertex count `K` of the sampled curve (0 for closed-form spectra).
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// `|c_1| / c_0`, the discrete closure residual.
    pub fn closure_residual(&self) -> f64 {
        self.coeffs.get(1).map_or(0.0, |c| c.norm()) / self.length()
    }

    fn require(&self, n: usize) -> Result<(), CurveError> {
        if n > self.coeffs.len() {
            Err(CurveError::SpectrumTooShort {
                available: self.coeffs.len(),
                requested: n,
            })
        } else {
            Ok(())
        }
    }

    /// Smallest eigenvalue of `Toep(c_0, …, c_{N−1})`.
    pub fn toeplitz_min_eigenvalue(&self, n: usize) -> Result<f64, CurveError> {
        self.require(n)?;
        Ok(hermitian_min_eigenvalue(&hermitian_toeplitz(&self.coeffs, n)))
    }

    /// `(c_0²/2)(1 − 1/N) − Σ_{p=2}^{N−1} |c_p|² / (p² − 1)`, nonnegative for
    /// spectra of closed curves.
    pub fn series_estimate_gap(&self, n: usize) -> Result<f64, CurveError> {
        self.require(n)?;
        if n < 3 {
            return Err(CurveError::InvalidSpectrum(format!(
                "series estimate needs N >= 3, got {n}"
            )));
        }
        let c0 = self.length();
        let bound = 0.5 * c0 * c0 * (1.0 - 1.0 / n as f64);
        let sum: f64 = (2..n)
            .map(|p| self.coeffs[p].norm_sqr() / ((p * p) as f64 - 1.0))
            .sum();
        Ok(bound - sum)
    }

    /// Copy truncated to the first `n` coefficients.
    pub fn truncated(&self, n: usize) -> Result<Self, CurveError> {
        self.require(n)?;
        Ok(Self {
            coeffs: self.coeffs[..n].to_vec(),
            ..self.clone()
        })
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Shoelace sum about the vertex mean, so far-off translations do not cancel digits.
fn signed_area(pts: &[Point]) -> f64 {
    let k = pts.len();
    let kf = k as f64;
    let c = pts.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0] / kf, acc[1] + p[1] / kf]);
    0.5 * (0..k)
        .map(|i| {
            let a = [pts[i][0] - c[0], pts[i][1] - c[1]];
            let j = (i + 1) % k;
            let b = [pts[j][0] - c[0], pts[j][1] - c[1]];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn bbox_diagonal(pts: &[Point]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if pts.is_empty() {
        0.0
    } else {
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> PlanarCurve {
        PlanarCurve::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn circle_with_eight_samples_is_inscribed_octagon() {
        let c = builtin_curve("circle", &[1.0], 8).unwrap();
        let h = 0.5f64.sqrt();
        let expected = [[1.0, 0.0], [h, h], [0.0, 1.0], [-h, h], [-1.0, 0.0], [-h, -h], [0.0, -1.0], [h, -h]];
        for (v, e) in c.vertices().iter().zip(expected) {
            assert!((v[0] - e[0]).abs() < 1e-15 && (v[1] - e[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_square_length_and_area() {
        let sq = unit_square();
        assert_eq!(sq.polyline_length(), 4.0);
        assert_eq!(sq.enclosed_area().unwrap(), 1.0);
    }

    #[test]
    fn circle_length_and_area_match_inscribed_polygon() {
        let k = 1000;
        let c = builtin_curve("circle", &[1.0], k).unwrap();
        let kf = k as f64;
        let chord_len = kf * 2.0 * (PI / kf).sin();
        let poly_area = 0.5 * kf * (2.0 * PI / kf).sin();
        assert!((c.polyline_length() - chord_len).abs() < 1e-12);
        assert!((c.enclosed_area().unwrap() - poly_area).abs() < 1e-12);
        assert!((c.polyline_length() - 2.0 * PI).abs() < 1e-4);
        assert!((c.enclosed_area().unwrap() - PI).abs() < 1e-4);
    }

    #[test]
    fn spectrum_area_is_the_midpoint_polygon() {
        let k = 1000;
        let c = builtin_curve("circle", &[1.0], k).unwrap();
        let kf = k as f64;
        // regular K-gon of circumradius cos(π/K)
        let mid_area = 0.5 * kf * (PI / kf).cos().powi(2) * (2.0 * PI / kf).sin();
        let spec = c.length_spectrum(4).unwrap();
        assert!((spec.enclosed_area() - mid_area).abs() < 1e-12);
        // isotropic ratio K tan(π/K)/π ≥ 1
        let pi_iso = spec.length().powi(2) / (4.0 * PI * spec.enclosed_area());
        assert!((pi_iso - kf * (PI / kf).tan() / PI).abs() < 1e-12);
        assert!(pi_iso >= 1.0);
    }

    #[test]
    fn capsule_length_and_area() {
        let c = builtin_curve("capsule", &[4.0, 1.0], 2000).unwrap();
        assert!((c.polyline_length() - (8.0 + 2.0 * PI)).abs() < 1e-3);
        assert!((c.enclosed_area().unwrap() - (8.0 + PI)).abs() < 1e-2);
    }

    #[test]
    fn testcurve_length() {
        let c = builtin_curve("testcurve", &[], 1000).unwrap();
        assert!((c.polyline_length() - 9.167).abs() < 1e-3, "{}", c.polyline_length());
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let cw = PlanarCurve::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(cw.was_reversed());
        assert_eq!(cw.enclosed_area().unwrap(), 1.0);
        assert!(!unit_square().was_reversed());
    }

    #[test]
    fn repeated_closing_vertex_and_duplicates_are_dropped() {
        let c = PlanarCurve::new(vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            PlanarCurve::new(vec![[0.0, 0.0], [1.0, 0.0]]),
            Err(CurveError::TooFewVertices(2))
        ));
        assert!(matches!(
            PlanarCurve::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
            Err(CurveError::Degenerate(_))
        ));
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(builtin_curve("ellipse", &[], 100), Err(CurveError::UnknownBuiltin(_))));
        assert!(matches!(
            builtin_curve("circle", &[-1.0], 100),
            Err(CurveError::InvalidParams { .. })
        ));
        assert!(matches!(
            builtin_curve("capsule", &[4.0, 0.0], 100),
            Err(CurveError::InvalidParams { .. })
        ));
        assert!(matches!(builtin_curve("circle", &[1.0], 7), Err(CurveError::TooFewSamples(7))));
    }

    #[test]
    fn hexagon_tangents_rotate_uniformly() {
        let hex = PlanarCurve::new(
            (0..6)
                .map(|j| {
                    let a = PI * j as f64 / 3.0;
                    [a.cos(), a.sin()]
                })
                .collect(),
        )
        .unwrap();
        let t = hex.discrete_tangents().unwrap();
        for i in 0..6 {
            let a0 = t[i].direction[1].atan2(t[i].direction[0]);
            let a1 = t[(i + 1) % 6].direction[1].atan2(t[(i + 1) % 6].direction[0]);
            let mut d = a1 - a0;
            if d < 0.0 {
                d += 2.0 * PI;
            }
            assert!((d - PI / 3.0).abs() < 1e-12);
            assert!((t[i].weight - t[0].weight).abs() < 1e-12);
        }
    }

    #[test]
    fn square_sampled_densely_has_axis_tangents_off_corners() {
        let per_side = 40;
        let sq = builtin_curve("polygon", &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0], 4 * per_side)
            .unwrap();
        let t = sq.discrete_tangents().unwrap();
        let mut off_axis = 0;
        for tan in &t {
            let d = tan.direction;
            let axis = (d[0].abs() - 1.0).abs() < 1e-12 || (d[1].abs() - 1.0).abs() < 1e-12;
            if !axis {
                off_axis += 1;
            }
        }
        assert_eq!(off_axis, 4);
    }

    #[test]
    fn circle_weights_sum_to_chord_formula() {
        let k = 1000;
        let c = builtin_curve("circle", &[1.0], k).unwrap();
        let sum: f64 = c.discrete_tangents().unwrap().iter().map(|t| t.weight).sum();
        // each weight is half the chord spanning two segments: sin(2π/K)
        let expected = k as f64 * (2.0 * PI / k as f64).sin();
        assert!((sum - expected).abs() < 1e-6);
    }

    #[test]
    fn circle_spectrum_vanishes_beyond_c0() {
        let s = builtin_curve("circle", &[1.0], 1000).unwrap().length_spectrum(8).unwrap();
        assert!((s.length() - 2.0 * PI).abs() < 1e-3);
        for k in 1..8 {
            assert!(s.coeffs()[k].norm() <= 1e-3);
        }
    }

    #[test]
    fn capsule_spectrum_matches_closed_form() {
        let s = builtin_curve("capsule", &[4.0, 1.0], 4000)
            .unwrap()
            .length_spectrum(6)
            .unwrap();
        assert!((s.length() - (8.0 + 2.0 * PI)).abs() < 1e-2);
        assert!((s.coeffs()[2] - Complex64::new(8.0, 0.0)).norm() < 1e-2);
        assert!(s.coeffs()[3].norm() < 1e-2);
        assert!((s.coeffs()[4] - Complex64::new(8.0, 0.0)).norm() < 1e-2);
    }

    #[test]
    fn toeplitz_min_eigenvalue_cases() {
        let circle = LengthSpectrum::circle_exact(1.0, 4).unwrap();
        assert!((circle.toeplitz_min_eigenvalue(4).unwrap() - 2.0 * PI).abs() < 1e-12);

        // brute-force eigenvalues of Toep(1, 0.9, 0.9): the symmetric real
        // matrix [[1,.9,.9],[.9,1,.9],[.9,.9,1]] = 0.1 I + 0.9 J, eigenvalues
        // 0.1 (twice) and 2.8
        let synthetic = LengthSpectrum::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.9, 0.0), Complex64::new(0.9, 0.0)],
            1.0,
            0,
        )
        .unwrap();
        assert!((synthetic.toeplitz_min_eigenvalue(3).unwrap() - 0.1).abs() < 1e-12);

        // c = (1, 0.9, 0): eigenvalues 1 and 1 ± 0.9·√2 → negative minimum
        let not_psd = LengthSpectrum::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0)],
            1.0,
            0,
        )
        .unwrap();
        let expected = 1.0 - 0.9 * 2f64.sqrt();
        assert!((not_psd.toeplitz_min_eigenvalue(3).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn series_gap_closed_forms() {
        let circle = LengthSpectrum::circle_exact(1.0, 10).unwrap();
        let c0 = 2.0 * PI;
        assert!((circle.series_estimate_gap(10).unwrap() - 0.5 * c0 * c0 * 0.9).abs() < 1e-12);

        let (l, r) = (4.0, 1.0);
        for n in [4usize, 8, 20] {
            let caps = LengthSpectrum::capsule_exact(l, r, n).unwrap();
            let c0 = 2.0 * l + 2.0 * PI * r;
            let expected =
                0.5 * c0 * c0 * (1.0 - 1.0 / n as f64) - 2.0 * l * l * (1.0 - 1.0 / (n as f64 - 1.0));
            assert!((caps.series_estimate_gap(n).unwrap() - expected).abs() < 1e-10);
        }

        // thin capsule: the estimate is nearly attained
        let thin = LengthSpectrum::capsule_exact(4.0, 0.01, 200).unwrap();
        let gap = thin.series_estimate_gap(200).unwrap();
        let c0 = thin.length();
        assert!(gap > 0.0 && gap < 0.02 * c0 * c0, "gap {gap}");
    }

    #[test]
    fn spectrum_size_errors() {
        let s = LengthSpectrum::circle_exact(1.0, 4).unwrap();
        assert!(matches!(
            s.toeplitz_min_eigenvalue(5),
            Err(CurveError::SpectrumTooShort { .. })
        ));
    }

    #[test]
    fn parse_text_and_json() {
        let text = "# square\n0 0\n1 0\n1 1\n0 1\n0 0\n";
        assert_eq!(PlanarCurve::parse(text).unwrap().len(), 4);
        let json = "[[0,0],[1,0],[1,1],[0,1]]";
        assert_eq!(PlanarCurve::parse(json).unwrap().len(), 4);
        assert!(matches!(PlanarCurve::parse(""), Err(CurveError::Parse { .. })));
        assert!(matches!(
            PlanarCurve::parse("0 0\n1 x\n"),
            Err(CurveError::Parse { line: Some(2), .. })
        ));
    }
}
