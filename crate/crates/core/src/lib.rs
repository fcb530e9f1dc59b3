//! Inverse Wulff problem for planar Jordan curves.
//!
//! Given a closed polygonal curve, find the anisotropy function σ (a
//! trigonometric polynomial with `N` complex Fourier modes) minimizing the
//! anisoperimetric ratio `L_σ(Γ)² / (4 |W_σ| A(Γ))`. The nonconvex quadratic
//! program in the Fourier coefficients is lifted into a semidefinite program
//! augmented with the quadratic-linear constraint `AX = bxᵀ` (or its trace
//! form), which makes the relaxation exact, and solved with the built-in
//! primal-dual interior-point method in [`sdp`].
//!
//! Module map:
//!
//! * [`curve`] — polygonal curves, length, area, tangents, Fourier length spectrum.
//! * [`anisotropy`] — truncated Fourier anisotropy functions, Wulff/Frank geometry, cone tests.
//! * [`relaxation`] — the generic QCQP, its enhanced relaxation, and the Wulff instance.
//! * [`sdp`] — block-diagonal SDP standard form and the interior-point solver.
//! * [`analysis`] — convergence sweeps, experimental orders, damped projections.

pub mod analysis;
pub mod anisotropy;
pub mod curve;
pub mod linalg;
pub mod relaxation;
pub mod sdp;

pub use num_complex::Complex64;

pub use anisotropy::{AnisotropyError, AnisotropyFn, ConeCertificate, ConeMembership, ConeMethod};
pub use curve::{BuiltinCurve, CurveError, LengthSpectrum, PlanarCurve};
pub use relaxation::{
    AugmentationMode, QcqpProblem, RelaxationError, RelaxedSdp, WulffSolveOptions,
    WulffSolveResult,
};
pub use sdp::{IpmOptions, SdpError, SdpSolution, SdpStandardForm, SolveStatus};
