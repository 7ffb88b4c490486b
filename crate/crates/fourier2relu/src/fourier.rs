//! Fourier-side description of the target function.
//!
//! A target is specified by a finite positive measure over frequency vectors
//! together with a phase per frequency: f(x) = sum_j w_j cos(<xi_j, x> + theta_j)
//! for atomic measures, or a rotation-invariant density (the standard
//! Gaussian) for which f is known in closed form. The moment constants
//! `C^alpha = int |xi|^alpha dmu` drive both the sample-count schedule and the
//! approximation-rate bounds, so they are computed twice: in closed form and
//! by adaptive radial quadrature.

use crate::quadrature::{integrate_adaptive, QuadratureError};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::f64::consts::PI;

/// One frequency atom: weight * cos(<xi, x> + phase).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FourierAtom {
    pub xi: Vec<f64>,
    pub weight: f64,
    pub phase: f64,
}

impl FourierAtom {
    pub fn new(xi: Vec<f64>, weight: f64, phase: f64) -> Result<Self, MeasureError> {
        if xi.is_empty() || xi.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::BadAtom {
                what: "frequency vector must be nonempty and finite".into(),
            });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(MeasureError::BadAtom {
                what: format!("weight must be positive and finite, got {weight}"),
            });
        }
        if !(-PI..=PI).contains(&phase) {
            return Err(MeasureError::BadAtom {
                what: format!("phase must lie in [-pi, pi], got {phase}"),
            });
        }
        Ok(Self { xi, weight, phase })
    }

    pub fn norm(&self) -> f64 {
        self.xi.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Density choice for the frequency measure.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum MeasureKind {
    /// Finite sum of weighted atoms.
    Atoms(Vec<FourierAtom>),
    /// Standard Gaussian N(0, I_d) as a frequency density, phases all zero.
    /// The target is then exp(-|x|^2 / 2).
    GaussianRadial,
}

/// A finite positive measure over frequencies, defining the target function.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FourierMeasure {
    dim: usize,
    kind: MeasureKind,
}

/// Parameters behind [`FourierMeasure::hard_instance`], kept around because
/// the lower-bound checks need the construction's frequency and decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardInstance {
    pub k_smooth: u32,
    pub radius: f64,
    pub big_l: u64,
}

impl HardInstance {
    /// Base frequency `2 pi L` of the oscillatory part.
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.big_l as f64
    }

    /// Weight decay exponent `1 / (2K)`.
    pub fn alpha(&self) -> f64 {
        0.5 / self.k_smooth as f64
    }
}

impl FourierMeasure {
    pub fn from_atoms(dim: usize, atoms: Vec<FourierAtom>) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::BadDimension { dim });
        }
        if atoms.is_empty() {
            return Err(MeasureError::BadAtom { what: "need at least one atom".into() });
        }
        for atom in &atoms {
            if atom.xi.len() != dim {
                return Err(MeasureError::BadAtom {
                    what: format!("atom has dimension {}, measure has {dim}", atom.xi.len()),
                });
            }
        }
        Ok(Self { dim, kind: MeasureKind::Atoms(atoms) })
    }

    /// Standard Gaussian frequency density on R^d.
    pub fn gaussian(dim: usize) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::BadDimension { dim });
        }
        Ok(Self { dim, kind: MeasureKind::GaussianRadial })
    }

    /// Scalar target `cos(freq * x)` with total mass `decay`.
    pub fn scaled_cosine(freq: f64, decay: f64) -> Result<Self, MeasureError> {
        Self::from_atoms(1, vec![FourierAtom::new(vec![freq], decay, 0.0)?])
    }

    /// Three-atom scalar measure that saturates the oscillation lower bound:
    /// a heavy constant part plus a symmetric pair at frequency
    /// `omega / r = 2 pi L / r`, with weights decaying like `omega^{-1/(2K)}`.
    pub fn hard_instance(k_smooth: u32, radius: f64, big_l: u64) -> Result<(Self, HardInstance), MeasureError> {
        if k_smooth == 0 || big_l == 0 || !(radius > 0.0 && radius.is_finite()) {
            return Err(MeasureError::BadAtom {
                what: format!(
                    "hard instance needs k >= 1, L >= 1, radius > 0; got k={k_smooth}, L={big_l}, r={radius}"
                ),
            });
        }
        let info = HardInstance { k_smooth, radius, big_l };
        let omega = info.omega();
        let a = info.alpha();
        let w = omega.powf(-a);
        let atoms = vec![
            FourierAtom::new(vec![0.0], 0.5 * w, 0.0)?,
            FourierAtom::new(vec![omega / radius], 0.25 * w, 0.0)?,
            FourierAtom::new(vec![-omega / radius], 0.25 * w, 0.0)?,
        ];
        Ok((Self::from_atoms(1, atoms)?, info))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Total mass `C^0 = mu(R^d)`.
    pub fn c0(&self) -> f64 {
        self.c_alpha(0.0)
    }

    /// Moment `C^alpha = int |xi|^alpha dmu(xi)`, closed form.
    ///
    /// For atoms this is a finite sum with the convention `0^0 = 1`. For the
    /// Gaussian the radial moment is `2^{alpha/2} Gamma((d+alpha)/2) / Gamma(d/2)`.
    pub fn c_alpha(&self, alpha: f64) -> f64 {
        match &self.kind {
            MeasureKind::Atoms(atoms) => atoms
                .iter()
                .map(|atom| {
                    let norm = atom.norm();
                    let factor = if alpha == 0.0 { 1.0 } else { norm.powf(alpha) };
                    atom.weight * factor
                })
                .sum(),
            MeasureKind::GaussianRadial => {
                let d = self.dim as f64;
                (0.5 * alpha * std::f64::consts::LN_2
                    + libm::lgamma(0.5 * (d + alpha))
                    - libm::lgamma(0.5 * d))
                .exp()
            }
        }
    }

    /// Moment `C^alpha` via adaptive radial quadrature, as an independent
    /// check on the closed form. For atoms the "quadrature" is the exact sum,
    /// evaluated through a different code path only to keep the interface
    /// uniform. For the Gaussian the normalization cancels in the ratio
    /// `int r^{d-1+alpha} e^{-r^2/2} dr / int r^{d-1} e^{-r^2/2} dr`,
    /// so no gamma function enters.
    pub fn c_alpha_numeric(&self, alpha: f64) -> Result<f64, QuadratureError> {
        match &self.kind {
            MeasureKind::Atoms(atoms) => Ok(atoms
                .iter()
                .map(|atom| {
                    let norm = atom.norm();
                    let factor = if alpha == 0.0 { 1.0 } else { norm.powf(alpha) };
                    atom.weight * factor
                })
                .sum()),
            MeasureKind::GaussianRadial => {
                let d = self.dim as f64;
                // The integrand decays like e^{-r^2/2}: truncating at
                // sqrt(d) + 40 leaves a tail far below the 1e-10 tolerance.
                let hi = d.sqrt() + 40.0;
                let num = integrate_adaptive(
                    |r: f64| r.powf(d - 1.0 + alpha) * (-0.5 * r * r).exp(),
                    0.0,
                    hi,
                    1e-12,
                )?;
                let den = integrate_adaptive(
                    |r: f64| r.powf(d - 1.0) * (-0.5 * r * r).exp(),
                    0.0,
                    hi,
                    1e-12,
                )?;
                Ok(num / den)
            }
        }
    }

    /// Evaluate the target function f at a point.
    pub fn target_eval(&self, x: &[f64]) -> Result<f64, MeasureError> {
        if x.len() != self.dim {
            return Err(MeasureError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        match &self.kind {
            MeasureKind::Atoms(atoms) => Ok(atoms
                .iter()
                .map(|atom| {
                    let dot: f64 = atom.xi.iter().zip(x).map(|(a, b)| a * b).sum();
                    atom.weight * (dot + atom.phase).cos()
                })
                .sum()),
            MeasureKind::GaussianRadial => {
                let sq: f64 = x.iter().map(|v| v * v).sum();
                Ok((-0.5 * sq).exp())
            }
        }
    }

    /// Draw a frequency from the normalized measure mu / C^0, returning the
    /// frequency vector and its phase.
    pub fn sample_xi<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        match &self.kind {
            MeasureKind::Atoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                let mut u = rng.gen::<f64>() * total;
                for atom in atoms {
                    if u < atom.weight {
                        return (atom.xi.clone(), atom.phase);
                    }
                    u -= atom.weight;
                }
                let last = atoms.last().expect("measure has at least one atom");
                (last.xi.clone(), last.phase)
            }
            MeasureKind::GaussianRadial => {
                // Radius^2 ~ chi^2_d = Gamma(d/2, scale 2); direction uniform
                // on the sphere from normalized Gaussians.
                let d = self.dim;
                let gamma = Gamma::new(0.5 * d as f64, 2.0).expect("valid chi-square shape");
                let radius = gamma.sample(rng).sqrt();
                loop {
                    let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        return (dir.iter().map(|v| v * radius / norm).collect(), 0.0);
                    }
                }
            }
        }
    }

    /// Largest frequency magnitude in the measure, when one exists.
    pub fn max_frequency(&self) -> Option<f64> {
        match &self.kind {
            MeasureKind::Atoms(atoms) => {
                atoms.iter().map(|a| a.norm()).max_by(f64::total_cmp)
            }
            MeasureKind::GaussianRadial => None,
        }
    }
}

/// Measure construction and evaluation failures.
#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("invalid atom: {what}")]
    BadAtom { what: String },
    #[error("measure dimension must be positive, got {dim}")]
    BadDimension { dim: usize },
    #[error("point has dimension {got}, measure expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}
