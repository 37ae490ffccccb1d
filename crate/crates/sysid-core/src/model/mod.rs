//! Small-signal admittance models.
//!
//! A model maps two real input channels to two real output channels through a
//! 2x2 complex admittance matrix `Y(j Omega, theta)`. The inference stack is
//! channel-agnostic: each model declares what its channels mean and the rest
//! of the workspace only sees the matrix.
//!
//! The derivations behind both models live in `docs/models.md`.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

mod generator;
mod motor;

pub use generator::{gen_admittance, gen_steady_state, GenOperatingPoint, GenParams, GeneratorModel};
pub use motor::{motor_admittance, motor_steady_state, MotorModel, MotorParams};

/// One evaluation of the 2x2 admittance matrix at a single frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmittanceEval {
    pub y11: Complex64,
    pub y12: Complex64,
    pub y21: Complex64,
    pub y22: Complex64,
}

impl AdmittanceEval {
    /// Matrix-vector product with a complex 2-vector.
    pub fn mul(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.y11 * v[0] + self.y12 * v[1], self.y21 * v[0] + self.y22 * v[1]]
    }

    pub fn conj(&self) -> Self {
        AdmittanceEval {
            y11: self.y11.conj(),
            y12: self.y12.conj(),
            y21: self.y21.conj(),
            y22: self.y22.conj(),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.y11, self.y12, self.y21, self.y22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    /// No valid operating point or parameter set (reason in the payload).
    Infeasible { reason: &'static str },
    /// The transfer function has a pole at (or numerically at) this frequency.
    SingularFrequency { omega: f64 },
    /// Parameter slice has the wrong length for this model.
    Dimension { expected: usize, got: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Infeasible { reason } => write!(f, "infeasible: {reason}"),
            ModelError::SingularFrequency { omega } => {
                write!(f, "admittance singular at omega = {omega} rad/s")
            }
            ModelError::Dimension { expected, got } => {
                write!(f, "expected {expected} parameters, got {got}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// A parametric 2x2 admittance model with named uncertain parameters.
///
/// `theta` is always ordered as [`param_names`](Self::param_names). Boundary
/// data that the identification treats as known (operating-point inputs,
/// nominal frequency) is carried by the implementing struct, not by `theta`.
pub trait AdmittanceModel: Send + Sync {
    fn param_names(&self) -> &'static [&'static str];

    /// What the two input channels are, e.g. `["V", "theta"]`.
    fn input_labels(&self) -> [&'static str; 2];

    /// What the two output channels are, e.g. `["I", "phi"]`.
    fn output_labels(&self) -> [&'static str; 2];

    fn admittance(&self, theta: &[f64], omega: f64) -> Result<AdmittanceEval, ModelError>;

    /// Evaluates the whole grid for one `theta`. Implementations override
    /// this to hoist the steady-state solve out of the per-bin loop.
    fn admittance_grid(
        &self,
        theta: &[f64],
        omegas: &[f64],
    ) -> Result<Vec<AdmittanceEval>, ModelError> {
        omegas.iter().map(|&w| self.admittance(theta, w)).collect()
    }
}
