//! Fixed-step time-domain integration of the coupled-amplitude equations.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::CoupledModeSystem;

/// Fraction of the inverse largest matrix entry allowed as the step size.
const STABILITY_FRACTION: f64 = 0.1;

/// Sampled trajectory of the intracavity signal/idler amplitudes. State `i`
/// is at `i * step` roundtrips; the final entry is the state at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Step size in roundtrips.
    pub step: f64,
    /// States `(C, D)` at each step, including the initial state.
    pub states: Vec<(Complex64, Complex64)>,
}

impl Trajectory {
    pub fn terminal(&self) -> (Complex64, Complex64) {
        *self
            .states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Integrate `d/dt [C; D] = M [C; D] + K u` with classical fixed-step RK4,
/// time measured in roundtrips.
///
/// The system is linear and non-stiff at the loss scales of interest; a
/// fixed step keeps runs bit-reproducible. Steps larger than
/// `0.1 / max|M_ij|` are rejected as a stability guard.
pub fn integrate_dynamics(
    system: &CoupledModeSystem,
    inputs: (Complex64, Complex64),
    initial: (Complex64, Complex64),
    horizon_roundtrips: f64,
    step_roundtrips: f64,
) -> Result<Trajectory> {
    if !(step_roundtrips.is_finite() && step_roundtrips > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive and finite, got {step_roundtrips}"
        )));
    }
    if !(horizon_roundtrips.is_finite() && horizon_roundtrips >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be nonnegative and finite, got {horizon_roundtrips}"
        )));
    }
    let scale = system.max_entry();
    if scale > 0.0 {
        let limit = STABILITY_FRACTION / scale;
        if step_roundtrips > limit {
            return Err(Error::StepTooLarge {
                step: step_roundtrips,
                limit,
            });
        }
    }

    let m = system.evolution_matrix();
    let k = system.input_coupling();
    let drive = (k[0] * inputs.0, k[1] * inputs.1);
    let rhs = |x: (Complex64, Complex64)| {
        (
            m[0][0] * x.0 + m[0][1] * x.1 + drive.0,
            m[1][0] * x.0 + m[1][1] * x.1 + drive.1,
        )
    };

    let n_steps = (horizon_roundtrips / step_roundtrips).ceil() as usize;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial);
    let mut x = initial;
    let h = step_roundtrips;
    for _ in 0..n_steps {
        let k1 = rhs(x);
        let k2 = rhs((x.0 + 0.5 * h * k1.0, x.1 + 0.5 * h * k1.1));
        let k3 = rhs((x.0 + 0.5 * h * k2.0, x.1 + 0.5 * h * k2.1));
        let k4 = rhs((x.0 + h * k3.0, x.1 + h * k3.1));
        x = (
            x.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            x.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        states.push(x);
    }
    Ok(Trajectory {
        step: step_roundtrips,
        states,
    })
}
