//! Four-mode coupled-amplitude model of a dual-pump microring frequency
//! converter.
//!
//! Two strong undepleted pumps `A`, `B` couple the intracavity signal `C`
//! and idler `D` through the Kerr nonlinearity. In roundtrip-normalized
//! time the amplitudes obey
//!
//! ```text
//! t_R d/dt [C; D] = M [C; D] + K [C_in; D_in]
//! ```
//!
//! with a 2x2 complex evolution matrix `M` and a diagonal input coupling
//! `K = diag(sqrt(theta_C), sqrt(theta_D))`.
//!
//! Normalization: field amplitudes carry units of sqrt(W) so `|A|^2` is an
//! intracavity power in watts; `alpha` and `theta` are dimensionless
//! per-roundtrip power fractions (`alpha` corresponds to the loaded
//! linewidth); detunings are dimensionless roundtrip phases
//! `(omega_res - omega) * t_R`; the nonlinear parameter `gamma` is in
//! 1/(W m), so `gamma * L * |A|^2` is a per-roundtrip phase.

mod dynamics;
mod efficiency;

pub use dynamics::{integrate_dynamics, Trajectory};
pub use efficiency::{
    cooperativity, loaded_linewidth_hz, loss_to_q, max_efficiency, optimal_detunings, pump_buildup,
    q_to_loss, transfer_efficiency, ConversionResult, Regime, BOUNDARY_TOLERANCE,
};

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::units::SPEED_OF_LIGHT;

/// Relative tolerance below which `det(M)` is treated as singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-14;

/// Ring circumference and roundtrip time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorGeometry {
    circumference_m: f64,
    roundtrip_time_s: f64,
}

impl ResonatorGeometry {
    /// Build from circumference (m) and roundtrip time (s).
    pub fn new(circumference_m: f64, roundtrip_time_s: f64) -> Result<Self> {
        ensure_finite(circumference_m, "circumference")?;
        ensure_finite(roundtrip_time_s, "roundtrip time")?;
        if circumference_m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "circumference must be positive, got {circumference_m}"
            )));
        }
        if roundtrip_time_s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "roundtrip time must be positive, got {roundtrip_time_s}"
            )));
        }
        Ok(Self {
            circumference_m,
            roundtrip_time_s,
        })
    }

    /// Build from circumference (m) and group index; `t_R = n_g L / c`.
    pub fn from_group_index(circumference_m: f64, group_index: f64) -> Result<Self> {
        ensure_finite(group_index, "group index")?;
        if group_index <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "group index must be positive, got {group_index}"
            )));
        }
        Self::new(
            circumference_m,
            group_index * circumference_m / SPEED_OF_LIGHT,
        )
    }

    pub fn circumference_m(&self) -> f64 {
        self.circumference_m
    }

    pub fn roundtrip_time_s(&self) -> f64 {
        self.roundtrip_time_s
    }

    /// Group index implied by the stored circumference and roundtrip time.
    pub fn group_index(&self) -> f64 {
        self.roundtrip_time_s * SPEED_OF_LIGHT / self.circumference_m
    }

    /// Free spectral range (Hz).
    pub fn fsr_hz(&self) -> f64 {
        1.0 / self.roundtrip_time_s
    }
}

/// Per-resonance linear and nonlinear parameters of one cavity mode.
///
/// `total_loss` is the per-roundtrip power loss fraction (loaded linewidth);
/// `coupling` the per-roundtrip bus coupling fraction. Overcoupling means
/// `coupling > total_loss / 2`; the only hard constraints are
/// `0 <= coupling <= total_loss <= 1`. Decoupled (`coupling = 0`) and linear
/// (`nonlinearity = 0`) limits are valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Vacuum wavelength (m).
    pub wavelength_m: f64,
    /// Total per-roundtrip power loss fraction `alpha`.
    pub total_loss: f64,
    /// Per-roundtrip bus power coupling fraction `theta`.
    pub coupling: f64,
    /// Nonlinear parameter `gamma` (1/(W m)).
    pub nonlinearity: f64,
}

impl ModeParams {
    pub fn new(
        wavelength_m: f64,
        total_loss: f64,
        coupling: f64,
        nonlinearity: f64,
    ) -> Result<Self> {
        ensure_finite(wavelength_m, "wavelength")?;
        ensure_finite(total_loss, "total loss")?;
        ensure_finite(coupling, "coupling")?;
        ensure_finite(nonlinearity, "nonlinearity")?;
        if wavelength_m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength_m}"
            )));
        }
        if !(0.0..=1.0).contains(&total_loss) {
            return Err(Error::InvalidParameter(format!(
                "total loss must lie in [0, 1], got {total_loss}"
            )));
        }
        if coupling < 0.0 || coupling > total_loss {
            return Err(Error::InvalidParameter(format!(
                "coupling must lie in [0, total_loss = {total_loss}], got {coupling}"
            )));
        }
        if nonlinearity < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity must be nonnegative, got {nonlinearity}"
            )));
        }
        Ok(Self {
            wavelength_m,
            total_loss,
            coupling,
            nonlinearity,
        })
    }

    /// Coupling-to-loss ratio `theta / alpha`; 1/2 is critical coupling.
    pub fn coupling_ratio(&self) -> f64 {
        self.coupling / self.total_loss
    }
}

/// Intracavity state of one pump: complex amplitude (sqrt(W)) and detuning
/// (dimensionless roundtrip phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpState {
    pub amplitude: Complex64,
    pub detuning: f64,
}

impl PumpState {
    pub fn new(amplitude: Complex64, detuning: f64) -> Result<Self> {
        if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pump amplitude must be finite, got {amplitude}"
            )));
        }
        ensure_finite(detuning, "pump detuning")?;
        Ok(Self {
            amplitude,
            detuning,
        })
    }

    /// Real-amplitude pump from an intracavity power (W).
    pub fn from_power(power_w: f64, detuning: f64) -> Result<Self> {
        ensure_finite(power_w, "pump power")?;
        if power_w < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pump power must be nonnegative, got {power_w}"
            )));
        }
        Self::new(Complex64::new(power_w.sqrt(), 0.0), detuning)
    }

    /// Intracavity power `|A|^2` (W).
    pub fn power_w(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Signal/idler field record: intracavity amplitudes, bus-waveguide inputs
/// and outputs, and the mode detunings (all amplitudes in sqrt(W)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalIdlerState {
    pub intracavity: (Complex64, Complex64),
    pub input: (Complex64, Complex64),
    pub output: (Complex64, Complex64),
    pub detunings: (f64, f64),
}

/// Eigenvalues of the evolution matrix and the derived splitting measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenAnalysis {
    /// Eigenvalues of `M`, sorted by (real, imaginary) part.
    pub eigenvalues: [Complex64; 2],
    /// Raw modulus `|lambda_1 - lambda_2|`. Nonzero for any finite pumping.
    pub splitting: f64,
    /// Separation of the two response extrema seen when signal and idler are
    /// scanned together: `sqrt(max(0, splitting^2 - (Re(lambda_1 + lambda_2))^2))`.
    /// Zero while the nonlinear splitting is unresolved against the loaded
    /// linewidth; in the matched-parameter limit it turns on exactly at
    /// cooperativity 1 and equals `alpha * sqrt(C - 1)` above it.
    pub resolved_splitting: f64,
}

/// The linear evolution system for the signal/idler pair: evolution matrix
/// `M` (units of inverse roundtrips) and input coupling `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledModeSystem {
    m: [[Complex64; 2]; 2],
    k: [f64; 2],
    detunings: (f64, f64),
}

impl CoupledModeSystem {
    /// Build the system for given signal/idler modes, geometry, pump states,
    /// and signal/idler detunings.
    ///
    /// The diagonal of `M` is `-alpha/2 - i*Delta + 2i*gamma*L*(|A|^2+|B|^2)`
    /// (loss, detuning, cross-phase-modulation shift); the off-diagonals are
    /// the pump-mediated couplings `2i*gamma_C*L*A*conj(B)` and
    /// `2i*gamma_D*L*conj(A)*B`.
    pub fn build(
        signal: &ModeParams,
        idler: &ModeParams,
        geometry: &ResonatorGeometry,
        pumps: &[PumpState; 2],
        detunings: (f64, f64),
    ) -> Result<Self> {
        ensure_finite(detunings.0, "signal detuning")?;
        ensure_finite(detunings.1, "idler detuning")?;
        let l = geometry.circumference_m();
        let a = pumps[0].amplitude;
        let b = pumps[1].amplitude;
        let pump_power = a.norm_sqr() + b.norm_sqr();
        let i = Complex64::I;

        let diag = |mode: &ModeParams, detuning: f64| {
            Complex64::new(-mode.total_loss / 2.0, 0.0) - i * detuning
                + i * 2.0 * mode.nonlinearity * l * pump_power
        };
        let m = [
            [
                diag(signal, detunings.0),
                i * 2.0 * signal.nonlinearity * l * a * b.conj(),
            ],
            [
                i * 2.0 * idler.nonlinearity * l * a.conj() * b,
                diag(idler, detunings.1),
            ],
        ];
        Ok(Self {
            m,
            k: [signal.coupling.sqrt(), idler.coupling.sqrt()],
            detunings,
        })
    }

    /// Evolution matrix `M`.
    pub fn evolution_matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    /// Diagonal entries of `K`, i.e. `(sqrt(theta_C), sqrt(theta_D))`.
    pub fn input_coupling(&self) -> [f64; 2] {
        self.k
    }

    /// Signal/idler detunings the system was built with.
    pub fn detunings(&self) -> (f64, f64) {
        self.detunings
    }

    /// Determinant of `M`.
    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entry modulus of `M`; scale reference for singularity and
    /// stability checks.
    pub fn max_entry(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn check_singular(&self) -> Result<Complex64> {
        let det = self.det();
        let scale = self.max_entry();
        if det.norm() <= SINGULARITY_TOLERANCE * scale * scale {
            return Err(Error::SingularSystem {
                det_magnitude: det.norm(),
            });
        }
        Ok(det)
    }

    /// Steady-state intracavity amplitudes `-M^{-1} K [C_in; D_in]`.
    pub fn steady_state(&self, inputs: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
        let det = self.check_singular()?;
        let (u0, u1) = (self.k[0] * inputs.0, self.k[1] * inputs.1);
        // -M^{-1} = -1/det [[m11, -m01], [-m10, m00]]
        let c = -(self.m[1][1] * u0 - self.m[0][1] * u1) / det;
        let d = -(-self.m[1][0] * u0 + self.m[0][0] * u1) / det;
        Ok((c, d))
    }

    /// Bus-waveguide outputs from the beamsplitter relation
    /// `out = K x - sqrt(1 - K^2) u`.
    ///
    /// This is the first-order coupler linearization: with zero intrinsic
    /// loss the scattering is flux-conserving only to O(theta); the exact
    /// all-pass relation replaces `sqrt(1 - K^2)` by the identity.
    pub fn output_fields(
        &self,
        intracavity: (Complex64, Complex64),
        inputs: (Complex64, Complex64),
    ) -> (Complex64, Complex64) {
        let t0 = (1.0 - self.k[0] * self.k[0]).max(0.0).sqrt();
        let t1 = (1.0 - self.k[1] * self.k[1]).max(0.0).sqrt();
        (
            self.k[0] * intracavity.0 - t0 * inputs.0,
            self.k[1] * intracavity.1 - t1 * inputs.1,
        )
    }

    /// Steady state and outputs for given bus inputs, bundled.
    pub fn solve_steady(&self, inputs: (Complex64, Complex64)) -> Result<SignalIdlerState> {
        let x = self.steady_state(inputs)?;
        let output = self.output_fields(x, inputs);
        Ok(SignalIdlerState {
            intracavity: x,
            input: inputs,
            output,
            detunings: self.detunings,
        })
    }

    /// Eigenvalues of `M` and the derived splitting measures.
    pub fn eigen(&self) -> EigenAnalysis {
        let tr = self.m[0][0] + self.m[1][1];
        let disc = (tr * tr - 4.0 * self.det()).sqrt();
        let mut vals = [(tr - disc) / 2.0, (tr + disc) / 2.0];
        if (vals[0].re, vals[0].im) > (vals[1].re, vals[1].im) {
            vals.swap(0, 1);
        }
        let splitting = (vals[0] - vals[1]).norm();
        let mean_linewidth = tr.re; // both diagonal real parts are -alpha/2
        let resolved = (splitting * splitting - mean_linewidth * mean_linewidth)
            .max(0.0)
            .sqrt();
        EigenAnalysis {
            eigenvalues: vals,
            splitting,
            resolved_splitting: resolved,
        }
    }
}

/// Eigenvalue analysis of a coupled-mode system; see
/// [`CoupledModeSystem::eigen`].
pub fn eigen_analysis(system: &CoupledModeSystem) -> EigenAnalysis {
    system.eigen()
}
