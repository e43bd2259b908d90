//! The JSON configuration surface. Parsing is strict: unknown keys are
//! rejected with the path to the offending key, and every physical
//! parameter is validated. Defaults reproduce the reference geometry:
//! 500 nm center wavelength, sigma_z = sigma_rho = 1000 lambda_c,
//! theta_c = 0.001 pi, a 50 x 50 sensor with 10 um pitch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{RenderParams, SensorGrid};
use crate::mask::PhaseMask;
use crate::states::{
    BesselGaussEnvelope, Sign, StateFamily, TwistedMode, TwoPhotonState,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    /// Center wavelength in meters.
    pub lambda_c: f64,
    pub sigma_z: f64,
    pub sigma_rho: f64,
    pub theta_c: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        let lambda_c = 500e-9;
        EnvelopeConfig {
            lambda_c,
            sigma_z: 1000.0 * lambda_c,
            sigma_rho: 1000.0 * lambda_c,
            theta_c: 0.001 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyConfig {
    ProductOpposite,
    ProductSame,
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl FamilyConfig {
    pub fn to_family(self) -> StateFamily {
        match self {
            FamilyConfig::ProductOpposite => StateFamily::ProductOpposite,
            FamilyConfig::ProductSame => StateFamily::ProductSame,
            FamilyConfig::PsiPlus => StateFamily::EntangledOpposite(Sign::Plus),
            FamilyConfig::PsiMinus => StateFamily::EntangledOpposite(Sign::Minus),
            FamilyConfig::PhiPlus => StateFamily::EntangledSame(Sign::Plus),
            FamilyConfig::PhiMinus => StateFamily::EntangledSame(Sign::Minus),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "product_opposite" => Ok(FamilyConfig::ProductOpposite),
            "product_same" => Ok(FamilyConfig::ProductSame),
            "psi_plus" => Ok(FamilyConfig::PsiPlus),
            "psi_minus" => Ok(FamilyConfig::PsiMinus),
            "phi_plus" => Ok(FamilyConfig::PhiPlus),
            "phi_minus" => Ok(FamilyConfig::PhiMinus),
            other => Err(Error::config(
                "state.family",
                format!(
                    "unknown family `{other}`; expected product_opposite, product_same, \
                     psi_plus, psi_minus, phi_plus, or phi_minus"
                ),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    pub family: FamilyConfig,
    pub m: i32,
    /// Relative arm delay in seconds.
    pub delay_tau: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            family: FamilyConfig::ProductOpposite,
            m: 1,
            delay_tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskConfig {
    None,
    Uniform {
        phase: f64,
    },
    Sector {
        fraction: f64,
        #[serde(default = "default_pi")]
        phase: f64,
    },
    Checkerboard {
        cell: f64,
        #[serde(default = "default_pi")]
        phase: f64,
        #[serde(default)]
        origin: [f64; 2],
    },
    Pgm {
        path: String,
        #[serde(default = "default_pi")]
        phi_max: f64,
        /// Physical pitch of one mask sample; defaults to the sensor pitch.
        #[serde(default)]
        pitch: Option<f64>,
    },
}

fn default_pi() -> f64 {
    std::f64::consts::PI
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig::Sector {
            fraction: 0.25,
            phase: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub pitch: f64,
    pub center: [f64; 2],
    pub subsamples: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            n_x: 50,
            n_y: 50,
            pitch: 10e-6,
            center: [0.0, 0.0],
            subsamples: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub n_rho: usize,
    pub n_phi: usize,
    /// Normalization window as a multiple of the sensor half-diagonal.
    pub window_factor: f64,
    /// Validity floor of the re-scaled signal.
    pub floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            n_rho: 256,
            n_phi: 256,
            window_factor: 1.5,
            floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub csv: bool,
    pub pgm: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".to_string(),
            csv: true,
            pgm: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub envelope: EnvelopeConfig,
    pub state: StateConfig,
    pub mask: MaskConfig,
    pub sensor: SensorConfig,
    pub quadrature: QuadratureConfig,
    pub output: OutputConfig,
}

/// Parses and validates a configuration document. Unknown keys and unit
/// violations fail with the path to the offending key.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SimulationConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        Error::config(path, e.inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.envelope;
        if e.lambda_c <= 0.0 || !e.lambda_c.is_finite() {
            return Err(Error::config("envelope.lambda_c", "must be positive"));
        }
        if e.sigma_z <= 0.0 || !e.sigma_z.is_finite() {
            return Err(Error::config("envelope.sigma_z", "must be positive"));
        }
        if e.sigma_rho <= 0.0 || !e.sigma_rho.is_finite() {
            return Err(Error::config("envelope.sigma_rho", "must be positive"));
        }
        if e.theta_c.is_nan() || e.theta_c <= 0.0 || e.theta_c >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::config("envelope.theta_c", "must lie in (0, pi/2)"));
        }
        if self.state.m.abs() > crate::states::MAX_OAM {
            return Err(Error::config(
                "state.m",
                format!("|m| must be <= {}", crate::states::MAX_OAM),
            ));
        }
        if !self.state.delay_tau.is_finite() {
            return Err(Error::config("state.delay_tau", "must be finite"));
        }
        match &self.mask {
            MaskConfig::Sector { fraction, phase } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::config("mask.fraction", "must lie in [0, 1]"));
                }
                if !phase.is_finite() {
                    return Err(Error::config("mask.phase", "must be finite"));
                }
            }
            MaskConfig::Checkerboard { cell, phase, .. } => {
                if *cell <= 0.0 || !cell.is_finite() {
                    return Err(Error::config("mask.cell", "must be positive"));
                }
                if !phase.is_finite() {
                    return Err(Error::config("mask.phase", "must be finite"));
                }
            }
            MaskConfig::Uniform { phase } => {
                if !phase.is_finite() {
                    return Err(Error::config("mask.phase", "must be finite"));
                }
            }
            MaskConfig::Pgm { phi_max, pitch, .. } => {
                if !phi_max.is_finite() {
                    return Err(Error::config("mask.phi_max", "must be finite"));
                }
                if let Some(p) = pitch {
                    if *p <= 0.0 || !p.is_finite() {
                        return Err(Error::config("mask.pitch", "must be positive"));
                    }
                }
            }
            MaskConfig::None => {}
        }
        let s = &self.sensor;
        if s.n_x == 0 || s.n_y == 0 {
            return Err(Error::config("sensor.n_x", "pixel counts must be >= 1"));
        }
        if s.pitch <= 0.0 || !s.pitch.is_finite() {
            return Err(Error::config("sensor.pitch", "must be positive"));
        }
        if s.subsamples == 0 {
            return Err(Error::config("sensor.subsamples", "must be >= 1"));
        }
        let q = &self.quadrature;
        if q.n_rho < 4 {
            return Err(Error::config("quadrature.n_rho", "must be >= 4"));
        }
        if q.n_phi < 4 || !q.n_phi.is_multiple_of(2) {
            return Err(Error::config("quadrature.n_phi", "must be even and >= 4"));
        }
        if q.window_factor <= 0.0 || !q.window_factor.is_finite() {
            return Err(Error::config("quadrature.window_factor", "must be positive"));
        }
        if q.floor <= 0.0 || !q.floor.is_finite() {
            return Err(Error::config("quadrature.floor", "must be positive"));
        }
        Ok(())
    }

    pub fn build_envelope(&self) -> Result<BesselGaussEnvelope> {
        BesselGaussEnvelope::from_wavelength(
            self.envelope.lambda_c,
            self.envelope.sigma_z,
            self.envelope.sigma_rho,
            self.envelope.theta_c,
        )
    }

    pub fn build_state(&self) -> Result<TwoPhotonState> {
        let mode = TwistedMode::new(self.build_envelope()?, self.state.m)?;
        TwoPhotonState::new(self.state.family.to_family(), mode, self.state.delay_tau)
    }

    pub fn build_sensor(&self) -> Result<SensorGrid> {
        SensorGrid::new(
            self.sensor.n_x,
            self.sensor.n_y,
            self.sensor.pitch,
            (self.sensor.center[0], self.sensor.center[1]),
            self.sensor.subsamples,
        )
    }

    pub fn render_params(&self) -> Result<RenderParams> {
        let grid = self.build_sensor()?;
        Ok(RenderParams {
            window: Some(self.quadrature.window_factor * grid.half_diagonal()),
            n_rho: self.quadrature.n_rho,
            n_phi: self.quadrature.n_phi,
            floor: self.quadrature.floor,
        })
    }

    /// Builds the mask; `base_dir` anchors relative PGM paths.
    pub fn build_mask(&self, base_dir: &std::path::Path) -> Result<Option<PhaseMask>> {
        match &self.mask {
            MaskConfig::None => Ok(None),
            MaskConfig::Uniform { phase } => Ok(Some(PhaseMask::uniform(*phase)?)),
            MaskConfig::Sector { fraction, phase } => {
                Ok(Some(PhaseMask::sector(*fraction, *phase)?))
            }
            MaskConfig::Checkerboard { cell, phase, origin } => Ok(Some(
                PhaseMask::checkerboard(*cell, *phase, (origin[0], origin[1]))?,
            )),
            MaskConfig::Pgm { path, phi_max, pitch } => {
                let full = if std::path::Path::new(path).is_absolute() {
                    std::path::PathBuf::from(path)
                } else {
                    base_dir.join(path)
                };
                let bytes = std::fs::read(&full)?;
                let img = crate::pnm::parse_pgm(&bytes)?;
                let pitch = pitch.unwrap_or(self.sensor.pitch);
                Ok(Some(crate::pnm::mask_from_pgm(
                    &img,
                    *phi_max,
                    pitch,
                    (self.sensor.center[0], self.sensor.center[1]),
                )?))
            }
        }
    }

    /// Deterministic pretty-printed echo of the effective configuration.
    pub fn echo(&self) -> String {
        // struct field order is stable, so this is byte-deterministic
        serde_json::to_string_pretty(self).expect("config serialization cannot fail") + "\n"
    }
}
