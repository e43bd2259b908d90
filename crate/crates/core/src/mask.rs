//! Phase masks: the spatially varying phase the object imprints on the
//! path-A photon. Evaluation is deterministic; raster masks interpolate
//! bilinearly in Cartesian coordinates and are zero outside their extent.

use crate::error::{Error, Result};

/// Default grayscale-to-phase scale: value 255 maps to pi.
pub const DEFAULT_PHI_MAX: f64 = std::f64::consts::PI;

/// A rasterized phase texture with physical pitch and center.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    width: usize,
    height: usize,
    /// Row-major phases, row 0 at the top (largest y).
    phases: Vec<f64>,
    pitch: f64,
    center: (f64, f64),
}

impl RasterMask {
    pub fn new(
        width: usize,
        height: usize,
        phases: Vec<f64>,
        pitch: f64,
        center: (f64, f64),
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain("raster mask dimensions must be non-zero".to_string()));
        }
        if phases.len() != width * height {
            return Err(Error::domain(format!(
                "raster mask has {} phases for {}x{} cells",
                phases.len(),
                width,
                height
            )));
        }
        if pitch <= 0.0 || !pitch.is_finite() {
            return Err(Error::domain(format!("raster pitch {pitch} must be positive")));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("raster mask contains non-finite phases".to_string()));
        }
        Ok(RasterMask {
            width,
            height,
            phases,
            pitch,
            center,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Physical half-extent (half-width, half-height) of the raster footprint.
    pub fn half_extent(&self) -> (f64, f64) {
        (
            0.5 * self.width as f64 * self.pitch,
            0.5 * self.height as f64 * self.pitch,
        )
    }

    pub fn phase_at(&self, x: f64, y: f64) -> f64 {
        let (hx, hy) = self.half_extent();
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        if dx.abs() >= hx || dy.abs() >= hy {
            return 0.0;
        }
        // Fractional sample coordinates; sample (i, j) sits at
        // x = center + (i - (w-1)/2) pitch, y = center + ((h-1)/2 - j) pitch.
        let fi = dx / self.pitch + 0.5 * (self.width as f64 - 1.0);
        let fj = 0.5 * (self.height as f64 - 1.0) - dy / self.pitch;
        // Clamp to the sample hull: the half-pixel border continues the
        // edge values out to the footprint boundary.
        let fi = fi.clamp(0.0, self.width as f64 - 1.0);
        let fj = fj.clamp(0.0, self.height as f64 - 1.0);
        let i0 = (fi.floor() as usize).min(self.width - 1);
        let j0 = (fj.floor() as usize).min(self.height - 1);
        let i1 = (i0 + 1).min(self.width - 1);
        let j1 = (j0 + 1).min(self.height - 1);
        let tx = fi - i0 as f64;
        let ty = fj - j0 as f64;
        let p00 = self.phases[j0 * self.width + i0];
        let p10 = self.phases[j0 * self.width + i1];
        let p01 = self.phases[j1 * self.width + i0];
        let p11 = self.phases[j1 * self.width + i1];
        (p00 * (1.0 - tx) + p10 * tx) * (1.0 - ty) + (p01 * (1.0 - tx) + p11 * tx) * ty
    }
}

/// The object texture Phi(x, y).
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseMask {
    /// Constant phase everywhere.
    Uniform { phase: f64 },
    /// `phase` on the azimuthal wedge phi in [0, 2 pi fraction), zero
    /// elsewhere.
    Sector { fraction: f64, phase: f64 },
    /// Checkerboard of square cells with side `cell`; cells with odd
    /// floor-index parity carry `phase`.
    Checkerboard {
        cell: f64,
        phase: f64,
        origin: (f64, f64),
    },
    Raster(RasterMask),
}

impl PhaseMask {
    pub fn uniform(phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::domain("uniform mask phase must be finite".to_string()));
        }
        Ok(PhaseMask::Uniform { phase })
    }

    pub fn sector(fraction: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::domain(format!(
                "sector fraction {fraction} must lie in [0, 1]"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::domain("sector phase must be finite".to_string()));
        }
        Ok(PhaseMask::Sector { fraction, phase })
    }

    pub fn checkerboard(cell: f64, phase: f64, origin: (f64, f64)) -> Result<Self> {
        if cell <= 0.0 || !cell.is_finite() {
            return Err(Error::domain(format!("checkerboard cell {cell} must be positive")));
        }
        if !phase.is_finite() {
            return Err(Error::domain("checkerboard phase must be finite".to_string()));
        }
        Ok(PhaseMask::Checkerboard { cell, phase, origin })
    }

    pub fn label(&self) -> String {
        match self {
            PhaseMask::Uniform { phase } => format!("uniform(phase={phase:.6})"),
            PhaseMask::Sector { fraction, phase } => {
                format!("sector(fraction={fraction:.6},phase={phase:.6})")
            }
            PhaseMask::Checkerboard { cell, phase, origin } => format!(
                "checkerboard(cell={cell:.6e},phase={phase:.6},origin=({:.6e},{:.6e}))",
                origin.0, origin.1
            ),
            PhaseMask::Raster(r) => format!(
                "raster({}x{},pitch={:.6e})",
                r.width(),
                r.height(),
                r.pitch()
            ),
        }
    }

    /// Phi at the Cartesian point (x, y).
    pub fn phase_at(&self, x: f64, y: f64) -> f64 {
        match self {
            PhaseMask::Uniform { phase } => *phase,
            PhaseMask::Sector { fraction, phase } => {
                let phi = y.atan2(x).rem_euclid(std::f64::consts::TAU);
                if phi < std::f64::consts::TAU * fraction {
                    *phase
                } else {
                    0.0
                }
            }
            PhaseMask::Checkerboard { cell, phase, origin } => {
                let i = ((x - origin.0) / cell).floor() as i64;
                let j = ((y - origin.1) / cell).floor() as i64;
                if (i + j).rem_euclid(2) == 1 {
                    *phase
                } else {
                    0.0
                }
            }
            PhaseMask::Raster(raster) => raster.phase_at(x, y),
        }
    }

    /// Phi evaluated in cylindrical coordinates.
    pub fn phase_at_polar(&self, rho: f64, phi: f64) -> f64 {
        self.phase_at(rho * phi.cos(), rho * phi.sin())
    }

    /// True when the raster footprint covers the rectangle
    /// [cx - hx, cx + hx] x [cy - hy, cy + hy]; analytic masks cover
    /// everything.
    pub fn covers(&self, center: (f64, f64), half_extent: (f64, f64)) -> bool {
        match self {
            PhaseMask::Raster(r) => {
                let (hx, hy) = r.half_extent();
                let (cx, cy) = r.center();
                cx - hx <= center.0 - half_extent.0
                    && cx + hx >= center.0 + half_extent.0
                    && cy - hy <= center.1 - half_extent.1
                    && cy + hy >= center.1 + half_extent.1
            }
            _ => true,
        }
    }
}
