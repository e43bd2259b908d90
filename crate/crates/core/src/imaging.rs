//! Coincidence imaging with the masked product-state photon pair:
//! overlap integrals, output-port densities, bucket-coincidence images,
//! the re-scaled texture signal, SNR maps, the coherent-state
//! Mach-Zehnder baseline, and the encryption round trip.
//!
//! Per-pixel values are the pixel-integrated signal: the mean over an
//! s x s midpoint subsample grid times the pixel area. Evaluation order
//! is fixed, so renders are bit-identical regardless of parallelism.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mask::PhaseMask;
use crate::math::quadrature::AzimuthalGrid;
use crate::math::QuadratureRule;
use crate::states::{
    transverse_profile, StateFamily, TransverseProfile, TwistedMode, TwoPhotonState,
};

/// Pixel layout of the image sensor. Row 0 is the top row (largest y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorGrid {
    pub n_x: usize,
    pub n_y: usize,
    pub pitch: f64,
    pub center: (f64, f64),
    /// s: each pixel is integrated on an s x s midpoint grid.
    pub subsamples: usize,
}

impl SensorGrid {
    pub fn new(
        n_x: usize,
        n_y: usize,
        pitch: f64,
        center: (f64, f64),
        subsamples: usize,
    ) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::domain("sensor needs at least one pixel per axis".to_string()));
        }
        if pitch <= 0.0 || !pitch.is_finite() {
            return Err(Error::domain(format!("sensor pitch {pitch} must be positive")));
        }
        if subsamples == 0 {
            return Err(Error::domain("subsamples must be >= 1".to_string()));
        }
        Ok(SensorGrid {
            n_x,
            n_y,
            pitch,
            center,
            subsamples,
        })
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of pixel (ix, iy); iy counts rows from the top.
    pub fn pixel_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let x = self.center.0 + (ix as f64 - 0.5 * (self.n_x as f64 - 1.0)) * self.pitch;
        let y = self.center.1 + (0.5 * (self.n_y as f64 - 1.0) - iy as f64) * self.pitch;
        (x, y)
    }

    pub fn pixel_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    /// Half-extent (x, y) of the sensor footprint.
    pub fn half_extent(&self) -> (f64, f64) {
        (
            0.5 * self.n_x as f64 * self.pitch,
            0.5 * self.n_y as f64 * self.pitch,
        )
    }

    /// Distance from the sensor center to a corner.
    pub fn half_diagonal(&self) -> f64 {
        let (hx, hy) = self.half_extent();
        hx.hypot(hy)
    }

    /// Midpoint subsample offsets in pitch units, relative to the pixel center.
    fn subsample_offsets(&self) -> Vec<f64> {
        let s = self.subsamples;
        (0..s)
            .map(|a| (a as f64 + 0.5) / s as f64 - 0.5)
            .collect()
    }
}

/// What an image's values measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageUnits {
    /// Probability integrated over the pixel (and the full pulse).
    ProbabilityPerPixel,
    Dimensionless,
    Density,
}

impl ImageUnits {
    pub fn label(&self) -> &'static str {
        match self {
            ImageUnits::ProbabilityPerPixel => "probability-per-pixel",
            ImageUnits::Dimensionless => "dimensionless",
            ImageUnits::Density => "density",
        }
    }
}

/// Provenance carried by every rendered image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMeta {
    pub state: String,
    pub m: i32,
    pub mask: String,
    pub window: f64,
    pub floor: f64,
    pub i1: Complex64,
    pub i2: Complex64,
}

/// A real-valued field on the sensor grid. Invalid pixels (only the
/// re-scaled signal produces them) carry an explicit flag; their stored
/// value is zero and exports emit a sentinel token instead.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarImage {
    pub grid: SensorGrid,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub units: ImageUnits,
    pub meta: ImageMeta,
}

impl ScalarImage {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n_x + ix]
    }

    pub fn is_valid(&self, ix: usize, iy: usize) -> bool {
        self.valid[iy * self.grid.n_x + ix]
    }

    /// Largest valid value; zero for an all-invalid image.
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    /// Sum of valid values.
    pub fn total(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .sum()
    }
}

/// Overlap integrals of the mask phase against the reference photon's
/// normalized intensity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapIntegrals {
    pub i1: Complex64,
    pub i2: Complex64,
    pub window: f64,
    /// Change under doubling of both quadrature resolutions.
    pub quadrature_error: f64,
}

/// Engine knobs shared by the imaging operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    /// Normalization window; defaults to 1.5 x the sensor half-diagonal.
    pub window: Option<f64>,
    pub n_rho: usize,
    pub n_phi: usize,
    /// Validity floor of the re-scaled signal, as a fraction of the
    /// density maximum.
    pub floor: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            window: None,
            n_rho: 256,
            n_phi: 256,
            floor: 1e-3,
        }
    }
}

impl RenderParams {
    pub fn window_for(&self, grid: &SensorGrid) -> f64 {
        self.window.unwrap_or(1.5 * grid.half_diagonal())
    }
}

fn check_imaging_state(state: &TwoPhotonState) -> Result<()> {
    if state.family() != StateFamily::ProductOpposite {
        return Err(Error::Contract(format!(
            "imaging expects the product state with opposite OAM numbers, got {}",
            state.family().label()
        )));
    }
    if state.delay_tau() != 0.0 {
        return Err(Error::Contract(
            "imaging runs at matched optical paths (delay_tau = 0)".to_string(),
        ));
    }
    Ok(())
}

fn check_mask_coverage(mask: Option<&PhaseMask>, grid: &SensorGrid) -> Result<()> {
    if let Some(mask) = mask {
        if !mask.covers(grid.center, grid.half_extent()) {
            return Err(Error::Contract(
                "raster mask extent does not cover the sensor field of view".to_string(),
            ));
        }
    }
    Ok(())
}

/// I1 = int F_m e^{-i Phi(rho, phi)} and I2 = int F_m e^{-i Phi(rho, -phi)}
/// over the window disk, with the symmetric midpoint azimuthal grid.
pub fn overlap_integrals(
    mode: &TwistedMode,
    mask: &PhaseMask,
    window: f64,
    resolution: (usize, usize),
) -> Result<OverlapIntegrals> {
    overlap_integrals_on(mode, mask, window, resolution, 0.5)
}

/// [`overlap_integrals`] on a staggered azimuthal grid. Any stagger other
/// than 0.5 breaks the phi -> -phi symmetry of the node set, which is how
/// the discretization-robustness of the I1 = I2 identity gets probed.
pub fn overlap_integrals_on(
    mode: &TwistedMode,
    mask: &PhaseMask,
    window: f64,
    resolution: (usize, usize),
    stagger: f64,
) -> Result<OverlapIntegrals> {
    let coarse = overlap_pass(mode, mask, window, resolution, stagger)?;
    let fine = overlap_pass(
        mode,
        mask,
        window,
        (2 * resolution.0, 2 * resolution.1),
        stagger,
    )?;
    let quadrature_error = (fine.0 - coarse.0).norm().max((fine.1 - coarse.1).norm());
    Ok(OverlapIntegrals {
        i1: fine.0,
        i2: fine.1,
        window,
        quadrature_error,
    })
}

fn overlap_pass(
    mode: &TwistedMode,
    mask: &PhaseMask,
    window: f64,
    (n_rho, n_phi): (usize, usize),
    stagger: f64,
) -> Result<(Complex64, Complex64)> {
    if n_rho < 4 || n_phi < 4 || !n_phi.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "overlap quadrature ({n_rho}, {n_phi}) needs n_rho >= 4 and even n_phi >= 4"
        )));
    }
    let profile = transverse_profile(mode, window, 64)?;
    let rule = QuadratureRule::gauss_legendre(n_rho)?;
    let phi_grid = AzimuthalGrid { n_phi, stagger };
    let w_phi = phi_grid.weight();

    let mut i1 = Complex64::new(0.0, 0.0);
    let mut i2 = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let rho = 0.5 * (x + 1.0) * window;
        let f = profile.density(rho)?;
        if f == 0.0 {
            continue;
        }
        let ring_weight = f * rho * w * 0.5 * window * w_phi;
        let mut ring1 = Complex64::new(0.0, 0.0);
        let mut ring2 = Complex64::new(0.0, 0.0);
        for j in 0..n_phi {
            let phi = phi_grid.node(j);
            ring1 += Complex64::from_polar(1.0, -mask.phase_at_polar(rho, phi));
            ring2 += Complex64::from_polar(1.0, -mask.phase_at_polar(rho, -phi));
        }
        i1 += ring1 * ring_weight;
        i2 += ring2 * ring_weight;
    }
    Ok((i1, i2))
}

/// Shared setup of one imaging run: the normalized profile and the
/// overlap integrals for the active mask.
struct RenderContext {
    profile: TransverseProfile,
    i1: Complex64,
    i2: Complex64,
    meta: ImageMeta,
}

fn prepare(
    state: &TwoPhotonState,
    mask: Option<&PhaseMask>,
    grid: &SensorGrid,
    params: &RenderParams,
) -> Result<RenderContext> {
    check_imaging_state(state)?;
    check_mask_coverage(mask, grid)?;
    let window = params.window_for(grid);
    let profile = transverse_profile(state.mode(), window, 256)?;
    let (i1, i2) = match mask {
        Some(mask) => {
            let ov = overlap_integrals(state.mode(), mask, window, (params.n_rho, params.n_phi))?;
            (ov.i1, ov.i2)
        }
        None => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
    };
    Ok(RenderContext {
        profile,
        i1,
        i2,
        meta: ImageMeta {
            state: state.family().label().to_string(),
            m: state.m(),
            mask: mask.map_or_else(|| "none".to_string(), |m| m.label()),
            window,
            floor: params.floor,
            i1,
            i2,
        },
    })
}

/// Renders `field(x, y)` pixel-integrated on the sensor. The reduction
/// order inside each pixel is fixed and pixels are independent, so the
/// result does not depend on the thread count.
fn render_field<F>(grid: &SensorGrid, units: ImageUnits, meta: ImageMeta, field: F) -> Result<ScalarImage>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let offsets = grid.subsample_offsets();
    let area = grid.pixel_area();
    let n_x = grid.n_x;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| -> Result<f64> {
            let (ix, iy) = (idx % n_x, idx / n_x);
            let (cx, cy) = grid.pixel_center(ix, iy);
            let mut acc = 0.0;
            for dy in &offsets {
                let y = cy + dy * grid.pitch;
                for dx in &offsets {
                    let x = cx + dx * grid.pitch;
                    let v = field(x, y)?;
                    if !v.is_finite() {
                        return Err(Error::Evaluation(format!(
                            "non-finite field sample at ({x:.6e}, {y:.6e})"
                        )));
                    }
                    acc += v;
                }
            }
            Ok(acc / (offsets.len() * offsets.len()) as f64 * area)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalarImage {
        grid: *grid,
        valid: vec![true; values.len()],
        values,
        units,
        meta,
    })
}

/// Photon number density at output port d, pixel-integrated.
///
/// The full bracket 4 + [(I1 - I2) e^{i Phi} + c.c.] is evaluated, so the
/// destructive cancellation of the texture is a measured outcome of the
/// I1 = I2 identity rather than an assumption.
pub fn density_port_d(
    state: &TwoPhotonState,
    mask: Option<&PhaseMask>,
    grid: &SensorGrid,
    params: &RenderParams,
) -> Result<ScalarImage> {
    let ctx = prepare(state, mask, grid, params)?;
    let di = ctx.i1 - ctx.i2;
    let profile = &ctx.profile;
    render_field(grid, ImageUnits::ProbabilityPerPixel, ctx.meta.clone(), move |x, y| {
        let f = profile.density(x.hypot(y))?;
        let phi_mask = mask.map_or(0.0, |m| m.phase_at(x, y));
        let texture = (di * Complex64::from_polar(1.0, phi_mask)).re;
        Ok(0.25 * f * (4.0 + 2.0 * texture))
    })
}

/// Bucket-coincidence signal at port d: 1/4 F_m [2 - (I2 e^{i Phi} + c.c.)].
pub fn coincidence_port_d(
    state: &TwoPhotonState,
    mask: Option<&PhaseMask>,
    grid: &SensorGrid,
    params: &RenderParams,
) -> Result<ScalarImage> {
    let ctx = prepare(state, mask, grid, params)?;
    let i2 = ctx.i2;
    let profile = &ctx.profile;
    render_field(grid, ImageUnits::ProbabilityPerPixel, ctx.meta.clone(), move |x, y| {
        let f = profile.density(x.hypot(y))?;
        let phi_mask = mask.map_or(0.0, |m| m.phase_at(x, y));
        let fringe = (i2 * Complex64::from_polar(1.0, phi_mask)).re;
        Ok(0.25 * f * (2.0 - 2.0 * fringe))
    })
}

/// Bucket-coincidence signal at port c; the reversed image
/// 1/4 F_m [2 - (I1 e^{i Phi(rho, -phi)} + c.c.)].
pub fn coincidence_port_c(
    state: &TwoPhotonState,
    mask: Option<&PhaseMask>,
    grid: &SensorGrid,
    params: &RenderParams,
) -> Result<ScalarImage> {
    let ctx = prepare(state, mask, grid, params)?;
    let i1 = ctx.i1;
    let profile = &ctx.profile;
    render_field(grid, ImageUnits::ProbabilityPerPixel, ctx.meta.clone(), move |x, y| {
        let f = profile.density(x.hypot(y))?;
        // Phi(rho, -phi) is the mask sampled at the mirrored point.
        let phi_mask = mask.map_or(0.0, |m| m.phase_at(x, -y));
        let fringe = (i1 * Complex64::from_polar(1.0, phi_mask)).re;
        Ok(0.25 * f * (2.0 - 2.0 * fringe))
    })
}

/// Classical baseline: Mach-Zehnder interference of coherent pulses,
/// F_m(rho) cos^2(Phi / 2) pixel-integrated. The texture IS visible here.
pub fn mach_zehnder_density(
    mode: &TwistedMode,
    mask: &PhaseMask,
    grid: &SensorGrid,
    params: &RenderParams,
) -> Result<ScalarImage> {
    check_mask_coverage(Some(mask), grid)?;
    let window = params.window_for(grid);
    let profile = transverse_profile(mode, window, 256)?;
    let meta = ImageMeta {
        state: "coherent_mach_zehnder".to_string(),
        m: mode.m(),
        mask: mask.label(),
        window,
        floor: params.floor,
        i1: Complex64::new(1.0, 0.0),
        i2: Complex64::new(1.0, 0.0),
    };
    let profile_ref = &profile;
    render_field(grid, ImageUnits::ProbabilityPerPixel, meta, move |x, y| {
        let f = profile_ref.density(x.hypot(y))?;
        let c = (0.5 * mask.phase_at(x, y)).cos();
        Ok(f * c * c)
    })
}

/// The re-scaled signal S_d = (C_d - n_d/2) / (n_d/2) on pixels where the
/// density clears `floor x max(n_d)`; all other pixels are flagged invalid.
pub fn rescaled_signal(
    coincidence: &ScalarImage,
    density: &ScalarImage,
    floor: f64,
) -> Result<ScalarImage> {
    if floor.is_nan() || floor <= 0.0 {
        return Err(Error::domain(format!("floor {floor} must be positive")));
    }
    if coincidence.grid != density.grid {
        return Err(Error::Contract(
            "coincidence and density images live on different grids".to_string(),
        ));
    }
    if coincidence.meta.state != density.meta.state
        || coincidence.meta.mask != density.meta.mask
        || coincidence.meta.window != density.meta.window
        || coincidence.meta.m != density.meta.m
    {
        return Err(Error::Contract(
            "coincidence and density images come from different runs".to_string(),
        ));
    }
    let cutoff = floor * density.max_value();
    let mut values = Vec::with_capacity(density.values.len());
    let mut valid = Vec::with_capacity(density.values.len());
    for (&c, &n) in coincidence.values.iter().zip(&density.values) {
        if n >= cutoff && n > 0.0 {
            values.push((c - 0.5 * n) / (0.5 * n));
            valid.push(true);
        } else {
            values.push(0.0);
            valid.push(false);
        }
    }
    let mut meta = coincidence.meta.clone();
    meta.floor = floor;
    Ok(ScalarImage {
        grid: coincidence.grid,
        values,
        valid,
        units: ImageUnits::Dimensionless,
        meta,
    })
}

/// SNR of a coincidence pixel after n independent two-photon measurements:
/// sqrt(n) c / sqrt(c - c^2), using that the squared pixel operator has
/// the same mean as the operator itself.
pub fn snr_two_photon(coincidence_pixel_value: f64, n_measurements: u64) -> Result<f64> {
    if n_measurements == 0 {
        return Err(Error::domain("n_measurements must be >= 1".to_string()));
    }
    let c = coincidence_pixel_value;
    if !(0.0..1.0).contains(&c) {
        return Err(Error::domain(format!(
            "coincidence pixel value {c} must lie in [0, 1)"
        )));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok((n_measurements as f64).sqrt() * c / (c - c * c).sqrt())
}

/// Shot-noise-limited SNR of a coherent-state pixel: sqrt(mean count).
pub fn snr_coherent(mean_pixel_count: f64) -> Result<f64> {
    if mean_pixel_count.is_nan() || mean_pixel_count < 0.0 {
        return Err(Error::domain(format!(
            "mean pixel count {mean_pixel_count} must be non-negative"
        )));
    }
    Ok(mean_pixel_count.sqrt())
}

/// Per-pixel [`snr_two_photon`] over a coincidence image.
pub fn snr_map_two_photon(coincidence: &ScalarImage, n_measurements: u64) -> Result<ScalarImage> {
    let mut values = Vec::with_capacity(coincidence.values.len());
    for &c in &coincidence.values {
        // pixel-integration roundoff can leave a calibration-zero image at
        // tiny negative values; clamp those to the no-signal answer
        let c = c.max(0.0);
        values.push(snr_two_photon(c, n_measurements)?);
    }
    Ok(ScalarImage {
        grid: coincidence.grid,
        values,
        valid: coincidence.valid.clone(),
        units: ImageUnits::Dimensionless,
        meta: coincidence.meta.clone(),
    })
}

/// Per-pixel [`snr_coherent`] for a pulse of `photons` mean total photons
/// distributed over the given normalized image.
pub fn snr_map_coherent(image: &ScalarImage, photons: f64) -> Result<ScalarImage> {
    if photons.is_nan() || photons < 0.0 {
        return Err(Error::domain(format!("photon number {photons} must be non-negative")));
    }
    let mut values = Vec::with_capacity(image.values.len());
    for &v in &image.values {
        values.push(snr_coherent((v * photons).max(0.0))?);
    }
    Ok(ScalarImage {
        grid: image.grid,
        values,
        valid: image.valid.clone(),
        units: ImageUnits::Dimensionless,
        meta: image.meta.clone(),
    })
}

/// Pass/fail thresholds of the encryption round trip.
#[derive(Debug, Clone, Copy)]
pub struct RoundtripThresholds {
    /// Largest tolerated relative deviation of the masked density from the
    /// mask-free density.
    pub max_density_deviation: f64,
    /// Required bit-recovery accuracy on evaluated pixels.
    pub min_recovery_accuracy: f64,
    /// Pixels below this fraction of the density maximum are not scored.
    pub profile_floor: f64,
}

impl Default for RoundtripThresholds {
    fn default() -> Self {
        RoundtripThresholds {
            max_density_deviation: 1e-6,
            min_recovery_accuracy: 0.99,
            profile_floor: 0.01,
        }
    }
}

/// Outcome of one encode -> interfere -> decode cycle.
#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub density: ScalarImage,
    pub coincidence: ScalarImage,
    pub rescaled: ScalarImage,
    /// Source bitmap: true where the mask phase at the pixel center is pi.
    pub source_bits: Vec<bool>,
    /// Bits recovered by sign-thresholding the re-scaled signal.
    pub recovered_bits: Vec<bool>,
    /// Pixels scored for accuracy (bright enough and valid).
    pub evaluated: Vec<bool>,
    pub accuracy: f64,
    pub density_max_rel_deviation: f64,
    /// All source bits identical: nothing to recover.
    pub trivially_uniform: bool,
    /// |Re I2| too small for sign recovery (texture orthogonal to the
    /// profile weighting).
    pub degenerate_overlap: bool,
    pub i2: Complex64,
    pub passed: bool,
}

/// Runs the encryption round trip for a binary (0 / pi) mask: renders the
/// three images, checks that the density hides the texture, and recovers
/// the source bitmap from the sign of the re-scaled signal.
pub fn encryption_roundtrip(
    state: &TwoPhotonState,
    mask: &PhaseMask,
    grid: &SensorGrid,
    params: &RenderParams,
    thresholds: &RoundtripThresholds,
) -> Result<RoundtripReport> {
    check_imaging_state(state)?;

    // The scheme encodes one bit per region; demand a binary mask at
    // pixel centers.
    let mut source_bits = Vec::with_capacity(grid.len());
    for iy in 0..grid.n_y {
        for ix in 0..grid.n_x {
            let (x, y) = grid.pixel_center(ix, iy);
            let phase = mask.phase_at(x, y);
            let is_pi = (phase - std::f64::consts::PI).abs() < 1e-9;
            let is_zero = phase.abs() < 1e-9;
            if !is_pi && !is_zero {
                return Err(Error::domain(format!(
                    "encryption mask must be binary 0/pi at pixel centers; \
                     found {phase:.6} at pixel ({ix}, {iy})"
                )));
            }
            source_bits.push(is_pi);
        }
    }

    let density = density_port_d(state, Some(mask), grid, params)?;
    let density_clear = density_port_d(state, None, grid, params)?;
    let coincidence = coincidence_port_d(state, Some(mask), grid, params)?;
    let mut rescaled = rescaled_signal(&coincidence, &density, params.floor)?;
    rescaled.meta.mask = mask.label();

    let max_clear = density_clear.max_value();
    let density_max_rel_deviation = density
        .values
        .iter()
        .zip(&density_clear.values)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / max_clear;

    let i2 = density.meta.i2;
    let polarity = i2.re;
    let degenerate_overlap = polarity.abs() < 1e-9;
    let trivially_uniform = source_bits.iter().all(|&b| b) || source_bits.iter().all(|&b| !b);

    let mut recovered_bits = Vec::with_capacity(grid.len());
    let mut evaluated = Vec::with_capacity(grid.len());
    let mut scored = 0usize;
    let mut correct = 0usize;
    let bright = thresholds.profile_floor * max_clear;
    for ((&s, &ok), (&clear, &source)) in rescaled
        .values
        .iter()
        .zip(&rescaled.valid)
        .zip(density_clear.values.iter().zip(&source_bits))
    {
        let bit = !degenerate_overlap && s * polarity.signum() > 0.0;
        recovered_bits.push(bit);
        let score = ok && clear >= bright;
        evaluated.push(score);
        if score {
            scored += 1;
            if bit == source {
                correct += 1;
            }
        }
    }
    let accuracy = if scored == 0 {
        0.0
    } else {
        correct as f64 / scored as f64
    };

    let density_ok = density_max_rel_deviation <= thresholds.max_density_deviation;
    let recovery_ok = trivially_uniform
        || (!degenerate_overlap && accuracy >= thresholds.min_recovery_accuracy);
    Ok(RoundtripReport {
        density,
        coincidence,
        rescaled,
        source_bits,
        recovered_bits,
        evaluated,
        accuracy,
        density_max_rel_deviation,
        trivially_uniform,
        degenerate_overlap,
        i2,
        passed: density_ok && recovery_ok,
    })
}
