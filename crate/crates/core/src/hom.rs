//! Bunching and coincidence probabilities at the 50:50 beam splitter,
//! from the closed-form case table and from k-space quadrature.
//!
//! For every family in scope the azimuthal integrals of the general
//! P_cc / P_dd / P_cd expressions collapse to Kronecker deltas between
//! OAM indices, leaving a single radial overlap
//!
//!   g(tau) = int dk_z rho_k drho_k |eta|^2 exp(-i omega tau) / norm,
//!
//! with the exact dispersion omega = c sqrt(k_z^2 + rho_k^2). The reduced
//! engine integrates only that; a full per-photon (k_z, rho_k, phi_k)
//! discretization is retained at low resolution as a cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mask::PhaseMask;
use crate::math::{AzimuthalGrid, QuadratureRule};
use crate::states::{
    saf_envelope, Sign, StateFamily, TransverseProfile, TwoPhotonState,
    SPEED_OF_LIGHT,
};

/// How a probability triple was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Numeric,
}

/// The (p_cc, p_dd, p_cd) triple for one input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomProbabilities {
    pub p_cc: f64,
    pub p_dd: f64,
    pub p_cd: f64,
    pub method: Method,
    /// Richardson estimate from doubling the grid; zero for analytic values.
    pub quadrature_error: f64,
}

impl HomProbabilities {
    pub fn conservation_defect(&self) -> f64 {
        (self.p_cc + self.p_dd + self.p_cd - 1.0).abs()
    }

    /// False when the Richardson estimate exceeds 1e-2.
    pub fn is_converged(&self) -> bool {
        self.quadrature_error <= 1e-2
    }
}

/// Resolution of the k-space discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KSpaceGrid {
    pub n_z: usize,
    pub n_rho: usize,
    /// Azimuthal nodes per photon; only the full 3-D cross-check uses it.
    pub n_phi: usize,
}

impl Default for KSpaceGrid {
    fn default() -> Self {
        KSpaceGrid {
            n_z: 128,
            n_rho: 128,
            n_phi: 16,
        }
    }
}

impl KSpaceGrid {
    fn validate(&self) -> Result<()> {
        if self.n_z < 16 || self.n_rho < 16 || self.n_phi < 16 {
            return Err(Error::domain(format!(
                "k-space grid {}x{}x{} needs at least 16 nodes per dimension",
                self.n_z, self.n_rho, self.n_phi
            )));
        }
        if !self.n_phi.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "k-space n_phi {} must be even so the grid maps onto itself under reflection",
                self.n_phi
            )));
        }
        Ok(())
    }
}

fn null_state_error(state: &TwoPhotonState) -> Error {
    Error::domain(format!(
        "state {} with m = 0 is the null vector (the superposition bracket vanishes); \
         no probabilities exist for it",
        state.family().label()
    ))
}

/// The case table at zero delay: ProductOpposite (1/2, 1/2, 0);
/// ProductSame ((1+d)/4, (1+d)/4, (1-d)/2) with d = delta_{m,0};
/// Psi_m^+- (1/2, 1/2, 0); Phi_m^+ (1/2, 1/2, 0); Phi_m^- (0, 0, 1).
pub fn hom_probabilities_analytic(state: &TwoPhotonState) -> Result<HomProbabilities> {
    if state.delay_tau() != 0.0 {
        return Err(Error::domain(format!(
            "analytic case values hold at zero delay only (got tau = {:.3e}); \
             use hom_probabilities_numeric for delay scans",
            state.delay_tau()
        )));
    }
    let delta = if state.m() == 0 { 1.0 } else { 0.0 };
    let (p_cc, p_dd, p_cd) = match state.family() {
        StateFamily::ProductOpposite => (0.5, 0.5, 0.0),
        StateFamily::ProductSame => ((1.0 + delta) / 4.0, (1.0 + delta) / 4.0, (1.0 - delta) / 2.0),
        StateFamily::EntangledOpposite(_) => (0.5, 0.5, 0.0),
        StateFamily::EntangledSame(Sign::Plus) => (0.5, 0.5, 0.0),
        StateFamily::EntangledSame(Sign::Minus) => (0.0, 0.0, 1.0),
    };
    Ok(HomProbabilities {
        p_cc,
        p_dd,
        p_cd,
        method: Method::Analytic,
        quadrature_error: 0.0,
    })
}

/// Normalized spectral overlap g(tau) between the delayed and undelayed
/// single-photon spectra.
pub fn spectral_overlap(
    envelope: &crate::states::BesselGaussEnvelope,
    tau: f64,
    n_z: usize,
    n_rho: usize,
) -> Result<Complex64> {
    let rule_z = QuadratureRule::gauss_legendre(n_z)?;
    let rule_r = QuadratureRule::gauss_legendre(n_rho)?;
    let (kz_lo, kz_hi) = envelope.k_z_support();
    let (rk_lo, rk_hi) = envelope.rho_k_support();

    let mut overlap = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for (&xz, &wz) in rule_z.nodes().iter().zip(rule_z.weights()) {
        let k_z = 0.5 * ((kz_hi - kz_lo) * xz + (kz_hi + kz_lo));
        for (&xr, &wr) in rule_r.nodes().iter().zip(rule_r.weights()) {
            let rho_k = 0.5 * ((rk_hi - rk_lo) * xr + (rk_hi + rk_lo));
            let eta = saf_envelope(envelope, k_z, rho_k);
            let weight = eta * eta * rho_k * wz * wr;
            let omega = SPEED_OF_LIGHT * k_z.hypot(rho_k);
            overlap += Complex64::from_polar(weight, -omega * tau);
            norm += weight;
        }
    }
    if norm <= 0.0 {
        return Err(Error::Evaluation(
            "spectral overlap normalization vanished".to_string(),
        ));
    }
    Ok(overlap / norm)
}

fn triple_from_overlap(state: &TwoPhotonState, g2: f64) -> (f64, f64, f64) {
    // Shared structure: dip states have p_cd = (1 - |g|^2)/2, the peak
    // state p_cd = (1 + |g|^2)/2, and distinguishable same-OAM product
    // pairs stay at 1/2 independent of delay.
    let dip = ((1.0 + g2) / 4.0, (1.0 + g2) / 4.0, (1.0 - g2) / 2.0);
    match state.family() {
        StateFamily::ProductOpposite => dip,
        StateFamily::ProductSame => {
            if state.m() == 0 {
                dip
            } else {
                (0.25, 0.25, 0.5)
            }
        }
        StateFamily::EntangledOpposite(_) => dip,
        StateFamily::EntangledSame(Sign::Plus) => dip,
        StateFamily::EntangledSame(Sign::Minus) => {
            ((1.0 - g2) / 4.0, (1.0 - g2) / 4.0, (1.0 + g2) / 2.0)
        }
    }
}

/// Probabilities from k-space quadrature of the general beam-splitter
/// integrals, azimuthally reduced. Supports arbitrary delay.
pub fn hom_probabilities_numeric(
    state: &TwoPhotonState,
    grid: &KSpaceGrid,
) -> Result<HomProbabilities> {
    grid.validate()?;
    if state.is_null() {
        return Err(null_state_error(state));
    }
    let env = state.mode().envelope();
    let g_coarse = spectral_overlap(env, state.delay_tau(), grid.n_z, grid.n_rho)?;
    let g_fine = spectral_overlap(env, state.delay_tau(), 2 * grid.n_z, 2 * grid.n_rho)?;

    let triple = triple_from_overlap(state, g_fine.norm_sqr());
    let coarse = triple_from_overlap(state, g_coarse.norm_sqr());
    let quadrature_error = (triple.0 - coarse.0)
        .abs()
        .max((triple.1 - coarse.1).abs())
        .max((triple.2 - coarse.2).abs());

    Ok(HomProbabilities {
        p_cc: triple.0,
        p_dd: triple.1,
        p_cd: triple.2,
        method: Method::Numeric,
        quadrature_error,
    })
}

/// Coincidence probability versus arm delay.
#[derive(Debug, Clone)]
pub struct DipScan {
    pub state: TwoPhotonState,
    pub delays: Vec<f64>,
    pub p_cd_values: Vec<f64>,
    /// Largest Richardson estimate across the scan.
    pub max_quadrature_error: f64,
}

/// p_cd(tau) for each requested delay, via the numeric engine.
pub fn hom_dip_scan(
    state: &TwoPhotonState,
    tau_values: &[f64],
    grid: &KSpaceGrid,
) -> Result<DipScan> {
    if tau_values.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("dip scan delays must be finite".to_string()));
    }
    let mut p_cd_values = Vec::with_capacity(tau_values.len());
    let mut max_err = 0.0f64;
    for &tau in tau_values {
        let probs = hom_probabilities_numeric(&state.with_delay(tau)?, grid)?;
        p_cd_values.push(probs.p_cd);
        max_err = max_err.max(probs.quadrature_error);
    }
    Ok(DipScan {
        state: *state,
        delays: tau_values.to_vec(),
        p_cd_values,
        max_quadrature_error: max_err,
    })
}

/// Brute-force evaluation of the general probability integrals on a full
/// (k_z, rho_k, phi_k) grid per photon, without the azimuthal reduction.
/// Meant as a low-resolution cross-check of [`hom_probabilities_numeric`].
pub fn hom_probabilities_numeric_3d(
    state: &TwoPhotonState,
    grid: &KSpaceGrid,
) -> Result<HomProbabilities> {
    grid.validate()?;
    if state.is_null() {
        return Err(null_state_error(state));
    }
    let env = state.mode().envelope();
    let m = state.m() as f64;
    let rule_z = QuadratureRule::gauss_legendre(grid.n_z)?;
    let rule_r = QuadratureRule::gauss_legendre(grid.n_rho)?;
    let phi_grid = AzimuthalGrid::midpoint(grid.n_phi);
    let (kz_lo, kz_hi) = env.k_z_support();
    let (rk_lo, rk_hi) = env.rho_k_support();

    // Radial node table: amplitude and dispersion per (k_z, rho_k) node.
    struct RadialNode {
        weight: f64, // eta * sqrt(measure weight)
        omega: f64,
    }
    let mut radial = Vec::with_capacity(grid.n_z * grid.n_rho);
    for (&xz, &wz) in rule_z.nodes().iter().zip(rule_z.weights()) {
        let k_z = 0.5 * ((kz_hi - kz_lo) * xz + (kz_hi + kz_lo));
        for (&xr, &wr) in rule_r.nodes().iter().zip(rule_r.weights()) {
            let rho_k = 0.5 * ((rk_hi - rk_lo) * xr + (rk_hi + rk_lo));
            let eta = saf_envelope(env, k_z, rho_k);
            radial.push(RadialNode {
                weight: eta * (rho_k * wz * wr).sqrt(),
                omega: SPEED_OF_LIGHT * k_z.hypot(rho_k),
            });
        }
    }
    let n_phi = grid.n_phi;
    let helical: Vec<Complex64> = (0..n_phi)
        .map(|j| Complex64::from_polar(1.0, m * phi_grid.node(j)))
        .collect();
    // phi -> -phi maps midpoint node j to node n_phi - 1 - j.
    let bar = |j: usize| n_phi - 1 - j;

    let norm_fac = state.normalization();
    let tau = state.delay_tau();
    // xi(k, k') for the family; photon b (second slot) carries the delay.
    let xi = |hel_a: Complex64, hel_b: Complex64, amp: f64, omega_b: f64| -> Complex64 {
        let angular = match state.family() {
            StateFamily::ProductOpposite => hel_a * hel_b.conj(),
            StateFamily::ProductSame => hel_a * hel_b,
            StateFamily::EntangledOpposite(s) => {
                hel_a * hel_b.conj() + (hel_a * hel_b.conj()).conj() * s.factor()
            }
            StateFamily::EntangledSame(s) => {
                hel_a * hel_b + (hel_a * hel_b).conj() * s.factor()
            }
        };
        angular * Complex64::from_polar(norm_fac * amp, -omega_b * tau)
    };

    let w_phi = phi_grid.weight();
    let mut norm = 0.0f64;
    let mut s_cc = Complex64::new(0.0, 0.0);
    let mut s_dd = Complex64::new(0.0, 0.0);
    let mut s_cd = Complex64::new(0.0, 0.0);

    for ra in &radial {
        for ja in 0..n_phi {
            let ha = helical[ja];
            let ha_bar = helical[bar(ja)];
            for rb in &radial {
                let amp = ra.weight * rb.weight;
                for jb in 0..n_phi {
                    let hb = helical[jb];
                    let hb_bar = helical[bar(jb)];
                    // All four amplitudes share the radial factors; only
                    // helical phases move under the bar map.
                    let xi_kk = xi(ha, hb, amp, rb.omega);
                    let xi_bb = xi(hb_bar, ha_bar, amp, ra.omega); // xi(kbar', kbar)
                    let xi_ba = xi(ha_bar, hb, amp, rb.omega); // xi(kbar, k')
                    let xi_ab = xi(hb_bar, ha, amp, ra.omega); // xi(kbar', k)
                    let xi_a_bb = xi(ha, hb_bar, amp, rb.omega); // xi(k, kbar')
                    let xi_b_ab = xi(hb, ha_bar, amp, ra.omega); // xi(k', kbar)
                    norm += xi_kk.norm_sqr();
                    s_cd += xi_kk.conj() * xi_bb;
                    s_cc += xi_ba.conj() * xi_ab;
                    s_dd += xi_a_bb.conj() * xi_b_ab;
                }
            }
        }
    }
    let _ = w_phi; // the phi weights cancel between numerator and norm
    if norm <= 0.0 {
        return Err(Error::Evaluation(
            "two-photon state norm vanished on the 3-D grid".to_string(),
        ));
    }
    let p_cc = 0.25 + 0.25 * s_cc.re / norm;
    let p_dd = 0.25 + 0.25 * s_dd.re / norm;
    let p_cd = 0.5 - 0.5 * s_cd.re / norm;
    Ok(HomProbabilities {
        p_cc,
        p_dd,
        p_cd,
        method: Method::Numeric,
        quadrature_error: 0.0, // not estimated on this path
    })
}

/// Total coincidence probability for the masked product imaging state,
/// by brute-force double quadrature of
/// P_cd = 1/4 iint iint F(rho) F(rho') |e^{i Phi(rho, phi)} - e^{i Phi(rho', -phi')}|^2.
///
/// This is the independent cross-check for the pixel-summed coincidence
/// image total and for the overlap-integral identity
/// P_cd = (1 - Re(conj(I1) I2)) / 2.
pub fn coincidence_total_masked_product(
    profile: &TransverseProfile,
    mask: &PhaseMask,
    n_rho: usize,
    n_phi: usize,
) -> Result<f64> {
    let rule = QuadratureRule::gauss_legendre(n_rho)?;
    let phi_grid = AzimuthalGrid::midpoint(n_phi);
    let rho_max = profile.window();

    // Tabulate the mask phase and radial weight on the product grid once.
    let mut weights = Vec::with_capacity(n_rho);
    let mut phases = Vec::with_capacity(n_rho * n_phi);
    let mut phases_bar = Vec::with_capacity(n_rho * n_phi);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let rho = 0.5 * (x + 1.0) * rho_max;
        let f = profile.density(rho)?;
        weights.push(f * rho * w * 0.5 * rho_max * phi_grid.weight());
        for j in 0..n_phi {
            let phi = phi_grid.node(j);
            phases.push(mask.phase_at_polar(rho, phi));
            phases_bar.push(mask.phase_at_polar(rho, -phi));
        }
    }

    let mut total = 0.0;
    for (ia, &wa) in weights.iter().enumerate() {
        for ja in 0..n_phi {
            let pa = phases[ia * n_phi + ja];
            let mut inner = 0.0;
            for (ib, &wb) in weights.iter().enumerate() {
                let mut ring = 0.0;
                for jb in 0..n_phi {
                    let pb = phases_bar[ib * n_phi + jb];
                    // |e^{i pa} - e^{i pb}|^2 = 2 - 2 cos(pa - pb)
                    ring += 1.0 - (pa - pb).cos();
                }
                inner += wb * ring;
            }
            total += wa * inner;
        }
    }
    Ok(0.5 * total)
}

/// Profiled mode for [`TwoPhotonState`] image-path cross-checks.
pub fn profile_for_state(state: &TwoPhotonState, window: f64, n_samples: usize) -> Result<TransverseProfile> {
    crate::states::transverse_profile(state.mode(), window, n_samples)
}
