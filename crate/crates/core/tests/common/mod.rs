//! Shared test support: a double-double power-series Bessel oracle that
//! stays accurate through the catastrophic cancellation a plain f64
//! series suffers for x ≳ 20, a seeded PRNG for reproducible random
//! masks, and the reference geometry.

#![allow(dead_code)]

use twistim_core::imaging::SensorGrid;
use twistim_core::states::{
    BesselGaussEnvelope, StateFamily, TwistedMode, TwoPhotonState,
};

// ---------------------------------------------------------------------
// double-double arithmetic (Dekker/Knuth error-free transforms)
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub fn from_f64(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (s1, s2) = quick_two_sum(s1, s2);
        Dd { hi: s1, lo: s2 }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        // remainder of the first quotient digit, exactly
        let (p1, p2) = two_prod(q1, b);
        let (r1, r2) = two_sum(self.hi, -p1);
        let r = r1 + (r2 + self.lo - p2);
        let q2 = r / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

/// Power-series J_m(x) evaluated in double-double arithmetic: the
/// independent oracle for the production Bessel path. Accurate to well
/// below 1e-16 absolute for |x| <= 60.
pub fn bessel_j_series_dd(m: i32, x: f64) -> f64 {
    let n = m.unsigned_abs();
    let mut sign = 1.0;
    if n % 2 == 1 {
        if m < 0 {
            sign = -sign;
        }
        if x < 0.0 {
            sign = -sign;
        }
    }
    let x = x.abs();
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = Dd::from_f64(1.0);
    for k in 1..=n {
        term = term.mul_f64(half).div_f64(k as f64);
    }
    let mut sum = term;
    let q = Dd::from_f64(half).mul(Dd::from_f64(half));
    for k in 1..=500u32 {
        term = term
            .mul(q)
            .div_f64(k as f64)
            .div_f64((n + k) as f64)
            .neg();
        sum = sum.add(term);
        if term.abs_hi() < sum.abs_hi() * 1e-36 + 1e-320 {
            break;
        }
    }
    sign * sum.to_f64()
}

// ---------------------------------------------------------------------
// seeded PRNG (splitmix64)
// ---------------------------------------------------------------------

pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u8(&mut self) -> u8 {
        (self.next_u64() >> 56) as u8
    }
}

// ---------------------------------------------------------------------
// reference geometry
// ---------------------------------------------------------------------

pub const LAMBDA: f64 = 500e-9;

pub fn reference_envelope() -> BesselGaussEnvelope {
    BesselGaussEnvelope::from_wavelength(
        LAMBDA,
        1000.0 * LAMBDA,
        1000.0 * LAMBDA,
        0.001 * std::f64::consts::PI,
    )
    .unwrap()
}

pub fn reference_mode(m: i32) -> TwistedMode {
    TwistedMode::new(reference_envelope(), m).unwrap()
}

pub fn reference_state(family: StateFamily, m: i32, tau: f64) -> TwoPhotonState {
    TwoPhotonState::new(family, reference_mode(m), tau).unwrap()
}

pub fn imaging_state(m: i32) -> TwoPhotonState {
    reference_state(StateFamily::ProductOpposite, m, 0.0)
}

pub fn reference_grid() -> SensorGrid {
    SensorGrid::new(50, 50, 10e-6, (0.0, 0.0), 4).unwrap()
}
