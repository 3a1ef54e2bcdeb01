//! Domain boxes and deterministic probe sets.

use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::spacetime::{ComplexFourVector, IndexPosition};

/// Axis-aligned box in `(τ, x^0..x^3, y^0..y^3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox {
    pub tau: (f64, f64),
    pub re: [(f64, f64); 4],
    pub im: [(f64, f64); 4],
}

impl DomainBox {
    pub fn new(tau: (f64, f64), re: [(f64, f64); 4], im: [(f64, f64); 4]) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(tau) || !re.iter().all(|r| ok(*r)) || !im.iter().all(|r| ok(*r)) {
            return Err(domain("domain box bounds must be finite with lo < hi"));
        }
        Ok(DomainBox { tau, re, im })
    }

    /// `τ ∈ tau`, every real and imaginary coordinate in `[-half_width, half_width]`.
    pub fn cube(tau: (f64, f64), half_width: f64) -> Self {
        let r = (-half_width, half_width);
        DomainBox {
            tau,
            re: [r; 4],
            im: [r; 4],
        }
    }

    /// A box large enough that no stencil ever leaves it.
    pub fn unbounded() -> Self {
        Self::cube((-1e300, 1e300), 1e300)
    }

    pub fn contains(&self, tau: f64, z: &ComplexFourVector) -> bool {
        self.contains_with_margin(tau, z, 0.0, 0.0)
    }

    /// `tau_margin` applies to `τ`, `margin` to every spatial coordinate.
    pub fn contains_with_margin(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        tau_margin: f64,
        margin: f64,
    ) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64), m: f64| v - m >= lo && v + m <= hi;
        if !inside(tau, self.tau, tau_margin) {
            return false;
        }
        (0..4).all(|mu| {
            inside(z[mu].re, self.re[mu], margin) && inside(z[mu].im, self.im[mu], margin)
        })
    }

    /// A copy shrunk by `margin` on every side (and `tau_margin` in `τ`).
    pub fn shrunk(&self, tau_margin: f64, margin: f64) -> Self {
        let s = |(lo, hi): (f64, f64), m: f64| (lo + m, hi - m);
        DomainBox {
            tau: s(self.tau, tau_margin),
            re: self.re.map(|r| s(r, margin)),
            im: self.im.map(|r| s(r, margin)),
        }
    }
}

const PRIMES: [u64; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    acc
}

/// `count` Halton points (bases 2..23) mapped into `bx`, skipping the first
/// `skip` indices of the sequence.
pub fn halton_probes(
    bx: &DomainBox,
    count: usize,
    skip: u64,
) -> Result<Vec<(f64, ComplexFourVector)>> {
    if count == 0 {
        return Err(domain("probe count must be positive"));
    }
    let lerp = |(lo, hi): (f64, f64), t: f64| lo + (hi - lo) * t;
    Ok((0..count as u64)
        .map(|k| {
            let i = k + 1 + skip;
            let tau = lerp(bx.tau, radical_inverse(i, PRIMES[0]));
            let mut re = [0.0; 4];
            let mut im = [0.0; 4];
            for mu in 0..4 {
                re[mu] = lerp(bx.re[mu], radical_inverse(i, PRIMES[1 + mu]));
                im[mu] = lerp(bx.im[mu], radical_inverse(i, PRIMES[5 + mu]));
            }
            (
                tau,
                ComplexFourVector::from_parts(re, im, IndexPosition::Upper),
            )
        })
        .collect())
}

/// Default probe count for residual scans.
pub const DEFAULT_PROBES: usize = 64;
