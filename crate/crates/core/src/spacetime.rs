//! Minkowski metric conventions and complex four-vectors.
//!
//! Only diagonal metrics with unit entries are supported, so `η^{μμ}` and
//! `η_{μμ}` coincide numerically and a single table serves both.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

/// A sign in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Signature of the diagonal Minkowski metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Signature {
    /// `diag(-1, +1, +1, +1)`, with `σ̃ = -1`.
    #[default]
    TimeNegative,
    /// `diag(+1, -1, -1, -1)`, with `σ̃ = +1`.
    TimePositive,
}

impl Signature {
    pub fn diag(self) -> [f64; 4] {
        match self {
            Signature::TimeNegative => [-1.0, 1.0, 1.0, 1.0],
            Signature::TimePositive => [1.0, -1.0, -1.0, -1.0],
        }
    }

    pub fn sigma_tilde(self) -> f64 {
        match self {
            Signature::TimeNegative => -1.0,
            Signature::TimePositive => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signature::TimeNegative => "time-negative",
            Signature::TimePositive => "time-positive",
        }
    }
}

impl core::str::FromStr for Signature {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "time-negative" | "-+++" | "(-1,1,1,1)" => Ok(Signature::TimeNegative),
            "time-positive" | "+---" | "(1,-1,-1,-1)" => Ok(Signature::TimePositive),
            other => Err(crate::error::domain(alloc::format!(
                "unknown signature `{other}`"
            ))),
        }
    }
}

/// Metric signature together with the correlation sign `ε` of the real and
/// imaginary Wiener processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Metric {
    pub signature: Signature,
    pub epsilon: Sign,
}

impl Default for Metric {
    fn default() -> Self {
        Metric::new(Signature::TimeNegative, Sign::Plus)
    }
}

impl Metric {
    pub const fn new(signature: Signature, epsilon: Sign) -> Self {
        Metric { signature, epsilon }
    }

    #[inline]
    pub fn diag(&self) -> [f64; 4] {
        self.signature.diag()
    }

    /// `η^{μμ}`.
    #[inline]
    pub fn eta(&self, mu: usize) -> f64 {
        self.signature.diag()[mu]
    }

    #[inline]
    pub fn sigma_tilde(&self) -> f64 {
        self.signature.sigma_tilde()
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexPosition {
    Upper,
    Lower,
}

/// Four complex components with an index-position tag.
///
/// Coordinates `z^μ = x^μ + i y^μ` and velocities `w^μ = v^μ + i u^μ` are
/// upper-index vectors; gradients such as `∂_{z^μ} J` are lower-index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexFourVector {
    pub components: [C64; 4],
    pub index: IndexPosition,
}

impl ComplexFourVector {
    pub const fn new(components: [C64; 4], index: IndexPosition) -> Self {
        ComplexFourVector { components, index }
    }

    pub const fn upper(components: [C64; 4]) -> Self {
        Self::new(components, IndexPosition::Upper)
    }

    pub const fn lower(components: [C64; 4]) -> Self {
        Self::new(components, IndexPosition::Lower)
    }

    pub fn zero(index: IndexPosition) -> Self {
        Self::new([C64::new(0.0, 0.0); 4], index)
    }

    pub fn from_real(values: [f64; 4], index: IndexPosition) -> Self {
        Self::from_parts(values, [0.0; 4], index)
    }

    pub fn from_parts(re: [f64; 4], im: [f64; 4], index: IndexPosition) -> Self {
        let mut c = [C64::new(0.0, 0.0); 4];
        for mu in 0..4 {
            c[mu] = C64::new(re[mu], im[mu]);
        }
        Self::new(c, index)
    }

    pub fn re(&self) -> [f64; 4] {
        self.components.map(|c| c.re)
    }

    pub fn im(&self) -> [f64; 4] {
        self.components.map(|c| c.im)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Lower the index with `g`; a lower-index vector is returned unchanged.
    pub fn lowered(&self, g: &Metric) -> Self {
        match self.index {
            IndexPosition::Lower => *self,
            IndexPosition::Upper => Self::lower(self.eta_scaled(g)),
        }
    }

    /// Raise the index with `g`; an upper-index vector is returned unchanged.
    pub fn raised(&self, g: &Metric) -> Self {
        match self.index {
            IndexPosition::Upper => *self,
            IndexPosition::Lower => Self::upper(self.eta_scaled(g)),
        }
    }

    fn eta_scaled(&self, g: &Metric) -> [C64; 4] {
        let d = g.diag();
        let mut out = self.components;
        for mu in 0..4 {
            out[mu] *= d[mu];
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.components.map(|c| c * s), self.index)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..4)
            .map(|mu| (self.components[mu] - other.components[mu]).norm())
            .fold(0.0, f64::max)
    }

    /// Largest component modulus.
    pub fn max_norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexFourVector {
    type Output = C64;
    fn index(&self, mu: usize) -> &C64 {
        &self.components[mu]
    }
}

impl IndexMut<usize> for ComplexFourVector {
    fn index_mut(&mut self, mu: usize) -> &mut C64 {
        &mut self.components[mu]
    }
}

impl Add for ComplexFourVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.index, rhs.index);
        for mu in 0..4 {
            self.components[mu] += rhs.components[mu];
        }
        self
    }
}

impl Sub for ComplexFourVector {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.index, rhs.index);
        for mu in 0..4 {
            self.components[mu] -= rhs.components[mu];
        }
        self
    }
}

impl Neg for ComplexFourVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.components.map(|c| -c), self.index)
    }
}

impl Mul<f64> for ComplexFourVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.components.map(|c| c * rhs), self.index)
    }
}

/// Index contraction `Σ_μ a^μ b_μ`.
///
/// When both vectors carry the same index position, one of them is moved
/// through the metric, which for a diagonal metric is `Σ_μ η^{μμ} a^μ b^μ`.
pub fn contract(a: &ComplexFourVector, b: &ComplexFourVector, g: &Metric) -> C64 {
    let d = g.diag();
    let same = a.index == b.index;
    let mut acc = C64::new(0.0, 0.0);
    for mu in 0..4 {
        let term = a.components[mu] * b.components[mu];
        acc += if same { term * d[mu] } else { term };
    }
    acc
}

/// `Σ w^μ w_μ − σ̃ c²`; zero on the complexified mass shell.
pub fn weak_equation_residual(w: &ComplexFourVector, g: &Metric, c: f64) -> C64 {
    contract(w, w, g) - g.sigma_tilde() * c * c
}

/// A real Lorentz boost along one spatial axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boost {
    pub axis: usize,
    pub rapidity: f64,
}

impl Boost {
    pub fn new(axis: usize, rapidity: f64) -> crate::Result<Self> {
        if !(1..=3).contains(&axis) {
            return Err(crate::error::domain("boost axis must be 1, 2 or 3"));
        }
        if !rapidity.is_finite() {
            return Err(crate::error::domain("rapidity must be finite"));
        }
        Ok(Boost { axis, rapidity })
    }

    pub fn inverse(&self) -> Self {
        Boost {
            axis: self.axis,
            rapidity: -self.rapidity,
        }
    }

    /// Apply to an upper-index vector; lower-index vectors transform with the
    /// inverse boost so that contractions are preserved.
    pub fn apply(&self, v: &ComplexFourVector) -> ComplexFourVector {
        let phi = match v.index {
            IndexPosition::Upper => self.rapidity,
            IndexPosition::Lower => -self.rapidity,
        };
        let (ch, sh) = (phi.cosh(), phi.sinh());
        let mut out = *v;
        let t = v.components[0];
        let x = v.components[self.axis];
        out.components[0] = t * ch - x * sh;
        out.components[self.axis] = x * ch - t * sh;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e(mu: usize, val: C64) -> ComplexFourVector {
        let mut v = ComplexFourVector::zero(IndexPosition::Upper);
        v[mu] = val;
        v
    }

    #[test]
    fn contraction_examples() {
        let g = Metric::default();
        let t = e(0, c(1.0, 0.0));
        assert_eq!(contract(&t, &t, &g), c(-1.0, 0.0));
        let x = e(1, c(1.0, 0.0));
        assert_eq!(contract(&x, &x, &g), c(1.0, 0.0));
        let it = e(0, c(0.0, 1.0));
        assert_eq!(contract(&it, &it, &g), c(1.0, 0.0));
    }

    #[test]
    fn mixed_positions_contract_without_metric() {
        let g = Metric::default();
        let a = ComplexFourVector::from_parts(
            [1.0, 2.0, 3.0, 4.0],
            [0.5, 0.0, -1.0, 0.0],
            IndexPosition::Upper,
        );
        let b = a.lowered(&g);
        assert_eq!(contract(&a, &b, &g), contract(&a, &a, &g));
        assert_eq!(b.raised(&g), a);
    }

    #[test]
    fn weak_equation_examples() {
        let g = Metric::default();
        assert_eq!(
            weak_equation_residual(&e(0, c(1.0, 0.0)), &g, 1.0),
            c(0.0, 0.0)
        );
        assert_eq!(
            weak_equation_residual(&e(1, c(1.0, 0.0)), &g, 1.0),
            c(2.0, 0.0)
        );
        let r = 0.3f64;
        let w = ComplexFourVector::from_real([r.cosh(), r.sinh(), 0.0, 0.0], IndexPosition::Upper);
        assert!(weak_equation_residual(&w, &g, 1.0).norm() < 1e-15);
    }

    #[test]
    fn raising_twice_is_identity() {
        for sig in [Signature::TimeNegative, Signature::TimePositive] {
            let g = Metric::new(sig, Sign::Plus);
            for mu in 0..4 {
                assert_eq!(g.eta(mu) * g.eta(mu), 1.0);
            }
        }
        assert_eq!(Signature::TimeNegative.sigma_tilde(), -1.0);
        assert_eq!(Signature::TimePositive.sigma_tilde(), 1.0);
    }

    #[test]
    fn boosts_preserve_the_weak_residual() {
        let g = Metric::default();
        let w = ComplexFourVector::from_parts(
            [1.3, 0.4, -0.2, 0.7],
            [0.1, -0.3, 0.2, 0.05],
            IndexPosition::Upper,
        );
        let before = weak_equation_residual(&w, &g, 1.0);
        for axis in 1..=3 {
            let b = Boost::new(axis, 0.8).unwrap();
            let after = weak_equation_residual(&b.apply(&w), &g, 1.0);
            assert!((after - before).norm() < 1e-12, "axis {axis}");
            let back = b.inverse().apply(&b.apply(&w));
            assert!(back.max_abs_diff(&w) < 1e-14);
        }
        assert!(Boost::new(0, 0.1).is_err());
    }

    #[test]
    fn parse_signature() {
        assert_eq!(
            "time-positive".parse::<Signature>().unwrap(),
            Signature::TimePositive
        );
        assert!("euclid".parse::<Signature>().is_err());
    }
}
