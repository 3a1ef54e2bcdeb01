//! Deterministic reductions: compensated sums and streaming moments.
//!
//! All reductions consume samples in index order, so results are
//! reproducible regardless of how the samples were produced.

use crate::spacetime::C64;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Welford accumulator for the mean and variance of a real sample.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Mean and standard errors of a complex sample, real and imaginary parts
/// treated separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMean {
    pub mean: C64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub n: usize,
}

impl ComplexMean {
    /// Two-pass estimate over `samples`, summed in slice order.
    pub fn from_samples(samples: &[C64]) -> ComplexMean {
        let n = samples.len();
        if n == 0 {
            return ComplexMean {
                mean: C64::new(f64::NAN, f64::NAN),
                std_error_re: f64::INFINITY,
                std_error_im: f64::INFINITY,
                n,
            };
        }
        let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
        for s in samples {
            re.add(s.re);
            im.add(s.im);
        }
        let mean = C64::new(re.value() / n as f64, im.value() / n as f64);
        let (mut vr, mut vi) = (CompensatedSum::new(), CompensatedSum::new());
        for s in samples {
            vr.add((s.re - mean.re) * (s.re - mean.re));
            vi.add((s.im - mean.im) * (s.im - mean.im));
        }
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
        let nf = n as f64;
        ComplexMean {
            mean,
            std_error_re: (vr.value() / denom / nf).sqrt(),
            std_error_im: (vi.value() / denom / nf).sqrt(),
            n,
        }
    }
}

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mean = |s: &[f64]| {
        let mut acc = CompensatedSum::new();
        s.iter().for_each(|&x| acc.add(x));
        acc.value() / n
    };
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab.add(dx * dy);
        saa.add(dx * dx);
        sbb.add(dy * dy);
    }
    sab.value() / (saa.value() * sbb.value()).sqrt()
}
