//! Stationarity conditions `∂L/∂w^μ + ∂J/∂z^μ = 0`, solved in complex form
//! and as the two real condition sets.
//!
//! For analytic `L` and `J`, `∂L/∂u = i ∂L/∂w` and `∂J/∂y = i ∂J/∂z`, so the
//! real-part set `(Re ∂_v L + ∂_x J_R, Re ∂_u L + ∂_y J_R)` and the
//! imaginary-part set `(Im ∂_v L + ∂_x J_I, Im ∂_u L + ∂_y J_I)` share the
//! complex root.

use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

use crate::ccalc::{self, ScalarField};
use crate::error::{Error, Result};
use crate::lagrangian::{EMFieldConfig, Lagrangian};
use crate::spacetime::{ComplexFourVector, IndexPosition, Metric, C64};

pub const MAX_ITERATIONS: usize = 100;
const DAMPING: f64 = 0.5;
const MAX_HALVINGS: usize = 40;

type Vec8 = SVector<f64, 8>;

fn pack(w: &ComplexFourVector) -> Vec8 {
    Vec8::from_fn(|i, _| if i < 4 { w[i].re } else { w[i - 4].im })
}

fn unpack(x: &Vec8) -> ComplexFourVector {
    ComplexFourVector::from_parts(
        [x[0], x[1], x[2], x[3]],
        [x[4], x[5], x[6], x[7]],
        IndexPosition::Upper,
    )
}

fn inf_norm(x: &Vec8) -> f64 {
    x.iter().fold(0.0, |a, b| a.max(b.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub x: [f64; 8],
    pub iterations: usize,
    pub residual: f64,
}

/// Damped Newton on eight real unknowns with a central-difference Jacobian.
///
/// A trial step that increases `‖F‖∞` (or fails to evaluate) is scaled by 0.5
/// until it does not.
pub fn newton8<F>(f: F, x0: [f64; 8], tol: f64) -> Result<NewtonOutcome>
where
    F: Fn(&[f64; 8]) -> Result<[f64; 8]>,
{
    let eval = |x: &Vec8| -> Result<Vec8> {
        let arr: [f64; 8] = (*x).into();
        f(&arr).map(Vec8::from)
    };
    let mut x = Vec8::from(x0);
    let mut fx = eval(&x)?;
    let mut norm = inf_norm(&fx);
    for it in 0..MAX_ITERATIONS {
        if norm <= tol {
            return Ok(NewtonOutcome {
                x: x.into(),
                iterations: it,
                residual: norm,
            });
        }
        if !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: norm,
            });
        }
        let mut jac = SMatrix::<f64, 8, 8>::zeros();
        for j in 0..8 {
            let h = 1e-6 * x[j].abs().max(1.0);
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let col = (eval(&xp)? - eval(&xm)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let step = jac
            .lu()
            .solve(&(-fx))
            .ok_or(Error::SingularJacobian { iterations: it })?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = x + step * scale;
            if let Ok(ft) = eval(&trial) {
                let n = inf_norm(&ft);
                if n.is_finite() && n <= norm {
                    x = trial;
                    fx = ft;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            scale *= DAMPING;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: it + 1,
                residual: norm,
            });
        }
    }
    if norm <= tol {
        return Ok(NewtonOutcome {
            x: x.into(),
            iterations: MAX_ITERATIONS,
            residual: norm,
        });
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual: norm,
    })
}

/// Real-part set `(Re ∂_v L + ∂_x J_R, Re ∂_u L + ∂_y J_R)` from the complex
/// residual `Z = ∂_w L + ∂_z J`, as `(Re Z, Re iZ)`.
pub fn real_part_set(z: &[C64; 4]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for mu in 0..4 {
        out[mu] = z[mu].re;
        out[mu + 4] = (C64::new(0.0, 1.0) * z[mu]).re;
    }
    out
}

/// Imaginary-part set `(Im ∂_v L + ∂_x J_I, Im ∂_u L + ∂_y J_I)`, as `(Im Z, Im iZ)`.
pub fn imag_part_set(z: &[C64; 4]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for mu in 0..4 {
        out[mu] = z[mu].im;
        out[mu + 4] = (C64::new(0.0, 1.0) * z[mu]).im;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityResult {
    /// Optimal velocity `w*^μ` (upper index).
    pub w_star: ComplexFourVector,
    /// `∂L/∂w^μ + ∂J/∂z^μ` at `w*`.
    pub residual_complex: [C64; 4],
    /// `Re ∂_v L + ∂_x J_R` (first four) and `Re ∂_u L + ∂_y J_R`, by differences of `L`.
    pub residual_real_pair: [f64; 8],
    /// `Im ∂_v L + ∂_x J_I` (first four) and `Im ∂_u L + ∂_y J_I`, by differences of `L`.
    pub residual_imag_pair: [f64; 8],
    pub iterations: usize,
}

impl StationarityResult {
    pub fn w_star_lower(&self, g: &Metric) -> ComplexFourVector {
        self.w_star.lowered(g)
    }
}

/// Pair-form residual vectors for `L` at `w` and a gradient `dJ`, using
/// difference quotients of `L` along `v^μ` and `u^μ`.
pub fn pair_residuals(
    l: &Lagrangian,
    tau: f64,
    z: &ComplexFourVector,
    w: &ComplexFourVector,
    dj: &ComplexFourVector,
) -> ([f64; 8], [f64; 8]) {
    let i = C64::new(0.0, 1.0);
    let (mut real_set, mut imag_set) = ([0.0; 8], [0.0; 8]);
    for mu in 0..4 {
        let dv = l.fd_partial(tau, z, w, mu, C64::new(1.0, 0.0));
        let du = l.fd_partial(tau, z, w, mu, i);
        // ∂_x J = dJ, ∂_y J = i dJ for analytic J
        let (jx, jy) = (dj[mu], i * dj[mu]);
        real_set[mu] = dv.re + jx.re;
        real_set[mu + 4] = du.re + jy.re;
        imag_set[mu] = dv.im + jx.im;
        imag_set[mu + 4] = du.im + jy.im;
    }
    (real_set, imag_set)
}

/// Newton solve of `∂L/∂w^μ + dJ_μ = 0` on the eight reals `(v, u)`.
pub fn solve_optimal_control(
    l: &Lagrangian,
    tau: f64,
    z: &ComplexFourVector,
    dj: &ComplexFourVector,
    guess: &ComplexFourVector,
    tol: f64,
) -> Result<StationarityResult> {
    if !guess.is_finite() || !dj.is_finite() {
        return Err(crate::error::domain("guess and gradient must be finite"));
    }
    let residual = |w: &ComplexFourVector| -> Result<[C64; 4]> {
        let g = l.gradient(tau, z, w)?;
        Ok(core::array::from_fn(|mu| g[mu] + dj[mu]))
    };
    let out = newton8(
        |x| {
            let r = residual(&unpack(&Vec8::from(*x)))?;
            Ok(core::array::from_fn(|i| {
                if i < 4 {
                    r[i].re
                } else {
                    r[i - 4].im
                }
            }))
        },
        pack(guess).into(),
        tol,
    )?;
    let w_star = unpack(&Vec8::from(out.x));
    let residual_complex = residual(&w_star)?;
    let (residual_real_pair, residual_imag_pair) = pair_residuals(l, tau, z, &w_star, dj);
    Ok(StationarityResult {
        w_star,
        residual_complex,
        residual_real_pair,
        residual_imag_pair,
        iterations: out.iterations,
    })
}

/// `w*^μ` raised from `w*_μ = −(∂_μ J + q A_μ)/m`.
pub fn em_closed_form(
    cfg: &EMFieldConfig,
    tau: f64,
    z: &ComplexFourVector,
    dj: &ComplexFourVector,
) -> ComplexFourVector {
    let lower = ComplexFourVector::lower(dj.components) + cfg.coupling(tau, z);
    (lower * (-1.0 / cfg.m)).raised(&cfg.metric)
}

/// Outcome of the two independent pair solves at one probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeStatus {
    Agree,
    Disagree,
    /// No regular stationary point: a solve failed, or the root sits on the
    /// Lagrangian's singular set.
    NoInteriorStationaryPoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeAudit {
    pub tau: f64,
    pub z: ComplexFourVector,
    pub w_real_set: Option<ComplexFourVector>,
    pub w_imag_set: Option<ComplexFourVector>,
    pub disagreement: f64,
    pub closed_form_error: Option<f64>,
    pub status: ProbeStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub probes: Vec<ProbeAudit>,
    pub max_disagreement: f64,
    pub max_closed_form_error: Option<f64>,
    pub tol: f64,
}

impl AuditReport {
    pub fn counterexamples(&self) -> impl Iterator<Item = &ProbeAudit> {
        self.probes
            .iter()
            .filter(|p| p.status == ProbeStatus::Disagree)
    }

    pub fn singular(&self) -> impl Iterator<Item = &ProbeAudit> {
        self.probes
            .iter()
            .filter(|p| p.status == ProbeStatus::NoInteriorStationaryPoint)
    }

    /// Every probe agrees; singular probes count as not passing.
    pub fn passed(&self) -> bool {
        self.probes.iter().all(|p| p.status == ProbeStatus::Agree)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions<'a> {
    /// Root agreement tolerance.
    pub tol: f64,
    /// Stencil step for the derivatives of `J`.
    pub h: f64,
    /// Analyticity tolerance applied to `J` before any solve.
    pub scan_tol: f64,
    /// Newton residual tolerance.
    pub newton_tol: f64,
    pub guess: ComplexFourVector,
    /// When set, roots are also compared with [`em_closed_form`].
    pub em: Option<&'a EMFieldConfig>,
}

impl Default for AuditOptions<'_> {
    fn default() -> Self {
        AuditOptions {
            tol: 1e-8,
            h: 1e-3,
            scan_tol: 1e-6,
            newton_tol: 1e-11,
            guess: ComplexFourVector::zero(IndexPosition::Upper),
            em: None,
        }
    }
}

/// Solve the real-part and the imaginary-part condition sets separately at
/// each probe and compare the roots.
///
/// `J` must pass the analyticity scan first; otherwise the audit refuses with
/// [`Error::NotAnalytic`].
pub fn equivalence_audit(
    l: &Lagrangian,
    j: &ScalarField,
    probes: &[(f64, ComplexFourVector)],
    opts: &AuditOptions<'_>,
) -> Result<AuditReport> {
    let scan = ccalc::analyticity_scan(j, probes, opts.h, opts.scan_tol)?;
    if !scan.passed {
        return Err(Error::NotAnalytic {
            worst: scan.worst_residual,
        });
    }
    let i = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(probes.len());
    for (tau, z) in probes {
        let d = ccalc::complex_derivative(j, *tau, z, opts.h)?;
        // conditions as functions of (v, u), each from differences of L
        let set = |imag: bool| {
            move |x: &[f64; 8]| -> Result<[f64; 8]> {
                let w = unpack(&Vec8::from(*x));
                let mut r = [0.0; 8];
                for mu in 0..4 {
                    let dv = l.fd_partial(*tau, z, &w, mu, C64::new(1.0, 0.0));
                    let du = l.fd_partial(*tau, z, &w, mu, i);
                    let (jx, jy) = (d.d_x[mu], d.d_y[mu]);
                    if imag {
                        r[mu] = dv.im + jx.im;
                        r[mu + 4] = du.im + jy.im;
                    } else {
                        r[mu] = dv.re + jx.re;
                        r[mu + 4] = du.re + jy.re;
                    }
                }
                Ok(r)
            }
        };
        let x0: [f64; 8] = pack(&opts.guess).into();
        let root = |imag: bool| {
            newton8(set(imag), x0, opts.newton_tol)
                .ok()
                .map(|o| unpack(&Vec8::from(o.x)))
        };
        let (wr, wi) = (root(false), root(true));
        let closed = opts
            .em
            .map(|cfg| em_closed_form(cfg, *tau, z, &d.gradient()));
        let (status, disagreement, closed_form_error) = match (wr, wi) {
            (Some(a), Some(b)) => {
                let dis = a.max_abs_diff(&b);
                let cf = closed.map(|c| a.max_abs_diff(&c).max(b.max_abs_diff(&c)));
                let status = if l.is_singular(&a) || l.is_singular(&b) {
                    ProbeStatus::NoInteriorStationaryPoint
                } else if dis < opts.tol {
                    ProbeStatus::Agree
                } else {
                    ProbeStatus::Disagree
                };
                (status, dis, cf)
            }
            _ => (ProbeStatus::NoInteriorStationaryPoint, f64::NAN, None),
        };
        out.push(ProbeAudit {
            tau: *tau,
            z: *z,
            w_real_set: wr,
            w_imag_set: wi,
            disagreement,
            closed_form_error,
            status,
        });
    }
    let max_disagreement = out
        .iter()
        .map(|p| p.disagreement)
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let max_closed_form_error = opts.em.map(|_| {
        out.iter()
            .filter_map(|p| p.closed_form_error)
            .fold(0.0, f64::max)
    });
    Ok(AuditReport {
        probes: out,
        max_disagreement,
        max_closed_form_error,
        tol: opts.tol,
    })
}
