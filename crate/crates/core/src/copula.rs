//! Frank, Gaussian and independence copulas, and mixtures of them.
//!
//! Strengths can be given as a population Kendall's tau, a population
//! Spearman's rho or the family's own parameter; [`CopulaSpec::resolve`]
//! converts to the native parameter.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::math::{integrate, normal_cdf};
use crate::rank::Sample;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    Frank,
    Gaussian,
    Independence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Strength {
    KendallTau(f64),
    SpearmanRho(f64),
    /// Frank `theta` or Gaussian latent correlation `r`.
    Native(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CopulaSpec {
    pub family: Family,
    pub strength: Strength,
}

/// A copula with its native parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Copula {
    Frank(f64),
    Gaussian(f64),
    Independence,
}

impl CopulaSpec {
    pub fn frank(strength: Strength) -> Self {
        CopulaSpec { family: Family::Frank, strength }
    }

    pub fn gaussian(strength: Strength) -> Self {
        CopulaSpec { family: Family::Gaussian, strength }
    }

    pub fn independence() -> Self {
        CopulaSpec { family: Family::Independence, strength: Strength::Native(0.0) }
    }

    pub fn resolve(&self) -> Result<Copula> {
        Ok(match self.family {
            Family::Independence => Copula::Independence,
            Family::Frank => Copula::Frank(match self.strength {
                Strength::KendallTau(t) => frank_theta_from_tau(t)?,
                Strength::SpearmanRho(r) => frank_theta_from_rho(r)?,
                Strength::Native(theta) if theta != 0.0 && theta.is_finite() => theta,
                Strength::Native(_) => return Err(invalid!("Frank theta must be finite and nonzero")),
            }),
            Family::Gaussian => Copula::Gaussian(gaussian_r_from(self.strength)?),
        })
    }
}

impl Copula {
    pub fn kendall_tau(&self) -> f64 {
        match *self {
            Copula::Frank(theta) => frank_tau(theta),
            Copula::Gaussian(r) => 2.0 / PI * libm::asin(r),
            Copula::Independence => 0.0,
        }
    }

    pub fn spearman_rho(&self) -> f64 {
        match *self {
            Copula::Frank(theta) => frank_rho(theta),
            Copula::Gaussian(r) => 6.0 / PI * libm::asin(r / 2.0),
            Copula::Independence => 0.0,
        }
    }

    /// One draw `(u, v)` with uniform margins.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Copula::Independence => (open01(rng), open01(rng)),
            Copula::Gaussian(r) => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let w = r * z1 + libm::sqrt(1.0 - r * r) * z2;
                (normal_cdf(z1), normal_cdf(w))
            }
            Copula::Frank(theta) => {
                let (u, t) = (open01(rng), open01(rng));
                let v = frank_conditional_inverse(theta.abs(), u, t);
                if theta < 0.0 {
                    (u, 1.0 - v)
                } else {
                    (u, v)
                }
            }
        }
    }
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().max(f64::MIN_POSITIVE)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Solves `dC/du (u, v) = t` for `v` when `theta > 0`, in log space so large
/// `theta` cannot overflow.
fn frank_conditional_inverse(theta: f64, u: f64, t: f64) -> f64 {
    let num = log_sum_exp(libm::log1p(-t) - theta * u, libm::log(t) - theta);
    let den = libm::log(t + (1.0 - t) * libm::exp(-theta * u));
    (-(num - den) / theta).clamp(0.0, 1.0)
}

/// Debye function `D_k(x) = k / x^k * integral_0^x t^k / (e^t - 1) dt`.
pub fn debye(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x < 0.0 {
        // D_k(-x) = D_k(x) + k x / (k + 1)
        return debye(k, -x) - k as f64 * x / (k as f64 + 1.0);
    }
    // t^k / (e^t - 1) tends to 1 for k = 1 and to 0 for k > 1
    let f = |t: f64| if t == 0.0 { (k == 1) as u8 as f64 } else { libm::pow(t, k as f64) / libm::expm1(t) };
    k as f64 / libm::pow(x, k as f64) * integrate(f, 0.0, x, 1e-12)
}

/// Population Kendall's tau of the Frank copula.
pub fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 0.1 {
        let t2 = theta * theta;
        return theta * (1.0 / 9.0 - t2 / 900.0 + t2 * t2 / 52_920.0);
    }
    1.0 - 4.0 / theta * (1.0 - debye(1, theta))
}

/// Population Spearman's rho of the Frank copula.
pub fn frank_rho(theta: f64) -> f64 {
    if theta.abs() < 0.1 {
        let t2 = theta * theta;
        return theta * (1.0 / 6.0 - t2 / 450.0 + t2 * t2 / 23_520.0);
    }
    1.0 - 12.0 / theta * (debye(1, theta) - debye(2, theta))
}

/// Inverts an odd, increasing map `f: theta -> strength` by bisection.
fn invert_frank(target: f64, f: fn(f64) -> f64, what: &str) -> Result<f64> {
    if target.is_nan() || target.abs() >= 1.0 || target == 0.0 {
        return Err(invalid!("Frank {what} must lie in (-1, 0) or (0, 1), got {target}"));
    }
    let goal = target.abs();
    let mut hi = 1.0;
    while f(hi) < goal {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid!("Frank {what} {target} is too close to 1"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < goal {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) * target.signum())
}

/// Frank parameter with population Kendall's tau `tau`.
pub fn frank_theta_from_tau(tau: f64) -> Result<f64> {
    invert_frank(tau, frank_tau, "tau")
}

/// Frank parameter with population Spearman's rho `rho`.
pub fn frank_theta_from_rho(rho: f64) -> Result<f64> {
    invert_frank(rho, frank_rho, "rho")
}

/// Gaussian latent correlation for a target strength.
pub fn gaussian_r_from(strength: Strength) -> Result<f64> {
    let r = match strength {
        Strength::KendallTau(t) if t.abs() < 1.0 => libm::sin(PI * t / 2.0),
        Strength::SpearmanRho(rho) if rho.abs() < 1.0 => 2.0 * libm::sin(PI * rho / 6.0),
        Strength::Native(r) if r.abs() < 1.0 => r,
        other => return Err(invalid!("Gaussian strength {other:?} must lie in (-1, 1)")),
    };
    Ok(r)
}

/// `n` seeded draws with uniform margins.
pub fn sample(spec: &CopulaSpec, n: usize, seed: u64) -> Result<Draws> {
    if n == 0 {
        return Err(Error::TooSmall { min: 1, got: 0 });
    }
    let c = spec.resolve()?;
    let mut r = rng::seeded(seed);
    let (u, v) = (0..n).map(|_| c.draw(&mut r)).unzip();
    Ok(Draws { u, v })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Draws {
    pub fn into_sample(self) -> Result<Sample> {
        Sample::new(self.u, self.v)
    }
}

/// Draws come from `component` with probability `p` and from `background`
/// (independence unless set otherwise) the rest of the time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureSpec {
    pub component: CopulaSpec,
    pub background: CopulaSpec,
    pub p: f64,
    pub n: usize,
}

impl MixtureSpec {
    pub fn with_independence(component: CopulaSpec, p: f64, n: usize) -> Self {
        MixtureSpec { component, background: CopulaSpec::independence(), p, n }
    }
}

/// A sample whose draws remember which component produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub sample: Sample,
    /// `associated[i]` is true when draw `i` came from the component.
    pub associated: Vec<bool>,
}

impl LabeledSample {
    pub fn associated_count(&self) -> usize {
        self.associated.iter().filter(|&&a| a).count()
    }
}

pub fn sample_mixture(m: &MixtureSpec, seed: u64) -> Result<LabeledSample> {
    if !(m.p > 0.0 && m.p <= 1.0) {
        return Err(invalid!("mixing proportion must lie in (0, 1], got {}", m.p));
    }
    let (fg, bg) = (m.component.resolve()?, m.background.resolve()?);
    let mut r = rng::seeded(seed);
    let mut u = Vec::with_capacity(m.n);
    let mut v = Vec::with_capacity(m.n);
    let mut associated = Vec::with_capacity(m.n);
    for _ in 0..m.n {
        let hit = r.random::<f64>() < m.p;
        let (a, b) = if hit { fg.draw(&mut r) } else { bg.draw(&mut r) };
        u.push(a);
        v.push(b);
        associated.push(hit);
    }
    Ok(LabeledSample { sample: Sample::new(u, v)?, associated })
}
