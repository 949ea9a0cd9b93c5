//! Modified Prüfer phases: the projective action of the conjugated transfer
//! matrices, lifted to the real line, and orbit generation for the physical
//! chain and for the auxiliary chain with an extra random rotation.
//!
//! Writing `c = v / sin k`, the matrix `1 + P` maps `e_theta` to
//! `(cos theta, sin theta - c cos theta)`. Its first component keeps its sign,
//! so the image direction stays in the same half-plane and the lift moves by
//! less than `pi`. The signed angle between `e_theta` and its image is
//!
//! ```text
//! kick(theta) = atan2(-c cos^2 theta, 1 - c sin theta cos theta)
//! ```
//!
//! and the action is `S(theta) = theta + k + kick(theta)`. This is continuous
//! in `v`, equals `theta + k` at `v = 0` and commutes with `theta -> theta + pi`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DisorderSpec, EnergyPoint, ImpurityLaw, RngContract, SiteSampler};
use crate::stats::DEFAULT_BATCHES;

/// Signed rotation applied by `1 + P` to the direction `theta`.
#[inline]
pub(crate) fn kick(c: f64, sin: f64, cos: f64) -> f64 {
    (-c * cos * cos).atan2(1.0 - c * sin * cos)
}

/// `log |(1 + P) e_theta|`.
#[inline]
pub(crate) fn log_expansion(c: f64, sin: f64, cos: f64) -> f64 {
    let cc = c * cos;
    0.5 * (cc * (cc - 2.0 * sin)).ln_1p()
}

/// The lifted action `S_{E,v}(theta)`.
pub fn action(e: &EnergyPoint, v: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    theta + e.k() + kick(v / e.sin_k(), s, c)
}

/// `S_{E,v}(theta) + psi`.
pub fn hat_action(e: &EnergyPoint, psi: f64, v: f64, theta: f64) -> f64 {
    action(e, v, theta) + psi
}

/// `log |M T^E_v M^{-1} e_theta|`.
pub fn log_norm(e: &EnergyPoint, v: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    log_expansion(v / e.sin_k(), s, c)
}

/// Distribution of the extra rotation `psi` in the auxiliary chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PsiLaw {
    /// Uniform on `[-pi/2, pi/2)`.
    Uniform,
    /// Equiprobable atoms `offset + spacing * j`, `j = 0..q`.
    Grid { q: u32, offset: f64, spacing: f64 },
}

impl PsiLaw {
    /// The grid `{pi j / q}`: `e^{2 i m psi}` averages to one when `q | m`
    /// and to zero otherwise.
    pub fn grid(q: u32) -> Self {
        PsiLaw::Grid {
            q,
            offset: 0.0,
            spacing: PI / q as f64,
        }
    }

    /// Atoms `(pi/2)(p/q - (q+1)/(2q))`, `p = 1..q`, with spacing `pi/(2q)`.
    /// Kept for comparison; it does not average `e^{2 i m psi}` to zero.
    pub fn half_turn_grid(q: u32) -> Self {
        let qf = q as f64;
        PsiLaw::Grid {
            q,
            offset: 0.5 * PI * (1.0 / qf - (qf + 1.0) / (2.0 * qf)),
            spacing: PI / (2.0 * qf),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PsiLaw::Uniform => Ok(()),
            PsiLaw::Grid { q, offset, spacing } => {
                if q < 2 {
                    return Err(Error::Config(format!("psi grid needs q >= 2, got {q}")));
                }
                if !offset.is_finite() || !spacing.is_finite() {
                    return Err(Error::Config("psi grid offset/spacing must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Grid atoms, or `None` for the uniform law.
    pub fn atoms(&self) -> Option<Vec<f64>> {
        match *self {
            PsiLaw::Uniform => None,
            PsiLaw::Grid { q, offset, spacing } => {
                Some((0..q).map(|j| offset + spacing * j as f64).collect())
            }
        }
    }

    #[inline]
    fn sample(&self, u: f64) -> f64 {
        match *self {
            PsiLaw::Uniform => PI * (u - 0.5),
            PsiLaw::Grid { q, offset, spacing } => {
                let j = ((u * q as f64) as u32).min(q - 1);
                offset + spacing * j as f64
            }
        }
    }
}

/// Phase kept as `winds * pi + reduced` with `reduced` in `[0, pi)`, so long
/// orbits do not lose precision to a growing lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    reduced: f64,
    winds: i64,
}

impl Phase {
    pub fn new(theta: f64) -> Self {
        let mut p = Phase {
            reduced: 0.0,
            winds: 0,
        };
        p.advance(theta);
        p
    }

    #[inline]
    pub fn advance(&mut self, delta: f64) {
        let r = self.reduced + delta;
        let w = (r / PI).floor();
        let mut reduced = r - w * PI;
        let mut winds = self.winds + w as i64;
        if reduced >= PI {
            reduced -= PI;
            winds += 1;
        } else if reduced < 0.0 {
            reduced += PI;
            winds -= 1;
        }
        self.reduced = reduced;
        self.winds = winds;
    }

    /// Phase modulo `pi`, in `[0, pi)`.
    pub fn reduced(&self) -> f64 {
        self.reduced
    }

    /// Unwrapped phase on the real line.
    pub fn lift(&self) -> f64 {
        self.winds as f64 * PI + self.reduced
    }
}

/// One recorded step of an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Phase modulo `pi` before the step.
    pub before: f64,
    /// Unwrapped phase before the step.
    pub before_lift: f64,
    /// Phase modulo `pi` after the step.
    pub after: f64,
    /// `log |M T M^{-1} e_before|`; zero on clean sites.
    pub log_norm: f64,
    /// `S(before) - before` (including `psi` on the auxiliary chain).
    pub increment: f64,
}

/// Length and starting point of an orbit plus replica/batch layout for the
/// Monte Carlo estimators built on top of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSettings {
    pub n_steps: u64,
    pub burn_in: u64,
    pub theta0: f64,
    pub replicas: u64,
    pub n_batches: usize,
}

impl Default for OrbitSettings {
    fn default() -> Self {
        Self {
            n_steps: 1_000_000,
            burn_in: 10_000,
            theta0: 0.1,
            replicas: 1,
            n_batches: DEFAULT_BATCHES,
        }
    }
}

impl OrbitSettings {
    pub fn with_steps(n_steps: u64) -> Self {
        Self {
            n_steps,
            ..Self::default()
        }
    }
}

fn kick_strengths(e: &EnergyPoint, law: &ImpurityLaw) -> Vec<f64> {
    let s = e.sin_k();
    law.atoms().iter().map(|a| a.value / s).collect()
}

/// Iterates `theta_n = S_{E, v_n}(theta_{n-1})` with `v_n` drawn from
/// `(1 - rho) delta_0 + rho * law`. The first `burn_in` steps are not
/// reported to `visit`. Returns the final phase.
pub fn walk_physical(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    n_steps: u64,
    burn_in: u64,
    theta0: f64,
    rng: &RngContract,
    mut visit: impl FnMut(&StepRecord),
) -> Phase {
    let k = e.k();
    let strengths = kick_strengths(e, disorder.law());
    let sampler = SiteSampler::new(disorder.rho(), disorder.law());
    let mut gen = rng.rng();
    let mut phase = Phase::new(theta0);
    for n in 0..burn_in + n_steps {
        let before = phase.reduced();
        let before_lift = phase.lift();
        let (increment, log_norm) = match sampler.site(gen.random::<f64>()) {
            None => (k, 0.0),
            Some(i) => {
                let c = strengths[i];
                let (s, co) = before.sin_cos();
                (k + kick(c, s, co), log_expansion(c, s, co))
            }
        };
        phase.advance(increment);
        if n >= burn_in {
            visit(&StepRecord {
                before,
                before_lift,
                after: phase.reduced(),
                log_norm,
                increment,
            });
        }
    }
    phase
}

/// Iterates `theta_n = S_{E, v_n}(theta_{n-1}) + psi_n` with `v_n ~ law` at
/// every step (no clean sites) and `psi_n ~ psi_law`.
pub fn walk_hat(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    psi_law: &PsiLaw,
    n_steps: u64,
    burn_in: u64,
    theta0: f64,
    rng: &RngContract,
    mut visit: impl FnMut(&StepRecord),
) -> Phase {
    let k = e.k();
    let strengths = kick_strengths(e, law);
    let sampler = SiteSampler::new(1.0, law);
    let single = strengths.len() == 1;
    let mut gen = rng.rng();
    let mut phase = Phase::new(theta0);
    for n in 0..burn_in + n_steps {
        let before = phase.reduced();
        let before_lift = phase.lift();
        let psi = psi_law.sample(gen.random::<f64>());
        let c = if single {
            strengths[0]
        } else {
            strengths[sampler.atom(gen.random::<f64>())]
        };
        let (s, co) = before.sin_cos();
        let increment = k + kick(c, s, co) + psi;
        let log_norm = log_expansion(c, s, co);
        phase.advance(increment);
        if n >= burn_in {
            visit(&StepRecord {
                before,
                before_lift,
                after: phase.reduced(),
                log_norm,
                increment,
            });
        }
    }
    phase
}

/// A recorded orbit: unwrapped phases `theta_0..theta_N` and the per-step
/// log-norms and phase increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrueferOrbit {
    pub thetas: Vec<f64>,
    pub log_norms: Vec<f64>,
    pub increments: Vec<f64>,
}

impl PrueferOrbit {
    fn with_capacity(n: usize) -> Self {
        Self {
            thetas: Vec::with_capacity(n + 1),
            log_norms: Vec::with_capacity(n),
            increments: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.log_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_norms.is_empty()
    }
}

fn record(
    n_steps: u64,
    walk: impl FnOnce(&mut dyn FnMut(&StepRecord)) -> Phase,
) -> PrueferOrbit {
    let mut orbit = PrueferOrbit::with_capacity(n_steps as usize);
    let mut lift = None::<f64>;
    let final_phase = walk(&mut |s: &StepRecord| {
        let current = match lift {
            None => {
                orbit.thetas.push(s.before_lift);
                s.before_lift
            }
            Some(t) => t,
        };
        let next = current + s.increment;
        orbit.thetas.push(next);
        orbit.log_norms.push(s.log_norm);
        orbit.increments.push(s.increment);
        lift = Some(next);
    });
    if orbit.thetas.is_empty() {
        orbit.thetas.push(final_phase.lift());
    }
    orbit
}

/// Records a physical-chain orbit.
pub fn run_orbit(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    n_steps: u64,
    burn_in: u64,
    rng: &RngContract,
    theta0: f64,
) -> Result<PrueferOrbit> {
    if n_steps < 1 {
        return Err(Error::Config("an orbit needs at least one step".into()));
    }
    Ok(record(n_steps, |visit| {
        walk_physical(e, disorder, n_steps, burn_in, theta0, rng, visit)
    }))
}

/// Records an auxiliary-chain orbit.
pub fn run_hat_orbit(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    psi_law: &PsiLaw,
    n_steps: u64,
    burn_in: u64,
    rng: &RngContract,
    theta0: f64,
) -> Result<PrueferOrbit> {
    if n_steps < 1 {
        return Err(Error::Config("an orbit needs at least one step".into()));
    }
    psi_law.validate()?;
    Ok(record(n_steps, |visit| {
        walk_hat(e, law, psi_law, n_steps, burn_in, theta0, rng, visit)
    }))
}

/// Runs `f` on `replicas` derived sub-streams in parallel; results come back
/// in replica order.
pub(crate) fn over_replicas<T, F>(rng: &RngContract, replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngContract) -> T + Sync + Send,
{
    (0..replicas.max(1))
        .into_par_iter()
        .map(|r| f(rng.child(r)))
        .collect()
}

/// Kolmogorov-Smirnov distance between the sample (values in `[0, pi)`) and
/// the uniform law on `[0, pi)`. Sorts in place.
pub fn ks_distance_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = x / PI;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
