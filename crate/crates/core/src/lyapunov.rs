//! Lyapunov exponents: two Monte Carlo estimators for the physical chain,
//! the closed form for the auxiliary chain with uniform rotations, Monte
//! Carlo and spectral values for rational grids, and the Fourier
//! coefficients `a_m` of the averaged log-expansion.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harmonics::{self, HarmonicSolution};
use crate::model::{DisorderSpec, EnergyPoint, ImpurityLaw, RngContract, SiteSampler};
use crate::pruefer::{self, OrbitSettings, PsiLaw, StepRecord};
use crate::stats::{pool, BatchMeans, EstimateWithError, MIN_BATCHES};

/// Shortest orbit accepted by the Monte Carlo estimators.
pub const MIN_MC_STEPS: u64 = 10_000;

/// Agreement required between the two closed-form evaluations.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Telescopic,
    MatrixProduct,
    ClosedForm,
    HatChain,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub gamma: EstimateWithError,
    pub method: Method,
    /// Deterministic bound on the discarded part of a truncated expansion.
    pub truncation_error: Option<f64>,
    pub params: Value,
}

fn check_mc(settings: &OrbitSettings) -> Result<()> {
    if settings.n_steps < MIN_MC_STEPS {
        return Err(Error::Config(format!(
            "Monte Carlo estimates need at least {MIN_MC_STEPS} steps, got {}",
            settings.n_steps
        )));
    }
    if settings.n_batches < MIN_BATCHES {
        return Err(Error::Config(format!(
            "at least {MIN_BATCHES} batches are required, got {}",
            settings.n_batches
        )));
    }
    Ok(())
}

fn mc_params(e: &EnergyPoint, settings: &OrbitSettings, rng: &RngContract) -> Value {
    json!({
        "k": e.k(),
        "E": e.energy(),
        "n_steps": settings.n_steps,
        "burn_in": settings.burn_in,
        "theta0": settings.theta0,
        "replicas": settings.replicas.max(1),
        "seed": rng.master_seed,
        "stream": rng.stream_index,
    })
}

/// `gamma = (1/N) sum_n log |M T_{v_n} M^{-1} e_{theta_{n-1}}|` along the
/// modified Prüfer orbit.
pub fn gamma_mc_telescopic(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    settings: &OrbitSettings,
    rng: &RngContract,
) -> Result<LyapunovResult> {
    check_mc(settings)?;
    let per_replica = pruefer::over_replicas(rng, settings.replicas, |stream| {
        let mut bm = BatchMeans::new(settings.n_steps, settings.n_batches);
        pruefer::walk_physical(
            e,
            disorder,
            settings.n_steps,
            settings.burn_in,
            settings.theta0,
            &stream,
            |s: &StepRecord| bm.push(s.log_norm),
        );
        bm.finish()
    });
    let mut params = mc_params(e, settings, rng);
    params["rho"] = json!(disorder.rho());
    params["dist"] = json!(disorder.law().to_string());
    Ok(LyapunovResult {
        gamma: pool(&per_replica),
        method: Method::Telescopic,
        truncation_error: None,
        params,
    })
}

/// Largest `renorm_every` accepted by the matrix-product estimator.
pub const MAX_RENORM_EVERY: u32 = 50;

/// Direct product of the raw transfer matrices, renormalized by its
/// Frobenius norm every `renorm_every` steps. Potentials are drawn exactly as
/// in [`gamma_mc_telescopic`], so equal streams see equal chains.
pub fn gamma_mc_matrix_product(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    settings: &OrbitSettings,
    renorm_every: u32,
    rng: &RngContract,
) -> Result<LyapunovResult> {
    check_mc(settings)?;
    if !(1..=MAX_RENORM_EVERY).contains(&renorm_every) {
        return Err(Error::Config(format!(
            "renorm_every must lie in [1, {MAX_RENORM_EVERY}], got {renorm_every}"
        )));
    }
    let energy = e.energy();
    let diag: Vec<f64> = disorder.law().atoms().iter().map(|a| a.value - energy).collect();
    let worst = diag.iter().fold(energy.abs(), |m, x| m.max(x.abs()));
    // |T| <= sqrt(x^2 + 2) in Frobenius norm.
    let growth = renorm_every as f64 * (0.5 * (worst * worst + 2.0).ln());
    if growth > 700.0 {
        return Err(Error::Config(format!(
            "a block of {renorm_every} matrices may overflow (log-norm bound {growth:.0}); use a smaller renorm_every"
        )));
    }
    let sampler = SiteSampler::new(disorder.rho(), disorder.law());
    let n = settings.n_steps;
    let r = renorm_every as u64;
    let n_blocks = n.div_ceil(r);
    let per_replica = pruefer::over_replicas(rng, settings.replicas, |stream| {
        let mut gen = stream.rng();
        // Rows (a, b) and (c, d) of the running product P; T P has rows
        // (x a - c, x b - d) and (a, b).
        let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
        let step = |a: &mut f64, b: &mut f64, c: &mut f64, d: &mut f64, u: f64| {
            let x = match sampler.site(u) {
                None => -energy,
                Some(i) => diag[i],
            };
            let (na, nb) = (x * *a - *c, x * *b - *d);
            *c = *a;
            *d = *b;
            *a = na;
            *b = nb;
        };
        for _ in 0..settings.burn_in {
            step(&mut a, &mut b, &mut c, &mut d, gen.random::<f64>());
            let f = (a * a + b * b + c * c + d * d).sqrt();
            a /= f;
            b /= f;
            c /= f;
            d /= f;
        }
        if settings.burn_in > 0 {
            let f = (a * a + b * b + c * c + d * d).sqrt();
            // Restart from the normalized product so only later growth counts.
            let s = std::f64::consts::SQRT_2 / f;
            a *= s;
            b *= s;
            c *= s;
            d *= s;
        }
        let mut blocks = BatchMeans::new(n_blocks, settings.n_batches);
        let mut total = -0.5 * 2f64.ln();
        let mut done = 0u64;
        while done < n {
            let len = r.min(n - done);
            for _ in 0..len {
                step(&mut a, &mut b, &mut c, &mut d, gen.random::<f64>());
            }
            done += len;
            let f = (a * a + b * b + c * c + d * d).sqrt();
            a /= f;
            b /= f;
            c /= f;
            d /= f;
            let lf = f.ln();
            total += lf;
            blocks.push(lf / len as f64);
        }
        // The product starts at norm sqrt(2); `total` removes that offset.
        let per_block = blocks.finish();
        EstimateWithError {
            value: total / n as f64,
            std_error: per_block.std_error,
            n_samples: n,
            n_batches: per_block.n_batches,
        }
    });
    let mut params = mc_params(e, settings, rng);
    params["rho"] = json!(disorder.rho());
    params["dist"] = json!(disorder.law().to_string());
    params["renorm_every"] = json!(renorm_every);
    Ok(LyapunovResult {
        gamma: pool(&per_replica),
        method: Method::MatrixProduct,
        truncation_error: None,
        params,
    })
}

fn kick_square(e: &EnergyPoint, v: f64) -> f64 {
    let c = v / e.sin_k();
    c * c
}

/// Exponent of the auxiliary chain with uniformly distributed extra
/// rotations, where the phase law is uniform:
///
/// `(1/pi) int_0^pi log |(1 + P) e_theta| dtheta = 1/2 log(1 + a/4)
///  = log((sqrt(lambda) + 1/sqrt(lambda)) / 2)`,
///
/// summed over atoms. Both forms are evaluated and must agree.
pub fn gamma_hat_infinity(e: &EnergyPoint, law: &ImpurityLaw) -> Result<LyapunovResult> {
    let mut direct = 0.0;
    let mut via_lambda = 0.0;
    for atom in law.atoms() {
        let a = kick_square(e, atom.value);
        direct += atom.weight * 0.5 * (0.25 * a).ln_1p();
        let s = crate::sl2::expansion_eigenvalue(e, atom.value).sqrt();
        via_lambda += atom.weight * (0.5 * (s + s.recip())).ln();
    }
    if (direct - via_lambda).abs() > CLOSED_FORM_TOLERANCE * direct.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "closed forms disagree: {direct:e} vs {via_lambda:e}"
        )));
    }
    Ok(LyapunovResult {
        gamma: EstimateWithError::exact(direct),
        method: Method::ClosedForm,
        truncation_error: None,
        params: json!({ "k": e.k(), "E": e.energy(), "dist": law.to_string() }),
    })
}

/// `1/2 sum_i w_i log((1 + lambda_i^2) / (2 lambda_i)) = 1/2 sum_i w_i log(1 + a_i/2)`:
/// half the log of the phase-averaged squared expansion. By Jensen's
/// inequality it bounds [`gamma_hat_infinity`] from above.
pub fn log_mean_square_expansion(e: &EnergyPoint, law: &ImpurityLaw) -> f64 {
    law.atoms()
        .iter()
        .map(|atom| {
            let lambda = crate::sl2::expansion_eigenvalue(e, atom.value);
            atom.weight * 0.5 * ((1.0 + lambda * lambda) / (2.0 * lambda)).ln()
        })
        .sum()
}

/// Monte Carlo exponent of the auxiliary chain with the given rotation law.
pub fn gamma_hat_mc(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    psi_law: &PsiLaw,
    settings: &OrbitSettings,
    rng: &RngContract,
) -> Result<LyapunovResult> {
    check_mc(settings)?;
    psi_law.validate()?;
    let per_replica = pruefer::over_replicas(rng, settings.replicas, |stream| {
        let mut bm = BatchMeans::new(settings.n_steps, settings.n_batches);
        pruefer::walk_hat(
            e,
            law,
            psi_law,
            settings.n_steps,
            settings.burn_in,
            settings.theta0,
            &stream,
            |s: &StepRecord| bm.push(s.log_norm),
        );
        bm.finish()
    });
    let mut params = mc_params(e, settings, rng);
    params["dist"] = json!(law.to_string());
    params["psi_law"] = serde_json::to_value(psi_law).unwrap_or(Value::Null);
    Ok(LyapunovResult {
        gamma: pool(&per_replica),
        method: Method::HatChain,
        truncation_error: None,
        params,
    })
}

/// [`gamma_hat_mc`] with the rotation grid `{pi j / q}`.
pub fn gamma_hat_q_mc(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    q: u32,
    settings: &OrbitSettings,
    rng: &RngContract,
) -> Result<LyapunovResult> {
    if q < 2 {
        return Err(Error::Config(format!("q must be at least 2, got {q}")));
    }
    let mut r = gamma_hat_mc(e, law, &PsiLaw::grid(q), settings, rng)?;
    r.params["q"] = json!(q);
    Ok(r)
}

/// Coefficients `a_m = (1/pi) int_0^pi e^{-2 i m theta} f(theta) dtheta` of
/// the averaged log-expansion `f`, with a fitted envelope `c e^{-xi |m|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub m_max: usize,
    /// `coeffs[m + m_max] = a_m`.
    pub coeffs: Vec<Complex64>,
    pub n_grid: usize,
    /// Envelope `(c, xi)` fitted to the coefficients above [`FIT_FLOOR`];
    /// `None` when fewer than two coefficients qualify.
    pub envelope: Option<(f64, f64)>,
}

/// Coefficients below this magnitude are treated as quadrature noise.
pub const FIT_FLOOR: f64 = 1e-13;

impl FourierCoeffs {
    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(m + self.m_max as i64) as usize]
    }
}

/// `f(theta) = sum_i w_i log |(1 + P_i) e_theta|` on the grid `pi j / n`.
fn log_expansion_grid(e: &EnergyPoint, law: &ImpurityLaw, n_grid: usize) -> Vec<Complex64> {
    (0..n_grid)
        .map(|j| {
            let theta = std::f64::consts::PI * j as f64 / n_grid as f64;
            let f: f64 = law
                .atoms()
                .iter()
                .map(|a| a.weight * pruefer::log_norm(e, a.value, theta))
                .sum();
            Complex64::new(f, 0.0)
        })
        .collect()
}

/// Least-squares slope of `log |a_m|` against `m`, then the smallest `c`
/// making the envelope hold for every fitted coefficient.
fn fit_envelope(abs: &[(f64, f64)]) -> Option<(f64, f64)> {
    if abs.len() < 2 {
        return None;
    }
    let n = abs.len() as f64;
    let mx = abs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = abs.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = abs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = abs.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let xi = -sxy / sxx;
    let c = abs
        .iter()
        .map(|&(m, a)| a * (xi * m).exp())
        .fold(0.0, f64::max);
    Some((c, xi))
}

pub fn fourier_a(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    m_max: usize,
    n_grid: usize,
) -> Result<FourierCoeffs> {
    if !n_grid.is_power_of_two() || n_grid < 8 * m_max.max(1) {
        return Err(Error::Config(format!(
            "quadrature grid must be a power of two of at least {} points, got {n_grid}",
            8 * m_max.max(1)
        )));
    }
    let mut planner = FftPlanner::new();
    let spec = harmonics::spectrum(&mut planner, log_expansion_grid(e, law, n_grid));
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m_max + 1];
    coeffs[m_max] = Complex64::new(spec[0].re, 0.0);
    // The DFT index m carries e^{-2 i m theta_j}: exactly a_m.
    for m in 1..=m_max {
        let a = harmonics::coefficient(&spec, m as i64);
        coeffs[m_max + m] = a;
        coeffs[m_max - m] = a.conj();
    }
    let fitted: Vec<(f64, f64)> = (1..=m_max)
        .map(|m| (m as f64, coeffs[m_max + m].norm()))
        .filter(|p| p.1 > FIT_FLOOR)
        .collect();
    Ok(FourierCoeffs {
        m_max,
        coeffs,
        n_grid,
        envelope: fit_envelope(&fitted),
    })
}

fn grid_for(needed: usize, requested: usize) -> usize {
    requested.max(8 * needed).next_power_of_two()
}

/// `gamma_hat_q = Re sum_{|n| <= n_max} a_{nq} J_n` with the harmonics `J_n` of
/// the invariant phase law from the truncated linear system.
///
/// The reported truncation error is the larger of `2 |a_{(n_max+1) q}|` and
/// the change against the same sum at half the system size.
pub fn gamma_hat_q_spectral(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    q: u32,
    n_max: usize,
    m_max: usize,
    n_grid: usize,
) -> Result<LyapunovResult> {
    if q < 1 {
        return Err(Error::Config("q must be positive".into()));
    }
    let qn = q as usize;
    if n_max * qn > m_max {
        return Err(Error::Config(format!(
            "n_max * q = {} exceeds m_max = {m_max}",
            n_max * qn
        )));
    }
    let a = fourier_a(e, law, m_max + qn, grid_for(m_max + qn, n_grid))?;
    let params = json!({
        "k": e.k(), "E": e.energy(), "dist": law.to_string(),
        "q": q, "n_max": n_max, "m_max": m_max,
    });
    if n_max == 0 {
        return Ok(LyapunovResult {
            gamma: EstimateWithError::exact(a.get(0).re),
            method: Method::Spectral,
            truncation_error: Some(2.0 * a.get(qn as i64).norm()),
            params,
        });
    }
    let pair = |n: usize| -> Result<(f64, HarmonicSolution)> {
        let l_max = 2 * n * qn;
        let grid = grid_for(n * qn + l_max, n_grid);
        let j = harmonics::solve_harmonic_system(e, law, q, n, l_max, grid)?;
        let g: f64 = (-(n as i64)..=n as i64)
            .map(|i| (a.get(i * q as i64) * j.get(i)).re)
            .sum();
        Ok((g, j))
    };
    let (gamma, solution) = pair(n_max)?;
    let tail = 2.0 * a.get(((n_max + 1) * qn) as i64).norm();
    let halving = if n_max >= 2 {
        (gamma - pair(n_max / 2)?.0).abs()
    } else {
        0.0
    };
    let mut params = params;
    params["condition"] = json!(solution.condition);
    params["residual"] = json!(solution.residual);
    Ok(LyapunovResult {
        gamma: EstimateWithError::exact(gamma),
        method: Method::Spectral,
        truncation_error: Some(tail.max(halving)),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn point(k: f64) -> EnergyPoint {
        EnergyPoint::from_k(k).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let e = point(PI / 2.0);
        let g = |atoms: &str| gamma_hat_infinity(&e, &ImpurityLaw::parse(atoms).unwrap()).unwrap().gamma.value;
        assert_eq!(g("0:1"), 0.0);
        assert!((g("2:1") - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((g("1:1") - 0.5 * 1.25f64.ln()).abs() < 1e-15);
        let law = ImpurityLaw::dirac(2.0).unwrap();
        assert!((log_mean_square_expansion(&e, &law) - 0.5 * 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_agree_on_wide_range() {
        for i in 0..200 {
            let k = 1e-3f64.asin() + (PI - 2.0 * 1e-3f64.asin()) * i as f64 / 199.0;
            let e = point(k);
            for v in [-1e3, -37.0, -1.0, -1e-4, 1e-8, 0.3, 2.0, 950.0] {
                gamma_hat_infinity(&e, &ImpurityLaw::dirac(v).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn fourier_zeroth_matches_closed_form() {
        for (k, atoms) in [(0.4, "2:1"), (PI / 2.0, "1:1"), (2.5, "3:1,-1:2")] {
            let e = point(k);
            let law = ImpurityLaw::parse(atoms).unwrap();
            let a = fourier_a(&e, &law, 32, 1024).unwrap();
            let g = gamma_hat_infinity(&e, &law).unwrap().gamma.value;
            assert!((a.get(0).re - g).abs() < 1e-10);
            assert_eq!(a.get(0).im, 0.0);
        }
    }

    #[test]
    fn fourier_single_atom_modulus() {
        // For one atom |a_m| = beta^m / (2m), beta = (lambda - 1) / (lambda + 1).
        let e = point(1.1);
        let law = ImpurityLaw::dirac(1.7).unwrap();
        let lambda = crate::sl2::expansion_eigenvalue(&e, 1.7);
        let beta = (lambda - 1.0) / (lambda + 1.0);
        let a = fourier_a(&e, &law, 16, 512).unwrap();
        for m in 1..=16i64 {
            let expected = beta.powi(m as i32) / (2.0 * m as f64);
            assert!((a.get(m).norm() - expected).abs() < 1e-12, "m = {m}");
        }
        let (c, xi) = a.envelope.unwrap();
        assert!(xi > 0.0 && c > 0.0);
        assert!((xi + beta.ln()).abs() < 0.2);
    }

    #[test]
    fn fourier_grid_doubling_is_stable() {
        let e = point(0.9);
        let law = ImpurityLaw::parse("2:1,0.5:1").unwrap();
        let a = fourier_a(&e, &law, 24, 256).unwrap();
        let b = fourier_a(&e, &law, 24, 512).unwrap();
        for m in -24..=24 {
            assert!((a.get(m) - b.get(m)).norm() < 1e-10);
        }
        assert!(fourier_a(&e, &law, 24, 100).is_err());
    }

    #[test]
    fn trivial_disorder_gives_zero() {
        let e = point(0.7);
        let d = crate::model::parse_disorder("2:1", 0.0).unwrap();
        let s = OrbitSettings { n_steps: 20_000, burn_in: 100, ..OrbitSettings::default() };
        let r = gamma_mc_telescopic(&e, &d, &s, &RngContract::new(1, 0)).unwrap();
        assert_eq!(r.gamma.value, 0.0);
        assert_eq!(r.gamma.std_error, 0.0);
        let zero = ImpurityLaw::dirac(0.0).unwrap();
        let r = gamma_hat_q_mc(&e, &zero, 3, &s, &RngContract::new(1, 0)).unwrap();
        assert_eq!(r.gamma.value, 0.0);
        let r = gamma_hat_q_spectral(&point(PI / 3.0), &zero, 3, 4, 12, 256).unwrap();
        assert_eq!(r.gamma.value, 0.0);
        let mp = gamma_mc_matrix_product(&e, &d, &s, 10, &RngContract::new(1, 0)).unwrap();
        assert!(mp.gamma.value.abs() < 1e-3);
    }

    #[test]
    fn estimators_agree() {
        let e = point(1.0);
        let d = crate::model::parse_disorder("1.5:1,-1:1", 0.3).unwrap();
        let s = OrbitSettings::with_steps(200_000);
        let rng = RngContract::new(9, 2);
        let t = gamma_mc_telescopic(&e, &d, &s, &rng).unwrap();
        for r in [1, 7, 20] {
            let m = gamma_mc_matrix_product(&e, &d, &s, r, &rng).unwrap();
            assert!(t.gamma.z_score(&m.gamma) < 3.0, "{t:?} {m:?}");
        }
        assert!(gamma_mc_matrix_product(&e, &d, &s, 0, &rng).is_err());
        assert!(gamma_mc_matrix_product(&e, &d, &s, 51, &rng).is_err());
        let big = crate::model::parse_disorder("1e20:1", 0.3).unwrap();
        assert!(matches!(
            gamma_mc_matrix_product(&e, &big, &s, 50, &rng),
            Err(Error::Config(_))
        ));
        let short = OrbitSettings::with_steps(100);
        assert!(gamma_mc_telescopic(&e, &d, &short, &rng).is_err());
    }

    #[test]
    fn spectral_with_no_harmonics_is_a0() {
        let e = point(PI / 2.0);
        let law = ImpurityLaw::dirac(2.0).unwrap();
        let r = gamma_hat_q_spectral(&e, &law, 2, 0, 8, 256).unwrap();
        assert!((r.gamma.value - 0.5 * 2f64.ln()).abs() < 1e-12);
    }
}
