//! Integrated density of states, normalized so the clean chain gives `k`:
//! rotation number of the Prüfer phase, eigenvalue counting on finite boxes
//! and the first-order low-density prediction.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics;
use crate::model::{DisorderSpec, EnergyPoint, ImpurityLaw, RngContract, SiteSampler};
use crate::pruefer::{self, OrbitSettings, PsiLaw, StepRecord};
use crate::stats::{mean_with_error, pool, BatchMeans, EstimateWithError, MIN_BATCHES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DosMethod {
    Rotation,
    Eigencount,
    LowdensityPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosResult {
    /// `value.value` lies in `[0, pi]`.
    pub value: EstimateWithError,
    pub method: DosMethod,
}

/// Mean phase increment along a physical-chain orbit.
pub fn dos_rotation(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    settings: &OrbitSettings,
    rng: &RngContract,
) -> Result<DosResult> {
    if settings.n_steps < crate::lyapunov::MIN_MC_STEPS {
        return Err(Error::Config(format!(
            "rotation numbers need at least {} steps",
            crate::lyapunov::MIN_MC_STEPS
        )));
    }
    if settings.n_batches < MIN_BATCHES {
        return Err(Error::Config(format!("at least {MIN_BATCHES} batches are required")));
    }
    let k = e.k();
    let per_replica = pruefer::over_replicas(rng, settings.replicas, |stream| {
        // Centered on k so the clean chain returns k exactly.
        let mut bm = BatchMeans::new(settings.n_steps, settings.n_batches);
        pruefer::walk_physical(
            e,
            disorder,
            settings.n_steps,
            settings.burn_in,
            settings.theta0,
            &stream,
            |s: &StepRecord| bm.push(s.increment - k),
        );
        bm.finish()
    });
    let mut value = pool(&per_replica);
    value.value += k;
    Ok(DosResult {
        value,
        method: DosMethod::Rotation,
    })
}

/// Number of eigenvalues below `shift` of the symmetric tridiagonal matrix
/// with the given diagonal and off-diagonal, from the signs of the pivots
/// `d_i = (a_i - shift) - b_{i-1}^2 / d_{i-1}`. Pivots smaller than
/// `pivmin` in magnitude are replaced by `-pivmin`.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], shift: f64) -> usize {
    assert_eq!(offdiag.len() + 1, diag.len().max(1), "off-diagonal length mismatch");
    let max_b2 = offdiag.iter().fold(1.0f64, |m, b| m.max(b * b));
    let pivmin = f64::MIN_POSITIVE * max_b2;
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        d = if i == 0 {
            a - shift
        } else {
            (a - shift) - offdiag[i - 1] * offdiag[i - 1] / d
        };
        if d.abs() <= pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest size accepted by [`jacobi_eigenvalues`].
pub const JACOBI_MAX_N: usize = 64;

/// Eigenvalues (ascending) of a dense symmetric matrix by cyclic Jacobi
/// rotations.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if n > JACOBI_MAX_N {
        return Err(Error::Config(format!(
            "dense eigensolver is limited to n <= {JACOBI_MAX_N}, got {n}"
        )));
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Config("matrix is not square".into()));
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                for j in 0..n {
                    let (x, y) = (a[p][j], a[q][j]);
                    a[p][j] = c * x - s * y;
                    a[q][j] = s * x + c * y;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Draws one potential realization of length `n`.
pub fn sample_potential(disorder: &DisorderSpec, n: usize, rng: &RngContract) -> Vec<f64> {
    let sampler = SiteSampler::new(disorder.rho(), disorder.law());
    let atoms = disorder.law().atoms();
    let mut gen = rng.rng();
    (0..n)
        .map(|_| sampler.site(gen.random::<f64>()).map_or(0.0, |i| atoms[i].value))
        .collect()
}

/// `pi * #{eigenvalues of H below E} / N` for the restriction of `H` to a
/// box of `N` sites, averaged over `replicas` independent realizations.
pub fn dos_eigencount(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    box_size: usize,
    replicas: u64,
    rng: &RngContract,
) -> Result<DosResult> {
    if box_size < 2 {
        return Err(Error::Config(format!("box size must be at least 2, got {box_size}")));
    }
    let offdiag = vec![-1.0; box_size - 1];
    let values = pruefer::over_replicas(rng, replicas, |stream| {
        let v = sample_potential(disorder, box_size, &stream);
        let count = sturm_count(&v, &offdiag, e.energy());
        std::f64::consts::PI * count as f64 / box_size as f64
    });
    Ok(DosResult {
        value: mean_with_error(&values),
        method: DosMethod::Eigencount,
    })
}

/// `phi(theta) = E_v (S_{E,v}(theta) - theta)`.
pub fn mean_phase_shift(e: &EnergyPoint, law: &ImpurityLaw, theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let kicks: f64 = law
        .atoms()
        .iter()
        .map(|a| a.weight * pruefer::kick(a.value / e.sin_k(), sin, cos))
        .sum();
    e.k() + kicks
}

/// How the phase average of `phi` is taken in [`dos_lowdensity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAverage {
    /// Uniform phase law, trapezoidal sum on `n_grid` points of `[0, pi)`.
    Lebesgue { n_grid: usize },
    /// Empirical law of an auxiliary-chain orbit with the rotation grid of `q`.
    HatOrbit {
        q: u32,
        settings: OrbitSettings,
        rng: RngContract,
    },
    /// Fourier series of `phi` paired with the harmonics `J_n` of the
    /// truncated system.
    Harmonic { q: u32, n_max: usize, n_grid: usize },
}

/// `(1 - rho) k + rho <phi>` with the phase average chosen by `average`.
pub fn dos_lowdensity(
    e: &EnergyPoint,
    disorder: &DisorderSpec,
    average: &PhaseAverage,
) -> Result<DosResult> {
    let law = disorder.law();
    let mean = match average {
        PhaseAverage::Lebesgue { n_grid } => {
            if *n_grid < 8 {
                return Err(Error::Config("quadrature grid needs at least 8 points".into()));
            }
            let sum: f64 = (0..*n_grid)
                .map(|j| {
                    let theta = std::f64::consts::PI * j as f64 / *n_grid as f64;
                    mean_phase_shift(e, law, theta) - e.k()
                })
                .sum();
            EstimateWithError::exact(e.k() + sum / *n_grid as f64)
        }
        PhaseAverage::HatOrbit { q, settings, rng } => {
            if *q < 2 {
                return Err(Error::Config(format!("the rotation grid needs q >= 2, got {q}")));
            }
            let psi = PsiLaw::grid(*q);
            let per_replica = pruefer::over_replicas(rng, settings.replicas, |stream| {
                let mut bm = BatchMeans::new(settings.n_steps, settings.n_batches);
                pruefer::walk_hat(
                    e,
                    law,
                    &psi,
                    settings.n_steps,
                    settings.burn_in,
                    settings.theta0,
                    &stream,
                    |s: &StepRecord| bm.push(mean_phase_shift(e, law, s.after) - e.k()),
                );
                bm.finish()
            });
            let mut m = pool(&per_replica);
            m.value += e.k();
            m
        }
        PhaseAverage::Harmonic { q, n_max, n_grid } => {
            if *q < 2 {
                return Err(Error::Config(format!("the rotation grid needs q >= 2, got {q}")));
            }
            let qn = *q as usize;
            let top = n_max * qn;
            let grid = (*n_grid).max(8 * (top + 2 * top).max(1)).next_power_of_two();
            let samples: Vec<Complex64> = (0..grid)
                .map(|j| {
                    let theta = std::f64::consts::PI * j as f64 / grid as f64;
                    Complex64::new(mean_phase_shift(e, law, theta) - e.k(), 0.0)
                })
                .collect();
            let spec = harmonics::spectrum(&mut FftPlanner::new(), samples);
            let mut shift = spec[0].re;
            if *n_max > 0 {
                let j = harmonics::solve_harmonic_system(e, law, *q, *n_max, 2 * top, grid)?;
                for n in -(*n_max as i64)..=*n_max as i64 {
                    if n != 0 {
                        shift += (harmonics::coefficient(&spec, n * *q as i64) * j.get(n)).re;
                    }
                }
            }
            EstimateWithError::exact(e.k() + shift)
        }
    };
    let rho = disorder.rho();
    Ok(DosResult {
        value: EstimateWithError {
            value: (1.0 - rho) * e.k() + rho * mean.value,
            std_error: rho * mean.std_error,
            ..mean
        },
        method: DosMethod::LowdensityPrediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_disorder;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    #[test]
    fn clean_rotation_is_k() {
        let e = EnergyPoint::from_k(0.77).unwrap();
        let d = parse_disorder("2:1", 0.0).unwrap();
        let r = dos_rotation(&e, &d, &OrbitSettings::with_steps(50_000), &RngContract::new(3, 0)).unwrap();
        assert_eq!(r.value.value, 0.77);
        assert_eq!(r.value.std_error, 0.0);
    }

    #[test]
    fn free_chain_count_at_band_center() {
        let e = EnergyPoint::from_energy(0.0).unwrap();
        let d = parse_disorder("2:1", 0.0).unwrap();
        for n in [2, 10, 64, 1000] {
            let r = dos_eigencount(&e, &d, n, 1, &RngContract::new(0, 0)).unwrap();
            assert!((r.value.value - PI / 2.0).abs() < 1e-15, "n = {n}");
        }
        assert!(dos_eigencount(&e, &d, 1, 1, &RngContract::new(0, 0)).is_err());
    }

    #[test]
    fn jacobi_on_free_chain() {
        let n = 12;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            m[i][i + 1] = -1.0;
            m[i + 1][i] = -1.0;
        }
        let eig = jacobi_eigenvalues(&m).unwrap();
        for (j, x) in eig.iter().enumerate() {
            let exact = -2.0 * (PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((x - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn sturm_matches_dense_counts() {
        let mut gen = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = gen.random_range(1..=40usize);
            let diag: Vec<f64> = (0..n).map(|_| gen.random_range(-3.0..3.0)).collect();
            let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| gen.random_range(-2.0..2.0)).collect();
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                m[i][i] = diag[i];
                if i + 1 < n {
                    m[i][i + 1] = off[i];
                    m[i + 1][i] = off[i];
                }
            }
            let eig = jacobi_eigenvalues(&m).unwrap();
            let shift = gen.random_range(-4.0..4.0);
            let dense = eig.iter().filter(|&&x| x < shift).count();
            assert_eq!(sturm_count(&diag, &off, shift), dense);
        }
    }

    #[test]
    fn zero_pivot_is_guarded() {
        // d_1 = 0 exactly; the guard counts it as negative.
        assert_eq!(sturm_count(&[1.0, 1.0], &[1.0], 1.0), 1);
    }

    #[test]
    fn phase_shift_properties() {
        let e = EnergyPoint::from_k(1.2).unwrap();
        let law = ImpurityLaw::parse("2:1,-0.5:3").unwrap();
        assert!((mean_phase_shift(&e, &law, PI / 2.0) - 1.2).abs() < 1e-15);
        for i in 0..50 {
            let t = -3.0 + 0.13 * i as f64;
            assert!((mean_phase_shift(&e, &law, t + PI) - mean_phase_shift(&e, &law, t)).abs() < 1e-12);
        }
        let zero = ImpurityLaw::dirac(0.0).unwrap();
        assert_eq!(mean_phase_shift(&e, &zero, 0.4), 1.2);
    }

    #[test]
    fn lowdensity_trivial_cases() {
        let e = EnergyPoint::from_rational(1, 3).unwrap();
        let clean = parse_disorder("2:1", 0.0).unwrap();
        let zero = parse_disorder("0:1", 0.4).unwrap();
        for d in [&clean, &zero] {
            for avg in [
                PhaseAverage::Lebesgue { n_grid: 256 },
                PhaseAverage::Harmonic { q: 3, n_max: 4, n_grid: 512 },
            ] {
                let r = dos_lowdensity(&e, d, &avg).unwrap();
                assert!((r.value.value - e.k()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn harmonic_and_orbit_averages_agree() {
        let e = EnergyPoint::from_rational(1, 3).unwrap();
        let d = parse_disorder("2:1", 1.0).unwrap();
        let h = dos_lowdensity(&e, &d, &PhaseAverage::Harmonic { q: 3, n_max: 32, n_grid: 4096 }).unwrap();
        let o = dos_lowdensity(
            &e,
            &d,
            &PhaseAverage::HatOrbit {
                q: 3,
                settings: OrbitSettings::with_steps(400_000),
                rng: RngContract::new(5, 0),
            },
        )
        .unwrap();
        assert!((h.value.value - o.value.value).abs() < 3.0 * o.value.std_error + 2e-3, "{h:?} {o:?}");
    }
}
