//! Acceptance suite. Each criterion returns a [`CriterionReport`]; the
//! reports are collected into a machine-readable [`Verdict`].
//!
//! Bounds marked "frozen" below were measured once with
//! `cargo run --release --example calibrate` at densities or seeds that the
//! criteria themselves do not use.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dos::{self, PhaseAverage};
use crate::error::{Error, Result};
use crate::experiment::{self, central_numerator, Command, KGrid, RunConfig};
use crate::harmonics;
use crate::lyapunov;
use crate::model::{Atom, DisorderSpec, EnergyPoint, ImpurityLaw, RngContract};
use crate::pruefer::{self, OrbitSettings, PsiLaw};
use crate::stats::EstimateWithError;

/// Frozen: `max_m |I_m| / rho` for `m in {1, 2, 4, 5}` at `k = pi/3` was
/// 0.483 at `rho = 0.1`.
pub const HARMONIC_BOUND: f64 = 0.5;

/// Frozen: `|gamma/rho - gamma_hat_q| / rho` at `rho = 0.1` was 0.096 and
/// 0.110 on two seeds (q = 3), below 0.01 for q = 2. Noise is about 0.007.
pub const RATIONAL_SLOPE: f64 = 0.12;

/// Frozen: `|N_rot - N_pred| / rho^2` at `rho in {0.2, 0.4}` was at most 0.39
/// (golden mean, uniform phase law).
pub const DOS_CURVATURE_GENERIC: f64 = 0.4;

/// Frozen: same quantity at `k = pi/3` with the grid phase law, at most 0.28.
pub const DOS_CURVATURE_RATIONAL: f64 = 0.3;

/// Boundary allowance `c` in `|N_rot - N_eig| <= pi c / N`.
pub const BOX_BOUNDARY_C: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] C{:02} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: Suite,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

/// Function under test for the closed form; swappable so a tampered value
/// can be shown to fail the suite.
pub type ClosedForm = fn(&EnergyPoint, &ImpurityLaw) -> Result<f64>;

fn closed_form(e: &EnergyPoint, law: &ImpurityLaw) -> Result<f64> {
    Ok(lyapunov::gamma_hat_infinity(e, law)?.gamma.value)
}

#[derive(Debug, Clone, Copy)]
pub struct Verifier {
    pub suite: Suite,
    pub seed: u64,
    pub gamma_hat_infinity: ClosedForm,
}

pub const CRITERIA: u8 = 12;

fn golden_k() -> f64 {
    PI * (5f64.sqrt() - 1.0) / 2.0
}

fn delta(v: f64) -> ImpurityLaw {
    ImpurityLaw::dirac(v).expect("finite atom")
}

fn report(id: u8, title: &str, passed: bool, summary: String, metrics: Value) -> CriterionReport {
    CriterionReport {
        id,
        title: title.into(),
        passed,
        summary,
        metrics,
    }
}

/// Weighted least squares `y = a + b x`; returns `(a, b, se_a)`.
fn linear_fit(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, se) in points {
        let w = 1.0 / (se * se);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    (a, b, (sxx / det).sqrt())
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl Verifier {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            seed,
            gamma_hat_infinity: closed_form,
        }
    }

    /// Orbit length: the stated length for the full suite, a tenth of it
    /// for the fast one.
    fn steps(&self, full: u64) -> u64 {
        match self.suite {
            Suite::Full => full,
            Suite::Fast => (full / 10).max(lyapunov::MIN_MC_STEPS),
        }
    }

    fn settings(&self, full: u64) -> OrbitSettings {
        OrbitSettings {
            n_steps: self.steps(full),
            ..OrbitSettings::default()
        }
    }

    fn rng(&self, criterion: u64, stream: u64) -> RngContract {
        RngContract::new(self.seed, criterion).child(stream)
    }

    pub fn run(&self, id: u8) -> CriterionReport {
        let outcome = match id {
            1 => self.c01_closed_form_anchor(),
            2 => self.c02_fourier_consistency(),
            3 => self.c03_uniform_phase_law(),
            4 => self.c04_diophantine_branch(),
            5 => self.c05_rational_branch(),
            6 => self.c06_anomaly_decay(),
            7 => self.c07_harmonic_structure(),
            8 => self.c08_hat_identity(),
            9 => self.c09_dos_anchors(),
            10 => self.c10_estimator_equivalence(),
            11 => self.c11_band_center_linearity(),
            12 => self.c12_determinism(),
            _ => Err(Error::Config(format!("no criterion {id}"))),
        };
        outcome.unwrap_or_else(|e| report(id, "error", false, e.to_string(), Value::Null))
    }

    pub fn run_all(&self) -> Verdict {
        let criteria: Vec<CriterionReport> = (1..=CRITERIA).map(|id| self.run(id)).collect();
        Verdict {
            suite: self.suite,
            passed: criteria.iter().all(|c| c.passed),
            criteria,
        }
    }

    fn c01_closed_form_anchor(&self) -> Result<CriterionReport> {
        let e = EnergyPoint::from_energy(0.0)?;
        // Exact algebra: lambda = 3 + 2 sqrt 2 (v = 2) and (3 + sqrt 5)/2 (v = 1)
        // give (1 + lambda^2) / (2 lambda) = 3 and 3/2.
        let cases = [
            (2.0, 3.0 + 2.0 * 2f64.sqrt(), 0.5 * 3f64.ln()),
            (1.0, (3.0 + 5f64.sqrt()) / 2.0, 0.5 * 1.5f64.ln()),
        ];
        let mut passed = true;
        let mut rows = Vec::new();
        for (v, lambda, target) in cases {
            let algebra = 0.5 * ((1.0 + lambda * lambda) / (2.0 * lambda)).ln();
            let got = (self.gamma_hat_infinity)(&e, &delta(v))?;
            let printed = lyapunov::log_mean_square_expansion(&e, &delta(v));
            let ok = (got - target).abs() <= 1e-12 && (algebra - target).abs() <= 1e-12;
            passed &= ok;
            rows.push(json!({
                "v": v, "target": target, "gamma_hat_inf": got,
                "half_log_mean_square": printed, "lambda_algebra": algebra,
            }));
        }
        let summary = format!(
            "gamma_hat_inf(E=0) = {:.10} (v=2), {:.10} (v=1); targets 0.5493061443, 0.2027325541",
            rows[0]["gamma_hat_inf"].as_f64().unwrap_or(f64::NAN),
            rows[1]["gamma_hat_inf"].as_f64().unwrap_or(f64::NAN)
        );
        Ok(report(1, "closed-form anchor", passed, summary, json!(rows)))
    }

    fn c02_fourier_consistency(&self) -> Result<CriterionReport> {
        let mut gen = ChaCha8Rng::seed_from_u64(self.rng(2, 0).task_seed());
        let mut worst_a0: f64 = 0.0;
        let mut min_xi = f64::INFINITY;
        let mut envelope_ok = true;
        let mut cases = Vec::new();
        for _ in 0..10 {
            let k = gen.random_range(0.2..PI - 0.2);
            let n_atoms = gen.random_range(1..=3usize);
            let atoms: Vec<Atom> = (0..n_atoms)
                .map(|_| Atom {
                    value: gen.random_range(-3.0..3.0),
                    weight: gen.random_range(0.1..1.0),
                })
                .collect();
            let law = ImpurityLaw::new(atoms)?;
            let e = EnergyPoint::from_k(k)?;
            let a = lyapunov::fourier_a(&e, &law, 64, 1024)?;
            let g = (self.gamma_hat_infinity)(&e, &law)?;
            let d = (a.get(0).re - g).abs();
            worst_a0 = worst_a0.max(d);
            match a.envelope {
                Some((c, xi)) => {
                    min_xi = min_xi.min(xi);
                    for m in 1..=64i64 {
                        let am = a.get(m).norm();
                        if am > lyapunov::FIT_FLOOR && am > c * (-xi * m as f64).exp() * (1.0 + 1e-12) {
                            envelope_ok = false;
                        }
                    }
                }
                None => envelope_ok = false,
            }
            cases.push(json!({ "k": k, "dist": law.to_string(), "a0_minus_gamma": d, "envelope": a.envelope }));
        }
        let passed = worst_a0 <= 1e-10 && min_xi > 0.0 && envelope_ok;
        Ok(report(
            2,
            "Fourier consistency",
            passed,
            format!("max |a0 - gamma_hat_inf| = {worst_a0:.2e}, min fitted xi = {min_xi:.3}, envelope holds: {envelope_ok}"),
            json!(cases),
        ))
    }

    fn c03_uniform_phase_law(&self) -> Result<CriterionReport> {
        let e = EnergyPoint::from_energy(0.0)?;
        let law = delta(2.0);
        let settings = self.settings(1_000_000);
        let g = (self.gamma_hat_infinity)(&e, &law)?;
        let mc = lyapunov::gamma_hat_mc(&e, &law, &PsiLaw::Uniform, &settings, &self.rng(3, 0))?;
        let z = mc.gamma.z_score(&EstimateWithError::exact(g));
        let mut phases = experiment::reduced_hat_phases(&e, &law, &PsiLaw::Uniform, &settings, &self.rng(3, 1))?;
        let ks = pruefer::ks_distance_uniform(&mut phases);
        Ok(report(
            3,
            "uniform-phase law",
            z <= 3.0 && ks <= 0.01,
            format!(
                "hat MC {:.5} +- {:.5} vs gamma_hat_inf {g:.5} ({z:.2} sigma), KS = {ks:.4}",
                mc.gamma.value, mc.gamma.std_error
            ),
            json!({ "mc": mc.gamma, "gamma_hat_inf": g, "z": z, "ks": ks }),
        ))
    }

    fn c04_diophantine_branch(&self) -> Result<CriterionReport> {
        let e = EnergyPoint::from_k(golden_k())?;
        let law = delta(2.0);
        let g = (self.gamma_hat_infinity)(&e, &law)?;
        let settings = self.settings(10_000_000);
        let mut points = Vec::new();
        for (i, rho) in [0.1, 0.05, 0.025].into_iter().enumerate() {
            let d = DisorderSpec::new(rho, law.clone())?;
            let r = lyapunov::gamma_mc_telescopic(&e, &d, &settings, &self.rng(4, i as u64))?;
            points.push((rho, r.gamma.value / rho, r.gamma.std_error / rho));
        }
        let (a, b, se_a) = linear_fit(&points);
        let intercept_ok = (a - g).abs() <= 3.0 * se_a;
        // Residuals shrink with rho up to noise.
        let resid: Vec<f64> = points.iter().map(|p| (p.1 - g).abs()).collect();
        let trend_ok = (1..points.len())
            .all(|i| resid[i] <= resid[i - 1] + 3.0 * points[i].2.hypot(points[i - 1].2));
        let fit_ok = points
            .iter()
            .all(|&(x, y, se)| (y - (a + b * x)).abs() <= 3.0 * se);
        Ok(report(
            4,
            "Diophantine branch",
            intercept_ok && trend_ok && fit_ok,
            format!(
                "gamma/rho = {} ; fit intercept {a:.5} +- {se_a:.5} vs gamma_hat_inf {g:.5}",
                points
                    .iter()
                    .map(|p| format!("{:.5}+-{:.5}", p.1, p.2))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            json!({ "points": points, "intercept": a, "slope": b, "intercept_se": se_a, "gamma_hat_inf": g }),
        ))
    }

    fn c05_rational_branch(&self) -> Result<CriterionReport> {
        let law = delta(2.0);
        let settings = self.settings(10_000_000);
        let rho = 0.025;
        let mut passed = true;
        let mut parts = Vec::new();
        let mut metrics = Vec::new();
        for (i, q) in [2u32, 3].into_iter().enumerate() {
            let e = EnergyPoint::from_rational(1, q)?;
            let g_inf = (self.gamma_hat_infinity)(&e, &law)?;
            let n_max = 128;
            let sp = lyapunov::gamma_hat_q_spectral(&e, &law, q, n_max, n_max * q as usize, 1024)?;
            let trunc = sp.truncation_error.unwrap_or(0.0);
            let hat = lyapunov::gamma_hat_q_mc(&e, &law, q, &settings, &self.rng(5, 2 * i as u64))?;
            let d = DisorderSpec::new(rho, law.clone())?;
            let chain = lyapunov::gamma_mc_telescopic(&e, &d, &settings, &self.rng(5, 2 * i as u64 + 1))?;
            let ratio = chain.gamma.scaled(1.0 / rho);
            let methods_ok = (hat.gamma.value - sp.gamma.value).abs() <= 3.0 * hat.gamma.std_error + trunc;
            let allowance = 3.0 * ratio.std_error + rho * RATIONAL_SLOPE;
            let near_q = (ratio.value - sp.gamma.value).abs() <= allowance + trunc;
            let away_inf = (ratio.value - g_inf).abs() > allowance;
            passed &= methods_ok && near_q && away_inf;
            parts.push(format!(
                "q={q}: gamma/rho {:.4}+-{:.4}, hat MC {:.4}+-{:.4}, spectral {:.4} (trunc {:.1e}), inf {:.4}",
                ratio.value, ratio.std_error, hat.gamma.value, hat.gamma.std_error, sp.gamma.value, trunc, g_inf
            ));
            metrics.push(json!({
                "q": q, "ratio": ratio, "hat_mc": hat.gamma, "spectral": sp.gamma.value,
                "truncation": trunc, "gamma_hat_inf": g_inf,
                "methods_agree": methods_ok, "ratio_matches_q": near_q, "ratio_differs_from_inf": away_inf,
            }));
        }
        Ok(report(5, "rational branch", passed, parts.join("; "), json!(metrics)))
    }

    fn c06_anomaly_decay(&self) -> Result<CriterionReport> {
        let law = delta(2.0);
        let mut logs = Vec::new();
        let mut rows = Vec::new();
        let mut resolved = true;
        for q in 2u32..=10 {
            let p = central_numerator(q);
            let e = EnergyPoint::from_rational(p, q)?;
            let sp = lyapunov::gamma_hat_q_spectral(&e, &law, q, 64, 64 * q as usize, 1024)?;
            let diff = (sp.gamma.value - (self.gamma_hat_infinity)(&e, &law)?).abs();
            let trunc = sp.truncation_error.unwrap_or(0.0);
            resolved &= diff > trunc;
            logs.push((q as f64, diff.ln()));
            rows.push(json!({ "q": q, "p": p, "diff": diff, "truncation": trunc }));
        }
        let slope = ols_slope(&logs);
        let e12 = EnergyPoint::from_rational(5, 12)?;
        let far = (lyapunov::gamma_hat_q_spectral(&e12, &law, 12, 32, 384, 1024)?.gamma.value
            - (self.gamma_hat_infinity)(&e12, &law)?)
            .abs();
        Ok(report(
            6,
            "anomaly decay",
            slope < 0.0 && resolved && far < 1e-2,
            format!(
                "slope of log|gamma_hat_q - gamma_hat_inf| vs q = {slope:.3}; q=12 difference {far:.2e}; differences resolved above truncation: {resolved}"
            ),
            json!({ "rows": rows, "slope": slope, "q12": far }),
        ))
    }

    fn c07_harmonic_structure(&self) -> Result<CriterionReport> {
        let e = EnergyPoint::from_rational(1, 3)?;
        let law = delta(2.0);
        let rho = 0.05;
        let settings = self.settings(10_000_000);
        let d = DisorderSpec::new(rho, law.clone())?;
        let phys = harmonics::oscillatory_sums_physical(&e, &d, 6, &settings, &self.rng(7, 0))?;
        let hat = harmonics::oscillatory_sums_hat(&e, &law, &PsiLaw::grid(3), 6, &settings, &self.rng(7, 1))?;
        let off = [1i64, 2, 4, 5];
        let phys_ok = off
            .iter()
            .all(|&m| phys.get(m).norm() <= HARMONIC_BOUND * rho + 3.0 * phys.modulus_std_error(m));
        let hat_ok = off.iter().all(|&m| {
            let (z, se) = (hat.get(m), hat.std_error(m));
            z.re.abs() <= 3.0 * se.re && z.im.abs() <= 3.0 * se.im
        });
        let n_max = 256;
        let j = harmonics::solve_harmonic_system(&e, &law, 3, n_max, 6 * n_max, 32_768)?;
        let (j1, i3, se3) = (j.get(1), hat.get(3), hat.std_error(3));
        let j_ok = (j1.re - i3.re).abs() <= 3.0 * se3.re && (j1.im - i3.im).abs() <= 3.0 * se3.im;
        Ok(report(
            7,
            "harmonic structure",
            phys_ok && hat_ok && j_ok,
            format!(
                "|I_m|/rho (m=1,2,4,5) = {}; hat off-grid harmonics null: {hat_ok}; J_1 = {:.5}{:+.5}i vs hat I_3 = {:.5}{:+.5}i (se {:.5}, {:.5})",
                off.iter().map(|&m| format!("{:.3}", phys.get(m).norm() / rho)).collect::<Vec<_>>().join(","),
                j1.re, j1.im, i3.re, i3.im, se3.re, se3.im
            ),
            json!({ "physical": phys, "hat": hat, "J1": [j1.re, j1.im], "bound": HARMONIC_BOUND }),
        ))
    }

    fn c08_hat_identity(&self) -> Result<CriterionReport> {
        let law = ImpurityLaw::parse("2:1,-0.5:1")?;
        let mut passed = true;
        let mut worst: f64 = 0.0;
        let mut diagnostics = Vec::new();
        for q in 2u32..=5 {
            let e = EnergyPoint::from_rational(1, q)?;
            let m_max = 3 * q as usize;
            let t = harmonics::transition_coeffs(&e, &law, m_max, 16, 1024)?;
            let r = harmonics::hat_transition_relation_check(&e, &law, &t, &PsiLaw::grid(q))?;
            passed &= r.passed;
            worst = worst.max(r.max_divisible_error).max(r.max_nondivisible_magnitude);
            let printed = harmonics::hat_transition_relation_check(&e, &law, &t, &PsiLaw::half_turn_grid(q))?;
            diagnostics.push(json!({
                "q": q,
                "grid_error": r.max_divisible_error.max(r.max_nondivisible_magnitude),
                "half_turn_grid_passes": printed.passed,
                "half_turn_grid_worst": printed.worst,
            }));
        }
        Ok(report(
            8,
            "b-hat identity",
            passed,
            format!("max deviation {worst:.2e} over q = 2..5 (half-turn grid diagnostic in metrics)"),
            json!(diagnostics),
        ))
    }

    fn c09_dos_anchors(&self) -> Result<CriterionReport> {
        let law = delta(2.0);
        let mut notes = Vec::new();
        // Clean chain.
        let e = EnergyPoint::from_k(golden_k())?;
        let clean = dos::dos_rotation(&e, &DisorderSpec::new(0.0, law.clone())?, &self.settings(1_000_000), &self.rng(9, 0))?;
        let clean_ok = clean.value.value == e.k();
        notes.push(format!("clean rotation - k = {:.1e}", clean.value.value - e.k()));
        // Sturm against the dense solver.
        let mut gen = ChaCha8Rng::seed_from_u64(self.rng(9, 1).task_seed());
        let trials = match self.suite {
            Suite::Full => 1000,
            Suite::Fast => 200,
        };
        let mut mismatches = 0;
        for _ in 0..trials {
            let n = gen.random_range(2..=dos::JACOBI_MAX_N);
            let diag: Vec<f64> = (0..n).map(|_| gen.random_range(-3.0..3.0)).collect();
            let off: Vec<f64> = (0..n - 1).map(|_| gen.random_range(-2.0..2.0)).collect();
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                m[i][i] = diag[i];
                if i + 1 < n {
                    m[i][i + 1] = off[i];
                    m[i + 1][i] = off[i];
                }
            }
            let shift = gen.random_range(-4.0..4.0);
            let dense = dos::jacobi_eigenvalues(&m)?.iter().filter(|&&x| x < shift).count();
            if dense != dos::sturm_count(&diag, &off, shift) {
                mismatches += 1;
            }
        }
        notes.push(format!("Sturm/Jacobi mismatches {mismatches}/{trials}"));
        // Rotation number against box counting.
        let box_size = 10_000;
        let mut box_ok = true;
        let mut worst_box: f64 = 0.0;
        let mut box_rows = Vec::new();
        for i in 0..10u64 {
            let k = gen.random_range(0.3..PI - 0.3);
            let rho = gen.random_range(0.05..0.5);
            let e = EnergyPoint::from_k(k)?;
            let d = DisorderSpec::new(rho, law.clone())?;
            let rot = dos::dos_rotation(&e, &d, &self.settings(1_000_000), &self.rng(9, 10 + i))?;
            let eig = dos::dos_eigencount(&e, &d, box_size, 32, &self.rng(9, 30 + i))?;
            let diff = (rot.value.value - eig.value.value).abs();
            let sigma = rot.value.std_error.hypot(eig.value.std_error);
            box_ok &= diff <= PI * BOX_BOUNDARY_C / box_size as f64 + 3.0 * sigma;
            worst_box = worst_box.max(diff * box_size as f64 / PI);
            box_rows.push(json!({ "k": k, "rho": rho, "rot": rot.value, "eig": eig.value }));
        }
        notes.push(format!("max |rot - eig| N/pi = {worst_box:.2}"));
        // Low-density prediction.
        let mut pred_ok = true;
        let mut pred_rows = Vec::new();
        let branches = [
            ("golden", EnergyPoint::from_k(golden_k())?, DOS_CURVATURE_GENERIC),
            ("pi/3", EnergyPoint::from_rational(1, 3)?, DOS_CURVATURE_RATIONAL),
        ];
        for (bi, (name, e, c)) in branches.into_iter().enumerate() {
            for (ri, rho) in [0.1, 0.05].into_iter().enumerate() {
                let d = DisorderSpec::new(rho, law.clone())?;
                let rot = dos::dos_rotation(&e, &d, &self.settings(10_000_000), &self.rng(9, 50 + 2 * bi as u64 + ri as u64))?;
                let average = match e.rational() {
                    Some((_, q)) => PhaseAverage::Harmonic { q, n_max: 128, n_grid: 4096 },
                    None => PhaseAverage::Lebesgue { n_grid: 4096 },
                };
                let pred = dos::dos_lowdensity(&e, &d, &average)?;
                let diff = (rot.value.value - pred.value.value).abs();
                let ok = diff <= c * rho * rho + 3.0 * rot.value.std_error;
                pred_ok &= ok;
                pred_rows.push(json!({ "branch": name, "rho": rho, "rot": rot.value, "pred": pred.value.value, "diff_over_rho2": diff / (rho * rho) }));
            }
        }
        notes.push(format!(
            "|rot - pred|/rho^2 = {}",
            pred_rows
                .iter()
                .map(|r| format!("{:.3}", r["diff_over_rho2"].as_f64().unwrap_or(f64::NAN)))
                .collect::<Vec<_>>()
                .join(",")
        ));
        Ok(report(
            9,
            "DOS anchors",
            clean_ok && mismatches == 0 && box_ok && pred_ok,
            notes.join("; "),
            json!({ "box": box_rows, "prediction": pred_rows }),
        ))
    }

    fn c10_estimator_equivalence(&self) -> Result<CriterionReport> {
        let mut gen = ChaCha8Rng::seed_from_u64(self.rng(10, 0).task_seed());
        let settings = self.settings(1_000_000);
        let mut worst_z: f64 = 0.0;
        for i in 0..20u64 {
            let k = gen.random_range(0.2..PI - 0.2);
            let rho = gen.random_range(0.02..0.6);
            let n_atoms = gen.random_range(1..=3usize);
            let atoms: Vec<Atom> = (0..n_atoms)
                .map(|_| Atom {
                    value: gen.random_range(-3.0..3.0),
                    weight: gen.random_range(0.1..1.0),
                })
                .collect();
            let d = DisorderSpec::new(rho, ImpurityLaw::new(atoms)?)?;
            let e = EnergyPoint::from_k(k)?;
            let stream = self.rng(10, 1 + i);
            let t = lyapunov::gamma_mc_telescopic(&e, &d, &settings, &stream)?;
            let renorm = gen.random_range(1..=lyapunov::MAX_RENORM_EVERY.min(20));
            let m = lyapunov::gamma_mc_matrix_product(&e, &d, &settings, renorm, &stream)?;
            worst_z = worst_z.max(t.gamma.z_score(&m.gamma));
        }
        let e = EnergyPoint::from_k(1.0)?;
        let d = DisorderSpec::new(0.1, delta(2.0))?;
        let mut by_theta = Vec::new();
        for (i, theta0) in [0.0, 0.7, 2.0].into_iter().enumerate() {
            let s = OrbitSettings { theta0, ..settings };
            by_theta.push(lyapunov::gamma_mc_telescopic(&e, &d, &s, &self.rng(10, 100 + i as u64))?.gamma);
        }
        let theta_z = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| by_theta[i].z_score(&by_theta[j]))
            .fold(0.0, f64::max);
        Ok(report(
            10,
            "estimator equivalence",
            worst_z <= 3.0 && theta_z <= 3.0,
            format!("max z telescopic vs matrix product = {worst_z:.2} (20 sets); max z across theta0 = {theta_z:.2}"),
            json!({ "max_z": worst_z, "theta0": by_theta, "theta_z": theta_z }),
        ))
    }

    fn c11_band_center_linearity(&self) -> Result<CriterionReport> {
        let e = EnergyPoint::from_rational(1, 2)?;
        let law = delta(2.0);
        let settings = self.settings(10_000_000);
        let mut ratios = Vec::new();
        for (i, rho) in [0.1, 0.2, 0.3, 0.4, 0.5].into_iter().enumerate() {
            let d = DisorderSpec::new(rho, law.clone())?;
            let r = lyapunov::gamma_mc_telescopic(&e, &d, &settings, &self.rng(11, i as u64))?;
            ratios.push((rho, r.gamma.scaled(1.0 / rho)));
        }
        let w: f64 = ratios.iter().map(|r| r.1.std_error.powi(-2)).sum();
        let mean = ratios.iter().map(|r| r.1.value * r.1.std_error.powi(-2)).sum::<f64>() / w;
        let mean_se = w.recip().sqrt();
        let worst = ratios
            .iter()
            .map(|r| (r.1.value - mean).abs() / r.1.std_error.hypot(mean_se))
            .fold(0.0, f64::max);
        let g2 = lyapunov::gamma_hat_q_spectral(&e, &law, 2, 128, 256, 1024)?;
        Ok(report(
            11,
            "band-center linearity",
            worst <= 3.0,
            format!(
                "gamma/rho = {} ; weighted mean {mean:.5}, max deviation {worst:.1} sigma; gamma_hat_2(0) = {:.5}",
                ratios
                    .iter()
                    .map(|r| format!("{}:{:.5}+-{:.5}", r.0, r.1.value, r.1.std_error))
                    .collect::<Vec<_>>()
                    .join(", "),
                g2.gamma.value
            ),
            json!({ "ratios": ratios, "mean": mean, "max_deviation_sigma": worst, "gamma_hat_2": g2.gamma.value }),
        ))
    }

    fn c12_determinism(&self) -> Result<CriterionReport> {
        let base = RunConfig {
            command: Command::SweepEnergy,
            k_grid: Some(KGrid { start: 0.6, stop: PI / 2.0, points: 4 }),
            rho: 0.1,
            n_steps: self.steps(200_000),
            burn_in: 1000,
            replicas: 2,
            seed: self.seed,
            n_max: 8,
            m_max: 16,
            box_size: 2000,
            q_max: 8,
            no_timestamp: true,
            ..RunConfig::default()
        };
        let single = RunConfig { threads: 1, ..base.clone() };
        let multi = RunConfig { threads: 4, ..base.clone() };
        let a = experiment::run(&single)?;
        let b = experiment::run(&single)?;
        let c = experiment::run(&multi)?;
        let rational_rows = experiment::cmd_sweep_energy(&single)?
            .iter()
            .filter(|r| r.q.is_some())
            .count();
        Ok(report(
            12,
            "determinism",
            a == b && a == c && rational_rows == 1,
            format!(
                "repeat identical: {}, 1 vs 4 threads identical: {}, {} bytes",
                a == b,
                a == c,
                a.len()
            ),
            json!({ "bytes": a.len(), "rational_rows": rational_rows }),
        ))
    }
}

/// Runs the whole suite on a pool of `threads` workers.
pub fn cmd_verify(suite: Suite, seed: u64, threads: usize) -> Result<Verdict> {
    let v = Verifier::new(suite, seed);
    experiment::with_threads(threads, || v.run_all())
}

/// Default master seed of the suite.
pub const DEFAULT_SEED: u64 = 20_240_601;
