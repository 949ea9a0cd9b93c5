//! Re-measures the frozen bounds in `verify` at their calibration densities:
//! `cargo run --release --example calibrate`.

use std::f64::consts::PI;

use dilute_core::dos::{self, PhaseAverage};
use dilute_core::harmonics;
use dilute_core::lyapunov;
use dilute_core::model::{DisorderSpec, EnergyPoint, ImpurityLaw, RngContract};
use dilute_core::pruefer::OrbitSettings;

const SEED: u64 = 0xca1;

fn main() -> dilute_core::error::Result<()> {
    let law = ImpurityLaw::dirac(2.0)?;
    let s = OrbitSettings::with_steps(10_000_000);
    let third = EnergyPoint::from_rational(1, 3)?;

    let d = DisorderSpec::new(0.1, law.clone())?;
    let h = harmonics::oscillatory_sums_physical(&third, &d, 5, &s, &RngContract::new(SEED, 0))?;
    let worst = [1, 2, 4, 5].iter().map(|&m| h.get(m).norm() / 0.1).fold(0.0, f64::max);
    println!("HARMONIC_BOUND      max |I_m|/rho at rho=0.1: {worst:.4}");

    for q in [2u32, 3] {
        let e = EnergyPoint::from_rational(1, q)?;
        let sp = lyapunov::gamma_hat_q_spectral(&e, &law, q, 128, 128 * q as usize, 1024)?;
        let r = lyapunov::gamma_mc_telescopic(&e, &d, &s, &RngContract::new(SEED, q as u64))?;
        let slope = (r.gamma.value / 0.1 - sp.gamma.value).abs() / 0.1;
        println!("RATIONAL_SLOPE      q={q} |gamma/rho - gamma_hat_q|/rho at rho=0.1: {slope:.4}");
    }

    let golden = EnergyPoint::from_k(PI * (5f64.sqrt() - 1.0) / 2.0)?;
    let branches = [
        ("DOS_CURVATURE_GENERIC ", golden, PhaseAverage::Lebesgue { n_grid: 4096 }),
        ("DOS_CURVATURE_RATIONAL", third, PhaseAverage::Harmonic { q: 3, n_max: 128, n_grid: 4096 }),
    ];
    for (name, e, avg) in branches {
        for rho in [0.4, 0.2] {
            let d = DisorderSpec::new(rho, law.clone())?;
            let rot = dos::dos_rotation(&e, &d, &s, &RngContract::new(SEED, 10))?;
            let pred = dos::dos_lowdensity(&e, &d, &avg)?;
            let c = (rot.value.value - pred.value.value).abs() / (rho * rho);
            println!("{name} |rot - pred|/rho^2 at rho={rho}: {c:.4}");
        }
    }
    Ok(())
}
