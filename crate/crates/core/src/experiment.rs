//! Run configurations and report rows for the command-line front end.
//!
//! Every row draws its randomness from `RngContract::new(seed, row)` and
//! fixed sub-streams per estimator, so output does not depend on the thread
//! count or on completion order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith;
use crate::dos::{self, PhaseAverage};
use crate::error::{Error, Result};
use crate::harmonics;
use crate::lyapunov;
use crate::model::{gcd, DisorderSpec, EnergyPoint, ImpurityLaw, RngContract};
use crate::pruefer::{self, OrbitSettings, PsiLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lyapunov,
    Dos,
    Anomaly,
    Harmonics,
    SweepEnergy,
    SweepDensity,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySpec {
    K(f64),
    E(f64),
    Rational { p: u32, q: u32 },
}

impl EnergySpec {
    pub fn point(&self) -> Result<EnergyPoint> {
        match *self {
            EnergySpec::K(k) => EnergyPoint::from_k(k),
            EnergySpec::E(e) => EnergyPoint::from_energy(e),
            EnergySpec::Rational { p, q } => EnergyPoint::from_rational(p, q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Evenly spaced quasi-momenta `start, ..., stop` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl KGrid {
    /// Parses `"start:stop:points"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || Error::Parse(format!("k grid {text:?} is not of the form start:stop:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let grid = Self {
            start: parts[0].parse().map_err(|_| bad())?,
            stop: parts[1].parse().map_err(|_| bad())?,
            points: parts[2].parse().map_err(|_| bad())?,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config("an energy sweep needs at least 2 points".into()));
        }
        let inside = |k: f64| k > 0.0 && k < PI;
        if !inside(self.start) || !inside(self.stop) || self.start >= self.stop {
            return Err(Error::Config(format!(
                "k grid [{}, {}] must satisfy 0 < start < stop < pi",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + h * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub energy: Option<EnergySpec>,
    pub k_grid: Option<KGrid>,
    pub rho: f64,
    pub rho_grid: Option<Vec<f64>>,
    pub dist: String,
    pub n_steps: u64,
    pub burn_in: u64,
    pub replicas: u64,
    pub seed: u64,
    pub m_max: usize,
    pub l_max: usize,
    pub n_max: usize,
    pub n_grid: usize,
    pub q_max: u32,
    /// Box size for eigenvalue counting; `0` skips it.
    pub box_size: usize,
    pub tol: f64,
    pub format: OutputFormat,
    pub out: Option<String>,
    pub no_timestamp: bool,
    /// Worker count; output does not depend on it and it is not echoed.
    #[serde(skip)]
    pub threads: usize,
    pub full: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Lyapunov,
            energy: None,
            k_grid: None,
            rho: 0.05,
            rho_grid: None,
            dist: "2:1".into(),
            n_steps: 1_000_000,
            burn_in: 10_000,
            replicas: 1,
            seed: 1,
            m_max: 64,
            l_max: 128,
            n_max: 32,
            n_grid: 1024,
            q_max: 12,
            box_size: 10_000,
            tol: arith::DEFAULT_TOL,
            format: OutputFormat::Csv,
            out: None,
            no_timestamp: false,
            threads: 0,
            full: false,
        }
    }
}

impl RunConfig {
    pub fn law(&self) -> Result<ImpurityLaw> {
        ImpurityLaw::parse(&self.dist)
    }

    pub fn disorder(&self, rho: f64) -> Result<DisorderSpec> {
        DisorderSpec::new(rho, self.law()?)
    }

    pub fn settings(&self) -> OrbitSettings {
        OrbitSettings {
            n_steps: self.n_steps,
            burn_in: self.burn_in,
            replicas: self.replicas.max(1),
            ..OrbitSettings::default()
        }
    }

    fn point(&self) -> Result<EnergyPoint> {
        self.energy
            .ok_or_else(|| Error::Config("this command needs one of --k, --E or --k-rational".into()))?
            .point()
    }

    pub fn validate(&self) -> Result<()> {
        self.law()?;
        DisorderSpec::new(self.rho, self.law()?)?;
        if self.n_steps < lyapunov::MIN_MC_STEPS {
            return Err(Error::Config(format!(
                "--steps must be at least {}",
                lyapunov::MIN_MC_STEPS
            )));
        }
        if self.n_max == 0 || self.m_max == 0 {
            return Err(Error::Config("--n-max and --m-max must be positive".into()));
        }
        if !self.n_grid.is_power_of_two() {
            return Err(Error::Config(format!("--grid must be a power of two, got {}", self.n_grid)));
        }
        if self.q_max < 2 {
            return Err(Error::Config("--q-max must be at least 2".into()));
        }
        match self.command {
            Command::Lyapunov | Command::Dos | Command::Harmonics | Command::SweepDensity => {
                self.point()?;
            }
            Command::SweepEnergy => {
                self.k_grid
                    .ok_or_else(|| Error::Config("sweep-energy needs --k-grid start:stop:points".into()))?
                    .validate()?;
            }
            Command::Anomaly | Command::Verify => {}
        }
        if let Some(rhos) = &self.rho_grid {
            for &r in rhos {
                DisorderSpec::new(r, self.law()?)?;
            }
        }
        Ok(())
    }

    /// `p/q` for the point: exact when given as a rational, otherwise from
    /// continued fractions within `tol`.
    pub fn rational_of(&self, e: &EnergyPoint) -> Result<Option<(u32, u32)>> {
        if let Some(r) = e.rational() {
            return Ok((r.1 <= self.q_max).then_some(r));
        }
        Ok(arith::classify_k(e.k(), self.q_max, self.tol)?.rational())
    }
}

/// One output record; `None` fields are written empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub k: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub rho: f64,
    pub gamma_mc: Option<f64>,
    pub gamma_mc_se: Option<f64>,
    pub gamma_mc2: Option<f64>,
    pub gamma_mc2_se: Option<f64>,
    pub gamma_hat_inf: Option<f64>,
    pub gamma_hat_q_mc: Option<f64>,
    pub gamma_hat_q_mc_se: Option<f64>,
    pub gamma_hat_q_spectral: Option<f64>,
    pub trunc_err: Option<f64>,
    pub dos_rot: Option<f64>,
    pub dos_rot_se: Option<f64>,
    pub dos_pred: Option<f64>,
    pub dos_eig: Option<f64>,
    pub n_steps: u64,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 20] = [
    "k", "E", "p", "q", "rho", "gamma_mc", "gamma_mc_se", "gamma_mc2", "gamma_mc2_se",
    "gamma_hat_inf", "gamma_hat_q_mc", "gamma_hat_q_mc_se", "gamma_hat_q_spectral", "trunc_err",
    "dos_rot", "dos_rot_se", "dos_pred", "dos_eig", "n_steps", "seed",
];

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl Row {
    fn csv(&self) -> String {
        [
            self.k.to_string(),
            self.energy.to_string(),
            cell(self.p),
            cell(self.q),
            self.rho.to_string(),
            cell(self.gamma_mc),
            cell(self.gamma_mc_se),
            cell(self.gamma_mc2),
            cell(self.gamma_mc2_se),
            cell(self.gamma_hat_inf),
            cell(self.gamma_hat_q_mc),
            cell(self.gamma_hat_q_mc_se),
            cell(self.gamma_hat_q_spectral),
            cell(self.trunc_err),
            cell(self.dos_rot),
            cell(self.dos_rot_se),
            cell(self.dos_pred),
            cell(self.dos_eig),
            self.n_steps.to_string(),
            self.seed.to_string(),
        ]
        .join(",")
    }
}

/// Sub-streams of a row.
const STREAM_CHAIN: u64 = 0;
const STREAM_HAT: u64 = 1;
const STREAM_DOS: u64 = 2;
const STREAM_BOX: u64 = 3;

/// Renormalization interval of the matrix-product column.
pub const RENORM_EVERY: u32 = 20;

#[derive(Debug, Clone, Copy)]
struct Parts {
    gamma: bool,
    hat: bool,
    dos: bool,
}

fn evaluate(config: &RunConfig, e: &EnergyPoint, rho: f64, row: u64, parts: Parts) -> Result<Row> {
    let law = config.law()?;
    let disorder = DisorderSpec::new(rho, law.clone())?;
    let settings = config.settings();
    let stream = RngContract::new(config.seed, row);
    let rational = config.rational_of(e)?;
    let mut out = Row {
        k: e.k(),
        energy: e.energy(),
        p: rational.map(|r| r.0),
        q: rational.map(|r| r.1),
        rho,
        n_steps: config.n_steps,
        seed: config.seed,
        ..Row::default()
    };
    if parts.gamma {
        let chain = stream.child(STREAM_CHAIN);
        let t = lyapunov::gamma_mc_telescopic(e, &disorder, &settings, &chain)?;
        let m = lyapunov::gamma_mc_matrix_product(e, &disorder, &settings, RENORM_EVERY, &chain)?;
        out.gamma_mc = Some(t.gamma.value);
        out.gamma_mc_se = Some(t.gamma.std_error);
        out.gamma_mc2 = Some(m.gamma.value);
        out.gamma_mc2_se = Some(m.gamma.std_error);
    }
    if parts.hat {
        out.gamma_hat_inf = Some(lyapunov::gamma_hat_infinity(e, &law)?.gamma.value);
        if let Some((_, q)) = rational {
            let mc = lyapunov::gamma_hat_q_mc(e, &law, q, &settings, &stream.child(STREAM_HAT))?;
            let m_max = config.m_max.max(config.n_max * q as usize);
            let sp = lyapunov::gamma_hat_q_spectral(e, &law, q, config.n_max, m_max, config.n_grid)?;
            out.gamma_hat_q_mc = Some(mc.gamma.value);
            out.gamma_hat_q_mc_se = Some(mc.gamma.std_error);
            out.gamma_hat_q_spectral = Some(sp.gamma.value);
            out.trunc_err = sp.truncation_error;
        }
    }
    if parts.dos {
        let rot = dos::dos_rotation(e, &disorder, &settings, &stream.child(STREAM_DOS))?;
        let average = match rational {
            Some((_, q)) if q >= 2 => PhaseAverage::Harmonic {
                q,
                n_max: config.n_max,
                n_grid: config.n_grid,
            },
            _ => PhaseAverage::Lebesgue { n_grid: config.n_grid },
        };
        out.dos_rot = Some(rot.value.value);
        out.dos_rot_se = Some(rot.value.std_error);
        out.dos_pred = Some(dos::dos_lowdensity(e, &disorder, &average)?.value.value);
        if config.box_size >= 2 {
            let eig = dos::dos_eigencount(e, &disorder, config.box_size, config.replicas, &stream.child(STREAM_BOX))?;
            out.dos_eig = Some(eig.value.value);
        }
    }
    Ok(out)
}

/// Runs `f` on a pool of `threads` workers (`0` = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn run_rows(config: &RunConfig, jobs: Vec<(EnergyPoint, f64)>, parts: Parts) -> Result<Vec<Row>> {
    with_threads(config.threads, || {
        jobs.par_iter()
            .enumerate()
            .map(|(i, (e, rho))| evaluate(config, e, *rho, i as u64, parts))
            .collect::<Result<Vec<Row>>>()
    })?
}

const ALL: Parts = Parts { gamma: true, hat: true, dos: true };

pub fn cmd_lyapunov(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    run_rows(config, vec![(config.point()?, config.rho)], Parts { dos: false, ..ALL })
}

pub fn cmd_dos(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    run_rows(config, vec![(config.point()?, config.rho)], Parts { dos: true, gamma: false, hat: false })
}

pub fn cmd_sweep_energy(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let grid = config.k_grid.expect("validated");
    let jobs = grid
        .values()
        .into_iter()
        .map(|k| Ok((EnergyPoint::from_k(k)?, config.rho)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = run_rows(config, jobs, ALL)?;
    rows.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(rows)
}

pub fn cmd_sweep_density(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let e = config.point()?;
    let rhos = config
        .rho_grid
        .clone()
        .unwrap_or_else(|| vec![0.1, 0.05, 0.025]);
    run_rows(config, rhos.into_iter().map(|r| (e, r)).collect(), ALL)
}

/// Largest `p <= q/2` coprime to `q`.
pub fn central_numerator(q: u32) -> u32 {
    (1..=q / 2)
        .rev()
        .find(|&p| gcd(p as u64, q as u64) == 1)
        .unwrap_or(1)
}

/// For `q = 2..=q_max`: closed form and spectral value at `k = pi p / q`.
pub fn cmd_anomaly(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let law = config.law()?;
    let qs: Vec<u32> = (2..=config.q_max).collect();
    with_threads(config.threads, || {
        qs.par_iter()
            .map(|&q| {
                let p = central_numerator(q);
                let e = EnergyPoint::from_rational(p, q)?;
                let m_max = config.m_max.max(config.n_max * q as usize);
                let sp = lyapunov::gamma_hat_q_spectral(&e, &law, q, config.n_max, m_max, config.n_grid)?;
                Ok(Row {
                    k: e.k(),
                    energy: e.energy(),
                    p: Some(p),
                    q: Some(q),
                    rho: config.rho,
                    gamma_hat_inf: Some(lyapunov::gamma_hat_infinity(&e, &law)?.gamma.value),
                    gamma_hat_q_spectral: Some(sp.gamma.value),
                    trunc_err: sp.truncation_error,
                    n_steps: config.n_steps,
                    seed: config.seed,
                    ..Row::default()
                })
            })
            .collect::<Result<Vec<Row>>>()
    })?
}

/// One harmonic of one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRow {
    /// `physical`, `hat` or `solved`.
    pub source: String,
    pub m: i64,
    pub re: f64,
    pub im: f64,
    pub re_se: Option<f64>,
    pub im_se: Option<f64>,
}

pub const HARMONIC_COLUMNS: [&str; 6] = ["source", "m", "re", "im", "re_se", "im_se"];

/// Oscillatory sums of the physical chain and, at rational points, of the
/// auxiliary chain plus the solved harmonics `J_n` (listed at `m = n q`).
pub fn cmd_harmonics(config: &RunConfig) -> Result<Vec<HarmonicRow>> {
    config.validate()?;
    let e = config.point()?;
    let law = config.law()?;
    let disorder = config.disorder(config.rho)?;
    let settings = config.settings();
    let stream = RngContract::new(config.seed, 0);
    let m_max = config.m_max;
    let mut rows = Vec::new();
    let mut push = |source: &str, h: &harmonics::HarmonicVector| {
        for m in 1..=m_max as i64 {
            let (z, se) = (h.get(m), h.std_error(m));
            rows.push(HarmonicRow {
                source: source.into(),
                m,
                re: z.re,
                im: z.im,
                re_se: Some(se.re),
                im_se: Some(se.im),
            });
        }
    };
    let physical = with_threads(config.threads, || {
        harmonics::oscillatory_sums_physical(&e, &disorder, m_max, &settings, &stream.child(STREAM_CHAIN))
    })??;
    push("physical", &physical);
    if let Some((_, q)) = config.rational_of(&e)? {
        let hat = with_threads(config.threads, || {
            harmonics::oscillatory_sums_hat(&e, &law, &PsiLaw::grid(q), m_max, &settings, &stream.child(STREAM_HAT))
        })??;
        push("hat", &hat);
        let l_max = config.l_max.max(2 * config.n_max * q as usize);
        let grid = config
            .n_grid
            .max(8 * (config.n_max * q as usize + l_max))
            .next_power_of_two();
        let j = harmonics::solve_harmonic_system(&e, &law, q, config.n_max, l_max, grid)?;
        for n in 1..=config.n_max as i64 {
            rows.push(HarmonicRow {
                source: "solved".into(),
                m: n * q as i64,
                re: j.get(n).re,
                im: j.get(n).im,
                re_se: None,
                im_se: None,
            });
        }
    }
    Ok(rows)
}

/// Wall-clock stamp for report headers.
pub fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix {secs}")
}

fn config_json(config: &RunConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}

/// CSV text: a `# config:` line, an optional `# generated:` line, the header
/// and one line per record.
pub fn render_csv(config: &RunConfig, header: &[&str], lines: impl IntoIterator<Item = String>) -> String {
    let mut s = String::new();
    writeln!(s, "# config: {}", config_json(config)).unwrap();
    if !config.no_timestamp {
        writeln!(s, "# generated: {}", timestamp()).unwrap();
    }
    writeln!(s, "{}", header.join(",")).unwrap();
    for line in lines {
        writeln!(s, "{line}").unwrap();
    }
    s
}

pub fn render_json<T: Serialize>(config: &RunConfig, rows: &[T]) -> String {
    let mut doc = json!({ "config": config, "rows": rows });
    if !config.no_timestamp {
        doc["generated"] = Value::String(timestamp());
    }
    serde_json::to_string_pretty(&doc).expect("rows serialize") + "\n"
}

pub fn render_rows(config: &RunConfig, rows: &[Row]) -> String {
    match config.format {
        OutputFormat::Csv => render_csv(config, &CSV_COLUMNS, rows.iter().map(Row::csv)),
        OutputFormat::Json => render_json(config, rows),
    }
}

pub fn render_harmonics(config: &RunConfig, rows: &[HarmonicRow]) -> String {
    match config.format {
        OutputFormat::Csv => render_csv(
            config,
            &HARMONIC_COLUMNS,
            rows.iter().map(|r| {
                format!("{},{},{},{},{},{}", r.source, r.m, r.re, r.im, cell(r.re_se), cell(r.im_se))
            }),
        ),
        OutputFormat::Json => render_json(config, rows),
    }
}

/// Runs any non-verify command and renders its output.
pub fn run(config: &RunConfig) -> Result<String> {
    Ok(match config.command {
        Command::Lyapunov => render_rows(config, &cmd_lyapunov(config)?),
        Command::Dos => render_rows(config, &cmd_dos(config)?),
        Command::Anomaly => render_rows(config, &cmd_anomaly(config)?),
        Command::SweepEnergy => render_rows(config, &cmd_sweep_energy(config)?),
        Command::SweepDensity => render_rows(config, &cmd_sweep_density(config)?),
        Command::Harmonics => render_harmonics(config, &cmd_harmonics(config)?),
        Command::Verify => {
            return Err(Error::Config("verify is run through verify::cmd_verify".into()))
        }
    })
}

/// Recorded auxiliary-chain phases reduced to `[0, pi)`.
pub fn reduced_hat_phases(
    e: &EnergyPoint,
    law: &ImpurityLaw,
    psi_law: &PsiLaw,
    settings: &OrbitSettings,
    rng: &RngContract,
) -> Result<Vec<f64>> {
    let orbit = pruefer::run_hat_orbit(e, law, psi_law, settings.n_steps, settings.burn_in, rng, settings.theta0)?;
    Ok(orbit.thetas[1..].iter().map(|t| t.rem_euclid(PI)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n_steps: 20_000,
            burn_in: 100,
            n_max: 4,
            m_max: 16,
            box_size: 200,
            no_timestamp: true,
            ..RunConfig::default()
        }
    }

    #[test]
    fn csv_header_matches_schema() {
        let config = RunConfig {
            command: Command::SweepEnergy,
            k_grid: Some(KGrid::parse("0.5:2.5:3").unwrap()),
            rho: 0.0,
            ..small()
        };
        let text = run(&config).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert_eq!(
            lines.next().unwrap(),
            "k,E,p,q,rho,gamma_mc,gamma_mc_se,gamma_mc2,gamma_mc2_se,gamma_hat_inf,gamma_hat_q_mc,gamma_hat_q_mc_se,gamma_hat_q_spectral,trunc_err,dos_rot,dos_rot_se,dos_pred,dos_eig,n_steps,seed"
        );
        let rows = cmd_sweep_energy(&config).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.gamma_mc, Some(0.0));
            assert_eq!(r.gamma_mc_se, Some(0.0));
        }
    }

    #[test]
    fn rational_routing() {
        let config = RunConfig {
            energy: Some(EnergySpec::Rational { p: 1, q: 2 }),
            ..small()
        };
        let rows = cmd_lyapunov(&config).unwrap();
        assert_eq!(rows[0].q, Some(2));
        assert!(rows[0].gamma_hat_q_spectral.is_some());
        let generic = RunConfig {
            energy: Some(EnergySpec::K(1.0)),
            ..small()
        };
        let rows = cmd_lyapunov(&generic).unwrap();
        assert_eq!(rows[0].q, None);
        assert!(rows[0].gamma_hat_q_mc.is_none());
        assert!(run(&generic).unwrap().lines().nth(2).unwrap().contains(",,,,"));
    }

    #[test]
    fn validation_errors() {
        let mut c = small();
        c.energy = None;
        assert!(cmd_lyapunov(&c).is_err());
        c.energy = Some(EnergySpec::K(1.0));
        c.dist = "2:-1".into();
        assert!(matches!(cmd_lyapunov(&c), Err(Error::Parse(_))));
        assert!(KGrid::parse("1:2:1").is_err());
        assert!(KGrid::parse("0:2:5").is_err());
        assert!(KGrid::parse("1,2,3").is_err());
    }

    #[test]
    fn central_numerators() {
        let ps: Vec<u32> = (2..=10).map(central_numerator).collect();
        assert_eq!(ps, vec![1, 1, 1, 2, 1, 3, 3, 4, 3]);
    }
}
