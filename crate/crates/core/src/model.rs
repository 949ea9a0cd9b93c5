//! Parameter types shared by every estimator: the spectral point, the
//! impurity distribution and the reproducible random stream layout.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `sin(k)`. The impurity kick scales like `1/sin(k)`.
pub const SIN_K_GUARD: f64 = 1e-6;

/// Distance kept from the band edges `|E| = 2`.
pub const BAND_EDGE_GUARD: f64 = 1e-9;

/// A point inside the free band, stored both as energy and quasi-momentum
/// with `E = -2 cos k`, `0 < k < pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    k: f64,
    energy: f64,
    /// Exact `k / pi = p / q` when the point was built from a rational.
    rational: Option<(u32, u32)>,
}

impl EnergyPoint {
    pub fn from_k(k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 || k >= PI || k.sin() < SIN_K_GUARD {
            return Err(Error::Domain(format!(
                "quasi-momentum k = {k} must lie in (0, pi) with sin(k) >= {SIN_K_GUARD:e}"
            )));
        }
        Ok(Self {
            k,
            energy: -2.0 * k.cos(),
            rational: None,
        })
    }

    pub fn from_energy(energy: f64) -> Result<Self> {
        if !energy.is_finite() || energy.abs() > 2.0 - BAND_EDGE_GUARD {
            return Err(Error::Domain(format!(
                "energy E = {energy} must lie in the open band |E| < 2 (guard {BAND_EDGE_GUARD:e})"
            )));
        }
        let k = (-0.5 * energy).acos();
        if k.sin() < SIN_K_GUARD {
            return Err(Error::Domain(format!(
                "energy E = {energy} is too close to the band edge (sin k < {SIN_K_GUARD:e})"
            )));
        }
        Ok(Self {
            k,
            energy,
            rational: None,
        })
    }

    /// `k = pi * p / q` with `p/q` reduced to lowest terms.
    pub fn from_rational(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 || p >= q {
            return Err(Error::Domain(format!(
                "rational quasi-momentum {p}/{q} must satisfy 0 < p < q"
            )));
        }
        let g = gcd(p as u64, q as u64) as u32;
        let (p, q) = (p / g, q / g);
        let mut point = Self::from_k(PI * p as f64 / q as f64)?;
        point.rational = Some((p, q));
        if q == 2 {
            point.energy = 0.0;
        }
        Ok(point)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sin_k(&self) -> f64 {
        self.k.sin()
    }

    pub fn cos_k(&self) -> f64 {
        self.k.cos()
    }

    pub fn rational(&self) -> Option<(u32, u32)> {
        self.rational
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// One impurity type: potential value and its probability weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub weight: f64,
}

/// Finite atomic impurity distribution. Weights are normalized to one and
/// atom values are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpurityLaw {
    atoms: Vec<Atom>,
}

impl ImpurityLaw {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut merged: Vec<Atom> = Vec::new();
        for atom in atoms {
            if !atom.value.is_finite() {
                return Err(Error::Parse(format!(
                    "impurity value {} is not finite",
                    atom.value
                )));
            }
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return Err(Error::Parse(format!(
                    "non-positive weight {} for impurity value {}",
                    atom.weight, atom.value
                )));
            }
            match merged.iter_mut().find(|a| a.value == atom.value) {
                Some(existing) => existing.weight += atom.weight,
                None => merged.push(atom),
            }
        }
        if merged.is_empty() {
            return Err(Error::Parse("impurity distribution is empty".into()));
        }
        // Already-normalized input is kept bit-for-bit so the canonical
        // form reparses exactly.
        let total: f64 = merged.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            for a in &mut merged {
                a.weight /= total;
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn dirac(value: f64) -> Result<Self> {
        Self::new([Atom { value, weight: 1.0 }])
    }

    /// Parses `"v:w[,v:w]*"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err(Error::Parse(format!("empty atom in {text:?}")));
            }
            let (v, w) = item.split_once(':').ok_or_else(|| {
                Error::Parse(format!("atom {item:?} is not of the form value:weight"))
            })?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad impurity value {v:?}")))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight {w:?}")))?;
            atoms.push(Atom { value, weight });
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// True when the law is the trivial point mass at zero.
    pub fn is_trivial(&self) -> bool {
        self.atoms.iter().all(|a| a.value == 0.0)
    }
}

impl fmt::Display for ImpurityLaw {
    /// Canonical form; `ImpurityLaw::parse` reproduces it exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{:?}:{:?}", a.value, a.weight)?;
        }
        Ok(())
    }
}

/// Impurity density plus the impurity law. The single-site distribution is
/// `(1 - rho) delta_0 + rho * law`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    rho: f64,
    law: ImpurityLaw,
}

impl DisorderSpec {
    pub fn new(rho: f64, law: ImpurityLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!(
                "impurity density rho = {rho} must lie in [0, 1]"
            )));
        }
        Ok(Self { rho, law })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn law(&self) -> &ImpurityLaw {
        &self.law
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(rho, self.law.clone())
    }
}

pub fn parse_disorder(text: &str, rho: f64) -> Result<DisorderSpec> {
    DisorderSpec::new(rho, ImpurityLaw::parse(text)?)
}

/// Draws the potential of one site from a single uniform variate.
#[derive(Debug, Clone)]
pub(crate) struct SiteSampler {
    rho: f64,
    cumulative: Vec<f64>,
}

impl SiteSampler {
    pub(crate) fn new(rho: f64, law: &ImpurityLaw) -> Self {
        let mut acc = 0.0;
        let cumulative = law
            .atoms()
            .iter()
            .map(|a| {
                acc += a.weight;
                acc
            })
            .collect();
        Self { rho, cumulative }
    }

    /// Index of the impurity atom at this site, `None` for a clean site.
    #[inline]
    pub(crate) fn site(&self, u: f64) -> Option<usize> {
        if u < self.rho {
            Some(self.atom(u / self.rho))
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn atom(&self, u: f64) -> usize {
        let last = self.cumulative.len() - 1;
        if last == 0 {
            return 0;
        }
        self.cumulative[..last]
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last)
    }
}

/// 64-bit finalizer (the splitmix64 multiply-xor-shift cascade).
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Reproducible random stream: a master seed plus a stream index.
///
/// The per-task seed is `avalanche(master + avalanche(stream + GOLDEN))`, so
/// equal pairs give bit-identical sequences independent of scheduling.
/// Nested layouts (row, then replica) are built with [`RngContract::child`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngContract {
    pub master_seed: u64,
    pub stream_index: u64,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

impl RngContract {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn task_seed(&self) -> u64 {
        avalanche(
            self.master_seed
                .wrapping_add(avalanche(self.stream_index.wrapping_add(GOLDEN_GAMMA))),
        )
    }

    /// Sub-stream `index` of this stream.
    pub fn child(&self, index: u64) -> Self {
        Self {
            master_seed: self.task_seed(),
            stream_index: index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.task_seed())
    }
}

/// Parses a seed given as a decimal or `0x`-prefixed hexadecimal literal.
pub fn parse_seed(text: &str) -> Result<u64> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|_| Error::Parse(format!("seed {text:?} is not a 64-bit decimal or 0x-hex literal")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn energy_from_k_examples() {
        let e = EnergyPoint::from_k(PI / 2.0).unwrap();
        assert!(e.energy().abs() < 1e-15);
        let e = EnergyPoint::from_k(PI / 3.0).unwrap();
        assert!((e.energy() + 1.0).abs() < 1e-15);
        assert!(matches!(EnergyPoint::from_k(0.0), Err(Error::Domain(_))));
        assert!(EnergyPoint::from_k(PI).is_err());
        assert!(EnergyPoint::from_k(5e-7).is_err());
    }

    #[test]
    fn energy_from_e_examples() {
        let e = EnergyPoint::from_energy(0.0).unwrap();
        assert!((e.k() - PI / 2.0).abs() < 1e-15);
        let e = EnergyPoint::from_energy(-1.0).unwrap();
        assert!((e.k() - PI / 3.0).abs() < 1e-15);
        assert!(EnergyPoint::from_energy(2.5).is_err());
        assert!(EnergyPoint::from_energy(2.0).is_err());
    }

    #[test]
    fn energy_round_trip_grid() {
        for i in 0..1000 {
            let k = 0.01 + (PI - 0.02) * i as f64 / 999.0;
            let e = EnergyPoint::from_k(k).unwrap();
            assert!((e.energy() + 2.0 * k.cos()).abs() <= 1e-12);
            let back = EnergyPoint::from_energy(e.energy()).unwrap();
            assert!((back.k() - k).abs() <= 1e-12, "k = {k}");
        }
    }

    #[test]
    fn rational_points_are_reduced() {
        let e = EnergyPoint::from_rational(2, 4).unwrap();
        assert_eq!(e.rational(), Some((1, 2)));
        assert!((e.k() - PI / 2.0).abs() < 1e-15);
        assert!(EnergyPoint::from_rational(3, 3).is_err());
    }

    #[test]
    fn parse_disorder_examples() {
        let d = parse_disorder("2:1", 0.05).unwrap();
        assert_eq!(d.rho(), 0.05);
        assert_eq!(d.law().atoms(), &[Atom { value: 2.0, weight: 1.0 }]);

        let d = parse_disorder("1:1,3:1", 0.1).unwrap();
        assert_eq!(
            d.law().atoms(),
            &[Atom { value: 1.0, weight: 0.5 }, Atom { value: 3.0, weight: 0.5 }]
        );

        assert!(matches!(parse_disorder("2:-1", 0.1), Err(Error::Parse(_))));
        assert!(parse_disorder("", 0.1).is_err());
        assert!(parse_disorder("inf:1", 0.1).is_err());
        assert!(parse_disorder("2:0", 0.1).is_err());
        assert!(matches!(parse_disorder("2:1", 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_atoms_merge() {
        let law = ImpurityLaw::parse("2:1, 1:2, 2:1").unwrap();
        assert_eq!(law.atoms().len(), 2);
        assert_eq!(law.atoms()[0], Atom { value: 2.0, weight: 0.5 });
        let sum: f64 = law.atoms().iter().map(|a| a.weight).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seeds_parse_decimal_and_hex() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0xff").unwrap(), 255);
        assert_eq!(parse_seed("0xFFFFFFFFFFFFFFFF").unwrap(), u64::MAX);
        assert!(parse_seed("-3").is_err());
        assert!(parse_seed("0x").is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = RngContract::new(7, 3);
        let xs: Vec<u64> = a.rng().random_iter().take(8).collect();
        let ys: Vec<u64> = a.rng().random_iter().take(8).collect();
        assert_eq!(xs, ys);
        let zs: Vec<u64> = RngContract::new(7, 4).rng().random_iter().take(8).collect();
        assert_ne!(xs, zs);
        assert_ne!(a.child(0).task_seed(), a.child(1).task_seed());
    }

    #[test]
    fn site_sampler_respects_density() {
        let law = ImpurityLaw::parse("1:1,3:3").unwrap();
        let s = SiteSampler::new(0.2, &law);
        assert_eq!(s.site(0.25), None);
        assert_eq!(s.site(0.01), Some(0));
        assert_eq!(s.site(0.19), Some(1));
        let clean = SiteSampler::new(0.0, &law);
        assert_eq!(clean.site(0.0), None);
    }

    proptest::proptest! {
        #[test]
        fn canonical_form_reparses_exactly(
            atoms in proptest::collection::vec((-50.0f64..50.0, 0.01f64..10.0), 1..6)
        ) {
            let law = ImpurityLaw::new(atoms.into_iter().map(|(value, weight)| Atom { value, weight })).unwrap();
            let again = ImpurityLaw::parse(&law.to_string()).unwrap();
            proptest::prop_assert_eq!(law, again);
        }
    }
}
