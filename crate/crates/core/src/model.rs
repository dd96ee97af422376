//! Chain parameters of the driven chiral clock model, disorder sampling,
//! diagonal energies and the cross-Kerr coefficient mapping.
//!
//! All energies are phases per Floquet cycle (radians); the cycle unitary is
//! `exp(-i H)` with no separate time step.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{checked_dim, omega3_pow, TritString, C64};
use crate::error::{Error, Result};

/// Name of the generator behind [`sample_disorder`], recorded in run manifests.
pub const PRNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9), key = seed_from_u64(seed), stream = instance";

const ANGLE_SLACK: f64 = 1e-12;

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn check_angle(name: &str, theta: f64) -> Result<()> {
    if !theta.is_finite() || theta <= -PI - ANGLE_SLACK || theta > PI + ANGLE_SLACK {
        return Err(Error::InvalidParameter(format!(
            "{name} = {theta} is outside (-pi, pi]"
        )));
    }
    Ok(())
}

fn check_magnitude(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be finite and >= 0")));
    }
    Ok(())
}

/// Couplings on the bond between sites `j` and `j+1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BondCoupling {
    #[serde(rename = "J")]
    pub j: f64,
    pub theta: f64,
    #[serde(rename = "J_prime")]
    pub j_prime: f64,
    pub theta_prime: f64,
}

impl BondCoupling {
    /// Z3-preserving coupling only.
    pub fn chiral(j: f64, theta: f64) -> Self {
        Self {
            j,
            theta,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        check_magnitude("J", self.j)?;
        check_magnitude("J_prime", self.j_prime)?;
        check_angle("theta", self.theta)?;
        check_angle("theta_prime", self.theta_prime)
    }

    /// Diagonal energy contribution `2 J cos(2pi(a-b)/3 + theta) + 2 J' cos(2pi(a+b)/3 + theta')`.
    pub fn energy(&self, a: u8, b: u8) -> f64 {
        self.z3_energy(a, b) + self.breaking_energy(a, b)
    }

    pub fn z3_energy(&self, a: u8, b: u8) -> f64 {
        2.0 * self.j * (TAU * (a as f64 - b as f64) / 3.0 + self.theta).cos()
    }

    pub fn breaking_energy(&self, a: u8, b: u8) -> f64 {
        2.0 * self.j_prime * (TAU * (a as f64 + b as f64) / 3.0 + self.theta_prime).cos()
    }
}

/// On-site field `h e^{i phi} Z + h.c.`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SiteField {
    pub h: f64,
    pub phi: f64,
}

impl SiteField {
    fn validate(&self) -> Result<()> {
        check_magnitude("h", self.h)?;
        check_angle("phi", self.phi)
    }

    pub fn energy(&self, s: u8) -> f64 {
        2.0 * self.h * (TAU * s as f64 / 3.0 + self.phi).cos()
    }
}

/// Open chain of `n_sites` qutrits: `n_sites - 1` bonds and `n_sites` fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainParamsRepr")]
pub struct ChainParams {
    n_sites: usize,
    bonds: Vec<BondCoupling>,
    fields: Vec<SiteField>,
}

#[derive(Deserialize)]
struct ChainParamsRepr {
    n_sites: usize,
    bonds: Vec<BondCoupling>,
    fields: Vec<SiteField>,
}

impl TryFrom<ChainParamsRepr> for ChainParams {
    type Error = Error;

    fn try_from(r: ChainParamsRepr) -> Result<Self> {
        let p = Self::new(r.bonds, r.fields)?;
        if p.n_sites != r.n_sites {
            return Err(Error::InvalidParameter(format!(
                "n_sites = {} but {} fields were given",
                r.n_sites, p.n_sites
            )));
        }
        Ok(p)
    }
}

impl ChainParams {
    pub fn new(bonds: Vec<BondCoupling>, fields: Vec<SiteField>) -> Result<Self> {
        let n_sites = fields.len();
        if n_sites == 0 {
            return Err(Error::InvalidParameter("a chain needs at least one site".into()));
        }
        if bonds.len() != n_sites - 1 {
            return Err(Error::InvalidParameter(format!(
                "{} sites need {} bonds, got {}",
                n_sites,
                n_sites - 1,
                bonds.len()
            )));
        }
        bonds.iter().try_for_each(BondCoupling::validate)?;
        fields.iter().try_for_each(SiteField::validate)?;
        Ok(Self {
            n_sites,
            bonds,
            fields,
        })
    }

    /// Every bond and every field identical.
    pub fn uniform(n_sites: usize, bond: BondCoupling, field: SiteField) -> Result<Self> {
        Self::new(
            vec![bond; n_sites.saturating_sub(1)],
            vec![field; n_sites.max(1)],
        )
    }

    pub fn zero(n_sites: usize) -> Result<Self> {
        Self::uniform(n_sites, BondCoupling::default(), SiteField::default())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bonds(&self) -> &[BondCoupling] {
        &self.bonds
    }

    pub fn fields(&self) -> &[SiteField] {
        &self.fields
    }

    /// Copy with the Z3-breaking terms (J', h) removed.
    pub fn z3_part(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            bonds: self
                .bonds
                .iter()
                .map(|b| BondCoupling::chiral(b.j, b.theta))
                .collect(),
            fields: vec![SiteField::default(); self.n_sites],
        }
    }

    /// Copy with every chiral angle replaced by `theta`.
    pub fn with_chirality(&self, theta: f64) -> Result<Self> {
        let bonds = self
            .bonds
            .iter()
            .map(|b| BondCoupling { theta, ..*b })
            .collect();
        Self::new(bonds, self.fields.clone())
    }

    fn check_len(&self, s: &TritString) -> Result<()> {
        if s.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: s.len(),
            });
        }
        Ok(())
    }
}

/// How a family of angles is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMode {
    /// Uniform on (-pi, pi].
    UniformFullCircle,
    Zero,
}

/// How the chiral angles `theta_j` are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ChiralityMode {
    /// `-pi + k pi/3 + u`, `k` uniform in 0..6, `u` uniform in `theta_sector_range`.
    Disordered,
    Zero,
    Fixed { theta: f64 },
    /// `k pi/3` with `k` uniform in 0..6.
    MultiplesOfPiOver3,
}

/// Distribution of disordered chain parameters. Fields missing from JSON
/// take their [`DisorderSpec::numerics`] values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisorderSpec {
    #[serde(rename = "J_range")]
    pub j_range: [f64; 2],
    pub theta_sector_range: [f64; 2],
    #[serde(rename = "J_prime_range")]
    pub j_prime_range: [f64; 2],
    pub theta_prime_mode: AngleMode,
    pub h_range: [f64; 2],
    pub phi_mode: AngleMode,
    pub seed: u64,
    pub chirality_mode: ChiralityMode,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self::numerics(0)
    }
}

impl DisorderSpec {
    /// `J, J', h` in [0.1, 0.3], every angle uniform on the circle.
    pub fn numerics(seed: u64) -> Self {
        Self {
            j_range: [0.1, 0.3],
            theta_sector_range: [0.0, FRAC_PI_3],
            j_prime_range: [0.1, 0.3],
            theta_prime_mode: AngleMode::UniformFullCircle,
            h_range: [0.1, 0.3],
            phi_mode: AngleMode::UniformFullCircle,
            seed,
            chirality_mode: ChiralityMode::Disordered,
        }
    }

    /// Device-like couplings: `J` in [0.08, 0.25] and `theta mod pi/3` in
    /// [0.125, 0.9]; `J', h` in [0.1, 0.3].
    pub fn device(seed: u64) -> Self {
        Self {
            j_range: [0.08, 0.25],
            theta_sector_range: [0.125, 0.9],
            ..Self::numerics(seed)
        }
    }

    pub fn with_chirality(mut self, mode: ChiralityMode) -> Self {
        self.chirality_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("J_range", self.j_range),
            ("J_prime_range", self.j_prime_range),
            ("h_range", self.h_range),
        ] {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] || r[0] < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = [{}, {}] must satisfy 0 <= lo <= hi",
                    r[0], r[1]
                )));
            }
        }
        let [lo, hi] = self.theta_sector_range;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi || hi > FRAC_PI_3 {
            return Err(Error::InvalidParameter(format!(
                "theta_sector_range = [{lo}, {hi}] must lie within [0, pi/3]"
            )));
        }
        if let ChiralityMode::Fixed { theta } = self.chirality_mode {
            check_angle("fixed theta", theta)?;
        }
        Ok(())
    }

    /// Generator for one disorder instance.
    pub fn rng(&self, instance: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(instance);
        rng
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn uniform_angle(rng: &mut ChaCha8Rng, mode: AngleMode) -> f64 {
    match mode {
        // pi - 2 pi u with u in [0, 1) lands in (-pi, pi]
        AngleMode::UniformFullCircle => PI - TAU * rng.random::<f64>(),
        AngleMode::Zero => 0.0,
    }
}

/// Draws one parameter set. Deterministic in `(spec.seed, instance)`.
///
/// Draw order: per bond `J`, `theta`, `J'`, `theta'`; then per site `h`, `phi`.
pub fn sample_disorder(spec: &DisorderSpec, n_sites: usize, instance: u64) -> Result<ChainParams> {
    spec.validate()?;
    if n_sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "disorder sampling needs at least 2 sites, got {n_sites}"
        )));
    }
    let mut rng = spec.rng(instance);
    let mut bonds = Vec::with_capacity(n_sites - 1);
    for _ in 0..n_sites - 1 {
        let j = uniform_in(&mut rng, spec.j_range);
        let theta = match spec.chirality_mode {
            ChiralityMode::Disordered => {
                let k = rng.random_range(0..6u32) as f64;
                let u = uniform_in(&mut rng, spec.theta_sector_range);
                wrap_angle(-PI + k * FRAC_PI_3 + u)
            }
            ChiralityMode::Zero => 0.0,
            ChiralityMode::Fixed { theta } => theta,
            ChiralityMode::MultiplesOfPiOver3 => {
                let k = rng.random_range(0..6u32) as f64;
                wrap_angle(k * FRAC_PI_3)
            }
        };
        let j_prime = uniform_in(&mut rng, spec.j_prime_range);
        let theta_prime = uniform_angle(&mut rng, spec.theta_prime_mode);
        bonds.push(BondCoupling {
            j,
            theta,
            j_prime,
            theta_prime,
        });
    }
    let fields = (0..n_sites)
        .map(|_| {
            let h = uniform_in(&mut rng, spec.h_range);
            let phi = uniform_angle(&mut rng, spec.phi_mode);
            SiteField { h, phi }
        })
        .collect();
    ChainParams::new(bonds, fields)
}

/// Z3-preserving energy `2 sum_j J_j cos(2 pi (s_j - s_{j+1})/3 + theta_j)`.
pub fn epsilon_z3(s: &TritString, p: &ChainParams) -> Result<f64> {
    p.check_len(s)?;
    let t = s.trits();
    Ok(p.bonds
        .iter()
        .enumerate()
        .map(|(j, b)| b.z3_energy(t[j], t[j + 1]))
        .sum())
}

/// Z3-breaking energy from the `J'` bonds and the on-site fields.
pub fn epsilon_prime(s: &TritString, p: &ChainParams) -> Result<f64> {
    p.check_len(s)?;
    let t = s.trits();
    let bonds: f64 = p
        .bonds
        .iter()
        .enumerate()
        .map(|(j, b)| b.breaking_energy(t[j], t[j + 1]))
        .sum();
    let fields: f64 = p.fields.iter().zip(t).map(|(f, &s)| f.energy(s)).sum();
    Ok(bonds + fields)
}

fn tabulated_energies(p: &ChainParams, include_breaking: bool) -> Result<Vec<f64>> {
    let n = p.n_sites;
    let dim = checked_dim(n)
        .filter(|_| n <= crate::algebra::MAX_STATE_SITES)
        .ok_or(Error::SizeCap {
            n_sites: n,
            cap: crate::algebra::MAX_STATE_SITES,
            what: "diagonal energies",
        })?;
    let bond_tables: Vec<[f64; 9]> = p
        .bonds
        .iter()
        .map(|b| {
            let mut t = [0.0; 9];
            for a in 0..3u8 {
                for c in 0..3u8 {
                    t[(a * 3 + c) as usize] = if include_breaking {
                        b.energy(a, c)
                    } else {
                        b.z3_energy(a, c)
                    };
                }
            }
            t
        })
        .collect();
    let field_tables: Vec<[f64; 3]> = p
        .fields
        .iter()
        .map(|f| {
            if include_breaking {
                [f.energy(0), f.energy(1), f.energy(2)]
            } else {
                [0.0; 3]
            }
        })
        .collect();

    let mut trits = vec![0u8; n];
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut e = 0.0;
        for j in 0..n {
            e += field_tables[j][trits[j] as usize];
            if j + 1 < n {
                e += bond_tables[j][(trits[j] * 3 + trits[j + 1]) as usize];
            }
        }
        out.push(e);
        // odometer increment, last site least significant
        for t in trits.iter_mut().rev() {
            *t += 1;
            if *t < 3 {
                break;
            }
            *t = 0;
        }
    }
    Ok(out)
}

/// `epsilon_z3(s) + epsilon_prime(s)` for every basis state, in basis-index order.
pub fn diagonal_energies(p: &ChainParams) -> Result<Vec<f64>> {
    tabulated_energies(p, true)
}

/// `epsilon_z3(s)` alone for every basis state.
pub fn z3_energies(p: &ChainParams) -> Result<Vec<f64>> {
    tabulated_energies(p, false)
}

/// The four dispersive phases of one bond, accumulated on |11>, |12>, |21>, |22>.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossKerrAngles {
    pub theta_11: f64,
    pub theta_12: f64,
    pub theta_21: f64,
    pub theta_22: f64,
}

impl CrossKerrAngles {
    pub fn validate(&self) -> Result<()> {
        check_angle("theta_11", self.theta_11)?;
        check_angle("theta_12", self.theta_12)?;
        check_angle("theta_21", self.theta_21)?;
        check_angle("theta_22", self.theta_22)
    }

    fn get(&self, i: u8, j: u8) -> f64 {
        match (i, j) {
            (1, 1) => self.theta_11,
            (1, 2) => self.theta_12,
            (2, 1) => self.theta_21,
            (2, 2) => self.theta_22,
            _ => 0.0,
        }
    }
}

/// Clock-model coefficients of one two-qutrit bond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossKerrMapping {
    pub bond: BondCoupling,
    pub field_1: SiteField,
    pub field_2: SiteField,
    /// Identity coefficient `c_00`, a global phase.
    pub h_identity: f64,
}

/// Projection `c_mn = (1/9) sum_{ij} w^{-(i m + j n)} theta_ij` onto `Z^m (x) Z^n`.
pub fn clock_coefficient(a: &CrossKerrAngles, m: u8, n: u8) -> C64 {
    let mut c = C64::new(0.0, 0.0);
    for i in 1..=2u8 {
        for j in 1..=2u8 {
            c += omega3_pow(-((i * m + j * n) as i64)) * a.get(i, j);
        }
    }
    c / 9.0
}

/// Maps a diagonal cross-Kerr gate onto chiral-clock couplings.
pub fn map_cross_kerr(a: &CrossKerrAngles) -> CrossKerrMapping {
    let polar = |c: C64| {
        if c.norm() == 0.0 {
            (0.0, 0.0)
        } else {
            (c.norm(), wrap_angle(c.arg()))
        }
    };
    let (j, theta) = polar(clock_coefficient(a, 1, 2));
    let (j_prime, theta_prime) = polar(clock_coefficient(a, 1, 1));
    let (h1, phi1) = polar(clock_coefficient(a, 1, 0));
    let (h2, phi2) = polar(clock_coefficient(a, 0, 1));
    CrossKerrMapping {
        bond: BondCoupling {
            j,
            theta,
            j_prime,
            theta_prime,
        },
        field_1: SiteField { h: h1, phi: phi1 },
        field_2: SiteField { h: h2, phi: phi2 },
        h_identity: clock_coefficient(a, 0, 0).re,
    }
}

/// Tolerance on the |0j>, |i0> rows when inverting the mapping.
pub const CROSS_KERR_TOL: f64 = 1e-9;

/// Diagonal of the two-site Hamiltonian built from clock-model coefficients,
/// indexed `3 s1 + s2`.
pub fn two_site_diagonal(m: &CrossKerrMapping) -> [f64; 9] {
    let mut d = [0.0; 9];
    for s1 in 0..3u8 {
        for s2 in 0..3u8 {
            let b = m.bond;
            d[(3 * s1 + s2) as usize] = m.h_identity
                + b.energy(s1, s2)
                + m.field_1.energy(s1)
                + m.field_2.energy(s2);
        }
    }
    d
}

/// Inverse of [`map_cross_kerr`]; rejects coefficients whose diagonal is
/// nonzero on any state containing a `0`.
pub fn unmap_to_cross_kerr(m: &CrossKerrMapping) -> Result<CrossKerrAngles> {
    let d = two_site_diagonal(m);
    let residual = [0usize, 1, 2, 3, 6]
        .iter()
        .map(|&k| d[k] * d[k])
        .sum::<f64>()
        .sqrt();
    if !residual.is_finite() || residual > CROSS_KERR_TOL {
        return Err(Error::NotCrossKerr { residual });
    }
    Ok(CrossKerrAngles {
        theta_11: d[4],
        theta_12: d[5],
        theta_21: d[7],
        theta_22: d[8],
    })
}
