//! Measured quantities: populations and spin-1 magnetization, clock
//! correlators and the Edwards-Anderson parameter, subsystem density
//! matrices with purity and entropy, and DFT spectroscopy.
//!
//! Everything is evaluated exactly on the pure state; there is no shot noise.

use std::f64::consts::TAU;
use std::io::Write;

use faer::{Mat, Side};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::algebra::{omega3_pow, QutritState, C64};
use crate::error::{Error, Result};

/// Which quantities a trajectory records at every cycle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservableSet {
    /// `p0`, `p1`, `p2` for every site.
    pub populations: bool,
    /// `magnetization` for every site.
    pub magnetization: bool,
    /// Sites whose autocorrelator is tracked.
    pub autocorrelator_sites: Vec<usize>,
    /// `chi_ea` over all ordered site pairs.
    pub chi_ea: bool,
    /// Subsystems (one or two sites) whose `purity` and `entropy` are recorded.
    pub tomography: Vec<Vec<usize>>,
}

impl ObservableSet {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let check = |site: usize| {
            if site == 0 || site > n_sites {
                Err(Error::SiteOutOfRange { site, n_sites })
            } else {
                Ok(())
            }
        };
        self.autocorrelator_sites.iter().try_for_each(|&s| check(s))?;
        for sub in &self.tomography {
            check_subsystem(sub, n_sites)?;
        }
        Ok(())
    }

    /// Everything except autocorrelators, which need the shadow states the
    /// trajectory runner keeps.
    pub fn evaluate(&self, state: &QutritState, t: usize) -> Result<Vec<Observation>> {
        let mut out = Vec::new();
        let n = state.n_sites();
        let real = |site: String, observable: &str, v: f64| Observation {
            t,
            site,
            observable: observable.into(),
            value: C64::new(v, 0.0),
        };
        if self.populations || self.magnetization {
            for site in 1..=n {
                let p = state.site_populations(site)?;
                if self.populations {
                    for (k, pk) in p.iter().enumerate() {
                        out.push(real(site.to_string(), &format!("p{k}"), *pk));
                    }
                }
                if self.magnetization {
                    out.push(real(site.to_string(), "magnetization", p[0] - p[2]));
                }
            }
        }
        if self.chi_ea {
            out.push(real("all".into(), "chi_ea", chi_ea(state)));
        }
        for sub in &self.tomography {
            let rho = reduced_density(state, sub)?;
            let label = sub
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("+");
            out.push(real(label.clone(), "purity", rho.purity()));
            out.push(real(label, "entropy", rho.entropy()?));
        }
        Ok(out)
    }
}

/// One recorded value. `site` is a site number, `a+b` for a subsystem, or `all`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub t: usize,
    pub site: String,
    pub observable: String,
    pub value: C64,
}

/// `P(0) - P(2)` on one site.
pub fn magnetization(state: &QutritState, site: usize) -> Result<f64> {
    let p = state.site_populations(site)?;
    Ok(p[0] - p[2])
}

/// `<Z_site>`.
pub fn clock_expectation(state: &QutritState, site: usize) -> Result<C64> {
    let p = state.site_populations(site)?;
    Ok((0..3).map(|k| omega3_pow(k as i64) * p[k]).sum())
}

/// Probability mass of `s_j - s_i = d (mod 3)` for every pair `i < j`,
/// indexed `[pair][d]` in row-major pair order.
fn pair_difference_masses(state: &QutritState) -> Vec<[f64; 3]> {
    let n = state.n_sites();
    let mut masses = vec![[0.0; 3]; n * (n - 1) / 2];
    let mut trits = vec![0u8; n];
    for a in state.amplitudes() {
        let p = a.norm_sqr();
        if p > 0.0 {
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    masses[k][((trits[j] + 3 - trits[i]) % 3) as usize] += p;
                    k += 1;
                }
            }
        }
        for t in trits.iter_mut().rev() {
            *t += 1;
            if *t < 3 {
                break;
            }
            *t = 0;
        }
    }
    masses
}

fn masses_to_correlator(m: &[f64; 3]) -> C64 {
    (0..3).map(|d| omega3_pow(d as i64) * m[d]).sum()
}

/// `<Z_i^dag Z_j>`.
pub fn clock_correlator(state: &QutritState, i: usize, j: usize) -> Result<C64> {
    state.check_site(i)?;
    state.check_site(j)?;
    if i == j {
        return Ok(C64::new(1.0, 0.0));
    }
    let n = state.n_sites();
    let (lo, hi) = (i.min(j) - 1, i.max(j) - 1);
    let k = lo * n - lo * (lo + 1) / 2 + (hi - lo - 1);
    let c = masses_to_correlator(&pair_difference_masses(state)[k]);
    Ok(if i < j { c } else { c.conj() })
}

/// Edwards-Anderson parameter `(1/N) sum_{i != j} |<Z_i^dag Z_j>|^2`, in [0, N-1].
pub fn chi_ea(state: &QutritState) -> f64 {
    let n = state.n_sites();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = pair_difference_masses(state)
        .iter()
        .map(|m| masses_to_correlator(m).norm_sqr())
        .sum();
    2.0 * total / n as f64
}

/// Mean of `chi_ea` over a window of states.
pub fn chi_ea_windowed(window: &[QutritState]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Empty("chi_ea window"));
    }
    Ok(window.iter().map(chi_ea).sum::<f64>() / window.len() as f64)
}

fn check_subsystem(sites: &[usize], n_sites: usize) -> Result<()> {
    if sites.is_empty() || sites.len() > 2 {
        return Err(Error::InvalidParameter(format!(
            "tomography subsystems hold 1 or 2 sites, got {}",
            sites.len()
        )));
    }
    for &s in sites {
        if s == 0 || s > n_sites {
            return Err(Error::SiteOutOfRange { site: s, n_sites });
        }
    }
    if sites.len() == 2 && sites[0] == sites[1] {
        return Err(Error::InvalidParameter("subsystem sites must be distinct".into()));
    }
    Ok(())
}

/// Hermitian, unit-trace, positive semidefinite matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

const DENSITY_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity to 1e-10.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let rho = Self { dim, data };
        for i in 0..dim {
            for j in 0..dim {
                if (rho.get(i, j) - rho.get(j, i).conj()).norm() > DENSITY_TOL {
                    return Err(Error::InvalidDensity("not hermitian".into()));
                }
            }
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min = rho.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let m = Mat::<C64>::from_fn(self.dim, self.dim, |i, j| self.get(i, j));
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("hermitian eigenvalues: {e:?}")))
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Von Neumann entropy with the natural logarithm.
    pub fn entropy(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .into_iter()
            .map(|l| l.max(0.0))
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.ln())
            .sum())
    }
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.entropy()
}

/// Partial trace onto one or two sites; the local basis follows the order of `sites`.
pub fn reduced_density(state: &QutritState, sites: &[usize]) -> Result<DensityMatrix> {
    let n = state.n_sites();
    check_subsystem(sites, n)?;
    let strides: Vec<usize> = sites.iter().map(|&s| state.stride(s)).collect();
    let local_dim = 3usize.pow(sites.len() as u32);
    let offsets: Vec<usize> = (0..local_dim)
        .map(|l| {
            let mut rest = l;
            let mut off = 0;
            for &stride in strides.iter().rev() {
                off += (rest % 3) * stride;
                rest /= 3;
            }
            off
        })
        .collect();
    let amps = state.amplitudes();
    let mut data = vec![C64::new(0.0, 0.0); local_dim * local_dim];
    let mut v = vec![C64::new(0.0, 0.0); local_dim];
    for base in 0..amps.len() {
        if strides.iter().any(|&st| (base / st) % 3 != 0) {
            continue;
        }
        for (slot, &off) in v.iter_mut().zip(&offsets) {
            *slot = amps[base + off];
        }
        for a in 0..local_dim {
            for b in 0..local_dim {
                data[a * local_dim + b] += v[a] * v[b].conj();
            }
        }
    }
    Ok(DensityMatrix {
        dim: local_dim,
        data,
    })
}

/// Plain DFT magnitudes `|sum_t m(t) e^{-i w_k t}| / T` on `w_k = 2 pi k / T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Bin whose frequency is circularly closest to `omega`.
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let t = self.len() as f64;
        ((omega.rem_euclid(TAU) / TAU * t).round() as usize) % self.len()
    }

    /// Non-DC bins of the one-sided spectrum, `1..=T/2`.
    pub fn one_sided_bins(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.len() / 2
    }

    /// Share of one-sided non-DC power (squared magnitude) in `bin`.
    pub fn power_fraction(&self, bin: usize) -> f64 {
        let total: f64 = self
            .one_sided_bins()
            .map(|k| self.magnitudes[k].powi(2))
            .sum();
        if total == 0.0 {
            return 0.0;
        }
        self.magnitudes[bin].powi(2) / total
    }

    /// Strongest non-DC bin of the one-sided spectrum.
    pub fn dominant_bin(&self) -> usize {
        self.one_sided_bins()
            .max_by(|&a, &b| self.magnitudes[a].total_cmp(&self.magnitudes[b]))
            .unwrap_or(0)
    }
}

/// Minimum series length accepted by [`fft_response`].
pub const MIN_FFT_LEN: usize = 4;

pub fn fft_response(series: &[f64]) -> Result<Spectrum> {
    let t = series.len();
    if t < MIN_FFT_LEN {
        return Err(Error::SeriesTooShort {
            len: t,
            min: MIN_FFT_LEN,
        });
    }
    let mut buf: Vec<C64> = series.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(t).process(&mut buf);
    Ok(Spectrum {
        omegas: (0..t).map(|k| TAU * k as f64 / t as f64).collect(),
        magnitudes: buf.iter().map(|z| z.norm() / t as f64).collect(),
    })
}

/// `|[A]|(t)`: complex mean over sites, then over instances, modulus last.
///
/// `instances[i][site]` is one autocorrelator series.
pub fn average_autocorrelator(instances: &[Vec<Vec<C64>>]) -> Result<Vec<f64>> {
    let first = instances
        .first()
        .and_then(|i| i.first())
        .ok_or(Error::Empty("autocorrelator set"))?;
    let len = first.len();
    let mut total = vec![C64::new(0.0, 0.0); len];
    for sites in instances {
        if sites.is_empty() {
            return Err(Error::Empty("autocorrelator instance without sites"));
        }
        let mut mean = vec![C64::new(0.0, 0.0); len];
        for series in sites {
            if series.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: series.len(),
                });
            }
            for (m, z) in mean.iter_mut().zip(series) {
                *m += z;
            }
        }
        for (tot, m) in total.iter_mut().zip(&mean) {
            *tot += m / sites.len() as f64;
        }
    }
    Ok(total
        .into_iter()
        .map(|z| (z / instances.len() as f64).norm())
        .collect())
}

/// FFT magnitudes indexed by site, kick strength and frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyGrid {
    pub sites: Vec<usize>,
    pub g_values: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Row-major `[site][g][omega]`.
    pub magnitude: Vec<f64>,
}

impl SpectroscopyGrid {
    pub fn new(sites: Vec<usize>, g_values: Vec<f64>, omegas: Vec<f64>) -> Self {
        let len = sites.len() * g_values.len() * omegas.len();
        Self {
            sites,
            g_values,
            omegas,
            magnitude: vec![0.0; len],
        }
    }

    fn offset(&self, site_idx: usize, g_idx: usize) -> usize {
        (site_idx * self.g_values.len() + g_idx) * self.omegas.len()
    }

    pub fn row(&self, site_idx: usize, g_idx: usize) -> &[f64] {
        let o = self.offset(site_idx, g_idx);
        &self.magnitude[o..o + self.omegas.len()]
    }

    pub fn row_mut(&mut self, site_idx: usize, g_idx: usize) -> &mut [f64] {
        let o = self.offset(site_idx, g_idx);
        let len = self.omegas.len();
        &mut self.magnitude[o..o + len]
    }

    /// Long-form CSV `site,g,omega,magnitude`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["site", "g", "omega", "magnitude"])?;
        for (si, site) in self.sites.iter().enumerate() {
            for (gi, g) in self.g_values.iter().enumerate() {
                for (omega, m) in self.omegas.iter().zip(self.row(si, gi)) {
                    out.serialize((site, g, omega, m))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Whitespace table for gnuplot: one `index` block per site, blank lines
    /// between g scans so `splot ... with pm3d` works directly.
    pub fn write_gnuplot<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# g omega magnitude")?;
        for (si, site) in self.sites.iter().enumerate() {
            if si > 0 {
                writeln!(w, "\n")?;
            }
            writeln!(w, "# site {site}")?;
            for (gi, g) in self.g_values.iter().enumerate() {
                for (omega, m) in self.omegas.iter().zip(self.row(si, gi)) {
                    writeln!(w, "{g} {omega} {m}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}
