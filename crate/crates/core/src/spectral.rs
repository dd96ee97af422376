//! Exact diagonalization of the cycle unitary for short chains: quasienergies,
//! triplet-pairing errors, gap-ratio statistics and a check of the cat-state
//! eigenvectors at the perfect kick.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{dim_for, omega3_pow, shift_index, QutritState, C64};
use crate::error::{Error, Result};
use crate::floquet::{build_floquet, KickSpec};
use crate::model::{diagonal_energies, sample_disorder, z3_energies, ChainParams, DisorderSpec};

/// Largest chain diagonalized unless the caller raises the cap.
pub const DEFAULT_ED_CAP: usize = 8;

/// Full reports keep the quasienergy list only up to this many sites by default.
pub const FULL_SPECTRUM_MAX_SITES: usize = 6;

/// Dense `3^N x 3^N` unitary.
#[derive(Clone, Debug)]
pub struct DenseUnitary {
    n_sites: usize,
    mat: Mat<C64>,
}

impl DenseUnitary {
    /// Wraps a matrix after checking its shape and unitarity to 1e-10.
    pub fn new(n_sites: usize, mat: Mat<C64>) -> Result<Self> {
        let dim = dim_for(n_sites)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        let u = Self { n_sites, mat };
        let deviation = u.unitarity_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.mat
    }

    /// `max |U^dag U - I|`. Cubic in the dimension.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let mut worst = 0.0f64;
        for j in 0..prod.ncols() {
            for i in 0..prod.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &QutritState) -> Result<QutritState> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let amps = state.amplitudes();
        let out = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.mat[(i, j)] * amps[j]).sum())
            .collect();
        QutritState::from_amplitudes(self.n_sites, out)
    }
}

/// Dense cycle operator with the default size cap.
pub fn dense_floquet(p: &ChainParams, k: &KickSpec) -> Result<DenseUnitary> {
    dense_floquet_capped(p, k, DEFAULT_ED_CAP)
}

/// `diag(e^{-iE}) * (kick (x) ... (x) kick)` for chains of at most `cap` sites.
pub fn dense_floquet_capped(p: &ChainParams, k: &KickSpec, cap: usize) -> Result<DenseUnitary> {
    let n = p.n_sites();
    if n > cap {
        return Err(Error::SizeCap {
            n_sites: n,
            cap,
            what: "exact diagonalization",
        });
    }
    let op = build_floquet(p, k)?;
    let dim = op.diag_phases().len();
    let kick = op.kick().entries();
    let mut trits = vec![0u8; dim * n];
    for idx in 0..dim {
        let mut rest = idx;
        for j in (0..n).rev() {
            trits[idx * n + j] = (rest % 3) as u8;
            rest /= 3;
        }
    }
    let phases = op.diag_phases();
    let mat = Mat::<C64>::from_fn(dim, dim, |a, b| {
        let (ta, tb) = (&trits[a * n..(a + 1) * n], &trits[b * n..(b + 1) * n]);
        let mut v = phases[a];
        for (&x, &y) in ta.iter().zip(tb) {
            v *= kick[x as usize][y as usize];
        }
        v
    });
    Ok(DenseUnitary { n_sites: n, mat })
}

/// Maps any angle to [-pi, pi).
pub fn wrap_quasienergy(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

fn sort_levels(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// `-arg(lambda)` for every eigenvalue, wrapped to [-pi, pi) and sorted.
pub fn quasienergies(u: &DenseUnitary) -> Result<Vec<f64>> {
    let values = u
        .mat
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("unitary eigenvalues: {e:?}")))?;
    Ok(sort_levels(
        values.iter().map(|l| wrap_quasienergy(-l.arg())).collect(),
    ))
}

/// Closed-form spectrum at `g = 1`: every orbit energy plus its two partners.
pub fn analytic_g1_spectrum(p: &ChainParams) -> Result<Vec<f64>> {
    let energies = z3_energies(p)?;
    // orbit representatives are the states with s_1 = 0
    let reps = energies.len() / 3;
    let mut out = Vec::with_capacity(energies.len());
    for e in &energies[..reps] {
        for k in [-1.0, 0.0, 1.0] {
            out.push(wrap_quasienergy(e + k * TAU / 3.0));
        }
    }
    Ok(sort_levels(out))
}

/// Circular gaps (`delta0`, wrap gap included) and triplet-partner errors
/// (`delta23`) of a sorted spectrum.
pub fn pairing_errors(eps: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = eps.len();
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::NotTriplet(n));
    }
    let delta0 = circular_gaps(eps);
    let delta23 = (0..n)
        .map(|i| {
            let d = (eps[(i + n / 3) % n] - eps[i]).rem_euclid(TAU);
            (d - TAU / 3.0).abs()
        })
        .collect();
    Ok((delta0, delta23))
}

fn circular_gaps(eps: &[f64]) -> Vec<f64> {
    let n = eps.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                eps[i + 1] - eps[i]
            } else {
                eps[0] + TAU - eps[n - 1]
            }
        })
        .collect()
}

/// Mean of `min/max` over consecutive circular gap pairs. A pair of zero gaps counts as 0.
pub fn gap_ratio_stat(eps: &[f64]) -> Result<f64> {
    let n = eps.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "gap ratio needs at least 3 levels, got {n}"
        )));
    }
    let gaps = circular_gaps(eps);
    let total: f64 = (0..n)
        .map(|i| {
            let (a, b) = (gaps[i], gaps[(i + 1) % n]);
            let hi = a.max(b);
            if hi > 0.0 {
                a.min(b) / hi
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / n as f64)
}

/// Largest circular distance between matched levels of two sorted spectra,
/// minimized over cyclic relabelings (levels may wrap across -pi).
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let n = a.len();
    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let mut best = f64::INFINITY;
    for shift in 0..n.max(1) {
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max(circ(a[i], b[(i + shift) % n]));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    Ok(if n == 0 { 0.0 } else { best })
}

/// Summary statistics of one spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n_sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasienergies: Option<Vec<f64>>,
    pub delta0_mean: f64,
    pub delta23_mean: f64,
    pub r_mean: f64,
}

impl SpectralReport {
    /// Keeps the level list when `full` is set or the chain is short.
    pub fn from_quasienergies(n_sites: usize, eps: Vec<f64>, full: bool) -> Result<Self> {
        let (d0, d23) = pairing_errors(&eps)?;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(Self {
            n_sites,
            delta0_mean: mean(&d0),
            delta23_mean: mean(&d23),
            r_mean: gap_ratio_stat(&eps)?,
            quasienergies: (full || n_sites <= FULL_SPECTRUM_MAX_SITES).then_some(eps),
        })
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Diagonalizes `draws` disorder realizations (instances `0..draws`) in parallel.
pub fn spectral_ensemble(
    spec: &DisorderSpec,
    n_sites: usize,
    k: &KickSpec,
    draws: u64,
    cap: usize,
) -> Result<Vec<SpectralReport>> {
    (0..draws)
        .into_par_iter()
        .map(|i| {
            let p = sample_disorder(spec, n_sites, i)?;
            let eps = quasienergies(&dense_floquet_capped(&p, k, cap)?)?;
            SpectralReport::from_quasienergies(n_sites, eps, false)
        })
        .collect()
}

/// Per-eigenvector result of [`cat_state_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatEigenvector {
    pub quasienergy: f64,
    /// Basis index of the dominant orbit's member with `s_1 = 0`.
    pub orbit: usize,
    /// Total mass on the dominant orbit.
    pub orbit_mass: f64,
    /// Largest `|mass - 1/3|` over the three orbit members.
    pub support_error: f64,
    /// `1 - |<analytic|numeric>|`.
    pub phase_error: f64,
    /// Distance between the numeric quasienergy and the closed-form one.
    pub quasienergy_error: f64,
    /// Largest mass any orbit puts on two of its members.
    pub partial_orbit_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatStateReport {
    pub tolerance: f64,
    pub eigenvectors: Vec<CatEigenvector>,
    /// Indices into `eigenvectors` that miss orbit support or the analytic phases.
    pub failures: Vec<usize>,
}

impl CatStateReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_partial_orbit_mass(&self) -> f64 {
        self.eigenvectors
            .iter()
            .map(|e| e.partial_orbit_mass)
            .fold(0.0, f64::max)
    }

    /// Smallest dominant-orbit mass over all eigenvectors.
    pub fn min_orbit_mass(&self) -> f64 {
        self.eigenvectors
            .iter()
            .map(|e| e.orbit_mass)
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean dominant-orbit mass; 1 when every eigenvector is a single-orbit cat.
    pub fn mean_orbit_mass(&self) -> f64 {
        let n = self.eigenvectors.len().max(1) as f64;
        self.eigenvectors.iter().map(|e| e.orbit_mass).sum::<f64>() / n
    }
}

/// Tolerance used by [`cat_state_check`].
pub const CAT_TOL: f64 = 1e-8;

/// Checks every eigenvector of `u` against the equal-weight orbit states of
/// the perfect kick, including their relative phases.
pub fn cat_state_check(u: &DenseUnitary, p: &ChainParams) -> Result<CatStateReport> {
    let n = u.n_sites();
    if p.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: dim_for(p.n_sites())?,
        });
    }
    let dim = u.dim();
    let reps = dim / 3;
    let z3 = z3_energies(p)?;
    let full = diagonal_energies(p)?;
    let breaking: Vec<f64> = full.iter().zip(&z3).map(|(f, z)| f - z).collect();

    let evd = u
        .mat
        .eigen()
        .map_err(|e| Error::Eigen(format!("unitary eigendecomposition: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let mut eigenvectors = Vec::with_capacity(dim);
    let mut failures = Vec::new();
    let mut members = vec![[0.0f64; 3]; reps];
    for col in 0..dim {
        let norm = (0..dim)
            .map(|i| vectors[(i, col)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let v: Vec<C64> = (0..dim).map(|i| vectors[(i, col)] / norm).collect();
        let q = wrap_quasienergy(-values[col].arg());

        // the member slot of index i within its orbit is s_1 = i / reps
        for m in members.iter_mut() {
            *m = [0.0; 3];
        }
        for (i, a) in v.iter().enumerate() {
            let rep = shift_index(i, n, ((3 - i / reps) % 3) as u8);
            members[rep][i / reps] += a.norm_sqr();
        }
        let orbit_mass = |m: &[f64; 3]| m.iter().sum::<f64>();
        let orbit = (0..reps)
            .max_by(|&a, &b| orbit_mass(&members[a]).total_cmp(&orbit_mass(&members[b])))
            .unwrap_or(0);
        let support_error = members[orbit]
            .iter()
            .map(|m| (m - 1.0 / 3.0).abs())
            .fold(0.0, f64::max);
        let partial_orbit_mass = members
            .iter()
            .map(|m| {
                let mut s = *m;
                s.sort_by(f64::total_cmp);
                s[1] + s[2]
            })
            .fold(0.0, f64::max);

        // analytic partner: phases fixed by the symmetry-breaking energies on the orbit
        let idx = [orbit, shift_index(orbit, n, 1), shift_index(orbit, n, 2)];
        let circ = |x: f64| {
            let d = x.rem_euclid(TAU);
            d.min(TAU - d)
        };
        let k = (0..3)
            .min_by(|&a, &b| {
                let da = circ(q - z3[orbit] - TAU * a as f64 / 3.0);
                let db = circ(q - z3[orbit] - TAU * b as f64 / 3.0);
                da.total_cmp(&db)
            })
            .unwrap_or(0);
        let quasienergy_error = circ(q - z3[orbit] - TAU * k as f64 / 3.0);
        let s = 1.0 / 3f64.sqrt();
        let analytic = [
            C64::from_polar(s, -breaking[idx[0]]) * omega3_pow(k as i64),
            C64::from_polar(s, breaking[idx[2]]) * omega3_pow(2 * k as i64),
            C64::new(s, 0.0),
        ];
        let overlap: C64 = idx
            .iter()
            .zip(&analytic)
            .map(|(&i, a)| a.conj() * v[i])
            .sum();
        let phase_error = (1.0 - overlap.norm()).abs();

        if support_error > CAT_TOL || phase_error > CAT_TOL || quasienergy_error > CAT_TOL {
            failures.push(col);
        }
        eigenvectors.push(CatEigenvector {
            quasienergy: q,
            orbit,
            orbit_mass: orbit_mass(&members[orbit]),
            support_error,
            phase_error,
            quasienergy_error,
            partial_orbit_mass,
        });
    }
    Ok(CatStateReport {
        tolerance: CAT_TOL,
        eigenvectors,
        failures,
    })
}
