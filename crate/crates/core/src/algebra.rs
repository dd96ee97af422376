//! Qutrit clock/shift algebra, chain basis indexing and local gate application.
//!
//! Basis ordering: for a chain of `N` qutrits, the trit string `s_1 s_2 ... s_N`
//! maps to the index `sum_j s_j * 3^(N-j)`, so site 1 is the most significant
//! trit. Sites are numbered from 1 throughout the public API.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest chain a dense state vector is allowed to hold (3^16 amplitudes, ~690 MB).
pub const MAX_STATE_SITES: usize = 16;

const UNITARY_TOL: f64 = 1e-12;

/// The cube root of unity `e^{2 pi i / 3}`.
pub fn omega3() -> C64 {
    C64::from_polar(1.0, TAU / 3.0)
}

/// `omega3^k` for any integer `k`, evaluated from the reduced exponent.
pub fn omega3_pow(k: i64) -> C64 {
    C64::from_polar(1.0, TAU * k.rem_euclid(3) as f64 / 3.0)
}

/// `3^n`, or `None` on overflow.
pub fn checked_dim(n_sites: usize) -> Option<usize> {
    3usize.checked_pow(u32::try_from(n_sites).ok()?)
}

pub(crate) fn dim_for(n_sites: usize) -> Result<usize> {
    if n_sites == 0 {
        return Err(Error::EmptyTritString);
    }
    if n_sites > MAX_STATE_SITES {
        return Err(Error::SizeCap {
            n_sites,
            cap: MAX_STATE_SITES,
            what: "state vector",
        });
    }
    Ok(3usize.pow(n_sites as u32))
}

/// Product basis label of a chain: one trit per site, site 1 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TritString(Vec<u8>);

impl TritString {
    pub fn new(trits: Vec<u8>) -> Result<Self> {
        if trits.is_empty() {
            return Err(Error::EmptyTritString);
        }
        if let Some((position, &t)) = trits.iter().enumerate().find(|(_, &t)| t > 2) {
            return Err(Error::InvalidTrit {
                position,
                value: char::from_digit(t as u32, 36).unwrap_or('?'),
            });
        }
        Ok(Self(trits))
    }

    /// All sites set to `trit`.
    pub fn uniform(n_sites: usize, trit: u8) -> Result<Self> {
        Self::new(vec![trit; n_sites])
    }

    /// Inverse of [`TritString::index`].
    pub fn from_index(index: usize, n_sites: usize) -> Result<Self> {
        let dim = checked_dim(n_sites).ok_or(Error::IndexOutOfRange { index, n_sites })?;
        if n_sites == 0 {
            return Err(Error::EmptyTritString);
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, n_sites });
        }
        let mut trits = vec![0u8; n_sites];
        let mut rest = index;
        for slot in trits.iter_mut().rev() {
            *slot = (rest % 3) as u8;
            rest /= 3;
        }
        Ok(Self(trits))
    }

    /// Basis index with site 1 as the most significant trit.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &t| acc * 3 + t as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trits(&self) -> &[u8] {
        &self.0
    }

    /// Trit at 1-based `site`.
    pub fn site(&self, site: usize) -> Option<u8> {
        site.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    /// Global shift `s -> s (+) k`, adding `k` mod 3 to every trit.
    pub fn shifted(&self, k: u8) -> Self {
        Self(self.0.iter().map(|&t| (t + k % 3) % 3).collect())
    }
}

/// Free-function form of [`TritString::index`].
pub fn basis_index(s: &TritString) -> usize {
    s.index()
}

impl fmt::Display for TritString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &t in &self.0 {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for TritString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trits = s
            .trim()
            .chars()
            .enumerate()
            .map(|(position, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                value => Err(Error::InvalidTrit { position, value }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(trits)
    }
}

impl TryFrom<String> for TritString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TritString> for String {
    fn from(s: TritString) -> String {
        s.to_string()
    }
}

/// A 3x3 unitary acting on a single qutrit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalUnitary3 {
    m: [[C64; 3]; 3],
}

impl LocalUnitary3 {
    /// Checks `U^dag U = I` entrywise to 1e-12.
    pub fn new(m: [[C64; 3]; 3]) -> Result<Self> {
        let u = Self { m };
        let deviation = u.unitarity_deviation();
        if deviation > UNITARY_TOL || !deviation.is_finite() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub(crate) fn from_entries_unchecked(m: [[C64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Self {
            m: [[l, o, o], [o, l, o], [o, o, l]],
        }
    }

    pub fn entries(&self) -> &[[C64; 3]; 3] {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[j][i].conj();
            }
        }
        Self { m }
    }

    /// Max entrywise deviation of `U^dag U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = Self::identity();
        p.max_abs_diff(&id)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: [C64; 3]) -> [C64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

impl Mul for LocalUnitary3 {
    type Output = LocalUnitary3;

    fn mul(self, rhs: Self) -> Self {
        let mut m = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Self { m }
    }
}

/// Clock operator `Z = diag(1, w, w^2)`.
pub fn clock_z() -> LocalUnitary3 {
    let o = C64::new(0.0, 0.0);
    LocalUnitary3::from_entries_unchecked([
        [C64::new(1.0, 0.0), o, o],
        [o, omega3(), o],
        [o, o, omega3_pow(2)],
    ])
}

/// Shift operator `X|s> = |s+1 mod 3>`.
pub fn shift_x() -> LocalUnitary3 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    LocalUnitary3::from_entries_unchecked([[o, o, l], [l, o, o], [o, l, o]])
}

/// Pauli X on span{|1>, |2>}, identity on |0>.
pub fn subspace_x12() -> LocalUnitary3 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    LocalUnitary3::from_entries_unchecked([[l, o, o], [o, o, l], [o, l, o]])
}

/// Qutrit Fourier matrix `F_{jk} = w^{jk} / sqrt(3)`.
pub fn fourier() -> LocalUnitary3 {
    let s = 1.0 / 3f64.sqrt();
    let mut m = [[C64::new(0.0, 0.0); 3]; 3];
    for (j, row) in m.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = omega3_pow((j * k) as i64) * s;
        }
    }
    LocalUnitary3::from_entries_unchecked(m)
}

/// Maps an eigenphase onto the principal branch (-pi, pi].
fn principal_phase(phi: f64) -> f64 {
    let mut p = phi;
    if p <= -PI + 1e-9 {
        p += TAU;
    }
    if p > PI + 1e-9 {
        p -= TAU;
    }
    p
}

/// Principal-branch power `u^g`: each eigenvalue `e^{i phi}` with phi in
/// (-pi, pi] becomes `e^{i g phi}` on the same eigenvector.
///
/// `g = 0` returns the identity and `g = 1` returns `u` itself, both exactly.
pub fn fractional_power(u: &LocalUnitary3, g: f64) -> Result<LocalUnitary3> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter(format!("power must be finite, got {g}")));
    }
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    if g == 0.0 {
        return Ok(LocalUnitary3::identity());
    }
    if g == 1.0 {
        return Ok(*u);
    }

    let a = Mat::<C64>::from_fn(3, 3, |i, j| u.m[i][j]);
    let evd = a
        .eigen()
        .map_err(|e| Error::Eigen(format!("3x3 eigendecomposition: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let mut lambdas = [C64::new(0.0, 0.0); 3];
    let mut basis = [[C64::new(0.0, 0.0); 3]; 3];
    for k in 0..3 {
        lambdas[k] = values[k];
        for i in 0..3 {
            basis[k][i] = vectors[(i, k)];
        }
    }

    // Gram-Schmidt; for a normal matrix this only touches degenerate clusters.
    for k in 0..3 {
        for prev in 0..k {
            let overlap: C64 = (0..3).map(|i| basis[prev][i].conj() * basis[k][i]).sum();
            let p = basis[prev];
            for (b, q) in basis[k].iter_mut().zip(p) {
                *b -= overlap * q;
            }
        }
        let norm = basis[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return Err(Error::Eigen(
                "eigenvectors of a degenerate cluster are numerically dependent".into(),
            ));
        }
        for z in basis[k].iter_mut() {
            *z /= norm;
        }
    }

    let rebuild = |weights: &[C64; 3]| {
        let mut m = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3)
                    .map(|k| basis[k][i] * weights[k] * basis[k][j].conj())
                    .sum();
            }
        }
        LocalUnitary3::from_entries_unchecked(m)
    };

    let unit: [C64; 3] = lambdas.map(|l| l / l.norm());
    let residual = rebuild(&unit).max_abs_diff(u);
    if residual > 1e-10 {
        return Err(Error::Eigen(format!(
            "eigenbasis does not reconstruct the input (residual {residual:e})"
        )));
    }

    let powered = lambdas.map(|l| C64::from_polar(1.0, g * principal_phase(l.arg())));
    Ok(rebuild(&powered))
}

/// Dense state vector over the `3^N` product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QutritState {
    n_sites: usize,
    amps: Vec<C64>,
}

impl QutritState {
    /// The product basis state `|s>`.
    pub fn basis(s: &TritString) -> Result<Self> {
        let dim = dim_for(s.len())?;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[s.index()] = C64::new(1.0, 0.0);
        Ok(Self {
            n_sites: s.len(),
            amps,
        })
    }

    /// Wraps raw amplitudes; the length must be `3^n_sites`. No normalization is applied.
    pub fn from_amplitudes(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = dim_for(n_sites)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amps.len(),
            });
        }
        Ok(Self { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                found: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Returns the trit string if the state is (up to phase) a single basis state.
    pub fn as_basis_state(&self) -> Option<TritString> {
        let mut found = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-24 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found.and_then(|i| TritString::from_index(i, self.n_sites).ok())
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    /// Stride of the 1-based `site` in the basis index.
    pub(crate) fn stride(&self, site: usize) -> usize {
        3usize.pow((self.n_sites - site) as u32)
    }

    /// Applies `u` to the tensor factor of `site` in place.
    pub fn apply_local(&mut self, site: usize, u: &LocalUnitary3) -> Result<()> {
        self.check_site(site)?;
        let stride = self.stride(site);
        let block = 3 * stride;
        for chunk in self.amps.chunks_exact_mut(block) {
            let (a0, rest) = chunk.split_at_mut(stride);
            let (a1, a2) = rest.split_at_mut(stride);
            for ((x0, x1), x2) in a0.iter_mut().zip(a1.iter_mut()).zip(a2.iter_mut()) {
                let [y0, y1, y2] = u.apply([*x0, *x1, *x2]);
                *x0 = y0;
                *x1 = y1;
                *x2 = y2;
            }
        }
        Ok(())
    }

    /// Applies `u` on every site.
    pub fn apply_global(&mut self, u: &LocalUnitary3) {
        for site in 1..=self.n_sites {
            // sites are in range by construction
            let _ = self.apply_local(site, u);
        }
    }

    /// Marginal distribution `(P(0), P(1), P(2))` of one site.
    pub fn site_populations(&self, site: usize) -> Result<[f64; 3]> {
        self.check_site(site)?;
        let stride = self.stride(site);
        let mut p = [0.0; 3];
        for chunk in self.amps.chunks_exact(3 * stride) {
            for (k, slot) in p.iter_mut().enumerate() {
                *slot += chunk[k * stride..(k + 1) * stride]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum::<f64>();
            }
        }
        Ok(p)
    }

    /// Relabels every basis state `s -> s (+) k`, i.e. applies the global shift `k` times.
    pub fn globally_shifted(&self, k: u8) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = shift_index(i, self.n_sites, k);
            out[j] = *a;
        }
        Self {
            n_sites: self.n_sites,
            amps: out,
        }
    }
}

/// Index of `s (+) k` given the index of `s`.
pub(crate) fn shift_index(index: usize, n_sites: usize, k: u8) -> usize {
    let mut rest = index;
    let mut out = 0;
    let mut place = 1;
    for _ in 0..n_sites {
        let t = rest % 3;
        rest /= 3;
        out += ((t + k as usize) % 3) * place;
        place *= 3;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn ket(s: &str) -> QutritState {
        QutritState::basis(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn basis_index_examples() {
        assert_eq!(basis_index(&"00".parse().unwrap()), 0);
        assert_eq!(basis_index(&"012".parse().unwrap()), 5);
        for i in 0..81 {
            let s = TritString::from_index(i, 4).unwrap();
            assert_eq!(s.index(), i);
            assert_eq!(s.to_string().parse::<TritString>().unwrap(), s);
        }
    }

    #[test]
    fn trit_string_rejects_bad_input() {
        assert!(matches!("013".parse::<TritString>(), Err(Error::InvalidTrit { position: 2, .. })));
        assert!(matches!("".parse::<TritString>(), Err(Error::EmptyTritString)));
        assert!(TritString::from_index(9, 2).is_err());
        assert!(TritString::new(vec![0, 5]).is_err());
    }

    #[test]
    fn clock_and_shift_definitions() {
        let z = clock_z();
        let x = shift_x();
        let e1 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let zv = z.apply(e1);
        assert!(close(zv[1], omega3(), 1e-15));
        let e2 = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let xv = x.apply(e2);
        assert!(close(xv[0], C64::new(1.0, 0.0), 0.0));
        assert!(xv[1].norm() == 0.0 && xv[2].norm() == 0.0);
    }

    #[test]
    fn clock_shift_relations() {
        let z = clock_z();
        let x = shift_x();
        let id = LocalUnitary3::identity();
        let zx = z * x;
        let mut wxz = x * z;
        for row in wxz.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= omega3();
            }
        }
        assert!(zx.max_abs_diff(&wxz) < 1e-14);
        assert!((x * x * x).max_abs_diff(&id) < 1e-15);
        assert!((z * z * z).max_abs_diff(&id) < 1e-14);
    }

    #[test]
    fn fractional_power_of_shift() {
        let x = shift_x();
        assert_eq!(fractional_power(&x, 0.0).unwrap(), LocalUnitary3::identity());
        assert_eq!(fractional_power(&x, 1.0).unwrap(), x);
        let half = fractional_power(&x, 0.5).unwrap();
        assert!((half * half).max_abs_diff(&x) < 1e-12);
        assert!(half.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn fractional_power_matches_fourier_form() {
        // X^g = F diag(1, e^{2 pi i g/3}, e^{-2 pi i g/3}) F^dag for the principal branch,
        // with F chosen so that X F e_k = w^{-k} F e_k.
        let g = 0.37;
        let f = fourier();
        let phases = [0.0, -TAU / 3.0, TAU / 3.0];
        let o = C64::new(0.0, 0.0);
        let d = LocalUnitary3::from_entries_unchecked([
            [C64::from_polar(1.0, g * phases[0]), o, o],
            [o, C64::from_polar(1.0, g * phases[1]), o],
            [o, o, C64::from_polar(1.0, g * phases[2])],
        ]);
        let expected = f * d * f.adjoint();
        let got = fractional_power(&shift_x(), g).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn subspace_flip() {
        let x12 = subspace_x12();
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!(close(x12.apply(one)[2], C64::new(1.0, 0.0), 0.0));
        assert!(close(x12.apply(zero)[0], C64::new(1.0, 0.0), 0.0));
        assert_eq!(fractional_power(&x12, 1.0).unwrap(), x12);
        // degenerate eigenvalue 1 and the branch-cut eigenvalue -1
        let half = fractional_power(&x12, 0.5).unwrap();
        assert!((half * half).max_abs_diff(&x12) < 1e-12);
        assert!(close(half.get(0, 0), C64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn fractional_power_rejects_non_unitary() {
        let mut m = *LocalUnitary3::identity().entries();
        m[0][0] = C64::new(2.0, 0.0);
        let u = LocalUnitary3::from_entries_unchecked(m);
        assert!(matches!(fractional_power(&u, 0.5), Err(Error::NotUnitary { .. })));
        assert!(LocalUnitary3::new(m).is_err());
    }

    #[test]
    fn apply_local_examples() {
        let mut s = ket("00");
        s.apply_local(2, &shift_x()).unwrap();
        assert_eq!(s, ket("01"));

        let mut s = ket("012");
        let before = s.clone();
        s.apply_local(3, &LocalUnitary3::identity()).unwrap();
        assert_eq!(s, before);

        s.apply_global(&shift_x());
        assert_eq!(s, ket("120"));

        assert!(matches!(s.apply_local(0, &shift_x()), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(s.apply_local(4, &shift_x()), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn global_shift_relabels() {
        let s = ket("0210");
        assert_eq!(s.globally_shifted(1), ket("1021"));
        assert_eq!(s.globally_shifted(3), s);
    }

    fn random_state(n: usize, seed: u64) -> QutritState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 3usize.pow(n as u32);
        let amps = (0..dim)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut s = QutritState::from_amplitudes(n, amps).unwrap();
        s.normalize();
        s
    }

    proptest! {
        #[test]
        fn kick_power_preserves_norm(g in 0.0f64..=1.0, seed in any::<u64>()) {
            let xg = fractional_power(&shift_x(), g).unwrap();
            let mut s = random_state(3, seed);
            s.apply_global(&xg);
            prop_assert!((s.norm_sqr().sqrt() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn kick_powers_compose(a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
            let x = shift_x();
            let xa = fractional_power(&x, a).unwrap();
            let xb = fractional_power(&x, b).unwrap();
            let xab = fractional_power(&x, a + b).unwrap();
            prop_assert!((xa * xb).max_abs_diff(&xab) < 1e-12);
        }

        #[test]
        fn local_gates_on_distinct_sites_commute(
            g in 0.0f64..=1.0, i in 1usize..=4, j in 1usize..=4, seed in any::<u64>()
        ) {
            prop_assume!(i != j);
            let u = fractional_power(&shift_x(), g).unwrap();
            let v = clock_z() * subspace_x12();
            let s = random_state(4, seed);
            let mut a = s.clone();
            a.apply_local(i, &u).unwrap();
            a.apply_local(j, &v).unwrap();
            let mut b = s;
            b.apply_local(j, &v).unwrap();
            b.apply_local(i, &u).unwrap();
            let diff = a.amplitudes().iter().zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
        }
    }
}
