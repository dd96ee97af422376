//! One Floquet cycle `U_F = exp(-i H_0) exp(-i H_int) Xbar^g` and multi-cycle trajectories.
//!
//! The two diagonal factors commute and are fused into a single phase vector.
//! Within a cycle the kick acts first, then the diagonal phases.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::algebra::{
    clock_z, dim_for, fractional_power, omega3_pow, shift_x, subspace_x12, LocalUnitary3,
    QutritState, C64,
};
use crate::error::{Error, Result};
use crate::model::{diagonal_energies, ChainParams};
use crate::observables::{ObservableSet, Observation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KickVariant {
    /// `X^g` on every site.
    #[default]
    Standard,
    /// `X12^(1-g) X^g` on every site.
    Subspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickSpec {
    pub g: f64,
    #[serde(default)]
    pub variant: KickVariant,
}

impl KickSpec {
    pub fn new(g: f64, variant: KickVariant) -> Result<Self> {
        let k = Self { g, variant };
        k.validate()?;
        Ok(k)
    }

    pub fn standard(g: f64) -> Result<Self> {
        Self::new(g, KickVariant::Standard)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.g) {
            return Err(Error::InvalidParameter(format!(
                "kick strength g = {} must lie in [0, 1]",
                self.g
            )));
        }
        Ok(())
    }

    /// Single-site kick matrix.
    pub fn matrix(&self) -> Result<LocalUnitary3> {
        self.validate()?;
        let xg = fractional_power(&shift_x(), self.g)?;
        match self.variant {
            KickVariant::Standard => Ok(xg),
            KickVariant::Subspace => {
                let x12 = fractional_power(&subspace_x12(), 1.0 - self.g)?;
                Ok(x12 * xg)
            }
        }
    }
}

/// Precomputed cycle operator: diagonal phases plus the per-site kick.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    n_sites: usize,
    diag_phases: Vec<C64>,
    kick: LocalUnitary3,
}

impl FloquetOperator {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn diag_phases(&self) -> &[C64] {
        &self.diag_phases
    }

    pub fn kick(&self) -> &LocalUnitary3 {
        &self.kick
    }

    /// Advances `state` by one cycle in place.
    pub fn apply_cycle(&self, state: &mut QutritState) -> Result<()> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.diag_phases.len(),
                found: state.dim(),
            });
        }
        state.apply_global(&self.kick);
        for (a, p) in state.amplitudes_mut().iter_mut().zip(&self.diag_phases) {
            *a *= p;
        }
        Ok(())
    }
}

/// Builds the cycle operator for `p` and kick `k`.
pub fn build_floquet(p: &ChainParams, k: &KickSpec) -> Result<FloquetOperator> {
    dim_for(p.n_sites())?;
    let diag_phases = diagonal_energies(p)?
        .into_iter()
        .map(|e| C64::from_polar(1.0, -e))
        .collect();
    Ok(FloquetOperator {
        n_sites: p.n_sites(),
        diag_phases,
        kick: k.matrix()?,
    })
}

/// Functional form of [`FloquetOperator::apply_cycle`].
pub fn apply_cycle(op: &FloquetOperator, state: &QutritState) -> Result<QutritState> {
    let mut next = state.clone();
    op.apply_cycle(&mut next)?;
    Ok(next)
}

/// Observable time series of one run. Row `t = 0` is the initial state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<Observation>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    t: usize,
    site: String,
    observable: String,
    re: f64,
    im: f64,
}

impl TrajectoryRecord {
    /// Real parts of one observable over time, in row order.
    pub fn series(&self, site: &str, observable: &str) -> Vec<f64> {
        self.complex_series(site, observable)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    pub fn complex_series(&self, site: &str, observable: &str) -> Vec<C64> {
        self.rows
            .iter()
            .filter(|r| r.site == site && r.observable == observable)
            .map(|r| r.value)
            .collect()
    }

    /// CSV with header `t,site,observable,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(CsvRow {
                t: r.t,
                site: r.site.clone(),
                observable: r.observable.clone(),
                re: r.value.re,
                im: r.value.im,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let rows = reader
            .deserialize::<CsvRow>()
            .map(|row| {
                row.map(|r| Observation {
                    t: r.t,
                    site: r.site,
                    observable: r.observable,
                    value: C64::new(r.re, r.im),
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { rows })
    }
}

/// Evolves `psi0` for `cycles` cycles, recording `probes` after every cycle.
pub fn run_trajectory(
    p: &ChainParams,
    k: &KickSpec,
    psi0: &QutritState,
    cycles: usize,
    probes: &ObservableSet,
) -> Result<TrajectoryRecord> {
    let op = build_floquet(p, k)?;
    let mut rows = Vec::new();
    evolve_with(&op, psi0, cycles, probes, |obs| {
        rows.extend(obs);
        Ok(())
    })?;
    Ok(TrajectoryRecord { rows })
}

/// Streams observations cycle by cycle to `sink`; only the current state and
/// autocorrelator shadow states are kept in memory.
pub fn evolve_with<F>(
    op: &FloquetOperator,
    psi0: &QutritState,
    cycles: usize,
    probes: &ObservableSet,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(Vec<Observation>) -> Result<()>,
{
    if psi0.n_sites() != op.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: op.diag_phases.len(),
            found: psi0.dim(),
        });
    }
    probes.validate(op.n_sites())?;
    let mut state = psi0.clone();
    let mut shadows = Shadows::new(psi0, &probes.autocorrelator_sites)?;
    for t in 0..=cycles {
        if t > 0 {
            op.apply_cycle(&mut state)?;
            shadows.advance(op)?;
        }
        let mut obs = probes.evaluate(&state, t)?;
        for &site in &probes.autocorrelator_sites {
            obs.push(Observation {
                t,
                site: site.to_string(),
                observable: "autocorrelator".into(),
                value: shadows.autocorrelator(&state, site, t)?,
            });
        }
        sink(obs)?;
    }
    Ok(())
}

/// Shadow states `U^t Z_site^dag |psi0>` for the autocorrelator.
///
/// For a basis-state `psi0` the shadow is a global phase times the main state,
/// so no extra evolution is needed.
struct Shadows {
    initial_trits: Option<Vec<u8>>,
    states: Vec<(usize, QutritState)>,
}

impl Shadows {
    fn new(psi0: &QutritState, sites: &[usize]) -> Result<Self> {
        let basis = psi0.as_basis_state();
        let mut states = Vec::new();
        if basis.is_none() {
            let zd = clock_z().adjoint();
            for &site in sites {
                let mut s = psi0.clone();
                s.apply_local(site, &zd)?;
                states.push((site, s));
            }
        }
        Ok(Self {
            initial_trits: basis.map(|b| b.trits().to_vec()),
            states,
        })
    }

    fn advance(&mut self, op: &FloquetOperator) -> Result<()> {
        for (_, s) in &mut self.states {
            op.apply_cycle(s)?;
        }
        Ok(())
    }

    fn autocorrelator(&self, state: &QutritState, site: usize, t: usize) -> Result<C64> {
        let z = clock_z();
        let phase = omega3_pow(-(t as i64));
        if let Some(trits) = &self.initial_trits {
            let s0 = trits[site - 1] as i64;
            let zexp = crate::observables::clock_expectation(state, site)?;
            return Ok(zexp * phase * omega3_pow(-s0));
        }
        let (_, shadow) = self
            .states
            .iter()
            .find(|(s, _)| *s == site)
            .ok_or(Error::SiteOutOfRange {
                site,
                n_sites: state.n_sites(),
            })?;
        let mut zphi = shadow.clone();
        zphi.apply_local(site, &z)?;
        Ok(state.inner(&zphi)? * phase)
    }
}

/// `A(t) = w^{-t} <psi(t)| Z_site |phi(t)>` with `phi(0) = Z_site^dag psi0`,
/// for `t = 0..=cycles`. Always evolves the shadow state explicitly.
pub fn autocorrelator_trajectory(
    p: &ChainParams,
    k: &KickSpec,
    psi0: &QutritState,
    site: usize,
    cycles: usize,
) -> Result<Vec<C64>> {
    psi0.check_site(site)?;
    let op = build_floquet(p, k)?;
    let z = clock_z();
    let mut psi = psi0.clone();
    let mut phi = psi0.clone();
    phi.apply_local(site, &z.adjoint())?;
    let mut out = Vec::with_capacity(cycles + 1);
    for t in 0..=cycles {
        if t > 0 {
            op.apply_cycle(&mut psi)?;
            op.apply_cycle(&mut phi)?;
        }
        let mut zphi = phi.clone();
        zphi.apply_local(site, &z)?;
        out.push(psi.inner(&zphi)? * omega3_pow(-(t as i64)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TritString;
    use crate::model::{sample_disorder, BondCoupling, DisorderSpec, SiteField};

    fn ket(s: &str) -> QutritState {
        QutritState::basis(&s.parse().unwrap()).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> QutritState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..3usize.pow(n as u32))
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut s = QutritState::from_amplitudes(n, amps).unwrap();
        s.normalize();
        s
    }

    fn max_diff(a: &QutritState, b: &QutritState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn kick_spec_bounds() {
        assert!(KickSpec::standard(1.2).is_err());
        assert!(KickSpec::standard(-0.1).is_err());
        assert_eq!(KickSpec::standard(1.0).unwrap().matrix().unwrap(), shift_x());
        let sub = KickSpec::new(0.0, KickVariant::Subspace).unwrap();
        assert_eq!(sub.matrix().unwrap(), subspace_x12());
    }

    #[test]
    fn trivial_cycle_is_identity() {
        let p = ChainParams::zero(3).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(0.0).unwrap()).unwrap();
        let s = random_state(3, 1);
        assert!(max_diff(&apply_cycle(&op, &s).unwrap(), &s) < 1e-15);
    }

    #[test]
    fn perfect_kick_triples_the_period() {
        let p = sample_disorder(&DisorderSpec::numerics(3), 3, 0).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(1.0).unwrap()).unwrap();
        let mut s = ket("012");
        op.apply_cycle(&mut s).unwrap();
        assert_eq!(s.as_basis_state().unwrap().to_string(), "120");
        op.apply_cycle(&mut s).unwrap();
        op.apply_cycle(&mut s).unwrap();
        assert_eq!(s.as_basis_state().unwrap().to_string(), "012");
    }

    #[test]
    fn norm_is_preserved() {
        let p = sample_disorder(&DisorderSpec::numerics(9), 5, 0).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(0.73).unwrap()).unwrap();
        let mut s = random_state(5, 2);
        for _ in 0..100 {
            op.apply_cycle(&mut s).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ChainParams::zero(3).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(0.5).unwrap()).unwrap();
        let mut s = ket("01");
        assert!(matches!(op.apply_cycle(&mut s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn linearity() {
        let p = sample_disorder(&DisorderSpec::numerics(4), 4, 1).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(0.81).unwrap()).unwrap();
        let a = random_state(4, 10);
        let b = random_state(4, 11);
        let (alpha, beta) = (C64::new(0.3, -0.4), C64::new(-1.1, 0.2));
        let mix = |x: &QutritState, y: &QutritState| {
            let amps = x
                .amplitudes()
                .iter()
                .zip(y.amplitudes())
                .map(|(u, v)| alpha * u + beta * v)
                .collect();
            QutritState::from_amplitudes(4, amps).unwrap()
        };
        let lhs = apply_cycle(&op, &mix(&a, &b)).unwrap();
        let rhs = mix(&apply_cycle(&op, &a).unwrap(), &apply_cycle(&op, &b).unwrap());
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn perfect_kick_commutes_with_relabeling_without_breaking_terms() {
        let p = sample_disorder(&DisorderSpec::numerics(6), 4, 0).unwrap().z3_part();
        let op = build_floquet(&p, &KickSpec::standard(1.0).unwrap()).unwrap();
        let psi = random_state(4, 3);
        let mut a = psi.globally_shifted(1);
        let mut b = psi.clone();
        for _ in 0..5 {
            op.apply_cycle(&mut a).unwrap();
            op.apply_cycle(&mut b).unwrap();
        }
        assert!(max_diff(&a, &b.globally_shifted(1)) < 1e-10);
    }

    #[test]
    fn zero_cycles_records_initial_state_only() {
        let p = ChainParams::zero(2).unwrap();
        let probes = ObservableSet {
            magnetization: true,
            ..Default::default()
        };
        let rec = run_trajectory(&p, &KickSpec::standard(0.5).unwrap(), &ket("02"), 0, &probes)
            .unwrap();
        assert!(rec.rows.iter().all(|r| r.t == 0));
        assert_eq!(rec.series("1", "magnetization"), vec![1.0]);
        assert_eq!(rec.series("2", "magnetization"), vec![-1.0]);
    }

    #[test]
    fn populations_are_three_periodic_at_perfect_kick() {
        let p = sample_disorder(&DisorderSpec::device(12), 4, 0).unwrap();
        let probes = ObservableSet {
            populations: true,
            ..Default::default()
        };
        let rec = run_trajectory(&p, &KickSpec::standard(1.0).unwrap(), &ket("0211"), 12, &probes)
            .unwrap();
        for site in 1..=4 {
            for obs in ["p0", "p1", "p2"] {
                let s = rec.series(&site.to_string(), obs);
                for t in 3..s.len() {
                    assert!((s[t] - s[t - 3]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn autocorrelator_basics() {
        let p = sample_disorder(&DisorderSpec::numerics(2), 4, 0).unwrap();
        let psi = ket("0121");
        let a = autocorrelator_trajectory(&p, &KickSpec::standard(0.8).unwrap(), &psi, 2, 20)
            .unwrap();
        assert!((a[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(a.iter().all(|z| z.norm() <= 1.0 + 1e-10));

        let g1 = autocorrelator_trajectory(&p, &KickSpec::standard(1.0).unwrap(), &psi, 3, 20)
            .unwrap();
        assert!(g1.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-10));

        assert!(autocorrelator_trajectory(&p, &KickSpec::standard(1.0).unwrap(), &psi, 5, 1).is_err());
    }

    #[test]
    fn streamed_autocorrelator_matches_explicit_shadow() {
        let p = sample_disorder(&DisorderSpec::numerics(8), 4, 0).unwrap();
        let k = KickSpec::standard(0.9).unwrap();
        let probes = ObservableSet {
            autocorrelator_sites: vec![1, 3],
            ..Default::default()
        };
        // basis-state shortcut
        let psi = ket("2101");
        let rec = run_trajectory(&p, &k, &psi, 15, &probes).unwrap();
        for site in [1usize, 3] {
            let fast = rec.complex_series(&site.to_string(), "autocorrelator");
            let slow = autocorrelator_trajectory(&p, &k, &psi, site, 15).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        // general superposition path
        let psi = random_state(4, 77);
        let rec = run_trajectory(&p, &k, &psi, 10, &probes).unwrap();
        let fast = rec.complex_series("3", "autocorrelator");
        let slow = autocorrelator_trajectory(&p, &k, &psi, 3, 10).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = ChainParams::uniform(
            3,
            BondCoupling::chiral(0.2, 0.4),
            SiteField { h: 0.1, phi: 0.3 },
        )
        .unwrap();
        let probes = ObservableSet {
            magnetization: true,
            autocorrelator_sites: vec![2],
            chi_ea: true,
            ..Default::default()
        };
        let s: TritString = "012".parse().unwrap();
        let rec = run_trajectory(
            &p,
            &KickSpec::standard(0.9).unwrap(),
            &QutritState::basis(&s).unwrap(),
            4,
            &probes,
        )
        .unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,site,observable,re,im\n"));
        let back = TrajectoryRecord::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rec);
    }
}
