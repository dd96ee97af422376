//! Ensembles over disorder instances, initial states and kick strengths,
//! persisted to a directory with a manifest that pins every random draw.
//!
//! Layout of one sweep directory:
//!
//! ```text
//! manifest.json            config, hash, seeds, per-run table (deterministic)
//! run_info.json            wall-clock times and worker count (not deterministic)
//! params/instance_NNNN.json
//! trajectories/iNNNN_sNNN_gNNN.csv
//! aggregates/autocorrelator.csv, fft.csv, fft.dat, chi_ea.csv
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{QutritState, TritString, C64, MAX_STATE_SITES};
use crate::error::{Error, Result};
use crate::floquet::{run_trajectory, KickSpec, KickVariant, TrajectoryRecord};
use crate::model::{sample_disorder, ChainParams, DisorderSpec, PRNG_ALGORITHM};
use crate::observables::{average_autocorrelator, fft_response, ObservableSet, SpectroscopyGrid};

/// A named set of trit-string initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InitialStateFamily {
    /// `|000...>`, `|111...>`, `|222...>`.
    #[serde(rename = "FM")]
    Fm,
    /// `012012...` and `021021...` cut at the chain end, each with its two global shifts.
    #[serde(rename = "AF")]
    Af,
    #[serde(rename = "random-trit-string")]
    Random { count: usize, seed: u64 },
    #[serde(rename = "explicit")]
    Explicit { states: Vec<TritString> },
}

impl InitialStateFamily {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Fm => "FM",
            Self::Af => "AF",
            Self::Random { .. } => "random",
            Self::Explicit { .. } => "explicit",
        }
    }
}

/// Trit strings of one family, in a fixed order.
pub fn initial_trit_strings(f: &InitialStateFamily, n_sites: usize) -> Result<Vec<TritString>> {
    if n_sites == 0 {
        return Err(Error::EmptyTritString);
    }
    match f {
        InitialStateFamily::Fm => (0..3).map(|j| TritString::uniform(n_sites, j)).collect(),
        InitialStateFamily::Af => {
            let mut out = Vec::with_capacity(6);
            for step in [1u8, 2] {
                let base = TritString::new((0..n_sites).map(|j| (j as u8 * step) % 3).collect())?;
                for k in 0..3 {
                    out.push(base.shifted(k));
                }
            }
            Ok(out)
        }
        InitialStateFamily::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| TritString::new((0..n_sites).map(|_| rng.random_range(0..3u8)).collect()))
                .collect()
        }
        InitialStateFamily::Explicit { states } => {
            for s in states {
                if s.len() != n_sites {
                    return Err(Error::DimensionMismatch {
                        expected: n_sites,
                        found: s.len(),
                    });
                }
            }
            Ok(states.clone())
        }
    }
}

pub fn make_initial_states(f: &InitialStateFamily, n_sites: usize) -> Result<Vec<QutritState>> {
    initial_trit_strings(f, n_sites)?
        .iter()
        .map(QutritState::basis)
        .collect()
}

fn default_workers() -> usize {
    1
}

/// Everything that defines an ensemble. `output_path` and `worker_count`
/// only affect where and how fast results are produced, never their values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_sites: usize,
    pub g_grid: Vec<f64>,
    pub cycles: usize,
    pub disorder: DisorderSpec,
    pub n_disorder_instances: u64,
    /// Families are concatenated in order.
    pub initial: Vec<InitialStateFamily>,
    pub probes: ObservableSet,
    #[serde(default)]
    pub kick_variant: KickVariant,
    /// Cycles `[from, to]` (inclusive) averaged for the chi_EA summary;
    /// defaults to the last ten cycles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_ea_window: Option<[usize; 2]>,
    /// Subtract the chi_EA value at the smallest g from the summary.
    #[serde(default)]
    pub chi_ea_baseline: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_sites < 2 || self.n_sites > MAX_STATE_SITES {
            return bad(format!(
                "n_sites must be in [2, {MAX_STATE_SITES}], got {}",
                self.n_sites
            ));
        }
        if self.g_grid.is_empty() {
            return bad("g_grid is empty".into());
        }
        for &g in &self.g_grid {
            KickSpec::new(g, self.kick_variant).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.cycles == 0 {
            return bad("cycles must be at least 1".into());
        }
        if self.n_disorder_instances == 0 {
            return bad("n_disorder_instances must be at least 1".into());
        }
        if self.initial.is_empty() {
            return bad("no initial-state families".into());
        }
        if self.worker_count == 0 {
            return bad("worker_count must be at least 1".into());
        }
        if let Some([a, b]) = self.chi_ea_window {
            if a > b || b > self.cycles {
                return bad(format!(
                    "chi_ea_window [{a}, {b}] must satisfy from <= to <= cycles"
                ));
            }
        }
        self.disorder
            .validate()
            .and_then(|_| self.probes.validate(self.n_sites))
            .map_err(|e| Error::Config(e.to_string()))?;
        for f in &self.initial {
            initial_trit_strings(f, self.n_sites).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Config with execution-only fields removed, as stored in the manifest.
    pub fn canonical_json(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        if let Some(map) = v.as_object_mut() {
            map.remove("output_path");
            map.remove("worker_count");
        }
        Ok(v)
    }

    /// SHA-256 of the canonical config, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(&self.canonical_json()?)?;
        Ok(Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }

    pub fn initial_states(&self) -> Result<Vec<(String, TritString)>> {
        let mut out = Vec::new();
        for f in &self.initial {
            for s in initial_trit_strings(f, self.n_sites)? {
                out.push((f.label().to_string(), s));
            }
        }
        Ok(out)
    }

    fn window(&self) -> [usize; 2] {
        self.chi_ea_window
            .unwrap_or([self.cycles.saturating_sub(10), self.cycles])
    }
}

/// One independent trajectory; tasks are ordered instance-major, then initial state, then g.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTask {
    pub id: String,
    pub instance: u64,
    pub state_index: usize,
    pub family: String,
    pub initial_state: TritString,
    pub g_index: usize,
    pub g: f64,
}

pub fn sweep_tasks(cfg: &SweepConfig) -> Result<Vec<SweepTask>> {
    let states = cfg.initial_states()?;
    let mut out = Vec::new();
    for instance in 0..cfg.n_disorder_instances {
        for (si, (family, s)) in states.iter().enumerate() {
            for (gi, &g) in cfg.g_grid.iter().enumerate() {
                out.push(SweepTask {
                    id: format!("i{instance:04}_s{si:03}_g{gi:03}"),
                    instance,
                    state_index: si,
                    family: family.clone(),
                    initial_state: s.clone(),
                    g_index: gi,
                    g,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskFailure {
    pub id: String,
    pub error: String,
}

/// Deterministic record of a sweep: enough to regenerate every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub config_hash: String,
    pub prng: String,
    pub disorder_seed: u64,
    pub entropy_log_base: String,
    pub config: serde_json::Value,
    pub runs: Vec<SweepTask>,
    pub failures: Vec<TaskFailure>,
}

impl RunManifest {
    /// The config this manifest was produced from.
    pub fn config(&self) -> Result<SweepConfig> {
        let cfg: SweepConfig =
            serde_json::from_value(self.config.clone()).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Wall-clock metadata, kept apart from the manifest so that reruns stay byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunInfo {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
    pub worker_count: usize,
    pub output_path: PathBuf,
}

/// What aggregation needs from one trajectory.
#[derive(Clone, Debug, Default)]
struct TaskSummary {
    autocorrelator: Vec<Vec<C64>>,
    magnetization: Vec<Vec<f64>>,
    chi_ea: Vec<f64>,
}

impl TaskSummary {
    fn from_record(rec: &TrajectoryRecord, cfg: &SweepConfig) -> Self {
        let probes = &cfg.probes;
        Self {
            autocorrelator: probes
                .autocorrelator_sites
                .iter()
                .map(|s| rec.complex_series(&s.to_string(), "autocorrelator"))
                .collect(),
            magnetization: if probes.magnetization {
                (1..=cfg.n_sites)
                    .map(|s| rec.series(&s.to_string(), "magnetization"))
                    .collect()
            } else {
                Vec::new()
            },
            chi_ea: if probes.chi_ea {
                rec.series("all", "chi_ea")
            } else {
                Vec::new()
            },
        }
    }
}

/// Result of [`run_sweep`].
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub manifest: RunManifest,
    pub output_dir: PathBuf,
    pub completed: usize,
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes to a temporary name and renames, so a file is either complete or absent.
fn write_atomically(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every task of `cfg` and persists results under `cfg.output_path`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let out_dir = cfg
        .output_path
        .clone()
        .ok_or_else(|| Error::Config("output_path is not set".into()))?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();

    for sub in ["params", "trajectories", "aggregates"] {
        fs::create_dir_all(out_dir.join(sub))?;
    }
    let tasks = sweep_tasks(cfg)?;

    let mut params: Vec<ChainParams> = Vec::new();
    for i in 0..cfg.n_disorder_instances {
        let p = sample_disorder(&cfg.disorder, cfg.n_sites, i)?;
        write_json_file(&out_dir.join(format!("params/instance_{i:04}.json")), &p)?;
        params.push(p);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    type Message = (usize, Result<TrajectoryRecord>);
    let (tx, rx) = mpsc::channel::<Message>();
    let traj_dir = out_dir.join("trajectories");
    let writer_tasks = tasks.clone();
    let writer_cfg = cfg.clone();
    let writer = std::thread::spawn(move || -> Result<Vec<Option<std::result::Result<TaskSummary, String>>>> {
        let mut slots: Vec<Option<std::result::Result<TaskSummary, String>>> =
            (0..writer_tasks.len()).map(|_| None).collect();
        for (idx, res) in rx {
            let task = &writer_tasks[idx];
            slots[idx] = Some(match res {
                Ok(rec) => {
                    write_atomically(&traj_dir.join(format!("{}.csv", task.id)), |w| rec.write_csv(w))?;
                    Ok(TaskSummary::from_record(&rec, &writer_cfg))
                }
                Err(e) => Err(e.to_string()),
            });
        }
        Ok(slots)
    });

    pool.install(|| {
        tasks.par_iter().enumerate().for_each_with(tx, |tx, (idx, task)| {
            let res = KickSpec::new(task.g, cfg.kick_variant).and_then(|k| {
                let psi0 = QutritState::basis(&task.initial_state)?;
                run_trajectory(&params[task.instance as usize], &k, &psi0, cfg.cycles, &cfg.probes)
            });
            // the receiver only goes away if the writer failed; that error is reported below
            let _ = tx.send((idx, res));
        });
    });

    let slots = writer
        .join()
        .map_err(|_| Error::Config("writer thread panicked".into()))??;

    let mut failures = Vec::new();
    let mut summaries: Vec<Option<TaskSummary>> = Vec::with_capacity(slots.len());
    for (task, slot) in tasks.iter().zip(slots) {
        match slot {
            Some(Ok(s)) => summaries.push(Some(s)),
            Some(Err(e)) => {
                failures.push(TaskFailure {
                    id: task.id.clone(),
                    error: e,
                });
                summaries.push(None);
            }
            None => {
                failures.push(TaskFailure {
                    id: task.id.clone(),
                    error: "no result".into(),
                });
                summaries.push(None);
            }
        }
    }

    write_aggregates(cfg, &tasks, &summaries, &out_dir.join("aggregates"))?;

    let manifest = RunManifest {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash()?,
        prng: PRNG_ALGORITHM.into(),
        disorder_seed: cfg.disorder.seed,
        entropy_log_base: "e".into(),
        config: cfg.canonical_json()?,
        runs: tasks,
        failures,
    };
    write_json_file(&out_dir.join("manifest.json"), &manifest)?;
    write_json_file(
        &out_dir.join("run_info.json"),
        &RunInfo {
            started_unix_s: started,
            elapsed_s: clock.elapsed().as_secs_f64(),
            worker_count: cfg.worker_count,
            output_path: out_dir.clone(),
        },
    )?;
    let completed = summaries.iter().filter(|s| s.is_some()).count();
    Ok(SweepOutcome {
        manifest,
        output_dir: out_dir,
        completed,
    })
}

fn write_aggregates(
    cfg: &SweepConfig,
    tasks: &[SweepTask],
    summaries: &[Option<TaskSummary>],
    dir: &Path,
) -> Result<()> {
    let per_g = |gi: usize| {
        tasks
            .iter()
            .zip(summaries)
            .filter(move |(t, _)| t.g_index == gi)
            .filter_map(|(_, s)| s.as_ref())
    };

    if !cfg.probes.autocorrelator_sites.is_empty() {
        write_atomically(&dir.join("autocorrelator.csv"), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["g", "t", "abs_mean_autocorrelator"])?;
            for (gi, g) in cfg.g_grid.iter().enumerate() {
                let set: Vec<Vec<Vec<C64>>> = per_g(gi).map(|s| s.autocorrelator.clone()).collect();
                if set.is_empty() {
                    continue;
                }
                for (t, a) in average_autocorrelator(&set)?.iter().enumerate() {
                    out.serialize((g, t, a))?;
                }
            }
            out.flush()?;
            Ok(())
        })?;
    }

    // spectra of t = 1..=cycles; the t = 0 preparation is not a response sample
    if cfg.probes.magnetization && cfg.cycles >= 4 {
        let omegas: Vec<f64> = (0..cfg.cycles)
            .map(|k| std::f64::consts::TAU * k as f64 / cfg.cycles as f64)
            .collect();
        let sites: Vec<usize> = (1..=cfg.n_sites).collect();
        let mut grid = SpectroscopyGrid::new(sites, cfg.g_grid.clone(), omegas);
        for gi in 0..cfg.g_grid.len() {
            for si in 0..cfg.n_sites {
                let mut acc = vec![0.0; cfg.cycles];
                let mut count = 0usize;
                for s in per_g(gi) {
                    let spec = fft_response(&s.magnetization[si][1..])?;
                    for (a, m) in acc.iter_mut().zip(&spec.magnitudes) {
                        *a += m;
                    }
                    count += 1;
                }
                if count > 0 {
                    for (dst, a) in grid.row_mut(si, gi).iter_mut().zip(&acc) {
                        *dst = a / count as f64;
                    }
                }
            }
        }
        write_atomically(&dir.join("fft.csv"), |w| grid.write_csv(w))?;
        write_atomically(&dir.join("fft.dat"), |w| grid.write_gnuplot(w))?;
    }

    if cfg.probes.chi_ea {
        let [a, b] = cfg.window();
        let means: Vec<Option<f64>> = (0..cfg.g_grid.len())
            .map(|gi| {
                let vals: Vec<f64> = per_g(gi)
                    .map(|s| s.chi_ea[a..=b].iter().sum::<f64>() / (b - a + 1) as f64)
                    .collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect();
        let baseline = cfg
            .g_grid
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .and_then(|(gi, _)| means[gi]);
        write_atomically(&dir.join("chi_ea.csv"), |w| {
            let mut out = csv::Writer::from_writer(w);
            if cfg.chi_ea_baseline {
                out.write_record(["g", "chi_ea", "chi_ea_minus_baseline"])?;
            } else {
                out.write_record(["g", "chi_ea"])?;
            }
            for (g, m) in cfg.g_grid.iter().zip(&means) {
                let Some(m) = m else { continue };
                match (cfg.chi_ea_baseline, baseline) {
                    (true, Some(base)) => out.serialize((g, m, m - base))?,
                    _ => out.serialize((g, m))?,
                }
            }
            out.flush()?;
            Ok(())
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::run_trajectory;

    fn strings(f: &InitialStateFamily, n: usize) -> Vec<String> {
        initial_trit_strings(f, n)
            .unwrap()
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn small_config(dir: &Path, workers: usize) -> SweepConfig {
        SweepConfig {
            n_sites: 3,
            g_grid: vec![0.9, 1.0],
            cycles: 6,
            disorder: DisorderSpec::numerics(5),
            n_disorder_instances: 2,
            initial: vec![
                InitialStateFamily::Fm,
                InitialStateFamily::Random { count: 2, seed: 3 },
            ],
            probes: ObservableSet {
                populations: true,
                magnetization: true,
                autocorrelator_sites: vec![1, 2],
                chi_ea: true,
                tomography: vec![vec![2]],
            },
            kick_variant: KickVariant::Standard,
            chi_ea_window: None,
            chi_ea_baseline: true,
            output_path: Some(dir.to_path_buf()),
            worker_count: workers,
        }
    }

    #[test]
    fn fm_family() {
        assert_eq!(strings(&InitialStateFamily::Fm, 3), ["000", "111", "222"]);
    }

    #[test]
    fn af_family() {
        let af = strings(&InitialStateFamily::Af, 4);
        assert_eq!(af, ["0120", "1201", "2012", "0210", "1021", "2102"]);
        assert_eq!(strings(&InitialStateFamily::Af, 8)[3], "02102102");
    }

    #[test]
    fn random_family_is_reproducible() {
        let f = InitialStateFamily::Random { count: 10, seed: 42 };
        let a = strings(&f, 6);
        assert_eq!(a.len(), 10);
        assert_eq!(a, strings(&f, 6));
        assert_ne!(a, strings(&InitialStateFamily::Random { count: 10, seed: 43 }, 6));
    }

    #[test]
    fn explicit_family_checks_length() {
        let f = InitialStateFamily::Explicit {
            states: vec!["012".parse().unwrap()],
        };
        assert_eq!(strings(&f, 3), ["012"]);
        assert!(initial_trit_strings(&f, 4).is_err());
    }

    #[test]
    fn family_json_shape() {
        let json = r#"[{"kind":"FM"},{"kind":"AF"},{"kind":"random-trit-string","count":10,"seed":1},{"kind":"explicit","states":["0121"]}]"#;
        let fams: Vec<InitialStateFamily> = serde_json::from_str(json).unwrap();
        assert_eq!(fams.len(), 4);
        assert_eq!(serde_json::to_string(&fams).unwrap(), json);
    }

    #[test]
    fn config_validation() {
        let dir = Path::new("/nonexistent");
        let good = small_config(dir, 1);
        assert!(good.validate().is_ok());
        let mut c = good.clone();
        c.g_grid.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = good.clone();
        c.cycles = 0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.g_grid = vec![1.2];
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.chi_ea_window = Some([3, 9]);
        assert!(c.validate().is_err());
        let mut c = good;
        c.probes.autocorrelator_sites = vec![4];
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_execution_fields() {
        let a = small_config(Path::new("/a"), 1);
        let b = small_config(Path::new("/b"), 8);
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let mut c = a.clone();
        c.disorder.seed += 1;
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn single_task_matches_run_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), 1);
        cfg.g_grid = vec![0.93];
        cfg.n_disorder_instances = 1;
        cfg.initial = vec![InitialStateFamily::Explicit {
            states: vec!["021".parse().unwrap()],
        }];
        let outcome = run_sweep(&cfg).unwrap();
        assert_eq!(outcome.completed, 1);
        let id = &outcome.manifest.runs[0].id;
        let text = fs::read(dir.path().join(format!("trajectories/{id}.csv"))).unwrap();
        let p = sample_disorder(&cfg.disorder, 3, 0).unwrap();
        let direct = run_trajectory(
            &p,
            &KickSpec::standard(0.93).unwrap(),
            &QutritState::basis(&"021".parse().unwrap()).unwrap(),
            cfg.cycles,
            &cfg.probes,
        )
        .unwrap();
        let mut expected = Vec::new();
        direct.write_csv(&mut expected).unwrap();
        assert_eq!(text, expected);
    }

    #[test]
    fn sweep_layout_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path(), 2);
        let outcome = run_sweep(&cfg).unwrap();
        assert_eq!(outcome.completed, 2 * 5 * 2);
        assert!(outcome.manifest.failures.is_empty());
        for f in [
            "manifest.json",
            "run_info.json",
            "params/instance_0001.json",
            "aggregates/autocorrelator.csv",
            "aggregates/fft.csv",
            "aggregates/fft.dat",
            "aggregates/chi_ea.csv",
        ] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let m: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(m.prng, PRNG_ALGORITHM);
        let mut back = m.config().unwrap();
        back.output_path = cfg.output_path.clone();
        back.worker_count = cfg.worker_count;
        assert_eq!(back, cfg);

        // g = 1 rows of the autocorrelator aggregate are exactly one
        let agg = fs::read_to_string(dir.path().join("aggregates/autocorrelator.csv")).unwrap();
        for line in agg.lines().skip(1).filter(|l| l.starts_with("1.0,")) {
            let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        let chi = fs::read_to_string(dir.path().join("aggregates/chi_ea.csv")).unwrap();
        assert!(chi.starts_with("g,chi_ea,chi_ea_minus_baseline\n0.9,"));
    }

    #[test]
    fn workers_do_not_change_outputs() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_sweep(&small_config(a.path(), 1)).unwrap();
        run_sweep(&small_config(b.path(), 4)).unwrap();
        let mut files = Vec::new();
        for sub in ["", "params", "trajectories", "aggregates"] {
            for e in fs::read_dir(a.path().join(sub)).unwrap() {
                let p = e.unwrap().path();
                if p.is_file() && p.file_name().unwrap() != "run_info.json" {
                    files.push(p.strip_prefix(a.path()).unwrap().to_path_buf());
                }
            }
        }
        assert!(files.len() > 20);
        for f in files {
            assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{f:?}");
        }
    }
}
