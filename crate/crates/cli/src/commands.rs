use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use ccm_core::spectral::dense_floquet_capped;
use ccm_core::sweep::initial_trit_strings;
use ccm_core::{
    cat_state_check, fft_response, map_cross_kerr, quasienergies, run_sweep, sample_disorder,
    unmap_to_cross_kerr, ChainParams, CrossKerrAngles, CrossKerrMapping, DisorderSpec,
    InitialStateFamily, KickSpec, KickVariant, ObservableSet, QutritState, SpectralReport,
    SweepConfig, TrajectoryRecord, TritString,
};
use serde::Deserialize;
use serde_json::json;

use crate::{
    FamilyArg, FftArgs, MapCkArgs, ModelArgs, SimulateArgs, SpectrumArgs, StatesArgs, SweepArgs,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<ccm_core::Error> for CliError {
    fn from(e: ccm_core::Error) -> Self {
        use ccm_core::Error as E;
        match e {
            E::Config(_)
            | E::InvalidParameter(_)
            | E::InvalidTrit { .. }
            | E::EmptyTritString
            | E::SiteOutOfRange { .. }
            | E::IndexOutOfRange { .. }
            | E::SizeCap { .. }
            | E::NotCrossKerr { .. }
            | E::SeriesTooShort { .. }
            | E::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Optional contents of a `simulate` / `spectrum` config file.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n_sites: Option<usize>,
    g: Option<f64>,
    kick_variant: Option<KickVariant>,
    disorder: Option<DisorderSpec>,
    instance: Option<u64>,
    params: Option<ChainParams>,
    initial: Option<TritString>,
    cycles: Option<usize>,
    probes: Option<ObservableSet>,
}

struct Model {
    params: ChainParams,
    kick: KickSpec,
    file: ModelFile,
    seed: Option<u64>,
    instance: u64,
}

fn resolve_model(a: &ModelArgs) -> Result<Model> {
    let file: ModelFile = match &a.config {
        Some(path) => read_json(path)?,
        None => ModelFile::default(),
    };
    let explicit = match &a.params {
        Some(path) => Some(read_json::<ChainParams>(path)?),
        None => file.params.clone(),
    };
    let instance = a.instance.or(file.instance).unwrap_or(0);
    let (params, seed) = match explicit {
        Some(p) => {
            if let Some(n) = a.n_sites.or(file.n_sites) {
                if n != p.n_sites() {
                    return Err(CliError::Config(format!(
                        "--n {n} disagrees with the {} sites of the given parameters",
                        p.n_sites()
                    )));
                }
            }
            (p, None)
        }
        None => {
            let n = a
                .n_sites
                .or(file.n_sites)
                .ok_or_else(|| CliError::Config("chain length missing (--n or n_sites)".into()))?;
            let mut spec = file.disorder.clone().unwrap_or_default();
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            spec.validate()?;
            (sample_disorder(&spec, n, instance)?, Some(spec.seed))
        }
    };
    let g = a
        .g
        .or(file.g)
        .ok_or_else(|| CliError::Config("kick strength missing (--g or g)".into()))?;
    let variant = a.variant.map(Into::into).or(file.kick_variant).unwrap_or_default();
    Ok(Model {
        params,
        kick: KickSpec::new(g, variant)?,
        file,
        seed,
        instance,
    })
}

fn parse_probes(names: &[String], n_sites: usize) -> Result<ObservableSet> {
    let mut set = ObservableSet::default();
    for name in names {
        match name.trim() {
            "populations" => set.populations = true,
            "magnetization" => set.magnetization = true,
            "autocorrelator" => set.autocorrelator_sites = (1..=n_sites).collect(),
            "chi_ea" => set.chi_ea = true,
            other => {
                return Err(CliError::Config(format!(
                    "unknown probe {other:?} (expected populations, magnetization, autocorrelator, chi_ea)"
                )))
            }
        }
    }
    Ok(set)
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let m = resolve_model(&a.model)?;
    let n = m.params.n_sites();
    let initial = match a.initial.or(m.file.initial.clone()) {
        Some(s) => s,
        None => TritString::uniform(n, 0)?,
    };
    if initial.len() != n {
        return Err(CliError::Config(format!(
            "initial state has {} sites, chain has {n}",
            initial.len()
        )));
    }
    let probes = match (&a.probes, m.file.probes.clone()) {
        (Some(names), _) => parse_probes(names, n)?,
        (None, Some(p)) => p,
        (None, None) => parse_probes(&["magnetization".into(), "autocorrelator".into()], n)?,
    };
    probes.validate(n)?;
    let cycles = a.cycles.or(m.file.cycles).unwrap_or(30);
    let rec = ccm_core::run_trajectory(&m.params, &m.kick, &QutritState::basis(&initial)?, cycles, &probes)?;
    let mut buf = Vec::new();
    rec.write_csv(&mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&buf))
}

pub fn spectrum(a: SpectrumArgs) -> Result<()> {
    let m = resolve_model(&a.model)?;
    let n = m.params.n_sites();
    let u = dense_floquet_capped(&m.params, &m.kick, a.cap)?;
    let eps = quasienergies(&u)?;
    let report = SpectralReport::from_quasienergies(n, eps, a.full)?;
    let mut value = serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    let obj = value.as_object_mut().expect("report serializes to an object");
    obj.insert("g".into(), json!(m.kick.g));
    obj.insert("kick_variant".into(), json!(m.kick.variant));
    if let Some(seed) = m.seed {
        obj.insert("seed".into(), json!(seed));
        obj.insert("instance".into(), json!(m.instance));
    }
    if a.cat_check {
        let cat = cat_state_check(&u, &m.params)?;
        obj.insert(
            "cat_states".into(),
            json!({
                "passed": cat.passed(),
                "tolerance": cat.tolerance,
                "failures": cat.failures.len(),
                "mean_orbit_mass": cat.mean_orbit_mass(),
                "min_orbit_mass": cat.min_orbit_mass(),
                "max_partial_orbit_mass": cat.max_partial_orbit_mass(),
            }),
        );
    }
    emit(a.out.as_deref(), &to_json(&value)?)
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", a.config.display())))?;
    if let Some(seed) = a.seed {
        cfg.disorder.seed = seed;
    }
    if let Some(out) = a.out {
        cfg.output_path = Some(out);
    }
    if let Some(w) = a.workers {
        cfg.worker_count = w;
    }
    cfg.validate()?;
    let outcome = run_sweep(&cfg)?;
    if !outcome.manifest.failures.is_empty() {
        eprintln!(
            "ccm: {} trajectories failed; see manifest.json",
            outcome.manifest.failures.len()
        );
    }
    emit(
        None,
        &to_json(&json!({
            "output_dir": outcome.output_dir,
            "config_hash": outcome.manifest.config_hash,
            "completed": outcome.completed,
            "failed": outcome.manifest.failures.len(),
        }))?,
    )
}

pub fn map_ck(a: MapCkArgs) -> Result<()> {
    if a.inverse {
        let path = a
            .config
            .as_deref()
            .ok_or_else(|| CliError::Config("--inverse needs --config <mapping.json>".into()))?;
        let raw: serde_json::Value = read_json(path)?;
        // accept either a bare mapping or the output of the forward direction
        let body = raw.get("mapping").cloned().unwrap_or(raw);
        let mapping: CrossKerrMapping = serde_json::from_value(body)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let angles = unmap_to_cross_kerr(&mapping)?;
        return emit(a.out.as_deref(), &to_json(&json!({ "mapping": mapping, "angles": angles }))?);
    }
    let mut angles: CrossKerrAngles = match &a.config {
        Some(path) => read_json(path)?,
        None => CrossKerrAngles::default(),
    };
    for (flag, slot) in [
        (a.theta11, &mut angles.theta_11),
        (a.theta12, &mut angles.theta_12),
        (a.theta21, &mut angles.theta_21),
        (a.theta22, &mut angles.theta_22),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    angles.validate()?;
    let mapping = map_cross_kerr(&angles);
    let back = unmap_to_cross_kerr(&mapping)?;
    let roundtrip_error = [
        back.theta_11 - angles.theta_11,
        back.theta_12 - angles.theta_12,
        back.theta_21 - angles.theta_21,
        back.theta_22 - angles.theta_22,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    emit(
        a.out.as_deref(),
        &to_json(&json!({
            "angles": angles,
            "mapping": mapping,
            "roundtrip_error": roundtrip_error,
        }))?,
    )
}

fn read_plain_series(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}: {l:?}: {e}", path.display())))
        })
        .collect()
}

pub fn fft(a: FftArgs) -> Result<()> {
    let series = match &a.site {
        Some(site) => {
            let file = fs::File::open(&a.input)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.input.display())))?;
            let rec = TrajectoryRecord::read_csv(file)?;
            let mut s = rec.series(site, &a.observable);
            if s.is_empty() {
                return Err(CliError::Config(format!(
                    "no {:?} rows for site {site:?} in {}",
                    a.observable,
                    a.input.display()
                )));
            }
            if !a.include_initial {
                s.remove(0);
            }
            s
        }
        None => read_plain_series(&a.input)?,
    };
    let spec = fft_response(&series)?;
    let mut text = String::from("k,omega,magnitude\n");
    for (k, (w, m)) in spec.omegas.iter().zip(&spec.magnitudes).enumerate() {
        text.push_str(&format!("{k},{w},{m}\n"));
    }
    emit(a.out.as_deref(), &text)
}

pub fn states(a: StatesArgs) -> Result<()> {
    let family = match a.family {
        FamilyArg::Fm => InitialStateFamily::Fm,
        FamilyArg::Af => InitialStateFamily::Af,
        FamilyArg::Random => InitialStateFamily::Random {
            count: a.count,
            seed: a.seed,
        },
    };
    let strings = initial_trit_strings(&family, a.n_sites)?;
    let text = if a.json {
        to_json(&json!({ "family": family, "states": strings }))?
    } else {
        strings.iter().map(|s| format!("{s}\n")).collect()
    };
    emit(a.out.as_deref(), &text)
}
