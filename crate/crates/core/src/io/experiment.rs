//! Strict experiment files with unit-suffixed keys.
//!
//! ```toml
//! schema_version = 1
//! model = "wave"
//!
//! [apparatus]
//! wavelength_nm = 633.0
//! delay_opd_nm = 0.0
//!
//! [run]
//! seed = 42
//! windows = 100000
//! ```
//!
//! Every omitted key takes its default, and [`ExperimentFile::resolved`]
//! makes each effective value explicit so a report can echo it.

use std::f64::consts::PI;

use serde::Serialize;
use toml::{Table, Value};

use crate::apparatus::{incidence_for_reflectance, ApparatusConfig, ChopperState};
use crate::engine::{ChopperSwitch, RunMode, RunSpec};
use crate::error::{Error, Result};
use crate::models::{CountMode, EmissionStream, ModelKind, PhaseModel, SourceKind};
use crate::optics::{Envelope, Polarization};

/// Schema understood by this build.
pub const SCHEMA_VERSION: i64 = 1;

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;
const MM: f64 = 1e-3;
const MRAD: f64 = 1e-3;
const NS: f64 = 1e-9;

fn deg(x: f64) -> f64 {
    x * (PI / 180.0)
}

/// Blocking device as written in a file; the chopping rate is a separate key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChopperName {
    Open,
    BlockR,
    BlockT,
    Chopping,
}

impl ChopperName {
    fn state(self, rate_hz: f64) -> ChopperState {
        match self {
            ChopperName::Open => ChopperState::Open,
            ChopperName::BlockR => ChopperState::BlockR,
            ChopperName::BlockT => ChopperState::BlockT,
            ChopperName::Chopping => ChopperState::Chopping { rate_hz },
        }
    }
}

/// `[apparatus]`, in file units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApparatusSection {
    pub wavelength_nm: f64,
    pub glass_index: f64,
    /// Omitted means "calibrate to R = 0.5".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incidence_angle_deg: Option<f64>,
    pub polarization: Polarization,
    pub arm_path_r_mm: f64,
    pub arm_path_t_mm: f64,
    pub delay_opd_nm: f64,
    pub tilt_r_mrad: f64,
    pub tilt_t_mrad: f64,
    pub spot_center_r_um: f64,
    pub spot_center_t_um: f64,
    pub envelope_width_um: f64,
    pub envelope: Envelope,
    pub fiber_core_width_um: f64,
    pub chopper: ChopperName,
    pub chopping_rate_hz: f64,
    pub coincidence_window_ns: f64,
    pub detection_window_ns: f64,
    pub reflection_phase_deg: f64,
    pub which_way_fibers: bool,
    pub w_click_threshold: f64,
}

impl Default for ApparatusSection {
    fn default() -> Self {
        Self {
            wavelength_nm: 633.0,
            glass_index: 1.5,
            incidence_angle_deg: None,
            polarization: Polarization::S,
            arm_path_r_mm: 250.0,
            arm_path_t_mm: 250.0,
            delay_opd_nm: 0.0,
            tilt_r_mrad: 19.0,
            tilt_t_mrad: -19.0,
            spot_center_r_um: -200.0,
            spot_center_t_um: 200.0,
            envelope_width_um: 200.0,
            envelope: Envelope::Gaussian,
            fiber_core_width_um: 0.8,
            chopper: ChopperName::Open,
            chopping_rate_hz: 1000.0,
            coincidence_window_ns: 1000.0,
            detection_window_ns: 1000.0,
            reflection_phase_deg: 180.0,
            which_way_fibers: true,
            w_click_threshold: 0.5,
        }
    }
}

/// File key holding a config field, for error messages.
pub fn file_key(field: &str) -> String {
    let key = match field {
        "wavelength" => "apparatus.wavelength_nm",
        "glass_index" => "apparatus.glass_index",
        "incidence_angle" => "apparatus.incidence_angle_deg",
        "arm_path_r" => "apparatus.arm_path_r_mm",
        "arm_path_t" => "apparatus.arm_path_t_mm",
        "delay_opd" => "apparatus.delay_opd_nm",
        "tilt_r" => "apparatus.tilt_r_mrad",
        "tilt_t" => "apparatus.tilt_t_mrad",
        "spot_center_r" => "apparatus.spot_center_r_um",
        "spot_center_t" => "apparatus.spot_center_t_um",
        "envelope_width" => "apparatus.envelope_width_um",
        "fiber_core_width" => "apparatus.fiber_core_width_um",
        "chopping_rate" => "apparatus.chopping_rate_hz",
        "coincidence_window" => "apparatus.coincidence_window_ns",
        "detection_window" => "apparatus.detection_window_ns",
        "reflection_phase" => "apparatus.reflection_phase_deg",
        "w_click_threshold" => "apparatus.w_click_threshold",
        "windows" => "run.windows",
        "mean_per_window" => "stream.mean_per_window",
        "quanta_per_photon" => "stream.quanta_per_photon",
        other => return other.to_string(),
    };
    key.to_string()
}

fn rename_key(e: Error) -> Error {
    match e {
        Error::Validation { key, message } => Error::Validation {
            key: file_key(&key),
            message,
        },
        other => other,
    }
}

impl ApparatusSection {
    /// Incidence angle in degrees, calibrated when not given.
    pub fn incidence_deg(&self) -> Result<f64> {
        match self.incidence_angle_deg {
            Some(d) => Ok(d),
            None => {
                let i = incidence_for_reflectance(1.0, self.glass_index, self.polarization, 0.5)
                    .map_err(|e| match e {
                        Error::Domain(m) => Error::Validation {
                            key: "apparatus.glass_index".into(),
                            message: m,
                        },
                        other => other,
                    })?;
                Ok(i.to_degrees())
            }
        }
    }

    /// The same section with the incidence angle made explicit.
    pub fn resolved(&self) -> Result<Self> {
        Ok(Self {
            incidence_angle_deg: Some(self.incidence_deg()?),
            ..self.clone()
        })
    }

    /// Convert to SI units and validate; errors name file keys.
    pub fn to_config(&self) -> Result<ApparatusConfig> {
        if !(self.glass_index > 1.0 && self.glass_index.is_finite()) {
            return Err(Error::Validation {
                key: "apparatus.glass_index".into(),
                message: format!("must exceed 1, got {}", self.glass_index),
            });
        }
        let cfg = ApparatusConfig {
            wavelength: self.wavelength_nm * NM,
            glass_index: self.glass_index,
            incidence_angle: deg(self.incidence_deg()?),
            polarization: self.polarization,
            arm_path_r: self.arm_path_r_mm * MM,
            arm_path_t: self.arm_path_t_mm * MM,
            delay_opd: self.delay_opd_nm * NM,
            tilt_r: self.tilt_r_mrad * MRAD,
            tilt_t: self.tilt_t_mrad * MRAD,
            spot_center_r: self.spot_center_r_um * UM,
            spot_center_t: self.spot_center_t_um * UM,
            envelope_width: self.envelope_width_um * UM,
            envelope: self.envelope,
            fiber_core_width: self.fiber_core_width_um * UM,
            chopper: self.chopper.state(self.chopping_rate_hz),
            coincidence_window: self.coincidence_window_ns * NS,
            detection_window: self.detection_window_ns * NS,
            reflection_phase: deg(self.reflection_phase_deg),
            which_way_fibers: self.which_way_fibers,
            w_click_threshold: self.w_click_threshold,
        };
        cfg.validate().map_err(rename_key)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    SinglePhotonHeralded,
    Poissonian,
}

/// `[stream]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamSection {
    pub source: SourceName,
    /// Used by the Poissonian source only.
    pub mean_per_window: f64,
    pub quanta_per_photon: u32,
    pub phase_model: PhaseModel,
}

impl Default for StreamSection {
    fn default() -> Self {
        Self {
            source: SourceName::SinglePhotonHeralded,
            mean_per_window: 1.0,
            quanta_per_photon: 1,
            phase_model: PhaseModel::SharedPiston,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Standard,
    ChopperCoincidence,
    DelayedChoice,
}

impl ModeName {
    pub const ALL: [ModeName; 3] = [
        ModeName::Standard,
        ModeName::ChopperCoincidence,
        ModeName::DelayedChoice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::Standard => "standard",
            ModeName::ChopperCoincidence => "chopper_coincidence",
            ModeName::DelayedChoice => "delayed_choice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

/// `[run]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub seed: u64,
    pub windows: u64,
    pub mode: ModeName,
    pub decision_delay_windows: u64,
    pub count_mode: CountMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_at_window: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_chopper: Option<ChopperName>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 42,
            windows: 100_000,
            mode: ModeName::Standard,
            decision_delay_windows: 0,
            count_mode: CountMode::Exact,
            switch_at_window: None,
            switch_chopper: None,
        }
    }
}

/// `[output]`: where the CLI writes, all optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
}

impl OutputSection {
    fn is_empty(&self) -> bool {
        *self == OutputSection::default()
    }
}

/// A parsed experiment file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentFile {
    pub schema_version: i64,
    pub model: ModelKind,
    pub apparatus: ApparatusSection,
    pub stream: StreamSection,
    pub run: RunSection,
    #[serde(skip_serializing_if = "OutputSection::is_empty")]
    pub output: OutputSection,
}

impl ExperimentFile {
    /// Defaults for `model`.
    pub fn new(model: ModelKind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model,
            apparatus: ApparatusSection::default(),
            stream: StreamSection::default(),
            run: RunSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Every defaulted value made explicit.
    pub fn resolved(&self) -> Result<Self> {
        Ok(Self {
            apparatus: self.apparatus.resolved()?,
            ..self.clone()
        })
    }

    pub fn to_run_spec(&self) -> Result<RunSpec> {
        let cfg = self.apparatus.to_config()?;
        let source = match self.stream.source {
            SourceName::SinglePhotonHeralded => SourceKind::SinglePhotonHeralded,
            SourceName::Poissonian => SourceKind::Poissonian {
                mean: self.stream.mean_per_window,
            },
        };
        let mode = match self.run.mode {
            ModeName::Standard => RunMode::Standard,
            ModeName::ChopperCoincidence => RunMode::ChopperCoincidence,
            ModeName::DelayedChoice => RunMode::DelayedChoice {
                decision_delay: self.run.decision_delay_windows,
            },
        };
        let switch = match (self.run.switch_at_window, self.run.switch_chopper) {
            (None, None) => None,
            (Some(at_window), Some(c)) => Some(ChopperSwitch {
                at_window,
                chopper: c.state(self.apparatus.chopping_rate_hz),
            }),
            _ => {
                return Err(Error::Schema(
                    "`run.switch_at_window` and `run.switch_chopper` must be given together".into(),
                ))
            }
        };
        let spec = RunSpec {
            model: self.model,
            cfg,
            stream: EmissionStream {
                source,
                n_windows: self.run.windows,
                quanta_per_photon: self.stream.quanta_per_photon,
                phase_model: self.stream.phase_model,
            },
            seed: self.run.seed,
            mode,
            count_mode: self.run.count_mode,
            switch,
        };
        spec.validate().map_err(rename_key)?;
        Ok(spec)
    }

    /// Rebuild a file from its JSON echo.
    pub fn from_echo(echo: &serde_json::Value) -> Result<Self> {
        let table = Table::try_from(echo)
            .map_err(|e| Error::Schema(format!("echo is not a valid experiment: {e}")))?;
        from_table(table)
    }
}

const TOP_KEYS: &[&str] = &[
    "schema_version",
    "model",
    "apparatus",
    "stream",
    "run",
    "output",
];
const APPARATUS_KEYS: &[&str] = &[
    "wavelength_nm",
    "glass_index",
    "incidence_angle_deg",
    "polarization",
    "arm_path_r_mm",
    "arm_path_t_mm",
    "delay_opd_nm",
    "tilt_r_mrad",
    "tilt_t_mrad",
    "spot_center_r_um",
    "spot_center_t_um",
    "envelope_width_um",
    "envelope",
    "fiber_core_width_um",
    "chopper",
    "chopping_rate_hz",
    "coincidence_window_ns",
    "detection_window_ns",
    "reflection_phase_deg",
    "which_way_fibers",
    "w_click_threshold",
];
const STREAM_KEYS: &[&str] = &[
    "source",
    "mean_per_window",
    "quanta_per_photon",
    "phase_model",
];
const RUN_KEYS: &[&str] = &[
    "seed",
    "windows",
    "mode",
    "decision_delay_windows",
    "count_mode",
    "switch_at_window",
    "switch_chopper",
];
const OUTPUT_KEYS: &[&str] = &["report", "histogram", "series"];

/// Pulls typed values out of one table and complains about leftovers.
struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn type_error(&self, key: &str, want: &str) -> Error {
        Error::Schema(format!("`{}` must be {want}", self.path(key)))
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(v)),
            Some(Value::Integer(v)) => Ok(Some(v as f64)),
            Some(_) => Err(self.type_error(key, "a number")),
        }
    }

    fn uint(&mut self, key: &str) -> Result<Option<u64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if v >= 0 => Ok(Some(v as u64)),
            Some(_) => Err(self.type_error(key, "a non-negative integer")),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Boolean(v)) => Ok(Some(v)),
            Some(_) => Err(self.type_error(key, "true or false")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::String(v)) => Ok(Some(v)),
            Some(_) => Err(self.type_error(key, "a string")),
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Result<Option<T>> {
        let Some(s) = self.string(key)? else {
            return Ok(None);
        };
        options
            .iter()
            .find(|(name, _)| *name == s)
            .map(|&(_, v)| Some(v))
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                Error::Schema(format!(
                    "`{}` = \"{s}\" is not one of: {}",
                    self.path(key),
                    names.join(", ")
                ))
            })
    }

    fn table(&mut self, key: &'static str) -> Result<Section> {
        match self.table.remove(key) {
            None => Ok(Section {
                name: key,
                table: Table::new(),
            }),
            Some(Value::Table(t)) => Ok(Section {
                name: key,
                table: t,
            }),
            Some(_) => Err(Error::Schema(format!("`{key}` must be a table"))),
        }
    }

    /// Reject whatever was not consumed.
    fn finish(self, allowed: &[&str]) -> Result<()> {
        let Some(key) = self.table.keys().next() else {
            return Ok(());
        };
        let path = self.path(key);
        if let Some(with_unit) = allowed.iter().find(|a| {
            a.strip_prefix(key.as_str())
                .is_some_and(|rest| rest.starts_with('_'))
        }) {
            return Err(Error::Schema(format!(
                "`{path}` needs an explicit unit suffix, e.g. `{with_unit}`"
            )));
        }
        let nearest = allowed
            .iter()
            .map(|a| (strsim::levenshtein(key, a), *a))
            .min()
            .filter(|(d, _)| *d <= 3);
        Err(Error::Schema(match nearest {
            Some((_, s)) => format!("unknown key `{path}`; did you mean `{s}`?"),
            None => format!("unknown key `{path}`"),
        }))
    }
}

const CHOPPERS: &[(&str, ChopperName)] = &[
    ("open", ChopperName::Open),
    ("block_r", ChopperName::BlockR),
    ("block_t", ChopperName::BlockT),
    ("chopping", ChopperName::Chopping),
];

fn parse_apparatus(mut s: Section) -> Result<ApparatusSection> {
    let d = ApparatusSection::default();
    let a = ApparatusSection {
        wavelength_nm: s.float("wavelength_nm")?.unwrap_or(d.wavelength_nm),
        glass_index: s.float("glass_index")?.unwrap_or(d.glass_index),
        incidence_angle_deg: s.float("incidence_angle_deg")?,
        polarization: s
            .choice(
                "polarization",
                &[("s", Polarization::S), ("p", Polarization::P)],
            )?
            .unwrap_or(d.polarization),
        arm_path_r_mm: s.float("arm_path_r_mm")?.unwrap_or(d.arm_path_r_mm),
        arm_path_t_mm: s.float("arm_path_t_mm")?.unwrap_or(d.arm_path_t_mm),
        delay_opd_nm: s.float("delay_opd_nm")?.unwrap_or(d.delay_opd_nm),
        tilt_r_mrad: s.float("tilt_r_mrad")?.unwrap_or(d.tilt_r_mrad),
        tilt_t_mrad: s.float("tilt_t_mrad")?.unwrap_or(d.tilt_t_mrad),
        spot_center_r_um: s.float("spot_center_r_um")?.unwrap_or(d.spot_center_r_um),
        spot_center_t_um: s.float("spot_center_t_um")?.unwrap_or(d.spot_center_t_um),
        envelope_width_um: s.float("envelope_width_um")?.unwrap_or(d.envelope_width_um),
        envelope: s
            .choice(
                "envelope",
                &[("gaussian", Envelope::Gaussian), ("sinc", Envelope::Sinc)],
            )?
            .unwrap_or(d.envelope),
        fiber_core_width_um: s
            .float("fiber_core_width_um")?
            .unwrap_or(d.fiber_core_width_um),
        chopper: s.choice("chopper", CHOPPERS)?.unwrap_or(d.chopper),
        chopping_rate_hz: s.float("chopping_rate_hz")?.unwrap_or(d.chopping_rate_hz),
        coincidence_window_ns: s
            .float("coincidence_window_ns")?
            .unwrap_or(d.coincidence_window_ns),
        detection_window_ns: s
            .float("detection_window_ns")?
            .unwrap_or(d.detection_window_ns),
        reflection_phase_deg: s
            .float("reflection_phase_deg")?
            .unwrap_or(d.reflection_phase_deg),
        which_way_fibers: s.boolean("which_way_fibers")?.unwrap_or(d.which_way_fibers),
        w_click_threshold: s.float("w_click_threshold")?.unwrap_or(d.w_click_threshold),
    };
    s.finish(APPARATUS_KEYS)?;
    Ok(a)
}

fn parse_stream(mut s: Section) -> Result<StreamSection> {
    let d = StreamSection::default();
    let quanta = s
        .uint("quanta_per_photon")?
        .unwrap_or(d.quanta_per_photon as u64);
    let out = StreamSection {
        source: s
            .choice(
                "source",
                &[
                    ("single_photon_heralded", SourceName::SinglePhotonHeralded),
                    ("poissonian", SourceName::Poissonian),
                ],
            )?
            .unwrap_or(d.source),
        mean_per_window: s.float("mean_per_window")?.unwrap_or(d.mean_per_window),
        quanta_per_photon: u32::try_from(quanta).map_err(|_| Error::Validation {
            key: "stream.quanta_per_photon".into(),
            message: format!("{quanta} is too large"),
        })?,
        phase_model: s
            .choice(
                "phase_model",
                &[
                    ("shared_piston", PhaseModel::SharedPiston),
                    ("independent", PhaseModel::Independent),
                ],
            )?
            .unwrap_or(d.phase_model),
    };
    s.finish(STREAM_KEYS)?;
    Ok(out)
}

fn parse_run(mut s: Section) -> Result<RunSection> {
    let d = RunSection::default();
    let modes: Vec<(&str, ModeName)> = ModeName::ALL.iter().map(|m| (m.as_str(), *m)).collect();
    let out = RunSection {
        seed: s.uint("seed")?.unwrap_or(d.seed),
        windows: s.uint("windows")?.unwrap_or(d.windows),
        mode: s.choice("mode", &modes)?.unwrap_or(d.mode),
        decision_delay_windows: s
            .uint("decision_delay_windows")?
            .unwrap_or(d.decision_delay_windows),
        count_mode: s
            .choice(
                "count_mode",
                &[("sampled", CountMode::Sampled), ("exact", CountMode::Exact)],
            )?
            .unwrap_or(d.count_mode),
        switch_at_window: s.uint("switch_at_window")?,
        switch_chopper: s.choice("switch_chopper", CHOPPERS)?,
    };
    s.finish(RUN_KEYS)?;
    Ok(out)
}

fn parse_output(mut s: Section) -> Result<OutputSection> {
    let out = OutputSection {
        report: s.string("report")?,
        histogram: s.string("histogram")?,
        series: s.string("series")?,
    };
    s.finish(OUTPUT_KEYS)?;
    Ok(out)
}

fn from_table(table: Table) -> Result<ExperimentFile> {
    let mut top = Section { name: "", table };
    let schema_version = match top.table.remove("schema_version") {
        None => return Err(Error::Schema("`schema_version` is mandatory".into())),
        Some(Value::Integer(v)) => v,
        Some(_) => return Err(Error::Schema("`schema_version` must be an integer".into())),
    };
    if schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {schema_version} (this build reads {SCHEMA_VERSION})"
        )));
    }
    let names: Vec<(&str, ModelKind)> = ModelKind::ALL.iter().map(|m| (m.as_str(), *m)).collect();
    let model = top
        .choice("model", &names)?
        .ok_or_else(|| Error::Schema("`model` is mandatory".into()))?;
    let apparatus = parse_apparatus(top.table("apparatus")?)?;
    let stream = parse_stream(top.table("stream")?)?;
    let run = parse_run(top.table("run")?)?;
    let output = parse_output(top.table("output")?)?;
    top.finish(TOP_KEYS)?;
    Ok(ExperimentFile {
        schema_version,
        model,
        apparatus,
        stream,
        run,
        output,
    })
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parse experiment text. Syntax errors carry a line and column.
pub fn parse_experiment(text: &str) -> Result<ExperimentFile> {
    let table: Table = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    from_table(table)
}
