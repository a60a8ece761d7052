//! Scenario configuration: named presets and the TOML config-file grammar.
//!
//! Config files are flat key/value TOML with one section per concern:
//!
//! ```toml
//! scenario = "custom"          # fig2 | fig3 | fig4 | fig5 | fig6 | custom
//! variant = "c"                # fig4/fig5 only: a (no kicks), b (π/6), c (π/18)
//! n_max = 20                   # optional; default 20 (36 when lambda_0 > 0.1 ω_c)
//! samples_per_interval = 8     # optional
//! output_dir = "out"           # optional
//! emit_svg = false             # optional
//! initial_state = "g,0"        # custom trace modes
//! projectors = ["g,0", "2,-"]  # custom trace modes
//!
//! [params]                     # custom only
//! omega_0 = 1.0
//! omega_c = 1.0
//! lambda_0 = 0.06
//!
//! [schedule]                   # custom: kicked trace
//! tau_i = 11.4827459388
//! tau_p = 1.5707963268
//! n_kicks = 54
//!
//! [free]                       # custom: no-kick trace (exactly one mode section)
//! total_time = 100.0
//! n_samples = 4000
//!
//! [scan]                       # custom or fig3: τ_I scan
//! start = 0.5
//! stop = 20.0
//! step = 0.01
//! tau_p = 1.5707963268
//! max_kicks = 500              # optional; default from the transfer-time budget
//! ```
//!
//! Unknown keys are rejected. Presets fill every physics field; a preset file
//! may only adjust n_max, samples_per_interval, output_dir, emit_svg and (for
//! fig3) the scan grid. All frequencies are in ω_c-units, times in 1/ω_c.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::recommended_kick_budget;
use crate::dynamics::KickSchedule;
use crate::error::{Error, Result};
use crate::model::{Branch, StateLabel, SystemParams};

/// Named scenario presets plus fully user-specified `custom` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Fig2 => "fig2",
            ScenarioKind::Fig3 => "fig3",
            ScenarioKind::Fig4 => "fig4",
            ScenarioKind::Fig5 => "fig5",
            ScenarioKind::Fig6 => "fig6",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(ScenarioKind::Fig2),
            "fig3" => Ok(ScenarioKind::Fig3),
            "fig4" => Ok(ScenarioKind::Fig4),
            "fig5" => Ok(ScenarioKind::Fig5),
            "fig6" => Ok(ScenarioKind::Fig6),
            "custom" => Ok(ScenarioKind::Custom),
            _ => Err(Error::Config(format!(
                "unknown scenario '{s}' (expected fig2..fig6 or custom)"
            ))),
        }
    }
}

/// Sub-case of fig4/fig5: a = no kicks, b = τ_I = τ_P = π/6, c = π/18.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    A,
    B,
    C,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            _ => Err(Error::Config(format!("unknown variant '{s}' (expected a, b or c)"))),
        }
    }
}

/// Uniform τ_I grid `start, start+step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec")]
pub struct GridSpec {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Deserialize)]
struct RawGridSpec {
    start: f64,
    stop: f64,
    step: f64,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;
    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.start, raw.stop, raw.step)
    }
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start > 0.0) || !(stop > start) || !(step > 0.0) {
            return Err(Error::Config(format!(
                "grid needs 0 < start < stop and step > 0 (got {start}:{stop}:{step})"
            )));
        }
        Ok(GridSpec { start, stop, step })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Expand to concrete grid points (endpoints inclusive up to rounding).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "grid must be start:stop:step, got '{s}'"
            )));
        }
        let parse = |p: &str| -> Result<f64> {
            p.parse()
                .map_err(|_| Error::Config(format!("malformed grid number '{p}'")))
        };
        GridSpec::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    }
}

/// What a scenario actually runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Dense kicked trace under the given schedule.
    Kicked { schedule: KickSchedule },
    /// Uninterrupted Rabi evolution (the no-kick reference).
    Free { total_time: f64, n_samples: usize },
    /// τ_I resonance scan.
    Scan {
        grid: GridSpec,
        tau_p: f64,
        max_kicks: usize,
    },
    /// p_ε trace, exact and perturbative, from |e,0⟩.
    Epsilon { schedule: KickSchedule },
}

/// Fully resolved scenario description; everything `run_scenario` needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub variant: Option<Variant>,
    pub params: SystemParams,
    pub n_max: usize,
    pub samples_per_interval: usize,
    pub initial_state: StateLabel,
    pub projectors: Vec<StateLabel>,
    pub mode: RunMode,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl ScenarioConfig {
    /// File-name stem for this run, e.g. `fig4c` or `custom`.
    pub fn stem(&self) -> String {
        match self.variant {
            Some(v) => format!("{}{}", self.scenario, v.name()),
            None => self.scenario.to_string(),
        }
    }
}

/// Default truncation: 20 photons for weak coupling, 36 for ultrastrong runs.
pub fn default_n_max(params: &SystemParams) -> usize {
    if params.lambda_0() <= 0.1 * params.omega_c() {
        20
    } else {
        36
    }
}

const DEFAULT_SAMPLES: usize = 8;
const DEFAULT_OUTPUT_DIR: &str = "out";

fn ultrastrong_params() -> SystemParams {
    SystemParams::new(1.0, 1.0, 0.5).expect("static params")
}

fn weak_params() -> SystemParams {
    SystemParams::new(1.0, 1.0, 0.06).expect("static params")
}

/// Kick count that comfortably covers one full transfer, ceil(1.5π/(4|g_−|)).
fn fig2_kick_count(params: &SystemParams) -> usize {
    let chi = 0.5 * (2.0 * params.lambda_0() * 2.0_f64.sqrt()).atan2(params.detuning());
    let g = params.lambda_0() * chi.sin() / crate::model::delta_s(params, Branch::Minus);
    (1.5 * PI / (4.0 * g.abs())).ceil() as usize
}

/// Kick count covering `horizon` time units with the given period.
fn kicks_for_horizon(horizon: f64, period: f64) -> usize {
    (horizon / period).ceil() as usize
}

/// Build the named preset. `variant` is only meaningful for fig4/fig5
/// (default c); passing one elsewhere is a config error.
pub fn preset_config(kind: ScenarioKind, variant: Option<Variant>) -> Result<ScenarioConfig> {
    if !matches!(kind, ScenarioKind::Fig4 | ScenarioKind::Fig5) && variant.is_some() {
        return Err(Error::Config(format!(
            "scenario {kind} has no variants; drop --variant"
        )));
    }
    let base = |params: SystemParams,
                variant: Option<Variant>,
                initial: &str,
                projectors: &[&str],
                mode: RunMode|
     -> Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            scenario: kind,
            variant,
            params,
            n_max: default_n_max(&params),
            samples_per_interval: DEFAULT_SAMPLES,
            initial_state: initial.parse()?,
            projectors: projectors.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            mode,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            emit_svg: false,
        })
    };

    match kind {
        ScenarioKind::Fig2 => {
            let params = weak_params();
            let tau_i = crate::analysis::resonance_tau(&params, Branch::Minus, 3, 0.0);
            let schedule = KickSchedule::new(tau_i, PI / 2.0, fig2_kick_count(&params))?;
            base(params, None, "g,0", &["g,0", "2,-"], RunMode::Kicked { schedule })
        }
        ScenarioKind::Fig3 => {
            let params = weak_params();
            let mode = RunMode::Scan {
                grid: GridSpec::new(0.5, 20.0, 0.01)?,
                tau_p: PI / 2.0,
                max_kicks: recommended_kick_budget(&params)?,
            };
            base(params, None, "g,0", &["2,+", "2,-"], mode)
        }
        ScenarioKind::Fig4 => {
            let params = ultrastrong_params();
            let variant = variant.unwrap_or(Variant::C);
            let horizon = 25.0;
            let mode = match variant {
                Variant::A => RunMode::Free {
                    total_time: horizon,
                    // sample count matched to the kicked variant c so the
                    // emitted CSVs are row-comparable
                    n_samples: kicks_for_horizon(horizon, PI / 9.0) * 12,
                },
                Variant::B => {
                    let tau = PI / 6.0;
                    RunMode::Kicked {
                        schedule: KickSchedule::new(tau, tau, kicks_for_horizon(horizon, 2.0 * tau))?,
                    }
                }
                Variant::C => {
                    let tau = PI / 18.0;
                    RunMode::Kicked {
                        schedule: KickSchedule::new(tau, tau, kicks_for_horizon(horizon, 2.0 * tau))?,
                    }
                }
            };
            base(params, Some(variant), "e,0", &["e,0", "g,1"], mode)
        }
        ScenarioKind::Fig5 => {
            let params = ultrastrong_params();
            let variant = variant.unwrap_or(Variant::C);
            let horizon = 100.0;
            let mode = match variant {
                Variant::A => RunMode::Free {
                    total_time: horizon,
                    n_samples: kicks_for_horizon(horizon, PI / 9.0) * 12,
                },
                Variant::B => {
                    let tau = PI / 6.0;
                    RunMode::Kicked {
                        schedule: KickSchedule::new(tau, tau, kicks_for_horizon(horizon, 2.0 * tau))?,
                    }
                }
                Variant::C => {
                    let tau = PI / 18.0;
                    RunMode::Kicked {
                        schedule: KickSchedule::new(tau, tau, kicks_for_horizon(horizon, 2.0 * tau))?,
                    }
                }
            };
            base(params, Some(variant), "g,0", &["g,0"], mode)
        }
        ScenarioKind::Fig6 => {
            let params = ultrastrong_params();
            let tau = PI / 18.0;
            let schedule = KickSchedule::new(tau, tau, kicks_for_horizon(60.0, 2.0 * tau))?;
            base(params, None, "e,0", &["e,0", "g,1"], RunMode::Epsilon { schedule })
        }
        ScenarioKind::Custom => Err(Error::Config(
            "custom scenarios have no preset; provide a config file".into(),
        )),
    }
}

/// CLI-flag overrides applied on top of a preset or config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_max: Option<usize>,
    pub samples_per_interval: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub emit_svg: bool,
    pub grid: Option<GridSpec>,
}

pub fn apply_overrides(mut config: ScenarioConfig, o: &Overrides) -> Result<ScenarioConfig> {
    if let Some(n_max) = o.n_max {
        if n_max < 2 {
            return Err(Error::Config(format!("n_max must be >= 2, got {n_max}")));
        }
        config.n_max = n_max;
    }
    if let Some(s) = o.samples_per_interval {
        if s < 1 {
            return Err(Error::Config("samples_per_interval must be >= 1".into()));
        }
        config.samples_per_interval = s;
    }
    if let Some(dir) = &o.output_dir {
        config.output_dir = dir.clone();
    }
    if o.emit_svg {
        config.emit_svg = true;
    }
    if let Some(grid) = o.grid {
        match &mut config.mode {
            RunMode::Scan { grid: g, .. } => *g = grid,
            _ => {
                return Err(Error::Config(format!(
                    "a scan grid is only meaningful for scan scenarios, not {}",
                    config.scenario
                )))
            }
        }
    }
    Ok(config)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfigFile {
    scenario: String,
    variant: Option<String>,
    n_max: Option<usize>,
    samples_per_interval: Option<usize>,
    output_dir: Option<PathBuf>,
    emit_svg: Option<bool>,
    initial_state: Option<String>,
    projectors: Option<Vec<String>>,
    params: Option<RawParams>,
    schedule: Option<RawSchedule>,
    free: Option<RawFree>,
    scan: Option<RawScan>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    omega_0: f64,
    omega_c: f64,
    lambda_0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    tau_i: f64,
    tau_p: f64,
    n_kicks: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFree {
    total_time: f64,
    n_samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    start: f64,
    stop: f64,
    step: f64,
    tau_p: f64,
    max_kicks: Option<usize>,
}

/// Load and validate a TOML config file.
pub fn load_config_file(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawConfigFile = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let kind: ScenarioKind = raw.scenario.parse()?;
    let variant = raw.variant.as_deref().map(Variant::from_str).transpose()?;

    let mut config = if kind == ScenarioKind::Custom {
        build_custom(&raw)?
    } else {
        // presets own their physics; reject attempts to redefine it
        for (present, section) in [
            (raw.params.is_some(), "params"),
            (raw.schedule.is_some(), "schedule"),
            (raw.free.is_some(), "free"),
            (raw.initial_state.is_some(), "initial_state"),
            (raw.projectors.is_some(), "projectors"),
        ] {
            if present {
                return Err(Error::Config(format!(
                    "preset scenario {kind} does not accept '{section}'"
                )));
            }
        }
        if raw.scan.is_some() && kind != ScenarioKind::Fig3 {
            return Err(Error::Config(format!(
                "a scan grid is only meaningful for scan scenarios, not {kind}"
            )));
        }
        let mut preset = preset_config(kind, variant)?;
        if let Some(scan) = &raw.scan {
            let grid = GridSpec::new(scan.start, scan.stop, scan.step)?;
            preset.mode = RunMode::Scan {
                grid,
                tau_p: scan.tau_p,
                max_kicks: scan
                    .max_kicks
                    .unwrap_or(recommended_kick_budget(&preset.params)?),
            };
        }
        preset
    };

    if let Some(n_max) = raw.n_max {
        if n_max < 2 {
            return Err(Error::Config(format!("n_max must be >= 2, got {n_max}")));
        }
        config.n_max = n_max;
    }
    if let Some(s) = raw.samples_per_interval {
        if s < 1 {
            return Err(Error::Config("samples_per_interval must be >= 1".into()));
        }
        config.samples_per_interval = s;
    }
    if let Some(dir) = raw.output_dir {
        config.output_dir = dir;
    }
    if let Some(svg) = raw.emit_svg {
        config.emit_svg = svg;
    }
    Ok(config)
}

fn build_custom(raw: &RawConfigFile) -> Result<ScenarioConfig> {
    let p = raw
        .params
        .as_ref()
        .ok_or_else(|| Error::Config("custom scenario requires [params]".into()))?;
    let params = SystemParams::new(p.omega_0, p.omega_c, p.lambda_0)?;

    let mode_sections =
        raw.schedule.is_some() as u8 + raw.free.is_some() as u8 + raw.scan.is_some() as u8;
    if mode_sections != 1 {
        return Err(Error::Config(
            "custom scenario requires exactly one of [schedule], [free] or [scan]".into(),
        ));
    }

    let (mode, initial_state, projectors) = if let Some(scan) = &raw.scan {
        if raw.initial_state.is_some() || raw.projectors.is_some() {
            return Err(Error::Config(
                "scan runs fix the initial state |g,0⟩ and the |2,±⟩ projectors; \
                 drop initial_state/projectors"
                    .into(),
            ));
        }
        let grid = GridSpec::new(scan.start, scan.stop, scan.step)?;
        let max_kicks = match scan.max_kicks {
            Some(k) => k,
            None => recommended_kick_budget(&params)?,
        };
        (
            RunMode::Scan { grid, tau_p: scan.tau_p, max_kicks },
            StateLabel::Bare(crate::hilbert::Atom::Ground, 0),
            vec!["2,+".parse()?, "2,-".parse()?],
        )
    } else {
        let initial: StateLabel = raw
            .initial_state
            .as_deref()
            .ok_or_else(|| Error::Config("custom trace requires initial_state".into()))?
            .parse()?;
        let projectors: Vec<StateLabel> = raw
            .projectors
            .as_ref()
            .ok_or_else(|| Error::Config("custom trace requires projectors".into()))?
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        if projectors.is_empty() {
            return Err(Error::Config("projectors must not be empty".into()));
        }
        let mode = if let Some(s) = &raw.schedule {
            RunMode::Kicked {
                schedule: KickSchedule::new(s.tau_i, s.tau_p, s.n_kicks)?,
            }
        } else {
            let f = raw.free.as_ref().expect("mode section counted above");
            if !(f.total_time > 0.0) || f.n_samples < 1 {
                return Err(Error::Config(
                    "free mode needs total_time > 0 and n_samples >= 1".into(),
                ));
            }
            RunMode::Free {
                total_time: f.total_time,
                n_samples: f.n_samples,
            }
        };
        (mode, initial, projectors)
    };

    Ok(ScenarioConfig {
        scenario: ScenarioKind::Custom,
        variant: None,
        params,
        n_max: raw.n_max.unwrap_or(default_n_max(&params)),
        samples_per_interval: raw.samples_per_interval.unwrap_or(DEFAULT_SAMPLES),
        initial_state,
        projectors,
        mode,
        output_dir: raw
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        emit_svg: raw.emit_svg.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn fig2_preset_matches_caption() {
        let c = preset_config(ScenarioKind::Fig2, None).unwrap();
        assert!((c.params.lambda_0() - 0.06).abs() < 1e-15);
        assert!((c.params.omega_0() - 1.0).abs() < 1e-15);
        match &c.mode {
            RunMode::Kicked { schedule } => {
                assert!((schedule.tau_i() - 11.4827459388).abs() < 1e-8);
                assert!((schedule.tau_p() - PI / 2.0).abs() < 1e-15);
                assert_eq!(schedule.n_kicks(), 54);
            }
            other => panic!("unexpected mode {other:?}"),
        }
        assert_eq!(c.initial_state.to_string(), "g,0");
        assert_eq!(c.n_max, 20);
    }

    #[test]
    fn fig4_variant_c_preset() {
        let c = preset_config(ScenarioKind::Fig4, Some(Variant::C)).unwrap();
        assert!((c.params.lambda_0() - 0.5).abs() < 1e-15);
        assert_eq!(c.initial_state.to_string(), "e,0");
        assert_eq!(c.n_max, 36);
        match &c.mode {
            RunMode::Kicked { schedule } => {
                assert!((schedule.tau_i() - PI / 18.0).abs() < 1e-15);
                assert!((schedule.tau_p() - PI / 18.0).abs() < 1e-15);
            }
            other => panic!("unexpected mode {other:?}"),
        }
    }

    #[test]
    fn variant_rejected_outside_fig4_fig5() {
        assert!(matches!(
            preset_config(ScenarioKind::Fig2, Some(Variant::A)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn grid_spec_expansion_and_parse() {
        let g: GridSpec = "0.5:20:0.01".parse().unwrap();
        let values = g.values();
        assert_eq!(values.len(), 1951);
        assert!((values[0] - 0.5).abs() < 1e-12);
        assert!((values[1950] - 20.0).abs() < 1e-9);
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("2:1:0.1".parse::<GridSpec>().is_err());
        assert!("0.5:20:x".parse::<GridSpec>().is_err());
    }

    #[test]
    fn grid_override_rejected_for_trace_scenario() {
        let c = preset_config(ScenarioKind::Fig2, None).unwrap();
        let o = Overrides {
            grid: Some(GridSpec::new(0.5, 2.0, 0.1).unwrap()),
            ..Default::default()
        };
        assert!(matches!(apply_overrides(c, &o), Err(Error::Config(_))));
    }

    #[test]
    fn custom_config_round_trip() {
        let f = write_config(
            r#"
scenario = "custom"
n_max = 16
initial_state = "g,0"
projectors = ["g,0", "2,-"]

[params]
omega_0 = 1.0
omega_c = 1.0
lambda_0 = 0.06

[schedule]
tau_i = 11.48
tau_p = 1.5707963
n_kicks = 5
"#,
        );
        let c = load_config_file(f.path()).unwrap();
        assert_eq!(c.scenario, ScenarioKind::Custom);
        assert_eq!(c.n_max, 16);
        assert_eq!(c.projectors.len(), 2);
    }

    #[test]
    fn custom_missing_params_is_rejected() {
        let f = write_config(
            r#"
scenario = "custom"
initial_state = "g,0"
projectors = ["g,0"]

[schedule]
tau_i = 1.0
tau_p = 0.5
n_kicks = 5
"#,
        );
        let err = load_config_file(f.path()).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = write_config(
            r#"
scenario = "fig2"
frobnicate = true
"#,
        );
        assert!(load_config_file(f.path()).is_err());
    }

    #[test]
    fn scan_section_with_fig2_is_contradictory() {
        let f = write_config(
            r#"
scenario = "fig2"

[scan]
start = 0.5
stop = 2.0
step = 0.1
tau_p = 1.5707963
"#,
        );
        let err = load_config_file(f.path()).unwrap_err();
        assert!(err.to_string().contains("scan grid"), "{err}");
    }

    #[test]
    fn default_truncations_follow_coupling() {
        assert_eq!(default_n_max(&SystemParams::resonant(0.06).unwrap()), 20);
        assert_eq!(default_n_max(&SystemParams::resonant(0.5).unwrap()), 36);
    }
}
