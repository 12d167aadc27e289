//! Run configuration: per-command defaults, overlaid by an optional
//! `key = value` config file, overlaid by command-line flags. Keys are
//! flat and mirror the field names below; `#` starts a comment.

use std::fs;
use std::path::{Path, PathBuf};

use gauge_dynamics::analysis::{
    ASYMPTOTE_T_EVAL_DEFAULT, ASYMPTOTE_WINDOW_DEFAULT, GROWTH_CEILING_DEFAULT,
    GROWTH_FLOOR_DEFAULT, ONSET_EPSILON_DEFAULT, ONSET_T_MIN_DEFAULT,
};
use gauge_dynamics::engine::{EvolutionConfig, XConvention};
use gauge_dynamics::linalg::StateVector;
use gauge_dynamics::model::{basis_state, plus_x_state, ModelSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Quench,
    Deviation,
    Sweep,
    Squiggle,
    Chaos,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Quench => "quench",
            CommandKind::Deviation => "deviation",
            CommandKind::Sweep => "sweep",
            CommandKind::Squiggle => "squiggle",
            CommandKind::Chaos => "chaos",
        }
    }
}

/// Size tiers: the desk tier keeps runs in the minutes range; the full
/// tier admits the largest rings (an L = 10 frame set alone holds 10
/// complex matrices of dimension 1024) and warns about the wall clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Desk,
    Full,
}

impl Tier {
    pub fn max_l(self) -> usize {
        match self {
            Tier::Desk => 8,
            Tier::Full => 10,
        }
    }

    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "desk" => Ok(Tier::Desk),
            "full" => Ok(Tier::Full),
            other => Err(CliError::Usage(format!("tier must be 'desk' or 'full', got '{other}'"))),
        }
    }
}

/// Initial product state of the quench.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    /// Every site polarized along +x (the default).
    PlusX,
    /// A computational-basis state, by index.
    Basis(usize),
}

impl InitialState {
    fn parse(s: &str) -> CliResult<Self> {
        if s == "plus_x" {
            return Ok(InitialState::PlusX);
        }
        if let Some(idx) = s.strip_prefix("basis:") {
            let idx: usize = idx.parse().map_err(|_| {
                CliError::Usage(format!("initial_state 'basis:<index>' needs an integer, got '{s}'"))
            })?;
            return Ok(InitialState::Basis(idx));
        }
        Err(CliError::Usage(format!(
            "initial_state must be 'plus_x' or 'basis:<index>', got '{s}'"
        )))
    }

    pub fn vector(&self, l: usize) -> CliResult<StateVector> {
        match self {
            InitialState::PlusX => Ok(plus_x_state(l)?),
            InitialState::Basis(idx) => Ok(basis_state(l, *idx)?),
        }
    }
}

fn parse_convention(s: &str) -> CliResult<XConvention> {
    match s {
        "literal" => Ok(XConvention::Literal),
        "normalized" => Ok(XConvention::Normalized),
        other => Err(CliError::Usage(format!(
            "convention must be 'literal' or 'normalized', got '{other}'"
        ))),
    }
}

/// Everything one command invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub j: f64,
    pub hx: f64,
    pub hz: f64,
    pub gamma_list: Vec<f64>,
    pub l_list: Vec<usize>,
    pub dt: f64,
    pub t_max: f64,
    pub sample_stride: usize,
    pub convention: XConvention,
    pub unitarize_every: usize,
    pub output_path: PathBuf,
    pub threads: usize,
    /// Asymptote read-out time and trailing-window width.
    pub t_eval: f64,
    pub window: f64,
    pub tier: Tier,
    pub initial_state: InitialState,
    /// Add exact-reference columns to the quench CSV.
    pub with_exact: bool,
    /// Fit-only mode: read points from this file instead of simulating.
    pub points_file: Option<PathBuf>,
    /// Step sizes for the chaos comparison (one or two values).
    pub dt_list: Vec<f64>,
    /// Row cadence of the chaos table.
    pub sample_interval: f64,
    pub onset_t_min: f64,
    pub onset_epsilon: f64,
    pub growth_floor: f64,
    pub growth_ceiling: f64,
}

/// Raw command-line overrides; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub gamma: Option<Vec<f64>>,
    pub length: Option<Vec<usize>>,
    pub j: Option<f64>,
    pub hx: Option<f64>,
    pub hz: Option<f64>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub stride: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub convention: Option<String>,
    pub tier: Option<String>,
    pub t_eval: Option<f64>,
    pub window: Option<f64>,
    pub initial_state: Option<String>,
    pub with_exact: bool,
    pub points: Option<PathBuf>,
    pub dt_list: Option<Vec<f64>>,
    pub sample_interval: Option<f64>,
    pub onset_t_min: Option<f64>,
    pub onset_epsilon: Option<f64>,
}

impl RunConfig {
    /// Built-in defaults for one command.
    pub fn defaults(command: CommandKind) -> Self {
        let mut cfg = RunConfig {
            command,
            j: 1.0,
            hx: 1.0,
            hz: 0.0,
            gamma_list: vec![0.0],
            l_list: vec![6],
            dt: 0.005,
            t_max: 5.0,
            sample_stride: 10,
            convention: XConvention::Normalized,
            unitarize_every: 1,
            output_path: PathBuf::from(format!("{}.csv", command.name())),
            threads: 1,
            t_eval: ASYMPTOTE_T_EVAL_DEFAULT,
            window: ASYMPTOTE_WINDOW_DEFAULT,
            tier: Tier::Desk,
            initial_state: InitialState::PlusX,
            with_exact: false,
            points_file: None,
            dt_list: vec![0.005, 0.0005],
            sample_interval: 0.05,
            onset_t_min: ONSET_T_MIN_DEFAULT,
            onset_epsilon: ONSET_EPSILON_DEFAULT,
            growth_floor: GROWTH_FLOOR_DEFAULT,
            growth_ceiling: GROWTH_CEILING_DEFAULT,
        };
        match command {
            CommandKind::Quench => {}
            CommandKind::Deviation => cfg.gamma_list = vec![20.0],
            CommandKind::Sweep => {
                cfg.gamma_list = vec![8.0, 16.0, 32.0];
                cfg.l_list = vec![5, 6, 7];
            }
            CommandKind::Squiggle => {
                cfg.gamma_list = vec![2.2, 2.3, 2.4, 2.5, 2.6];
                cfg.dt = 0.004;
                cfg.t_max = 60.0;
            }
            CommandKind::Chaos => {
                cfg.gamma_list = vec![0.0, 20.0];
                cfg.t_max = 30.0;
            }
        }
        cfg
    }

    /// Defaults, then the config file (if any), then command-line flags.
    pub fn load(command: CommandKind, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = RunConfig::defaults(command);
        if let Some(path) = &overrides.config {
            for (key, value) in parse_config_file(path)? {
                cfg.apply_kv(&key, &value)?;
            }
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> CliResult<()> {
        let bad_num = |k: &str, v: &str| {
            CliError::Usage(format!("field '{k}': cannot parse '{v}' as a number"))
        };
        match key {
            "j" => self.j = value.parse().map_err(|_| bad_num(key, value))?,
            "hx" => self.hx = value.parse().map_err(|_| bad_num(key, value))?,
            "hz" => self.hz = value.parse().map_err(|_| bad_num(key, value))?,
            "gamma" | "gamma_list" => self.gamma_list = parse_list(key, value)?,
            "length" | "l_list" => self.l_list = parse_list(key, value)?,
            "dt" => self.dt = value.parse().map_err(|_| bad_num(key, value))?,
            "t_max" | "tmax" => self.t_max = value.parse().map_err(|_| bad_num(key, value))?,
            "sample_stride" | "stride" => {
                self.sample_stride = value.parse().map_err(|_| bad_num(key, value))?
            }
            "convention" => self.convention = parse_convention(value)?,
            "unitarize_every" => {
                self.unitarize_every = value.parse().map_err(|_| bad_num(key, value))?
            }
            "output_path" | "out" => self.output_path = PathBuf::from(value),
            "threads" => self.threads = value.parse().map_err(|_| bad_num(key, value))?,
            "t_eval" => self.t_eval = value.parse().map_err(|_| bad_num(key, value))?,
            "window" => self.window = value.parse().map_err(|_| bad_num(key, value))?,
            "tier" => self.tier = Tier::parse(value)?,
            "initial_state" => self.initial_state = InitialState::parse(value)?,
            "with_exact" => {
                self.with_exact = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(CliError::Usage(format!(
                            "field 'with_exact': expected true or false, got '{other}'"
                        )))
                    }
                }
            }
            "points_file" | "points" => self.points_file = Some(PathBuf::from(value)),
            "dt_list" => self.dt_list = parse_list(key, value)?,
            "sample_interval" => {
                self.sample_interval = value.parse().map_err(|_| bad_num(key, value))?
            }
            "onset_t_min" => self.onset_t_min = value.parse().map_err(|_| bad_num(key, value))?,
            "onset_epsilon" => {
                self.onset_epsilon = value.parse().map_err(|_| bad_num(key, value))?
            }
            "growth_floor" => self.growth_floor = value.parse().map_err(|_| bad_num(key, value))?,
            "growth_ceiling" => {
                self.growth_ceiling = value.parse().map_err(|_| bad_num(key, value))?
            }
            other => {
                return Err(CliError::Usage(format!("unknown configuration key '{other}'")));
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(v) = &o.gamma {
            self.gamma_list = v.clone();
        }
        if let Some(v) = &o.length {
            self.l_list = v.clone();
        }
        if let Some(v) = o.j {
            self.j = v;
        }
        if let Some(v) = o.hx {
            self.hx = v;
        }
        if let Some(v) = o.hz {
            self.hz = v;
        }
        if let Some(v) = o.dt {
            self.dt = v;
        }
        if let Some(v) = o.tmax {
            self.t_max = v;
        }
        if let Some(v) = o.stride {
            self.sample_stride = v;
        }
        if let Some(v) = &o.out {
            self.output_path = v.clone();
        }
        if let Some(v) = o.threads {
            self.threads = v;
        }
        if let Some(v) = &o.convention {
            self.convention = parse_convention(v)?;
        }
        if let Some(v) = &o.tier {
            self.tier = Tier::parse(v)?;
        }
        if let Some(v) = o.t_eval {
            self.t_eval = v;
        }
        if let Some(v) = o.window {
            self.window = v;
        }
        if let Some(v) = &o.initial_state {
            self.initial_state = InitialState::parse(v)?;
        }
        if o.with_exact {
            self.with_exact = true;
        }
        if let Some(v) = &o.points {
            self.points_file = Some(v.clone());
        }
        if let Some(v) = &o.dt_list {
            self.dt_list = v.clone();
        }
        if let Some(v) = o.sample_interval {
            self.sample_interval = v;
        }
        if let Some(v) = o.onset_t_min {
            self.onset_t_min = v;
        }
        if let Some(v) = o.onset_epsilon {
            self.onset_epsilon = v;
        }
        Ok(())
    }

    fn validate(&self) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.gamma_list.is_empty() {
            return usage("field 'gamma': list must not be empty".into());
        }
        if self.gamma_list.iter().any(|g| !g.is_finite()) {
            return usage("field 'gamma': all values must be finite".into());
        }
        if self.l_list.is_empty() {
            return usage("field 'length': list must not be empty".into());
        }
        for &l in &self.l_list {
            if l < 3 {
                return usage(format!("field 'length': ring needs L >= 3, got {l}"));
            }
            if l > self.tier.max_l() {
                return usage(format!(
                    "field 'length': L = {l} exceeds the {} cap of {}{}",
                    match self.tier {
                        Tier::Desk => "desk-tier",
                        Tier::Full => "full-tier",
                    },
                    self.tier.max_l(),
                    if self.tier == Tier::Desk && l <= Tier::Full.max_l() {
                        " (use tier = full)"
                    } else {
                        ""
                    }
                ));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return usage(format!("field 'dt': must be positive and finite, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return usage(format!("field 't_max': must be non-negative, got {}", self.t_max));
        }
        if self.sample_stride == 0 {
            return usage("field 'stride': must be at least 1".into());
        }
        if self.unitarize_every == 0 {
            return usage("field 'unitarize_every': must be at least 1".into());
        }
        if self.threads == 0 {
            return usage("field 'threads': must be at least 1".into());
        }
        if !(self.window.is_finite() && self.window >= 0.0) {
            return usage(format!("field 'window': must be non-negative, got {}", self.window));
        }
        if !self.t_eval.is_finite() {
            return usage("field 't_eval': must be finite".into());
        }

        let single_l = self.l_list.len() == 1;
        let single_gamma = self.gamma_list.len() == 1;
        let injecting = self.points_file.is_some();
        match self.command {
            CommandKind::Quench => {
                if !single_l || !single_gamma {
                    return usage(
                        "fields 'gamma'/'length': quench takes a single gamma and a single L"
                            .into(),
                    );
                }
            }
            CommandKind::Deviation => {
                if !single_l {
                    return usage("field 'length': deviation takes a single L".into());
                }
            }
            CommandKind::Sweep => {
                if !injecting {
                    let mut ls = self.l_list.clone();
                    ls.sort_unstable();
                    ls.dedup();
                    if ls.len() < 2 {
                        return usage(
                            "field 'length': the scaling sweep needs at least 2 distinct L"
                                .into(),
                        );
                    }
                }
            }
            CommandKind::Squiggle => {
                if !injecting && !single_l {
                    return usage("field 'length': squiggle takes a single L".into());
                }
            }
            CommandKind::Chaos => {
                if !injecting {
                    if !single_l {
                        return usage("field 'length': chaos takes a single L".into());
                    }
                    if self.dt_list.is_empty() || self.dt_list.len() > 2 {
                        return usage(format!(
                            "field 'dt_list': chaos takes one or two step sizes, got {}",
                            self.dt_list.len()
                        ));
                    }
                    for &dt in &self.dt_list {
                        if !(dt.is_finite() && dt > 0.0) {
                            return usage(format!(
                                "field 'dt_list': step sizes must be positive, got {dt}"
                            ));
                        }
                        let stride = (self.sample_interval / dt).round();
                        if stride < 1.0 || (stride * dt - self.sample_interval).abs() > 1e-9 {
                            return usage(format!(
                                "field 'sample_interval': {} is not an integer multiple of dt = {dt}",
                                self.sample_interval
                            ));
                        }
                    }
                }
            }
        }
        if self.points_file.is_some()
            && matches!(self.command, CommandKind::Quench | CommandKind::Deviation)
        {
            return usage(format!(
                "field 'points': fit-only mode applies to sweep/squiggle/chaos, not {}",
                self.command.name()
            ));
        }
        if self.with_exact && self.command != CommandKind::Quench {
            return usage("field 'with_exact': exact-reference columns apply to quench".into());
        }
        Ok(())
    }

    /// Model for one ring size of this configuration.
    pub fn model_for(&self, l: usize) -> CliResult<ModelSpec> {
        Ok(ModelSpec::new(l, self.j, self.hx, self.hz)?)
    }

    /// Integration parameters for one gamma of this configuration.
    pub fn evolution_for(&self, gamma: f64) -> EvolutionConfig {
        EvolutionConfig {
            gamma,
            dt: self.dt,
            t_max: self.t_max,
            sample_stride: self.sample_stride,
            convention: self.convention,
            unitarize_every: self.unitarize_every,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<T>().map_err(|_| {
                CliError::Usage(format!("field '{key}': cannot parse list item '{item}'"))
            })
        })
        .collect()
}

/// Flat `key = value` file, UTF-8, `#` comments, blank lines ignored.
pub fn parse_config_file(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read config '{}': {e}", path.display()))
    })?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config '{}' line {}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn file_then_flags_override_defaults() {
        let (_dir, path) = write_temp("gamma = 8, 16\nhz = 1.0 # field on\ndt=0.01\n");
        let overrides = Overrides {
            config: Some(path),
            gamma: Some(vec![4.0]),
            length: Some(vec![4]),
            ..Overrides::default()
        };
        let cfg = RunConfig::load(CommandKind::Deviation, &overrides).unwrap();
        assert_eq!(cfg.gamma_list, vec![4.0]);
        assert_eq!(cfg.l_list, vec![4]);
        assert_eq!(cfg.hz, 1.0);
        assert_eq!(cfg.dt, 0.01);
    }

    #[test]
    fn unknown_keys_are_reported_by_name() {
        let (_dir, path) = write_temp("gamm = 8\n");
        let overrides = Overrides { config: Some(path), ..Overrides::default() };
        match RunConfig::load(CommandKind::Deviation, &overrides) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("gamm"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn tier_caps_are_enforced() {
        let overrides = Overrides { length: Some(vec![9]), ..Overrides::default() };
        match RunConfig::load(CommandKind::Quench, &overrides) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("tier = full"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
        let overrides = Overrides {
            length: Some(vec![9]),
            tier: Some("full".into()),
            dt: Some(0.01),
            ..Overrides::default()
        };
        assert!(RunConfig::load(CommandKind::Quench, &overrides).is_ok());
    }

    #[test]
    fn quench_requires_single_cell() {
        let overrides = Overrides { gamma: Some(vec![1.0, 2.0]), ..Overrides::default() };
        assert!(matches!(
            RunConfig::load(CommandKind::Quench, &overrides),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn sweep_requires_two_distinct_lengths() {
        let overrides = Overrides { length: Some(vec![6, 6]), ..Overrides::default() };
        assert!(matches!(
            RunConfig::load(CommandKind::Sweep, &overrides),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn chaos_interval_must_align_with_steps() {
        let overrides = Overrides {
            dt_list: Some(vec![0.004]),
            sample_interval: Some(0.05),
            ..Overrides::default()
        };
        assert!(matches!(
            RunConfig::load(CommandKind::Chaos, &overrides),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn initial_state_forms_parse() {
        assert_eq!(InitialState::parse("plus_x").unwrap(), InitialState::PlusX);
        assert_eq!(InitialState::parse("basis:3").unwrap(), InitialState::Basis(3));
        assert!(InitialState::parse("ghz").is_err());
    }

    #[test]
    fn squiggle_defaults_pin_grid_and_step() {
        let cfg = RunConfig::defaults(CommandKind::Squiggle);
        assert_eq!(cfg.gamma_list, vec![2.2, 2.3, 2.4, 2.5, 2.6]);
        assert_eq!(cfg.dt, 0.004);
        assert_eq!(cfg.t_max, 60.0);
    }
}
