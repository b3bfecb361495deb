//! Run configuration: JSON ingestion, defaults and validation.
//!
//! Precedence is command-line flag, then config file, then built-in default.
//! Flags are merged into the JSON tree before validation, so every error
//! carries the same field path regardless of where the value came from.

use std::path::PathBuf;

use entanglement_core::analysis::{DEFAULT_THRESHOLD, SCENARIOS};
use entanglement_core::dynamics::DEFAULT_DT;
use entanglement_core::{initial_state, InitialState, Scenario, XState};
use serde_json::{Map, Value};

pub const DEFAULT_TRAJECTORY_T_MAX: f64 = 30.0;
pub const DEFAULT_SWEEP_T_MAX: f64 = entanglement_core::analysis::DEFAULT_SURVIVAL_T_MAX;
pub const DEFAULT_PRECISION: usize = 12;
pub const DEFAULT_OUT: &str = "out";

/// A rejected configuration field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Trajectory,
    Sweep,
    Coefficients,
    OracleCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Trajectory => "trajectory",
            Mode::Sweep => "sweep",
            Mode::Coefficients => "coefficients",
            Mode::OracleCheck => "oracle-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Mode::Trajectory,
            Mode::Sweep,
            Mode::Coefficients,
            Mode::OracleCheck,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Points from `start` to `stop` inclusive.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// One geometry coordinate: a single value or a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Value(f64),
    Grid(GridSpec),
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Axis::Value(v) => vec![*v],
            Axis::Grid(g) => g.points(),
        }
    }

    pub fn single(&self) -> Option<f64> {
        match self {
            Axis::Value(v) => Some(*v),
            Axis::Grid(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub omega_y: Axis,
    pub omega_l: Axis,
    pub initial_state: InitialState,
    pub t_max: f64,
    pub dt: f64,
    pub scenarios: Vec<Scenario>,
    pub out: PathBuf,
    pub threshold: f64,
    pub precision: usize,
}

impl RunConfig {
    pub fn initial_xstate(&self) -> XState {
        initial_state(self.initial_state).expect("validated during parsing")
    }
}

/// Values given on the command line; `None` leaves the file value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<String>,
    pub omega_y: Option<f64>,
    pub omega_l: Option<f64>,
    pub initial_state: Option<String>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub oracle: bool,
}

pub fn parse_config(source: &str) -> Result<RunConfig> {
    parse_with_overrides(source, &Overrides::default())
}

/// Parse `source` (empty means `{}`) and apply command-line overrides.
pub fn parse_with_overrides(source: &str, overrides: &Overrides) -> Result<RunConfig> {
    let tree: Value = if source.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(source).map_err(|e| ConfigError::new("<root>", e.to_string()))?
    };
    let Value::Object(mut root) = tree else {
        return Err(ConfigError::new("<root>", "expected a JSON object"));
    };
    hoist_geometry(&mut root)?;
    apply_overrides(&mut root, overrides)?;
    from_tree(&root)
}

/// Accept `omega_y` / `omega_L` at the top level as shorthand for `geometry.*`.
fn hoist_geometry(root: &mut Map<String, Value>) -> Result<()> {
    for key in ["omega_y", "omega_L"] {
        if let Some(v) = root.remove(key) {
            let geometry = geometry_mut(root)?;
            if geometry.contains_key(key) {
                return Err(ConfigError::new(
                    format!("geometry.{key}"),
                    "given both at the top level and under geometry",
                ));
            }
            geometry.insert(key.to_owned(), v);
        }
    }
    Ok(())
}

fn geometry_mut(root: &mut Map<String, Value>) -> Result<&mut Map<String, Value>> {
    root.entry("geometry")
        .or_insert_with(|| Value::Object(Map::new()))
        .as_object_mut()
        .ok_or_else(|| ConfigError::new("geometry", "expected an object"))
}

fn number(v: f64, path: &str) -> Result<Value> {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .ok_or_else(|| ConfigError::new(path, format!("not a finite number: {v}")))
}

fn apply_overrides(root: &mut Map<String, Value>, o: &Overrides) -> Result<()> {
    if o.oracle {
        if let Some(m) = &o.mode {
            if m != Mode::OracleCheck.name() {
                return Err(ConfigError::new(
                    "mode",
                    format!("--oracle conflicts with --mode {m}"),
                ));
            }
        }
        root.insert(
            "mode".into(),
            Value::String(Mode::OracleCheck.name().into()),
        );
    } else if let Some(m) = &o.mode {
        root.insert("mode".into(), Value::String(m.clone()));
    }
    if let Some(v) = o.omega_y {
        let n = number(v, "geometry.omega_y")?;
        geometry_mut(root)?.insert("omega_y".into(), n);
    }
    if let Some(v) = o.omega_l {
        let n = number(v, "geometry.omega_L")?;
        geometry_mut(root)?.insert("omega_L".into(), n);
    }
    if let Some(s) = &o.initial_state {
        root.insert("initial_state".into(), Value::String(s.clone()));
    }
    if let Some(v) = o.t_max {
        root.insert("t_max".into(), number(v, "t_max")?);
    }
    if let Some(v) = o.dt {
        root.insert("dt".into(), number(v, "dt")?);
    }
    if let Some(p) = &o.out {
        root.insert(
            "out".into(),
            Value::String(p.to_string_lossy().into_owned()),
        );
    }
    Ok(())
}

const ROOT_KEYS: [&str; 9] = [
    "mode",
    "geometry",
    "initial_state",
    "t_max",
    "dt",
    "scenarios",
    "out",
    "threshold",
    "precision",
];

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::new(join(prefix, k), "unknown field")),
        None => Ok(()),
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_owned()
    } else {
        format!("{prefix}.{key}")
    }
}

fn positive(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| ConfigError::new(path, "expected a number"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::new(path, format!("must be positive, got {x}")))
    }
}

fn optional_positive(map: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    map.get(key).map_or(Ok(default), |v| positive(v, key))
}

fn from_tree(root: &Map<String, Value>) -> Result<RunConfig> {
    reject_unknown(root, &ROOT_KEYS, "")?;

    let mode = match root.get("mode") {
        None => return Err(ConfigError::new("mode", "required")),
        Some(Value::String(s)) => Mode::from_name(s).ok_or_else(|| {
            ConfigError::new(
                "mode",
                format!(
                    "unknown mode {s:?}; expected trajectory, sweep, coefficients or oracle-check"
                ),
            )
        })?,
        Some(_) => return Err(ConfigError::new("mode", "expected a string")),
    };

    let geometry = match root.get("geometry") {
        Some(Value::Object(g)) => g,
        Some(_) => return Err(ConfigError::new("geometry", "expected an object")),
        None => return Err(ConfigError::new("geometry.omega_y", "required")),
    };
    reject_unknown(geometry, &["omega_y", "omega_L"], "geometry")?;
    let omega_y = axis(geometry.get("omega_y"), "geometry.omega_y")?;
    let omega_l = axis(geometry.get("omega_L"), "geometry.omega_L")?;
    if mode != Mode::Sweep {
        for (a, path) in [
            (&omega_y, "geometry.omega_y"),
            (&omega_l, "geometry.omega_L"),
        ] {
            if a.single().is_none() {
                return Err(ConfigError::new(
                    path,
                    format!("mode {} takes a single value, not a grid", mode.name()),
                ));
            }
        }
    }

    let initial_state = match root.get("initial_state") {
        Some(v) => parse_state(v)?,
        None if mode == Mode::Coefficients => InitialState::Product10,
        None => return Err(ConfigError::new("initial_state", "required")),
    };

    let default_t_max = if mode == Mode::Sweep {
        DEFAULT_SWEEP_T_MAX
    } else {
        DEFAULT_TRAJECTORY_T_MAX
    };
    let t_max = optional_positive(root, "t_max", default_t_max)?;
    let dt = optional_positive(root, "dt", DEFAULT_DT)?;
    if dt > t_max {
        return Err(ConfigError::new(
            "dt",
            format!("step {dt} exceeds t_max {t_max}"),
        ));
    }
    let threshold = optional_positive(root, "threshold", DEFAULT_THRESHOLD)?;

    let scenarios = match root.get("scenarios") {
        None => SCENARIOS.to_vec(),
        Some(Value::Array(items)) => parse_scenarios(items)?,
        Some(_) => return Err(ConfigError::new("scenarios", "expected an array of names")),
    };

    let out = match root.get("out") {
        None => PathBuf::from(DEFAULT_OUT),
        Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
        Some(_) => return Err(ConfigError::new("out", "expected a non-empty path string")),
    };

    let precision = match root.get("precision") {
        None => DEFAULT_PRECISION,
        Some(v) => match v.as_u64() {
            Some(p @ 1..=17) => p as usize,
            _ => {
                return Err(ConfigError::new(
                    "precision",
                    "expected an integer in 1..=17",
                ))
            }
        },
    };

    Ok(RunConfig {
        mode,
        omega_y,
        omega_l,
        initial_state,
        t_max,
        dt,
        scenarios,
        out,
        threshold,
        precision,
    })
}

fn axis(v: Option<&Value>, path: &str) -> Result<Axis> {
    match v {
        None => Err(ConfigError::new(path, "required")),
        Some(Value::Object(g)) => grid(g, path).map(Axis::Grid),
        Some(v) => positive(v, path).map(Axis::Value),
    }
}

fn grid(g: &Map<String, Value>, path: &str) -> Result<GridSpec> {
    reject_unknown(g, &["start", "stop", "count", "spacing"], path)?;
    let field = |k: &str| {
        g.get(k)
            .ok_or_else(|| ConfigError::new(join(path, k), "required"))
    };
    let start = positive(field("start")?, &join(path, "start"))?;
    let stop = positive(field("stop")?, &join(path, "stop"))?;
    let count = match field("count")?.as_u64() {
        Some(n) if n >= 1 => n as usize,
        _ => {
            return Err(ConfigError::new(
                join(path, "count"),
                "expected an integer ≥ 1",
            ))
        }
    };
    let spacing = match g.get("spacing") {
        None => Spacing::Linear,
        Some(Value::String(s)) if s == "linear" => Spacing::Linear,
        Some(Value::String(s)) if s == "log" => Spacing::Log,
        Some(_) => {
            return Err(ConfigError::new(
                join(path, "spacing"),
                "expected \"linear\" or \"log\"",
            ))
        }
    };
    Ok(GridSpec {
        start,
        stop,
        count,
        spacing,
    })
}

const STATE_KEYS: [&str; 8] = [
    "p_gg",
    "p_ee",
    "p_aa",
    "p_ss",
    "re_rho_as",
    "im_rho_as",
    "re_rho_ge",
    "im_rho_ge",
];

fn parse_state(v: &Value) -> Result<InitialState> {
    match v {
        Value::String(name) => InitialState::from_name(name).ok_or_else(|| {
            ConfigError::new(
                "initial_state",
                format!(
                    "unknown state {name:?}; expected product10, antisymmetric, symmetric, \
                     excited, ground or an object with X-state entries"
                ),
            )
        }),
        Value::Object(m) => {
            reject_unknown(m, &STATE_KEYS, "initial_state")?;
            let mut a = [0.0; 8];
            for (slot, key) in a.iter_mut().zip(STATE_KEYS) {
                if let Some(x) = m.get(key) {
                    *slot = x.as_f64().ok_or_else(|| {
                        ConfigError::new(join("initial_state", key), "expected a number")
                    })?;
                }
            }
            let state = InitialState::CustomX(XState::from_array(a));
            initial_state(state).map_err(|e| ConfigError::new("initial_state", e.to_string()))?;
            Ok(state)
        }
        _ => Err(ConfigError::new(
            "initial_state",
            "expected a name or an object",
        )),
    }
}

fn parse_scenarios(items: &[Value]) -> Result<Vec<Scenario>> {
    if items.is_empty() {
        return Err(ConfigError::new(
            "scenarios",
            "must list at least one scenario",
        ));
    }
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("scenarios[{i}]");
        let s = item.as_str().and_then(Scenario::from_name).ok_or_else(|| {
            ConfigError::new(
                &path,
                "expected one of full, none, atom_atom_only, atom_plate_only",
            )
        })?;
        if out.contains(&s) {
            return Err(ConfigError::new(path, format!("duplicate scenario {s}")));
        }
        out.push(s);
    }
    Ok(out)
}
