use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::model::{
    builtin_scenario, Domain, IntervalDistribution, PdpModel, Scenario, TransitionMatrix, VectorField,
};

use super::HarnessError;

const KEYS: [&str; 15] = [
    "scenario",
    "omega_a",
    "omega_b",
    "dx",
    "safety",
    "T",
    "snapshot_times",
    "restrict_lo",
    "restrict_hi",
    "mc_paths",
    "seed",
    "out_dir",
    "fields",
    "intervals",
    "q",
];

/// Raw `key = value` pairs of a configuration file.
///
/// Blank lines and lines starting with `#` are ignored. Unknown or repeated
/// keys are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

impl FromStr for ConfigFile {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(HarnessError::Config(format!("line {}: unknown key `{key}`", no + 1)));
            }
            if entries.insert(key.to_owned(), value.trim().to_owned()).is_some() {
                return Err(HarnessError::Config(format!("line {}: repeated key `{key}`", no + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| HarnessError::Config(format!("`{v}` is not a number"))))
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, HarnessError> {
    v.parse().map_err(|_| HarnessError::Config(format!("{key}: cannot parse `{v}`")))
}

/// `affine:GAMMA:W` is the field `A(x) = −γx + W`.
fn parse_field(s: &str) -> Result<VectorField, HarnessError> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    match parts.as_slice() {
        ["affine", g, w] => Ok(VectorField::affine(parse_num("fields", g)?, parse_num("fields", w)?)),
        _ => Err(HarnessError::Config(format!("fields: expected `affine:GAMMA:W`, got `{s}`"))),
    }
}

/// Rows separated by `;`, entries by whitespace or commas.
fn parse_matrix(s: &str) -> Result<TransitionMatrix, HarnessError> {
    let rows = s
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|v| !v.is_empty())
                .map(|v| parse_num::<f64>("q", v))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransitionMatrix::new(rows)?)
}

/// Settings of a run, study or cross-check.
#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub omega: Option<(f64, f64)>,
    pub dx: Vec<f64>,
    pub safety: f64,
    pub t_end: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub restrict: Option<(f64, f64)>,
    pub mc_paths: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// A user model replacing the scenario: one field and one interval
    /// distribution per state and an optional transition matrix.
    pub fields: Option<Vec<VectorField>>,
    pub intervals: Option<Vec<IntervalDistribution>>,
    pub q: Option<TransitionMatrix>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scenario: Scenario::McFaddenFilter,
            omega: None,
            dx: Vec::new(),
            safety: 0.9,
            t_end: None,
            snapshot_times: None,
            restrict: None,
            mc_paths: 200_000,
            seed: 2024,
            out_dir: PathBuf::from("out"),
            fields: None,
            intervals: None,
            q: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Config::from_file(&text.parse()?)
    }

    pub fn from_file(file: &ConfigFile) -> Result<Self, HarnessError> {
        let mut c = Config::default();
        let get = |k: &str| file.entries.get(k).map(String::as_str);
        if let Some(v) = get("scenario") {
            c.scenario = v.parse()?;
        }
        match (get("omega_a"), get("omega_b")) {
            (Some(a), Some(b)) => c.omega = Some((parse_num("omega_a", a)?, parse_num("omega_b", b)?)),
            (None, None) => {}
            _ => return Err(HarnessError::Config("omega_a and omega_b must be given together".into())),
        }
        if let Some(v) = get("dx") {
            c.dx = parse_list(v)?;
        }
        if let Some(v) = get("safety") {
            c.safety = parse_num("safety", v)?;
        }
        if let Some(v) = get("T") {
            c.t_end = Some(parse_num("T", v)?);
        }
        if let Some(v) = get("snapshot_times") {
            c.snapshot_times = Some(parse_list(v)?);
        }
        match (get("restrict_lo"), get("restrict_hi")) {
            (Some(a), Some(b)) => c.restrict = Some((parse_num("restrict_lo", a)?, parse_num("restrict_hi", b)?)),
            (None, None) => {}
            _ => return Err(HarnessError::Config("restrict_lo and restrict_hi must be given together".into())),
        }
        if let Some(v) = get("mc_paths") {
            c.mc_paths = parse_num("mc_paths", v)?;
        }
        if let Some(v) = get("seed") {
            c.seed = parse_num("seed", v)?;
        }
        if let Some(v) = get("out_dir") {
            c.out_dir = PathBuf::from(v);
        }
        if let Some(v) = get("fields") {
            c.fields = Some(v.split(',').map(parse_field).collect::<Result<_, _>>()?);
        }
        if let Some(v) = get("intervals") {
            c.intervals = Some(v.split(',').map(|d| d.trim().parse()).collect::<Result<_, _>>()?);
        }
        if let Some(v) = get("q") {
            c.q = Some(parse_matrix(v)?);
        }
        if c.fields.is_some() != c.intervals.is_some() {
            return Err(HarnessError::Config("fields and intervals must be given together".into()));
        }
        Ok(c)
    }

    pub fn is_custom(&self) -> bool {
        self.fields.is_some()
    }

    pub fn horizon(&self) -> f64 {
        self.t_end.unwrap_or_else(|| self.scenario.default_horizon())
    }

    /// Builds the configured model with the configured horizon.
    pub fn model(&self) -> Result<PdpModel, HarnessError> {
        let t_end = self.horizon();
        match (&self.fields, &self.intervals) {
            (Some(fields), Some(intervals)) => {
                if fields.len() != intervals.len() {
                    return Err(HarnessError::Config(format!(
                        "{} fields but {} interval distributions",
                        fields.len(),
                        intervals.len()
                    )));
                }
                let (a, b) = self.omega.ok_or_else(|| HarnessError::Config("a custom model needs omega_a and omega_b".into()))?;
                let q = match &self.q {
                    Some(q) => q.clone(),
                    None if fields.len() == 1 => TransitionMatrix::identity(1),
                    None => TransitionMatrix::uniform_off_diagonal(fields.len())?,
                };
                let parts = fields.iter().cloned().zip(intervals.iter().cloned()).collect();
                Ok(PdpModel::from_parts(parts, q, Domain::new(a, b, t_end)?)?)
            }
            _ => {
                let mut m = builtin_scenario(self.scenario).with_horizon(t_end)?;
                if let Some((a, b)) = self.omega {
                    let parts = m.states.iter().map(|s| (s.field.clone(), s.interval_pdf.clone())).collect();
                    m = PdpModel::from_parts(parts, m.q.clone(), Domain::new(a, b, t_end)?)?;
                }
                if let Some(q) = &self.q {
                    let parts = m.states.iter().map(|s| (s.field.clone(), s.interval_pdf.clone())).collect();
                    m = PdpModel::from_parts(parts, q.clone(), m.domain)?;
                }
                Ok(m)
            }
        }
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshot_times.clone().unwrap_or_else(|| super::default_snapshot_times(self.horizon()))
    }
}
