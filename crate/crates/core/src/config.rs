//! Run configuration: TOML with nested tables and include files.
//!
//! Resolution order, later entries winning: the embedded defaults
//! ([`DEFAULTS`]), each file named in `include` (recursively, in order),
//! then the file itself. Tables merge key by key; arrays and scalars are
//! replaced. A scenario table may carry `base = "UMa"` to start from a
//! default scenario under a new name.
//!
//! Every problem is reported as a [`Diagnostic`] anchored to the file and
//! line that set the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::antenna::{ArrayGeometry, ElementPattern, Orientation, Polarization, PolarizationModel};
use crate::fastfading::{ClusterOptions, Condition, ElevationModel, LspModel, LspTable};
use crate::geometry::{
    DropParams, Scenario, ScenarioKind, MAX_BANDWIDTH_HZ, MAX_CARRIER_HZ, MIN_CARRIER_HZ,
};
use crate::largescale::{LosCurveSet, PathlossParams};
use crate::statistics::{Binning, MeanZodEstimator};

pub const DEFAULTS: &str = include_str!("../params/defaults.toml");
pub const DEFAULTS_NAME: &str = "<defaults>";
const MAX_RINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Records,
    Cir,
    Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirConfig {
    pub samples: usize,
    pub interval_s: f64,
}

impl CirConfig {
    pub fn times(&self) -> Vec<f64> {
        (0..self.samples)
            .map(|i| i as f64 * self.interval_s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scenarios: Vec<String>,
    pub drops: u32,
    pub ues_per_sector: u32,
    pub rings: u32,
    pub wraparound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub emit: Vec<Emit>,
    pub polarized: bool,
    pub cir: CirConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    pub binning: Binning,
    pub mean_zod: MeanZodEstimator,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self {
            binning: Binning::FreedmanDiaconis,
            mean_zod: MeanZodEstimator::Centre,
        }
    }
}

/// Planar array; spacings in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub dv: f64,
    pub dh: f64,
    pub slants: Vec<f64>,
    pub polarization: PolarizationModel,
    pub downtilt_deg: f64,
    pub pattern: ElementPattern,
}

impl ArrayConfig {
    pub fn build(&self, wavelength: f64) -> crate::Result<ArrayGeometry> {
        let pols = self
            .slants
            .iter()
            .map(|s| Polarization::new(self.polarization, *s))
            .collect::<crate::Result<Vec<_>>>()?;
        ArrayGeometry::planar(
            self.rows,
            self.cols,
            self.dv,
            self.dh,
            wavelength,
            self.pattern,
            pols,
        )
    }

    /// Orientation in a frame whose x axis is the sector bearing.
    pub fn orientation(&self) -> Orientation {
        Orientation::new(0.0, self.downtilt_deg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaConfig {
    pub bs: ArrayConfig,
    pub ue: ArrayConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LspTables {
    pub los: LspTable,
    pub nlos: LspTable,
    pub o2i: LspTable,
}

impl LspTables {
    pub fn get(&self, condition: Condition) -> &LspTable {
        match condition {
            Condition::Los => &self.los,
            Condition::Nlos => &self.nlos,
            Condition::O2i => &self.o2i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub isd: f64,
    pub enb_height: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub drop: DropParams,
    pub los_probability: LosCurveSet,
    pub pathloss: PathlossParams,
    pub elevation: ElevationModel,
    pub lsp: LspTables,
    pub clusters: ClusterOptions,
    pub antenna: AntennaConfig,
}

impl ScenarioConfig {
    pub fn scenario(&self) -> crate::Result<Scenario> {
        Scenario::new(
            self.kind,
            self.isd,
            self.enb_height,
            self.carrier_hz,
            self.bandwidth_hz,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub run: RunSection,
    pub statistics: StatisticsConfig,
    pub scenarios: BTreeMap<String, ScenarioConfig>,
}

impl RunConfig {
    /// Fully resolved configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 over everything but the seed, hex encoded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("seed");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.run.emit.contains(&e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: String,
    /// 1-based
    pub line: Option<usize>,
    pub column: Option<usize>,
    /// Dotted key path, when known.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        if let Some(k) = &self.key {
            write!(f, ": {k}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

struct Source {
    name: String,
    text: String,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn parse_table(src: &Source) -> Result<toml::Table, Diagnostic> {
    src.text.parse::<toml::Table>().map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| position(&src.text, s.start))
            .map_or((None, None), |(l, c)| (Some(l), Some(c)));
        Diagnostic {
            file: src.name.clone(),
            line,
            column,
            key: None,
            message: e.message().trim().to_string(),
        }
    })
}

/// Byte offset of the key at `path` in `text`, if the file sets it.
fn key_offset(text: &str, path: &[String]) -> Option<usize> {
    let doc = toml::de::DeTable::parse(text).ok()?;
    let mut table = doc.get_ref();
    let mut offset = None;
    for (i, seg) in path.iter().enumerate() {
        let (k, v) = table
            .iter()
            .find(|(k, _)| k.get_ref().as_ref() == seg.as_str())?;
        offset = Some(k.span().start);
        if i + 1 < path.len() {
            table = v.get_ref().as_table()?;
        }
    }
    offset
}

fn split_path(path: &str) -> Vec<String> {
    path.split('.')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn anchor(sources: &[Source], key: &str, message: String) -> Diagnostic {
    let segments = split_path(key);
    for len in (1..=segments.len()).rev() {
        for src in sources.iter().rev() {
            if let Some(off) = key_offset(&src.text, &segments[..len]) {
                let (line, column) = position(&src.text, off);
                return Diagnostic {
                    file: src.name.clone(),
                    line: Some(line),
                    column: Some(column),
                    key: Some(key.to_string()),
                    message,
                };
            }
        }
    }
    let main = sources.last().expect("at least the defaults");
    Diagnostic {
        file: main.name.clone(),
        line: None,
        column: None,
        key: (!key.is_empty()).then(|| key.to_string()),
        message,
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn single(file: &str, message: impl Into<String>) -> Diagnostics {
    Diagnostics(vec![Diagnostic {
        file: file.to_string(),
        line: None,
        column: None,
        key: None,
        message: message.into(),
    }])
}

/// Loads `path` and its includes in merge order (includes first).
fn load_sources(
    path: &Path,
    stack: &mut Vec<PathBuf>,
    out: &mut Vec<(Source, toml::Table)>,
) -> Result<(), Diagnostics> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| single(&name, format!("cannot read configuration: {e}")))?;
    let canonical = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    if stack.contains(&canonical) {
        return Err(single(&name, "include cycle"));
    }
    let src = Source { name, text };
    let mut table = parse_table(&src).map_err(|d| Diagnostics(vec![d]))?;
    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(toml::Value::String(s)) => vec![s],
        Some(toml::Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                _ => Err(()),
            })
            .collect::<Result<_, _>>()
            .map_err(|_| {
                Diagnostics(vec![anchor(
                    std::slice::from_ref(&src),
                    "include",
                    "include entries must be strings".into(),
                )])
            })?,
        Some(_) => {
            return Err(Diagnostics(vec![anchor(
                std::slice::from_ref(&src),
                "include",
                "include must be a string or an array of strings".into(),
            )]))
        }
    };
    stack.push(canonical);
    let dir = path.parent().unwrap_or(Path::new("."));
    for inc in includes {
        load_sources(&dir.join(inc), stack, out)?;
    }
    stack.pop();
    out.push((src, table));
    Ok(())
}

/// Reads, merges and validates a configuration file. `seed` overrides the
/// file's seed.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, Diagnostics> {
    let mut files = Vec::new();
    load_sources(path, &mut Vec::new(), &mut files)?;
    resolve(files, seed)
}

/// As [`load_config`] for in-memory text; includes are not allowed.
pub fn parse_config(text: &str, seed: Option<u64>) -> Result<RunConfig, Diagnostics> {
    let src = Source {
        name: "<input>".into(),
        text: text.to_string(),
    };
    let table = parse_table(&src).map_err(|d| Diagnostics(vec![d]))?;
    if table.contains_key("include") {
        return Err(Diagnostics(vec![anchor(
            std::slice::from_ref(&src),
            "include",
            "include needs a configuration file path".into(),
        )]));
    }
    resolve(vec![(src, table)], seed)
}

/// Defaults with the given seed, for library use.
pub fn default_config(seed: u64) -> RunConfig {
    parse_config("", Some(seed)).expect("embedded defaults are valid")
}

fn resolve(files: Vec<(Source, toml::Table)>, seed: Option<u64>) -> Result<RunConfig, Diagnostics> {
    let defaults_src = Source {
        name: DEFAULTS_NAME.into(),
        text: DEFAULTS.into(),
    };
    let defaults = parse_table(&defaults_src).map_err(|d| Diagnostics(vec![d]))?;
    let mut merged = defaults.clone();
    let mut sources = vec![defaults_src];
    for (src, table) in files {
        merge(&mut merged, table);
        sources.push(src);
    }
    expand_bases(&mut merged, &defaults)
        .map_err(|(k, m)| Diagnostics(vec![anchor(&sources, &k, m)]))?;
    if let Some(s) = seed {
        let s = i64::try_from(s).map_err(|_| {
            single(
                &sources.last().unwrap().name,
                format!("seed {s} exceeds the TOML integer range"),
            )
        })?;
        merged.insert("seed".into(), toml::Value::Integer(s));
    }

    let config: RunConfig =
        serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
            let mut key = e.path().to_string();
            let message = e.inner().message().trim().to_string();
            if let Some(field) = message
                .strip_prefix("unknown field `")
                .and_then(|r| r.split('`').next())
            {
                if !key.ends_with(field) {
                    key = if key == "." {
                        field.to_string()
                    } else {
                        format!("{key}.{field}")
                    };
                }
            }
            if key == "." {
                key.clear();
            }
            Diagnostics(vec![anchor(&sources, &key, message)])
        })?;

    let problems = validate(&config);
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(Diagnostics(
            problems
                .into_iter()
                .map(|(k, m)| anchor(&sources, &k, m))
                .collect(),
        ))
    }
}

fn expand_bases(merged: &mut toml::Table, defaults: &toml::Table) -> Result<(), (String, String)> {
    let Some(toml::Value::Table(scenarios)) = merged.get_mut("scenarios") else {
        return Ok(());
    };
    let default_scenarios = match defaults.get("scenarios") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => toml::Table::new(),
    };
    for (name, value) in scenarios.iter_mut() {
        let toml::Value::Table(t) = value else {
            continue;
        };
        let Some(base) = t.remove("base") else {
            continue;
        };
        let key = format!("scenarios.{name}.base");
        let base = base
            .as_str()
            .ok_or_else(|| (key.clone(), "base must name a default scenario".to_string()))?;
        let Some(toml::Value::Table(b)) = default_scenarios.get(base) else {
            return Err((key, format!("unknown base scenario {base:?}")));
        };
        let mut out = b.clone();
        merge(&mut out, std::mem::take(t));
        *t = out;
    }
    Ok(())
}

/// Semantic and applicability checks as `(key path, message)` pairs.
pub fn validate(config: &RunConfig) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let run = &config.run;
    if run.scenarios.is_empty() {
        out.push((
            "run.scenarios".into(),
            "at least one scenario must be selected".into(),
        ));
    }
    for (i, name) in run.scenarios.iter().enumerate() {
        if !config.scenarios.contains_key(name) {
            out.push(("run.scenarios".into(), format!("unknown scenario {name:?}")));
        }
        if run.scenarios[..i].contains(name) {
            out.push((
                "run.scenarios".into(),
                format!("scenario {name:?} selected twice"),
            ));
        }
    }
    if run.drops == 0 {
        out.push(("run.drops".into(), "at least one drop is required".into()));
    }
    if run.ues_per_sector == 0 {
        out.push((
            "run.ues_per_sector".into(),
            "at least one UE per sector is required".into(),
        ));
    }
    if run.rings > MAX_RINGS {
        out.push((
            "run.rings".into(),
            format!("at most {MAX_RINGS} rings are supported"),
        ));
    }
    if run.cir.samples == 0 {
        out.push((
            "run.cir.samples".into(),
            "at least one time sample is required".into(),
        ));
    }
    if !(run.cir.interval_s > 0.0 && run.cir.interval_s.is_finite()) {
        out.push((
            "run.cir.interval_s".into(),
            "sample interval must be positive".into(),
        ));
    }
    if let Binning::Fixed(0) = config.statistics.binning {
        out.push((
            "statistics.binning".into(),
            "fixed binning needs at least one bin".into(),
        ));
    }
    for (name, s) in &config.scenarios {
        let p = |k: &str| format!("scenarios.{name}.{k}");
        if !(MIN_CARRIER_HZ..=MAX_CARRIER_HZ).contains(&s.carrier_hz) {
            out.push((
                p("carrier_hz"),
                format!(
                    "carrier {} GHz outside the supported {}-{} GHz range",
                    s.carrier_hz / 1e9,
                    MIN_CARRIER_HZ / 1e9,
                    MAX_CARRIER_HZ / 1e9
                ),
            ));
        } else if !(s.bandwidth_hz > 0.0 && s.bandwidth_hz <= MAX_BANDWIDTH_HZ) {
            out.push((
                p("bandwidth_hz"),
                format!(
                    "bandwidth {} MHz outside (0, {}] MHz",
                    s.bandwidth_hz / 1e6,
                    MAX_BANDWIDTH_HZ / 1e6
                ),
            ));
        } else if let Err(e) = s.scenario() {
            out.push((format!("scenarios.{name}"), e.to_string()));
        }
        let checks: [(&str, crate::Result<()>); 4] = [
            ("drop", s.drop.validate()),
            ("los_probability", s.los_probability.validate(s.kind)),
            ("pathloss", s.pathloss.validate()),
            ("elevation", s.elevation.validate(s.kind)),
        ];
        for (k, r) in checks {
            if let Err(e) = r {
                out.push((p(k), e.to_string()));
            }
        }
        for (k, table) in [
            ("los", &s.lsp.los),
            ("nlos", &s.lsp.nlos),
            ("o2i", &s.lsp.o2i),
        ] {
            if let Err(e) = LspModel::new(table.clone()) {
                out.push((p(&format!("lsp.{k}")), e.to_string()));
            }
            if (k == "los") != table.k.is_some() {
                let msg = if k == "los" {
                    "the LOS table needs a K factor"
                } else {
                    "only the LOS table carries a K factor"
                };
                out.push((p(&format!("lsp.{k}")), msg.into()));
            }
        }
        let c = &s.clusters;
        if !(c.subcluster_spacing >= 0.0 && c.subcluster_spacing.is_finite()) {
            out.push((
                p("clusters.subcluster_spacing"),
                "spacing must be non-negative".into(),
            ));
        }
        if !(c.weak_cluster_db <= 0.0) {
            out.push((
                p("clusters.weak_cluster_db"),
                "threshold must be at most 0 dB".into(),
            ));
        }
        let wavelength = crate::SPEED_OF_LIGHT / s.carrier_hz;
        for (k, a) in [("bs", &s.antenna.bs), ("ue", &s.antenna.ue)] {
            if let Err(e) = a.build(wavelength) {
                out.push((p(&format!("antenna.{k}")), e.to_string()));
            }
            if !(-90.0..=90.0).contains(&a.downtilt_deg) {
                out.push((
                    p(&format!("antenna.{k}.downtilt_deg")),
                    "downtilt must lie in [-90, 90]".into(),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_resolve() {
        let c = default_config(7);
        assert_eq!(c.seed, 7);
        assert_eq!(c.scenarios.len(), 2);
        assert!(c.scenarios["UMa"].lsp.los.k.is_some());
        assert_eq!(c.scenarios["UMa"].pathloss, PathlossParams::uma());
        assert_eq!(c.scenarios["UMi"].pathloss, PathlossParams::umi());
        assert_eq!(c.scenarios["UMa"].los_probability, LosCurveSet::uma());
        assert_eq!(c.scenarios["UMi"].elevation, ElevationModel::umi());
        assert_eq!(c.scenarios["UMa"].drop, DropParams::uma());
        assert_eq!(c.scenarios["UMi"].drop, DropParams::umi());
    }

    #[test]
    fn minimal_config_echoes_defaults() {
        let c = parse_config("seed = 1\n", None).unwrap();
        let echo = c.echo();
        assert!(echo.contains("[scenarios.UMa.lsp.los]"));
        assert!(echo.contains("wraparound = true"));
        let back: RunConfig = toml::from_str(&echo).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_seed() {
        let d = parse_config("[run]\ndrops = 2\n", None).unwrap_err();
        assert!(d.0[0].message.contains("seed"), "{d}");
        assert!(parse_config("", Some(3)).is_ok());
    }

    #[test]
    fn carrier_out_of_range_is_anchored() {
        let text = "seed = 1\n\n[scenarios.UMa]\ncarrier_hz = 28e9\n";
        let d = parse_config(text, None).unwrap_err();
        assert_eq!(d.0.len(), 1);
        assert_eq!(d.0[0].line, Some(4));
        assert!(d.0[0].message.contains("2-6 GHz"), "{d}");
    }

    #[test]
    fn unknown_field_is_anchored() {
        let text = "seed = 1\n[scenarios.UMi.pathloss]\nwall_los_db = 3\n";
        let d = parse_config(text, None).unwrap_err();
        assert_eq!(d.0[0].line, Some(3), "{d}");
        assert!(d.0[0].message.contains("wall_los_db"));
    }

    #[test]
    fn type_error_is_anchored() {
        let d = parse_config("seed = 1\n[run]\n\ndrops = \"two\"\n", None).unwrap_err();
        assert_eq!(d.0[0].line, Some(4), "{d}");
        assert_eq!(d.0[0].key.as_deref(), Some("run.drops"));
    }

    #[test]
    fn parse_error_has_position() {
        let d = parse_config("seed = 1\n[run\n", None).unwrap_err();
        assert_eq!(d.0[0].line, Some(2), "{d}");
    }

    #[test]
    fn non_pd_correlations_rejected() {
        let text = "seed = 1\n[scenarios.UMa.lsp.nlos.correlations]\nasd_ds = 0.99\nasa_ds = 0.99\nasd_asa = -0.99\n";
        let d = parse_config(text, None).unwrap_err();
        assert_eq!(d.0[0].key.as_deref(), Some("scenarios.UMa.lsp.nlos"));
        assert_eq!(d.0[0].line, Some(2));
    }

    #[test]
    fn base_scenario_and_selection() {
        let text = "seed = 1\n[run]\nscenarios = [\"UMa35\"]\n[scenarios.UMa35]\nbase = \"UMa\"\ncarrier_hz = 3.5e9\n";
        let c = parse_config(text, None).unwrap();
        assert_eq!(c.scenarios["UMa35"].kind, ScenarioKind::UMa);
        assert_eq!(c.scenarios["UMa35"].carrier_hz, 3.5e9);
        let d = parse_config("seed = 1\n[run]\nscenarios = [\"X\"]\n", None).unwrap_err();
        assert_eq!(d.0[0].line, Some(3));
    }

    #[test]
    fn includes_merge_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let tables = dir.path().join("tables.toml");
        std::fs::File::create(&tables)
            .unwrap()
            .write_all(b"[scenarios.UMa.pathloss]\nwall_loss_db = 15.0\nindoor_loss_db_per_m = -1.0\n[run]\ndrops = 4\n")
            .unwrap();
        let main = dir.path().join("main.toml");
        std::fs::File::create(&main)
            .unwrap()
            .write_all(b"include = [\"tables.toml\"]\nseed = 9\n[run]\ndrops = 2\n")
            .unwrap();
        let d = load_config(&main, None).unwrap_err();
        assert!(d.0[0].file.ends_with("tables.toml"), "{d}");
        assert_eq!(d.0[0].line, Some(1));

        std::fs::write(
            &tables,
            "[scenarios.UMa.pathloss]\nwall_loss_db = 15.0\n[run]\ndrops = 4\n",
        )
        .unwrap();
        let c = load_config(&main, Some(11)).unwrap();
        assert_eq!(c.scenarios["UMa"].pathloss.wall_loss_db, 15.0);
        assert_eq!(c.run.drops, 2);
        assert_eq!(c.seed, 11);

        std::fs::write(&tables, "include = \"main.toml\"\n").unwrap();
        assert!(load_config(&main, None).is_err());
    }

    #[test]
    fn hash_ignores_seed() {
        let a = default_config(1);
        let b = default_config(2);
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.run.drops = 3;
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
