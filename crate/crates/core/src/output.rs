//! File formats: links.csv, lsps.csv, stats.json, distributions.csv, the
//! binary CIR dump and the run manifest.
//!
//! Floats are written with 9 significant digits (`{:.8e}`); empty cells
//! mean "not applicable". Column sets are versioned through
//! [`LINKS_VERSION`] and friends, which the manifest records.
//!
//! CIR dump layout, all little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `GSCMCIR1` | 8 bytes |
//! | drop, site, sector, ue | u32 × 4 |
//! | N paths, M rays per cluster, n_rx, n_tx, n_samples | u32 × 5 |
//! | wavelength (m) | f64 |
//! | path delays (s) | f64 × N |
//! | sample times (s) | f64 × n_samples |
//! | coefficients | (re f64, im f64) × n_rx·n_tx·N·n_samples, (u, s, n, t) row-major |

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::fastfading::ChannelTensor;
use crate::largescale::PathlossBreakdown;
use crate::statistics::{ecdf, Binning, EmpiricalDistribution, LinkRecord};
use crate::{Error, Result};

pub const LINKS_VERSION: &str = "links/1";
pub const LSPS_VERSION: &str = "lsps/1";
pub const DISTRIBUTIONS_VERSION: &str = "distributions/1";
pub const STATS_VERSION: &str = "stats/1";
pub const CIR_VERSION: &str = "cir/1";
pub const CIR_MAGIC: &[u8; 8] = b"GSCMCIR1";

pub const LINKS_COLUMNS: [&str; 28] = [
    "scenario",
    "drop",
    "site",
    "sector",
    "ue",
    "d_2d",
    "d_3d",
    "h_ue",
    "indoor",
    "los_state",
    "pl_outdoor_db",
    "pl_wall_db",
    "pl_indoor_db",
    "height_gain_db",
    "pathloss_db",
    "sf_db",
    "tx_gain_db",
    "rx_gain_db",
    "coupling_loss_db",
    "serving",
    "ds",
    "asd",
    "asa",
    "lsp_zsd",
    "zsa",
    "k_db",
    "zsd",
    "mean_zod",
];

pub const LSPS_COLUMNS: [&str; 14] = [
    "scenario",
    "drop",
    "site",
    "ue",
    "condition",
    "los_state",
    "ds",
    "asd",
    "asa",
    "zsd",
    "zsa",
    "k_db",
    "sf_db",
    "zsd_mu",
];

pub const DISTRIBUTIONS_COLUMNS: [&str; 5] = ["metric", "scenario", "x", "pdf", "cdf"];

/// Per-site large-scale parameters of one UE.
#[derive(Debug, Clone, PartialEq)]
pub struct LspRecord {
    pub scenario: String,
    pub drop: u32,
    pub site: u32,
    pub ue: u32,
    pub condition: String,
    pub los_state: String,
    pub ds: f64,
    pub asd: f64,
    pub asa: f64,
    pub zsd: f64,
    pub zsa: f64,
    pub k_db: Option<f64>,
    pub sf_db: f64,
    pub zsd_mu: f64,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Rounds through the CSV representation.
pub fn quantize(x: f64) -> f64 {
    fmt_f64(x).parse().expect("formatted float parses")
}

pub fn link_row(r: &LinkRecord) -> String {
    let p = &r.pathloss;
    [
        r.scenario.clone(),
        r.drop.to_string(),
        r.site.to_string(),
        r.sector.to_string(),
        r.ue.to_string(),
        fmt_f64(r.d_2d),
        fmt_f64(r.d_3d),
        fmt_f64(r.h_ue),
        u8::from(r.indoor).to_string(),
        r.los_state.clone(),
        fmt_f64(p.outdoor_db),
        fmt_f64(p.wall_db),
        fmt_f64(p.indoor_db),
        fmt_f64(p.height_gain_db),
        fmt_f64(p.total_db),
        fmt_f64(r.sf_db),
        fmt_f64(r.tx_gain_db),
        fmt_f64(r.rx_gain_db),
        fmt_f64(r.coupling_loss_db),
        u8::from(r.serving).to_string(),
        fmt_f64(r.ds),
        fmt_f64(r.asd),
        fmt_f64(r.asa),
        fmt_f64(r.lsp_zsd),
        fmt_f64(r.zsa),
        fmt_opt(r.k_db),
        fmt_opt(r.zsd),
        fmt_opt(r.mean_zod),
    ]
    .join(",")
}

pub fn links_csv(records: &[LinkRecord]) -> String {
    let mut out = LINKS_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&link_row(r));
        out.push('\n');
    }
    out
}

pub fn lsps_csv(records: &[LspRecord]) -> String {
    let mut out = LSPS_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let row = [
            r.scenario.clone(),
            r.drop.to_string(),
            r.site.to_string(),
            r.ue.to_string(),
            r.condition.clone(),
            r.los_state.clone(),
            fmt_f64(r.ds),
            fmt_f64(r.asd),
            fmt_f64(r.asa),
            fmt_f64(r.zsd),
            fmt_f64(r.zsa),
            fmt_opt(r.k_db),
            fmt_f64(r.sf_db),
            fmt_f64(r.zsd_mu),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn schema(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("links.csv line {line}: {msg}"))
}

pub fn parse_links_csv(text: &str) -> Result<Vec<LinkRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptyInput("link records"))?;
    if header.trim_end() != LINKS_COLUMNS.join(",") {
        return Err(schema(1, format!("header does not match {LINKS_VERSION}")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != LINKS_COLUMNS.len() {
            return Err(schema(
                n,
                format!(
                    "expected {} cells, found {}",
                    LINKS_COLUMNS.len(),
                    cells.len()
                ),
            ));
        }
        let f = |k: usize| -> Result<f64> {
            cells[k].parse().map_err(|_| {
                schema(
                    n,
                    format!(
                        "column {} is not a number: {:?}",
                        LINKS_COLUMNS[k], cells[k]
                    ),
                )
            })
        };
        let o = |k: usize| -> Result<Option<f64>> {
            if cells[k].is_empty() {
                Ok(None)
            } else {
                f(k).map(Some)
            }
        };
        let u = |k: usize| -> Result<u32> {
            cells[k].parse().map_err(|_| {
                schema(
                    n,
                    format!(
                        "column {} is not an integer: {:?}",
                        LINKS_COLUMNS[k], cells[k]
                    ),
                )
            })
        };
        let b = |k: usize| -> Result<bool> {
            match cells[k] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(schema(
                    n,
                    format!("column {} is not 0/1: {other:?}", LINKS_COLUMNS[k]),
                )),
            }
        };
        out.push(LinkRecord {
            scenario: cells[0].to_string(),
            drop: u(1)?,
            site: u(2)?,
            sector: u(3)?,
            ue: u(4)?,
            d_2d: f(5)?,
            d_3d: f(6)?,
            h_ue: f(7)?,
            indoor: b(8)?,
            los_state: cells[9].to_string(),
            pathloss: PathlossBreakdown {
                outdoor_db: f(10)?,
                wall_db: f(11)?,
                indoor_db: f(12)?,
                height_gain_db: f(13)?,
                total_db: f(14)?,
            },
            sf_db: f(15)?,
            tx_gain_db: f(16)?,
            rx_gain_db: f(17)?,
            coupling_loss_db: f(18)?,
            serving: b(19)?,
            ds: f(20)?,
            asd: f(21)?,
            asa: f(22)?,
            lsp_zsd: f(23)?,
            zsa: f(24)?,
            k_db: o(25)?,
            zsd: o(26)?,
            mean_zod: o(27)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("link records"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub quantiles: BTreeMap<String, f64>,
    pub edges: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub pdf: Vec<f64>,
}

impl MetricSummary {
    fn new(d: &EmpiricalDistribution) -> Self {
        let s = d.samples();
        Self {
            count: d.len(),
            mean: d.mean(),
            min: s[0],
            max: s[s.len() - 1],
            quantiles: [0.05, 0.1, 0.5, 0.9, 0.95]
                .iter()
                .map(|p| (format!("{p}"), d.quantile(*p)))
                .collect(),
            edges: d.edges.clone(),
            frequencies: d.frequencies.clone(),
            pdf: d.pdf(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioStats {
    pub links: usize,
    pub serving_links: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub format: &'static str,
    pub binning: Binning,
    pub scenarios: BTreeMap<String, ScenarioStats>,
    #[serde(skip)]
    distributions: BTreeMap<(String, String), EmpiricalDistribution>,
}

/// Serving-link distributions per scenario: empirical ZSD, mean ZOD and
/// coupling loss.
pub fn aggregate(records: &[LinkRecord], binning: Binning) -> Result<StatsReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("link records"));
    }
    let mut by_scenario: BTreeMap<&str, Vec<&LinkRecord>> = BTreeMap::new();
    for r in records {
        by_scenario.entry(&r.scenario).or_default().push(r);
    }
    let mut scenarios = BTreeMap::new();
    let mut distributions = BTreeMap::new();
    for (name, recs) in by_scenario {
        let serving: Vec<&&LinkRecord> = recs.iter().filter(|r| r.serving).collect();
        let mut metrics = BTreeMap::new();
        let series: [(&str, Vec<f64>); 3] = [
            (
                "coupling_loss",
                serving.iter().map(|r| r.coupling_loss_db).collect(),
            ),
            (
                "mean_zod",
                serving.iter().filter_map(|r| r.mean_zod).collect(),
            ),
            ("zsd", serving.iter().filter_map(|r| r.zsd).collect()),
        ];
        for (metric, xs) in series {
            if xs.is_empty() {
                continue;
            }
            let d = ecdf(&xs, binning)?;
            metrics.insert(metric.to_string(), MetricSummary::new(&d));
            distributions.insert((metric.to_string(), name.to_string()), d);
        }
        scenarios.insert(
            name.to_string(),
            ScenarioStats {
                links: recs.len(),
                serving_links: serving.len(),
                metrics,
            },
        );
    }
    Ok(StatsReport {
        format: STATS_VERSION,
        binning,
        scenarios,
        distributions,
    })
}

impl StatsReport {
    pub fn distribution(&self, metric: &str, scenario: &str) -> Option<&EmpiricalDistribution> {
        self.distributions
            .get(&(metric.to_string(), scenario.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }

    /// Long format: one row per bin with its centre, density and CDF at
    /// the right edge.
    pub fn distributions_csv(&self) -> String {
        let mut out = DISTRIBUTIONS_COLUMNS.join(",");
        out.push('\n');
        for ((metric, scenario), d) in &self.distributions {
            let mut cdf = 0.0;
            for ((x, pdf), f) in d.centers().iter().zip(d.pdf()).zip(&d.frequencies) {
                cdf += f;
                out.push_str(&format!(
                    "{metric},{scenario},{},{},{}\n",
                    fmt_f64(*x),
                    fmt_f64(pdf),
                    fmt_f64(cdf.min(1.0))
                ));
            }
        }
        out
    }
}

/// Statistics straight from links.csv text.
pub fn stats_from_links_csv(text: &str, binning: Binning) -> Result<StatsReport> {
    aggregate(&parse_links_csv(text)?, binning)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CirHeader {
    pub drop: u32,
    pub site: u32,
    pub sector: u32,
    pub ue: u32,
    pub rays_per_cluster: u32,
}

pub fn write_cir<W: Write>(mut w: W, header: &CirHeader, h: &ChannelTensor) -> std::io::Result<()> {
    w.write_all(CIR_MAGIC)?;
    for v in [
        header.drop,
        header.site,
        header.sector,
        header.ue,
        h.n_paths as u32,
        header.rays_per_cluster,
        h.n_rx as u32,
        h.n_tx as u32,
        h.times.len() as u32,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&h.wavelength.to_le_bytes())?;
    for x in h.delays.iter().chain(&h.times) {
        w.write_all(&x.to_le_bytes())?;
    }
    for c in h.data() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Decoded CIR dump.
#[derive(Debug, Clone, PartialEq)]
pub struct CirDump {
    pub header: CirHeader,
    pub n_paths: usize,
    pub n_rx: usize,
    pub n_tx: usize,
    pub wavelength: f64,
    pub delays: Vec<f64>,
    pub times: Vec<f64>,
    pub data: Vec<Complex64>,
}

pub fn read_cir<R: Read>(mut r: R) -> Result<CirDump> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::io("<cir>", e))?;
    let bad = || Error::Schema("truncated or malformed CIR dump".into());
    if bytes.len() < 8 || &bytes[..8] != CIR_MAGIC {
        return Err(Error::Schema("not a CIR dump (bad magic)".into()));
    }
    let mut pos = 8;
    let mut u32s = [0u32; 9];
    for v in &mut u32s {
        *v = u32::from_le_bytes(bytes.get(pos..pos + 4).ok_or_else(bad)?.try_into().unwrap());
        pos += 4;
    }
    let f = |pos: &mut usize| -> Result<f64> {
        let v = f64::from_le_bytes(
            bytes
                .get(*pos..*pos + 8)
                .ok_or_else(bad)?
                .try_into()
                .unwrap(),
        );
        *pos += 8;
        Ok(v)
    };
    let [drop, site, sector, ue, n_paths, rays, n_rx, n_tx, n_t] = u32s;
    let wavelength = f(&mut pos)?;
    let delays = (0..n_paths)
        .map(|_| f(&mut pos))
        .collect::<Result<Vec<_>>>()?;
    let times = (0..n_t).map(|_| f(&mut pos)).collect::<Result<Vec<_>>>()?;
    let count = (n_rx * n_tx * n_paths * n_t) as usize;
    let data = (0..count)
        .map(|_| Ok(Complex64::new(f(&mut pos)?, f(&mut pos)?)))
        .collect::<Result<Vec<_>>>()?;
    if pos != bytes.len() {
        return Err(bad());
    }
    Ok(CirDump {
        header: CirHeader {
            drop,
            site,
            sector,
            ue,
            rays_per_cluster: rays,
        },
        n_paths: n_paths as usize,
        n_rx: n_rx as usize,
        n_tx: n_tx as usize,
        wavelength,
        delays,
        times,
        data,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FileFormat {
    pub version: &'static str,
    pub columns: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub generator: String,
    pub rng: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub scenarios: Vec<String>,
    pub formats: BTreeMap<&'static str, FileFormat>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn formats() -> BTreeMap<&'static str, FileFormat> {
        let f = |version, columns: &[&'static str]| FileFormat {
            version,
            columns: columns.to_vec(),
        };
        BTreeMap::from([
            ("links.csv", f(LINKS_VERSION, &LINKS_COLUMNS)),
            ("lsps.csv", f(LSPS_VERSION, &LSPS_COLUMNS)),
            (
                "distributions.csv",
                f(DISTRIBUTIONS_VERSION, &DISTRIBUTIONS_COLUMNS),
            ),
            ("stats.json", f(STATS_VERSION, &[])),
            ("cir/*.bin", f(CIR_VERSION, &[])),
        ])
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(sector: u32, serving: bool, cl: f64) -> LinkRecord {
        LinkRecord {
            scenario: "UMa".into(),
            drop: 0,
            site: sector / 3,
            sector,
            ue: 4,
            d_2d: 123.456789012,
            d_3d: 125.0,
            h_ue: 1.5,
            indoor: true,
            los_state: "nlos".into(),
            pathloss: PathlossBreakdown {
                outdoor_db: 120.0,
                wall_db: 20.0,
                indoor_db: 3.3,
                height_gain_db: 0.0,
                total_db: 143.3,
            },
            sf_db: -1.25,
            tx_gain_db: 5.0,
            rx_gain_db: 0.0,
            coupling_loss_db: cl,
            serving,
            ds: 3.1e-7,
            asd: 12.0,
            asa: 60.0,
            lsp_zsd: 4.0,
            zsa: 20.0,
            k_db: None,
            zsd: serving.then_some(3.3),
            mean_zod: serving.then_some(95.5),
        }
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_f64(123.456789012), "1.23456789e2");
        assert_eq!(fmt_f64(-0.5), "-5.00000000e-1");
        assert_eq!(quantize(1.0 / 3.0), 0.333333333);
    }

    #[test]
    fn links_roundtrip_is_quantized() {
        let recs = vec![record(0, false, 140.0), record(1, true, 130.0)];
        let text = links_csv(&recs);
        let back = parse_links_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].d_2d, quantize(123.456789012));
        assert_eq!(back[1].zsd, Some(3.3));
        assert_eq!(back[0].zsd, None);
        assert_eq!(links_csv(&back), text);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_links_csv(""), Err(Error::EmptyInput(_))));
        let header = LINKS_COLUMNS.join(",");
        assert!(matches!(
            parse_links_csv(&format!("{header}\n")),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            parse_links_csv("a,b\n1,2\n"),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            parse_links_csv(&format!("{header}\n1,2\n")),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn stats_keyed_by_scenario() {
        let mut recs = vec![record(0, false, 140.0), record(1, true, 130.0)];
        let mut umi = record(2, true, 120.0);
        umi.scenario = "UMi".into();
        recs.push(umi);
        let s = aggregate(&recs, Binning::default()).unwrap();
        assert_eq!(s.scenarios.keys().collect::<Vec<_>>(), ["UMa", "UMi"]);
        assert_eq!(s.scenarios["UMa"].links, 2);
        assert_eq!(s.scenarios["UMa"].serving_links, 1);
        assert_eq!(s.scenarios["UMa"].metrics["coupling_loss"].mean, 130.0);
        let csv = s.distributions_csv();
        assert!(csv.starts_with("metric,scenario,x,pdf,cdf\n"));
        assert!(csv.contains("zsd,UMi,"));
        assert!(aggregate(&[], Binning::default()).is_err());
    }

    #[test]
    fn cir_roundtrip() {
        use crate::antenna::{ArrayGeometry, ElementPattern, Orientation, Polarization};
        use crate::fastfading::{channel_coefficient, Cluster, ClusterSet, Endpoint, Ray};
        let a = ArrayGeometry::single(ElementPattern::isotropic(), Polarization::vertical());
        let e = Endpoint::fixed(&a, Orientation::identity());
        let ray = Ray {
            aod: 1.0,
            aoa: 2.0,
            zod: 91.0,
            zoa: 89.0,
            xpr: 10.0,
            phases: [0.1, 0.2, 0.3, 0.4],
        };
        let set = ClusterSet {
            clusters: vec![
                Cluster {
                    delay: 0.0,
                    power: 0.7,
                    aod: 1.0,
                    aoa: 2.0,
                    zod: 91.0,
                    zoa: 89.0,
                    rays: vec![ray],
                },
                Cluster {
                    delay: 1e-7,
                    power: 0.3,
                    aod: 1.0,
                    aoa: 2.0,
                    zod: 91.0,
                    zoa: 89.0,
                    rays: vec![ray],
                },
            ],
            los: None,
        };
        let h = channel_coefficient(&set, &e, &e, 0.15, &[0.0, 1e-3], true).unwrap();
        let header = CirHeader {
            drop: 1,
            site: 2,
            sector: 7,
            ue: 9,
            rays_per_cluster: 1,
        };
        let mut buf = Vec::new();
        write_cir(&mut buf, &header, &h).unwrap();
        assert_eq!(buf.len(), 8 + 36 + 8 + 16 + 16 + 4 * 16);
        let back = read_cir(&buf[..]).unwrap();
        assert_eq!(back.header, header);
        assert_eq!(back.delays, vec![0.0, 1e-7]);
        assert_eq!(back.data, h.data());
        assert_eq!(back.data[1], h.get(0, 0, 0, 1).unwrap());
        assert!(read_cir(&buf[..buf.len() - 1]).is_err());
    }
}
