//! Seeded drop orchestration.
//!
//! Per drop and UE: placement, then for every site the LOS state,
//! pathloss and large-scale parameters (shared by the site's three
//! sectors), coupling loss per sector, serving-cell association, and for
//! the serving link the cluster set, zenith statistics and optionally the
//! coefficient tensor. UEs are processed in parallel; every random draw
//! comes from a substream keyed by (drop, site, sector, ue, stage), so the
//! output does not depend on the worker count.

use std::path::Path;

use nalgebra::{Rotation3, Vector3};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::antenna::ArrayGeometry;
use crate::config::{Emit, RunConfig, ScenarioConfig};
use crate::fastfading::{
    channel_coefficient, generate_cluster_set, generate_lsps, zod_offset, ChannelTensor,
    ClusterInputs, ClusterSet, Condition, Endpoint, LspModel,
};
use crate::geometry::{
    build_layout, compute_link_geometry, drop_ue, NetworkLayout, Scenario, UeState,
    SECTORS_PER_SITE,
};
use crate::largescale::{
    draw_los_state, environmental_height, o2i_total, pathloss_los, pathloss_nlos, LosState,
};
use crate::output::{
    self, links_csv, lsps_csv, stats_from_links_csv, CirHeader, LspRecord, Manifest,
};
use crate::rng::{RngStream, Stage, StreamKey, GENERATOR_ID};
use crate::statistics::{
    associate_serving_cell, coupling_loss, link_gains, zenith_summary, LinkRecord,
};
use crate::{Error, Result};

/// Everything fixed for one scenario of a run.
pub struct ScenarioContext<'a> {
    pub name: &'a str,
    pub config: &'a ScenarioConfig,
    pub scenario: Scenario,
    pub layout: NetworkLayout,
    pub streams: RngStream,
    los_model: LspModel,
    nlos_model: LspModel,
    o2i_model: LspModel,
    bs_array: ArrayGeometry,
    ue_array: ArrayGeometry,
}

/// Root seed of a scenario: independent of which other scenarios run.
pub fn scenario_root(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

impl<'a> ScenarioContext<'a> {
    pub fn new(config: &'a RunConfig, name: &'a str) -> Result<Self> {
        let sc = config
            .scenarios
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))?;
        let scenario = sc.scenario()?;
        let wavelength = scenario.wavelength();
        Ok(Self {
            name,
            config: sc,
            scenario,
            layout: build_layout(&scenario, config.run.rings, config.run.wraparound),
            streams: RngStream::new(scenario_root(config.seed, name)),
            los_model: LspModel::new(sc.lsp.los.clone())?,
            nlos_model: LspModel::new(sc.lsp.nlos.clone())?,
            o2i_model: LspModel::new(sc.lsp.o2i.clone())?,
            bs_array: sc.antenna.bs.build(wavelength)?,
            ue_array: sc.antenna.ue.build(wavelength)?,
        })
    }

    fn model(&self, c: Condition) -> &LspModel {
        match c {
            Condition::Los => &self.los_model,
            Condition::Nlos => &self.nlos_model,
            Condition::O2i => &self.o2i_model,
        }
    }

    fn ues_per_drop(&self, per_sector: u32) -> u32 {
        self.layout.sector_count() as u32 * per_sector
    }
}

/// Serving-link channel of one UE.
pub struct ServingChannel {
    pub header: CirHeader,
    pub tensor: ChannelTensor,
}

pub struct UeResult {
    pub ue: UeState,
    pub links: Vec<LinkRecord>,
    pub lsps: Vec<LspRecord>,
    pub serving_sector: u32,
    pub clusters: ClusterSet,
    pub channel: Option<ServingChannel>,
}

struct SiteLink {
    state: LosState,
    condition: Condition,
    pathloss: crate::largescale::PathlossBreakdown,
    lsp: crate::fastfading::LargeScaleParams,
}

fn with_link(drop: u32, site: u32, sector: u32, ue: u32) -> impl Fn(Error) -> Error {
    move |e| Error::Link {
        drop,
        site,
        sector,
        ue,
        source: Box::new(e),
    }
}

/// Simulates one UE of one drop.
pub fn simulate_ue(
    ctx: &ScenarioContext<'_>,
    drop: u32,
    ue_id: u32,
    per_sector: u32,
    polarized: bool,
    cir_times: Option<&[f64]>,
    estimator: crate::statistics::MeanZodEstimator,
) -> Result<UeResult> {
    let sc = ctx.config;
    let any = StreamKey::ANY;
    let home_sector = ue_id / per_sector;
    let home_site = home_sector / SECTORS_PER_SITE as u32;
    let k_home = (home_sector % SECTORS_PER_SITE as u32) as usize;
    let site = &ctx.layout.sites[home_site as usize];
    let ue = drop_ue(
        &mut ctx.streams.substream(StreamKey::new(
            drop,
            home_site,
            home_sector,
            ue_id,
            Stage::UePlacement,
        )),
        &ctx.layout,
        site,
        k_home,
        &sc.drop,
    )
    .map_err(with_link(drop, home_site, home_sector, ue_id))?;
    let f = ctx.scenario.carrier_hz;

    let mut site_links = Vec::with_capacity(ctx.layout.sites.len());
    for s in &ctx.layout.sites {
        let err = with_link(drop, s.id, any, ue_id);
        let enb = ctx.layout.site_image(s, &ue.position);
        let geometry = compute_link_geometry(&enb, 0.0, &ue.position).map_err(&err)?;
        let key = |stage| StreamKey::new(drop, s.id, any, ue_id, stage);
        let state = draw_los_state(
            &mut ctx.streams.substream(key(Stage::LosState)),
            sc.kind,
            geometry.d_2d,
            geometry.h_ue,
            &sc.los_probability,
        )
        .map_err(&err)?;
        let (outdoor, height_gain) = if state.is_los() {
            let h_e = environmental_height(
                &mut ctx.streams.substream(key(Stage::EnvHeight)),
                state,
                geometry.h_ue,
            )
            .map_err(&err)?;
            let pl = pathloss_los(
                &sc.pathloss,
                geometry.d_3d,
                geometry.h_bs,
                geometry.h_ue,
                h_e,
                f,
            )
            .map_err(&err)?;
            (pl, 0.0)
        } else {
            let pl = pathloss_nlos(&sc.pathloss, &geometry, f).map_err(&err)?;
            (pl.total_db, pl.height_gain_db)
        };
        let pathloss = o2i_total(
            &sc.pathloss,
            outdoor,
            height_gain,
            ue.indoor,
            ue.indoor_depth,
        )
        .map_err(&err)?;
        let condition = if ue.indoor {
            Condition::O2i
        } else if state.is_los() {
            Condition::Los
        } else {
            Condition::Nlos
        };
        let curve = sc.elevation.zsd_curve(state.is_los());
        let mu = curve.mu(geometry.d_2d, geometry.h_ue, geometry.h_bs);
        let lsp = generate_lsps(
            &mut ctx.streams.substream(key(Stage::LargeScale)),
            ctx.model(condition),
            mu,
            curve.sigma,
        );
        site_links.push(SiteLink {
            state,
            condition,
            pathloss,
            lsp,
        });
    }

    let bs_orientation = sc.antenna.bs.orientation();
    let ue_orientation = sc.antenna.ue.orientation();
    let mut links = Vec::with_capacity(site_links.len() * SECTORS_PER_SITE);
    let mut geometries = Vec::with_capacity(links.capacity());
    let mut candidates = Vec::with_capacity(links.capacity());
    for (s, sl) in ctx.layout.sites.iter().zip(&site_links) {
        for (k, bearing) in s.sector_bearings.iter().enumerate() {
            let sector = NetworkLayout::sector_id(s.id, k);
            let enb = ctx.layout.site_image(s, &ue.position);
            let g = compute_link_geometry(&enb, *bearing, &ue.position)
                .map_err(with_link(drop, s.id, sector, ue_id))?;
            let (tx, rx) = link_gains(
                &g,
                &sc.antenna.bs.pattern,
                &bs_orientation,
                &sc.antenna.ue.pattern,
                &ue_orientation,
            );
            let cl = coupling_loss(sl.pathloss.total_db, sl.lsp.sf_db, tx, rx);
            candidates.push((sector, cl));
            links.push(LinkRecord {
                scenario: ctx.name.to_string(),
                drop,
                site: s.id,
                sector,
                ue: ue_id,
                d_2d: g.d_2d,
                d_3d: g.d_3d,
                h_ue: g.h_ue,
                indoor: ue.indoor,
                los_state: sl.state.label().to_string(),
                pathloss: sl.pathloss,
                sf_db: sl.lsp.sf_db,
                tx_gain_db: tx,
                rx_gain_db: rx,
                coupling_loss_db: cl,
                serving: false,
                ds: sl.lsp.ds,
                asd: sl.lsp.asd,
                asa: sl.lsp.asa,
                lsp_zsd: sl.lsp.zsd,
                zsa: sl.lsp.zsa,
                k_db: sl.lsp.k_db,
                zsd: None,
                mean_zod: None,
            });
            geometries.push(g);
        }
    }

    let serving = associate_serving_cell(&candidates)?;
    let idx = candidates
        .iter()
        .position(|c| c.0 == serving)
        .expect("serving among candidates");
    let serving_site = serving / SECTORS_PER_SITE as u32;
    let sl = &site_links[serving_site as usize];
    let g = &geometries[idx];
    let err = with_link(drop, serving_site, serving, ue_id);
    let los = sl.condition == Condition::Los;
    let offset = zod_offset(&sc.elevation, sl.state.is_los(), g.d_2d, g.h_ue);
    let table = &ctx.model(sl.condition).table;
    let inputs = ClusterInputs {
        link: g,
        lsp: &sl.lsp,
        table,
        los,
        indoor: ue.indoor,
        zod_offset: offset,
    };
    let clusters = generate_cluster_set(
        |stage| {
            ctx.streams
                .substream(StreamKey::new(drop, serving_site, serving, ue_id, stage))
        },
        &inputs,
        &sc.clusters,
    )
    .map_err(&err)?;
    let summary = zenith_summary(&clusters, estimator, g.los_zod + offset).map_err(&err)?;
    links[idx].serving = true;
    links[idx].zsd = Some(summary.zsd);
    links[idx].mean_zod = Some(summary.mean_zod);

    let channel = match cir_times {
        None => None,
        Some(times) => {
            let bearing = ctx.layout.sites[serving_site as usize].sector_bearings
                [(serving % SECTORS_PER_SITE as u32) as usize];
            let to_sector = Rotation3::from_axis_angle(&Vector3::z_axis(), -bearing.to_radians());
            let tx = Endpoint::fixed(&ctx.bs_array, bs_orientation);
            let rx = Endpoint {
                array: &ctx.ue_array,
                orientation: ue_orientation,
                velocity: to_sector * ue.velocity,
            };
            let tensor = channel_coefficient(
                &clusters,
                &tx,
                &rx,
                ctx.scenario.wavelength(),
                times,
                polarized,
            )
            .map_err(&err)?;
            Some(ServingChannel {
                header: CirHeader {
                    drop,
                    site: serving_site,
                    sector: serving,
                    ue: ue_id,
                    rays_per_cluster: table.rays as u32,
                },
                tensor,
            })
        }
    };

    let lsps = ctx
        .layout
        .sites
        .iter()
        .zip(&site_links)
        .map(|(s, sl)| LspRecord {
            scenario: ctx.name.to_string(),
            drop,
            site: s.id,
            ue: ue_id,
            condition: format!("{:?}", sl.condition).to_lowercase(),
            los_state: sl.state.label().to_string(),
            ds: sl.lsp.ds,
            asd: sl.lsp.asd,
            asa: sl.lsp.asa,
            zsd: sl.lsp.zsd,
            zsa: sl.lsp.zsa,
            k_db: sl.lsp.k_db,
            sf_db: sl.lsp.sf_db,
            zsd_mu: sl.lsp.zsd_mu,
        })
        .collect();

    Ok(UeResult {
        ue,
        links,
        lsps,
        serving_sector: serving,
        clusters,
        channel,
    })
}

/// In-memory result of a run.
pub struct Simulation {
    pub links: Vec<LinkRecord>,
    pub lsps: Vec<LspRecord>,
    pub channels: Vec<ServingChannel>,
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n.max(1));
    }
    b.build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

pub fn simulate(config: &RunConfig, workers: Option<usize>, with_cir: bool) -> Result<Simulation> {
    let pool = pool(workers)?;
    let times = config.run.cir.times();
    let mut sim = Simulation {
        links: Vec::new(),
        lsps: Vec::new(),
        channels: Vec::new(),
    };
    for name in &config.run.scenarios {
        let ctx = ScenarioContext::new(config, name)?;
        let per_sector = config.run.ues_per_sector;
        let ues = ctx.ues_per_drop(per_sector);
        for drop in 0..config.run.drops {
            let results: Vec<UeResult> = pool.install(|| {
                (0..ues)
                    .into_par_iter()
                    .map(|u| {
                        simulate_ue(
                            &ctx,
                            drop,
                            u,
                            per_sector,
                            config.run.polarized,
                            with_cir.then_some(&times[..]),
                            config.statistics.mean_zod,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for r in results {
                sim.links.extend(r.links);
                sim.lsps.extend(r.lsps);
                sim.channels.extend(r.channel);
            }
        }
    }
    Ok(sim)
}

/// Files produced by [`run`], as written.
pub struct RunOutput {
    pub links_csv: String,
    pub lsps_csv: String,
    pub stats_json: String,
    pub distributions_csv: String,
    pub manifest_json: String,
    pub files: Vec<String>,
}

/// Runs the configuration and writes the selected outputs into `out_dir`.
/// `emit` overrides the configured emission set when non-empty.
pub fn run(
    config: &RunConfig,
    out_dir: &Path,
    emit: &[Emit],
    workers: Option<usize>,
) -> Result<RunOutput> {
    let emit: Vec<Emit> = if emit.is_empty() {
        config.run.emit.clone()
    } else {
        emit.to_vec()
    };
    let wants = |e| emit.contains(&e);
    let sim = simulate(config, workers, wants(Emit::Cir))?;

    let links = links_csv(&sim.links);
    let lsps = lsps_csv(&sim.lsps);
    let stats = stats_from_links_csv(&links, config.statistics.binning)?;
    let stats_json = stats.to_json();
    let distributions = stats.distributions_csv();

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        output::write_file(&out_dir.join(name), bytes)?;
        files.push(name.to_string());
        Ok(())
    };
    put("config.resolved.toml", config.echo().as_bytes())?;
    if wants(Emit::Records) {
        put("links.csv", links.as_bytes())?;
        put("lsps.csv", lsps.as_bytes())?;
    }
    if wants(Emit::Stats) {
        put("stats.json", stats_json.as_bytes())?;
        put("distributions.csv", distributions.as_bytes())?;
    }
    if wants(Emit::Cir) {
        let dir = out_dir.join("cir");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (c, name) in sim.channels.iter().zip(cir_names(config, &sim)) {
            let mut buf = Vec::new();
            output::write_cir(&mut buf, &c.header, &c.tensor).map_err(|e| Error::io(&name, e))?;
            put(&name, &buf)?;
        }
    }
    let manifest = Manifest {
        generator: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        rng: GENERATOR_ID,
        seed: config.seed,
        config_hash: config.hash(),
        scenarios: config.run.scenarios.clone(),
        formats: Manifest::formats(),
        files: files.clone(),
    };
    let manifest_json = manifest.to_json();
    output::write_file(&out_dir.join("manifest.json"), manifest_json.as_bytes())?;
    files.push("manifest.json".into());
    Ok(RunOutput {
        links_csv: links,
        lsps_csv: lsps,
        stats_json,
        distributions_csv: distributions,
        manifest_json,
        files,
    })
}

fn cir_names(config: &RunConfig, sim: &Simulation) -> Vec<String> {
    // Channels are stored in run order; the scenario follows from the
    // matching serving record.
    let serving = sim.links.iter().filter(|l| l.serving);
    let _ = config;
    serving
        .map(|l| format!("cir/{}_d{}_s{}_u{}.bin", l.scenario, l.drop, l.sector, l.ue))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;

    fn small(seed: u64) -> RunConfig {
        let mut c = default_config(seed);
        c.run.rings = 1;
        c.run.ues_per_sector = 2;
        c.run.scenarios = vec!["UMa".into(), "UMi".into()];
        c
    }

    #[test]
    fn counts_and_serving() {
        let c = small(1);
        let sim = simulate(&c, Some(2), false).unwrap();
        // 7 sites, 21 sectors, 2 UEs each: 42 UEs × 21 links per scenario.
        assert_eq!(sim.links.len(), 2 * 42 * 21);
        assert_eq!(sim.lsps.len(), 2 * 42 * 7);
        assert_eq!(sim.links.iter().filter(|l| l.serving).count(), 2 * 42);
        for chunk in sim.links.chunks(21) {
            let best = chunk
                .iter()
                .min_by(|a, b| {
                    a.coupling_loss_db
                        .total_cmp(&b.coupling_loss_db)
                        .then(a.sector.cmp(&b.sector))
                })
                .unwrap();
            assert!(best.serving);
            let site_sf: Vec<f64> = chunk.iter().map(|l| l.sf_db).collect();
            for s in site_sf.chunks(3) {
                assert!(s[0] == s[1] && s[1] == s[2]);
            }
        }
    }

    #[test]
    fn seed_changes_draws_not_config() {
        let a = simulate(&small(1), Some(1), false).unwrap();
        let b = simulate(&small(2), Some(1), false).unwrap();
        assert_ne!(
            a.links.iter().map(|l| l.sf_db).collect::<Vec<_>>(),
            b.links.iter().map(|l| l.sf_db).collect::<Vec<_>>()
        );
        assert_eq!(small(1).hash(), small(2).hash());
    }

    /// A scenario's draws do not depend on which other scenarios run.
    #[test]
    fn scenarios_independent() {
        let both = simulate(&small(5), Some(1), false).unwrap();
        let mut only = small(5);
        only.run.scenarios = vec!["UMi".into()];
        let umi = simulate(&only, Some(1), false).unwrap();
        let from_both: Vec<_> = both.links.iter().filter(|l| l.scenario == "UMi").collect();
        assert_eq!(from_both.len(), umi.links.len());
        for (a, b) in from_both.iter().zip(&umi.links) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn cir_emitted_for_serving_links() {
        let mut c = small(3);
        c.run.scenarios = vec!["UMi".into()];
        c.run.ues_per_sector = 1;
        c.run.cir.samples = 2;
        let dir = tempfile::tempdir().unwrap();
        let out = run(&c, dir.path(), &[Emit::Cir, Emit::Stats], Some(2)).unwrap();
        let cirs: Vec<_> = out.files.iter().filter(|f| f.starts_with("cir/")).collect();
        assert_eq!(cirs.len(), 21);
        let bytes = std::fs::read(dir.path().join(cirs[0])).unwrap();
        let dump = output::read_cir(&bytes[..]).unwrap();
        assert_eq!(dump.n_rx, 2);
        assert_eq!(dump.n_tx, 8);
        assert_eq!(dump.times.len(), 2);
        assert!(!dir.path().join("links.csv").exists());
        assert!(dir.path().join("stats.json").exists());
    }
}
