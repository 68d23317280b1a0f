//! Drop-level simulation, Monte Carlo campaigns and their file outputs.

mod campaign;
pub mod cli;

use serde::Serialize;

use crate::association::{ql_associate, EduAssociation, MomentEvaluator, QlOutcome};
use crate::channel::{apply_phase_drift, ChannelSet, Realization};
use crate::deployment::{ga_optimize, GaOutcome, Partition};
use crate::error::{Error, Result};
use crate::power::uplink_power;
use crate::scenario::{
    build_topology, stream_rng, AssociationMode, DeploymentMode, Placement, ScenarioConfig, Stream, Topology,
};
use crate::transceiver::{
    downlink_sinr, uplink_sinr, DownlinkOutcome, Link, MmseContext, ProcessingPlan, Scheme, SinrReport,
};

pub use campaign::{
    ecdf, percentile, run_campaign, sweep, write_outputs, CampaignResult, DropFailure, LinkSummary,
    SweepAxis,
};

/// Results of every enabled scheme on one drop.
#[derive(Debug, Clone)]
pub struct DropResult {
    pub drop_index: u64,
    pub partition: Partition,
    pub association: EduAssociation,
    pub schemes: Vec<SchemeResult>,
    pub ga: Option<GaOutcome>,
    pub ql: Option<QlOutcome>,
    pub placement: Placement,
    /// Kept only when channel dumps are requested.
    pub channels: Option<ChannelSet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub uplink: Option<SinrReport>,
    pub downlink: Option<DownlinkOutcome>,
}

impl SchemeResult {
    pub fn report(&self, link: Link) -> Option<&SinrReport> {
        match link {
            Link::Uplink => self.uplink.as_ref(),
            Link::Downlink => self.downlink.as_ref().map(|d| &d.report),
        }
    }
}

impl DropResult {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeResult> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

/// Inputs that are identical for every drop and are computed once.
#[derive(Debug, Clone, Default)]
pub struct SharedInputs {
    /// Partition fixed for the whole campaign: loaded from file, or found once
    /// on the grid (whose O-RU positions do not change between drops).
    pub partition: Option<(Partition, Option<GaOutcome>)>,
}

impl SharedInputs {
    pub fn prepare(config: &ScenarioConfig) -> Result<Self> {
        let partition = match config.deployment {
            DeploymentMode::File => Some((load_partition(config)?, None)),
            _ => {
                let topo = build_topology(config, 0)?;
                match topo.placement {
                    Placement::Grid { .. } => Some(deploy(config, &topo, 0)?),
                    Placement::RandomFallback => None,
                }
            }
        };
        Ok(Self { partition })
    }
}

fn load_partition(config: &ScenarioConfig) -> Result<Partition> {
    let path = config
        .partition_file
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(vec!["deployment = \"file\" needs partition_file".into()]))?;
    let p = Partition::from_file(path)?;
    if p.num_oru() != config.num_oru || p.num_edu() != config.num_edu {
        return Err(Error::Domain(format!(
            "partition file has {} O-RUs / {} EDUs, config has {} / {}",
            p.num_oru(),
            p.num_edu(),
            config.num_oru,
            config.num_edu
        )));
    }
    Ok(p)
}

/// Partition for one topology according to the deployment mode.
pub fn deploy(config: &ScenarioConfig, topology: &Topology, drop_index: u64) -> Result<(Partition, Option<GaOutcome>)> {
    match config.deployment {
        DeploymentMode::Clustered => Ok((topology.partition.clone(), None)),
        DeploymentMode::File => Ok((load_partition(config)?, None)),
        DeploymentMode::Ga => {
            let mut rng = stream_rng(config.master_seed, drop_index, Stream::Genetic);
            let out = ga_optimize(&topology.oru_distance, config.num_edu, &config.ga, &mut rng)?;
            Ok((out.partition.clone(), Some(out)))
        }
    }
}

/// Learns (or loads) the UE to EDU association for one drop.
pub fn associate(
    config: &ScenarioConfig,
    channels: &ChannelSet,
    partition: &Partition,
    drop_index: u64,
) -> Result<(EduAssociation, Option<QlOutcome>)> {
    let (k, m) = (config.num_ue, config.num_edu);
    match config.association {
        AssociationMode::All => Ok((EduAssociation::all(k, m), None)),
        AssociationMode::File => {
            let path = config.association_file.as_ref().ok_or_else(|| {
                Error::InvalidConfig(vec!["association = \"file\" needs association_file".into()])
            })?;
            let file = std::fs::File::open(path)?;
            Ok((EduAssociation::from_csv(file, k, m)?, None))
        }
        AssociationMode::Ql => {
            let powers = uplink_power(k, config.ul_power_mw)?;
            let mut proxy_rng = stream_rng(config.master_seed, drop_index, Stream::Proxy);
            let mut evaluator = MomentEvaluator::new(
                channels,
                partition,
                &powers,
                config.noise_power_mw(),
                config.proxy_realizations,
                &mut proxy_rng,
            )?;
            let mut rng = stream_rng(config.master_seed, drop_index, Stream::QLearning);
            let out = ql_associate(k, m, config.fronthaul_cap(), &config.ql, &mut evaluator, &mut rng)?;
            Ok((out.association.clone(), Some(out)))
        }
    }
}

/// Simulates one drop for every enabled scheme and link. All schemes see the
/// same topology, channels and realizations.
pub fn run_drop(config: &ScenarioConfig, drop_index: u64, shared: &SharedInputs) -> Result<DropResult> {
    run_drop_inner(config, drop_index, shared).map_err(|e| e.in_drop(drop_index))
}

fn run_drop_inner(config: &ScenarioConfig, drop_index: u64, shared: &SharedInputs) -> Result<DropResult> {
    let seed = config.master_seed;
    let topology = build_topology(config, drop_index)?;
    let (partition, ga) = match &shared.partition {
        Some((p, ga)) => (p.clone(), ga.clone()),
        None => deploy(config, &topology, drop_index)?,
    };
    let channels = ChannelSet::build(config, &topology, drop_index)?;

    let needs_dcc = config.schemes.iter().any(|s| s.uses_dcc());
    let (association, ql) = if needs_dcc {
        associate(config, &channels, &partition, drop_index)?
    } else {
        (EduAssociation::all(config.num_ue, config.num_edu), None)
    };
    let dcc = association.to_oru(&partition);

    let mut rng = stream_rng(seed, drop_index, Stream::SmallScale);
    let realizations: Vec<Realization> = (0..config.mc_realizations).map(|_| channels.draw(&mut rng)).collect();

    let noise = config.noise_power_mw();
    let powers = uplink_power(config.num_ue, config.ul_power_mw)?;
    let ctx = MmseContext::new(&channels, &powers, noise)?;

    let want_ul = config.links.contains(&Link::Uplink);
    let want_dl = config.links.contains(&Link::Downlink);
    let dl_realizations = if want_dl && config.phase_drift_deg > 0.0 {
        let mut drift = stream_rng(seed, drop_index, Stream::PhaseDrift);
        let mut out = realizations.clone();
        for real in &mut out {
            apply_phase_drift(&mut real.h, channels.antennas, config.phase_drift_deg, &mut drift);
        }
        Some(out)
    } else {
        None
    };

    let mut schemes = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let plan = ProcessingPlan::for_scheme(scheme, &partition, &dcc);
        let uplink = if want_ul {
            let mut qrng = stream_rng(seed, drop_index, Stream::Quantizer);
            Some(uplink_sinr(&plan, &ctx, &realizations, config.quantizer_bits, &mut qrng))
        } else {
            None
        };
        let downlink = if want_dl {
            let reals = dl_realizations.as_deref().unwrap_or(&realizations);
            Some(downlink_sinr(&plan, &ctx, reals, &channels.beta, config.dl_pmax_mw, noise)?)
        } else {
            None
        };
        schemes.push(SchemeResult {
            scheme,
            uplink,
            downlink,
        });
    }

    Ok(DropResult {
        drop_index,
        partition,
        association,
        schemes,
        ga,
        ql,
        placement: topology.placement,
        channels: config.dump_channels.then_some(channels),
    })
}
