//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::{associate, deploy, run_campaign, sweep, write_outputs, SweepAxis};
use crate::association::EduAssociation;
use crate::channel::ChannelSet;
use crate::deployment::{fitness, Partition};
use crate::error::{Error, Result};
use crate::power::uplink_power;
use crate::scenario::{build_topology, stream_rng, AssociationMode, DeploymentMode, ScenarioConfig, Stream};
use crate::transceiver::{uplink_sinr, MmseContext, ProcessingPlan, QuantizerBits, Scheme};

#[derive(Debug, Parser)]
#[command(name = "cfran", version, about = "Cell-free RAN spectral-efficiency simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo campaign.
    Simulate(Common),
    /// Optimise the O-RU to EDU partition of drop 0 and compare with the clustered baseline.
    DeployGa(Common),
    /// Learn the UE to EDU association for one drop.
    AssociateQl {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        drop: u64,
    },
    /// Repeat the campaign over several EDU counts or deployment modes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated EDU counts, e.g. `1,2,4,16`.
        #[arg(long, value_delimiter = ',', conflicts_with = "deployments")]
        edus: Vec<usize>,
        /// Comma-separated deployment modes.
        #[arg(long, value_delimiter = ',', value_enum)]
        deployments: Vec<DeploymentMode>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML scenario file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<usize>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub schemes: Option<Vec<Scheme>>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub deployment: Option<DeploymentMode>,
    #[arg(long, value_enum)]
    pub association: Option<AssociationMode>,
    #[arg(long)]
    pub phase_drift_deg: Option<f64>,
    /// Fronthaul quantizer resolution in bits, or `infinite`.
    #[arg(long)]
    pub quant_bits: Option<QuantizerBits>,
}

impl Common {
    /// Loads the config file and applies command-line overrides.
    pub fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::from_file(&self.config)?;
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(d) = self.drops {
            cfg.mc_drops = d;
        }
        if let Some(s) = &self.schemes {
            cfg.schemes = s.clone();
        }
        if let Some(d) = self.deployment {
            cfg.deployment = d;
        }
        if let Some(a) = self.association {
            cfg.association = a;
        }
        if let Some(p) = self.phase_drift_deg {
            cfg.phase_drift_deg = p;
        }
        if let Some(b) = self.quant_bits {
            cfg.quantizer_bits = b;
        }
        cfg.validated()
    }
}

/// Machine-readable failure record printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_index: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<String>,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let mut inner = e;
        let mut drop_index = None;
        loop {
            match inner {
                Error::Drop { drop_index: d, source } => {
                    drop_index = Some(*d);
                    inner = source;
                }
                Error::Learning { source, .. } => inner = source,
                _ => break,
            }
        }
        let issues = match inner {
            Error::InvalidConfig(v) => v.clone(),
            _ => Vec::new(),
        };
        Self {
            error: e.kind(),
            message: e.to_string(),
            drop_index,
            issues,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.load()?;
            let result = run_campaign(&cfg)?;
            write_outputs(&result, &common.out)?;
            for s in &result.summaries {
                println!(
                    "{:<10} {:<2} median {:>8.3}  mean {:>8.3}  ratio {}",
                    s.scheme.tag(),
                    s.link.tag(),
                    s.median,
                    s.mean,
                    s.ratio_to_joint_mmse.map_or("-".into(), |r| format!("{r:.3}"))
                );
            }
            if !result.failures.is_empty() {
                log::warn!("{} of {} drops failed", result.failures.len(), cfg.mc_drops);
            }
            Ok(())
        }
        Command::DeployGa(common) => deploy_ga(&common),
        Command::AssociateQl { common, drop } => associate_ql(&common, drop),
        Command::Sweep {
            common,
            edus,
            deployments,
        } => {
            let cfg = common.load()?;
            let axis = if !deployments.is_empty() {
                SweepAxis::Deployments(deployments)
            } else if !edus.is_empty() {
                SweepAxis::Edus(edus)
            } else {
                SweepAxis::Deployments(vec![DeploymentMode::Ga, DeploymentMode::Clustered])
            };
            for (label, result) in sweep(&cfg, &axis)? {
                write_outputs(&result, &common.out.join(&label))?;
                for s in &result.summaries {
                    println!("{label:<10} {:<10} {:<2} median {:>8.3}", s.scheme.tag(), s.link.tag(), s.median);
                }
            }
            Ok(())
        }
    }
}

fn deploy_ga(common: &Common) -> Result<()> {
    let cfg = ScenarioConfig {
        deployment: DeploymentMode::Ga,
        ..common.load()?
    };
    let topo = build_topology(&cfg, 0)?;
    let (partition, ga) = deploy(&cfg, &topo, 0)?;
    let ga = ga.expect("GA deployment yields a trajectory");
    let baseline = fitness(&topo.partition, &topo.oru_distance, cfg.ga.fitness_mode)?;
    let out = &common.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("partition.json"), partition.to_json())?;
    fs::write(out.join("partition.csv"), partition.to_csv())?;
    fs::write(out.join("clustered_partition.csv"), topo.partition.to_csv())?;
    let mut traj = String::from("generation,best_fitness\n");
    for (g, f) in ga.trajectory.iter().enumerate() {
        traj.push_str(&format!("{g},{f}\n"));
    }
    fs::write(out.join("fitness.csv"), traj)?;
    println!(
        "ga fitness {:.6e} (clustered {:.6e}), {} immigrants",
        ga.fitness, baseline, ga.immigrants
    );
    Ok(())
}

fn load_or_deploy(cfg: &ScenarioConfig, drop: u64) -> Result<(ChannelSet, Partition)> {
    let topo = build_topology(cfg, drop)?;
    let (partition, _) = deploy(cfg, &topo, drop)?;
    let channels = ChannelSet::build(cfg, &topo, drop)?;
    Ok((channels, partition))
}

fn associate_ql(common: &Common, drop: u64) -> Result<()> {
    let cfg = ScenarioConfig {
        association: AssociationMode::Ql,
        ..common.load()?
    };
    let (channels, partition) = load_or_deploy(&cfg, drop).map_err(|e| e.in_drop(drop))?;
    let (assoc, ql) = associate(&cfg, &channels, &partition, drop).map_err(|e| e.in_drop(drop))?;
    let ql = ql.expect("Q-learning mode yields a trajectory");
    let full = rescore(&cfg, &channels, &partition, &assoc, drop)?;

    let out = &common.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("association.csv"), assoc.to_csv())?;
    let mut traj = String::from("episode,sum_se,reward,best_sum_se\n");
    for e in 0..ql.episode_sum_se.len() {
        traj.push_str(&format!(
            "{e},{},{},{}\n",
            ql.episode_sum_se[e], ql.episode_reward[e], ql.best_so_far[e]
        ));
    }
    fs::write(out.join("rewards.csv"), traj)?;
    #[derive(Serialize)]
    struct Report<'a> {
        drop_index: u64,
        proxy_sum_se: f64,
        proxy_sum_se_all: f64,
        monte_carlo_sum_se: f64,
        q_tables: &'a [crate::association::QTableSummary],
    }
    let report = Report {
        drop_index: drop,
        proxy_sum_se: ql.sum_se,
        proxy_sum_se_all: ql.sum_se_all,
        monte_carlo_sum_se: full,
        q_tables: &ql.q_tables,
    };
    fs::write(out.join("qlearning.json"), serde_json::to_string_pretty(&report)?)?;
    println!(
        "learned association: proxy sum SE {:.3} (all-serve {:.3}), Monte Carlo sum SE {:.3}",
        ql.sum_se, ql.sum_se_all, full
    );
    Ok(())
}

/// Full Monte Carlo uplink EDU-PMMSE sum SE of a learned association.
fn rescore(
    cfg: &ScenarioConfig,
    channels: &ChannelSet,
    partition: &Partition,
    assoc: &EduAssociation,
    drop: u64,
) -> Result<f64> {
    let powers = uplink_power(cfg.num_ue, cfg.ul_power_mw)?;
    let ctx = MmseContext::new(channels, &powers, cfg.noise_power_mw())?;
    let mut rng = stream_rng(cfg.master_seed, drop, Stream::SmallScale);
    let reals: Vec<_> = (0..cfg.mc_realizations).map(|_| channels.draw(&mut rng)).collect();
    let plan = ProcessingPlan::for_scheme(Scheme::EduPmmse, partition, &assoc.to_oru(partition));
    let mut qrng = stream_rng(cfg.master_seed, drop, Stream::Quantizer);
    Ok(uplink_sinr(&plan, &ctx, &reals, cfg.quantizer_bits, &mut qrng).sum_se())
}

/// Convenience for tests and callers that hold a path rather than a `Cli`.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::from_file(path)?.validated()
}
