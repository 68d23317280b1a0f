use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_drop, DropResult, SharedInputs};
use crate::error::Result;
use crate::power::PowerAllocation;
use crate::scenario::{DeploymentMode, ScenarioConfig};
use crate::transceiver::{Link, Scheme};

#[derive(Debug, Clone, Serialize)]
pub struct DropFailure {
    pub drop_index: u64,
    pub kind: &'static str,
    pub message: String,
}

/// Distribution of per-drop sum SE for one scheme on one link.
#[derive(Debug, Clone, Serialize)]
pub struct LinkSummary {
    pub scheme: Scheme,
    pub link: Link,
    /// Per-drop sum SE, in drop order.
    pub samples: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
    /// Median over the joint-mmse median on the same link, when both exist.
    pub ratio_to_joint_mmse: Option<f64>,
    /// Empirical CDF as `[value, F(value)]` at each distinct value.
    pub cdf: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: ScenarioConfig,
    /// Successful drops sorted by index.
    pub drops: Vec<DropResult>,
    pub failures: Vec<DropFailure>,
    pub summaries: Vec<LinkSummary>,
}

impl CampaignResult {
    pub fn summary(&self, scheme: Scheme, link: Link) -> Option<&LinkSummary> {
        self.summaries.iter().find(|s| s.scheme == scheme && s.link == link)
    }
}

/// Linear-interpolation percentile (`q` in [0, 100]) of unsorted samples; NaN when empty.
pub fn percentile(samples: &[f64], q: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// Empirical CDF evaluated at every distinct sample value.
pub fn ecdf(samples: &[f64]) -> Vec<[f64; 2]> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut out: Vec<[f64; 2]> = Vec::new();
    for (i, &x) in s.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last[0] == x => last[1] = f,
            _ => out.push([x, f]),
        }
    }
    out
}

fn summarize(config: &ScenarioConfig, drops: &[DropResult]) -> Vec<LinkSummary> {
    let mut out = Vec::new();
    for &link in &config.links {
        let joint_median = {
            let s: Vec<f64> = drops
                .iter()
                .filter_map(|d| d.scheme(Scheme::JointMmse)?.report(link).map(|r| r.sum_se()))
                .collect();
            (!s.is_empty()).then(|| percentile(&s, 50.0))
        };
        for &scheme in &config.schemes {
            let samples: Vec<f64> = drops
                .iter()
                .filter_map(|d| d.scheme(scheme)?.report(link).map(|r| r.sum_se()))
                .collect();
            if samples.is_empty() {
                continue;
            }
            let median = percentile(&samples, 50.0);
            out.push(LinkSummary {
                scheme,
                link,
                median,
                mean: samples.iter().sum::<f64>() / samples.len() as f64,
                p5: percentile(&samples, 5.0),
                p95: percentile(&samples, 95.0),
                ratio_to_joint_mmse: joint_median.filter(|&j| j > 0.0).map(|j| median / j),
                cdf: ecdf(&samples),
                samples,
            });
        }
    }
    out
}

/// Runs `mc_drops` drops in parallel. A failing drop is recorded and skipped;
/// results do not depend on scheduling.
pub fn run_campaign(config: &ScenarioConfig) -> Result<CampaignResult> {
    let config = config.clone().validated()?;
    let shared = SharedInputs::prepare(&config)?;
    let outcomes: Vec<_> = (0..config.mc_drops as u64)
        .into_par_iter()
        .map(|d| (d, run_drop(&config, d, &shared)))
        .collect();
    let mut drops = Vec::new();
    let mut failures = Vec::new();
    for (d, outcome) in outcomes {
        match outcome {
            Ok(r) => drops.push(r),
            Err(e) => {
                log::error!("{e}");
                failures.push(DropFailure {
                    drop_index: d,
                    kind: e.kind(),
                    message: e.to_string(),
                });
            }
        }
    }
    let summaries = summarize(&config, &drops);
    Ok(CampaignResult {
        config,
        drops,
        failures,
        summaries,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Edus(Vec<usize>),
    Deployments(Vec<DeploymentMode>),
}

/// One campaign per sweep point, labelled `m<M>` or by deployment mode.
pub fn sweep(config: &ScenarioConfig, axis: &SweepAxis) -> Result<Vec<(String, CampaignResult)>> {
    let points: Vec<(String, ScenarioConfig)> = match axis {
        SweepAxis::Edus(ms) => ms
            .iter()
            .map(|&m| {
                (
                    format!("m{m}"),
                    ScenarioConfig {
                        num_edu: m,
                        ..config.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Deployments(modes) => modes
            .iter()
            .map(|&d| {
                let label = match d {
                    DeploymentMode::Ga => "ga",
                    DeploymentMode::Clustered => "clustered",
                    DeploymentMode::File => "file",
                };
                (
                    label.to_string(),
                    ScenarioConfig {
                        deployment: d,
                        ..config.clone()
                    },
                )
            })
            .collect(),
    };
    points
        .into_iter()
        .map(|(label, cfg)| Ok((label, run_campaign(&cfg)?)))
        .collect()
}

fn header(config: &ScenarioConfig) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# cfran {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(h, "# master_seed = {}", config.master_seed);
    for line in config.to_toml_string().lines() {
        let _ = writeln!(h, "# {line}");
    }
    h
}

fn fmt_db(sinr: f64) -> String {
    if sinr > 0.0 {
        format!("{}", 10.0 * sinr.log10())
    } else {
        "-inf".into()
    }
}

/// Raw per-UE samples plus one `sum` row per drop, scheme and link.
pub fn raw_csv(result: &CampaignResult) -> String {
    let mut out = header(&result.config);
    out.push_str("drop,scheme,ue,link,sinr_db,se_bpshz\n");
    for d in &result.drops {
        for s in &d.schemes {
            for &link in &result.config.links {
                let Some(report) = s.report(link) else { continue };
                let tag = s.scheme.tag();
                for (k, u) in report.ues.iter().enumerate() {
                    let _ = writeln!(out, "{},{tag},{k},{},{},{}", d.drop_index, link.tag(), fmt_db(u.sinr), u.se);
                }
                let _ = writeln!(out, "{},{tag},sum,{},,{}", d.drop_index, link.tag(), report.sum_se());
            }
        }
    }
    out
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    version: &'static str,
    master_seed: u64,
    drops_requested: usize,
    drops_completed: usize,
    failures: &'a [DropFailure],
    config: &'a ScenarioConfig,
    results: &'a [LinkSummary],
}

pub fn summary_json(result: &CampaignResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SummaryFile {
        version: env!("CARGO_PKG_VERSION"),
        master_seed: result.config.master_seed,
        drops_requested: result.config.mc_drops,
        drops_completed: result.drops.len(),
        failures: &result.failures,
        config: &result.config,
        results: &result.summaries,
    })?)
}

/// Writes `raw.csv`, `summary.json`, `partitions.csv`, `associations.csv`
/// and, when enabled, per-drop power and channel dumps.
pub fn write_outputs(result: &CampaignResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("raw.csv"), raw_csv(result))?;
    fs::write(dir.join("summary.json"), summary_json(result)?)?;

    let mut parts = header(&result.config);
    parts.push_str("drop,oru_index,edu_index\n");
    let mut assoc = header(&result.config);
    assoc.push_str("drop,ue_index,edu_index,served\n");
    for d in &result.drops {
        for (l, m) in d.partition.genome().iter().enumerate() {
            let _ = writeln!(parts, "{},{l},{m}", d.drop_index);
        }
        for k in 0..d.association.num_ue() {
            for m in 0..d.association.num_edu() {
                let _ = writeln!(assoc, "{},{k},{m},{}", d.drop_index, u8::from(d.association.serves(k, m)));
            }
        }
    }
    fs::write(dir.join("partitions.csv"), parts)?;
    fs::write(dir.join("associations.csv"), assoc)?;

    if result.config.dump_power {
        let pdir = dir.join("power");
        fs::create_dir_all(&pdir)?;
        for d in &result.drops {
            for s in &d.schemes {
                let Some(dl) = &s.downlink else { continue };
                let alloc = PowerAllocation {
                    uplink_mw: vec![result.config.ul_power_mw; dl.powers_mw.len()],
                    downlink_mw: dl.powers_mw.clone(),
                    radiated_mw: dl.radiated_mw.clone(),
                    excluded: dl.excluded.clone(),
                };
                let f = fs::File::create(pdir.join(format!("drop{}_{}.csv", d.drop_index, s.scheme.tag())))?;
                alloc.write_csv(f)?;
            }
        }
    }
    if result.config.dump_channels {
        let cdir = dir.join("channels");
        fs::create_dir_all(&cdir)?;
        for d in &result.drops {
            if let Some(ch) = &d.channels {
                ch.write_beta_csv(fs::File::create(cdir.join(format!("drop{}_beta.csv", d.drop_index)))?)?;
                ch.write_correlation_csv(fs::File::create(
                    cdir.join(format!("drop{}_correlation.csv", d.drop_index)),
                )?)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let s = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(percentile(&s, 0.0), 1.0);
        assert_eq!(percentile(&s, 100.0), 4.0);
        assert_eq!(percentile(&s, 50.0), 2.5);
        assert!(percentile(&[], 50.0).is_nan());
    }

    #[test]
    fn ecdf_of_constant_is_single_step() {
        assert_eq!(ecdf(&[2.0, 2.0, 2.0]), vec![[2.0, 1.0]]);
        let c = ecdf(&[1.0, 3.0, 2.0, 3.0]);
        assert_eq!(c, vec![[1.0, 0.25], [2.0, 0.5], [3.0, 1.0]]);
    }

    #[test]
    fn raw_csv_row_counts() {
        let cfg = ScenarioConfig {
            mc_drops: 2,
            mc_realizations: 10,
            schemes: vec![Scheme::EduMmse],
            links: vec![Link::Uplink],
            deployment: DeploymentMode::Clustered,
            ..ScenarioConfig::desk()
        };
        let result = run_campaign(&cfg).unwrap();
        let csv = raw_csv(&result);
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.iter().filter(|r| !r.contains(",sum,")).count(), 16);
        assert_eq!(rows.iter().filter(|r| r.contains(",sum,")).count(), 2);
        assert!(csv.contains("# master_seed = 1"));
        let s = result.summary(Scheme::EduMmse, Link::Uplink).unwrap();
        assert_eq!(s.samples.len(), 2);
        assert!(s.cdf.windows(2).all(|w| w[1][1] >= w[0][1]));
    }
}
