use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::{action_count, epsilon_schedule, fronthaul_ok, q_update, reward, EduAssociation, QlConfig, SeEvaluator};
use crate::error::{Error, Result};

/// Largest association space the oracle will enumerate.
pub const MAX_ORACLE_ASSOCIATIONS: u64 = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct QTableSummary {
    pub agent: usize,
    pub entries: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QlOutcome {
    /// Best fronthaul-feasible association seen during learning.
    #[serde(skip)]
    pub association: EduAssociation,
    pub sum_se: f64,
    pub sum_se_all: f64,
    /// Sum SE of the association reached at the end of each episode.
    pub episode_sum_se: Vec<f64>,
    /// Total reward collected in each episode.
    pub episode_reward: Vec<f64>,
    /// Best feasible sum SE seen up to and including each episode.
    pub best_so_far: Vec<f64>,
    pub q_tables: Vec<QTableSummary>,
}

type QTable = HashMap<(u64, usize), f64>;

fn q_get(table: &QTable, state: u64, action: usize) -> f64 {
    table.get(&(state, action)).copied().unwrap_or(0.0)
}

fn max_q(table: &QTable, state: u64, actions: usize) -> f64 {
    (0..actions).map(|a| q_get(table, state, a)).fold(f64::NEG_INFINITY, f64::max)
}

/// Greedy action; ties are broken uniformly at random.
fn greedy<R: Rng + ?Sized>(table: &QTable, state: u64, actions: usize, rng: &mut R) -> usize {
    let best = max_q(table, state, actions);
    let ties: Vec<usize> = (0..actions).filter(|&a| q_get(table, state, a) == best).collect();
    ties[rng.random_range(0..ties.len())]
}

/// Multi-agent Q-learning of the UE to EDU association.
///
/// Each EDU is an agent with its own Q-table over (its served-UE bit row,
/// action). Agents act one per step, round-robin, starting every episode from
/// the empty association. Actions `0..K` associate UE `k`, `K..2K` drop UE
/// `k - K`, and `2K` does nothing. Q-tables persist across episodes.
pub fn ql_associate<E, R>(
    num_ue: usize,
    num_edu: usize,
    fronthaul_cap: usize,
    config: &QlConfig,
    evaluator: &mut E,
    rng: &mut R,
) -> Result<QlOutcome>
where
    E: SeEvaluator + ?Sized,
    R: Rng + ?Sized,
{
    if num_ue == 0 || num_ue > 64 {
        return Err(Error::Domain(format!("Q-learning supports 1..=64 UEs, got {num_ue}")));
    }
    if num_edu == 0 {
        return Err(Error::Domain("Q-learning needs at least one EDU".into()));
    }
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(Error::InvalidConfig(issues));
    }
    let actions = action_count(num_ue);
    let horizon = config.horizon_for(num_ue, num_edu);
    let sum_se_all = evaluator
        .sum_se(&EduAssociation::all(num_ue, num_edu))
        .map_err(|e| learning_error(0, 0, e))?;

    let mut tables: Vec<QTable> = vec![HashMap::new(); num_edu];
    let mut best = EduAssociation::none(num_ue, num_edu);
    let mut best_se = evaluator.sum_se(&best).map_err(|e| learning_error(0, 0, e))?;
    let mut episode_sum_se = Vec::with_capacity(config.episodes);
    let mut episode_reward = Vec::with_capacity(config.episodes);
    let mut best_so_far = Vec::with_capacity(config.episodes);

    for episode in 0..config.episodes {
        let eps = epsilon_schedule(episode, config, actions);
        let mut assoc = EduAssociation::none(num_ue, num_edu);
        let mut current = 0.0;
        let mut collected = 0.0;
        for step in 0..horizon {
            let agent = step % num_edu;
            let state = assoc.row_bits(agent);
            let action = if rng.random::<f64>() < 1.0 - eps {
                greedy(&tables[agent], state, actions, rng)
            } else {
                rng.random_range(0..actions)
            };
            if action < num_ue {
                assoc.set(action, agent, true);
            } else if action < 2 * num_ue {
                assoc.set(action - num_ue, agent, false);
            }
            let next = assoc.row_bits(agent);
            current = evaluator
                .sum_se(&assoc)
                .map_err(|e| learning_error(episode, step, e))?;
            let feasible = fronthaul_ok(&assoc, fronthaul_cap);
            let r = reward(feasible, current, sum_se_all);
            collected += r;
            let target = max_q(&tables[agent], next, actions);
            let q = q_get(&tables[agent], state, action);
            tables[agent].insert(
                (state, action),
                q_update(q, r, target, config.learning_rate, config.discount),
            );
            if feasible && current > best_se {
                best_se = current;
                best = assoc.clone();
            }
        }
        episode_sum_se.push(current);
        episode_reward.push(collected);
        best_so_far.push(best_se);
        log::debug!("episode {episode}: eps {eps:.4}, sum SE {current:.4}, best {best_se:.4}");
    }

    let q_tables = tables
        .iter()
        .enumerate()
        .map(|(agent, t)| {
            let n = t.len();
            let (min, max, sum) = t.values().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &v| {
                (lo.min(v), hi.max(v), s + v)
            });
            QTableSummary {
                agent,
                entries: n,
                min: if n > 0 { min } else { 0.0 },
                max: if n > 0 { max } else { 0.0 },
                mean: if n > 0 { sum / n as f64 } else { 0.0 },
            }
        })
        .collect();

    Ok(QlOutcome {
        association: best,
        sum_se: best_se,
        sum_se_all,
        episode_sum_se,
        episode_reward,
        best_so_far,
        q_tables,
    })
}

fn learning_error(episode: usize, step: usize, source: Error) -> Error {
    Error::Learning {
        episode,
        step,
        source: Box::new(source),
    }
}

/// Brute-force best fronthaul-feasible association over all `2^(K M)`
/// UE to EDU indicator patterns. Ties keep the earliest pattern (the empty
/// association first).
pub fn exhaustive_oracle<E>(
    num_ue: usize,
    num_edu: usize,
    fronthaul_cap: usize,
    evaluator: &mut E,
) -> Result<(EduAssociation, f64)>
where
    E: SeEvaluator + ?Sized,
{
    let bits = num_ue * num_edu;
    if bits >= 64 || (1u64 << bits) > MAX_ORACLE_ASSOCIATIONS {
        return Err(Error::TooLarge(format!(
            "{num_ue} UEs x {num_edu} EDUs gives 2^{bits} associations (limit {MAX_ORACLE_ASSOCIATIONS})"
        )));
    }
    let mut best = EduAssociation::none(num_ue, num_edu);
    let mut best_se = evaluator.sum_se(&best)?;
    for pattern in 1..(1u64 << bits) {
        let candidate = EduAssociation::from_bits(pattern, num_ue, num_edu);
        if !fronthaul_ok(&candidate, fronthaul_cap) {
            continue;
        }
        let se = evaluator.sum_se(&candidate)?;
        if se > best_se {
            best_se = se;
            best = candidate;
        }
    }
    Ok((best, best_se))
}
