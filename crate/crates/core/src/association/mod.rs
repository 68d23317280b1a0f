//! Dynamic UE to EDU association learned by multi-agent Q-learning under a
//! fronthaul cap, with a brute-force oracle for small instances.

mod evaluator;
mod qlearning;

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::deployment::Partition;
use crate::error::{Error, Result};
use crate::transceiver::Association;

pub use evaluator::{MomentEvaluator, SeEvaluator};
pub use qlearning::{exhaustive_oracle, ql_associate, QlOutcome, QTableSummary, MAX_ORACLE_ASSOCIATIONS};

/// Reward returned when the candidate sum SE reaches the all-serve sum SE.
pub const REWARD_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QlConfig {
    /// `alpha`
    pub learning_rate: f64,
    /// `kappa`
    pub discount: f64,
    pub epsilon_init: f64,
    /// `phi`, slows the decay of the exploration rate.
    pub attenuation: f64,
    pub episodes: usize,
    /// Steps per episode; `4 K M` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

impl Default for QlConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.9,
            epsilon_init: 0.9,
            attenuation: 10.0,
            episodes: 300,
            horizon: None,
        }
    }
}

impl QlConfig {
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            out.push(format!("ql.learning_rate must lie in (0, 1], got {}", self.learning_rate));
        }
        if !(self.discount >= 0.0 && self.discount < 1.0) {
            out.push(format!("ql.discount must lie in [0, 1), got {}", self.discount));
        }
        if !(self.epsilon_init > 0.0 && self.epsilon_init < 1.0) {
            out.push(format!("ql.epsilon_init must lie in (0, 1), got {}", self.epsilon_init));
        }
        if !(self.attenuation > 0.0 && self.attenuation.is_finite()) {
            out.push(format!("ql.attenuation must be positive, got {}", self.attenuation));
        }
        if self.episodes == 0 {
            out.push("ql.episodes must be at least 1".into());
        }
        if self.horizon == Some(0) {
            out.push("ql.horizon must be at least 1".into());
        }
        out
    }

    pub fn horizon_for(&self, num_ue: usize, num_edu: usize) -> usize {
        self.horizon.unwrap_or(4 * num_ue * num_edu)
    }
}

/// Actions available to each EDU agent: associate or drop each UE, or do nothing.
pub fn action_count(num_ue: usize) -> usize {
    2 * num_ue + 1
}

/// `eps(e) = eps_init (1 - eps_init)^(e / (phi |A|))`.
pub fn epsilon_schedule(episode: usize, config: &QlConfig, actions: usize) -> f64 {
    let eps = config.epsilon_init;
    eps * (1.0 - eps).powf(episode as f64 / (config.attenuation * actions as f64))
}

/// `Q' = (1 - alpha) Q + alpha (r + kappa max_a' Q(s', a'))`.
pub fn q_update(q: f64, reward: f64, max_next: f64, alpha: f64, kappa: f64) -> f64 {
    (1.0 - alpha) * q + alpha * (reward + kappa * max_next)
}

/// `chi * R / (R_all - R)`, saturating at [`REWARD_CAP`] once `R` reaches `R_all`.
pub fn reward(feasible: bool, sum_se: f64, sum_se_all: f64) -> f64 {
    if !feasible {
        0.0
    } else if sum_se >= sum_se_all - 1e-9 {
        REWARD_CAP
    } else {
        sum_se / (sum_se_all - sum_se)
    }
}

/// UE by EDU association (`served[k][m]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EduAssociation {
    num_ue: usize,
    num_edu: usize,
    served: Vec<bool>,
}

impl EduAssociation {
    pub fn none(num_ue: usize, num_edu: usize) -> Self {
        Self {
            num_ue,
            num_edu,
            served: vec![false; num_ue * num_edu],
        }
    }

    pub fn all(num_ue: usize, num_edu: usize) -> Self {
        Self {
            num_ue,
            num_edu,
            served: vec![true; num_ue * num_edu],
        }
    }

    /// Bit `k * M + m` of `bits` says whether EDU `m` serves UE `k`.
    pub fn from_bits(bits: u64, num_ue: usize, num_edu: usize) -> Self {
        let served = (0..num_ue * num_edu).map(|i| bits >> i & 1 == 1).collect();
        Self {
            num_ue,
            num_edu,
            served,
        }
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    pub fn num_edu(&self) -> usize {
        self.num_edu
    }

    pub fn serves(&self, ue: usize, edu: usize) -> bool {
        self.served[ue * self.num_edu + edu]
    }

    pub fn set(&mut self, ue: usize, edu: usize, on: bool) {
        self.served[ue * self.num_edu + edu] = on;
    }

    /// Number of UEs each EDU serves.
    pub fn load(&self) -> Vec<usize> {
        (0..self.num_edu)
            .map(|m| (0..self.num_ue).filter(|&k| self.serves(k, m)).count())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.served.iter().all(|s| !s)
    }

    /// Agent `m`'s state: which UEs it currently serves, as a bit mask.
    pub(crate) fn row_bits(&self, edu: usize) -> u64 {
        (0..self.num_ue)
            .filter(|&k| self.serves(k, edu))
            .fold(0, |acc, k| acc | 1 << k)
    }

    /// Expands to O-RU level: a served UE is served by every O-RU of the EDU.
    pub fn to_oru(&self, partition: &Partition) -> Association {
        Association::from_edu(|k, m| self.serves(k, m), self.num_ue, partition)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ue_index,edu_index,served\n");
        for k in 0..self.num_ue {
            for m in 0..self.num_edu {
                out.push_str(&format!("{k},{m},{}\n", u8::from(self.serves(k, m))));
            }
        }
        out
    }

    /// Parses `ue_index,edu_index,served` rows; every (UE, EDU) pair must
    /// appear exactly once and `served` is 0 or 1.
    pub fn from_csv(reader: impl Read, num_ue: usize, num_edu: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            ue_index: usize,
            edu_index: usize,
            served: u8,
        }
        let mut out = Self::none(num_ue, num_edu);
        let mut seen = vec![false; num_ue * num_edu];
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(format!("association CSV: {e}")))?;
            if row.ue_index >= num_ue || row.edu_index >= num_edu {
                return Err(Error::Parse(format!(
                    "association CSV: pair ({}, {}) outside {num_ue} UEs x {num_edu} EDUs",
                    row.ue_index, row.edu_index
                )));
            }
            if row.served > 1 {
                return Err(Error::Parse(format!("association CSV: served must be 0 or 1, got {}", row.served)));
            }
            let idx = row.ue_index * num_edu + row.edu_index;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Parse(format!(
                    "association CSV: pair ({}, {}) repeated",
                    row.ue_index, row.edu_index
                )));
            }
            out.served[idx] = row.served == 1;
        }
        if let Some(idx) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!(
                "association CSV: pair ({}, {}) missing",
                idx / num_edu,
                idx % num_edu
            )));
        }
        Ok(out)
    }
}

/// Fronthaul feasibility `chi`: every EDU serves at most `cap` UEs.
pub fn fronthaul_ok(association: &EduAssociation, cap: usize) -> bool {
    association.load().iter().all(|&n| n <= cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn epsilon_examples() {
        let cfg = QlConfig {
            epsilon_init: 0.5,
            attenuation: 10.0,
            ..QlConfig::default()
        };
        assert_eq!(epsilon_schedule(0, &cfg, 1), 0.5);
        assert!((epsilon_schedule(10, &cfg, 1) - 0.25).abs() < 1e-15);
        let d = QlConfig::default();
        let a = action_count(4);
        assert!((1..50).all(|e| epsilon_schedule(e, &d, a) < epsilon_schedule(e - 1, &d, a)));
    }

    #[test]
    fn q_update_examples() {
        assert_eq!(q_update(3.0, 2.0, 7.0, 1.0, 0.0), 2.0);
        assert_eq!(q_update(3.0, 2.0, 7.0, 0.0, 0.9), 3.0);
        assert!((q_update(0.0, 1.0, 2.0, 0.5, 0.9) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(false, 30.0, 40.0), 0.0);
        assert_eq!(reward(true, 20.0, 40.0), 1.0);
        assert!((reward(true, 30.0, 40.0) - 3.0).abs() < 1e-15);
        assert_eq!(reward(true, 40.0, 40.0), REWARD_CAP);
    }

    #[test]
    fn fronthaul_examples() {
        let all = EduAssociation::all(4, 2);
        assert!(fronthaul_ok(&all, 4));
        assert!(!fronthaul_ok(&all, 3));
        let mut bal = EduAssociation::none(4, 2);
        for k in 0..4 {
            bal.set(k, k % 2, true);
        }
        assert!(fronthaul_ok(&bal, 2));
        bal.set(0, 1, true);
        assert!(!fronthaul_ok(&bal, 2));
    }

    #[test]
    fn csv_round_trip_and_rejections() {
        let a = EduAssociation::from_bits(0b1011_0110, 4, 2);
        assert_eq!(EduAssociation::from_csv(a.to_csv().as_bytes(), 4, 2).unwrap(), a);
        let missing = "ue_index,edu_index,served\n0,0,1\n";
        assert!(EduAssociation::from_csv(missing.as_bytes(), 1, 2).is_err());
        let dup = "ue_index,edu_index,served\n0,0,1\n0,0,0\n";
        assert!(EduAssociation::from_csv(dup.as_bytes(), 1, 1).is_err());
        let bad = "ue_index,edu_index,served\n0,0,2\n";
        assert!(EduAssociation::from_csv(bad.as_bytes(), 1, 1).is_err());
        let out = "ue_index,edu_index,served\n3,0,1\n";
        assert!(EduAssociation::from_csv(out.as_bytes(), 1, 1).is_err());
    }

    #[test]
    fn oru_expansion_is_edu_granular() {
        let p = Partition::from_genome(vec![0, 1, 1, 0, 1], 2).unwrap();
        let a = EduAssociation::from_bits(0b01_10_01, 3, 2);
        let o = a.to_oru(&p);
        assert!(o.is_edu_granular(&p));
        assert_eq!(o.serving_orus(0), vec![0, 3]);
        assert_eq!(o.serving_orus(1), vec![1, 2, 4]);
    }

    #[test]
    fn config_validation() {
        assert!(QlConfig::default().issues().is_empty());
        let bad = QlConfig {
            learning_rate: 0.0,
            discount: 1.0,
            epsilon_init: 1.0,
            attenuation: 0.0,
            episodes: 0,
            horizon: Some(0),
        };
        assert_eq!(bad.issues().len(), 6);
        assert_eq!(QlConfig::default().horizon_for(4, 2), 32);
    }

    proptest! {
        #[test]
        fn q_update_is_affine(q in -1e3..1e3f64, r in -1e3..1e3f64, nx in -1e3..1e3f64,
                              alpha in 0.0..=1.0f64, kappa in 0.0..1.0f64) {
            let got = q_update(q, r, nx, alpha, kappa);
            let want = q + alpha * (r + kappa * nx - q);
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }

        #[test]
        fn reward_monotone_in_sum(a in 0.0..50.0f64, b in 0.0..50.0f64, all in 50.0..100.0f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(reward(true, lo, all) <= reward(true, hi, all));
            prop_assert_eq!(reward(false, hi, all), 0.0);
        }

        #[test]
        fn epsilon_matches_closed_form(e in 0usize..2000, eps in 0.01..0.99f64, phi in 0.5..50.0f64, k in 1usize..30) {
            let cfg = QlConfig { epsilon_init: eps, attenuation: phi, ..QlConfig::default() };
            let a = action_count(k);
            let want = eps * ((1.0 - eps).ln() * e as f64 / (phi * a as f64)).exp();
            prop_assert!((epsilon_schedule(e, &cfg, a) - want).abs() <= 1e-12 * want.max(1e-300));
        }
    }
}
