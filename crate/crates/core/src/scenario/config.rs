use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::association::QlConfig;
use crate::deployment::GaConfig;
use crate::error::{Error, Result};
use crate::transceiver::{Link, QuantizerBits, Scheme};

pub const DEFAULT_AREA_SIDE_M: f64 = 200.0;

/// Large-scale pathloss law. `LogDistance` is the urban 2 GHz model used for
/// every experiment; `PowerLaw` is the bare `d^-alpha` alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PathlossModel {
    LogDistance { intercept_db: f64, slope_db: f64 },
    PowerLaw { exponent: f64 },
}

impl Default for PathlossModel {
    fn default() -> Self {
        PathlossModel::LogDistance {
            intercept_db: -30.5,
            slope_db: 36.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DeploymentMode {
    /// Genetic interleaving of O-RUs over EDUs.
    #[default]
    Ga,
    /// Balanced geographic clustering.
    Clustered,
    /// Partition read from `partition_file`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationMode {
    /// Every EDU serves every UE.
    #[default]
    All,
    /// Q-learning association per drop.
    Ql,
    /// Association read from `association_file`.
    File,
}

/// Full description of a simulation campaign.
///
/// Field names are the on-disk TOML keys. Defaults reproduce the reference
/// urban layout: 100 four-antenna O-RUs over 200 m x 200 m, 24 UEs, 8 EDUs.
/// `dl_pmax_mw` defaults to 200 mW per O-RU; there is no published value for
/// the downlink budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_side_m: f64,
    pub num_oru: usize,
    pub antennas_per_oru: usize,
    pub num_ue: usize,
    pub num_edu: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub ul_power_mw: f64,
    pub dl_pmax_mw: f64,
    pub pathloss: PathlossModel,
    pub shadow_sigma_db: f64,
    pub asd_azimuth_deg: f64,
    pub asd_elevation_deg: f64,
    pub antenna_height_m: f64,
    pub pilot_count: usize,
    pub quantizer_bits: QuantizerBits,
    /// Maximum UEs per EDU; absent means uncapped.
    pub fronthaul_ue_cap: Option<usize>,
    pub mc_drops: usize,
    pub mc_realizations: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub links: Vec<Link>,
    pub deployment: DeploymentMode,
    pub partition_file: Option<PathBuf>,
    pub association: AssociationMode,
    pub association_file: Option<PathBuf>,
    /// Per-O-RU LO phase error bound applied to the downlink channel, degrees.
    pub phase_drift_deg: f64,
    /// Gauss-Legendre nodes per angular axis for the correlation integral.
    pub quadrature_nodes: usize,
    /// Realizations backing the statistical SE evaluator used by Q-learning.
    pub proxy_realizations: usize,
    pub dump_power: bool,
    pub dump_channels: bool,
    pub ga: GaConfig,
    pub ql: QlConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side_m: DEFAULT_AREA_SIDE_M,
            num_oru: 100,
            antennas_per_oru: 4,
            num_ue: 24,
            num_edu: 8,
            carrier_hz: 2e9,
            bandwidth_hz: 20e6,
            noise_psd_dbm_hz: -174.0,
            ul_power_mw: 200.0,
            dl_pmax_mw: 200.0,
            pathloss: PathlossModel::default(),
            shadow_sigma_db: 4.0,
            asd_azimuth_deg: 15.0,
            asd_elevation_deg: 15.0,
            antenna_height_m: 10.0,
            pilot_count: 24,
            quantizer_bits: QuantizerBits::Infinite,
            fronthaul_ue_cap: None,
            mc_drops: 50,
            mc_realizations: 100,
            master_seed: 1,
            schemes: Scheme::ALL.to_vec(),
            links: vec![Link::Uplink, Link::Downlink],
            deployment: DeploymentMode::Ga,
            partition_file: None,
            association: AssociationMode::All,
            association_file: None,
            phase_drift_deg: 0.0,
            quadrature_nodes: 40,
            proxy_realizations: 16,
            dump_power: false,
            dump_channels: false,
            ga: GaConfig::default(),
            ql: QlConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Small configuration for quick runs: 16 two-antenna O-RUs, 8 UEs, 4 EDUs.
    pub fn desk() -> Self {
        Self {
            num_oru: 16,
            antennas_per_oru: 2,
            num_ue: 8,
            num_edu: 4,
            mc_drops: 20,
            mc_realizations: 50,
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Validates and returns `self`, or every violated invariant at once.
    pub fn validated(self) -> Result<Self> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }

    /// Noise power over the band, mW.
    pub fn noise_power_mw(&self) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10()) / 10.0)
    }

    pub fn fronthaul_cap(&self) -> usize {
        self.fronthaul_ue_cap.unwrap_or(self.num_ue)
    }

    pub(crate) fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;

        check(self.num_edu >= 1, format!("num_edu must be >= 1 (got {})", self.num_edu));
        check(
            self.num_oru >= self.num_edu,
            format!(
                "num_oru ({}) must be >= num_edu ({})",
                self.num_oru, self.num_edu
            ),
        );
        check(self.antennas_per_oru >= 1, "antennas_per_oru must be >= 1".into());
        check(self.num_ue >= 1, "num_ue must be >= 1".into());
        check(
            self.num_ue <= self.pilot_count,
            format!(
                "pilot shortage: num_ue ({}) exceeds pilot_count ({})",
                self.num_ue, self.pilot_count
            ),
        );
        check(finite_pos(self.area_side_m), "area_side_m must be > 0".into());
        check(finite_pos(self.carrier_hz), "carrier_hz must be > 0".into());
        check(finite_pos(self.bandwidth_hz), "bandwidth_hz must be > 0".into());
        check(self.noise_psd_dbm_hz.is_finite(), "noise_psd_dbm_hz must be finite".into());
        check(finite_pos(self.ul_power_mw), "ul_power_mw must be > 0".into());
        check(finite_pos(self.dl_pmax_mw), "dl_pmax_mw must be > 0".into());
        check(finite_nonneg(self.shadow_sigma_db), "shadow_sigma_db must be >= 0".into());
        check(finite_nonneg(self.asd_azimuth_deg), "asd_azimuth_deg must be >= 0".into());
        check(finite_nonneg(self.asd_elevation_deg), "asd_elevation_deg must be >= 0".into());
        check(finite_pos(self.antenna_height_m), "antenna_height_m must be > 0".into());
        check(finite_nonneg(self.phase_drift_deg), "phase_drift_deg must be >= 0".into());
        match self.pathloss {
            PathlossModel::LogDistance { intercept_db, slope_db } => check(
                intercept_db.is_finite() && slope_db.is_finite(),
                "pathloss intercept/slope must be finite".into(),
            ),
            PathlossModel::PowerLaw { exponent } => {
                check(finite_pos(exponent), "pathloss exponent must be > 0".into())
            }
        }
        if let QuantizerBits::Bits(b) = self.quantizer_bits {
            check(b >= 1, "quantizer_bits must be >= 1 or \"infinite\"".into());
        }
        check(self.mc_drops >= 1, "mc_drops must be >= 1".into());
        check(self.mc_realizations >= 1, "mc_realizations must be >= 1".into());
        check(self.quadrature_nodes >= 2, "quadrature_nodes must be >= 2".into());
        check(self.proxy_realizations >= 1, "proxy_realizations must be >= 1".into());
        check(!self.schemes.is_empty(), "schemes must not be empty".into());
        check(!self.links.is_empty(), "links must not be empty".into());
        check(
            self.deployment != DeploymentMode::File || self.partition_file.is_some(),
            "deployment = \"file\" requires partition_file".into(),
        );
        check(
            self.association != AssociationMode::File || self.association_file.is_some(),
            "association = \"file\" requires association_file".into(),
        );
        out.extend(self.ga.issues());
        out.extend(self.ql.issues());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_defaults_are_valid() {
        let c = ScenarioConfig::default();
        assert!(c.issues().is_empty(), "{:?}", c.issues());
        assert_eq!(c.num_oru, 100);
        assert_eq!(c.antennas_per_oru, 4);
        assert_eq!(c.num_ue, 24);
        assert_eq!(c.pilot_count, 24);
        assert_eq!(c.ul_power_mw, 200.0);
        assert_eq!(c.antenna_height_m, 10.0);
        assert_eq!(c.bandwidth_hz, 20e6);
        assert_eq!(c.carrier_hz, 2e9);
        assert_eq!(c.noise_psd_dbm_hz, -174.0);
        assert!(ScenarioConfig::desk().issues().is_empty());
    }

    #[test]
    fn pilot_shortage_is_reported() {
        let c = ScenarioConfig {
            num_ue: 25,
            pilot_count: 24,
            ..Default::default()
        };
        let issues = c.issues();
        assert!(issues.iter().any(|m| m.contains("pilot shortage")), "{issues:?}");
    }

    #[test]
    fn zero_edus_rejected_and_all_issues_listed() {
        let c = ScenarioConfig {
            num_edu: 0,
            ul_power_mw: 0.0,
            mc_drops: 0,
            ..Default::default()
        };
        let issues = c.issues();
        assert!(issues.iter().any(|m| m.contains("num_edu")));
        assert!(issues.iter().any(|m| m.contains("ul_power_mw")));
        assert!(issues.iter().any(|m| m.contains("mc_drops")));
        assert!(matches!(c.validated(), Err(Error::InvalidConfig(v)) if v.len() >= 3));
    }

    #[test]
    fn noise_power_matches_band() {
        let c = ScenarioConfig::default();
        let dbm = 10.0 * c.noise_power_mw().log10();
        assert!((dbm - (-174.0 + 73.0103)).abs() < 1e-3);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ScenarioConfig::desk();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);

        let partial = r#"
            num_oru = 16
            num_ue = 4
            quantizer_bits = 8
            schemes = ["joint-mmse", "edu-mmse"]
            [pathloss]
            model = "power-law"
            exponent = 3.5
        "#;
        let p = ScenarioConfig::from_toml_str(partial).unwrap();
        assert_eq!(p.num_ue, 4);
        assert_eq!(p.quantizer_bits, QuantizerBits::Bits(8));
        assert_eq!(p.schemes, vec![Scheme::JointMmse, Scheme::EduMmse]);
        assert_eq!(p.pathloss, PathlossModel::PowerLaw { exponent: 3.5 });
        assert_eq!(p.antennas_per_oru, 4);
    }

    #[test]
    fn unknown_fields_and_bad_tags_are_parse_errors() {
        assert!(matches!(
            ScenarioConfig::from_toml_str("nonsense = 3"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_toml_str("schemes = [\"bogus\"]"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_toml_str("quantizer_bits = \"lots\""),
            Err(Error::Parse(_))
        ));
    }
}
