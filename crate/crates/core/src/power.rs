//! Uplink fixed power and the downlink heuristic allocation.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::transceiver::Association;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    pub uplink_mw: Vec<f64>,
    pub downlink_mw: Vec<f64>,
    /// Expected radiated power per O-RU, `sum_{k in D_l} p_k E||w_bar_{k,l}||^2`.
    pub radiated_mw: Vec<f64>,
    /// UEs without any serving O-RU; they get zero downlink power.
    pub excluded: Vec<usize>,
}

impl PowerAllocation {
    /// CSV dump with header `ue_index,ul_mw,dl_mw`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ue_index", "ul_mw", "dl_mw"])?;
        for (k, (ul, dl)) in self.uplink_mw.iter().zip(&self.downlink_mw).enumerate() {
            w.write_record([k.to_string(), format!("{ul:e}"), format!("{dl:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Every UE transmits at `p_fixed` mW.
pub fn uplink_power(num_ue: usize, p_fixed: f64) -> Result<Vec<f64>> {
    if !(p_fixed > 0.0) || !p_fixed.is_finite() {
        return Err(Error::Domain(format!("uplink power must be > 0, got {p_fixed}")));
    }
    Ok(vec![p_fixed; num_ue])
}

/// Downlink powers
///
/// `p_k = p_max * (a_k sqrt(omega_k))^-1 / max_{l in M_k} sum_{i in D_l} sqrt(omega_i) / a_i`
///
/// with `a_k = sqrt(sum_{l in M_k} lambda_{k,l})`. `omega[k]` is `None` for
/// UEs whose precoder vanished; those and UEs with empty `M_k` are excluded.
/// Returns the powers and the excluded UE list.
pub fn downlink_power(
    lambda: &DMatrix<f64>,
    omega: &[Option<f64>],
    association: &Association,
    p_max: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let num_ue = association.num_ue();
    let num_oru = association.num_oru();
    if lambda.shape() != (num_ue, num_oru) || omega.len() != num_ue {
        return Err(Error::Domain("downlink power inputs have mismatched shapes".into()));
    }
    let serving: Vec<Vec<usize>> = (0..num_ue).map(|k| association.serving_orus(k)).collect();
    let mut excluded = Vec::new();
    let mut active = vec![false; num_ue];
    for k in 0..num_ue {
        match (serving[k].is_empty(), omega[k]) {
            (true, _) | (false, None) => {
                log::warn!("UE {k} has no serving O-RU; excluded from downlink");
                excluded.push(k);
            }
            (false, Some(w)) if !(w > 0.0) => {
                return Err(Error::Domain(format!("omega for UE {k} must be positive, got {w}")));
            }
            _ => active[k] = true,
        }
    }
    let a: Vec<f64> = (0..num_ue)
        .map(|k| serving[k].iter().map(|&l| lambda[(k, l)]).sum::<f64>().sqrt())
        .collect();
    let load: Vec<f64> = (0..num_oru)
        .map(|l| {
            (0..num_ue)
                .filter(|&i| active[i] && association.serves(i, l))
                .map(|i| omega[i].unwrap().sqrt() / a[i])
                .sum()
        })
        .collect();
    let powers = (0..num_ue)
        .map(|k| {
            if !active[k] {
                return 0.0;
            }
            let worst = serving[k].iter().map(|&l| load[l]).fold(0.0, f64::max);
            p_max / (a[k] * omega[k].unwrap().sqrt()) / worst
        })
        .collect();
    Ok((powers, excluded))
}

/// Expected radiated power per O-RU given normalised per-O-RU precoder energies
/// `energy[(k, l)] = E||w_bar_{k,l}||^2`.
pub fn radiated_power(powers: &[f64], energy: &DMatrix<f64>, association: &Association) -> Vec<f64> {
    (0..association.num_oru())
        .map(|l| {
            association
                .served_ues(l)
                .into_iter()
                .map(|k| powers[k] * energy[(k, l)])
                .sum()
        })
        .collect()
}
