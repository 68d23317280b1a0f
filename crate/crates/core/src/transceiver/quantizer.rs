//! Uniform mid-rise quantizer applied to detected symbols on the EDU to UCDU link.

use serde::{Deserialize, Serialize};

use crate::C64;

/// Clipping range of the quantizer, in RMS units of the batch.
pub const CLIP_RMS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawBits", into = "RawBits")]
pub enum QuantizerBits {
    #[default]
    Infinite,
    Bits(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawBits {
    Bits(i64),
    Word(String),
}

impl TryFrom<RawBits> for QuantizerBits {
    type Error = String;

    fn try_from(raw: RawBits) -> Result<Self, String> {
        match raw {
            RawBits::Bits(b) if (1..=52).contains(&b) => Ok(QuantizerBits::Bits(b as u32)),
            RawBits::Bits(b) => Err(format!("quantizer_bits must be in 1..=52, got {b}")),
            RawBits::Word(w) if w == "infinite" => Ok(QuantizerBits::Infinite),
            RawBits::Word(w) => Err(format!("quantizer_bits must be an integer or \"infinite\", got {w:?}")),
        }
    }
}

impl From<QuantizerBits> for RawBits {
    fn from(q: QuantizerBits) -> Self {
        match q {
            QuantizerBits::Infinite => RawBits::Word("infinite".into()),
            QuantizerBits::Bits(b) => RawBits::Bits(b as i64),
        }
    }
}

impl std::str::FromStr for QuantizerBits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "infinite" || s == "inf" {
            return Ok(QuantizerBits::Infinite);
        }
        let b: i64 = s.parse().map_err(|_| format!("invalid quantizer bits {s:?}"))?;
        QuantizerBits::try_from(RawBits::Bits(b))
    }
}

fn quantize_component(x: f64, step: f64, limit: f64) -> f64 {
    let q = step * ((x / step).floor() + 0.5);
    q.clamp(-limit, limit)
}

/// Quantizes real and imaginary parts separately with `2^bits` levels over
/// `+-CLIP_RMS * rms`, where `rms` is the per-component root mean square of the batch.
pub fn quantize(samples: &[C64], bits: QuantizerBits) -> Vec<C64> {
    let QuantizerBits::Bits(b) = bits else {
        return samples.to_vec();
    };
    if samples.is_empty() {
        return Vec::new();
    }
    let n = samples.len() as f64;
    let rms_re = (samples.iter().map(|z| z.re * z.re).sum::<f64>() / n).sqrt();
    let rms_im = (samples.iter().map(|z| z.im * z.im).sum::<f64>() / n).sqrt();
    let levels = 2f64.powi(b as i32);
    let axis = |rms: f64| -> Option<(f64, f64)> {
        (rms > 0.0).then(|| {
            let range = CLIP_RMS * rms;
            let step = 2.0 * range / levels;
            (step, range - step / 2.0)
        })
    };
    let re_axis = axis(rms_re);
    let im_axis = axis(rms_im);
    samples
        .iter()
        .map(|z| {
            let re = re_axis.map_or(0.0, |(s, lim)| quantize_component(z.re, s, lim));
            let im = im_axis.map_or(0.0, |(s, lim)| quantize_component(z.im, s, lim));
            C64::new(re, im)
        })
        .collect()
}

/// Quantization step for a batch: `2 * CLIP_RMS * rms / 2^bits` per component.
pub fn quantizer_step(samples: &[C64], bits: u32) -> (f64, f64) {
    let n = samples.len().max(1) as f64;
    let rms_re = (samples.iter().map(|z| z.re * z.re).sum::<f64>() / n).sqrt();
    let rms_im = (samples.iter().map(|z| z.im * z.im).sum::<f64>() / n).sqrt();
    let levels = 2f64.powi(bits as i32);
    (2.0 * CLIP_RMS * rms_re / levels, 2.0 * CLIP_RMS * rms_im / levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn infinite_is_identity() {
        let xs = vec![C64::new(0.3, -1.2), C64::new(5.0, 0.0)];
        assert_eq!(quantize(&xs, QuantizerBits::Infinite), xs);
    }

    #[test]
    fn constant_input_within_half_step() {
        let xs = vec![C64::new(0.7, -0.2); 16];
        for b in [1, 2, 4, 8] {
            let q = quantize(&xs, QuantizerBits::Bits(b));
            let (sr, si) = quantizer_step(&xs, b);
            for (a, z) in xs.iter().zip(&q) {
                assert!((a.re - z.re).abs() <= sr / 2.0 + 1e-15);
                assert!((a.im - z.im).abs() <= si / 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn parses_config_forms() {
        assert_eq!("infinite".parse::<QuantizerBits>().unwrap(), QuantizerBits::Infinite);
        assert_eq!("12".parse::<QuantizerBits>().unwrap(), QuantizerBits::Bits(12));
        assert!("0".parse::<QuantizerBits>().is_err());
        assert!("x".parse::<QuantizerBits>().is_err());
    }

    proptest! {
        #[test]
        fn in_range_error_bounded(vals in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..64), bits in 1u32..16) {
            let xs: Vec<C64> = vals.iter().map(|&(a, b)| C64::new(a, b)).collect();
            let q = quantize(&xs, QuantizerBits::Bits(bits));
            let (sr, si) = quantizer_step(&xs, bits);
            let levels = 2f64.powi(bits as i32);
            let (range_re, range_im) = (sr * levels / 2.0, si * levels / 2.0);
            for (a, z) in xs.iter().zip(&q) {
                // Inside the clipping range the error is at most half a step.
                if a.re.abs() <= range_re - sr / 2.0 {
                    prop_assert!((a.re - z.re).abs() <= sr / 2.0 + 1e-12);
                }
                if a.im.abs() <= range_im - si / 2.0 {
                    prop_assert!((a.im - z.im).abs() <= si / 2.0 + 1e-12);
                }
                prop_assert!(z.re.abs() <= range_re && z.im.abs() <= range_im);
            }
        }
    }
}
