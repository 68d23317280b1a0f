//! Combiners, precoders and SINR evaluation for every transceiver scheme.

mod combiner;
mod quantizer;
mod scheme;
mod serving;
mod sinr;

pub use combiner::{
    combiners, mmse_combiner_dense, mmse_combiners, mrc_combiners, normalize_precoders,
    MmseContext, ProcessingPlan, SinrForm, CONDITION_LIMIT,
};
pub use quantizer::{quantize, quantizer_step, QuantizerBits, CLIP_RMS};
pub use scheme::{Grouping, Link, Processing, Scheme};
pub use serving::Association;
pub use sinr::{
    downlink_sinr, se_from_sinr, uplink_sinr, DownlinkAccumulator, DownlinkOutcome, SinrReport,
    UeSinr, UplinkAccumulator,
};
