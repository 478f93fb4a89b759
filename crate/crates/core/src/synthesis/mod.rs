//! Sand-dust degradation synthesis and dataset construction.

mod dataset;
mod model;
mod params;

pub use dataset::{
    build_dataset, regenerate, CorpusPair, DatasetConfig, DatasetManifest, ManifestEntry, ManifestSubset,
    RegenerationSummary, SubsetSpec, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use model::{
    apply_transmission, clamp_field, dust_radiance, inherent_deviation, synthesize, transmission_map, ScatterParams,
    SynthesisResult, TransmissionMap,
};
pub use params::{entry_seed, sample_params, sample_params_in, BetaRange, IntensityClass, Palette};
