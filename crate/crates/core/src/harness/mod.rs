//! Data generation, metrics, file formats and experiment drivers.

pub mod bench;
pub mod image;
pub mod io;
pub mod metrics;
pub mod phase;
pub mod synth;

pub use bench::{bench_sizes, fit_exponent, BenchPath, BenchRow};
pub use image::{image_to_tensor, load_png, save_png, tensor_to_image};
pub use io::{
    load_mask, load_tensor, read_mask, read_tensor, save_mask, save_tensor, write_mask,
    write_tensor,
};
pub use metrics::{psnr, relerr, Metrics};
pub use phase::{phase_sweep, write_phase_csv, PhaseCell, PhaseSpec};
pub use synth::{gen_synthetic, sample_uniform, SynthSpec};
