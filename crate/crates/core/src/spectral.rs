//! Fourier-domain representation of a tensor along its tubes.
//!
//! The forward transform is the unnormalized DFT along the third mode and
//! the inverse divides by `n3`, so `‖A‖_F² = (1/n3) Σ_i ‖Ā_i‖_F²`.
//!
//! Spectra of real tensors are conjugate-symmetric, `Ā_i = conj(Ā_{n3−i})`
//! in 0-based indexing, so most routines only compute the first
//! [`half_len`] slices and mirror the rest.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tensor::{Shape, Tensor3};

/// Number of Fourier slices that determine a real spectrum: `⌊n3/2⌋ + 1`.
pub fn half_len(n3: usize) -> usize {
    n3 / 2 + 1
}

/// 0-based index of the conjugate partner of Fourier slice `i`.
pub fn mirror_index(i: usize, n3: usize) -> usize {
    (n3 - i) % n3
}

/// The `n3` complex frontal slices `Ā_i` of a tensor's tube-wise DFT.
#[derive(Clone, Debug)]
pub struct SpectralSlices {
    shape: Shape,
    slices: Vec<CMat>,
}

impl SpectralSlices {
    pub fn new(shape: Shape, slices: Vec<CMat>) -> Result<Self> {
        if slices.len() != shape.n3 || slices.iter().any(|s| s.shape() != (shape.n1, shape.n2)) {
            return Err(Error::DimensionMismatch(format!(
                "spectral slices do not form a {shape} spectrum"
            )));
        }
        Ok(SpectralSlices { shape, slices })
    }

    /// Builds the full spectrum from its first [`half_len`] slices by
    /// conjugate mirroring.
    pub fn from_half(shape: Shape, half: Vec<CMat>) -> Result<Self> {
        let h = half_len(shape.n3);
        if half.len() != h {
            return Err(Error::DimensionMismatch(format!(
                "expected {h} half-spectrum slices for n3 = {}, got {}",
                shape.n3,
                half.len()
            )));
        }
        let mut slices = half;
        for i in h..shape.n3 {
            let m = slices[mirror_index(i, shape.n3)].map(|z| z.conj());
            slices.push(m);
        }
        SpectralSlices::new(shape, slices)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn slices(&self) -> &[CMat] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &CMat {
        &self.slices[i]
    }

    pub fn into_slices(self) -> Vec<CMat> {
        self.slices
    }

    /// Keeps only the first [`half_len`] slices.
    pub fn into_half(mut self) -> Vec<CMat> {
        self.slices.truncate(half_len(self.shape.n3));
        self.slices
    }

    /// Squared Frobenius norm of `bdiag(Ā)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }
}

/// Unnormalized DFT along every tube.
pub fn fft_tubes(t: &Tensor3) -> SpectralSlices {
    let shape = t.shape();
    let (n3, m) = (shape.n3, shape.slice_len());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n3);
    let data = t.as_slice();
    let mut buf = vec![Complex64::new(0.0, 0.0); m * n3];
    for (k, slab) in data.chunks_exact(m.max(1)).enumerate().take(n3) {
        for (p, &v) in slab.iter().enumerate() {
            buf[p * n3 + k] = Complex64::new(v, 0.0);
        }
    }
    if m > 0 {
        fft.process(&mut buf);
    }
    let slices = (0..n3)
        .map(|k| CMat::from_fn(shape.n1, shape.n2, |i, j| buf[(i + j * shape.n1) * n3 + k]))
        .collect();
    SpectralSlices { shape, slices }
}

/// Inverse tube DFT (divides by `n3`) followed by the real-part projection.
///
/// Fails with [`Error::ImaginaryResidue`] when the largest imaginary part
/// exceeds `1e-8 (1 + max |re|)`, which indicates a spectrum that did not
/// come from a real tensor.
pub fn ifft_tubes(s: &SpectralSlices) -> Result<Tensor3> {
    let shape = s.shape;
    let (n3, m) = (shape.n3, shape.slice_len());
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n3);
    let scale = 1.0 / n3 as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); m * n3];
    for (k, sl) in s.slices.iter().enumerate() {
        for (p, &z) in sl.as_slice().iter().enumerate() {
            buf[p * n3 + k] = z;
        }
    }
    if m > 0 {
        ifft.process(&mut buf);
    }
    let mut data = vec![0.0; shape.len()];
    let (mut max_im, mut max_re) = (0.0f64, 0.0f64);
    for (p, tube) in buf.chunks_exact(n3).enumerate() {
        for (k, b) in tube.iter().enumerate() {
            let re = b.re * scale;
            max_im = max_im.max((b.im * scale).abs());
            max_re = max_re.max(re.abs());
            data[p + k * m] = re;
        }
    }
    let bound = 1e-8 * (1.0 + max_re);
    if !(max_im <= bound) {
        return Err(Error::ImaginaryResidue {
            max_imag: max_im,
            bound,
        });
    }
    Tensor3::from_vec(shape, data)
}

/// Inverse transform of a spectrum given by its first [`half_len`] slices.
pub fn ifft_half(shape: Shape, half: Vec<CMat>) -> Result<Tensor3> {
    ifft_tubes(&SpectralSlices::from_half(shape, half)?)
}

/// Forward transform keeping only the first [`half_len`] slices.
pub fn fft_half(t: &Tensor3) -> Vec<CMat> {
    fft_tubes(t).into_half()
}
