//! Gaussian-factor synthetic tensors and uniform observation sampling.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::solver::Observation;
use crate::tensor::{Mask3, Shape, Tensor3};
use crate::tproduct::tprod;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub rank: usize,
    pub sample_rate: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Square `n×n×3` instance.
    pub fn square(n: usize, rank: usize, sample_rate: f64, seed: u64) -> Self {
        SynthSpec {
            n1: n,
            n2: n,
            n3: 3,
            rank,
            sample_rate,
            seed,
        }
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.n1, self.n2, self.n3)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape().validate()?;
        if self.rank == 0 || self.rank > self.shape().min_side() {
            return Err(Error::InvalidParameter(format!(
                "rank {} must lie in [1, {}]",
                self.rank,
                self.shape().min_side()
            )));
        }
        check_rate(self.sample_rate)
    }

    /// Generates the tensor and samples it; the mask uses its own stream.
    pub fn observe(&self) -> Result<(Tensor3, Observation)> {
        let m = gen_synthetic(self)?;
        let obs = sample_uniform(&m, self.sample_rate, mask_seed(self.seed))?;
        Ok((m, obs))
    }
}

/// Mask seed derived from a data seed so both can be driven by one number.
pub fn mask_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn check_rate(c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate {c} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// `M = M1 * M2` with i.i.d. standard normal factors of inner size `rank`.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<Tensor3> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = |s: Shape| Tensor3::from_fn(s, |_, _, _| StandardNormal.sample(&mut rng));
    let a = gauss(Shape::new(spec.n1, spec.rank, spec.n3));
    let b = gauss(Shape::new(spec.rank, spec.n2, spec.n3));
    tprod(&a, &b)
}

/// Observes exactly `round(c · N)` entries chosen uniformly without replacement.
pub fn sample_uniform(m: &Tensor3, c: f64, seed: u64) -> Result<Observation> {
    check_rate(c)?;
    let n = m.shape().len();
    let count = ((c * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![false; n];
    for idx in index::sample(&mut rng, n, count) {
        data[idx] = true;
    }
    Observation::from_full(m, Mask3::from_vec(m.shape(), data)?)
}
