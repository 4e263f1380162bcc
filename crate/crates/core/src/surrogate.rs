//! Nondecreasing nonnegative penalties applied to singular values, and their
//! scalar proximal operator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurrogateKind {
    /// `g(x) = x`; recovers the tensor nuclear norm.
    Identity,
    /// `g(x) = x^p`.
    Lp,
    /// `g(x) = x / (x + γ)`.
    Geman,
    /// `g(x) = 1 − exp(−x/γ)`.
    Laplace,
    /// `g(x) = log(γ + x)`.
    Log,
    /// `g(x) = log(γx + 1) / log(γ + 1)`.
    Logarithm,
    /// `g(x) = (1 − exp(−γx)) / (1 − exp(−γ))`.
    Etp,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 7] = [
        SurrogateKind::Identity,
        SurrogateKind::Lp,
        SurrogateKind::Geman,
        SurrogateKind::Laplace,
        SurrogateKind::Log,
        SurrogateKind::Logarithm,
        SurrogateKind::Etp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateKind::Identity => "identity",
            SurrogateKind::Lp => "lp",
            SurrogateKind::Geman => "geman",
            SurrogateKind::Laplace => "laplace",
            SurrogateKind::Log => "log",
            SurrogateKind::Logarithm => "logarithm",
            SurrogateKind::Etp => "etp",
        }
    }
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurrogateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SurrogateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown surrogate '{s}'")))
    }
}

pub const DEFAULT_P: f64 = 0.8;
pub const DEFAULT_GAMMA: f64 = 1.0;

/// A penalty `g` with its parameters. `p` is only read by [`SurrogateKind::Lp`],
/// `gamma` by the γ-parameterized kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateSpec {
    kind: SurrogateKind,
    p: f64,
    gamma: f64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec::lp(DEFAULT_P).expect("default p is valid")
    }
}

impl fmt::Display for SurrogateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SurrogateKind::Identity => write!(f, "identity"),
            SurrogateKind::Lp => write!(f, "lp(p={})", self.p),
            k => write!(f, "{k}(gamma={})", self.gamma),
        }
    }
}

impl SurrogateSpec {
    /// Validates the parameters for `kind`: `p ∈ (0, 1]`, `γ > 0`, and
    /// `γ ≥ 1` for [`SurrogateKind::Log`] so that `g(0) = log γ ≥ 0`.
    pub fn new(kind: SurrogateKind, p: f64, gamma: f64) -> Result<Self> {
        if kind == SurrogateKind::Lp && !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lp exponent p = {p} not in (0, 1]"
            )));
        }
        let uses_gamma = !matches!(kind, SurrogateKind::Identity | SurrogateKind::Lp);
        if uses_gamma && !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must be positive"
            )));
        }
        if kind == SurrogateKind::Log && gamma < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "log surrogate needs gamma >= 1 for a nonnegative penalty, got {gamma}"
            )));
        }
        Ok(SurrogateSpec { kind, p, gamma })
    }

    pub fn with_defaults(kind: SurrogateKind) -> Self {
        SurrogateSpec::new(kind, DEFAULT_P, DEFAULT_GAMMA).expect("defaults are valid")
    }

    pub fn identity() -> Self {
        SurrogateSpec::with_defaults(SurrogateKind::Identity)
    }

    pub fn lp(p: f64) -> Result<Self> {
        SurrogateSpec::new(SurrogateKind::Lp, p, DEFAULT_GAMMA)
    }

    pub fn kind(&self) -> SurrogateKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `g(x)` for `x ≥ 0`.
    pub fn g_eval(&self, x: f64) -> Result<f64> {
        check_nonnegative("g", x)?;
        Ok(self.value(x))
    }

    /// `g'(x)` for `x > 0`.
    pub fn g_deriv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain {
                what: "g'",
                value: x,
            });
        }
        Ok(self.deriv(x))
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        let g = self.gamma;
        match self.kind {
            SurrogateKind::Identity => x,
            SurrogateKind::Lp => x.powf(self.p),
            SurrogateKind::Geman => x / (x + g),
            SurrogateKind::Laplace => -(-x / g).exp_m1(),
            SurrogateKind::Log => (g + x).ln(),
            SurrogateKind::Logarithm => (g * x).ln_1p() / g.ln_1p(),
            SurrogateKind::Etp => (-g * x).exp_m1() / (-g).exp_m1(),
        }
    }

    pub(crate) fn deriv(&self, x: f64) -> f64 {
        let g = self.gamma;
        match self.kind {
            SurrogateKind::Identity => 1.0,
            SurrogateKind::Lp => self.p * x.powf(self.p - 1.0),
            SurrogateKind::Geman => g / ((x + g) * (x + g)),
            SurrogateKind::Laplace => (-x / g).exp() / g,
            SurrogateKind::Log => 1.0 / (g + x),
            SurrogateKind::Logarithm => g / ((g * x + 1.0) * g.ln_1p()),
            SurrogateKind::Etp => -g * (-g * x).exp() / (-g).exp_m1(),
        }
    }

    fn second_deriv(&self, x: f64) -> f64 {
        let g = self.gamma;
        match self.kind {
            SurrogateKind::Identity => 0.0,
            SurrogateKind::Lp => self.p * (self.p - 1.0) * x.powf(self.p - 2.0),
            SurrogateKind::Geman => -2.0 * g / (x + g).powi(3),
            SurrogateKind::Laplace => -(-x / g).exp() / (g * g),
            SurrogateKind::Log => -1.0 / ((g + x) * (g + x)),
            SurrogateKind::Logarithm => -g * g / ((g * x + 1.0).powi(2) * g.ln_1p()),
            SurrogateKind::Etp => g * g * (-g * x).exp() / (-g).exp_m1(),
        }
    }

    /// `argmin_{x ≥ 0} ½(x − σ)² + τ g(x)`.
    ///
    /// Ties between `0` and an interior point resolve to `0`.
    pub fn prox(&self, sigma: f64, tau: f64) -> Result<f64> {
        if !sigma.is_finite() || !tau.is_finite() {
            return Err(Error::NonFinite("prox arguments"));
        }
        check_nonnegative("prox sigma", sigma)?;
        check_nonnegative("prox tau", tau)?;
        Ok(self.prox_unchecked(sigma, tau))
    }

    pub(crate) fn prox_unchecked(&self, sigma: f64, tau: f64) -> f64 {
        if tau == 0.0 || sigma == 0.0 {
            return sigma;
        }
        if self.kind == SurrogateKind::Identity {
            return (sigma - tau).max(0.0);
        }
        let objective = |x: f64| 0.5 * (x - sigma) * (x - sigma) + tau * self.value(x);
        let mut best = (0.0, objective(0.0));
        for x in self.stationary_points(sigma, tau) {
            let f = objective(x);
            if f < best.1 {
                best = (x, f);
            }
        }
        best.0
    }

    /// Roots of `h(x) = x − σ + τ g'(x)` on `(0, σ]`, plus `σ` itself.
    fn stationary_points(&self, sigma: f64, tau: f64) -> Vec<f64> {
        const GRID: usize = 64;
        const DECADES: f64 = 12.0;
        let h = |x: f64| x - sigma + tau * self.deriv(x);
        let grid: Vec<f64> = (0..GRID)
            .map(|j| sigma * 10f64.powf(-DECADES * (1.0 - j as f64 / (GRID - 1) as f64)))
            .collect();
        let hv: Vec<f64> = grid.iter().map(|&x| h(x)).collect();

        let mut roots = vec![sigma];
        let mut bracketed = false;
        for j in 0..GRID - 1 {
            if (hv[j] <= 0.0) != (hv[j + 1] <= 0.0) {
                roots.push(self.polish_root(sigma, tau, grid[j], grid[j + 1]));
                bracketed = true;
            }
        }
        if !bracketed {
            // h is convex for every supported kind; a dip below zero that falls
            // between two grid points is found by minimizing h near the grid
            // minimum.
            let jmin = (0..GRID).min_by(|&a, &b| hv[a].total_cmp(&hv[b])).unwrap();
            let lo = grid[jmin.saturating_sub(1)];
            let hi = grid[(jmin + 1).min(GRID - 1)];
            let xm = golden_min(&h, lo, hi);
            if h(xm) < 0.0 {
                if h(lo) > 0.0 {
                    roots.push(self.polish_root(sigma, tau, lo, xm));
                }
                if h(hi) > 0.0 {
                    roots.push(self.polish_root(sigma, tau, xm, hi));
                }
            }
        }
        roots
    }

    /// Safeguarded Newton–bisection on a sign-changing bracket of `h`.
    fn polish_root(&self, sigma: f64, tau: f64, a: f64, b: f64) -> f64 {
        let h = |x: f64| x - sigma + tau * self.deriv(x);
        let (mut lo, mut hi) = (a, b);
        let neg_at_lo = h(lo) <= 0.0;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let hx = h(x);
            if hx == 0.0 {
                return x;
            }
            if (hx <= 0.0) == neg_at_lo {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 1e-12 * hi.max(1e-300) {
                break;
            }
            let dh = 1.0 + tau * self.second_deriv(x);
            let newton = x - hx / dh;
            x = if dh != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

fn check_nonnegative(what: &'static str, x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if b - a <= 1e-14 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<SurrogateSpec> {
        SurrogateKind::ALL
            .into_iter()
            .map(SurrogateSpec::with_defaults)
            .collect()
    }

    /// Exhaustive grid minimizer of the scalar objective on `[0, hi]`.
    fn grid_argmin(s: &SurrogateSpec, sigma: f64, tau: f64, hi: f64, step: f64) -> (f64, f64) {
        let n = (hi / step).round() as usize;
        (0..=n)
            .map(|j| {
                let x = j as f64 * step;
                (x, 0.5 * (x - sigma).powi(2) + tau * s.value(x))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }

    #[test]
    fn table_values() {
        assert!((SurrogateSpec::lp(0.5).unwrap().g_eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        let geman = SurrogateSpec::new(SurrogateKind::Geman, 0.8, 1.0).unwrap();
        assert!((geman.g_eval(1.0).unwrap() - 0.5).abs() < 1e-15);
        let e1 = std::f64::consts::E - 1.0;
        let log = SurrogateSpec::new(SurrogateKind::Logarithm, 0.8, e1).unwrap();
        assert!((log.g_eval(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_differences() {
        for s in all_specs() {
            for x in [0.1, 1.0, 10.0] {
                let h = 1e-5 * x;
                let fd = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
                let d = s.g_deriv(x).unwrap();
                assert!(
                    (fd - d).abs() <= 1e-6 * d.abs().max(1e-12),
                    "{s} at {x}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn second_derivative_matches_differences() {
        for s in all_specs() {
            for x in [0.1, 1.0, 3.0] {
                let h = 1e-5 * x;
                let fd = (s.deriv(x + h) - s.deriv(x - h)) / (2.0 * h);
                let d = s.second_deriv(x);
                assert!((fd - d).abs() <= 1e-5 * d.abs().max(1e-9), "{s} at {x}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        let s = SurrogateSpec::default();
        assert!(s.g_eval(-1.0).is_err());
        assert!(s.g_deriv(0.0).is_err());
        assert!(s.prox(-1.0, 1.0).is_err());
        assert!(s.prox(1.0, f64::NAN).is_err());
        assert!(s.prox(f64::INFINITY, 1.0).is_err());
        assert!(SurrogateSpec::lp(0.0).is_err());
        assert!(SurrogateSpec::lp(1.5).is_err());
        assert!(SurrogateSpec::new(SurrogateKind::Geman, 0.8, 0.0).is_err());
        assert!(SurrogateSpec::new(SurrogateKind::Log, 0.8, 0.5).is_err());
    }

    #[test]
    fn parses_kind_names() {
        for k in SurrogateKind::ALL {
            assert_eq!(k.name().parse::<SurrogateKind>().unwrap(), k);
        }
        assert!("bogus".parse::<SurrogateKind>().is_err());
    }

    #[test]
    fn identity_is_soft_thresholding() {
        let s = SurrogateSpec::identity();
        assert_eq!(s.prox(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(s.prox(0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_tau_is_identity_map() {
        for s in all_specs() {
            assert_eq!(s.prox(1.7, 0.0).unwrap(), 1.7);
        }
    }

    #[test]
    fn lp_prox_matches_fine_grid() {
        let s = SurrogateSpec::lp(0.8).unwrap();
        let (xg, _) = grid_argmin(&s, 1.5, 0.3, 1.5, 1e-6);
        let x = s.prox(1.5, 0.3).unwrap();
        assert!((x - xg).abs() < 1e-4, "{x} vs grid {xg}");
    }

    #[test]
    fn lp_half_matches_closed_form_threshold() {
        // Half thresholding: for p = 1/2 the nonzero branch is
        // x = (2/3) σ (1 + cos(2π/3 − 2φ/3)), φ = arccos((λ/8)(|σ|/3)^{-3/2}),
        // with λ = 2τ, active above σ* = (54^{1/3}/4) λ^{2/3}.
        let s = SurrogateSpec::lp(0.5).unwrap();
        let tau: f64 = 0.7;
        let lam: f64 = 2.0 * tau;
        let thresh = 54f64.cbrt() / 4.0 * lam.powf(2.0 / 3.0);
        for sigma in [0.2, 0.9, 1.2, 2.0, 5.0] {
            let expected = if sigma > thresh {
                let phi = (lam / 8.0 * (sigma / 3.0).powf(-1.5)).acos();
                2.0 / 3.0
                    * sigma
                    * (1.0 + (2.0 * std::f64::consts::PI / 3.0 - 2.0 * phi / 3.0).cos())
            } else {
                0.0
            };
            let got = s.prox(sigma, tau).unwrap();
            assert!(
                (got - expected).abs() < 1e-9,
                "sigma {sigma}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn lp_two_thirds_matches_closed_form_threshold() {
        // For p = 2/3 the nonzero branch solves x − σ + (2τ/3) x^{-1/3} = 0;
        // substituting y = x^{1/3} gives y⁴ − σ y + 2τ/3 = 0, whose largest
        // root lies in [(σ/4)^{1/3}, σ^{1/3}] and is located by bisection.
        let s = SurrogateSpec::lp(2.0 / 3.0).unwrap();
        let tau = 0.5;
        for sigma in [0.3, 0.8, 1.0, 2.5, 6.0] {
            let q = |y: f64| y.powi(4) - sigma * y + 2.0 * tau / 3.0;
            let (mut lo, mut hi) = ((sigma / 4.0).cbrt(), sigma.cbrt());
            let interior = if q(lo) < 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if q(mid) < 0.0 {
                        lo = mid
                    } else {
                        hi = mid
                    }
                }
                Some(lo.powi(3))
            } else {
                None
            };
            let f = |x: f64| 0.5 * (x - sigma).powi(2) + tau * x.powf(2.0 / 3.0);
            let expected = match interior {
                Some(x) if f(x) < f(0.0) => x,
                _ => 0.0,
            };
            let got = s.prox(sigma, tau).unwrap();
            assert!(
                (got - expected).abs() < 1e-9,
                "sigma {sigma}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn prox_shrinks_and_is_monotone() {
        for s in all_specs() {
            let mut prev = 0.0;
            for j in 0..400 {
                let sigma = j as f64 * 0.025;
                let x = s.prox(sigma, 0.8).unwrap();
                assert!(x >= 0.0 && x <= sigma + 1e-15, "{s}: {x} vs {sigma}");
                assert!(x + 1e-12 >= prev, "{s} not monotone at {sigma}");
                prev = x;
            }
        }
    }

    #[test]
    fn penalties_are_nonnegative_and_nondecreasing() {
        for s in all_specs() {
            let mut prev = s.value(0.0);
            assert!(prev >= 0.0);
            for j in 1..1000 {
                let v = s.value(j as f64 * 0.05);
                assert!(v >= prev, "{s}");
                prev = v;
            }
        }
    }
}
