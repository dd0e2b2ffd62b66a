use rand::Rng;
use serde::Serialize;

use crate::decomp::DecompCaps;
use crate::error::{Error, Result};
use crate::graph::DEFAULT_JOIN_CAP;
use crate::lp::LpMode;

/// Default target factor.
pub const DEFAULT_ALPHA: f64 = 2.097;
/// Approximation factor of the best known prize-collecting TSP algorithm,
/// used as an analysis constant.
pub const BETA_PC: f64 = 1.599;

/// Derived constants of the main algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Constants {
    pub alpha: f64,
    pub theta: f64,
    pub sigma0: f64,
    pub beta: f64,
}

/// `theta = 1 - 1/alpha`, `sigma0` the root of `alpha (1 - s) = e^{-s}` on
/// `(0, 1)` (bisection to `1e-12`) and `beta = 1 / (3 sigma0 - theta)`.
pub fn compute_constants(alpha: f64) -> Result<Constants> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    let sigma0 = bisect(|s| alpha * (1.0 - s) - (-s).exp(), 0.0, 1.0, 1e-12);
    let theta = 1.0 - 1.0 / alpha;
    Ok(Constants {
        alpha,
        theta,
        sigma0,
        beta: 1.0 / (3.0 * sigma0 - theta),
    })
}

/// Root of a function that is positive at `lo` and negative at `hi`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Size caps for the exact subroutines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub join: usize,
    pub decomp: DecompCaps,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            join: DEFAULT_JOIN_CAP,
            decomp: DecompCaps::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Params {
    pub constants: Constants,
    pub beta_pc: f64,
    pub seed: u64,
    pub trials: usize,
    pub caps: Caps,
    pub lp_mode: LpMode,
}

impl Params {
    pub fn new(alpha: f64) -> Result<Params> {
        Ok(Params {
            constants: compute_constants(alpha)?,
            beta_pc: BETA_PC,
            seed: 0,
            trials: 1,
            caps: Caps::default(),
            lp_mode: LpMode::CuttingPlane,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn gamma_dist(&self) -> ThresholdDist {
        ThresholdDist::gamma(&self.constants)
    }

    pub fn sigma_dist(&self) -> ThresholdDist {
        ThresholdDist::sigma(self.constants.alpha, self.constants.sigma0)
    }
}

impl Default for Params {
    fn default() -> Self {
        Params::new(DEFAULT_ALPHA).expect("default alpha is valid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    /// `(1 - a (1 - y)) / (1 - e^{-y})`
    Gamma { alpha: f64 },
    /// `1 - a (1 - y) e^y`
    Sigma { factor: f64 },
}

/// A threshold distribution on `[lo, hi]` given by its CDF, sampled by
/// inverting the CDF with bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdDist {
    shape: Shape,
    pub lo: f64,
    pub hi: f64,
}

impl ThresholdDist {
    /// Pruning threshold on `[theta, sigma0]`.
    pub fn gamma(c: &Constants) -> Self {
        ThresholdDist {
            shape: Shape::Gamma { alpha: c.alpha },
            lo: c.theta,
            hi: c.sigma0,
        }
    }

    /// Pickup threshold on `[lower, 1]` with `factor * (1 - lower) = e^{-lower}`.
    pub fn sigma(factor: f64, lower: f64) -> Self {
        ThresholdDist {
            shape: Shape::Sigma { factor },
            lo: lower,
            hi: 1.0,
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= self.lo {
            return 0.0;
        }
        if y >= self.hi {
            return 1.0;
        }
        let v = match self.shape {
            Shape::Gamma { alpha } => (1.0 - alpha * (1.0 - y)) / (1.0 - (-y).exp()),
            Shape::Sigma { factor } => 1.0 - factor * (1.0 - y) * y.exp(),
        };
        v.clamp(0.0, 1.0)
    }

    /// Density on the open interval.
    pub fn density(&self, y: f64) -> f64 {
        if y <= self.lo || y >= self.hi {
            return 0.0;
        }
        match self.shape {
            Shape::Gamma { alpha } => {
                let d = 1.0 - (-y).exp();
                (alpha * d - (1.0 - alpha * (1.0 - y)) * (-y).exp()) / (d * d)
            }
            Shape::Sigma { factor } => factor * y * y.exp(),
        }
    }

    /// Smallest `y` with `cdf(y) >= u`, by 60 bisection steps.
    pub fn inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lo;
        }
        if u >= 1.0 {
            return self.hi;
        }
        let (mut lo, mut hi) = (self.lo, self.hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse(rng.gen::<f64>())
    }
}

/// Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Result of scanning `g(y) = Pr[gamma <= y] (2 - 2 beta y)` on `[theta, sigma0]`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GScan {
    pub points: usize,
    pub g_theta: f64,
    pub g_sigma0: f64,
    pub argmax: f64,
    pub max: f64,
    /// Largest decrease between consecutive grid points (0 if nondecreasing).
    pub max_drop: f64,
    pub nondecreasing: bool,
}

pub fn g_value(c: &Constants, y: f64) -> f64 {
    ThresholdDist::gamma(c).cdf(y) * (2.0 - 2.0 * c.beta * y)
}

/// Evaluates `g` on a `10^4`-point grid.
pub fn scan_g(c: &Constants) -> GScan {
    let points = 10_000;
    let step = (c.sigma0 - c.theta) / (points - 1) as f64;
    let ys: Vec<f64> = (0..points)
        .map(|i| {
            if i + 1 == points {
                c.sigma0
            } else {
                c.theta + step * i as f64
            }
        })
        .collect();
    let gs: Vec<f64> = ys.iter().map(|&y| g_value(c, y)).collect();
    let (imax, &max) = gs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("nonempty grid");
    let max_drop = gs.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    GScan {
        points,
        g_theta: gs[0],
        g_sigma0: gs[points - 1],
        argmax: ys[imax],
        max,
        max_drop,
        nondecreasing: max_drop <= 1e-9,
    }
}

/// Closed-form bound on the expected tour cost in units of the LP
/// connection cost, as a function of `alpha` and the PCTSP factor.
pub fn tour_factor(alpha: f64, beta_pc: f64) -> Result<f64> {
    let Constants { sigma0: s, beta: b, .. } = compute_constants(alpha)?;
    Ok(
        2.0 + beta_pc + b - alpha - (2.0 + 2.0 * beta_pc) * b * s
            + 2.0 * alpha * b * s
            + (-s).exp()
            + alpha / (4.0 * b)
            - alpha * s
            + alpha * b * s * s,
    )
}

/// `rho_v = e^{-y} / (1 - y)`, the worst-case miss probability relative to
/// the fractional penalty.
pub fn penalty_ratio(y: f64) -> f64 {
    (-y).exp() / (1.0 - y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_at_default_alpha() {
        let c = compute_constants(2.097).unwrap();
        assert!((c.sigma0 - 0.781790).abs() < 1e-5);
        assert!((c.beta - 0.548775).abs() < 1e-5);
        assert!((c.theta - (1.0 - 1.0 / 2.097)).abs() < 1e-15);
        assert!(c.theta < c.sigma0 && c.sigma0 < 1.0);
        assert!(compute_constants(1.0).is_err());
    }

    #[test]
    fn cdf_endpoints() {
        let c = compute_constants(2.097).unwrap();
        let g = ThresholdDist::gamma(&c);
        let s = ThresholdDist::sigma(c.alpha, c.sigma0);
        assert_eq!(g.inverse(0.0), c.theta);
        assert_eq!(g.inverse(1.0), c.sigma0);
        assert_eq!(s.inverse(0.0), c.sigma0);
        assert_eq!(s.inverse(1.0), 1.0);
        // closed forms, evaluated without the clamping in `cdf`
        let fg = |y: f64| (1.0 - c.alpha * (1.0 - y)) / (1.0 - (-y).exp());
        let fs = |y: f64| 1.0 - c.alpha * (1.0 - y) * y.exp();
        assert!(fg(c.theta).abs() < 1e-12);
        assert!((fg(c.sigma0) - 1.0).abs() < 1e-9);
        assert!(fs(c.sigma0).abs() < 1e-9);
        assert!((fs(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_density_matches_finite_difference() {
        let c = compute_constants(2.097).unwrap();
        let s = ThresholdDist::sigma(c.alpha, c.sigma0);
        let h = 1e-6;
        let fd = (s.cdf(0.9 + h) - s.cdf(0.9 - h)) / (2.0 * h);
        assert!((fd - c.alpha * 0.9 * 0.9f64.exp()).abs() < 1e-6);
        let g = ThresholdDist::gamma(&c);
        let y = 0.65;
        let fd = (g.cdf(y + h) - g.cdf(y - h)) / (2.0 * h);
        assert!((fd - g.density(y)).abs() < 1e-6);
    }

    #[test]
    fn samples_pass_ks() {
        let c = compute_constants(2.097).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [ThresholdDist::gamma(&c), ThresholdDist::sigma(c.alpha, c.sigma0)] {
            let xs: Vec<f64> = (0..20_000).map(|_| d.sample(&mut rng)).collect();
            assert!(xs.iter().all(|&x| x >= d.lo && x <= d.hi));
            assert!(ks_distance(&xs, |y| d.cdf(y)) < 0.015);
        }
    }

    #[test]
    fn g_scan_peaks_at_sigma0() {
        let c = compute_constants(2.097).unwrap();
        let scan = scan_g(&c);
        assert_eq!(scan.g_theta, 0.0);
        assert!((scan.g_sigma0 - 2.0 * (1.0 - c.beta * c.sigma0)).abs() < 1e-9);
        assert!((scan.g_sigma0 - 1.141947).abs() < 1e-5);
        assert!(scan.nondecreasing);
        assert_eq!(scan.argmax, c.sigma0);
    }

    #[test]
    fn tour_factor_near_alpha() {
        // the two terms of the guarantee cross close to the default alpha
        let f = tour_factor(2.097, BETA_PC).unwrap();
        assert!((f - 2.097).abs() < 2e-3, "{f}");
    }
}
