//! Network parameters and the analytic distance distributions.
//!
//! `X` is the distance from the reference AP to the nearest co-pilot UE and
//! `Y` the distance from the typical UE to the nearest interfering AP. Both
//! have a finite-window (binomial) form and a Poisson approximation; only
//! the Poisson form of `Y` has a closed expression.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dpx_dx, p_x_ratio};
use crate::numerics::reg_inc_beta;

/// Scalar system parameters. Distances in metres, powers in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Window radius `R`.
    pub radius: f64,
    /// Number of APs `L`.
    pub num_aps: usize,
    /// Number of UEs `K`, including the typical UE.
    pub num_ues: usize,
    /// Number of orthogonal pilots `tau_p`.
    pub num_pilots: usize,
    /// Pathloss exponent `alpha` of `d^-alpha`.
    pub pathloss_exponent: f64,
    /// AP transmit power `rho`.
    pub tx_power: f64,
    /// Noise power `sigma^2`.
    pub noise_power: f64,
    pub kappa: f64,
    pub mu: f64,
    /// Influence-region radius `r`; also the reference link length.
    pub influence_radius: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            radius: 1000.0,
            num_aps: 1000,
            num_ues: 400,
            num_pilots: 10,
            pathloss_exponent: 3.76,
            tx_power: 1.0,
            noise_power: dbm_to_watts(-94.0),
            kappa: 1.0,
            mu: 1.0,
            influence_radius: 100.0,
        }
    }
}

/// `10^((dbm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        fn finite_positive(field: &str, v: f64) -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(
                    field,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
            Ok(())
        }
        finite_positive("R", self.radius)?;
        if self.num_aps < 1 {
            return Err(Error::validation("L", "must be >= 1"));
        }
        if self.num_ues < 1 {
            return Err(Error::validation("K", "must be >= 1"));
        }
        if self.num_pilots < 1 {
            return Err(Error::validation("tau_p", "must be >= 1"));
        }
        if !(self.pathloss_exponent > 1.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::validation(
                "alpha",
                format!(
                    "pathloss exponent must be > 1, got {}",
                    self.pathloss_exponent
                ),
            ));
        }
        finite_positive("rho", self.tx_power)?;
        finite_positive("sigma2", self.noise_power)?;
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::validation(
                "kappa",
                format!("must be >= 1, got {}", self.kappa),
            ));
        }
        if !(1.0..=2.0).contains(&self.mu) {
            return Err(Error::validation(
                "mu",
                format!("must lie in [1, 2], got {}", self.mu),
            ));
        }
        if !(self.influence_radius > 0.0) || self.influence_radius >= self.radius {
            return Err(Error::validation(
                "r",
                format!(
                    "must satisfy 0 < r < R, got r = {} with R = {}",
                    self.influence_radius, self.radius
                ),
            ));
        }
        Ok(())
    }

    pub fn window_area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Signal-to-noise scale `rho / sigma^2`.
    pub fn snr_scale(&self) -> f64 {
        self.tx_power / self.noise_power
    }

    /// Co-pilot count used when comparing the binomial and Poisson forms: `K / tau_p` rounded.
    pub fn nominal_copilots(&self) -> usize {
        ((self.num_ues as f64 / self.num_pilots as f64).round() as usize).max(1)
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        derive(self)
    }
}

/// Intensities and thresholds computed once per configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub lambda_ap: f64,
    pub lambda_ue: f64,
    /// Co-pilot UE intensity `lambda_ue / tau_p`.
    pub lambda_0: f64,
    /// Probability that an AP lies in the influence region of some co-pilot UE.
    pub p_th: f64,
    /// Distance-product threshold: the TIN condition is `X * Y >= g_r`.
    pub g_r: f64,
}

impl DerivedQuantities {
    /// Intensity of the thinned interfering-AP process.
    pub fn interfering_intensity(&self) -> f64 {
        self.p_th * self.lambda_ap
    }
}

pub fn derive(config: &NetworkConfig) -> Result<DerivedQuantities> {
    config.validate()?;
    let area = config.window_area();
    let lambda_ap = config.num_aps as f64 / area;
    let lambda_ue = config.num_ues as f64 / area;
    let lambda_0 = lambda_ue / config.num_pilots as f64;
    let r = config.influence_radius;
    let p_th = -(-lambda_0 * PI * r * r).exp_m1();
    let alpha = config.pathloss_exponent;
    let g_r = config.kappa.powf(-1.0 / alpha)
        * config.snr_scale().powf((2.0 - config.mu) / alpha)
        * r.powf(config.mu);
    Ok(DerivedQuantities {
        lambda_ap,
        lambda_ue,
        lambda_0,
        p_th,
        g_r,
    })
}

fn check_order(op: &'static str, n: usize, total: usize) -> Result<()> {
    if n < 1 || n > total {
        return Err(Error::domain(
            op,
            format!("need 1 <= n <= N, got n = {n}, N = {total}"),
        ));
    }
    Ok(())
}

fn check_coverage(op: &'static str, coverage: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&coverage) {
        return Err(Error::domain(
            op,
            format!("coverage fraction {coverage} outside [0, 1]"),
        ));
    }
    Ok(())
}

/// CDF of the distance to the `n`-th nearest of `total` uniform points, given
/// the window fraction `coverage` covered by the ball of that radius:
/// `1 - I_{1-p}(N - n + 1, n)`.
pub fn bpp_nth_nearest_cdf(n: usize, total: usize, coverage: f64) -> Result<f64> {
    check_order("bpp_nth_nearest_cdf", n, total)?;
    check_coverage("bpp_nth_nearest_cdf", coverage)?;
    Ok(1.0 - reg_inc_beta(1.0 - coverage, (total - n + 1) as f64, n as f64)?)
}

/// Density matching [`bpp_nth_nearest_cdf`], given `dp/dd` at the same radius.
pub fn bpp_nth_nearest_pdf(
    n: usize,
    total: usize,
    coverage: f64,
    coverage_slope: f64,
) -> Result<f64> {
    check_order("bpp_nth_nearest_pdf", n, total)?;
    check_coverage("bpp_nth_nearest_pdf", coverage)?;
    let a = (total - n + 1) as f64;
    let b = n as f64;
    let ln_beta = crate::numerics::ln_gamma(a) + crate::numerics::ln_gamma(b)
        - crate::numerics::ln_gamma(a + b);
    // 0 * ln(0) is taken as 0
    let power_term = |exponent: f64, base: f64| {
        if exponent == 0.0 {
            0.0
        } else {
            exponent * base.ln()
        }
    };
    let body = power_term(a - 1.0, 1.0 - coverage) + power_term(b - 1.0, coverage) - ln_beta;
    Ok(coverage_slope * body.exp())
}

fn check_copilots(k_prime: usize) -> Result<()> {
    if k_prime < 1 {
        return Err(Error::domain("f_x_bpp", "co-pilot count K' must be >= 1"));
    }
    Ok(())
}

/// Density of `X` for a window with exactly `k_prime` uniform co-pilot UEs.
pub fn f_x_bpp(x: f64, k_prime: usize, config: &NetworkConfig) -> Result<f64> {
    check_copilots(k_prime)?;
    let (r, big_r) = (config.influence_radius, config.radius);
    if x <= 0.0 || x > big_r + r {
        if x.is_nan() {
            return Err(Error::domain("f_x_bpp", "x is NaN"));
        }
        return Ok(0.0);
    }
    let p = p_x_ratio(x, r, big_r)?;
    let slope = dpx_dx(x, r, big_r)?;
    Ok(slope * k_prime as f64 * (1.0 - p).powi(k_prime as i32 - 1))
}

/// CDF of `X` for exactly `k_prime` co-pilot UEs: `1 - (1 - p_X)^K'`.
pub fn cdf_x_bpp(x: f64, k_prime: usize, config: &NetworkConfig) -> Result<f64> {
    check_copilots(k_prime)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let p = p_x_ratio(x, config.influence_radius, config.radius)?;
    bpp_nth_nearest_cdf(1, k_prime, p)
}

fn check_intensity(op: &'static str, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(op, format!("intensity {lambda} must be > 0")));
    }
    Ok(())
}

/// Rayleigh contact-distance density `2 pi lambda_0 x exp(-pi lambda_0 x^2)`.
pub fn f_x_ppp(x: f64, lambda_0: f64) -> Result<f64> {
    check_intensity("f_x_ppp", lambda_0)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * PI * lambda_0 * x * (-PI * lambda_0 * x * x).exp())
}

pub fn cdf_x_ppp(x: f64, lambda_0: f64) -> Result<f64> {
    check_intensity("cdf_x_ppp", lambda_0)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-PI * lambda_0 * x * x).exp_m1())
}

/// Density of `Y` under the thinned-PPP approximation; zero below `r`.
pub fn f_y_ppp(y: f64, config: &NetworkConfig, derived: &DerivedQuantities) -> f64 {
    let r = config.influence_radius;
    if y < r {
        return 0.0;
    }
    let rate = PI * derived.interfering_intensity();
    // c * exp(-rate y^2) with c = exp(rate r^2), folded into one exponent
    2.0 * rate * y * (rate * (r * r - y * y)).exp()
}

/// CDF of `Y` under the thinned-PPP approximation: `1 - exp(pi p_th lambda_ap (r^2 - y^2))` for `y >= r`.
pub fn cdf_y_ppp(y: f64, config: &NetworkConfig, derived: &DerivedQuantities) -> f64 {
    let r = config.influence_radius;
    if y < r {
        return 0.0;
    }
    let rate = PI * derived.interfering_intensity();
    -(rate * (r * r - y * y)).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Pdf,
    Cdf,
}

/// Tabulated curve on a sorted abscissa grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    abscissa: Vec<f64>,
    values: Vec<f64>,
    kind: CurveKind,
}

impl CurveTable {
    pub fn new(abscissa: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if abscissa.len() != values.len() {
            return Err(Error::validation(
                "values",
                format!(
                    "length {} differs from abscissa length {}",
                    values.len(),
                    abscissa.len()
                ),
            ));
        }
        if abscissa.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::validation("abscissa", "must be sorted ascending"));
        }
        match kind {
            CurveKind::Pdf => {
                if values.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::validation("values", "pdf values must be >= 0"));
                }
            }
            CurveKind::Cdf => {
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::validation("values", "cdf values must lie in [0, 1]"));
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::validation(
                        "values",
                        "cdf values must be nondecreasing",
                    ));
                }
            }
        }
        Ok(Self {
            abscissa,
            values,
            kind,
        })
    }

    /// Evaluates `f` on every grid point.
    pub fn tabulate<F: FnMut(f64) -> Result<f64>>(
        grid: &[f64],
        kind: CurveKind,
        mut f: F,
    ) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(grid.to_vec(), values, kind)
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }
}

/// `n` points evenly spaced on `[lower, upper]`, endpoints included.
pub fn linear_grid(lower: f64, upper: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lower],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    upper
                } else {
                    lower + (upper - lower) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
