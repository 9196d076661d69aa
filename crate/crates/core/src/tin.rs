//! The TIN condition and the analytic probability that it holds.
//!
//! With `X` the reference-AP-to-nearest-co-pilot-UE distance and `Y` the
//! typical-UE-to-nearest-interfering-AP distance, the condition reduces to
//! `X * Y >= g_r`. Its probability factors into `P{XY >= g_r}` under the
//! Poisson approximations and the probability that at least one AP serves
//! the typical UE.
//!
//! `P{XY >= g_r}` is available two ways: direct quadrature of
//! `1 - int f_X F_Y(g_r / x) dx`, and the closed form
//! `1 - 2 pi lambda_0 (I1 - exp(pi p_th lambda_ap r^2) I2)` where `I1` is
//! elementary and `I2` is a one-dimensional integral evaluated by quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distributions::{cdf_y_ppp, derive, f_x_ppp, DerivedQuantities, NetworkConfig};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad_with_breakpoints, bessel_k1, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TinProbabilityResult {
    /// `P{X Y >= g_r}`.
    pub p_xy: f64,
    /// Probability that at least one AP lies within `r` of the typical UE.
    pub p_serving: f64,
    pub p_tin: f64,
    pub method: Method,
}

const CLAMP_WARN: f64 = 1e-9;

fn clamp_probability(value: f64, what: &str) -> f64 {
    let clamped = value.clamp(0.0, 1.0);
    if (clamped - value).abs() > CLAMP_WARN {
        log::warn!("{what} = {value:e} left [0, 1] by more than {CLAMP_WARN:e}; clamped");
    }
    clamped
}

fn check_distances(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(Error::domain(
            "tin_condition_holds",
            format!("distances must be > 0, got X = {x}, Y = {y}"),
        ));
    }
    Ok(())
}

/// Distance form of the TIN condition: `X * Y >= g_r` (boundary inclusive).
pub fn tin_condition_holds(x: f64, y: f64, derived: &DerivedQuantities) -> Result<bool> {
    check_distances(x, y)?;
    Ok(x * y >= derived.g_r)
}

/// SNR/INR form `kappa (snr r^-alpha)^mu >= snr^2 (X Y)^-alpha`, compared in the log domain.
pub fn snr_form_holds(x: f64, y: f64, config: &NetworkConfig) -> Result<bool> {
    check_distances(x, y)?;
    let alpha = config.pathloss_exponent;
    let ln_snr = config.snr_scale().ln();
    let lhs = config.kappa.ln() + config.mu * (ln_snr - alpha * config.influence_radius.ln());
    let rhs = 2.0 * ln_snr - alpha * (x * y).ln();
    Ok(lhs >= rhs)
}

/// `1 - (1 - r^2 / R^2)^L`.
pub fn serving_probability(r: f64, big_r: f64, num_aps: usize) -> f64 {
    let covered = (r * r) / (big_r * big_r);
    if covered >= 1.0 {
        return 1.0;
    }
    -(num_aps as f64 * (-covered).ln_1p()).exp_m1()
}

pub fn prob_serving_ap_exists(config: &NetworkConfig) -> Result<f64> {
    config.validate()?;
    Ok(serving_probability(
        config.influence_radius,
        config.radius,
        config.num_aps,
    ))
}

/// `P{XY >= g_r} = 1 - int_0^{g_r / r} f_X(x) F_Y(g_r / x) dx` by adaptive quadrature.
pub fn prob_xy_quadrature(
    config: &NetworkConfig,
    derived: &DerivedQuantities,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r = config.influence_radius;
    let g = derived.g_r;
    let upper = g / r;
    // F_Y(g/x) vanishes for x > g/r
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        f_x_ppp(x, derived.lambda_0).unwrap_or(0.0) * cdf_y_ppp(g / x, config, derived)
    };
    let mode = 1.0 / (2.0 * PI * derived.lambda_0).sqrt();
    let breakpoints = [0.25 * mode, mode, 4.0 * mode];
    let integral = adaptive_quad_with_breakpoints(integrand, 0.0, upper, &breakpoints, spec)?;
    Ok(clamp_probability(
        1.0 - integral,
        "P{XY >= g_r} (quadrature)",
    ))
}

/// Upper limit used for the elementary `I1` term of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum I1Limit {
    /// `g_r / r`, the limit produced by the support of `F_Y`.
    ThresholdOverRadius,
    /// `R + r`, the support edge of `X` in the finite window.
    WindowEdge,
}

/// Parameters of `exp(-a t - b / t)` appearing in `I2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I2Kernel {
    /// `pi lambda_0`.
    pub a: f64,
    /// `pi p_th lambda_ap g_r^2`.
    pub b: f64,
    /// Log of the normalisation `exp(pi p_th lambda_ap r^2)`.
    pub log_c: f64,
    /// Upper limit `(g_r / r)^2`.
    pub t_max: f64,
}

impl I2Kernel {
    pub fn new(lambda_0: f64, interfering_intensity: f64, r: f64, g_r: f64) -> Self {
        Self {
            a: PI * lambda_0,
            b: PI * interfering_intensity * g_r * g_r,
            log_c: PI * interfering_intensity * r * r,
            t_max: (g_r / r).powi(2),
        }
    }

    pub fn from_config(config: &NetworkConfig, derived: &DerivedQuantities) -> Self {
        Self::new(
            derived.lambda_0,
            derived.interfering_intensity(),
            config.influence_radius,
            derived.g_r,
        )
    }

    fn peak(&self) -> f64 {
        if self.b > 0.0 {
            (self.b / self.a).sqrt().min(self.t_max)
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.b <= 0.0 {
            return vec![1.0 / self.a];
        }
        let peak = (self.b / self.a).sqrt();
        // curvature of -a t - b/t at the peak
        let width = self.b.powf(0.25) / (2f64.sqrt() * self.a.powf(0.75));
        let mut points = vec![peak];
        for k in [1.0, 3.0, 10.0, 30.0] {
            points.push(peak - k * width);
            points.push(peak + k * width);
        }
        points
    }

    /// `log c + max_{[0, t_max]} (-a t - b / t)`; shifts the integrand to at most one.
    fn log_shift(&self) -> f64 {
        let t = self.peak();
        if t <= 0.0 {
            self.log_c
        } else {
            self.log_c - self.a * t - self.b / t
        }
    }

    /// `int_0^{t_max} exp(log c - a t - b/t - shift) dt`.
    fn scaled_integral(&self, spec: &QuadratureSpec) -> Result<f64> {
        let shift = self.log_shift();
        let f = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            (self.log_c - self.a * t - self.b / t - shift).exp()
        };
        adaptive_quad_with_breakpoints(f, 0.0, self.t_max, &self.breakpoints(), spec)
    }

    /// `I2 = 1/2 int_0^{t_max} exp(-a t - b / t) dt` (may underflow for extreme parameters).
    pub fn i2(&self, spec: &QuadratureSpec) -> Result<f64> {
        Ok(0.5 * self.scaled_integral(spec)? * (self.log_shift() - self.log_c).exp())
    }

    /// `int_0^inf exp(-a t - b / t) dt = 2 sqrt(b / a) K1(2 sqrt(a b))`.
    pub fn full_range_integral(&self) -> Result<f64> {
        if self.b <= 0.0 {
            return Ok(1.0 / self.a);
        }
        Ok(2.0 * (self.b / self.a).sqrt() * bessel_k1(2.0 * (self.a * self.b).sqrt())?)
    }

    /// `I1 = (1 - exp(-a limit^2)) / (2 a)`.
    pub fn i1(&self, limit: f64) -> f64 {
        -(-self.a * limit * limit).exp_m1() / (2.0 * self.a)
    }

    /// `1 - 2 a (I1 - c I2)` rearranged as `exp(-a limit^2) + 2 a c I2`, a sum of
    /// nonnegative terms with the exponentials folded together.
    pub fn tail_probability(&self, i1_limit: f64, spec: &QuadratureSpec) -> Result<f64> {
        let first = (-self.a * i1_limit * i1_limit).exp();
        let second = self.a * self.scaled_integral(spec)? * self.log_shift().exp();
        Ok(first + second)
    }
}

pub fn prob_xy_closed_form(
    config: &NetworkConfig,
    derived: &DerivedQuantities,
    spec: &QuadratureSpec,
) -> Result<f64> {
    prob_xy_closed_form_with_limit(config, derived, I1Limit::ThresholdOverRadius, spec)
}

pub fn prob_xy_closed_form_with_limit(
    config: &NetworkConfig,
    derived: &DerivedQuantities,
    limit: I1Limit,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let kernel = I2Kernel::from_config(config, derived);
    let i1_limit = match limit {
        I1Limit::ThresholdOverRadius => derived.g_r / config.influence_radius,
        I1Limit::WindowEdge => config.radius + config.influence_radius,
    };
    let p = kernel.tail_probability(i1_limit, spec)?;
    Ok(clamp_probability(p, "P{XY >= g_r} (closed form)"))
}

pub fn prob_xy(
    config: &NetworkConfig,
    derived: &DerivedQuantities,
    method: Method,
    spec: &QuadratureSpec,
) -> Result<f64> {
    match method {
        Method::Quadrature => prob_xy_quadrature(config, derived, spec),
        Method::ClosedForm => prob_xy_closed_form(config, derived, spec),
    }
}

pub fn p_tin_analytic(config: &NetworkConfig, method: Method) -> Result<TinProbabilityResult> {
    p_tin_analytic_with(config, method, &QuadratureSpec::default())
}

pub fn p_tin_analytic_with(
    config: &NetworkConfig,
    method: Method,
    spec: &QuadratureSpec,
) -> Result<TinProbabilityResult> {
    let derived = derive(config)?;
    let p_xy = prob_xy(config, &derived, method, spec)?;
    let p_serving = serving_probability(config.influence_radius, config.radius, config.num_aps);
    Ok(TinProbabilityResult {
        p_xy,
        p_serving,
        p_tin: clamp_probability(p_xy * p_serving, "p_tin"),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: usize, r: f64, kappa: f64, mu: f64) -> NetworkConfig {
        NetworkConfig {
            num_ues: k,
            influence_radius: r,
            kappa,
            mu,
            ..NetworkConfig::default()
        }
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn condition_boundary_is_inclusive() {
        let c = cfg(400, 100.0, 1.0, 2.0);
        let d = derive(&c).unwrap();
        assert_eq!(d.g_r, 1e4);
        assert!(tin_condition_holds(100.0, 100.0, &d).unwrap());
        assert!(tin_condition_holds(50.0, 200.0, &d).unwrap());
        assert!(!tin_condition_holds(50.0, 199.999, &d).unwrap());
        assert!(tin_condition_holds(0.0, 1.0, &d).is_err());
        assert!(tin_condition_holds(1.0, -1.0, &d).is_err());
    }

    #[test]
    fn distance_and_snr_forms_agree() {
        let c = cfg(400, 100.0, 1.0, 1.0);
        let d = derive(&c).unwrap();
        // (rho / sigma^2)^(1 / alpha) * r
        let expected = (c.snr_scale()).powf(1.0 / c.pathloss_exponent) * 100.0;
        assert!(((d.g_r - expected) / expected).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = rng.random_range(1.0..2000.0);
            let y = rng.random_range(1.0..2000.0);
            if ((x * y - d.g_r) / d.g_r).abs() < 1e-12 {
                continue;
            }
            assert_eq!(
                tin_condition_holds(x, y, &d).unwrap(),
                snr_form_holds(x, y, &c).unwrap()
            );
        }
    }

    #[test]
    fn serving_probability_values() {
        assert_eq!(serving_probability(1000.0, 1000.0, 5), 1.0);
        let p = serving_probability(100.0, 1000.0, 1000);
        assert!((p - (1.0 - 0.99f64.powi(1000))).abs() < 1e-15);
        assert!((p - 0.999957).abs() < 1e-6);
        let c = cfg(400, 100.0, 1.0, 1.0);
        assert_eq!(prob_serving_ap_exists(&c).unwrap(), p);
    }

    #[test]
    fn both_routes_agree_on_a_grid() {
        for r in [50.0, 100.0, 200.0, 400.0, 800.0] {
            for k in [100, 200, 400, 800, 1600] {
                for mu in [1.0, 1.5, 2.0] {
                    let c = cfg(k, r, 1.0, mu);
                    let d = derive(&c).unwrap();
                    let q = prob_xy_quadrature(&c, &d, &spec()).unwrap();
                    let cf = prob_xy_closed_form(&c, &d, &spec()).unwrap();
                    assert!((q - cf).abs() < 1e-6, "r={r} K={k} mu={mu}: {q} vs {cf}");
                }
            }
        }
    }

    #[test]
    fn vanishing_thinning_gives_certainty() {
        // no interfering APs: F_Y = 0 and I2 = I1, so P{XY >= g} = 1
        let kernel = I2Kernel::new(1.2732e-5, 0.0, 100.0, 2e5);
        let i2 = kernel.i2(&spec()).unwrap();
        let i1 = kernel.i1(2e5 / 100.0);
        assert!(((i2 - i1) / i1).abs() < 1e-10);
        assert!((kernel.tail_probability(2e3, &spec()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn i2_bounded_by_bessel_full_range() {
        for r in [20.0, 100.0, 400.0] {
            for mu in [1.0, 1.5, 2.0] {
                let c = cfg(400, r, 1.0, mu);
                let d = derive(&c).unwrap();
                let kernel = I2Kernel::from_config(&c, &d);
                let i2 = kernel.i2(&spec()).unwrap();
                let full = kernel.full_range_integral().unwrap();
                assert!(
                    2.0 * i2 <= full * (1.0 + 1e-9),
                    "r={r} mu={mu}: {i2} vs {full}"
                );
            }
        }
        // when g/r is far beyond the peak, 2 I2 is the full-range integral
        let kernel = I2Kernel::new(1.0, 1e-4, 1.0, 10.0);
        let rel = (2.0 * kernel.i2(&spec()).unwrap() - kernel.full_range_integral().unwrap())
            / kernel.full_range_integral().unwrap();
        assert!(rel.abs() < 1e-8, "{rel}");
    }

    #[test]
    fn tiny_threshold_gives_certainty() {
        // g_r -> 0 via kappa large and mu = 2 with small r
        let c = cfg(400, 1e-3, 1e12, 2.0);
        let d = derive(&c).unwrap();
        assert!(d.g_r < 1e-6);
        let p = prob_xy_closed_form(&c, &d, &spec()).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
        assert!((prob_xy_quadrature(&c, &d, &spec()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn p_xy_nonincreasing_in_threshold() {
        let c = cfg(400, 100.0, 1.0, 1.5);
        let d = derive(&c).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let g = d.g_r * 0.05 * 1.15f64.powi(i);
            let kernel =
                I2Kernel::new(d.lambda_0, d.interfering_intensity(), c.influence_radius, g);
            let p = kernel
                .tail_probability(g / c.influence_radius, &spec())
                .unwrap();
            assert!(p <= prev * (1.0 + 1e-9), "g={g}: {p} > {prev}");
            prev = p;
        }
    }

    #[test]
    fn window_edge_limit_differs_when_threshold_is_small() {
        let c = cfg(400, 100.0, 1.0, 2.0);
        let d = derive(&c).unwrap();
        let a =
            prob_xy_closed_form_with_limit(&c, &d, I1Limit::ThresholdOverRadius, &spec()).unwrap();
        let b = prob_xy_closed_form_with_limit(&c, &d, I1Limit::WindowEdge, &spec()).unwrap();
        assert!((a - b).abs() > 0.01);
    }

    #[test]
    fn result_factorises() {
        for method in [Method::Quadrature, Method::ClosedForm] {
            let res = p_tin_analytic(&cfg(400, 50.0, 1.0, 1.5), method).unwrap();
            assert_eq!(res.p_tin, res.p_xy * res.p_serving);
            assert!((0.0..=1.0).contains(&res.p_tin));
            assert_eq!(res.method, method);
        }
    }

    #[test]
    fn small_radius_drives_ptin_to_zero() {
        let res = p_tin_analytic(&cfg(400, 0.5, 1.0, 1.0), Method::ClosedForm).unwrap();
        assert!(res.p_serving < 3e-4);
        assert!(res.p_tin < 3e-4);
    }

    #[test]
    fn kappa_promotes_ptin() {
        for r in [20.0, 50.0, 100.0] {
            let base = p_tin_analytic(&cfg(400, r, 1.0, 1.0), Method::ClosedForm)
                .unwrap()
                .p_tin;
            let boosted = p_tin_analytic(&cfg(400, r, 10.0, 1.0), Method::ClosedForm)
                .unwrap()
                .p_tin;
            assert!(boosted >= base, "r={r}");
        }
    }

    #[test]
    fn ptin_nonincreasing_when_users_double() {
        for r in [20.0, 50.0, 100.0, 200.0] {
            let mut prev = f64::INFINITY;
            for k in [100, 200, 400, 800, 1600] {
                let p = p_tin_analytic(&cfg(k, r, 1.0, 1.5), Method::ClosedForm)
                    .unwrap()
                    .p_tin;
                assert!(p <= prev, "r={r} K={k}");
                prev = p;
            }
        }
    }

    #[test]
    fn p_xy_nonincreasing_in_ap_count() {
        for r in [20.0, 100.0] {
            let mut prev_xy = f64::INFINITY;
            let mut prev_serving = 0.0;
            for l in [250, 500, 1000, 2000, 4000] {
                let c = NetworkConfig {
                    num_aps: l,
                    ..cfg(400, r, 1.0, 1.5)
                };
                let res = p_tin_analytic(&c, Method::ClosedForm).unwrap();
                assert!(res.p_xy <= prev_xy);
                assert!(res.p_serving >= prev_serving);
                prev_xy = res.p_xy;
                prev_serving = res.p_serving;
            }
        }
    }

    #[test]
    fn reference_values() {
        // (r, K, L, kappa, mu, p_xy, p_serving), direct quadrature at 1e-13 relative
        let table = [
            (
                20.0,
                400,
                1000,
                1.0,
                1.0,
                0.28124169001901145,
                0.32973359172635497,
            ),
            (
                100.0,
                400,
                1000,
                1.0,
                2.0,
                0.7274892534658353,
                0.9999568287525893,
            ),
            (
                50.0,
                400,
                1000,
                1.0,
                1.5,
                0.3705828139004439,
                0.9181715436000177,
            ),
            (
                15.0,
                400,
                1000,
                1.0,
                1.0,
                0.550806535935475,
                0.20150399645892447,
            ),
            (
                20.0,
                800,
                1000,
                1.0,
                1.0,
                0.05118277288045692,
                0.32973359172635497,
            ),
            (
                20.0,
                400,
                2000,
                10.0,
                1.0,
                0.4104514762737974,
                0.5507429419399474,
            ),
        ];
        for (r, k, l, kappa, mu, p_xy, p_serving) in table {
            let c = NetworkConfig {
                num_aps: l,
                ..cfg(k, r, kappa, mu)
            };
            for method in [Method::Quadrature, Method::ClosedForm] {
                let res = p_tin_analytic(&c, method).unwrap();
                assert!(
                    (res.p_xy - p_xy).abs() < 1e-9,
                    "{r} {k} {l} {kappa} {mu} {method:?}: {}",
                    res.p_xy
                );
                assert!((res.p_serving - p_serving).abs() < 1e-12);
            }
        }
    }
}
