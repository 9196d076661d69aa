//! Disk-window point sampling and circle/disk intersection geometry.
//!
//! The network window is a disk of radius `R` centred at the typical UE
//! (the origin). The reference AP sits at `(r, 0)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_squared(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Circular observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskWindow {
    center: Point2D,
    radius: f64,
}

impl DiskWindow {
    pub fn new(center: Point2D, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::validation(
                "radius_R",
                format!("must be a finite value > 0, got {radius}"),
            ));
        }
        if !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::validation("center", "coordinates must be finite"));
        }
        Ok(Self { center, radius })
    }

    /// Window of radius `radius` centred at the origin.
    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(Point2D::ORIGIN, radius)
    }

    pub fn center(&self) -> Point2D {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        self.center.distance_squared(p) <= self.radius * self.radius
    }

    /// One uniform point, drawn as `radius = R * sqrt(u)` with a uniform angle.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2D {
        let rho = self.radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let (s, c) = theta.sin_cos();
        Point2D::new(self.center.x + rho * c, self.center.y + rho * s)
    }
}

/// `n` i.i.d. uniform points on the window (a binomial point process).
pub fn sample_uniform_disk<R: Rng + ?Sized>(
    n: usize,
    window: &DiskWindow,
    rng: &mut R,
) -> Vec<Point2D> {
    (0..n).map(|_| window.sample_point(rng)).collect()
}

/// Homogeneous Poisson point process of the given intensity restricted to the window.
pub fn sample_ppp_disk<R: Rng + ?Sized>(
    intensity: f64,
    window: &DiskWindow,
    rng: &mut R,
) -> Vec<Point2D> {
    let count = poisson_count(intensity * window.area(), rng);
    sample_uniform_disk(count, window, rng)
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

fn check_lens_args(op: &'static str, x: f64, r: f64, big_r: f64) -> Result<()> {
    if !(big_r > 0.0) || !(r > 0.0) || r >= big_r {
        return Err(Error::domain(
            op,
            format!("need 0 < r < R, got r = {r}, R = {big_r}"),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(op, format!("x = {x} must be >= 0")));
    }
    Ok(())
}

struct LensAngles {
    alpha_ue: f64,
    alpha_ap: f64,
    s_delta: f64,
}

fn lens_angles(x: f64, r: f64, big_r: f64) -> LensAngles {
    let cos_ue = ((r * r + big_r * big_r - x * x) / (2.0 * r * big_r)).clamp(-1.0, 1.0);
    let cos_ap = ((r * r + x * x - big_r * big_r) / (2.0 * r * x)).clamp(-1.0, 1.0);
    let radicand = (big_r + r + x) * (big_r - r + x) * (big_r + r - x) * (r + x - big_r);
    LensAngles {
        alpha_ue: cos_ue.acos(),
        alpha_ap: cos_ap.acos(),
        s_delta: 0.25 * radicand.max(0.0).sqrt(),
    }
}

/// Area of `b((r, 0), x)` intersected with the disk of radius `R` at the origin.
pub fn lens_area(x: f64, r: f64, big_r: f64) -> Result<f64> {
    check_lens_args("lens_area", x, r, big_r)?;
    if x <= big_r - r {
        return Ok(PI * x * x);
    }
    if x > big_r + r {
        return Ok(PI * big_r * big_r);
    }
    let LensAngles {
        alpha_ue,
        alpha_ap,
        s_delta,
    } = lens_angles(x, r, big_r);
    let area = big_r * big_r * alpha_ue + x * x * alpha_ap - 2.0 * s_delta;
    Ok(area.clamp(0.0, PI * big_r * big_r))
}

/// Fraction of the window covered by the disk of radius `x` around the reference AP.
pub fn p_x_ratio(x: f64, r: f64, big_r: f64) -> Result<f64> {
    Ok((lens_area(x, r, big_r)? / (PI * big_r * big_r)).clamp(0.0, 1.0))
}

/// Derivative of [`p_x_ratio`] with respect to `x`.
///
/// The outer branch is the four-term closed form obtained by differentiating
/// the lens area term by term. At the breakpoints both `sin` factors vanish;
/// there the terms collapse to the arc-length form `2 x alpha_ap / (pi R^2)`.
pub fn dpx_dx(x: f64, r: f64, big_r: f64) -> Result<f64> {
    check_lens_args("dpx_dx", x, r, big_r)?;
    if x <= 0.0 || x > big_r + r {
        return Err(Error::domain(
            "dpx_dx",
            format!("x = {x} outside (0, R + r]"),
        ));
    }
    let area = PI * big_r * big_r;
    if x <= big_r - r {
        return Ok(2.0 * x / (big_r * big_r));
    }
    let LensAngles {
        alpha_ue,
        alpha_ap,
        s_delta,
    } = lens_angles(x, r, big_r);
    let sin_ue = alpha_ue.sin();
    let sin_ap = alpha_ap.sin();
    if sin_ue < 1e-9 || sin_ap < 1e-9 {
        return Ok((2.0 * x * alpha_ap / area).max(0.0));
    }
    let t1 = x / (PI * big_r * r * sin_ue);
    let t2 = 2.0 * x * alpha_ap / area;
    let t3 = (x * x - r * r + big_r * big_r) / (2.0 * area * r * sin_ap);
    let t4 = s_delta / area
        * (1.0 / (big_r + r + x) + 1.0 / (big_r - r + x) + 1.0 / (r + x - big_r)
            - 1.0 / (big_r + r - x));
    Ok((t1 + t2 - t3 - t4).max(0.0))
}

/// Euclidean distance from `origin` to the nearest of `targets`.
pub fn min_distance(origin: &Point2D, targets: &[Point2D]) -> Option<f64> {
    targets
        .iter()
        .map(|t| origin.distance_squared(t))
        .min_by(f64::total_cmp)
        .map(f64::sqrt)
}

/// Whether `query` lies in the union of closed disks of `radius` around `centers`.
pub fn in_union_of_disks(query: &Point2D, centers: &[Point2D], radius: f64) -> bool {
    let r2 = radius * radius;
    centers.iter().any(|c| query.distance_squared(c) <= r2)
}
