//! State spaces and diffuse probability measures.
//!
//! Three supports are available: the half-open unit cube, the flat torus
//! `[0,1)^d` with the coordinate-wise wrap-around metric, and `R^d` with an
//! isotropic Gaussian or product-Weibull density. A user-tabulated piecewise
//! constant density may be placed on the cube or the torus.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::mc::{mc_mean, McEstimate};
use crate::rng::RandomState;

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A point of a `d`-dimensional state space, `1 <= d <= MAX_DIM`.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "point dimension {} outside 1..={MAX_DIM}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("point coordinates must be finite"));
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: buf,
            dim: coords.len() as u8,
        })
    }

    /// Panics on invalid input; for literals in tests and examples.
    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(coords).expect("valid point")
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim as usize]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    UnitCube,
    Torus,
    Euclidean,
}

/// Piecewise-constant density on a regular grid over `[0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    bins: usize,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedDensity {
    /// `values` is row-major with the first coordinate varying slowest and
    /// must hold `bins^d` nonnegative entries integrating to one.
    pub fn new(dim: usize, bins: usize, values: Vec<f64>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::config("tabulated density needs at least one bin"));
        }
        let cells = bins
            .checked_pow(dim as u32)
            .filter(|&c| c <= 1 << 24)
            .ok_or_else(|| Error::config("tabulated density grid too large"))?;
        if values.len() != cells {
            return Err(Error::config(format!(
                "tabulated density expects {cells} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("tabulated density values must be finite and >= 0"));
        }
        let cell_volume = (bins as f64).powi(-(dim as i32));
        let mut cumulative = Vec::with_capacity(cells);
        let mut acc = 0.0;
        for v in &values {
            acc += v * cell_volume;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-6 {
            return Err(Error::config(format!(
                "tabulated density has total mass {acc}, expected 1"
            )));
        }
        Ok(TabulatedDensity {
            bins,
            values,
            cumulative,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn cell_of(&self, p: &Point) -> Option<usize> {
        let mut idx = 0usize;
        for &c in p.coords() {
            if !(0.0..1.0).contains(&c) {
                return None;
            }
            let b = ((c * self.bins as f64) as usize).min(self.bins - 1);
            idx = idx * self.bins + b;
        }
        Some(idx)
    }

    fn sample(&self, dim: usize, rng: &mut RandomState) -> Point {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let mut cell = self.cumulative.partition_point(|&c| c <= u);
        if cell >= self.cumulative.len() {
            cell = self.cumulative.len() - 1;
        }
        let mut coords = [0.0; MAX_DIM];
        for axis in (0..dim).rev() {
            let b = cell % self.bins;
            cell /= self.bins;
            coords[axis] = (b as f64 + rng.random::<f64>()) / self.bins as f64;
        }
        Point {
            coords,
            dim: dim as u8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    IsotropicGaussian,
    ProductWeibull { shape: f64, scale: f64 },
    Tabulated(TabulatedDensity),
}

impl Density {
    pub fn name(&self) -> &'static str {
        match self {
            Density::Uniform => "uniform",
            Density::IsotropicGaussian => "isotropic-gaussian",
            Density::ProductWeibull { .. } => "product-weibull",
            Density::Tabulated(_) => "tabulated",
        }
    }
}

/// A diffuse probability measure on a Euclidean or toroidal state space.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure {
    kind: SpaceKind,
    dim: usize,
    density: Density,
}

impl ProbabilityMeasure {
    pub fn new(kind: SpaceKind, dim: usize, density: Density) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::config(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        match (&kind, &density) {
            (SpaceKind::UnitCube | SpaceKind::Torus, Density::Uniform | Density::Tabulated(_)) => {}
            (SpaceKind::Euclidean, Density::IsotropicGaussian) => {}
            (SpaceKind::Euclidean, Density::ProductWeibull { shape, scale }) => {
                if !(*shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite()) {
                    return Err(Error::config("weibull shape and scale must be positive"));
                }
            }
            (k, d) => {
                return Err(Error::config(format!(
                    "density {} is not supported on {k:?}",
                    d.name()
                )))
            }
        }
        Ok(ProbabilityMeasure { kind, dim, density })
    }

    pub fn uniform_torus(dim: usize) -> Result<Self> {
        Self::new(SpaceKind::Torus, dim, Density::Uniform)
    }

    pub fn uniform_cube(dim: usize) -> Result<Self> {
        Self::new(SpaceKind::UnitCube, dim, Density::Uniform)
    }

    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(SpaceKind::Euclidean, dim, Density::IsotropicGaussian)
    }

    pub fn weibull(dim: usize, shape: f64, scale: f64) -> Result<Self> {
        Self::new(SpaceKind::Euclidean, dim, Density::ProductWeibull { shape, scale })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn density_spec(&self) -> &Density {
        &self.density
    }

    /// Uniform measure on `[0,1)^d` (cube or torus).
    pub fn is_uniform_box(&self) -> bool {
        matches!(self.kind, SpaceKind::UnitCube | SpaceKind::Torus)
            && matches!(self.density, Density::Uniform)
    }

    pub fn is_uniform_torus(&self) -> bool {
        self.kind == SpaceKind::Torus && matches!(self.density, Density::Uniform)
    }

    /// True when every sample lies in `[0,1)^d`.
    pub fn has_unit_support(&self) -> bool {
        matches!(self.kind, SpaceKind::UnitCube | SpaceKind::Torus)
    }

    /// Draws one point from the measure.
    pub fn sample_point(&self, rng: &mut RandomState) -> Point {
        let mut p = Point {
            coords: [0.0; MAX_DIM],
            dim: self.dim as u8,
        };
        match &self.density {
            Density::Uniform => {
                for c in p.coords_mut() {
                    *c = rng.random::<f64>();
                }
            }
            Density::IsotropicGaussian => {
                for c in p.coords_mut() {
                    *c = StandardNormal.sample(rng);
                }
            }
            Density::ProductWeibull { shape, scale } => {
                for c in p.coords_mut() {
                    // Inversion: scale * (-ln(1-u))^(1/shape).
                    let u: f64 = rng.random();
                    *c = scale * (-(-u).ln_1p()).powf(1.0 / shape);
                }
            }
            Density::Tabulated(t) => p = t.sample(self.dim, rng),
        }
        p
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::domain(format!(
                "point has dimension {}, space has {}",
                p.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Density with respect to Lebesgue measure at `p`.
    pub fn density(&self, p: &Point) -> Result<f64> {
        self.check_dim(p)?;
        let mut q = *p;
        if self.kind == SpaceKind::Torus {
            for c in q.coords_mut() {
                *c = c.rem_euclid(1.0);
                if *c >= 1.0 {
                    *c = 0.0;
                }
            }
        }
        match &self.density {
            Density::Uniform => {
                if q.coords().iter().all(|c| (0.0..1.0).contains(c)) {
                    Ok(1.0)
                } else {
                    Err(Error::domain(format!("{p:?} outside the unit cube")))
                }
            }
            Density::IsotropicGaussian => {
                let r2: f64 = q.coords().iter().map(|c| c * c).sum();
                Ok((2.0 * PI).powf(-(self.dim as f64) / 2.0) * (-0.5 * r2).exp())
            }
            Density::ProductWeibull { shape, scale } => {
                let mut f = 1.0;
                for &c in q.coords() {
                    if c < 0.0 {
                        return Err(Error::domain(format!("{p:?} outside [0, inf)^d")));
                    }
                    let z = c / scale;
                    f *= shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp();
                }
                Ok(f)
            }
            Density::Tabulated(t) => t
                .cell_of(&q)
                .map(|i| t.values[i])
                .ok_or_else(|| Error::domain(format!("tabulated density undefined at {p:?}"))),
        }
    }

    /// Distance between two points: wrap-around on the torus, Euclidean otherwise.
    #[inline]
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    #[inline]
    pub fn distance_sq(&self, a: &Point, b: &Point) -> f64 {
        let mut acc = 0.0;
        if self.kind == SpaceKind::Torus {
            for i in 0..self.dim {
                let mut d = (a.coords[i] - b.coords[i]).abs() % 1.0;
                if d > 0.5 {
                    d = 1.0 - d;
                }
                acc += d * d;
            }
        } else {
            for i in 0..self.dim {
                let d = a.coords[i] - b.coords[i];
                acc += d * d;
            }
        }
        acc
    }

    /// Largest possible distance between two points of the support, if bounded.
    pub fn diameter(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Torus => Some((self.dim as f64).sqrt() / 2.0),
            SpaceKind::UnitCube => Some((self.dim as f64).sqrt()),
            SpaceKind::Euclidean => None,
        }
    }

    /// `mu(B_radius(center))`: exact where a closed form exists, otherwise a
    /// Monte Carlo estimate from `mc_samples` draws of the measure.
    pub fn ball_measure(
        &self,
        center: &Point,
        radius: f64,
        mc_samples: usize,
        seed: u64,
    ) -> Result<McEstimate> {
        self.check_dim(center)?;
        if !(radius >= 0.0) {
            return Err(Error::domain("radius must be nonnegative"));
        }
        if radius == 0.0 {
            return Ok(McEstimate::exact(0.0));
        }
        if let Some(v) = self.ball_measure_exact(center, radius) {
            return Ok(McEstimate::exact(v));
        }
        let r2 = radius * radius;
        Ok(mc_mean(mc_samples.max(1), seed, |rng| {
            let y = self.sample_point(rng);
            (self.distance_sq(center, &y) <= r2) as u8 as f64
        }))
    }

    fn ball_measure_exact(&self, center: &Point, radius: f64) -> Option<f64> {
        let d = self.dim;
        match (&self.kind, &self.density) {
            (SpaceKind::Torus, Density::Uniform) => {
                if radius < 0.5 {
                    Some(unit_ball_volume(d) * radius.powi(d as i32))
                } else if radius >= self.diameter().unwrap() {
                    Some(1.0)
                } else {
                    None
                }
            }
            (SpaceKind::UnitCube, Density::Uniform) => {
                let c = center.coords();
                if d == 1 {
                    let lo = (c[0] - radius).max(0.0);
                    let hi = (c[0] + radius).min(1.0);
                    return Some((hi - lo).max(0.0));
                }
                let inside = c.iter().all(|&x| x - radius >= 0.0 && x + radius <= 1.0);
                if inside {
                    return Some(unit_ball_volume(d) * radius.powi(d as i32));
                }
                let far: f64 = c.iter().map(|&x| x.max(1.0 - x).powi(2)).sum::<f64>().sqrt();
                (radius >= far).then_some(1.0)
            }
            (SpaceKind::Euclidean, Density::IsotropicGaussian) if center.norm() == 0.0 => {
                let chi = ChiSquared::new(d as f64).ok()?;
                Some(chi.cdf(radius * radius))
            }
            _ => None,
        }
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_state;

    #[test]
    fn uniform_cube_sample_in_support() {
        let m = ProbabilityMeasure::uniform_cube(2).unwrap();
        let mut rng = random_state(5);
        for _ in 0..1000 {
            let p = m.sample_point(&mut rng);
            assert!(p.coords().iter().all(|c| (0.0..1.0).contains(c)));
        }
    }

    #[test]
    fn gaussian_mean_near_zero() {
        let m = ProbabilityMeasure::gaussian(1).unwrap();
        let mut rng = random_state(17);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| m.sample_point(&mut rng).coords()[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn weibull_shape_one_is_exponential() {
        let m = ProbabilityMeasure::weibull(1, 1.0, 1.0).unwrap();
        let mut rng = random_state(23);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| m.sample_point(&mut rng).coords()[0]).sum::<f64>() / n as f64;
        // Exponential(1): variance 1.
        assert!((mean - 1.0).abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn densities() {
        let t = ProbabilityMeasure::uniform_torus(2).unwrap();
        assert_eq!(t.density(&Point::from_slice(&[0.3, 1.7])).unwrap(), 1.0);
        let g = ProbabilityMeasure::gaussian(2).unwrap();
        let f0 = g.density(&Point::from_slice(&[0.0, 0.0])).unwrap();
        assert!((f0 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let c = ProbabilityMeasure::uniform_cube(2).unwrap();
        assert!(matches!(
            c.density(&Point::from_slice(&[1.2, 0.5])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tabulated_density_roundtrip() {
        let td = TabulatedDensity::new(1, 2, vec![1.5, 0.5]).unwrap();
        let m = ProbabilityMeasure::new(SpaceKind::UnitCube, 1, Density::Tabulated(td)).unwrap();
        assert_eq!(m.density(&Point::from_slice(&[0.2])).unwrap(), 1.5);
        assert!(m.density(&Point::from_slice(&[1.5])).is_err());
        let mut rng = random_state(1);
        let n = 200_000;
        let low = (0..n)
            .filter(|_| m.sample_point(&mut rng).coords()[0] < 0.5)
            .count() as f64
            / n as f64;
        assert!((low - 0.75).abs() < 0.005);
        assert!(TabulatedDensity::new(1, 2, vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn unsupported_combinations_rejected() {
        assert!(ProbabilityMeasure::new(SpaceKind::Torus, 2, Density::IsotropicGaussian).is_err());
        assert!(ProbabilityMeasure::uniform_torus(9).is_err());
        assert!(ProbabilityMeasure::uniform_torus(0).is_err());
    }

    #[test]
    fn ball_measure_closed_forms() {
        let t = ProbabilityMeasure::uniform_torus(2).unwrap();
        let c = Point::from_slice(&[0.1, 0.9]);
        let b = t.ball_measure(&c, 0.05, 10, 0).unwrap();
        assert!((b.value - PI * 0.0025).abs() < 1e-15);
        assert_eq!(b.std_error, 0.0);
        assert_eq!(t.ball_measure(&c, 0.0, 10, 0).unwrap().value, 0.0);
        assert_eq!(t.ball_measure(&c, 0.75, 10, 0).unwrap().value, 1.0);

        let line = ProbabilityMeasure::uniform_cube(1).unwrap();
        let v = line.ball_measure(&Point::from_slice(&[0.5]), 0.25, 10, 0).unwrap();
        assert!((v.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ball_measure_mc_fallback_monotone() {
        let t = ProbabilityMeasure::uniform_torus(2).unwrap();
        let c = Point::from_slice(&[0.5, 0.5]);
        let mut last = 0.0;
        for r in [0.4, 0.55, 0.6, 0.65, 0.7, 0.71] {
            let b = t.ball_measure(&c, r, 20_000, 9).unwrap();
            // Common random numbers: the same draws are reused for every radius.
            assert!(b.value >= last);
            last = b.value;
        }
    }

    #[test]
    fn torus_distance_wraps() {
        let t = ProbabilityMeasure::uniform_torus(1).unwrap();
        let d = t.distance(&Point::from_slice(&[0.05]), &Point::from_slice(&[0.95]));
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }
}
