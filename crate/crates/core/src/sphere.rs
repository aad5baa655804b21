//! Points on `S^d ⊂ R^{d+1}` and functions defined on them.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Unit-length tolerance for points handed to kernels and rules.
pub const UNIT_TOL: f64 = 1e-12;

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Checks that `x` lies on `S^d` within [`UNIT_TOL`].
pub fn check_unit(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            got: x.len(),
        });
    }
    let n = norm(x);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector { norm: n });
    }
    Ok(())
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
#[inline]
pub fn clamped_dot(x: &[f64], y: &[f64]) -> f64 {
    dot(x, y).clamp(-1.0, 1.0)
}

/// Uniformly distributed point on `S^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|c| *c /= n);
            return v;
        }
    }
}

/// The north pole `e_{d+1}` of `S^d`.
pub fn north_pole(d: usize) -> Vec<f64> {
    let mut p = vec![0.0; d + 1];
    p[d] = 1.0;
    p
}

/// Normalizes `x` in place and returns it.
pub fn normalized(mut x: Vec<f64>) -> Vec<f64> {
    let n = norm(&x);
    x.iter_mut().for_each(|c| *c /= n);
    x
}

/// A real function that can be sampled at points of `S^d`.
pub trait SphereFunction: Sync {
    /// The sphere dimension `d`.
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;
}

/// Adapts a closure to [`SphereFunction`].
pub struct FnOnSphere<F> {
    d: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnOnSphere<F> {
    pub fn new(d: usize, f: F) -> Self {
        Self { d, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SphereFunction for FnOnSphere<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// A finite point set used for sup-norm sampling.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl SampleGrid {
    /// Spherical Fibonacci lattice with `n` points on `S^2` (equal area per point),
    /// together with both poles.
    pub fn fibonacci(n: usize) -> Self {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let mut points = Vec::with_capacity(n + 2);
        points.push(vec![0.0, 0.0, 1.0]);
        points.push(vec![0.0, 0.0, -1.0]);
        for i in 0..n {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
            points.push(vec![rho * phi.cos(), rho * phi.sin(), z]);
        }
        Self { d: 2, points }
    }

    /// `n` uniform random points on `S^d` plus the two poles `±e_{d+1}`.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Self {
        let mut points = Vec::with_capacity(n + 2);
        let pole = north_pole(d);
        points.push(pole.iter().map(|c| -c).collect());
        points.push(pole);
        points.extend((0..n).map(|_| random_unit_vector(d, rng)));
        Self { d, points }
    }

    /// Fibonacci lattice on `S^2`, random points otherwise.
    pub fn dense<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Self {
        if d == 2 {
            Self::fibonacci(n)
        } else {
            Self::random(d, n, rng)
        }
    }

    /// Adds extra points (for instance `±p` for a zonal function with pole `p`).
    pub fn with_points(mut self, extra: impl IntoIterator<Item = Vec<f64>>) -> Self {
        self.points.extend(extra);
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
