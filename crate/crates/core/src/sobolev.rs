//! Test functions of prescribed Sobolev smoothness and `L_p` error measurement.
//!
//! The profile `a_ℓ = (1+ℓ)^{-s-d/2-ε}` gives a zonal expansion with
//!
//! ```text
//! ‖f^{(s)}‖₂² = Σ_{ℓ≥1} (ℓ(ℓ+d-1))^s a_ℓ² Z(d, ℓ) < ∞   for ε > 0,
//! ```
//!
//! since `Z(d, ℓ) ~ ℓ^{d-1}`. Norms are
//!
//! ```text
//! ‖f‖_p = (∫ |f|^p dσ)^{1/p},   ‖f‖_{W_p^s} = ‖f‖_p + ‖f^{(s)}‖_p.
//! ```
//!
//! `p = 2` goes through Parseval, other finite `p` through quadrature and
//! `p = ∞` through sampling on a dense grid (a lower bound for the sup).

use rayon::prelude::*;

use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::expansion::ZonalExpansion;
use crate::filters::Filter;
use crate::operators::apply_semidiscrete;
use crate::special_functions::{dim_harmonic_f64, KahanSum};
use crate::sphere::{SampleGrid, SphereFunction};
use crate::zonal_kernel::{zonal_abs_power_integral, DEFAULT_NODES_PER_PANEL};

/// Default excess decay.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Minimum number of grid points for sup norms.
pub const SUP_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevProfile {
    d: usize,
    s: f64,
    epsilon: f64,
    max_degree: usize,
}

impl SobolevProfile {
    pub fn new(d: usize, s: f64, epsilon: f64, max_degree: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::InvalidArgument(format!("smoothness must be positive, got {s}")));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!("excess decay must be >= 0, got {epsilon}")));
        }
        Ok(Self {
            d,
            s,
            epsilon,
            max_degree,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn smoothness(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `a_ℓ = (1+ℓ)^{-s-d/2-ε}` for `ℓ ≤ Λ`.
    pub fn coeffs(&self) -> Vec<f64> {
        let exponent = -self.s - self.d as f64 / 2.0 - self.epsilon;
        (0..=self.max_degree)
            .map(|l| (1.0 + l as f64).powf(exponent))
            .collect()
    }
}

pub fn make_test_function(profile: &SobolevProfile, pole: &[f64]) -> Result<ZonalExpansion> {
    ZonalExpansion::new(profile.dim(), pole.to_vec(), profile.coeffs())
}

/// `f^{(s)}`, with multipliers `(ℓ(ℓ+d-1))^{s/2}`; the mean is dropped.
pub fn derivative(f: &ZonalExpansion, s: f64) -> ZonalExpansion {
    let d = f.dim() as f64;
    f.with_coeffs(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(l, a)| {
                if l == 0 {
                    0.0
                } else {
                    let l = l as f64;
                    (l * (l + d - 1.0)).powf(s / 2.0) * a
                }
            })
            .collect(),
    )
}

/// `‖f‖₂ + ‖f^{(s)}‖₂`.
pub fn sobolev_norm_2(f: &ZonalExpansion, s: f64) -> f64 {
    f.l2_norm() + derivative(f, s).l2_norm()
}

/// Where `L_p` norms of a black-box difference are measured.
#[derive(Debug, Clone, Copy)]
pub enum Measure<'a> {
    /// Positive-weight quadrature, for finite `p`.
    Rule(&'a CubatureRule),
    /// Maximum over sample points, for `p = ∞`.
    Grid(&'a SampleGrid),
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("L_p exponent must lie in [1, ∞], got {p}")))
    }
}

fn sup_over(points: &[Vec<f64>], g: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    points.par_iter().map(|x| g(x).abs()).reduce(|| 0.0, f64::max)
}

/// `‖f - g‖_p` for black boxes.
pub fn lp_error(f: &dyn SphereFunction, g: &dyn SphereFunction, p: f64, measure: Measure<'_>) -> Result<f64> {
    check_exponent(p)?;
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim() + 1,
            got: g.dim() + 1,
        });
    }
    match measure {
        Measure::Grid(grid) if p.is_infinite() => Ok(sup_over(grid.points(), |x| f.eval(x) - g.eval(x))),
        Measure::Rule(rule) if p.is_finite() => {
            if rule.dim() != f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: f.dim() + 1,
                    got: rule.dim() + 1,
                });
            }
            let diffs: Vec<f64> = rule.nodes().par_iter().map(|y| (f.eval(y) - g.eval(y)).abs()).collect();
            let integral = diffs
                .iter()
                .zip(rule.weights())
                .map(|(v, w)| w * v.powf(p))
                .collect::<KahanSum>()
                .total();
            Ok(integral.powf(1.0 / p))
        }
        Measure::Grid(_) => Err(Error::InvalidArgument("finite p needs a quadrature rule".into())),
        Measure::Rule(_) => Err(Error::InvalidArgument("p = ∞ needs a sample grid".into())),
    }
}

/// `(Σ_ℓ (a_ℓ - b_ℓ)² Z(d, ℓ))^{1/2}` for expansions with a common pole.
pub fn l2_distance(f: &ZonalExpansion, g: &ZonalExpansion) -> Result<f64> {
    f.check_compatible(g)?;
    let d = f.dim();
    let n = f.coeffs().len().max(g.coeffs().len());
    Ok((0..n)
        .map(|l| {
            let c = f.coeff(l) - g.coeff(l);
            c * c * dim_harmonic_f64(d, l)
        })
        .collect::<KahanSum>()
        .total()
        .sqrt())
}

/// `‖f - g‖_p` for expansions with a common pole.
///
/// The difference is zonal, so finite `p ≠ 2` reduces to a one-dimensional
/// integral in the polar angle. For `p = ∞` the difference is sampled on
/// `sup_grid` together with `±p`.
pub fn lp_distance_zonal(f: &ZonalExpansion, g: &ZonalExpansion, p: f64, sup_grid: &SampleGrid) -> Result<f64> {
    check_exponent(p)?;
    let diff = f.sub(g)?;
    if p == 2.0 {
        return l2_distance(f, g);
    }
    if p.is_infinite() {
        if sup_grid.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim() + 1,
                got: sup_grid.dim() + 1,
            });
        }
        let on_grid = sup_over(sup_grid.points(), |x| diff.eval(x));
        let at_poles = diff.eval_cos(1.0).abs().max(diff.eval_cos(-1.0).abs());
        return Ok(on_grid.max(at_poles));
    }
    let panels = 2 * (diff.degree() + 1);
    let integral = zonal_abs_power_integral(|t| diff.eval_cos(t), f.dim(), p, panels, DEFAULT_NODES_PER_PANEL)?;
    Ok(integral.powf(1.0 / p))
}

/// `‖f - V_L f‖_p`, an upper bound for `E_L(f)_p` (not the infimum).
pub fn best_approx_upper(f: &ZonalExpansion, h: &Filter, scale: usize, p: f64, sup_grid: &SampleGrid) -> Result<f64> {
    let approx = apply_semidiscrete(h, scale, f)?;
    lp_distance_zonal(f, &approx, p, sup_grid)
}
