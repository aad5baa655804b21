//! The filtered zonal kernel
//!
//! ```text
//! Φ_L(x, y) = Σ_ℓ h(ℓ/L) K_ℓ(x, y),   K_ℓ(x, y) = (ℓ+λ)/λ · C_ℓ^λ(x·y),   λ = (d-1)/2
//! ```
//!
//! and integrals of zonal functions over the normalized measure on `S^d`.
//! A zonal integrand `g(x·p)` reduces to `∫_0^π g(cos θ) sin^{d-1}θ dθ`; the
//! normalizing constant is recovered by running the same quadrature on `g ≡ 1`.

use crate::error::{Error, Result};
use crate::filters::Filter;
use crate::special_functions::{gauss_legendre, GaussRule1D, GegenbauerOrder, KahanSum};
use crate::sphere::{check_unit, clamped_dot};

/// Coefficients `c_ℓ = h(ℓ/L)(ℓ+λ)/λ` of `Φ_L` in the Gegenbauer basis,
/// `ℓ = 0..2L-1`.
#[derive(Debug, Clone)]
pub struct ZonalKernel {
    d: usize,
    scale: usize,
    order: GegenbauerOrder,
    coeffs: Vec<f64>,
    filter_name: String,
    // Recurrence multipliers: C_{n+1} = alpha[n] t C_n - beta[n] C_{n-1}.
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ZonalKernel {
    /// Builds `Φ_L` for filter `h` on `S^d`. The sum stops at `ℓ = 2L-1`
    /// since `h` vanishes on `[2, ∞)`.
    pub fn build(h: &Filter, scale: usize, d: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidArgument("kernel degree parameter L must be >= 1".into()));
        }
        let order = GegenbauerOrder::for_sphere(d)?;
        let lambda = order.lambda();
        let l = scale as f64;
        let coeffs = (0..2 * scale)
            .map(|ell| h.eval(ell as f64 / l) * (ell as f64 + lambda) / lambda)
            .collect();
        Ok(Self::assemble(d, scale, order, coeffs, h.name().to_string()))
    }

    /// Kernel with explicitly given Gegenbauer coefficients `c_ℓ`.
    pub fn from_coeffs(d: usize, coeffs: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let order = GegenbauerOrder::for_sphere(d)?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("kernel coefficients must be finite and non-empty".into()));
        }
        let scale = coeffs.len().div_ceil(2);
        Ok(Self::assemble(d, scale, order, coeffs, name.into()))
    }

    fn assemble(d: usize, scale: usize, order: GegenbauerOrder, coeffs: Vec<f64>, filter_name: String) -> Self {
        let lambda = order.lambda();
        let n = coeffs.len();
        let alpha = (0..n).map(|k| 2.0 * (k as f64 + lambda) / (k as f64 + 1.0)).collect();
        let beta = (0..n)
            .map(|k| (k as f64 + 2.0 * lambda - 1.0) / (k as f64 + 1.0))
            .collect();
        Self {
            d,
            scale,
            order,
            coeffs,
            filter_name,
            alpha,
            beta,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// The degree parameter `L`.
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn order(&self) -> GegenbauerOrder {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn filter_name(&self) -> &str {
        &self.filter_name
    }

    /// Polynomial degree of `t ↦ Φ_L(t)`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Φ_L(t) = Σ_ℓ c_ℓ C_ℓ^λ(t)`, Gegenbauer values generated on the fly and
    /// accumulated with compensated summation in a fixed order.
    pub fn eval_cos(&self, t: f64) -> f64 {
        debug_assert!(t.abs() <= 1.0 + 1e-12, "argument {t} outside [-1, 1]");
        let mut acc = KahanSum::new();
        let mut prev = 0.0;
        let mut curr = 1.0;
        acc.add(self.coeffs[0]);
        for n in 0..self.coeffs.len() - 1 {
            let next = self.alpha[n] * t * curr - self.beta[n] * prev;
            prev = curr;
            curr = next;
            acc.add(self.coeffs[n + 1] * curr);
        }
        acc.total()
    }

    /// `Φ_L(x, y)` for unit vectors; the dot product is clamped to `[-1, 1]`.
    pub fn eval_points(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_unit(x, self.d)?;
        check_unit(y, self.d)?;
        Ok(self.eval_cos(clamped_dot(x, y)))
    }

    /// `Φ_L(x, x) = Σ_ℓ c_ℓ C_ℓ^λ(1)`.
    pub fn diagonal(&self) -> f64 {
        self.eval_cos(1.0)
    }
}

/// Default panel count used for the `L₁` norm of `Φ_L`.
pub fn default_panels(kernel: &ZonalKernel) -> usize {
    8 * kernel.scale()
}

pub const DEFAULT_NODES_PER_PANEL: usize = 8;

/// `∫_{S^d} |Φ_L(x, y)| dσ(y)`, independent of `x`.
///
/// Composite Gauss-Legendre in the polar angle over `panels` equal panels;
/// panels are split at the sign changes of `Φ_L` so each piece is smooth.
pub fn kernel_l1_norm(kernel: &ZonalKernel, panels: usize, nodes_per_panel: usize) -> Result<f64> {
    zonal_abs_power_integral(|t| kernel.eval_cos(t), kernel.dim(), 1.0, panels, nodes_per_panel)
}

/// [`kernel_l1_norm`] at `8L` panels and 8 nodes per panel.
pub fn kernel_l1_norm_default(kernel: &ZonalKernel) -> Result<f64> {
    kernel_l1_norm(kernel, default_panels(kernel), DEFAULT_NODES_PER_PANEL)
}

fn check_resolution(panels: usize, nodes_per_panel: usize) -> Result<GaussRule1D> {
    if panels == 0 || nodes_per_panel < 2 {
        return Err(Error::InvalidArgument(format!(
            "need panels >= 1 and nodes_per_panel >= 2, got {panels} and {nodes_per_panel}"
        )));
    }
    gauss_legendre(nodes_per_panel)
}

fn polar_weight(theta: f64, d: usize) -> f64 {
    theta.sin().powi(d as i32 - 1)
}

/// Normalized `∫_{S^d} g(x·p) dσ(x)` for smooth `g`.
pub fn zonal_integral<G: Fn(f64) -> f64>(g: G, d: usize, panels: usize, nodes_per_panel: usize) -> Result<f64> {
    let rule = check_resolution(panels, nodes_per_panel)?;
    let pi = std::f64::consts::PI;
    let value = rule.integrate_composite(0.0, pi, panels, |th| g(th.cos()) * polar_weight(th, d));
    let mass = rule.integrate_composite(0.0, pi, panels, |th| polar_weight(th, d));
    Ok(value / mass)
}

/// Normalized `∫_{S^d} |g(x·p)|^power dσ(x)` for a polynomial-like `g`.
///
/// Each panel is sampled at `nodes_per_panel + 1` equispaced angles; every
/// bracketed sign change is located by bisection and the panel is split there
/// before integration.
pub fn zonal_abs_power_integral<G: Fn(f64) -> f64>(
    g: G,
    d: usize,
    power: f64,
    panels: usize,
    nodes_per_panel: usize,
) -> Result<f64> {
    let rule = check_resolution(panels, nodes_per_panel)?;
    let pi = std::f64::consts::PI;
    let width = pi / panels as f64;
    let f = |theta: f64| g(theta.cos());
    let integrand = |theta: f64| f(theta).abs().powf(power) * polar_weight(theta, d);

    let mut acc = KahanSum::new();
    let mut breaks = Vec::new();
    for p in 0..panels {
        let lo = width * p as f64;
        let hi = if p + 1 == panels { pi } else { lo + width };
        breaks.clear();
        breaks.push(lo);
        let samples = nodes_per_panel;
        let step = (hi - lo) / samples as f64;
        let mut left = (lo, f(lo));
        for s in 1..=samples {
            let x = if s == samples { hi } else { lo + step * s as f64 };
            let right = (x, f(x));
            if left.1 != 0.0 && right.1 != 0.0 && (left.1 < 0.0) != (right.1 < 0.0) {
                breaks.push(bisect_sign_change(&f, left, right));
            } else if right.1 == 0.0 && s < samples {
                breaks.push(x);
            }
            left = right;
        }
        breaks.push(hi);
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                acc.add(rule.integrate(w[0], w[1], integrand));
            }
        }
    }
    let mass = rule.integrate_composite(0.0, pi, panels, |th| polar_weight(th, d));
    Ok(acc.total() / mass)
}

fn bisect_sign_change<F: Fn(f64) -> f64>(f: &F, mut lo: (f64, f64), mut hi: (f64, f64)) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo.0 + hi.0);
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (lo.1 < 0.0) {
            lo = (mid, fm);
        } else {
            hi = (mid, fm);
        }
    }
    0.5 * (lo.0 + hi.0)
}
