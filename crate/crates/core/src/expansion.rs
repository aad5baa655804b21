//! Zonal expansions `f(x) = Σ_ℓ a_ℓ K_ℓ(p, x)` and finite sums of them.
//!
//! `a_ℓ K_ℓ(p, ·)` is the projection `H_ℓ f`, so multiplier operators act
//! coefficientwise and `L₂` norms follow from `‖K_ℓ(p, ·)‖₂² = Z(d, ℓ)`.

use crate::error::{Error, Result};
use crate::special_functions::{dim_harmonic_f64, KahanSum};
use crate::sphere::{check_unit, clamped_dot, SphereFunction};
use crate::zonal_kernel::ZonalKernel;

#[derive(Debug, Clone)]
pub struct ZonalExpansion {
    pole: Vec<f64>,
    coeffs: Vec<f64>,
    // Same function in the Gegenbauer basis: c_ℓ = a_ℓ (ℓ+λ)/λ.
    profile: ZonalKernel,
}

impl ZonalExpansion {
    pub fn new(d: usize, pole: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        check_unit(&pole, d)?;
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("expansion coefficients must be finite".into()));
        }
        let lambda = (d as f64 - 1.0) / 2.0;
        let gegenbauer = coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| a * (l as f64 + lambda) / lambda)
            .collect();
        let profile = ZonalKernel::from_coeffs(d, gegenbauer, "expansion")?;
        Ok(Self { pole, coeffs, profile })
    }

    /// Same pole and dimension, new coefficients.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        Self::new(self.dim(), self.pole.clone(), coeffs).expect("pole already validated")
    }

    /// The zero function with this pole.
    pub fn zero_like(&self) -> Self {
        self.with_coeffs(vec![0.0])
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn pole(&self) -> &[f64] {
        &self.pole
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest stored degree `Λ`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest degree with a non-zero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    /// Coefficient `a_ℓ`, zero past the stored degree.
    pub fn coeff(&self, ell: usize) -> f64 {
        self.coeffs.get(ell).copied().unwrap_or(0.0)
    }

    /// `t ↦ f` as a function of `t = p·x`.
    pub fn eval_cos(&self, t: f64) -> f64 {
        self.profile.eval_cos(t)
    }

    /// `‖f‖₂ = (Σ a_ℓ² Z(d, ℓ))^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let d = self.dim();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| a * a * dim_harmonic_f64(d, l))
            .collect::<KahanSum>()
            .total()
            .sqrt()
    }

    /// Coefficientwise `self - other`; both must share dimension and pole.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(self.with_coeffs((0..n).map(|l| self.coeff(l) - other.coeff(l)).collect()))
    }

    /// Coefficientwise `self + other`; both must share dimension and pole.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(self.with_coeffs((0..n).map(|l| self.coeff(l) + other.coeff(l)).collect()))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim() + 1,
                got: other.dim() + 1,
            });
        }
        if self.pole != other.pole {
            return Err(Error::InvalidArgument("zonal expansions have different poles".into()));
        }
        Ok(())
    }
}

impl SphereFunction for ZonalExpansion {
    fn dim(&self) -> usize {
        self.profile.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.profile.eval_cos(clamped_dot(&self.pole, x))
    }
}

/// A finite sum of zonal expansions with different poles; dense in `Π_n` as
/// the poles vary.
#[derive(Debug, Clone)]
pub struct ZonalSum {
    terms: Vec<ZonalExpansion>,
}

impl ZonalSum {
    pub fn new(terms: Vec<ZonalExpansion>) -> Result<Self> {
        let d = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("zonal sum needs at least one term".into()))?
            .dim();
        if terms.iter().any(|t| t.dim() != d) {
            return Err(Error::InvalidArgument("zonal sum terms live on different spheres".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[ZonalExpansion] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    /// `∫ P² dσ = Σ_ℓ Σ_{i,j} a_{iℓ} a_{jℓ} K_ℓ(p_i, p_j)`, by the reproducing
    /// property of `K_ℓ`.
    pub fn l2_norm_squared(&self) -> f64 {
        let d = self.dim();
        let lambda = (d as f64 - 1.0) / 2.0;
        let mut acc = KahanSum::new();
        for a in &self.terms {
            for b in &self.terms {
                let n = a.coeffs.len().min(b.coeffs.len());
                let products: Vec<f64> = (0..n)
                    .map(|l| a.coeffs[l] * b.coeffs[l] * (l as f64 + lambda) / lambda)
                    .collect();
                let cross = ZonalKernel::from_coeffs(d, products, "gram").expect("finite coefficients");
                acc.add(cross.eval_cos(clamped_dot(&a.pole, &b.pole)));
            }
        }
        acc.total()
    }
}

impl SphereFunction for ZonalSum {
    fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::north_pole;

    #[test]
    fn evaluation_at_pole_sums_dimensions() {
        let f = ZonalExpansion::new(2, north_pole(2), vec![1.0, 1.0, 2.0]).unwrap();
        // K_ℓ(p, p) = Z(2, ℓ) = 2ℓ+1.
        assert!((f.eval(&[0.0, 0.0, 1.0]) - (1.0 + 3.0 + 10.0)).abs() < 1e-13);
        assert!((f.l2_norm() - (1.0 + 3.0 + 20.0f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_pole() {
        assert!(ZonalExpansion::new(2, vec![0.0, 0.0, 2.0], vec![1.0]).is_err());
        assert!(ZonalExpansion::new(3, vec![0.0, 0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn arithmetic_requires_same_pole() {
        let f = ZonalExpansion::new(2, north_pole(2), vec![1.0, 2.0]).unwrap();
        let g = ZonalExpansion::new(2, vec![1.0, 0.0, 0.0], vec![1.0]).unwrap();
        assert!(f.sub(&g).is_err());
        let diff = f.sub(&f.with_coeffs(vec![0.5, 2.0, 3.0])).unwrap();
        assert_eq!(diff.coeffs(), &[0.5, 0.0, -3.0]);
        assert_eq!(diff.effective_degree(), 2);
        assert_eq!(f.zero_like().effective_degree(), 0);
    }
}
