//! Gegenbauer polynomials, harmonic-space dimensions and Gauss-Legendre rules.
//!
//! Gegenbauer polynomials follow the generating-function normalization
//!
//! ```text
//! (1 - 2zt + z²)^(-λ) = Σ_k C_k^λ(t) z^k,   C_k^λ(1) = Γ(k+2λ) / (Γ(2λ) Γ(k+1))
//! ```
//!
//! and are evaluated by the three-term recurrence obtained by differentiating
//! the generating function in `z`:
//!
//! ```text
//! (n+1) C_{n+1}(t) = 2(n+λ) t C_n(t) - (n+2λ-1) C_{n-1}(t),   C_0 = 1, C_1 = 2λt
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Neumaier's variant of compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<KahanSum>().total()
}

/// Dimension `Z(d, ℓ)` of the space of spherical harmonics of degree `ℓ` on `S^d`.
///
/// `Z(d, 0) = 1` and `Z(d, ℓ) = (2ℓ+d-1) (ℓ+d-2)! / ((d-1)! ℓ!)` otherwise,
/// evaluated as `(2ℓ+d-1) · binom(ℓ+d-2, ℓ) / (d-1)` in checked integer arithmetic.
pub fn dim_harmonic(d: usize, ell: usize) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("sphere dimension d = {d} < 2")));
    }
    if ell == 0 {
        return Ok(1);
    }
    let overflow = || Error::Overflow("dim_harmonic");
    // binom(ell + d - 2, d - 2) via the exact running product.
    let n = (ell + d - 2) as u128;
    let k = (d - 2) as u128;
    let mut binom: u128 = 1;
    for i in 1..=k {
        binom = binom.checked_mul(n - k + i).ok_or_else(overflow)? / i;
    }
    let lead = (2 * ell + d - 1) as u128;
    let z = lead.checked_mul(binom).ok_or_else(overflow)? / (d as u128 - 1);
    u64::try_from(z).map_err(|_| overflow())
}

/// Floating-point `Z(d, ℓ)`; panics only if the exact value overflows `u64`.
pub(crate) fn dim_harmonic_f64(d: usize, ell: usize) -> f64 {
    dim_harmonic(d, ell).expect("harmonic dimension overflow") as f64
}

/// Gegenbauer order `λ = (d-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerOrder(f64);

impl GegenbauerOrder {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.5 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidArgument(format!(
                "Gegenbauer order {lambda} must be at least 1/2"
            )))
        }
    }

    /// The order attached to the sphere `S^d`.
    pub fn for_sphere(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("sphere dimension d = {d} < 2")));
        }
        Self::new((d as f64 - 1.0) / 2.0)
    }

    pub fn lambda(self) -> f64 {
        self.0
    }
}

/// `C_ℓ^λ(t)` by the three-term recurrence.
pub fn gegenbauer_eval(order: GegenbauerOrder, ell: usize, t: f64) -> f64 {
    debug_assert!(t.abs() <= 1.0 + 1e-12, "argument {t} outside [-1, 1]");
    let lambda = order.0;
    if ell == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 2.0 * lambda * t;
    for n in 1..ell {
        let nf = n as f64;
        let next = (2.0 * (nf + lambda) * t * curr - (nf + 2.0 * lambda - 1.0) * prev) / (nf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Fills `out[0..=max_ell]` with `C_0^λ(t), …, C_max_ell^λ(t)` in one pass.
pub fn gegenbauer_fill(order: GegenbauerOrder, t: f64, out: &mut [f64]) {
    let lambda = order.0;
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 2.0 * lambda * t;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] =
            (2.0 * (nf + lambda) * t * out[n] - (nf + 2.0 * lambda - 1.0) * out[n - 1]) / (nf + 1.0);
    }
}

/// All degrees `0..=max_ell` of `C_ℓ^λ(t)`.
pub fn gegenbauer_batch(order: GegenbauerOrder, max_ell: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_ell + 1];
    gegenbauer_fill(order, t, &mut out);
    out
}

/// `C_ℓ^λ(1) = Γ(ℓ+2λ) / (Γ(2λ) Γ(ℓ+1)) = Π_{j=1}^{ℓ} (j - 1 + 2λ) / j`.
pub fn gegenbauer_at_one(order: GegenbauerOrder, ell: usize) -> Result<f64> {
    let two_lambda = 2.0 * order.0;
    let mut value = 1.0_f64;
    for j in 1..=ell {
        let jf = j as f64;
        value *= (jf - 1.0 + two_lambda) / jf;
        if !value.is_finite() {
            return Err(Error::Overflow("gegenbauer_at_one"));
        }
    }
    Ok(value)
}

/// One-dimensional quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    degree: usize,
}

impl GaussRule1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with the rule mapped affinely onto `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum = compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(mid + half * x)),
        );
        half * sum
    }

    /// Composite rule over `panels` equal subintervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        let mut acc = KahanSum::new();
        for p in 0..panels {
            let lo = a + width * p as f64;
            acc.add(self.integrate(lo, lo + width, &mut f));
        }
        acc.total()
    }
}

/// `P_n(x)` and `P'_n(x)` for `|x| < 1`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut curr = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * curr - kf * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
    }
    let deriv = n as f64 * (x * curr - prev) / (x * x - 1.0);
    (curr, deriv)
}

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// The `n`-point Gauss-Legendre rule, exact through degree `2n - 1`.
///
/// Nodes are the roots of `P_n`, found by Newton's method from the
/// asymptotic guesses `cos(π(i - 1/4)/(n + 1/2))`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule1D> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre rule needs n >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots are symmetric; solve for the upper half and mirror.
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { n });
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    Ok(GaussRule1D {
        nodes,
        weights,
        degree: 2 * n - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power-series coefficients of `(1 - 2zt + z²)^(-λ)` up to `z^order`,
    /// via the J.C.P. Miller recurrence for powers of a series.
    fn generating_function_series(lambda: f64, t: f64, order: usize) -> Vec<f64> {
        let base = [1.0, -2.0 * t, 1.0];
        let alpha = -lambda;
        let mut g = vec![0.0; order + 1];
        g[0] = 1.0;
        for n in 1..=order {
            let mut s = 0.0;
            for k in 1..=n.min(2) {
                s += (alpha * k as f64 - (n - k) as f64) * base[k] * g[n - k];
            }
            g[n] = s / n as f64;
        }
        g
    }

    #[test]
    fn recurrence_matches_generating_function_series() {
        for &lambda in &[0.5, 1.0, 1.5, 2.0, 3.5] {
            let order = GegenbauerOrder::new(lambda).unwrap();
            for &t in &[-1.0, -0.73, -0.2, 0.0, 0.31, 0.9, 1.0] {
                let series = generating_function_series(lambda, t, 12);
                let batch = gegenbauer_batch(order, 12, t);
                for (ell, (&a, &b)) in series.iter().zip(&batch).enumerate() {
                    assert!(
                        (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                        "λ={lambda} t={t} ℓ={ell}: series {a} vs recurrence {b}"
                    );
                    assert_eq!(b, gegenbauer_eval(order, ell, t));
                }
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dim_harmonic(2, 0).unwrap(), 1);
        assert_eq!(dim_harmonic(2, 5).unwrap(), 11);
        assert_eq!(dim_harmonic(3, 4).unwrap(), 25);
        assert_eq!(dim_harmonic(5, 0).unwrap(), 1);
    }

    /// Direct factorial evaluation in u128 for small arguments.
    fn dim_by_factorials(d: usize, ell: usize) -> u128 {
        if ell == 0 {
            return 1;
        }
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        (2 * ell + d - 1) as u128 * fact(ell + d - 2) / (fact(d - 1) * fact(ell))
    }

    #[test]
    fn dimension_matches_closed_forms() {
        for ell in 0..=100 {
            assert_eq!(dim_harmonic(2, ell).unwrap(), 2 * ell as u64 + 1);
            assert_eq!(dim_harmonic(3, ell).unwrap(), (ell as u64 + 1).pow(2));
        }
        for d in 2..8 {
            for ell in 0..20 {
                assert_eq!(dim_harmonic(d, ell).unwrap() as u128, dim_by_factorials(d, ell));
            }
        }
    }

    #[test]
    fn dimension_overflow_is_reported() {
        assert!(matches!(dim_harmonic(60, 1 << 20), Err(Error::Overflow(_))));
        assert!(dim_harmonic(1, 3).is_err());
    }

    #[test]
    fn gegenbauer_examples() {
        let half = GegenbauerOrder::new(0.5).unwrap();
        assert_eq!(gegenbauer_eval(GegenbauerOrder::new(2.3).unwrap(), 0, 0.3), 1.0);
        assert!((gegenbauer_eval(half, 1, 0.4) - 0.4).abs() < 1e-15);
        assert!((gegenbauer_eval(half, 7, 1.0) - 1.0).abs() < 1e-14);
        assert!((gegenbauer_at_one(half, 10).unwrap() - 1.0).abs() < 1e-15);
        assert!((gegenbauer_at_one(GegenbauerOrder::new(1.0).unwrap(), 3).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(gegenbauer_at_one(half, 0).unwrap(), 1.0);
    }

    #[test]
    fn gegenbauer_at_one_overflow() {
        let big = GegenbauerOrder::new(200.0).unwrap();
        assert!(matches!(gegenbauer_at_one(big, 100_000), Err(Error::Overflow(_))));
    }

    #[test]
    fn order_rejects_small_lambda() {
        assert!(GegenbauerOrder::new(0.25).is_err());
        assert!(GegenbauerOrder::new(f64::NAN).is_err());
        assert_eq!(GegenbauerOrder::for_sphere(4).unwrap().lambda(), 1.5);
    }

    #[test]
    fn endpoint_and_bound() {
        for d in 2..=6 {
            let order = GegenbauerOrder::for_sphere(d).unwrap();
            let at_one: Vec<f64> = (0..=64).map(|l| gegenbauer_at_one(order, l).unwrap()).collect();
            let ones = gegenbauer_batch(order, 64, 1.0);
            for ell in 0..=64 {
                assert!((ones[ell] - at_one[ell]).abs() <= 1e-12 * at_one[ell]);
            }
            for i in 0..=400 {
                let t = -1.0 + 2.0 * i as f64 / 400.0;
                let vals = gegenbauer_batch(order, 64, t);
                for ell in 0..=64 {
                    assert!(vals[ell].abs() <= at_one[ell] + 1e-10, "d={d} ℓ={ell} t={t}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_under_gegenbauer_weight() {
        // The weight (1-t²)^(λ-1/2) becomes sin^(2λ)θ after t = cos θ.
        let rule = gauss_legendre(20).unwrap();
        for &lambda in &[0.5, 1.0, 1.5] {
            let order = GegenbauerOrder::new(lambda).unwrap();
            for m in 0..=20 {
                for n in 0..m {
                    let v = rule.integrate_composite(0.0, PI, 32, |theta| {
                        let t = theta.cos();
                        gegenbauer_eval(order, m, t)
                            * gegenbauer_eval(order, n, t)
                            * theta.sin().powf(2.0 * lambda)
                    });
                    assert!(v.abs() < 1e-10, "λ={lambda} m={m} n={n}: {v}");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_examples() {
        let one = gauss_legendre(1).unwrap();
        assert_eq!(one.nodes(), &[0.0]);
        assert!((one.weights()[0] - 2.0).abs() < 1e-15);

        let two = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((two.nodes()[0] + r).abs() < 1e-15 && (two.nodes()[1] - r).abs() < 1e-15);
        assert!(two.weights().iter().all(|w| (w - 1.0).abs() < 1e-15));
        for (k, exact) in [(0, 2.0), (1, 0.0), (2, 2.0 / 3.0), (3, 0.0)] {
            assert!((two.integrate(-1.0, 1.0, |t| t.powi(k)) - exact).abs() < 1e-15);
        }

        let five = gauss_legendre(5).unwrap();
        assert!((five.integrate(-1.0, 1.0, |t| t.powi(8)) - 2.0 / 9.0).abs() < 1e-14);
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn gauss_legendre_structure() {
        for n in [3, 8, 17, 64, 255] {
            let rule = gauss_legendre(n).unwrap();
            assert_eq!(rule.degree(), 2 * n - 1);
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            let total: f64 = compensated_sum(rule.weights().iter().copied());
            assert!((total - 2.0).abs() < 1e-13);
            let deg = 2 * n - 2;
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((rule.integrate(-1.0, 1.0, |t| t.powi(deg as i32)) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let mut terms = vec![1.0];
        terms.extend(std::iter::repeat_n(1e-16, 10_000));
        assert!((compensated_sum(terms.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
