//! The filtered approximation operators.
//!
//! * `V_L f = Σ_ℓ h(ℓ/L) H_ℓ f` acts on [`ZonalExpansion`]s as a coefficient
//!   multiplier; exact Fourier coefficients of a black box are not available,
//!   so black boxes go through the discrete operator instead.
//! * `V_{L,N} f(x) = Σ_j W_j f(y_j) Φ_L(y_j, x)` needs a rule certified on
//!   `Π_{3L-1}`, which makes it reproduce `Π_L`.
//! * Cesàro means, the summation-by-parts form of `V_L` and the dyadic blocks
//!   `τ_r` are provided to cross-check the multiplier route.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::filters::{forward_difference, Filter};
pub use crate::expansion::{ZonalExpansion, ZonalSum};
use crate::special_functions::{dim_harmonic_f64, gegenbauer_fill, KahanSum};
use crate::sphere::{check_unit, clamped_dot, dot, norm, random_unit_vector, SphereFunction};
use crate::zonal_kernel::{kernel_l1_norm_default, ZonalKernel};

fn require_proper(h: &Filter) -> Result<()> {
    if h.is_proper_filter() {
        Ok(())
    } else {
        Err(Error::ImproperFilter(h.name().to_string()))
    }
}

/// Filter multipliers `h(ℓ/L)` applied to `f`, truncated at `min(Λ, 2L-1)`.
pub fn apply_semidiscrete(h: &Filter, scale: usize, f: &ZonalExpansion) -> Result<ZonalExpansion> {
    require_proper(h)?;
    if scale == 0 {
        return Err(Error::InvalidArgument("L must be >= 1".into()));
    }
    let l = scale as f64;
    let top = f.degree().min(2 * scale - 1);
    Ok(f.with_coeffs(
        (0..=top)
            .map(|ell| h.eval(ell as f64 / l) * f.coeff(ell))
            .collect(),
    ))
}

/// The polynomial `x ↦ Σ_j W_j f(y_j) Φ_L(y_j, x)`.
#[derive(Debug, Clone)]
pub struct DiscreteApproximation {
    kernel: ZonalKernel,
    nodes: Vec<Vec<f64>>,
    // W_j f(y_j)
    weighted_values: Vec<f64>,
}

impl DiscreteApproximation {
    pub fn kernel(&self) -> &ZonalKernel {
        &self.kernel
    }

    /// Evaluation with a fixed node order.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weighted_values)
            .map(|(y, g)| g * self.kernel.eval_cos(clamped_dot(y, x)))
            .collect::<KahanSum>()
            .total()
    }

    /// Evaluates at many points in parallel; results keep the input order.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<f64> {
        points.par_iter().map(|x| self.eval_point(x)).collect()
    }

    /// The projection onto zonal functions about `pole`,
    /// `β_ℓ = h(ℓ/L) Σ_j W_j f(y_j) K_ℓ(y_j, p) / Z(d, ℓ)`.
    ///
    /// This equals the approximation itself whenever the latter is zonal about
    /// `pole` (for instance a zonal `f` about the north pole with a product
    /// rule). The identity is verified at `probes` random points and the call
    /// fails with [`Error::NotZonal`] if the relative defect exceeds `1e-10`.
    pub fn to_zonal(&self, pole: &[f64], probes: usize, seed: u64) -> Result<ZonalExpansion> {
        let d = self.kernel.dim();
        check_unit(pole, d)?;
        let order = self.kernel.order();
        let n = self.kernel.coeffs().len();
        let mut acc = vec![KahanSum::new(); n];
        let mut c = vec![0.0; n];
        for (y, g) in self.nodes.iter().zip(&self.weighted_values) {
            gegenbauer_fill(order, clamped_dot(y, pole), &mut c);
            for (a, v) in acc.iter_mut().zip(&c) {
                a.add(g * v);
            }
        }
        // Φ_L coefficient c_ℓ = h(ℓ/L)(ℓ+λ)/λ, and K_ℓ = (ℓ+λ)/λ C_ℓ.
        let coeffs = acc
            .iter()
            .zip(self.kernel.coeffs())
            .enumerate()
            .map(|(l, (a, ck))| ck * a.total() / dim_harmonic_f64(d, l))
            .collect();
        let zonal = ZonalExpansion::new(d, pole.to_vec(), coeffs)?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points: Vec<Vec<f64>> = (0..probes).map(|_| random_unit_vector(d, &mut rng)).collect();
        points.push(pole.to_vec());
        let direct = self.eval_many(&points);
        let scale = direct.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let defect = points
            .iter()
            .zip(&direct)
            .map(|(x, v)| (zonal.eval(x) - v).abs())
            .fold(0.0, f64::max)
            / scale;
        if defect > 1e-10 {
            return Err(Error::NotZonal { defect });
        }
        Ok(zonal)
    }
}

impl SphereFunction for DiscreteApproximation {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.eval_point(x)
    }
}

/// Filtered hyperinterpolation of a black-box `f` with a rule certified on
/// `Π_{3L-1}`.
pub fn apply_fully_discrete(
    h: &Filter,
    scale: usize,
    rule: &CubatureRule,
    f: &dyn SphereFunction,
) -> Result<DiscreteApproximation> {
    require_proper(h)?;
    if scale == 0 {
        return Err(Error::InvalidArgument("L must be >= 1".into()));
    }
    rule.require_certified(3 * scale - 1)?;
    if f.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim() + 1,
            got: f.dim() + 1,
        });
    }
    let kernel = ZonalKernel::build(h, scale, rule.dim())?;
    let weighted_values = rule
        .nodes()
        .par_iter()
        .zip(rule.weights())
        .map(|(y, w)| w * f.eval(y))
        .collect();
    Ok(DiscreteApproximation {
        kernel,
        nodes: rule.nodes().to_vec(),
        weighted_values,
    })
}

/// `‖V_L‖ = ∫ |Φ_L(x, y)| dσ(y)` on the space of continuous functions.
pub fn operator_norm_semidiscrete(h: &Filter, scale: usize, d: usize) -> Result<f64> {
    kernel_l1_norm_default(&ZonalKernel::build(h, scale, d)?)
}

/// Lebesgue function `x ↦ Σ_j W_j |Φ_L(x, y_j)|` of the discrete operator.
pub fn lebesgue_function(kernel: &ZonalKernel, rule: &CubatureRule, x: &[f64]) -> f64 {
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(y, w)| w * kernel.eval_cos(clamped_dot(x, y)).abs())
        .collect::<KahanSum>()
        .total()
}

/// Golden-section maximization of the Lebesgue function along great circles
/// through `x`, over arcs of half-width `half_width`.
fn refine_along_circles(
    kernel: &ZonalKernel,
    rule: &CubatureRule,
    x: &[f64],
    half_width: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    const CIRCLES: usize = 3;
    const ITERATIONS: usize = 24;
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..CIRCLES {
        // Tangent direction at x.
        let r = random_unit_vector(kernel.dim(), rng);
        let proj = dot(&r, x);
        let tangent: Vec<f64> = r.iter().zip(x).map(|(a, b)| a - proj * b).collect();
        let tn = norm(&tangent);
        if tn < 1e-8 {
            continue;
        }
        let point = |theta: f64| -> Vec<f64> {
            let (s, c) = theta.sin_cos();
            let p: Vec<f64> = x.iter().zip(&tangent).map(|(a, t)| c * a + s * t / tn).collect();
            let n = norm(&p);
            p.into_iter().map(|v| v / n).collect()
        };
        let value = |theta: f64| lebesgue_function(kernel, rule, &point(theta));
        let (mut a, mut b) = (-half_width, half_width);
        let mut c = b - invphi * (b - a);
        let mut d = a + invphi * (b - a);
        let (mut fc, mut fd) = (value(c), value(d));
        best = best.max(fc).max(fd);
        for _ in 0..ITERATIONS {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = value(c);
                best = best.max(fc);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = value(d);
                best = best.max(fd);
            }
        }
    }
    best
}

/// Lower bound for `‖V_{L,N}‖ = sup_x Σ_j W_j |Φ_L(x, y_j)|`.
///
/// Probes every rule node, then `probes` seeded random points. Each probe that
/// sets a new running maximum is refined by golden-section search along great
/// circles through it. The probe sequence is a prefix of a fixed seeded stream,
/// so the estimate never decreases as `probes` grows.
pub fn operator_norm_fully_discrete(
    h: &Filter,
    scale: usize,
    rule: &CubatureRule,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    rule.require_certified(3 * scale - 1)?;
    let kernel = ZonalKernel::build(h, scale, rule.dim())?;
    Ok(lebesgue_sup_lower_bound(&kernel, rule, probes, seed))
}

/// [`operator_norm_fully_discrete`] for an explicit kernel.
pub fn lebesgue_sup_lower_bound(kernel: &ZonalKernel, rule: &CubatureRule, probes: usize, seed: u64) -> f64 {
    let d = rule.dim();
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<f64>> = rule.nodes().to_vec();
    candidates.extend((0..probes).map(|_| random_unit_vector(d, &mut probe_rng)));

    let values: Vec<f64> = candidates
        .par_iter()
        .map(|x| lebesgue_function(kernel, rule, x))
        .collect();
    let half_width = std::f64::consts::PI / (2.0 * (kernel.degree().max(1)) as f64);
    let mut best = f64::NEG_INFINITY;
    let mut records = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            records.push(i);
        }
    }
    for i in records {
        // Refinement randomness depends only on the probe index.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1)));
        best = best.max(refine_along_circles(kernel, rule, &candidates[i], half_width, &mut rng));
    }
    best
}

/// Cesàro numbers `A_k^δ = binom(k+δ, k)` for `k ≤ k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroSpec {
    delta: f64,
    table: Vec<f64>,
}

impl CesaroSpec {
    /// Builds `A_k^δ` by the running product `A_k = A_{k-1}(k+δ)/k`.
    pub fn new(delta: f64, k_max: usize) -> Result<Self> {
        if delta.is_nan() || delta <= -1.0 {
            return Err(Error::InvalidArgument(format!("Cesàro order {delta} must exceed -1")));
        }
        let mut table = Vec::with_capacity(k_max + 1);
        table.push(1.0);
        for k in 1..=k_max {
            let prev = table[k - 1];
            table.push(prev * (k as f64 + delta) / k as f64);
        }
        Ok(Self { delta, table })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn a(&self, k: usize) -> f64 {
        self.table[k]
    }
}

/// `σ_k^δ f = (1/A_k^δ) Σ_{ℓ ≤ k} A_{k-ℓ}^δ H_ℓ f`.
pub fn cesaro_mean(spec: &CesaroSpec, k: usize, f: &ZonalExpansion) -> Result<ZonalExpansion> {
    if k >= spec.table.len() {
        return Err(Error::InvalidArgument(format!(
            "Cesàro table holds k <= {}, requested {k}",
            spec.table.len() - 1
        )));
    }
    let ak = spec.a(k);
    let top = k.min(f.degree());
    Ok(f.with_coeffs((0..=top).map(|l| spec.a(k - l) / ak * f.coeff(l)).collect()))
}

/// `V_L f = Σ_{k=0}^{2L+r} Δ^{r+1}h(k/L) A_k^r σ_k^r(f)`.
///
/// Terms with `k ≥ 2L` vanish for proper filters; they are summed anyway.
pub fn summation_by_parts_apply(h: &Filter, scale: usize, r: usize, f: &ZonalExpansion) -> Result<ZonalExpansion> {
    require_proper(h)?;
    if scale == 0 {
        return Err(Error::InvalidArgument("L must be >= 1".into()));
    }
    let diffs = forward_difference(h, scale, r + 1);
    let k_max = 2 * scale + r;
    let spec = CesaroSpec::new(r as f64, k_max)?;
    let top = f.degree().min(k_max);
    let mut acc = vec![KahanSum::new(); top + 1];
    for k in 0..=k_max {
        let weight = diffs.values[k];
        if weight == 0.0 {
            continue;
        }
        // A_k^r σ_k^r f has coefficients A_{k-ℓ}^r a_ℓ.
        let sigma = cesaro_mean(&spec, k, f)?;
        let ak = spec.a(k);
        for (l, b) in sigma.coeffs().iter().enumerate() {
            acc[l].add(weight * ak * b);
        }
    }
    Ok(f.with_coeffs(acc.iter().map(KahanSum::total).collect()))
}

/// `τ_0 = V_1 f`, `τ_r = V_{2^r} f - V_{2^{r-1}} f`.
pub fn dyadic_block(h: &Filter, r: usize, f: &ZonalExpansion) -> Result<ZonalExpansion> {
    let upper = apply_semidiscrete(h, 1 << r, f)?;
    if r == 0 {
        return Ok(upper);
    }
    upper.sub(&apply_semidiscrete(h, 1 << (r - 1), f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubature::DEFAULT_TRIALS;
    use crate::sphere::north_pole;
    use proptest::prelude::*;
    use rand::Rng;

    fn catalogue() -> Vec<Filter> {
        vec![
            Filter::step(),
            Filter::vp(),
            Filter::hermite(1),
            Filter::hermite(2),
            Filter::smooth(),
            Filter::counterexample(2).unwrap(),
        ]
    }

    fn certified_rule(t: usize) -> CubatureRule {
        let mut rule = CubatureRule::product_rule_s2(t).unwrap();
        assert!(rule.certify(DEFAULT_TRIALS, 11).pass);
        rule
    }

    fn random_expansion(d: usize, degree: usize, rng: &mut ChaCha8Rng) -> ZonalExpansion {
        let coeffs = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ZonalExpansion::new(d, north_pole(d), coeffs).unwrap()
    }

    fn max_rel_dev(a: &ZonalExpansion, b: &ZonalExpansion) -> f64 {
        let n = a.coeffs().len().max(b.coeffs().len());
        let scale = (0..n).map(|l| b.coeff(l).abs()).fold(1e-300, f64::max);
        (0..n).map(|l| (a.coeff(l) - b.coeff(l)).abs()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn semidiscrete_examples() {
        let f = ZonalExpansion::new(2, north_pole(2), vec![1.0, 1.0]).unwrap();
        let g = apply_semidiscrete(&Filter::step(), 1, &f).unwrap();
        assert_eq!(g.coeffs(), &[1.0, 1.0]);

        let f = ZonalExpansion::new(2, north_pole(2), vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let g = apply_semidiscrete(&Filter::vp(), 2, &f).unwrap();
        assert_eq!(g.coeff(3), 0.5);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_expansion(2, 40, &mut rng);
        for h in catalogue() {
            let g = apply_semidiscrete(&h, 6, &f).unwrap();
            assert!(g.effective_degree() <= 11);
        }
        assert!(matches!(
            apply_semidiscrete(&Filter::riesz(1.0).unwrap(), 4, &f),
            Err(Error::ImproperFilter(_))
        ));
    }

    #[test]
    fn multipliers_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_expansion(3, 30, &mut rng);
        let (h, g) = (Filter::vp(), Filter::smooth());
        let both = apply_semidiscrete(&g, 5, &apply_semidiscrete(&h, 7, &f).unwrap()).unwrap();
        for l in 0..=30 {
            let expected = g.eval(l as f64 / 5.0) * (h.eval(l as f64 / 7.0) * f.coeff(l));
            assert_eq!(both.coeff(l), expected);
        }
    }

    #[test]
    fn fully_discrete_reproduces_constants_and_kernels() {
        let rule = certified_rule(11);
        let one = crate::sphere::FnOnSphere::new(2, |_: &[f64]| 1.0);
        let q = [0.48, -0.6, 0.64];
        let k2 = ZonalExpansion::new(2, q.to_vec(), vec![0.0, 0.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for h in catalogue() {
            let v1 = apply_fully_discrete(&h, 4, &rule, &one).unwrap();
            let v2 = apply_fully_discrete(&h, 4, &rule, &k2).unwrap();
            for _ in 0..100 {
                let x = random_unit_vector(2, &mut rng);
                assert!((v1.eval(&x) - 1.0).abs() < 1e-12);
                assert!((v2.eval(&x) - k2.eval(&x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fully_discrete_matches_semidiscrete_on_band_limited() {
        let rule = certified_rule(17);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pole = random_unit_vector(2, &mut rng);
        let f = ZonalExpansion::new(2, pole, vec![0.3, -1.0, 0.5, 0.25, 2.0, -0.7, 0.1]).unwrap();
        let h = Filter::hermite(1);
        let semi = apply_semidiscrete(&h, 6, &f).unwrap();
        let full = apply_fully_discrete(&h, 6, &rule, &f).unwrap();
        for _ in 0..50 {
            let x = random_unit_vector(2, &mut rng);
            assert!((semi.eval(&x) - full.eval(&x)).abs() < 1e-10);
        }
    }

    #[test]
    fn fully_discrete_requires_certification() {
        let mut rule = CubatureRule::product_rule_s2(11).unwrap();
        let one = crate::sphere::FnOnSphere::new(2, |_: &[f64]| 1.0);
        assert!(matches!(
            apply_fully_discrete(&Filter::vp(), 4, &rule, &one),
            Err(Error::UncertifiedRule { .. })
        ));
        rule.certify(DEFAULT_TRIALS, 0);
        assert!(apply_fully_discrete(&Filter::vp(), 4, &rule, &one).is_ok());
        assert!(matches!(
            apply_fully_discrete(&Filter::vp(), 5, &rule, &one),
            Err(Error::UncertifiedRule { .. })
        ));
    }

    #[test]
    fn zonal_projection_of_product_rule_output() {
        let rule = certified_rule(23);
        let f = ZonalExpansion::new(2, north_pole(2), (0..30).map(|l| 1.0 / (1.0 + l as f64).powi(3)).collect())
            .unwrap();
        let approx = apply_fully_discrete(&Filter::vp(), 8, &rule, &f).unwrap();
        let zonal = approx.to_zonal(&north_pole(2), 10, 3).unwrap();
        assert!(zonal.effective_degree() <= 15);
        // Off-axis poles are not a symmetry of the rule.
        let tilted = vec![0.6, 0.0, 0.8];
        let g = ZonalExpansion::new(2, tilted.clone(), f.coeffs().to_vec()).unwrap();
        let approx = apply_fully_discrete(&Filter::vp(), 7, &rule, &g).unwrap();
        assert!(matches!(approx.to_zonal(&tilted, 10, 3), Err(Error::NotZonal { .. })));
    }

    #[test]
    fn semidiscrete_norm_examples() {
        let v = operator_norm_semidiscrete(&Filter::step(), 1, 2).unwrap();
        assert!((v - 5.0 / 3.0).abs() < 1e-13);
        let c = Filter::counterexample(2).unwrap();
        let norms: Vec<f64> = [8, 16, 32].iter().map(|&l| operator_norm_semidiscrete(&c, l, 2).unwrap()).collect();
        assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");
    }

    #[test]
    fn fully_discrete_norm_constant_kernel() {
        let mut rule = CubatureRule::product_rule_s2(5).unwrap();
        rule.certify(DEFAULT_TRIALS, 0);
        let one = ZonalKernel::from_coeffs(2, vec![1.0], "const").unwrap();
        let v = lebesgue_sup_lower_bound(&one, &rule, 10, 1);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fully_discrete_norm_is_monotone_in_probes() {
        let rule = certified_rule(11);
        let mut prev = 0.0;
        for probes in [0, 5, 20, 80] {
            let v = operator_norm_fully_discrete(&Filter::step(), 4, &rule, probes, 77).unwrap();
            assert!(v >= prev, "{probes}: {v} < {prev}");
            assert!(v >= 1.0 - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn cesaro_examples() {
        let f = ZonalExpansion::new(2, north_pole(2), vec![1.0, 1.0]).unwrap();
        let spec = CesaroSpec::new(1.0, 4).unwrap();
        assert_eq!(cesaro_mean(&spec, 1, &f).unwrap().coeffs(), &[1.0, 0.5]);
        assert_eq!(cesaro_mean(&spec, 0, &f).unwrap().coeffs(), &[1.0]);
        assert_eq!(spec.table(), &[1.0, 2.0, 3.0, 4.0, 5.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_expansion(2, 12, &mut rng);
        let partial = CesaroSpec::new(0.0, 20).unwrap();
        for k in [0, 3, 12, 20] {
            let s = cesaro_mean(&partial, k, &g).unwrap();
            for l in 0..=12 {
                let expected = if l <= k { g.coeff(l) } else { 0.0 };
                assert_eq!(s.coeff(l), expected);
            }
        }
        assert!(CesaroSpec::new(-1.0, 3).is_err());
        assert!(CesaroSpec::new(0.5, 3).unwrap().table().iter().all(|&a| a > 0.0));
    }

    #[test]
    fn summation_by_parts_matches_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for h in catalogue() {
            for &l in &[4usize, 8, 16] {
                let f = random_expansion(2, 3 * l, &mut rng);
                let direct = apply_semidiscrete(&h, l, &f).unwrap();
                for r in 0..=2 {
                    let sbp = summation_by_parts_apply(&h, l, r, &f).unwrap();
                    assert!(max_rel_dev(&sbp, &direct) <= 1e-10, "{h} L={l} r={r}");
                }
            }
        }
        let f = random_expansion(2, 20, &mut rng);
        let zero = f.zero_like();
        let s = summation_by_parts_apply(&Filter::vp(), 8, 1, &zero).unwrap();
        assert!(s.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn dyadic_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = Filter::vp();
        let low = random_expansion(2, 1, &mut rng);
        assert!(dyadic_block(&h, 1, &low).unwrap().coeffs().iter().all(|&c| c == 0.0));

        let f = random_expansion(2, 70, &mut rng);
        for big_r in 0..6 {
            let mut sum = f.zero_like();
            for r in 0..=big_r {
                let tau = dyadic_block(&h, r, &f).unwrap();
                assert!(tau.effective_degree() <= 1 << (r + 1));
                sum = sum.add(&tau).unwrap();
            }
            let target = apply_semidiscrete(&h, 1 << big_r, &f).unwrap();
            assert!(max_rel_dev(&sum, &target) <= 1e-12);
        }
        for r in 1..6 {
            let tau = dyadic_block(&h, r, &f).unwrap().l2_norm();
            let e1 = f.sub(&apply_semidiscrete(&h, 1 << r, &f).unwrap()).unwrap().l2_norm();
            let e0 = f.sub(&apply_semidiscrete(&h, 1 << (r - 1), &f).unwrap()).unwrap().l2_norm();
            assert!(tau <= e1 + e0 + 1e-12);
        }
    }

    #[test]
    fn pole_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let coeffs: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ZonalExpansion::new(2, north_pole(2), coeffs.clone()).unwrap();
        // Rotation about the y axis by angle a.
        let a: f64 = 0.7;
        let rot = |x: &[f64]| vec![a.cos() * x[0] + a.sin() * x[2], x[1], -a.sin() * x[0] + a.cos() * x[2]];
        let g = ZonalExpansion::new(2, rot(&north_pole(2)), coeffs).unwrap();
        let vf = apply_semidiscrete(&Filter::hermite(1), 4, &f).unwrap();
        let vg = apply_semidiscrete(&Filter::hermite(1), 4, &g).unwrap();
        for _ in 0..20 {
            let x = random_unit_vector(2, &mut rng);
            assert!((vf.eval(&x) - vg.eval(&rot(&x))).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sbp_identity_holds_for_random_inputs(
            seed in any::<u64>(),
            l in 1usize..12,
            r in 0usize..4,
            which in 0usize..6,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = catalogue()[which].clone();
            let f = random_expansion(3, 3 * l + 2, &mut rng);
            let direct = apply_semidiscrete(&h, l, &f).unwrap();
            let sbp = summation_by_parts_apply(&h, l, r, &f).unwrap();
            prop_assert!(max_rel_dev(&sbp, &direct) <= 1e-10);
        }

        #[test]
        fn semidiscrete_output_degree_bound(seed in any::<u64>(), l in 1usize..20, degree in 0usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_expansion(2, degree, &mut rng);
            for h in catalogue() {
                let g = apply_semidiscrete(&h, l, &f).unwrap();
                prop_assert!(g.degree() < 2 * l);
                if degree <= l {
                    prop_assert_eq!(g.coeffs(), f.coeffs());
                }
            }
        }
    }
}
