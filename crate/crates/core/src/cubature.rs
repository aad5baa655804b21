//! Positive-weight cubature rules on `S^d` with a certified degree of precision.
//!
//! A rule `Q_N(g) = Σ W_i g(y_i)` is exact on `Π_t` iff `Q_N(K_ℓ(x, ·)) = δ_{ℓ0}`
//! for every `x` and `ℓ ≤ t`, since the sections `K_ℓ(x, ·)` span `H_ℓ`.
//! Certification probes that identity at random `x`.
//!
//! Rule files are plain text: a header line `d N degree`, then `N` lines with
//! the `d+1` node coordinates followed by the weight, 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result, RuleParseError};
use crate::expansion::{ZonalExpansion, ZonalSum};
use crate::special_functions::{gauss_legendre, gegenbauer_fill, GegenbauerOrder, KahanSum};
use crate::sphere::{check_unit, clamped_dot, norm, random_unit_vector, SphereFunction, UNIT_TOL};

/// Largest admissible `|Σ W_i - 1|` for constructed rules.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Largest admissible `|Σ W_i - 1|` for rules read from files.
pub const FILE_WEIGHT_SUM_TOL: f64 = 1e-9;
/// Exactness defects at or below this pass certification.
pub const EXACTNESS_TOL: f64 = 1e-10;
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    d: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    declared_degree: usize,
    certified: bool,
}

/// Outcome of [`CubatureRule::validate_exactness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactnessReport {
    pub degree: usize,
    pub max_defect: f64,
    /// Degree `ℓ` at which the largest defect occurred.
    pub worst_degree: usize,
    pub pass: bool,
}

impl CubatureRule {
    /// Validates the unit-node, positive-weight and normalization invariants.
    pub fn new(d: usize, nodes: Vec<Vec<f64>>, weights: Vec<f64>, declared_degree: usize) -> Result<Self> {
        Self::with_tolerance(d, nodes, weights, declared_degree, WEIGHT_SUM_TOL)
    }

    fn with_tolerance(
        d: usize,
        nodes: Vec<Vec<f64>>,
        weights: Vec<f64>,
        declared_degree: usize,
        sum_tol: f64,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("sphere dimension d = {d} < 2")));
        }
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "rule has {} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for (i, (y, &w)) in nodes.iter().zip(&weights).enumerate() {
            check_unit(y, d)?;
            if w.is_nan() || w <= 0.0 {
                return Err(RuleParseError::NonPositiveWeight { line: i + 2, weight: w }.into());
            }
        }
        let sum = weights.iter().copied().collect::<KahanSum>().total();
        if (sum - 1.0).abs() > sum_tol {
            return Err(RuleParseError::WeightNormalization { sum }.into());
        }
        Ok(Self {
            d,
            nodes,
            weights,
            declared_degree,
            certified: false,
        })
    }

    /// Product rule on `S²` exact through degree `t`: `⌈(t+1)/2⌉` Gauss-Legendre
    /// nodes in `z = cos θ` crossed with `t+1` equispaced azimuths.
    pub fn product_rule_s2(t: usize) -> Result<Self> {
        let rings = (t + 2) / 2;
        let azimuths = t + 1;
        let gl = gauss_legendre(rings)?;
        let mut nodes = Vec::with_capacity(rings * azimuths);
        let mut weights = Vec::with_capacity(rings * azimuths);
        for (&z, &w) in gl.nodes().iter().zip(gl.weights()) {
            let rho = (1.0 - z * z).sqrt();
            for k in 0..azimuths {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / azimuths as f64;
                let y = vec![rho * phi.cos(), rho * phi.sin(), z];
                let n = norm(&y);
                nodes.push(y.into_iter().map(|c| c / n).collect());
                weights.push(w / (2.0 * azimuths as f64));
            }
        }
        let total = weights.iter().copied().collect::<KahanSum>().total();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(2, nodes, weights, t)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn declared_degree(&self) -> usize {
        self.declared_degree
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// `Q_N(g)` with compensated summation in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * g(y))
            .collect::<KahanSum>()
            .total()
    }

    /// Largest deviation of `Q_N(K_ℓ(x, ·))` from `δ_{ℓ0}` over `trials` random
    /// `x` and all `ℓ ≤ degree`.
    pub fn validate_exactness(&self, degree: usize, trials: usize, seed: u64) -> ExactnessReport {
        let order = GegenbauerOrder::for_sphere(self.d).expect("rule dimension >= 2");
        let lambda = order.lambda();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes: Vec<Vec<f64>> = (0..trials.max(1)).map(|_| random_unit_vector(self.d, &mut rng)).collect();
        let scale: Vec<f64> = (0..=degree).map(|l| (l as f64 + lambda) / lambda).collect();

        let per_probe: Vec<(f64, usize)> = probes
            .par_iter()
            .map(|x| {
                let mut acc = vec![KahanSum::new(); degree + 1];
                let mut c = vec![0.0; degree + 1];
                for (y, &w) in self.nodes.iter().zip(&self.weights) {
                    gegenbauer_fill(order, clamped_dot(x, y), &mut c);
                    for (a, v) in acc.iter_mut().zip(&c) {
                        a.add(w * v);
                    }
                }
                acc.iter()
                    .enumerate()
                    .map(|(l, a)| {
                        let target = if l == 0 { 1.0 } else { 0.0 };
                        ((scale[l] * a.total() - target).abs(), l)
                    })
                    .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
            })
            .collect();
        let (max_defect, worst_degree) = per_probe
            .into_iter()
            .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best });
        ExactnessReport {
            degree,
            max_defect,
            worst_degree,
            pass: max_defect <= EXACTNESS_TOL,
        }
    }

    /// Validates at the declared degree and marks the rule certified on success.
    pub fn certify(&mut self, trials: usize, seed: u64) -> ExactnessReport {
        let report = self.validate_exactness(self.declared_degree, trials, seed);
        self.certified = report.pass;
        report
    }

    /// Errors unless the rule is certified through at least `degree`.
    pub fn require_certified(&self, degree: usize) -> Result<()> {
        let found = match (self.certified, self.declared_degree) {
            (true, t) if t >= degree => return Ok(()),
            (true, t) => format!("it is certified only to degree {t}"),
            (false, t) => format!("it declares degree {t} but has not been certified"),
        };
        Err(Error::UncertifiedRule {
            required: degree,
            found,
        })
    }

    /// Serializes in the rule file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.d + 2) * 26);
        writeln!(out, "{} {} {}", self.d, self.len(), self.declared_degree).unwrap();
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            for c in y {
                write!(out, "{c:.16e} ").unwrap();
            }
            writeln!(out, "{w:.16e}").unwrap();
        }
        out
    }

    /// Parses the rule file format. Loaded rules start uncertified.
    pub fn parse(text: &str) -> Result<Self, RuleParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| RuleParseError::MalformedHeader("empty file".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| RuleParseError::MalformedHeader(format!("`{header}`: {e}")))?;
        let [d, n, degree] = fields[..] else {
            return Err(RuleParseError::MalformedHeader(format!(
                "`{header}`: expected `d N degree`"
            )));
        };
        if d < 2 {
            return Err(RuleParseError::MalformedHeader(format!("sphere dimension {d} < 2")));
        }

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (line, text) in lines {
            let values: Vec<f64> = text
                .split_whitespace()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| RuleParseError::MalformedLine {
                    line,
                    reason: e.to_string(),
                })?;
            if values.len() != d + 2 {
                return Err(RuleParseError::MalformedLine {
                    line,
                    reason: format!("expected {} numbers, found {}", d + 2, values.len()),
                });
            }
            let (y, w) = values.split_at(d + 1);
            let len = norm(y);
            if len.is_nan() || (len - 1.0).abs() > UNIT_TOL {
                return Err(RuleParseError::NonUnitNode { line, norm: len });
            }
            if w[0].is_nan() || w[0] <= 0.0 {
                return Err(RuleParseError::NonPositiveWeight { line, weight: w[0] });
            }
            nodes.push(y.to_vec());
            weights.push(w[0]);
        }
        if nodes.len() != n {
            return Err(RuleParseError::CountMismatch {
                declared: n,
                found: nodes.len(),
            });
        }
        let sum = weights.iter().copied().collect::<KahanSum>().total();
        if sum.is_nan() || (sum - 1.0).abs() > FILE_WEIGHT_SUM_TOL {
            return Err(RuleParseError::WeightNormalization { sum });
        }
        Ok(Self {
            d,
            nodes,
            weights,
            declared_degree: degree,
            certified: false,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text)?)
    }
}

/// Parameters for [`mz_spot_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzCheck {
    /// Degree `m ≥ n` in the comparison factor `(m/n)^d`.
    pub m: usize,
    /// Degree of the random test polynomials; at most `m`.
    pub poly_degree: usize,
    pub p1: f64,
    pub trials: usize,
    pub seed: u64,
}

impl MzCheck {
    pub fn new(m: usize, p1: f64, trials: usize, seed: u64) -> Self {
        Self {
            m,
            poly_degree: m,
            p1,
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MzReport {
    pub ratio_max: f64,
    pub ratios: Vec<f64>,
}

/// Random `P ∈ Π_degree` as a sum of three zonal expansions with random poles.
pub fn random_polynomial(d: usize, degree: usize, rng: &mut ChaCha8Rng) -> ZonalSum {
    use rand_distr::{Distribution, StandardNormal};
    let terms = (0..3)
        .map(|_| {
            let pole = random_unit_vector(d, rng);
            let coeffs = (0..=degree)
                .map(|l| {
                    let z: f64 = StandardNormal.sample(rng);
                    z / crate::special_functions::dim_harmonic_f64(d, l).sqrt()
                })
                .collect();
            ZonalExpansion::new(d, pole, coeffs).expect("random pole is unit")
        })
        .collect();
    ZonalSum::new(terms).expect("three terms")
}

/// Spot check of the Marcinkiewicz-Zygmund transfer inequality
/// `Σ W_j |P(y_j)|^{p1} ≪ (m/n)^d ∫ |P|^{p1} dσ` for `P ∈ Π_m`, where `n` is
/// the rule's certified degree. Reports the ratio of the two sides.
///
/// `∫ P²` is computed in closed form; other exponents use a product reference
/// rule on `S²` (exact when `p1` is an even integer).
pub fn mz_spot_check(rule: &CubatureRule, check: &MzCheck) -> Result<MzReport> {
    rule.require_certified(0)?;
    let n = rule.declared_degree().max(1);
    if check.m < n || check.poly_degree > check.m || check.p1.is_nan() || check.p1 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need m >= n = {n}, poly_degree <= m and p1 > 0 (m = {}, poly_degree = {}, p1 = {})",
            check.m, check.poly_degree, check.p1
        )));
    }
    let d = rule.dim();
    let p1 = check.p1;
    let closed_form = p1 == 2.0;
    let reference = if closed_form {
        None
    } else {
        if d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        let even = p1.fract() == 0.0 && (p1 as usize).is_multiple_of(2);
        let degree = if even {
            p1 as usize * check.poly_degree
        } else {
            8 * check.poly_degree + 32
        };
        Some(CubatureRule::product_rule_s2(degree)?)
    };

    let factor = (check.m as f64 / n as f64).powi(d as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let mut ratios = Vec::with_capacity(check.trials);
    for _ in 0..check.trials.max(1) {
        let p = random_polynomial(d, check.poly_degree, &mut rng);
        let discrete = rule.integrate(|y| p.eval(y).abs().powf(p1));
        let exact = match &reference {
            None => p.l2_norm_squared(),
            Some(r) => r.integrate(|y| p.eval(y).abs().powf(p1)),
        };
        ratios.push(discrete / (factor * exact));
    }
    let ratio_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MzReport { ratio_max, ratios })
}
