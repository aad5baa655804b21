//! Experiment sweeps emitted as CSV records.
//!
//! Every sweep is deterministic given its seed; sweeps over `L` run in
//! parallel and records come out ordered by `L`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cubature::{CubatureRule, ExactnessReport, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::expansion::ZonalExpansion;
use crate::filters::Filter;
use crate::operators::{
    apply_fully_discrete, apply_semidiscrete, dyadic_block, operator_norm_fully_discrete, summation_by_parts_apply,
    DiscreteApproximation,
};
use crate::sobolev::{lp_distance_zonal, lp_error, make_test_function, Measure, SobolevProfile, SUP_GRID_POINTS};
use crate::sphere::{north_pole, random_unit_vector, SampleGrid, SphereFunction};
use crate::zonal_kernel::{kernel_l1_norm, ZonalKernel, DEFAULT_NODES_PER_PANEL};

pub const CSV_HEADER: &str = "experiment,filter,d,L,N,p,s,value_kind,value";

/// Values below this are dropped before fitting slopes.
pub const SLOPE_FLOOR: f64 = 1e-13;

/// Deviation above which the identity suite fails.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    OperatorNorm,
    LpError,
    Defect,
    Ratio,
    Slope,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::OperatorNorm => "operator_norm",
            ValueKind::LpError => "lp_error",
            ValueKind::Defect => "defect",
            ValueKind::Ratio => "ratio",
            ValueKind::Slope => "slope",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CSV row. `L` and `N` are empty for summary rows and semi-discrete
/// rows respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub filter: String,
    pub d: usize,
    pub l: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub value_kind: ValueKind,
    pub value: f64,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_real(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

impl ExperimentRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:e}",
            self.experiment,
            self.filter,
            self.d,
            opt(self.l),
            opt(self.n),
            opt_real(self.p),
            opt_real(self.s),
            self.value_kind,
            self.value
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[ExperimentRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`, ignoring `y < 1e-13`.
/// `None` with fewer than two usable points.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y >= SLOPE_FLOOR && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

fn slope_record(template: &ExperimentRecord, rows: &[ExperimentRecord]) -> Option<ExperimentRecord> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.l.map(|l| (l as f64, r.value)))
        .collect();
    fit_loglog_slope(&pts).map(|value| ExperimentRecord {
        l: None,
        n: None,
        value_kind: ValueKind::Slope,
        value,
        ..template.clone()
    })
}

/// `ls` sorted ascending without duplicates; every entry must be positive.
pub fn normalize_scales(ls: &[usize]) -> Result<Vec<usize>> {
    if ls.is_empty() || ls.contains(&0) {
        return Err(Error::InvalidArgument("L list must be non-empty and positive".into()));
    }
    let mut ls = ls.to_vec();
    ls.sort_unstable();
    ls.dedup();
    Ok(ls)
}

/// Where fully discrete experiments take their rules from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSource {
    /// Gauss-product rules on `S²`, generated on demand.
    Product,
    /// Files `t<degree>.rule` in a directory.
    Dir(PathBuf),
}

impl RuleSource {
    pub fn rule_path(dir: &Path, degree: usize) -> PathBuf {
        dir.join(format!("t{degree}.rule"))
    }

    /// A rule certified on `Π_degree`.
    pub fn certified_rule(&self, d: usize, degree: usize, seed: u64) -> Result<CubatureRule> {
        let mut rule = match self {
            RuleSource::Product => {
                if d != 2 {
                    return Err(Error::UnsupportedDimension(d));
                }
                CubatureRule::product_rule_s2(degree)?
            }
            RuleSource::Dir(dir) => CubatureRule::load(Self::rule_path(dir, degree))?,
        };
        if rule.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                got: rule.dim() + 1,
            });
        }
        rule.certify(DEFAULT_TRIALS, seed);
        rule.require_certified(degree)?;
        Ok(rule)
    }
}

#[derive(Debug, Clone)]
pub struct NormsConfig {
    pub filter: String,
    pub d: usize,
    pub ls: Vec<usize>,
    /// Polar-angle panels; `8L` when absent.
    pub panels: Option<usize>,
    /// Adds fully discrete lower bounds with this many random probes.
    pub discrete_probes: Option<usize>,
    pub rules: RuleSource,
    pub seed: u64,
}

/// `‖V_L‖` for every `L`, plus the fitted growth slope.
pub fn run_norms(cfg: &NormsConfig) -> Result<Vec<ExperimentRecord>> {
    let h = Filter::from_name(&cfg.filter, cfg.d)?;
    let ls = normalize_scales(&cfg.ls)?;
    let semi: Vec<ExperimentRecord> = ls
        .par_iter()
        .map(|&l| {
            let kernel = ZonalKernel::build(&h, l, cfg.d)?;
            let panels = cfg.panels.unwrap_or(8 * l);
            Ok(ExperimentRecord {
                experiment: "norms".into(),
                filter: cfg.filter.clone(),
                d: cfg.d,
                l: Some(l),
                n: None,
                p: None,
                s: None,
                value_kind: ValueKind::OperatorNorm,
                value: kernel_l1_norm(&kernel, panels, DEFAULT_NODES_PER_PANEL)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut records = semi.clone();
    if let Some(first) = semi.first() {
        records.extend(slope_record(first, &semi));
    }
    if let Some(probes) = cfg.discrete_probes {
        let discrete: Vec<ExperimentRecord> = ls
            .par_iter()
            .map(|&l| {
                let rule = cfg.rules.certified_rule(cfg.d, 3 * l - 1, cfg.seed)?;
                Ok(ExperimentRecord {
                    experiment: "norms_discrete".into(),
                    filter: cfg.filter.clone(),
                    d: cfg.d,
                    l: Some(l),
                    n: Some(rule.len()),
                    p: None,
                    s: None,
                    value_kind: ValueKind::OperatorNorm,
                    value: operator_norm_fully_discrete(&h, l, &rule, probes, cfg.seed)?,
                })
            })
            .collect::<Result<_>>()?;
        records.extend(discrete);
    }
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct ConvergeConfig {
    pub filter: String,
    pub d: usize,
    pub s: f64,
    pub p: f64,
    pub epsilon: f64,
    /// Truncation degree `Λ` of the test function.
    pub max_degree: usize,
    pub ls: Vec<usize>,
    /// Fully discrete rows are added when present.
    pub rules: Option<RuleSource>,
    pub sup_points: usize,
    pub seed: u64,
}

impl ConvergeConfig {
    pub fn new(filter: &str, d: usize, s: f64, p: f64, ls: Vec<usize>) -> Self {
        Self {
            filter: filter.into(),
            d,
            s,
            p,
            epsilon: crate::sobolev::DEFAULT_EPSILON,
            max_degree: 1024,
            ls,
            rules: None,
            sup_points: SUP_GRID_POINTS,
            seed: 0,
        }
    }
}

/// Sup grid: Fibonacci on `S²`, seeded uniform points otherwise.
pub fn sup_grid(d: usize, points: usize, seed: u64) -> SampleGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampleGrid::dense(d, points, &mut rng)
}

/// `‖f - V_{L,N} f‖_p`.
///
/// When the approximation is zonal about the pole of `f` (north-pole inputs
/// with a product rule) the error is measured exactly as for semi-discrete
/// output. Otherwise `V_{L,N} f` is sampled as a black box: on `grid` for
/// `p = ∞` and on a product rule of degree `2 max(Λ, 2L-1) + 2` for finite `p`.
pub fn fully_discrete_error(
    f: &ZonalExpansion,
    approx: &DiscreteApproximation,
    p: f64,
    grid: &SampleGrid,
    seed: u64,
) -> Result<f64> {
    match approx.to_zonal(f.pole(), 16, seed) {
        Ok(zonal) => lp_distance_zonal(f, &zonal, p, grid),
        Err(Error::NotZonal { .. }) => {
            if p.is_infinite() {
                lp_error(f, approx, p, Measure::Grid(grid))
            } else {
                let degree = 2 * f.degree().max(approx.kernel().degree()) + 2;
                let reference = RuleSource::Product.certified_rule(f.dim(), degree, seed)?;
                lp_error(f, approx, p, Measure::Rule(&reference))
            }
        }
        Err(e) => Err(e),
    }
}

/// Semi-discrete and fully discrete errors for the Sobolev test function, with
/// fitted slopes as summary rows.
pub fn run_converge(cfg: &ConvergeConfig) -> Result<Vec<ExperimentRecord>> {
    let h = Filter::from_name(&cfg.filter, cfg.d)?;
    let ls = normalize_scales(&cfg.ls)?;
    let profile = SobolevProfile::new(cfg.d, cfg.s, cfg.epsilon, cfg.max_degree)?;
    let f = make_test_function(&profile, &north_pole(cfg.d))?;
    let grid = sup_grid(cfg.d, cfg.sup_points, cfg.seed);
    let template = ExperimentRecord {
        experiment: "converge".into(),
        filter: cfg.filter.clone(),
        d: cfg.d,
        l: None,
        n: None,
        p: Some(cfg.p),
        s: Some(cfg.s),
        value_kind: ValueKind::LpError,
        value: 0.0,
    };

    let semi: Vec<ExperimentRecord> = ls
        .par_iter()
        .map(|&l| {
            let approx = apply_semidiscrete(&h, l, &f)?;
            Ok(ExperimentRecord {
                l: Some(l),
                value: lp_distance_zonal(&f, &approx, cfg.p, &grid)?,
                ..template.clone()
            })
        })
        .collect::<Result<_>>()?;
    let mut records = semi.clone();
    records.extend(slope_record(&template, &semi));

    if let Some(rules) = &cfg.rules {
        let discrete_template = ExperimentRecord {
            experiment: "converge_discrete".into(),
            ..template.clone()
        };
        let discrete: Vec<ExperimentRecord> = ls
            .par_iter()
            .map(|&l| {
                let rule = rules.certified_rule(cfg.d, 3 * l - 1, cfg.seed)?;
                let approx = apply_fully_discrete(&h, l, &rule, &f)?;
                Ok(ExperimentRecord {
                    l: Some(l),
                    n: Some(rule.len()),
                    value: fully_discrete_error(&f, &approx, cfg.p, &grid, cfg.seed)?,
                    ..discrete_template.clone()
                })
            })
            .collect::<Result<_>>()?;
        records.extend(discrete.iter().cloned());
        records.extend(slope_record(&discrete_template, &discrete));
    }
    Ok(records)
}

/// Product rule of degree `degree`, certified.
pub fn generate_rule(degree: usize, seed: u64) -> Result<CubatureRule> {
    RuleSource::Product.certified_rule(2, degree, seed)
}

/// Exactness check of `rule` at `degree`.
pub fn check_rule(rule: &CubatureRule, degree: usize, trials: usize, seed: u64) -> ExactnessReport {
    rule.validate_exactness(degree, trials, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// Relative deviation of the summation-by-parts form from `V_L`.
    pub summation_by_parts: f64,
    /// Relative sup deviation of `V_{L,N} P` from `P ∈ Π_L`.
    pub reproduction: f64,
    /// Deviation of `Σ_{r≤R} τ_r` from `V_{2^R}`.
    pub telescoping: f64,
    pub records: Vec<ExperimentRecord>,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.summation_by_parts.max(self.reproduction).max(self.telescoping)
    }

    pub fn pass(&self) -> bool {
        self.max_deviation() <= IDENTITY_TOL
    }
}

#[derive(Debug, Clone)]
pub struct IdentitiesConfig {
    pub filter: String,
    pub ls: Vec<usize>,
    pub rs: Vec<usize>,
    pub seed: u64,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self {
            filter: "vp".into(),
            ls: vec![4, 8, 16],
            rs: vec![0, 1, 2],
            seed: 0,
        }
    }
}

fn coeff_rel_dev(a: &ZonalExpansion, b: &ZonalExpansion) -> f64 {
    let n = a.coeffs().len().max(b.coeffs().len());
    let scale = (0..n).map(|l| b.coeff(l).abs()).fold(f64::MIN_POSITIVE, f64::max);
    (0..n).map(|l| (a.coeff(l) - b.coeff(l)).abs()).fold(0.0, f64::max) / scale
}

/// Random zonal polynomial of degree `degree` about a random pole.
fn random_expansion(d: usize, degree: usize, rng: &mut ChaCha8Rng) -> ZonalExpansion {
    let pole = random_unit_vector(d, rng);
    let coeffs = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ZonalExpansion::new(d, pole, coeffs).expect("unit pole")
}

/// Sup over `points` of `|P - V_{L,N} P| / ‖P‖`.
pub fn reproduction_defect(p: &dyn SphereFunction, approx: &DiscreteApproximation, points: &[Vec<f64>]) -> f64 {
    let values = approx.eval_many(points);
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for (x, v) in points.iter().zip(values) {
        let exact = p.eval(x);
        defect = defect.max((exact - v).abs());
        scale = scale.max(exact.abs());
    }
    defect / scale.max(f64::MIN_POSITIVE)
}

/// Summation-by-parts, reproduction and telescoping checks on `S²`.
pub fn run_identities(cfg: &IdentitiesConfig) -> Result<IdentityReport> {
    let d = 2;
    let h = Filter::from_name(&cfg.filter, d)?;
    let ls = normalize_scales(&cfg.ls)?;
    let template = ExperimentRecord {
        experiment: "identities".into(),
        filter: cfg.filter.clone(),
        d,
        l: None,
        n: None,
        p: None,
        s: None,
        value_kind: ValueKind::Defect,
        value: 0.0,
    };
    let per_l: Vec<(f64, f64, usize)> = ls
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let f = random_expansion(d, 3 * l, &mut rng);
            let direct = apply_semidiscrete(&h, l, &f)?;
            let mut sbp = 0.0f64;
            for &r in &cfg.rs {
                sbp = sbp.max(coeff_rel_dev(&summation_by_parts_apply(&h, l, r, &f)?, &direct));
            }
            let rule = generate_rule(3 * l - 1, cfg.seed)?;
            let p = random_expansion(d, l, &mut rng);
            let points: Vec<Vec<f64>> = (0..200).map(|_| random_unit_vector(d, &mut rng)).collect();
            let approx = apply_fully_discrete(&h, l, &rule, &p)?;
            Ok((sbp, reproduction_defect(&p, &approx, &points), rule.len()))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (&l, &(sbp, repro, n)) in ls.iter().zip(&per_l) {
        records.push(ExperimentRecord {
            experiment: "identity_sbp".into(),
            l: Some(l),
            value: sbp,
            ..template.clone()
        });
        records.push(ExperimentRecord {
            experiment: "identity_reproduction".into(),
            l: Some(l),
            n: Some(n),
            value: repro,
            ..template.clone()
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7e1e);
    let top = ls[ls.len() - 1].next_power_of_two();
    let big_r = top.trailing_zeros() as usize;
    let f = random_expansion(d, 2 * top + 4, &mut rng);
    let mut sum = f.zero_like();
    let mut telescoping = 0.0f64;
    for r in 0..=big_r {
        sum = sum.add(&dyadic_block(&h, r, &f)?)?;
        let target = apply_semidiscrete(&h, 1 << r, &f)?;
        telescoping = telescoping.max(coeff_rel_dev(&sum, &target));
    }
    records.push(ExperimentRecord {
        experiment: "identity_telescoping".into(),
        l: Some(top),
        value: telescoping,
        ..template.clone()
    });

    Ok(IdentityReport {
        summation_by_parts: per_l.iter().map(|t| t.0).fold(0.0, f64::max),
        reproduction: per_l.iter().map(|t| t.1).fold(0.0, f64::max),
        telescoping,
        records,
    })
}

/// A gnuplot script plotting `value` against `L` on log-log axes, one curve
/// per (experiment, filter) pair.
pub fn gnuplot_script(csv_path: &str, records: &[ExperimentRecord]) -> String {
    let mut series: Vec<(String, String)> = Vec::new();
    for r in records.iter().filter(|r| r.l.is_some() && r.value_kind != ValueKind::Slope) {
        let key = (r.experiment.clone(), r.filter.clone());
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut script = String::from(
        "set datafile separator ','\nset logscale xy\nset xlabel 'L'\nset ylabel 'value'\nset key left top\n",
    );
    let plots: Vec<String> = series
        .iter()
        .map(|(e, f)| {
            format!(
                "'{csv_path}' using (strcol(1) eq '{e}' && strcol(2) eq '{f}' ? $4 : 1/0):9 with linespoints title '{e} {f}'"
            )
        })
        .collect();
    if !plots.is_empty() {
        script.push_str("plot ");
        script.push_str(&plots.join(", \\\n     "));
        script.push('\n');
    }
    script
}
