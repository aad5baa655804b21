//! Filters `h` on `[0, ∞)`, forward differences and variation estimates.
//!
//! A proper filter equals 1 on `[0, 1]` and vanishes on `[2, ∞)`. The catalogue
//! also carries the Riesz profile `(1 - t/2)_+^δ`, which is not proper and is
//! only used for operator-norm growth studies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Smoothness sentinel for `C^∞` filters.
pub const SMOOTHNESS_INFINITE: i32 = i32::MAX;

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Step,
    /// Polynomial transition on `[1, 2]`, monomial coefficients in `u = t - 1`.
    Piecewise { transition: Vec<f64> },
    /// `exp(-1/u)` blend from 1 to 0 across `(start, end)`.
    Smooth { start: f64, end: f64 },
    /// `h₀(1 - h₁) + h₁` with `h₀ = (1 - t/2)_+^exponent` and `h₁` smooth on `(1, 3/2)`.
    Counterexample { exponent: f64 },
    Riesz { delta: f64 },
}

/// A filter together with its declared smoothness class.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    name: String,
    shape: Shape,
    declared_smoothness: i32,
    support_end: f64,
    is_proper_filter: bool,
}

fn exp_bump(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

fn smooth_blend(t: f64, start: f64, end: f64) -> f64 {
    if t <= start {
        1.0
    } else if t >= end {
        0.0
    } else {
        let left = exp_bump(end - t);
        left / (left + exp_bump(t - start))
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Monomial coefficients of `1 - I_u(r+1, r+1)`, the degree `2r+1` polynomial
/// with value 1 and `r` vanishing derivatives at `u = 0`, value 0 and `r`
/// vanishing derivatives at `u = 1`.
fn hermite_transition(r: usize) -> Vec<f64> {
    let n = 2 * r + 1;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    // I_u(r+1, r+1) = Σ_{j=r+1}^{n} binom(n, j) u^j (1-u)^(n-j)
    for j in (r + 1)..=n {
        let bj = binomial(n, j);
        for i in 0..=(n - j) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[j + i] -= bj * binomial(n - j, i) * sign;
        }
    }
    coeffs
}

impl Filter {
    /// Characteristic function of `[0, 1]` (closed at 1).
    pub fn step() -> Self {
        Self {
            name: "step".into(),
            shape: Shape::Step,
            declared_smoothness: -1,
            support_end: 1.0,
            is_proper_filter: true,
        }
    }

    /// The de la Vallée-Poussin filter: `2 - t` on `[1, 2]`.
    pub fn vp() -> Self {
        Self {
            name: "vp".into(),
            shape: Shape::Piecewise {
                transition: vec![1.0, -1.0],
            },
            declared_smoothness: 1,
            support_end: 2.0,
            is_proper_filter: true,
        }
    }

    /// Piecewise polynomial filter whose transition on `[1, 2]` has degree `2r+1`
    /// and `r` vanishing derivatives at both knots. `hermite(0)` is the vp filter.
    pub fn hermite(r: usize) -> Self {
        Self {
            name: format!("hermite:{r}"),
            shape: Shape::Piecewise {
                transition: hermite_transition(r),
            },
            declared_smoothness: r as i32 + 1,
            support_end: 2.0,
            is_proper_filter: true,
        }
    }

    /// `C^∞` filter with transition interval `(1, 2)`.
    pub fn smooth() -> Self {
        Self::smooth_with_end(2.0).expect("valid support end")
    }

    /// `C^∞` filter with transition interval `(1, end)`, `1 < end <= 2`.
    pub fn smooth_with_end(end: f64) -> Result<Self> {
        if !(end > 1.0 && end <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "smooth filter support end {end} must lie in (1, 2]"
            )));
        }
        let name = if end == 2.0 {
            "smooth".to_string()
        } else {
            format!("smooth:{end}")
        };
        Ok(Self {
            name,
            shape: Shape::Smooth { start: 1.0, end },
            declared_smoothness: SMOOTHNESS_INFINITE,
            support_end: end,
            is_proper_filter: true,
        })
    }

    /// The filter `h̃ = h₀(1 - h₁) + h₁` with `h₀(t) = (1 - t/2)_+^((d-1)/2)` and
    /// `h₁` the `C^∞` filter supported on `[0, 3/2]`. Its smoothness is only
    /// `W^{⌊(d-1)/2⌋}BV`.
    pub fn counterexample(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("sphere dimension d = {d} < 2")));
        }
        Ok(Self {
            name: "counterexample".into(),
            shape: Shape::Counterexample {
                exponent: (d as f64 - 1.0) / 2.0,
            },
            declared_smoothness: ((d - 1) / 2) as i32,
            support_end: 2.0,
            is_proper_filter: true,
        })
    }

    /// Riesz profile `(1 - t/2)_+^δ`. Not a proper filter.
    pub fn riesz(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("Riesz exponent {delta} must be > 0")));
        }
        Ok(Self {
            name: format!("riesz:{delta}"),
            shape: Shape::Riesz { delta },
            declared_smoothness: delta.floor() as i32,
            support_end: 2.0,
            is_proper_filter: false,
        })
    }

    /// Parses a catalogue name. `d` is only consulted by `counterexample`.
    pub fn from_name(name: &str, d: usize) -> Result<Self> {
        let unknown = || Error::UnknownFilter(name.to_string());
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        match (head, arg) {
            ("step", None) => Ok(Self::step()),
            ("vp", None) => Ok(Self::vp()),
            ("hermite", Some(r)) => Ok(Self::hermite(r.parse().map_err(|_| unknown())?)),
            ("smooth", None) => Ok(Self::smooth()),
            ("smooth", Some(end)) => Self::smooth_with_end(end.parse().map_err(|_| unknown())?),
            ("counterexample", None) => Self::counterexample(d),
            ("riesz", Some(delta)) => Self::riesz(delta.parse().map_err(|_| unknown())?),
            _ => Err(unknown()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Step => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Piecewise { transition } => {
                if t <= 1.0 {
                    1.0
                } else if t >= 2.0 {
                    0.0
                } else {
                    horner(transition, t - 1.0)
                }
            }
            Shape::Smooth { start, end } => smooth_blend(t, *start, *end),
            Shape::Counterexample { exponent } => {
                let h1 = smooth_blend(t, 1.0, 1.5);
                let h0 = (1.0 - t / 2.0).max(0.0).powf(*exponent);
                h0 * (1.0 - h1) + h1
            }
            Shape::Riesz { delta } => (1.0 - t / 2.0).max(0.0).powf(*delta),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Claimed membership in `W^r BV`; `-1` means merely BV,
    /// [`SMOOTHNESS_INFINITE`] means `C^∞`.
    pub fn declared_smoothness(&self) -> i32 {
        self.declared_smoothness
    }

    /// Smallest `T` with `h ≡ 0` on `[T, ∞)`.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn is_proper_filter(&self) -> bool {
        self.is_proper_filter
    }

    /// Right-sided derivative `h^{(order)}_+(t)` in closed form, available for the
    /// step and piecewise polynomial filters.
    pub fn right_derivative(&self, order: usize, t: f64) -> Option<f64> {
        match &self.shape {
            Shape::Step => Some(match order {
                0 if t < 1.0 => 1.0,
                _ => 0.0,
            }),
            Shape::Piecewise { transition } => {
                if t < 1.0 {
                    Some(if order == 0 { 1.0 } else { 0.0 })
                } else if t >= 2.0 {
                    Some(0.0)
                } else {
                    let mut coeffs = transition.clone();
                    for _ in 0..order {
                        coeffs = coeffs
                            .iter()
                            .enumerate()
                            .skip(1)
                            .map(|(k, c)| k as f64 * c)
                            .collect();
                    }
                    Some(horner(&coeffs, t - 1.0))
                }
            }
            _ => None,
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for Filter {
    type Err = Error;

    /// Parses with `d = 2` for the dimension-dependent counterexample.
    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s, 2)
    }
}

/// Samples `Δ^r h(k/L)` for `k = 0..=2L+r`, where `Δ g(x) = g(x) - g(x+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceTable {
    pub order: usize,
    pub scale: usize,
    pub values: Vec<f64>,
}

impl DifferenceTable {
    /// `Σ_k |Δ^r h(k/L)|`.
    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// `Δ^r h(k/L) = Σ_{j=0}^{r} (-1)^j binom(r, j) h((k+j)/L)`, `k = 0..=2L+r`.
pub fn forward_difference(h: &Filter, scale: usize, order: usize) -> DifferenceTable {
    assert!(scale >= 1, "difference scale L must be >= 1");
    let l = scale as f64;
    let samples: Vec<f64> = (0..=2 * scale + 2 * order).map(|k| h.eval(k as f64 / l)).collect();
    let coeffs: Vec<f64> = (0..=order)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(order, j))
        .collect();
    let values = (0..=2 * scale + order)
        .map(|k| coeffs.iter().enumerate().map(|(j, c)| c * samples[k + j]).sum())
        .collect();
    DifferenceTable {
        order,
        scale,
        values,
    }
}

/// Variation of `g` along a uniform grid of `grid` points on `[a, b]`: a lower
/// bound for the total variation.
pub fn bv_estimate<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, grid: usize) -> f64 {
    assert!(grid >= 2, "variation grid needs at least two points");
    let step = (b - a) / (grid - 1) as f64;
    let mut prev = g(a);
    let mut total = 0.0;
    for k in 1..grid {
        let x = if k == grid - 1 { b } else { a + step * k as f64 };
        let v = g(x);
        total += (v - prev).abs();
        prev = v;
    }
    total
}
