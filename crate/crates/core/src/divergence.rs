//! Convex functions paired with their Fenchel conjugates, and the
//! f-divergence between occupancies.
//!
//! Two families are provided:
//!
//! | family | `f(x)` | `f*(y)` |
//! |--------|--------|---------|
//! | quadratic | `x²/2` | `y²/2` |
//! | polynomial(p) | `|x|^q / q` | `|y|^p / p` |
//!
//! with `1/p + 1/q = 1`. Both have domain all of ℝ and `f'`, `f*'` are
//! mutual inverses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AlgaeError, Result};
use crate::tables::{Occupancy, ValueTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
enum Family {
    Quadratic,
    Polynomial { p: f64, q: f64 },
}

/// A convex `f` together with `f'`, `f*` and `(f*)'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergencePair {
    family: Family,
}

fn signed_pow(x: f64, e: f64) -> f64 {
    x.signum() * x.abs().powf(e)
}

impl DivergencePair {
    pub fn quadratic() -> Self {
        Self {
            family: Family::Quadratic,
        }
    }

    /// `f*(y) = |y|^p / p`, `p > 1`.
    pub fn polynomial(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(AlgaeError::Domain(format!(
                "polynomial divergence needs a finite exponent p > 1, got {p}"
            )));
        }
        let pair = Self {
            family: Family::Polynomial {
                p,
                q: p / (p - 1.0),
            },
        };
        #[cfg(debug_assertions)]
        {
            let report = pair.grid_check();
            debug_assert!(
                report.passes(1e-8),
                "conjugate pair {pair} fails its grid check: {report:?}"
            );
        }
        Ok(pair)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Hölder exponents `(p, q)` for the polynomial family, `(2, 2)` for the quadratic.
    pub fn exponents(&self) -> (f64, f64) {
        match self.family {
            Family::Quadratic => (2.0, 2.0),
            Family::Polynomial { p, q } => (p, q),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self.family {
            Family::Quadratic => 0.5 * x * x,
            Family::Polynomial { q, .. } => x.abs().powf(q) / q,
        }
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Quadratic => x,
            Family::Polynomial { q, .. } => signed_pow(x, q - 1.0),
        }
    }

    pub fn f_star(&self, y: f64) -> f64 {
        match self.family {
            Family::Quadratic => 0.5 * y * y,
            Family::Polynomial { p, .. } => y.abs().powf(p) / p,
        }
    }

    pub fn f_star_prime(&self, y: f64) -> f64 {
        match self.family {
            Family::Quadratic => y,
            Family::Polynomial { p, .. } => signed_pow(y, p - 1.0),
        }
    }

    /// Numerical `sup_y (x·y − f*(y))` by bracketing and golden-section search.
    /// Independent of `f` and `f'`.
    pub fn conjugate_by_search(&self, x: f64) -> f64 {
        let g = |y: f64| x * y - self.f_star(y);
        let mut hi = 1.0;
        while g(2.0 * hi) > g(hi) {
            hi *= 2.0;
        }
        let mut lo = -1.0;
        while g(2.0 * lo) > g(lo) {
            lo *= 2.0;
        }
        let (mut a, mut b) = (2.0 * lo, 2.0 * hi);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..200 {
            if (b - a).abs() < 1e-13 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if gc > gd {
                b = d;
                d = c;
                gd = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + inv_phi * (b - a);
                gd = g(d);
            }
        }
        g(0.5 * (a + b)).max(gc).max(gd)
    }

    /// Conjugacy, inverse-derivative, Fenchel–Young and convexity checks on
    /// the grid {−5, −4.9, …, 5}.
    pub fn grid_check(&self) -> GridReport {
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 / 10.0).collect();
        let mut report = GridReport::default();
        for &x in &grid {
            let sup = self.conjugate_by_search(x);
            report.conjugacy_error = report.conjugacy_error.max((self.f(x) - sup).abs());
            report.inverse_error = report
                .inverse_error
                .max((self.f_star_prime(self.f_prime(x)) - x).abs());
            let y = self.f_prime(x);
            report.fenchel_young_equality_error = report
                .fenchel_young_equality_error
                .max((x * y - self.f(x) - self.f_star(y)).abs());
            for &y in &grid {
                let slack = self.f(x) + self.f_star(y) - x * y;
                report.fenchel_young_violation = report.fenchel_young_violation.max(-slack);
            }
        }
        let h = 0.1;
        for &x in &grid {
            let second = self.f(x - h) - 2.0 * self.f(x) + self.f(x + h);
            report.min_second_difference = report.min_second_difference.min(second);
        }
        report
    }

    /// `D_f(d_pi ‖ d_D) = Σ_{d_D > 0} d_D · f(d_pi / d_D)`.
    pub fn f_divergence(&self, d_pi: &Occupancy, d_data: &Occupancy) -> Result<f64> {
        let ratio = density_ratio(d_pi, d_data)?;
        Ok(d_data
            .as_slice()
            .iter()
            .zip(ratio.as_slice())
            .filter(|(&dd, _)| dd > 0.0)
            .map(|(dd, &w)| dd * self.f(w))
            .sum())
    }

    /// `E_{d_pi}[x] − E_{d_D}[f*(x)]`, a lower bound on `D_f(d_pi ‖ d_D)`.
    pub fn variational_gap(&self, d_pi: &Occupancy, d_data: &Occupancy, x: &ValueTable) -> Result<f64> {
        density_ratio(d_pi, d_data)?;
        if x.len() != d_pi.len() {
            return Err(AlgaeError::InvalidInput("x has the wrong shape".into()));
        }
        let on = crate::linalg::dot(d_pi.as_slice(), x.as_slice());
        let off: f64 = d_data
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(dd, &xi)| dd * self.f_star(xi))
            .sum();
        Ok(on - off)
    }
}

/// Free-function form of [`DivergencePair::f_divergence`].
pub fn f_divergence(d_pi: &Occupancy, d_data: &Occupancy, div: &DivergencePair) -> Result<f64> {
    div.f_divergence(d_pi, d_data)
}

/// Free-function form of [`DivergencePair::variational_gap`].
pub fn variational_gap(
    d_pi: &Occupancy,
    d_data: &Occupancy,
    x: &ValueTable,
    div: &DivergencePair,
) -> Result<f64> {
    div.variational_gap(d_pi, d_data, x)
}

/// `w(s,a) = d_pi(s,a) / d_D(s,a)`, with `0/0 = 0`. Fails on `d_pi > 0 = d_D`.
pub fn density_ratio(d_pi: &Occupancy, d_data: &Occupancy) -> Result<ValueTable> {
    if d_pi.num_states() != d_data.num_states() || d_pi.num_actions() != d_data.num_actions() {
        return Err(AlgaeError::InvalidInput(
            "occupancies have different shapes".into(),
        ));
    }
    let na = d_pi.num_actions();
    let mut w = Vec::with_capacity(d_pi.len());
    for (i, (&p, &d)) in d_pi.as_slice().iter().zip(d_data.as_slice()).enumerate() {
        if d > 0.0 {
            w.push(p / d);
        } else if p > 0.0 {
            return Err(AlgaeError::Support {
                state: i / na,
                action: i % na,
                target_mass: p,
            });
        } else {
            w.push(0.0);
        }
    }
    Ok(ValueTable::from_parts(d_pi.num_states(), na, w))
}

/// Worst-case errors found by [`DivergencePair::grid_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridReport {
    pub conjugacy_error: f64,
    pub inverse_error: f64,
    pub fenchel_young_violation: f64,
    pub fenchel_young_equality_error: f64,
    pub min_second_difference: f64,
}

impl Default for GridReport {
    fn default() -> Self {
        Self {
            conjugacy_error: 0.0,
            inverse_error: 0.0,
            fenchel_young_violation: f64::NEG_INFINITY,
            fenchel_young_equality_error: 0.0,
            min_second_difference: f64::INFINITY,
        }
    }
}

impl GridReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.conjugacy_error <= tol
            && self.inverse_error <= tol
            && self.fenchel_young_violation <= 1e-9
            && self.fenchel_young_equality_error <= tol
            && self.min_second_difference >= -1e-10
    }
}

impl fmt::Display for DivergencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Quadratic => write!(f, "quadratic"),
            Family::Polynomial { p, .. } => write!(f, "polynomial:{p}"),
        }
    }
}

impl FromStr for DivergencePair {
    type Err = AlgaeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "quadratic" {
            return Ok(Self::quadratic());
        }
        if let Some(rest) = s.strip_prefix("polynomial:") {
            let p: f64 = rest
                .parse()
                .map_err(|_| AlgaeError::Parse(format!("bad polynomial exponent '{rest}'")))?;
            return Self::polynomial(p);
        }
        Err(AlgaeError::Parse(format!(
            "unknown divergence '{s}' (expected 'quadratic' or 'polynomial:<p>')"
        )))
    }
}
