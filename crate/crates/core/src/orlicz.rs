//! N-functions and their scalar constructions.
//!
//! An [`OrliczFunction`] is an immutable value: a catalog family (power,
//! `e^u - u - 1`, `(1+u)ln(1+u) - u`), a user table, or a derived wrapper
//! (Young conjugate, intermediate function). Every function is restricted to a
//! finite `domain_cap`, past which evaluation reports a domain error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solve::{bisect_increasing, golden_max, grow_upper, BISECTION_RTOL};

/// Default ratio limit used when classifying a function as Delta-2 on a grid.
pub const DEFAULT_DELTA2_LIMIT: f64 = 1e3;

/// Every catalog function is capped so that `phi(cap)` stays near `1e200`.
const CATALOG_CEILING_LOG10: f64 = 200.0;
const EXPM_CAP: f64 = 460.0;
const LINLOG_CAP: f64 = 1e200;

/// Relative slack accepted by the grid convexity check.
const CONVEXITY_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `u^alpha`, `alpha > 1`.
    Power { alpha: f64 },
    /// `e^u - u - 1`.
    ExpM,
    /// `(1 + u) ln(1 + u) - u`.
    LinLog,
    Tabulated(Table),
    /// Young conjugate `sup_u (u v - inner(u))`.
    Conjugate(Box<OrliczFunction>),
    /// The function whose inverse is `inv(phi1)^(1-s) * inv(phi2)^s`.
    Intermediate {
        phi1: Box<OrliczFunction>,
        phi2: Box<OrliczFunction>,
        s: f64,
    },
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of convex samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    u: Vec<f64>,
    phi: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Descriptor", into = "Descriptor")]
pub struct OrliczFunction {
    family: Family,
    domain_cap: f64,
}

/// Outcome of [`OrliczFunction::delta2_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Delta2Report {
    pub k_max: f64,
    /// Grid point attaining `k_max`.
    pub t_at_max: f64,
    pub limit: f64,
    pub holds: bool,
}

/// Result of the grid check of the N-function invariants.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub monotonicity_violations: usize,
    pub convexity_violations: usize,
    pub derivative_violations: usize,
    pub max_convexity_excess: f64,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.monotonicity_violations == 0
            && self.convexity_violations == 0
            && self.derivative_violations == 0
    }
}

impl OrliczFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::input(format!("power exponent must exceed 1, got {alpha}")));
        }
        Ok(Self {
            family: Family::Power { alpha },
            domain_cap: 10f64.powf(CATALOG_CEILING_LOG10 / alpha),
        })
    }

    pub fn expm() -> Self {
        Self { family: Family::ExpM, domain_cap: EXPM_CAP }
    }

    pub fn linlog() -> Self {
        Self { family: Family::LinLog, domain_cap: LINLOG_CAP }
    }

    /// Builds a tabulated function from samples `(u_i, phi_i)`.
    ///
    /// Requires `u_0 = phi_0 = 0`, strictly increasing samples with
    /// nondecreasing chord slopes, and an interpolant that passes the grid
    /// convexity check; anything else is rejected.
    pub fn tabulated(u: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let table = Table::new(u, phi)?;
        let cap = *table.u.last().expect("validated non-empty");
        let f = Self { family: Family::Tabulated(table), domain_cap: cap };
        let grid = f.refined_table_grid();
        let report = f.check_invariants(&grid)?;
        if report.monotonicity_violations > 0 || report.convexity_violations > 0 {
            return Err(Error::input(format!(
                "tabulated function fails the N-function grid check: {report:?}"
            )));
        }
        Ok(f)
    }

    /// The intermediate function `phi_s` with `phi_s^{-1} = (phi1^{-1})^{1-s} (phi2^{-1})^s`.
    ///
    /// `s = 0` and `s = 1` return `phi1` and `phi2` unchanged.
    pub fn intermediate(phi1: &OrliczFunction, phi2: &OrliczFunction, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::input(format!("interpolation parameter s must lie in [0, 1], got {s}")));
        }
        if s == 0.0 {
            return Ok(phi1.clone());
        }
        if s == 1.0 {
            return Ok(phi2.clone());
        }
        let y_cap = phi1.eval(phi1.domain_cap)?.min(phi2.eval(phi2.domain_cap)?);
        let cap = phi1.inverse(y_cap)?.powf(1.0 - s) * phi2.inverse(y_cap)?.powf(s);
        Ok(Self {
            family: Family::Intermediate {
                phi1: Box::new(phi1.clone()),
                phi2: Box::new(phi2.clone()),
                s,
            },
            domain_cap: cap,
        })
    }

    /// The complementary (Young conjugate) function.
    pub fn complementary(&self) -> Self {
        let domain_cap = self
            .right_derivative(self.domain_cap)
            .unwrap_or(f64::MAX)
            .min(f64::MAX);
        Self { family: Family::Conjugate(Box::new(self.clone())), domain_cap }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    /// Returns a copy with a different domain cap (tabulated functions keep their table end).
    pub fn with_domain_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::input("domain cap must be positive"));
        }
        if let Family::Tabulated(t) = &self.family {
            if cap > *t.u.last().unwrap() {
                return Err(Error::input("tabulated domain cap cannot exceed the last sample"));
            }
        }
        self.domain_cap = cap;
        Ok(self)
    }

    /// The exponent when this is (or reduces in closed form to) `u^alpha`.
    pub fn power_exponent(&self) -> Option<f64> {
        match &self.family {
            Family::Power { alpha } => Some(*alpha),
            Family::Intermediate { phi1, phi2, s } => {
                let (a1, a2) = (phi1.power_exponent()?, phi2.power_exponent()?);
                Some(1.0 / ((1.0 - s) / a1 + s / a2))
            }
            _ => None,
        }
    }

    fn check_arg(&self, u: f64, what: &str) -> Result<()> {
        if u.is_nan() || u < 0.0 {
            return Err(Error::input(format!("{what}: argument must be nonnegative, got {u}")));
        }
        if u > self.domain_cap {
            return Err(Error::Domain { what: what.to_string(), value: u, cap: self.domain_cap });
        }
        Ok(())
    }

    /// Evaluates the function at `u >= 0`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        self.check_arg(u, "eval")?;
        if u == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            Family::Power { alpha } => Ok(u.powf(*alpha)),
            Family::ExpM => Ok(expm_value(u)),
            Family::LinLog => Ok(linlog_value(u)),
            Family::Tabulated(t) => Ok(t.eval(u)),
            Family::Conjugate(inner) => match inner.family {
                Family::Power { alpha } => Ok(power_conjugate_value(alpha, u)),
                Family::ExpM => Ok(linlog_value(u)),
                Family::LinLog => Ok(expm_value(u)),
                _ => conjugate_numeric(inner, u),
            },
            Family::Intermediate { .. } => match self.power_exponent() {
                Some(a) => Ok(u.powf(a)),
                None => self.intermediate_by_inversion(u),
            },
        }
    }

    /// Evaluates an intermediate function by inverting its defining inverse.
    ///
    /// This is the generic path used whenever no closed form applies; it is
    /// public so closed forms can be checked against it.
    pub fn intermediate_by_inversion(&self, u: f64) -> Result<f64> {
        let Family::Intermediate { phi1, phi2, s } = &self.family else {
            return Err(Error::input("intermediate_by_inversion needs an intermediate function"));
        };
        self.check_arg(u, "eval")?;
        if u == 0.0 {
            return Ok(0.0);
        }
        let g = |y: f64| -> Result<f64> {
            Ok(phi1.inverse(y)?.powf(1.0 - s) * phi2.inverse(y)?.powf(*s))
        };
        let y_cap = phi1.eval(phi1.domain_cap)?.min(phi2.eval(phi2.domain_cap)?);
        let hi = grow_upper(g, u, 1.0, y_cap)?.unwrap_or(y_cap);
        bisect_increasing(g, u, 0.0, hi, BISECTION_RTOL)
    }

    /// Right derivative `p(t)`.
    pub fn right_derivative(&self, t: f64) -> Result<f64> {
        self.check_arg(t, "right_derivative")?;
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            Family::Power { alpha } => Ok(alpha * t.powf(alpha - 1.0)),
            Family::ExpM => Ok(t.exp_m1()),
            Family::LinLog => Ok(t.ln_1p()),
            Family::Conjugate(inner) => match inner.family {
                Family::Power { alpha } => Ok((t / alpha).powf(1.0 / (alpha - 1.0))),
                Family::ExpM => Ok(t.ln_1p()),
                Family::LinLog => Ok(t.exp_m1()),
                _ => self.forward_difference(t),
            },
            Family::Intermediate { .. } => match self.power_exponent() {
                Some(a) => Ok(a * t.powf(a - 1.0)),
                None => self.forward_difference(t),
            },
            Family::Tabulated(_) => self.forward_difference(t),
        }
    }

    fn forward_difference(&self, t: f64) -> Result<f64> {
        let h = (1e-7f64).max(1e-7 * t);
        if t + h <= self.domain_cap {
            Ok((self.eval(t + h)? - self.eval(t)?) / h)
        } else {
            let lo = (t - h).max(0.0);
            Ok((self.eval(t)? - self.eval(lo)?) / (t - lo))
        }
    }

    /// The unique `u` with `phi(u) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::input(format!("inverse: argument must be nonnegative, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if let Family::Power { alpha } = self.family {
            let u = y.powf(1.0 / alpha);
            if u > self.domain_cap {
                return Err(Error::Domain { what: "inverse".into(), value: y, cap: self.eval(self.domain_cap)? });
            }
            return Ok(u);
        }
        if let Family::Intermediate { phi1, phi2, s } = &self.family {
            return Ok(phi1.inverse(y)?.powf(1.0 - s) * phi2.inverse(y)?.powf(*s));
        }
        let top = self.eval(self.domain_cap)?;
        if y > top {
            return Err(Error::Domain { what: "inverse".into(), value: y, cap: top });
        }
        let f = |u: f64| self.eval(u);
        let hi = grow_upper(f, y, 1.0, self.domain_cap)?.unwrap_or(self.domain_cap);
        bisect_increasing(f, y, 0.0, hi, BISECTION_RTOL)
    }

    /// Grid estimate of `sup phi(2t) / phi(t)`.
    pub fn delta2_check(&self, t_grid: &[f64], limit: f64) -> Result<Delta2Report> {
        if t_grid.is_empty() {
            return Err(Error::input("delta2_check needs a non-empty grid"));
        }
        let mut k_max = f64::NEG_INFINITY;
        let mut t_at_max = t_grid[0];
        for &t in t_grid {
            if !(t > 0.0) {
                return Err(Error::input(format!("delta2 grid points must be positive, got {t}")));
            }
            if 2.0 * t > self.domain_cap {
                return Err(Error::Domain { what: "delta2_check".into(), value: t, cap: self.domain_cap / 2.0 });
            }
            let ratio = self.eval(2.0 * t)? / self.eval(t)?;
            if ratio > k_max {
                k_max = ratio;
                t_at_max = t;
            }
        }
        Ok(Delta2Report { k_max, t_at_max, limit, holds: k_max <= limit })
    }

    /// Grid check of monotonicity, midpoint convexity and a nondecreasing
    /// right derivative on the sorted positive points of `grid`.
    pub fn check_invariants(&self, grid: &[f64]) -> Result<InvariantReport> {
        let mut pts: Vec<f64> = grid.iter().copied().filter(|&u| u >= 0.0).collect();
        pts.push(0.0);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        let vals = pts.iter().map(|&u| self.eval(u)).collect::<Result<Vec<_>>>()?;
        let ders = pts.iter().map(|&u| self.right_derivative(u)).collect::<Result<Vec<_>>>()?;
        let mut rep = InvariantReport::default();
        for i in 1..pts.len() {
            if !(vals[i] > vals[i - 1]) {
                rep.monotonicity_violations += 1;
            }
            let drift = 1e-6 * ders[i].abs().max(ders[i - 1].abs());
            if ders[i] + drift < ders[i - 1] {
                rep.derivative_violations += 1;
            }
        }
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let mid = self.eval(0.5 * (pts[i] + pts[j]))?;
                let chord = 0.5 * (vals[i] + vals[j]);
                let excess = mid - chord;
                if excess > CONVEXITY_RTOL * chord.abs() {
                    rep.convexity_violations += 1;
                    rep.max_convexity_excess = rep.max_convexity_excess.max(excess / chord);
                }
            }
        }
        Ok(rep)
    }

    fn refined_table_grid(&self) -> Vec<f64> {
        let Family::Tabulated(t) = &self.family else { return Vec::new() };
        let mut out = Vec::new();
        for w in t.u.windows(2) {
            for k in 0..8 {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
            }
        }
        out.push(*t.u.last().unwrap());
        out
    }
}

fn expm_value(u: f64) -> f64 {
    if u < 1e-3 {
        // e^u - 1 - u loses everything to cancellation near 0
        let u2 = u * u;
        u2 * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0 + u / 720.0))))
    } else {
        u.exp_m1() - u
    }
}

fn linlog_value(u: f64) -> f64 {
    if u < 1e-3 {
        // sum_{k>=2} (-1)^k u^k / (k (k-1))
        let u2 = u * u;
        u2 * (0.5 - u * (1.0 / 6.0 - u * (1.0 / 12.0 - u * (1.0 / 20.0 - u / 30.0))))
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

fn power_conjugate_value(alpha: f64, v: f64) -> f64 {
    (alpha - 1.0) / alpha * v * (v / alpha).powf(1.0 / (alpha - 1.0))
}

/// Numeric Young conjugate `sup_{u in [0, cap]} (u v - phi(u))`.
///
/// Solves `p(u) = v` by bisection on the right derivative; tabulated functions
/// fall back to golden-section search on the concave objective. Never uses a
/// closed form, so it doubles as an oracle for the catalog conjugates.
pub fn conjugate_numeric(phi: &OrliczFunction, v: f64) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::input(format!("conjugate argument must be nonnegative, got {v}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let cap = phi.domain_cap();
    let objective = |u: f64| phi.eval(u).map(|f| u * v - f);
    let u_star = if matches!(phi.family, Family::Tabulated(_)) {
        golden_max(objective, 0.0, cap, 1e-13)?.0
    } else {
        let p = |u: f64| phi.right_derivative(u);
        if p(cap)? < v {
            return Err(Error::Domain { what: "conjugate eval".into(), value: v, cap: p(cap)? });
        }
        let hi = grow_upper(p, v, 1.0, cap)?.unwrap_or(cap);
        bisect_increasing(p, v, 0.0, hi, 1e-14)?
    };
    Ok(objective(u_star)?.max(0.0))
}

impl Table {
    fn new(u: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if u.len() != phi.len() {
            return Err(Error::input("table u and phi must have equal length"));
        }
        if u.len() < 3 {
            return Err(Error::input("table needs at least 3 samples"));
        }
        if u[0] != 0.0 || phi[0] != 0.0 {
            return Err(Error::input("table must start at (0, 0)"));
        }
        if u.iter().chain(&phi).any(|x| !x.is_finite()) {
            return Err(Error::input("table samples must be finite"));
        }
        let n = u.len();
        let mut h = Vec::with_capacity(n - 1);
        let mut delta = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let dh = u[i + 1] - u[i];
            let dp = phi[i + 1] - phi[i];
            if !(dh > 0.0) || !(dp > 0.0) {
                return Err(Error::input("table samples must be strictly increasing"));
            }
            h.push(dh);
            delta.push(dp / dh);
        }
        for w in delta.windows(2) {
            if w[1] < w[0] * (1.0 - CONVEXITY_RTOL) {
                return Err(Error::input("table samples are not convex (chord slopes decrease)"));
            }
        }
        let slopes = pchip_slopes(&h, &delta);
        Ok(Self { u, phi, slopes })
    }

    fn eval(&self, x: f64) -> f64 {
        let k = match self.u.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.phi[i],
            Err(i) => i - 1,
        };
        let h = self.u[k + 1] - self.u[k];
        let t = (x - self.u[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.phi[k] + h10 * h * self.slopes[k] + h01 * self.phi[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// Fritsch-Carlson derivative estimates (weighted harmonic means inside,
/// shape-preserving three-point formula at the ends).
fn pchip_slopes(h: &[f64], delta: &[f64]) -> Vec<f64> {
    let n = delta.len() + 1;
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 <= 0.0 && s.abs() > (3.0 * d0).abs() {
            s = 3.0 * d0;
        }
        s
    };
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    d
}

/// JSON form of an [`OrliczFunction`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Descriptor {
    Power { alpha: f64 },
    Expm,
    Linlog,
    Table { u: Vec<f64>, phi: Vec<f64> },
    Conjugate { inner: Box<Descriptor> },
    Intermediate { phi1: Box<Descriptor>, phi2: Box<Descriptor>, s: f64 },
}

impl TryFrom<Descriptor> for OrliczFunction {
    type Error = Error;

    fn try_from(d: Descriptor) -> Result<Self> {
        match d {
            Descriptor::Power { alpha } => OrliczFunction::power(alpha),
            Descriptor::Expm => Ok(OrliczFunction::expm()),
            Descriptor::Linlog => Ok(OrliczFunction::linlog()),
            Descriptor::Table { u, phi } => OrliczFunction::tabulated(u, phi),
            Descriptor::Conjugate { inner } => Ok(OrliczFunction::try_from(*inner)?.complementary()),
            Descriptor::Intermediate { phi1, phi2, s } => OrliczFunction::intermediate(
                &OrliczFunction::try_from(*phi1)?,
                &OrliczFunction::try_from(*phi2)?,
                s,
            ),
        }
    }
}

impl From<OrliczFunction> for Descriptor {
    fn from(f: OrliczFunction) -> Self {
        match f.family {
            Family::Power { alpha } => Descriptor::Power { alpha },
            Family::ExpM => Descriptor::Expm,
            Family::LinLog => Descriptor::Linlog,
            Family::Tabulated(t) => Descriptor::Table { u: t.u, phi: t.phi },
            Family::Conjugate(inner) => Descriptor::Conjugate { inner: Box::new((*inner).into()) },
            Family::Intermediate { phi1, phi2, s } => Descriptor::Intermediate {
                phi1: Box::new((*phi1).into()),
                phi2: Box::new((*phi2).into()),
                s,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn p2() -> OrliczFunction {
        OrliczFunction::power(2.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(p2().eval(3.0).unwrap(), 9.0);
        assert!((OrliczFunction::expm().eval(1.0).unwrap() - (E - 2.0)).abs() < 1e-15);
        for f in [p2(), OrliczFunction::expm(), OrliczFunction::linlog()] {
            assert_eq!(f.eval(0.0).unwrap(), 0.0);
            assert_eq!(f.right_derivative(0.0).unwrap(), 0.0);
            assert_eq!(f.inverse(0.0).unwrap(), 0.0);
        }
        assert_eq!(p2().right_derivative(3.0).unwrap(), 6.0);
        assert!((OrliczFunction::linlog().right_derivative(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn series_branches_are_continuous() {
        for f in [OrliczFunction::expm(), OrliczFunction::linlog()] {
            let below = f.eval(1e-3 * (1.0 - 1e-12)).unwrap();
            let above = f.eval(1e-3 * (1.0 + 1e-12)).unwrap();
            assert!(rel(below, above) < 1e-10, "{below} vs {above}");
        }
    }

    #[test]
    fn domain_and_input_errors() {
        let f = OrliczFunction::expm();
        assert!(matches!(f.eval(-1.0), Err(Error::Input(_))));
        assert!(matches!(f.eval(1e4), Err(Error::Domain { .. })));
        assert!(matches!(f.right_derivative(1e4), Err(Error::Domain { .. })));
        assert!(matches!(f.inverse(1e250), Err(Error::Domain { .. })));
        assert!(OrliczFunction::power(1.0).is_err());
        assert!(OrliczFunction::intermediate(&p2(), &f, 1.5).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        assert!((p2().inverse(9.0).unwrap() - 3.0).abs() < 1e-15);
        let f = OrliczFunction::expm();
        let u = f.inverse(E - 2.0).unwrap();
        assert!((u - 1.0).abs() < 1e-10);
        for f in [OrliczFunction::expm(), OrliczFunction::linlog(), p2().complementary()] {
            for y in [1e-9, 1e-3, 0.5, 1.0, 7.0, 1e6] {
                let u = f.inverse(y).unwrap();
                assert!(rel(f.eval(u).unwrap(), y) < 1e-10, "{f:?} y={y}");
            }
        }
    }

    #[test]
    fn conjugate_closed_forms_match_numeric_legendre() {
        let psi = p2().complementary();
        assert!((psi.eval(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(psi.eval(0.0).unwrap(), 0.0);
        let psi = OrliczFunction::expm().complementary();
        let expected = 2.0 * 2f64.ln() - 1.0;
        assert!((psi.eval(1.0).unwrap() - expected).abs() < 1e-15);
        for (f, vs) in [
            (p2(), vec![0.1, 1.0, 2.0, 10.0]),
            (OrliczFunction::power(1.5).unwrap(), vec![0.1, 1.0, 3.0]),
            (OrliczFunction::power(3.0).unwrap(), vec![0.1, 1.0, 3.0]),
            (OrliczFunction::expm(), vec![0.01, 1.0, 5.0, 100.0]),
            (OrliczFunction::linlog(), vec![0.01, 1.0, 5.0, 30.0]),
        ] {
            let psi = f.complementary();
            for v in vs {
                let closed = psi.eval(v).unwrap();
                let numeric = conjugate_numeric(&f, v).unwrap();
                assert!(rel(closed, numeric) < 1e-9, "{f:?} v={v}: {closed} vs {numeric}");
            }
        }
    }

    /// Legendre transform by brute force over a fine grid; independent of
    /// both the closed forms and the derivative-based solver.
    #[test]
    fn expm_conjugate_matches_grid_legendre_oracle() {
        let f = OrliczFunction::expm();
        let v = 1.0;
        let best = (0..=200_000)
            .map(|i| i as f64 * 1e-5)
            .map(|u| u * v - f.eval(u).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        let psi = f.complementary().eval(v).unwrap();
        assert!((psi - 0.386294361).abs() < 1e-9);
        assert!(psi >= best - 1e-15 && psi - best < 1e-9);
    }

    #[test]
    fn expm_and_linlog_are_a_conjugate_pair() {
        let psi = OrliczFunction::expm().complementary();
        let ll = OrliczFunction::linlog();
        for v in [0.2, 1.0, 4.0] {
            assert_eq!(psi.eval(v).unwrap(), ll.eval(v).unwrap());
            assert!(rel(conjugate_numeric(&OrliczFunction::expm(), v).unwrap(), ll.eval(v).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn double_conjugate_recovers_catalog_functions() {
        for f in [p2(), OrliczFunction::power(1.5).unwrap(), OrliczFunction::expm(), OrliczFunction::linlog()] {
            let back = f.complementary().complementary();
            for u in [0.05, 0.5, 1.0, 2.5] {
                let a = back.eval(u).unwrap();
                let b = f.eval(u).unwrap();
                assert!(rel(a, b) < 1e-6, "{f:?} at {u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn young_inequality_on_grid() {
        for f in [p2(), OrliczFunction::power(1.5).unwrap(), OrliczFunction::expm(), OrliczFunction::linlog()] {
            let psi = f.complementary();
            for i in 0..40 {
                for j in 0..40 {
                    let (u, v) = (0.1 * i as f64, 0.1 * j as f64);
                    let gap = f.eval(u).unwrap() + psi.eval(v).unwrap() - u * v;
                    assert!(gap >= -1e-9, "{f:?} u={u} v={v} gap={gap}");
                }
            }
        }
    }

    #[test]
    fn intermediate_endpoints_and_power_closed_form() {
        let a = OrliczFunction::power(1.5).unwrap();
        let e = OrliczFunction::expm();
        assert_eq!(OrliczFunction::intermediate(&a, &e, 0.0).unwrap(), a);
        assert_eq!(OrliczFunction::intermediate(&a, &e, 1.0).unwrap(), e);
        let mid = OrliczFunction::intermediate(&a, &p2(), 0.4).unwrap();
        assert!((mid.power_exponent().unwrap() - 5.0 / 3.0).abs() < 1e-14);
        for u in [0.3, 1.0, 2.0, 7.5] {
            let closed = mid.eval(u).unwrap();
            let inverted = mid.intermediate_by_inversion(u).unwrap();
            assert!(rel(closed, u.powf(5.0 / 3.0)) < 1e-14);
            assert!(rel(closed, inverted) < 1e-10);
        }
    }

    #[test]
    fn intermediate_reproduces_lp_exponent() {
        // alpha = 1.5, p = 1.8 gives s = 2 (p - alpha) / (p (2 - alpha)) = 2/3
        let (alpha, p) = (1.5f64, 1.8f64);
        let s = 2.0 * (p - alpha) / (p * (2.0 - alpha));
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
        let f = OrliczFunction::intermediate(&OrliczFunction::power(alpha).unwrap(), &p2(), s).unwrap();
        assert!((f.power_exponent().unwrap() - p).abs() < 1e-12);
        assert!(rel(f.intermediate_by_inversion(2.0).unwrap(), 2f64.powf(p)) < 1e-10);
    }

    #[test]
    fn intermediate_of_a_function_with_itself_is_itself() {
        let e = OrliczFunction::expm();
        for s in [0.2, 0.5, 0.9] {
            let f = OrliczFunction::intermediate(&e, &e, s).unwrap();
            for u in [0.1, 1.0, 3.0] {
                assert!(rel(f.eval(u).unwrap(), e.eval(u).unwrap()) < 1e-10);
            }
        }
    }

    #[test]
    fn intermediate_mixed_family_is_an_n_function() {
        let f = OrliczFunction::intermediate(&OrliczFunction::expm(), &p2(), 0.5).unwrap();
        let grid: Vec<f64> = (1..30).map(|i| 0.15 * i as f64).collect();
        let rep = f.check_invariants(&grid).unwrap();
        assert!(rep.monotonicity_violations == 0 && rep.convexity_violations == 0, "{rep:?}");
        let u = f.inverse(2.0).unwrap();
        assert!(rel(f.eval(u).unwrap(), 2.0) < 1e-10);
    }

    #[test]
    fn catalog_invariants_hold_on_grid() {
        let grid: Vec<f64> = (1..50).map(|i| 0.2 * i as f64).collect();
        for f in [p2(), OrliczFunction::power(1.5).unwrap(), OrliczFunction::expm(), OrliczFunction::linlog(), p2().complementary()] {
            let rep = f.check_invariants(&grid).unwrap();
            assert!(rep.is_clean(), "{f:?}: {rep:?}");
        }
    }

    #[test]
    fn delta2_diagnostics() {
        let r = p2().delta2_check(&[1.0, 2.0, 4.0], DEFAULT_DELTA2_LIMIT).unwrap();
        assert_eq!(r.k_max, 4.0);
        assert!(r.holds);
        let r = OrliczFunction::power(3.0).unwrap().delta2_check(&[0.5, 1.0, 3.0], DEFAULT_DELTA2_LIMIT).unwrap();
        assert!(rel(r.k_max, 8.0) < 1e-14);
        let grid: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let r = OrliczFunction::expm().delta2_check(&grid, DEFAULT_DELTA2_LIMIT).unwrap();
        assert!(r.k_max > 1000.0 && !r.holds);
        assert_eq!(r.t_at_max, 20.0);
        assert!(p2().delta2_check(&[], 10.0).is_err());
    }

    #[test]
    fn tabulated_square_interpolates_and_conjugates() {
        let u: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let phi: Vec<f64> = u.iter().map(|x| x * x).collect();
        let f = OrliczFunction::tabulated(u, phi).unwrap();
        assert_eq!(f.eval(2.0).unwrap(), 4.0);
        assert!((f.eval(2.1).unwrap() - 4.41).abs() < 5e-3);
        let psi = f.complementary();
        assert!((psi.eval(2.0).unwrap() - 1.0).abs() < 5e-3);
        assert!(f.eval(11.0).is_err());
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(OrliczFunction::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).is_err());
        assert!(OrliczFunction::tabulated(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 4.0]).is_err());
        assert!(OrliczFunction::tabulated(vec![0.5, 1.0, 2.0], vec![0.0, 1.0, 4.0]).is_err());
        assert!(OrliczFunction::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let json = r#"{"family":"intermediate","phi1":{"family":"power","alpha":1.5},"phi2":{"family":"expm"},"s":0.5}"#;
        let f: OrliczFunction = serde_json::from_str(json).unwrap();
        let back: OrliczFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        assert!(serde_json::from_str::<OrliczFunction>(r#"{"family":"power","alpha":0.5}"#).is_err());
        assert!(serde_json::from_str::<OrliczFunction>(r#"{"family":"cosh"}"#).is_err());
    }
}
