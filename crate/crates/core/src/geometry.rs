//! Clarkson-type inequalities and sampled moduli of convexity and smoothness.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_operator_with, Operator, OperatorKind, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::norms::{luxemburg_norm, lp_norm};
use crate::orlicz::OrliczFunction;
use crate::report::run_trials;

const THETA_SCAN: usize = 64;
const DISTANCE_TOL: f64 = 1e-12;
const MAX_RESTARTS: usize = 100;

/// The norm of the space whose moduli are being sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceNorm {
    /// Luxemburg norm of an N-function.
    Luxemburg { phi: OrliczFunction },
    /// Closed-form `L^p` norm.
    Lp { p: f64 },
}

impl SpaceNorm {
    /// `L^{(Phi_s)}` with `Phi_s = intermediate(phi, u^2, s)`.
    pub fn intermediate(phi: &OrliczFunction, s: f64) -> Result<Self> {
        Ok(Self::Luxemburg { phi: intermediate_with_square(phi, s)? })
    }

    pub fn lp(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::input(format!("L^p geometry needs 1 < p < inf, got {p}")));
        }
        Ok(Self::Lp { p })
    }

    pub fn norm(&self, a: &Operator) -> Result<f64> {
        match self {
            Self::Luxemburg { phi } => Ok(luxemburg_norm(a, phi)?.value),
            Self::Lp { p } => Ok(lp_norm(a, *p)?.value),
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("s must lie in (0, 1], got {s}")))
    }
}

fn intermediate_with_square(phi: &OrliczFunction, s: f64) -> Result<OrliczFunction> {
    check_s(s)?;
    OrliczFunction::intermediate(phi, &OrliczFunction::power(2.0)?, s)
}

/// `RHS - LHS` of
/// `(||A+B||^{2/s} + ||A-B||^{2/s})^{s/2} <= 2^{s/2} (||A||^{r} + ||B||^{r})^{1/r}`, `r = 2/(2-s)`,
/// in the Luxemburg norm of `Phi_s = intermediate(phi, u^2, s)`.
pub fn clarkson_check(a: &Operator, b: &Operator, phi: &OrliczFunction, s: f64) -> Result<f64> {
    let phi_s = intermediate_with_square(phi, s)?;
    clarkson_slack(a, b, &phi_s, s)
}

pub(crate) fn clarkson_slack(a: &Operator, b: &Operator, phi_s: &OrliczFunction, s: f64) -> Result<f64> {
    let n = |x: &Operator| luxemburg_norm(x, phi_s).map(|r| r.value);
    let (sum, diff) = (n(&a.add(b)?)?, n(&a.sub(b)?)?);
    let (na, nb) = (n(a)?, n(b)?);
    let lhs = power_mean_sum(sum, diff, 2.0 / s);
    let rhs = 2f64.powf(s / 2.0) * power_mean_sum(na, nb, 2.0 / (2.0 - s));
    Ok(rhs - lhs)
}

/// `(x^e + y^e)^{1/e}`, computed without overflow.
fn power_mean_sum(x: f64, y: f64, e: f64) -> f64 {
    let m = x.max(y);
    if m == 0.0 {
        return 0.0;
    }
    m * ((x / m).powf(e) + (y / m).powf(e)).powf(1.0 / e)
}

/// `RHS - LHS` of the `L^p` Clarkson inequality: the `q`-outer form for `p <= 2`,
/// the `p`-outer form for `p >= 2`.
pub fn lp_clarkson_check(a: &Operator, b: &Operator, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::input(format!("Clarkson inequality needs 1 < p < inf, got {p}")));
    }
    let q = p / (p - 1.0);
    let n = |x: &Operator| lp_norm(x, p).map(|r| r.value);
    let (sum, diff) = (n(&a.add(b)?)?, n(&a.sub(b)?)?);
    let (na, nb) = (n(a)?, n(b)?);
    let (outer, inner) = if p <= 2.0 { (q, p) } else { (p, q) };
    let lhs = power_mean_sum(sum, diff, outer);
    let rhs = 2f64.powf(1.0 / outer) * power_mean_sum(na, nb, inner);
    Ok(rhs - lhs)
}

/// `1 - (1/2) [2^{2/s} - eps^{2/s}]^{s/2}`.
pub fn convexity_bound(s: f64, eps: f64) -> Result<f64> {
    check_s(s)?;
    check_eps(eps)?;
    let inner = (2f64.powf(2.0 / s) - eps.powf(2.0 / s)).max(0.0);
    Ok(1.0 - 0.5 * inner.powf(s / 2.0))
}

/// `(1 + t^{2/(2-s)})^{(2-s)/2} - 1`.
pub fn smoothness_bound(s: f64, t: f64) -> Result<f64> {
    check_s(s)?;
    check_t(t)?;
    let r = 2.0 / (2.0 - s);
    Ok((t.powf(r).ln_1p() / r).exp_m1())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 2.0 {
        Ok(())
    } else {
        Err(Error::input(format!("epsilon must lie in (0, 2], got {eps}")))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("t must be positive, got {t}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpModuliBounds {
    pub delta_bound: f64,
    pub rho_bound: f64,
}

/// `delta >= eps^q / (q 2^q)` and `rho <= t^p / p` for `1 < p <= 2`; `p` and `q` swap for `p >= 2`.
pub fn lp_moduli_bounds(p: f64, eps: f64, t: f64) -> Result<LpModuliBounds> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::input(format!("L^p moduli need 1 < p < inf, got {p}")));
    }
    check_eps(eps)?;
    check_t(t)?;
    let q = p / (p - 1.0);
    let (a, b) = if p <= 2.0 { (q, p) } else { (p, q) };
    Ok(LpModuliBounds { delta_bound: eps.powf(a) / (a * 2f64.powf(a)), rho_bound: t.powf(b) / b })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    /// `eps` for convexity, `t` for smoothness.
    pub parameter: f64,
    pub estimate: f64,
    pub bound: f64,
    pub samples: usize,
    pub constraint_residual: f64,
}

struct Sample {
    value: f64,
    residual: f64,
    a: Operator,
    d: Operator,
}

fn unit_vector(space: &SpaceNorm, rng: &mut ChaCha8Rng, alg: &TracialAlgebra) -> Result<(Operator, f64)> {
    for _ in 0..MAX_RESTARTS {
        let g = random_operator_with(rng, alg, OperatorKind::General, 1.0)?;
        let n = space.norm(&g)?;
        if n > 0.0 {
            let u = g.scale_real(1.0 / n);
            let residual = (space.norm(&u)? - 1.0).abs();
            return Ok((u, residual));
        }
    }
    Err(Error::Sampling("could not draw a nonzero operator".into()))
}

fn normalized(space: &SpaceNorm, x: &Operator) -> Result<Option<Operator>> {
    let n = space.norm(x)?;
    Ok((n > 0.0).then(|| x.scale_real(1.0 / n)))
}

/// Finds `B = normalize(cos(theta) A + sin(theta) D)` with `||A - B|| = eps`.
/// The distance runs continuously from 0 at `theta = 0` to 2 at `theta = pi`.
fn partner_at_distance(space: &SpaceNorm, a: &Operator, d: &Operator, eps: f64) -> Result<Option<(Operator, f64)>> {
    let b_at = |theta: f64| -> Result<Option<Operator>> {
        let x = a.combine(C64::new(theta.cos(), 0.0), d, C64::new(theta.sin(), 0.0))?;
        normalized(space, &x)
    };
    let gap = |b: &Operator| -> Result<f64> { Ok(space.norm(&a.sub(b)?)? - eps) };
    if eps >= 2.0 {
        let b = a.scale_real(-1.0);
        let residual = gap(&b)?.abs();
        return Ok(Some((b, residual)));
    }
    let (mut lo, mut hi) = (0.0, f64::NAN);
    for k in 1..=THETA_SCAN {
        let theta = PI * k as f64 / THETA_SCAN as f64;
        let Some(b) = b_at(theta)? else { return Ok(None) };
        if gap(&b)? >= 0.0 {
            hi = theta;
            break;
        }
        lo = theta;
    }
    if hi.is_nan() {
        return Ok(None);
    }
    let mut best: Option<(Operator, f64)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let Some(b) = b_at(mid)? else { return Ok(None) };
        let g = gap(&b)?;
        if best.as_ref().is_none_or(|(_, r)| g.abs() < *r) {
            best = Some((b, g.abs()));
        }
        if g.abs() <= DISTANCE_TOL || !(mid > lo && mid < hi) {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

fn convexity_sample(space: &SpaceNorm, eps: f64, a: Operator, d: Operator) -> Result<Option<Sample>> {
    let Some((b, residual)) = partner_at_distance(space, &a, &d, eps)? else { return Ok(None) };
    let mid = a.add(&b)?.scale_real(0.5);
    let unit = (space.norm(&b)? - 1.0).abs();
    Ok(Some(Sample { value: 1.0 - space.norm(&mid)?, residual: residual.max(unit), a, d }))
}

fn smoothness_sample(space: &SpaceNorm, t: f64, a: Operator, b: Operator) -> Result<Sample> {
    let tb = b.scale_real(t);
    let value = 0.5 * (space.norm(&a.add(&tb)?)? + space.norm(&a.sub(&tb)?)?) - 1.0;
    let residual = (space.norm(&a)? - 1.0).abs().max((space.norm(&b)? - 1.0).abs());
    Ok(Sample { value, residual, a, d: b })
}

/// `inf { 1 - ||(A+B)/2|| : ||A|| = ||B|| = 1, ||A-B|| = eps }`, sampled from above.
pub fn estimate_convexity(space: &SpaceNorm, eps: f64, alg: &TracialAlgebra, samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    let draws = run_trials(samples, seed, |_, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for _ in 0..MAX_RESTARTS {
            let (a, ra) = unit_vector(space, &mut rng, alg)?;
            let d = random_operator_with(&mut rng, alg, OperatorKind::General, 1.0)?;
            if let Some(mut smp) = convexity_sample(space, eps, a, d)? {
                smp.residual = smp.residual.max(ra);
                return Ok(smp);
            }
        }
        Err(Error::Sampling(format!("distance constraint {eps} could not be bracketed after {MAX_RESTARTS} restarts")))
    })?;
    refine(draws, samples, seed, false, |a, d, rng, step| {
        let na = random_operator_with(rng, alg, OperatorKind::General, step)?;
        let nd = random_operator_with(rng, alg, OperatorKind::General, step * d.frobenius().max(1e-12))?;
        let Some(a2) = normalized(space, &a.add(&na)?)? else { return Ok(None) };
        convexity_sample(space, eps, a2, d.add(&nd)?)
    })
}

/// `sup { (||A + tB|| + ||A - tB||)/2 - 1 : ||A|| = ||B|| = 1 }`, sampled from below.
pub fn estimate_smoothness(space: &SpaceNorm, t: f64, alg: &TracialAlgebra, samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_t(t)?;
    let draws = run_trials(samples, seed, |_, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (a, _) = unit_vector(space, &mut rng, alg)?;
        let (b, _) = unit_vector(space, &mut rng, alg)?;
        smoothness_sample(space, t, a, b)
    })?;
    refine(draws, samples, seed, true, |a, b, rng, step| {
        let na = random_operator_with(rng, alg, OperatorKind::General, step)?;
        let nb = random_operator_with(rng, alg, OperatorKind::General, step)?;
        let (Some(a2), Some(b2)) = (normalized(space, &a.add(&na)?)?, normalized(space, &b.add(&nb)?)?) else {
            return Ok(None);
        };
        smoothness_sample(space, t, a2, b2).map(Some)
    })
}

/// Picks the extreme sample and runs a perturbation search around it.
/// Returns `(extreme value, worst constraint residual)`.
fn refine<F>(draws: Vec<Sample>, samples: usize, seed: u64, maximize: bool, mut perturb: F) -> Result<(f64, f64)>
where
    F: FnMut(&Operator, &Operator, &mut ChaCha8Rng, f64) -> Result<Option<Sample>>,
{
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let mut residual = draws.iter().map(|s| s.residual).fold(0.0, f64::max);
    let Some(mut best) = draws.into_iter().reduce(|acc, s| if better(s.value, acc.value) { s } else { acc }) else {
        return Err(Error::input("at least one sample is required"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(29) ^ 0xace);
    let mut step = 0.05;
    for _ in 0..(samples / 4).max(25) {
        let Some(cand) = perturb(&best.a, &best.d, &mut rng, step)? else { continue };
        residual = residual.max(cand.residual);
        if better(cand.value, best.value) {
            best = cand;
            step = (step * 1.3).min(0.5);
        } else {
            step = (step * 0.9).max(1e-6);
        }
    }
    Ok((best.value, residual))
}

pub fn convexity_modulus_estimate(
    phi: &OrliczFunction,
    s: f64,
    eps: f64,
    alg: &TracialAlgebra,
    samples: usize,
    seed: u64,
) -> Result<ModulusEstimate> {
    let space = SpaceNorm::intermediate(phi, s)?;
    let (estimate, constraint_residual) = estimate_convexity(&space, eps, alg, samples, seed)?;
    Ok(ModulusEstimate { parameter: eps, estimate, bound: convexity_bound(s, eps)?, samples, constraint_residual })
}

pub fn smoothness_modulus_estimate(
    phi: &OrliczFunction,
    s: f64,
    t: f64,
    alg: &TracialAlgebra,
    samples: usize,
    seed: u64,
) -> Result<ModulusEstimate> {
    let space = SpaceNorm::intermediate(phi, s)?;
    let (estimate, constraint_residual) = estimate_smoothness(&space, t, alg, samples, seed)?;
    Ok(ModulusEstimate { parameter: t, estimate, bound: smoothness_bound(s, t)?, samples, constraint_residual })
}

/// Convexity modulus of `L^p` against the `L^p` lower bound.
pub fn lp_convexity_estimate(p: f64, eps: f64, alg: &TracialAlgebra, samples: usize, seed: u64) -> Result<ModulusEstimate> {
    let space = SpaceNorm::lp(p)?;
    let (estimate, constraint_residual) = estimate_convexity(&space, eps, alg, samples, seed)?;
    let bound = lp_moduli_bounds(p, eps, 1.0)?.delta_bound;
    Ok(ModulusEstimate { parameter: eps, estimate, bound, samples, constraint_residual })
}

/// Smoothness modulus of `L^p` against the `L^p` upper bound.
pub fn lp_smoothness_estimate(p: f64, t: f64, alg: &TracialAlgebra, samples: usize, seed: u64) -> Result<ModulusEstimate> {
    let space = SpaceNorm::lp(p)?;
    let (estimate, constraint_residual) = estimate_smoothness(&space, t, alg, samples, seed)?;
    let bound = lp_moduli_bounds(p, 1.0, t)?.rho_bound;
    Ok(ModulusEstimate { parameter: t, estimate, bound, samples, constraint_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_operator;

    fn ops(seed: u64) -> (Operator, Operator) {
        let alg = TracialAlgebra::matrix(3);
        (
            random_operator(&alg, OperatorKind::General, 1.0, seed).unwrap(),
            random_operator(&alg, OperatorKind::General, 1.0, seed + 1000).unwrap(),
        )
    }

    #[test]
    fn clarkson_with_zero_partner_is_tight() {
        let (a, _) = ops(1);
        let zero = a.algebra().zero();
        let phi = OrliczFunction::power(1.5).unwrap();
        for s in [0.25, 0.5, 1.0] {
            assert!(clarkson_check(&a, &zero, &phi, s).unwrap().abs() < 1e-12);
        }
        assert!(clarkson_check(&a, &zero, &phi, 0.0).is_err());
    }

    #[test]
    fn clarkson_at_s_one_is_the_parallelogram_law() {
        let phi = OrliczFunction::expm();
        for seed in 0..20 {
            let (a, b) = ops(seed);
            assert!(clarkson_check(&a, &b, &phi, 1.0).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn clarkson_holds_for_power_intermediates() {
        let phi = OrliczFunction::power(1.5).unwrap();
        for seed in 0..50 {
            let (a, b) = ops(seed);
            assert!(clarkson_check(&a, &b, &phi, 0.5).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn lp_clarkson_examples() {
        for seed in 0..20 {
            let (a, b) = ops(seed);
            assert!(lp_clarkson_check(&a, &b, 2.0).unwrap().abs() < 1e-8);
            for p in [1.5, 3.0] {
                assert!(lp_clarkson_check(&a, &a, p).unwrap().abs() < 1e-10);
                assert!(lp_clarkson_check(&a, &b, p).unwrap() >= -1e-8);
            }
        }
        let (a, b) = ops(0);
        assert!(lp_clarkson_check(&a, &b, 1.0).is_err());
        assert!(lp_clarkson_check(&a, &b, f64::INFINITY).is_err());
    }

    #[test]
    fn closed_form_bounds() {
        assert_eq!(convexity_bound(0.5, 2.0).unwrap(), 1.0);
        assert!(convexity_bound(0.5, 1e-12).unwrap().abs() < 1e-12);
        assert!((convexity_bound(1.0, 2f64.sqrt()).unwrap() - (1.0 - 0.5 * 2f64.sqrt())).abs() < 1e-15);
        assert!(smoothness_bound(0.5, 1e-12).unwrap() < 1e-15);
        assert!((smoothness_bound(1.0, 1.0).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        // (1 + 0.5^{4/3})^{3/4} - 1, evaluated independently at 40 digits
        assert!((smoothness_bound(0.5, 0.5).unwrap() - 0.284_879_471_412_983_3).abs() < 1e-14);
        assert!(convexity_bound(0.0, 1.0).is_err());
        assert!(convexity_bound(0.5, 2.5).is_err());
        assert!(smoothness_bound(0.5, 0.0).is_err());
    }

    #[test]
    fn lp_bounds_examples() {
        let b = lp_moduli_bounds(2.0, 1.0, 1.0).unwrap();
        assert_eq!((b.delta_bound, b.rho_bound), (0.125, 0.5));
        assert!((lp_moduli_bounds(3.0, 1.0, 1.0).unwrap().delta_bound - 1.0 / 24.0).abs() < 1e-15);
        assert!((lp_moduli_bounds(1.5, 1.0, 0.5).unwrap().rho_bound - 0.5f64.powf(1.5) / 1.5).abs() < 1e-15);
        assert!(lp_moduli_bounds(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn l2_anchor_moduli() {
        let alg = TracialAlgebra::matrix(2);
        let phi = OrliczFunction::power(1.5).unwrap();
        let eps = 2f64.sqrt();
        let c = convexity_modulus_estimate(&phi, 1.0, eps, &alg, 50, 1).unwrap();
        let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
        assert!((c.estimate - exact).abs() < 1e-9, "{c:?}");
        assert!(c.constraint_residual <= 1e-6);

        let t = 0.5;
        let r = smoothness_modulus_estimate(&phi, 1.0, t, &alg, 400, 2).unwrap();
        let exact = (1.0f64 + t * t).sqrt() - 1.0;
        assert!(r.estimate <= exact + 1e-9 && r.estimate >= exact - 1e-4, "{r:?}");
    }

    #[test]
    fn antipodal_and_aligned_limits() {
        let alg = TracialAlgebra::matrix(2);
        let phi = OrliczFunction::power(1.5).unwrap();
        let c = convexity_modulus_estimate(&phi, 0.5, 2.0, &alg, 20, 3).unwrap();
        assert!((c.estimate - 1.0).abs() < 1e-9);

        let space = SpaceNorm::intermediate(&phi, 0.5).unwrap();
        let a = random_operator(&alg, OperatorKind::General, 1.0, 4).unwrap();
        let a = a.scale_real(1.0 / space.norm(&a).unwrap());
        let smp = smoothness_sample(&space, 0.7, a.clone(), a).unwrap();
        assert!(smp.value.abs() < 1e-12);
    }

    #[test]
    fn orlicz_moduli_respect_bounds() {
        let alg = TracialAlgebra::matrix(2);
        let phi = OrliczFunction::power(1.5).unwrap();
        let c = convexity_modulus_estimate(&phi, 0.5, 1.0, &alg, 200, 5).unwrap();
        assert!(c.estimate >= c.bound - 1e-7, "{c:?}");
        for t in [0.1, 0.5, 1.0] {
            let r = smoothness_modulus_estimate(&phi, 0.5, t, &alg, 200, 6).unwrap();
            assert!(r.estimate <= r.bound + 1e-7, "{r:?}");
        }
    }

    #[test]
    fn lp_moduli_respect_bounds() {
        let alg = TracialAlgebra::matrix(2);
        for p in [1.5, 3.0] {
            let c = lp_convexity_estimate(p, 1.0, &alg, 100, 7).unwrap();
            assert!(c.estimate >= c.bound - 1e-7, "{c:?}");
            let r = lp_smoothness_estimate(p, 0.5, &alg, 100, 8).unwrap();
            assert!(r.estimate <= r.bound + 1e-7, "{r:?}");
        }
    }
}
