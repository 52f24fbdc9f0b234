//! Luxemburg, Orlicz and L^p norms of a single operator.
//!
//! All three depend on `A` only through its weighted singular values, so the
//! solvers work on a [`Spectrum`] and the operator-level entry points compute
//! it once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, Operator, Spectrum, C64};
use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;
use crate::solve::{bisect_increasing, golden_min, log_grid};

const LUXEMBURG_RTOL: f64 = 1e-14;
const AMEMIYA_RTOL: f64 = 1e-9;
const AMEMIYA_GRID_PER_DECADE: usize = 10;
// keeps `k * top` strictly inside the domain after rounding
const EDGE_SHRINK: f64 = 1.0 - 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Bisection,
    Amemiya,
    DualSearch,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    /// Achieved tolerance: `|rho(A / value) - 1|` for bisection, relative
    /// bracket width for Amemiya, 0 for closed forms.
    pub residual: f64,
}

impl NormResult {
    fn zero(method: NormMethod) -> Self {
        Self { value: 0.0, method, residual: 0.0 }
    }
}

/// Which Orlicz-type norm to use on a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Luxemburg,
    Orlicz,
}

pub fn luxemburg_norm(a: &Operator, phi: &OrliczFunction) -> Result<NormResult> {
    luxemburg_from_spectrum(&a.singular_spectrum()?, phi)
}

/// `inf { lambda > 0 : tau(phi(|A| / lambda)) <= 1 }`.
///
/// Solves `rho(k |A|) = 1` for the scaling `k = 1 / lambda`; the modular is
/// continuous and strictly increasing in `k` whenever `A != 0`.
pub fn luxemburg_from_spectrum(spec: &Spectrum, phi: &OrliczFunction) -> Result<NormResult> {
    if spec.is_zero() {
        return Ok(NormResult::zero(NormMethod::Bisection));
    }
    let top = spec.max_value();
    let k_cap = phi.domain_cap() / top * EDGE_SHRINK;
    let g = |k: f64| spec.modular(phi, k);
    let mut hi = (1.0 / top).min(k_cap);
    while g(hi)? < 1.0 {
        if hi >= k_cap {
            return Err(Error::Domain {
                what: "luxemburg_norm bracketing".into(),
                value: hi * top,
                cap: phi.domain_cap(),
            });
        }
        hi = (2.0 * hi).min(k_cap);
    }
    let mut lo = hi;
    while g(lo)? >= 1.0 {
        lo *= 0.5;
    }
    let k = bisect_increasing(g, 1.0, lo, hi, LUXEMBURG_RTOL)?;
    Ok(NormResult { value: 1.0 / k, method: NormMethod::Bisection, residual: (g(k)? - 1.0).abs() })
}

pub fn orlicz_norm(a: &Operator, phi: &OrliczFunction) -> Result<NormResult> {
    orlicz_from_spectrum(&a.singular_spectrum()?, phi)
}

/// Amemiya form of the Orlicz norm, `inf_{k > 0} (1 + rho(k A)) / k`.
///
/// The objective is quasiconvex in `k`, so a log-grid scan locates the basin
/// and golden-section search refines it. The scan is truncated where `k |A|`
/// would leave the domain of `phi`; a minimizer pinned to that edge is a
/// domain error.
pub fn orlicz_from_spectrum(spec: &Spectrum, phi: &OrliczFunction) -> Result<NormResult> {
    if spec.is_zero() {
        return Ok(NormResult::zero(NormMethod::Amemiya));
    }
    let top = spec.max_value();
    let k_lo = 1e-6 / top;
    let k_hi = (1e6 / top).min(phi.domain_cap() / top * EDGE_SHRINK);
    if !(k_hi > k_lo) {
        return Err(Error::Domain { what: "orlicz_norm scan".into(), value: k_lo * top, cap: phi.domain_cap() });
    }
    let amemiya = |k: f64| spec.modular(phi, k).map(|m| (1.0 + m) / k);
    let decades = (k_hi / k_lo).log10().max(1.0);
    let n = (decades * AMEMIYA_GRID_PER_DECADE as f64).ceil() as usize + 1;
    let grid = log_grid(k_lo, k_hi, n.max(3));
    let vals = grid.iter().map(|&k| amemiya(k)).collect::<Result<Vec<_>>>()?;
    let best = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    if best == grid.len() - 1 && k_hi < 1e6 / top {
        return Err(Error::Domain {
            what: "orlicz_norm: Amemiya minimizer beyond the domain cap".into(),
            value: k_hi * top,
            cap: phi.domain_cap(),
        });
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (_, value) = golden_min(amemiya, a, b, AMEMIYA_RTOL)?;
    let value = value.min(vals[best]);
    Ok(NormResult { value, method: NormMethod::Amemiya, residual: AMEMIYA_RTOL })
}

/// `(tau |A|^p)^{1/p}` for `p >= 1`.
pub fn lp_norm(a: &Operator, p: f64) -> Result<NormResult> {
    lp_from_spectrum(&a.singular_spectrum()?, p)
}

pub fn lp_from_spectrum(spec: &Spectrum, p: f64) -> Result<NormResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::input(format!("L^p norm needs 1 <= p < inf, got {p}")));
    }
    Ok(NormResult { value: spec.power_sum(p).powf(1.0 / p), method: NormMethod::ClosedForm, residual: 0.0 })
}

/// Norm of `a` in the given gauge.
pub fn gauge_norm(a: &Operator, phi: &OrliczFunction, gauge: Gauge) -> Result<f64> {
    let spec = a.singular_spectrum()?;
    gauge_from_spectrum(&spec, phi, gauge)
}

pub fn gauge_from_spectrum(spec: &Spectrum, phi: &OrliczFunction, gauge: Gauge) -> Result<f64> {
    Ok(match gauge {
        Gauge::Luxemburg => luxemburg_from_spectrum(spec, phi)?.value,
        Gauge::Orlicz => orlicz_from_spectrum(spec, phi)?.value,
    })
}

/// Outcome of [`orlicz_dual_search`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualSearch {
    /// Best `|tau(A B)|` over the feasible set `tau(psi(|B|)) <= 1`.
    pub pairing: f64,
    /// `tau(|A B|)` at the same witness.
    pub abs_pairing: f64,
    /// Constraint value `tau(psi(|B|))` at the witness.
    pub constraint: f64,
    pub restarts: usize,
}

impl DualSearch {
    pub fn result(&self) -> NormResult {
        NormResult { value: self.pairing, method: NormMethod::DualSearch, residual: (self.constraint - 1.0).abs() }
    }
}

/// Lower bound on the Orlicz norm by direct search over the dual ball
/// `{ B : tau(psi(|B|)) <= 1 }`, `psi` the complementary function.
///
/// Candidates are `B = V diag(d) W^*` built from the singular vectors of `A`
/// (`A = W S V^*` per block), with `d >= 0` improved by projected gradient
/// ascent along the constraint surface. Every reported value is the pairing
/// of `A` with an explicitly assembled feasible `B`, so it never exceeds the
/// true supremum.
pub fn orlicz_dual_search(a: &Operator, phi: &OrliczFunction, restarts: usize, seed: u64) -> Result<DualSearch> {
    let psi = phi.complementary();
    let mut sigma = Vec::new();
    let mut weights = Vec::new();
    let mut frames = Vec::new();
    for (m, b) in a.blocks().iter().zip(a.algebra().blocks()) {
        let svd = nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::numeric("SVD did not converge in dual search"))?;
        for s in svd.singular_values.iter() {
            sigma.push(*s);
            weights.push(b.trace_scale);
        }
        frames.push((svd.u.unwrap(), svd.v_t.unwrap()));
    }
    if sigma.iter().all(|&s| s == 0.0) {
        return Ok(DualSearch { pairing: 0.0, abs_pairing: 0.0, constraint: 0.0, restarts });
    }
    let objective = |d: &[f64]| -> f64 { d.iter().zip(&sigma).zip(&weights).map(|((d, s), w)| w * s * d).sum() };
    let constraint = |d: &[f64]| -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in d.iter().zip(&weights) {
            acc += w * psi.eval(*x)?;
        }
        Ok(acc)
    };
    let retract = |d: &[f64]| -> Result<Vec<f64>> {
        let c = constraint(d)?;
        if c == 0.0 {
            return Err(Error::numeric("dual search direction collapsed to zero"));
        }
        let top = d.iter().copied().fold(0.0, f64::max);
        let t_cap = psi.domain_cap() / top;
        let f = |t: f64| constraint(&d.iter().map(|x| t * x).collect::<Vec<_>>());
        let mut hi = 1.0f64.min(t_cap);
        while f(hi)? < 1.0 {
            if hi >= t_cap {
                return Err(Error::numeric("dual search cannot reach the constraint surface"));
            }
            hi = (2.0 * hi).min(t_cap);
        }
        let mut lo = hi;
        while f(lo)? >= 1.0 {
            lo *= 0.5;
        }
        let t = bisect_increasing(f, 1.0, lo, hi, 1e-13)?;
        Ok(d.iter().map(|x| t * x).collect())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sigma.len();
    let mut best_d: Option<(f64, Vec<f64>)> = None;
    for _ in 0..restarts.max(1) {
        let start: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let mut d = retract(&start)?;
        let mut val = objective(&d);
        let mut step = 0.1;
        for _ in 0..400 {
            let g: Vec<f64> = sigma.iter().zip(&weights).map(|(s, w)| s * w).collect();
            let normal = d
                .iter()
                .zip(&weights)
                .map(|(x, w)| psi.right_derivative(*x).map(|p| p * w))
                .collect::<Result<Vec<_>>>()?;
            let nn: f64 = normal.iter().map(|x| x * x).sum();
            let gn: f64 = g.iter().zip(&normal).map(|(a, b)| a * b).sum();
            let tangent: Vec<f64> = g.iter().zip(&normal).map(|(gi, ni)| gi - gn / nn.max(1e-300) * ni).collect();
            let tnorm = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
            if tnorm == 0.0 {
                break;
            }
            let dnorm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            let trial: Vec<f64> = d
                .iter()
                .zip(&tangent)
                .map(|(x, t)| (x + step * dnorm / tnorm * t).max(0.0))
                .collect();
            if trial.iter().all(|&x| x == 0.0) {
                step *= 0.5;
                continue;
            }
            let trial = retract(&trial)?;
            let tv = objective(&trial);
            if tv > val {
                d = trial;
                val = tv;
                step = (step * 1.5).min(1.0);
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        if best_d.as_ref().is_none_or(|(v, _)| val > *v) {
            best_d = Some((val, d));
        }
    }
    let (_, d) = best_d.expect("at least one restart");

    // assemble B explicitly and evaluate the pairings on matrices
    let mut offset = 0;
    let mut b_blocks = Vec::with_capacity(frames.len());
    for (w, vt) in &frames {
        let k = w.ncols();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            d[offset..offset + k].iter().map(|&x| C64::new(x, 0.0)),
        ));
        b_blocks.push(vt.adjoint() * diag * w.adjoint());
        offset += k;
    }
    let b = Operator::new(a.algebra().clone(), b_blocks)?;
    let ab = a.mul(&b)?;
    let abs_pairing: f64 = {
        let spec = ab.singular_spectrum()?;
        spec.weights().iter().zip(spec.values()).map(|(w, v)| w * v).sum()
    };
    let b_spec = b.singular_spectrum()?;
    Ok(DualSearch {
        pairing: ab.trace().norm(),
        abs_pairing,
        constraint: b_spec.modular(&psi, 1.0)?,
        restarts,
    })
}
