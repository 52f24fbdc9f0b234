//! Weighted n-tuple Orlicz spaces over a direct sum of tracial algebras.
//!
//! A [`TupleSpace`] pairs each component algebra with an N-function, carries
//! positive weights `lambda_j` and an outer exponent `p`, and measures a
//! [`TupleOperator`] by the weighted `p`-mean of its component norms. The trace
//! on the direct sum is `nu(A) = sum_j lambda_j tau_j(A_j)`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{functional_calculus, random_operator_with, Block, Operator, OperatorKind, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::norms::{gauge_norm, luxemburg_norm, orlicz_norm, Gauge};
use crate::orlicz::OrliczFunction;

/// An exponent in `[1, inf]`. Serialized as a number, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub struct Exponent(f64);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = Error;
    fn try_from(r: ExponentRepr) -> Result<Self> {
        match r {
            ExponentRepr::Number(x) => Exponent::new(x),
            ExponentRepr::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::INFINITY),
            ExponentRepr::Text(s) => Err(Error::input(format!("unrecognized exponent {s:?}"))),
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        if e.is_infinite() {
            ExponentRepr::Text("inf".into())
        } else {
            ExponentRepr::Number(e.0)
        }
    }
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::input(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Hoelder conjugate `p / (p - 1)`, with `1 <-> inf`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent(1.0)
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `1 / p` with `1 / inf = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// Weighted mean `(sum_j w_j x_j^p)^{1/p}`; `max_j x_j` (unweighted) for `p = inf`.
    pub fn weighted_mean(self, weights: &[f64], xs: &[f64]) -> f64 {
        if self.is_infinite() {
            xs.iter().copied().fold(0.0, f64::max)
        } else {
            let s: f64 = weights.iter().zip(xs).map(|(w, x)| w * x.powf(self.0)).sum();
            s.powf(1.0 / self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" => Ok(Self::INFINITY),
            t => Self::new(t.parse().map_err(|_| Error::input(format!("bad exponent {t:?}")))?),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub phi: OrliczFunction,
    pub algebra: TracialAlgebra,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct TupleSpace {
    components: Vec<Component>,
    weights: Vec<f64>,
    p: Exponent,
    gauge: Gauge,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceRepr {
    components: Vec<Component>,
    weights: Vec<f64>,
    p: Exponent,
    gauge: Gauge,
}

impl TryFrom<SpaceRepr> for TupleSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        TupleSpace::new(r.components, r.weights, r.p, r.gauge)
    }
}

impl From<TupleSpace> for SpaceRepr {
    fn from(s: TupleSpace) -> Self {
        SpaceRepr { components: s.components, weights: s.weights, p: s.p, gauge: s.gauge }
    }
}

/// `A = (A_1, ..., A_n)`, part `j` living in component algebra `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleOperator {
    pub parts: Vec<Operator>,
}

impl TupleOperator {
    pub fn new(parts: Vec<Operator>) -> Self {
        Self { parts }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn scale_real(&self, c: f64) -> TupleOperator {
        TupleOperator { parts: self.parts.iter().map(|a| a.scale_real(c)).collect() }
    }

    /// `a * self + b * other`, partwise.
    pub fn combine(&self, a: C64, other: &TupleOperator, b: C64) -> Result<TupleOperator> {
        if self.len() != other.len() {
            return Err(Error::shape("tuples of different length"));
        }
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(x, y)| x.combine(a, y, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(TupleOperator { parts })
    }

    pub fn add(&self, other: &TupleOperator) -> Result<TupleOperator> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }
}

impl TupleSpace {
    pub fn new(components: Vec<Component>, weights: Vec<f64>, p: Exponent, gauge: Gauge) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("a tuple space needs at least one component"));
        }
        if components.len() != weights.len() {
            return Err(Error::shape(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::input("weights must be positive and finite"));
        }
        Ok(Self { components, weights, p, gauge })
    }

    /// Every component uses the same function and algebra.
    pub fn uniform(phi: &OrliczFunction, algebra: &TracialAlgebra, weights: Vec<f64>, p: Exponent, gauge: Gauge) -> Result<Self> {
        let components = weights
            .iter()
            .map(|_| Component { phi: phi.clone(), algebra: algebra.clone() })
            .collect();
        Self::new(components, weights, p, gauge)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn with_gauge(&self, gauge: Gauge) -> Self {
        Self { gauge, ..self.clone() }
    }

    pub fn with_exponent(&self, p: Exponent) -> Self {
        Self { p, ..self.clone() }
    }

    /// Conjugate space: complementary functions, exponent `q = p/(p-1)`, Orlicz gauge.
    pub fn conjugate_space(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Component { phi: c.phi.complementary(), algebra: c.algebra.clone() })
            .collect();
        Self { components, weights: self.weights.clone(), p: self.p.conjugate(), gauge: Gauge::Orlicz }
    }

    pub fn check_shape(&self, a: &TupleOperator) -> Result<()> {
        if a.len() != self.len() {
            return Err(Error::shape(format!("tuple has {} parts, space has {}", a.len(), self.len())));
        }
        for (part, c) in a.parts.iter().zip(&self.components) {
            let dims = |alg: &TracialAlgebra| alg.blocks().iter().map(|b| b.dim).collect::<Vec<_>>();
            if dims(part.algebra()) != dims(&c.algebra) {
                return Err(Error::shape("tuple part does not live in its component algebra"));
            }
        }
        Ok(())
    }

    pub fn zero(&self) -> TupleOperator {
        TupleOperator { parts: self.components.iter().map(|c| c.algebra.zero()).collect() }
    }

    /// Component norms `||A_j||` in this space's gauge.
    pub fn component_norms(&self, a: &TupleOperator) -> Result<Vec<f64>> {
        self.check_shape(a)?;
        a.parts
            .iter()
            .zip(&self.components)
            .map(|(x, c)| gauge_norm(x, &c.phi, self.gauge))
            .collect()
    }

    pub fn random_tuple<R: Rng + ?Sized>(&self, rng: &mut R, kind: OperatorKind, scale: f64) -> Result<TupleOperator> {
        let parts = self
            .components
            .iter()
            .map(|c| random_operator_with(rng, &c.algebra, kind, scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(TupleOperator { parts })
    }
}

/// `nu(A) = sum_j lambda_j tau_j(A_j)`.
pub fn nu_trace(space: &TupleSpace, a: &TupleOperator) -> Result<C64> {
    space.check_shape(a)?;
    Ok(a.parts.iter().zip(&space.weights).map(|(x, w)| x.trace() * *w).sum())
}

/// `[sum_j lambda_j ||A_j||^p]^{1/p}`, or `max_j ||A_j||` when `p = inf`.
pub fn tuple_norm(space: &TupleSpace, a: &TupleOperator) -> Result<f64> {
    let norms = space.component_norms(a)?;
    Ok(space.p.weighted_mean(&space.weights, &norms))
}

/// `nu(A B)` with the complex trace of each product.
pub fn nu_pairing(space: &TupleSpace, a: &TupleOperator, b: &TupleOperator) -> Result<C64> {
    space.check_shape(a)?;
    space.check_shape(b)?;
    let mut acc = C64::new(0.0, 0.0);
    for ((x, y), w) in a.parts.iter().zip(&b.parts).zip(&space.weights) {
        acc += x.mul(y)?.trace() * *w;
    }
    Ok(acc)
}

/// `sum_j lambda_j |tau(A_j B_j)|`.
pub fn nu_abs_pairing(space: &TupleSpace, a: &TupleOperator, b: &TupleOperator) -> Result<f64> {
    space.check_shape(a)?;
    space.check_shape(b)?;
    let mut acc = 0.0;
    for ((x, y), w) in a.parts.iter().zip(&b.parts).zip(&space.weights) {
        acc += w * x.mul(y)?.trace().norm();
    }
    Ok(acc)
}

/// Block-diagonal embedding into one algebra whose trace scales absorb the weights,
/// so that `tau(embed(A)) = nu(A)`.
pub fn embed(space: &TupleSpace, a: &TupleOperator) -> Result<Operator> {
    space.check_shape(a)?;
    let mut blocks = Vec::new();
    let mut mats = Vec::new();
    for ((part, comp), w) in a.parts.iter().zip(&space.components).zip(&space.weights) {
        for (m, b) in part.blocks().iter().zip(comp.algebra.blocks()) {
            blocks.push(Block { dim: b.dim, trace_scale: b.trace_scale * w });
            mats.push(m.clone());
        }
    }
    Operator::new(TracialAlgebra::new(blocks)?, mats)
}

/// Slacks of the three inequalities of the weighted Hoelder lemma.
///
/// Positive slack means the inequality holds with that margin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma21Outcome {
    pub norm_a: f64,
    pub norm_b: f64,
    /// `nu(Phi(A)) = sum_j lambda_j tau(Phi_j(|A_j|))`.
    pub modular_sum: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// `||A|| delta1 - nu(Phi(A))`, present when `||A|| <= 1`.
    pub part1_slack: Option<f64>,
    /// `nu(Phi(A)) - delta2`, present when `||A|| > 1`.
    pub part2_slack: Option<f64>,
    /// `||A|| ||B|| - sum_j lambda_j |tau(A_j B_j)|`.
    pub part3_slack: f64,
    /// Some component has `tau(Phi_j(|A_j|)) > ||A_j||`, which the
    /// intermediate step of part (1) takes for granted.
    pub intermediate_step_flag: bool,
}

/// Evaluates the three parts of the lemma for `A` in `space` (Luxemburg gauge)
/// and `B` in its conjugate space (Orlicz gauge).
pub fn lemma21_check(space: &TupleSpace, a: &TupleOperator, b: &TupleOperator) -> Result<Lemma21Outcome> {
    if space.p.is_infinite() {
        return Err(Error::input("the weighted Hoelder lemma is stated for 1 <= p < inf"));
    }
    let space = space.with_gauge(Gauge::Luxemburg);
    let conj = space.conjugate_space();
    let norms_a = space.component_norms(a)?;
    let norm_a = space.p.weighted_mean(&space.weights, &norms_a);
    let norm_b = tuple_norm(&conj, b)?;
    let p = space.p.value();
    let q = space.p.conjugate();

    let mut modular_sum = 0.0;
    let mut flag = false;
    for ((part, comp), (w, n)) in a.parts.iter().zip(&space.components).zip(space.weights.iter().zip(&norms_a)) {
        let m = crate::algebra::modular(&comp.phi, part)?;
        modular_sum += w * m;
        if m > n * (1.0 + 1e-12) + 1e-15 {
            flag = true;
        }
    }
    let weight_sum: f64 = space.weights.iter().sum();
    let delta1 = weight_sum.powf(q.reciprocal());
    let delta2 = space
        .weights
        .iter()
        .zip(&norms_a)
        .map(|(w, n)| w.powf(p) * n.powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    let (part1_slack, part2_slack) = if norm_a <= 1.0 {
        (Some(norm_a * delta1 - modular_sum), None)
    } else {
        (None, Some(modular_sum - delta2))
    };
    let part3_slack = norm_a * norm_b - nu_abs_pairing(&space, a, b)?;
    Ok(Lemma21Outcome {
        norm_a,
        norm_b,
        modular_sum,
        delta1,
        delta2,
        part1_slack,
        part2_slack,
        part3_slack,
        intermediate_step_flag: flag,
    })
}

/// Outcome of [`dual_norm_estimate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualEstimate {
    /// Best `|nu(A B)|` found over the conjugate unit ball.
    pub lower: f64,
    pub norm: f64,
    /// Best value among the random samples alone (before warm starts and ascent).
    pub best_random: f64,
    /// Largest `|nu(A B)| - norm` over every evaluated feasible `B`.
    pub max_excess: f64,
    pub samples: usize,
}

impl DualEstimate {
    pub fn ratio(&self) -> f64 {
        if self.norm == 0.0 {
            1.0
        } else {
            self.lower / self.norm
        }
    }
}

/// Searches `sup { |nu(A B)| : ||B||_{Psi,q,lambda} <= 1 }` from below.
///
/// Combines `budget` random directions normalized onto the conjugate unit
/// sphere, two constructive warm starts built from the right derivatives
/// `p_j` of the component functions, and a coordinate perturbation ascent.
pub fn dual_norm_estimate(space: &TupleSpace, a: &TupleOperator, budget: usize, seed: u64) -> Result<DualEstimate> {
    if space.p.is_infinite() {
        return Err(Error::input("dual representation is stated for 1 <= p < inf"));
    }
    let space = space.with_gauge(Gauge::Luxemburg);
    let conj = space.conjugate_space();
    let norms_a = space.component_norms(a)?;
    let norm = space.p.weighted_mean(&space.weights, &norms_a);
    if norm == 0.0 {
        return Ok(DualEstimate { lower: 0.0, norm: 0.0, best_random: 0.0, max_excess: 0.0, samples: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut best_b: Option<TupleOperator> = None;
    let mut max_excess = f64::NEG_INFINITY;
    let mut evaluate = |b: &TupleOperator, best: &mut f64, best_b: &mut Option<TupleOperator>| -> Result<f64> {
        let v = nu_pairing(&space, a, b)?.norm();
        max_excess = max_excess.max(v - norm);
        if v > *best {
            *best = v;
            *best_b = Some(b.clone());
        }
        Ok(v)
    };

    for _ in 0..budget {
        let raw = conj.random_tuple(&mut rng, OperatorKind::General, 1.0)?;
        if let Some(b) = normalize(&conj, &raw)? {
            evaluate(&b, &mut best, &mut best_b)?;
        }
    }
    let best_random = best;

    for candidate in [aligned_warm_start(&space, &conj, a, &norms_a)?, literal_warm_start(&space, &conj, a, norm)?]
        .into_iter()
        .flatten()
    {
        evaluate(&candidate, &mut best, &mut best_b)?;
    }

    // coordinate perturbation ascent around the incumbent
    if let Some(mut current) = best_b.clone() {
        let mut value = best;
        let mut step = 0.05;
        for _ in 0..(budget / 10).max(50) {
            let j = rng.random_range(0..space.len());
            let noise = random_operator_with(&mut rng, &conj.components[j].algebra, OperatorKind::General, 1.0)?;
            let mut trial = current.clone();
            let part_scale = trial.parts[j].frobenius().max(1e-12);
            trial.parts[j] = trial.parts[j].combine(C64::new(1.0, 0.0), &noise, C64::new(step * part_scale, 0.0))?;
            if rng.random_bool(0.3) {
                let f = 1.0 + step * rng.random_range(-1.0..1.0);
                trial.parts[j] = trial.parts[j].scale_real(f);
            }
            let Some(trial) = normalize(&conj, &trial)? else { continue };
            let v = evaluate(&trial, &mut best, &mut best_b)?;
            if v > value {
                value = v;
                current = trial;
                step = (step * 1.3).min(0.5);
            } else {
                step = (step * 0.8).max(1e-6);
            }
        }
    }
    Ok(DualEstimate { lower: best, norm, best_random, max_excess, samples: budget })
}

fn normalize(space: &TupleSpace, b: &TupleOperator) -> Result<Option<TupleOperator>> {
    let n = tuple_norm(space, b)?;
    Ok(if n > 0.0 { Some(b.scale_real(1.0 / n)) } else { None })
}

/// `B_j = c_j p_j(|A_j| / ||A_j||) U_j^*`, each part scaled to unit Orlicz
/// norm and the outer weights `c_j` chosen to saturate the weighted Hoelder step.
fn aligned_warm_start(space: &TupleSpace, conj: &TupleSpace, a: &TupleOperator, norms_a: &[f64]) -> Result<Option<TupleOperator>> {
    let p = space.p.value();
    let outer = space.p.weighted_mean(&space.weights, norms_a);
    let mut parts = Vec::with_capacity(space.len());
    for ((part, comp), (n, cc)) in a.parts.iter().zip(&space.components).zip(norms_a.iter().zip(&conj.components)) {
        if *n == 0.0 {
            parts.push(comp.algebra.zero());
            continue;
        }
        let (u, abs) = part.polar()?;
        let dir = functional_calculus(|x| comp.phi.right_derivative(x / n), &abs)?.mul(&u.adjoint())?;
        let dn = orlicz_norm(&dir, &cc.phi)?.value;
        if dn == 0.0 {
            return Ok(None);
        }
        let c = if p == 1.0 { 1.0 } else { (n / outer).powf(p - 1.0) };
        parts.push(dir.scale_real(c / dn));
    }
    let b = TupleOperator::new(parts);
    normalize(conj, &b)
}

/// The witness built in the proof of the dual representation, taken literally
/// with `A_jm = A_j` and `epsilon = 0.01`, then renormalized onto the unit sphere.
fn literal_warm_start(space: &TupleSpace, conj: &TupleSpace, a: &TupleOperator, norm: f64) -> Result<Option<TupleOperator>> {
    const EPS: f64 = 0.01;
    let a = a.scale_real(1.0 / norm);
    let p = space.p.value();
    let q = space.p.conjugate();
    let norms = space.component_norms(&a)?;
    let delta1 = space.weights.iter().sum::<f64>().powf(q.reciprocal());
    let delta2 = space
        .weights
        .iter()
        .zip(&norms)
        .map(|(w, n)| w.powf(p) * n.powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    if delta2 == 0.0 {
        return Ok(None);
    }
    let mut parts = Vec::with_capacity(space.len());
    for ((part, comp), (w, cc)) in a.parts.iter().zip(&space.components).zip(space.weights.iter().zip(&conj.components)) {
        let (u, abs) = part.polar()?;
        let scaled = |x: f64| comp.phi.right_derivative((1.0 + EPS) * w * x).map(|v| v / delta2);
        let core = match functional_calculus(scaled, &abs) {
            Ok(c) => c,
            Err(Error::Domain { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let psi_mod = crate::algebra::modular(&cc.phi, &core)?;
        parts.push(core.mul(&u.adjoint())?.scale_real(1.0 / (delta1 * (1.0 + psi_mod))));
    }
    normalize(conj, &TupleOperator::new(parts))
}

/// Luxemburg norm of each part, useful for reports.
pub fn luxemburg_parts(space: &TupleSpace, a: &TupleOperator) -> Result<Vec<f64>> {
    space.check_shape(a)?;
    a.parts
        .iter()
        .zip(&space.components)
        .map(|(x, c)| luxemburg_norm(x, &c.phi).map(|r| r.value))
        .collect()
}
