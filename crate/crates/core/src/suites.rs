//! Named verification suites. Each suite samples seeded random instances,
//! evaluates a check per trial and condenses the slacks into reports.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{random_operator_with, OperatorKind, TracialAlgebra};
use crate::direct_sum::{dual_norm_estimate, lemma21_check, Exponent, TupleSpace};
use crate::error::{Error, Result};
use crate::geometry::{
    clarkson_slack, convexity_bound, convexity_modulus_estimate, lp_clarkson_check, lp_convexity_estimate,
    lp_smoothness_estimate, smoothness_bound, smoothness_modulus_estimate, ModulusEstimate,
};
use crate::interpolation::{endpoint_constant_estimate, riesz_thorin_check, RieszThorinSetup, DEFAULT_S_GRID};
use crate::norms::{luxemburg_norm, orlicz_norm, Gauge};
use crate::orlicz::OrliczFunction;
use crate::report::{run_trials, ReportBuilder, TrialOutcome, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Holder,
    Lemma21,
    Duality,
    Clarkson,
    LpClarkson,
    Interpolation,
    Moduli,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 7] = [
        Suite::Holder,
        Suite::Lemma21,
        Suite::Duality,
        Suite::Clarkson,
        Suite::LpClarkson,
        Suite::Interpolation,
        Suite::Moduli,
    ];
}

fn power(p: f64) -> OrliczFunction {
    OrliczFunction::power(p).expect("catalog exponent")
}

/// Suite parameters; every field has a default, and unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub dim: usize,
    /// Overrides every suite's own tolerance.
    pub tol: Option<f64>,
    pub holder: HolderConfig,
    pub lemma21: Lemma21Config,
    pub duality: DualityConfig,
    pub clarkson: ClarksonConfig,
    pub lp_clarkson: LpClarksonConfig,
    pub interpolation: InterpolationConfig,
    pub moduli: ModuliConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            dim: 3,
            tol: None,
            holder: HolderConfig::default(),
            lemma21: Lemma21Config::default(),
            duality: DualityConfig::default(),
            clarkson: ClarksonConfig::default(),
            lp_clarkson: LpClarksonConfig::default(),
            interpolation: InterpolationConfig::default(),
            moduli: ModuliConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    pub phis: Vec<OrliczFunction>,
    pub tol: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self { phis: vec![power(1.5), power(3.0), OrliczFunction::expm(), OrliczFunction::linlog()], tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma21Config {
    pub phis: Vec<OrliczFunction>,
    pub weights: Vec<f64>,
    pub p: f64,
    /// Log-uniform range for the overall scale of `A`, so both `||A|| <= 1` and `> 1` occur.
    pub scale_range: (f64, f64),
    pub tol: f64,
}

impl Default for Lemma21Config {
    fn default() -> Self {
        Self {
            phis: vec![power(2.0), OrliczFunction::expm()],
            weights: vec![0.5, 2.0],
            p: 2.0,
            scale_range: (0.2, 5.0),
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualityConfig {
    /// Number of tuples `A`; the trial budget is split evenly across them.
    pub cases: usize,
    pub attainment: f64,
    pub tol: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self { cases: 50, attainment: 0.95, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClarksonConfig {
    pub phi: OrliczFunction,
    pub s_values: Vec<f64>,
    pub tol: f64,
}

impl Default for ClarksonConfig {
    fn default() -> Self {
        Self { phi: power(1.5), s_values: vec![0.25, 0.5, 1.0], tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpClarksonConfig {
    pub p_values: Vec<f64>,
    pub tol: f64,
}

impl Default for LpClarksonConfig {
    fn default() -> Self {
        Self { p_values: vec![1.5, 2.0, 3.0], tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpolationConfig {
    /// First-endpoint function; the second endpoint is `u^2`.
    pub phi: OrliczFunction,
    pub s_values: Vec<f64>,
    pub endpoint_trials: usize,
    pub tol: f64,
}

impl Default for InterpolationConfig {
    fn default() -> Self {
        Self { phi: power(2.0), s_values: DEFAULT_S_GRID.to_vec(), endpoint_trials: 200, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModuliConfig {
    pub phi: OrliczFunction,
    pub s_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub t_values: Vec<f64>,
    /// `L^p` exponents checked against the closed-form `L^p` bounds.
    pub p_values: Vec<f64>,
    /// Block size of the sampled algebra (the moduli are sampled in `M_dim`).
    pub dim: usize,
    pub tol: f64,
}

impl Default for ModuliConfig {
    fn default() -> Self {
        Self {
            phi: power(1.5),
            s_values: vec![0.5, 1.0],
            eps_values: vec![0.5, 1.0, SQRT_2],
            t_values: vec![0.1, 0.5, 1.0],
            p_values: vec![1.5, 3.0],
            dim: 2,
            tol: 1e-7,
        }
    }
}

impl SuiteConfig {
    fn tol(&self, own: f64) -> f64 {
        self.tol.unwrap_or(own)
    }

    fn algebra(&self) -> Result<TracialAlgebra> {
        if self.dim == 0 {
            return Err(Error::input("dim must be positive"));
        }
        Ok(TracialAlgebra::matrix(self.dim))
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    match suite {
        Suite::Holder => holder(cfg),
        Suite::Lemma21 => lemma21(cfg).map(|r| vec![r]),
        Suite::Duality => duality(cfg).map(|r| vec![r]),
        Suite::Clarkson => clarkson(cfg),
        Suite::LpClarkson => lp_clarkson(cfg),
        Suite::Interpolation => interpolation(cfg),
        Suite::Moduli => moduli(cfg),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::INDIVIDUAL {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
    }
}

fn general<R: Rng + ?Sized>(rng: &mut R, alg: &TracialAlgebra) -> Result<crate::algebra::Operator> {
    random_operator_with(rng, alg, OperatorKind::General, 1.0)
}

/// `|tau(AB)| <= ||A||_(Phi) ||B||_Psi` (Luxemburg against Orlicz).
pub fn holder(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let alg = cfg.algebra()?;
    let tol = cfg.tol(cfg.holder.tol);
    cfg.holder
        .phis
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            let psi = phi.complementary();
            let seed = cfg.seed.wrapping_add(k as u64);
            let outcomes = run_trials(cfg.trials, seed, |_, s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let (a, b) = (general(&mut rng, &alg)?, general(&mut rng, &alg)?);
                let rhs = luxemburg_norm(&a, phi)?.value * orlicz_norm(&b, &psi)?.value;
                let lhs = a.mul(&b)?.trace().norm();
                Ok(TrialOutcome::new((rhs - lhs) / rhs, tol, || json!({ "a": a, "b": b, "lhs": lhs, "rhs": rhs })))
            })?;
            Ok(ReportBuilder::new("holder", seed, tol).param("phi", phi).param("dim", cfg.dim).finish(&outcomes))
        })
        .collect()
}

fn lemma_space(cfg: &SuiteConfig) -> Result<TupleSpace> {
    let l = &cfg.lemma21;
    let alg = cfg.algebra()?;
    if l.phis.len() != l.weights.len() {
        return Err(Error::input("lemma21: phis and weights must have equal length"));
    }
    let components = l
        .phis
        .iter()
        .map(|phi| crate::direct_sum::Component { phi: phi.clone(), algebra: alg.clone() })
        .collect();
    TupleSpace::new(components, l.weights.clone(), Exponent::new(l.p)?, Gauge::Luxemburg)
}

/// All three parts of the weighted Hoelder lemma. Each trial's slack is the
/// smallest relative slack among the parts that apply to it.
pub fn lemma21(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let space = lemma_space(cfg)?;
    let conj = space.conjugate_space();
    let tol = cfg.tol(cfg.lemma21.tol);
    let (lo, hi) = cfg.lemma21.scale_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::input("lemma21: scale_range must satisfy 0 < lo <= hi"));
    }
    let rows = run_trials(cfg.trials, cfg.seed, |_, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let scale = (lo.ln() + (hi / lo).ln() * rng.random::<f64>()).exp();
        let a = space.random_tuple(&mut rng, OperatorKind::General, 1.0)?.scale_real(scale);
        let b = conj.random_tuple(&mut rng, OperatorKind::General, 1.0)?;
        let out = lemma21_check(&space, &a, &b)?;
        Ok((a, b, out))
    })?;
    let mut part_min = [f64::INFINITY; 3];
    let mut part_count = [0usize; 3];
    let mut part_viol = [0usize; 3];
    let mut flagged = 0usize;
    let outcomes: Vec<_> = rows
        .iter()
        .map(|(a, b, o)| {
            let rel = [
                o.part1_slack.map(|x| x / (o.norm_a * o.delta1).max(f64::MIN_POSITIVE)),
                o.part2_slack.map(|x| x / o.delta2.max(f64::MIN_POSITIVE)),
                Some(if o.norm_a * o.norm_b > 0.0 { o.part3_slack / (o.norm_a * o.norm_b) } else { o.part3_slack }),
            ];
            let mut slack = f64::INFINITY;
            for (k, r) in rel.iter().enumerate() {
                if let Some(r) = r {
                    part_count[k] += 1;
                    part_min[k] = part_min[k].min(*r);
                    part_viol[k] += usize::from(*r < -tol);
                    slack = slack.min(*r);
                }
            }
            flagged += usize::from(o.intermediate_step_flag);
            TrialOutcome::new(slack, tol, || json!({ "a": a, "b": b, "outcome": o }))
        })
        .collect();
    let mut builder = ReportBuilder::new("lemma21", cfg.seed, tol)
        .param("phis", &cfg.lemma21.phis)
        .param("weights", &cfg.lemma21.weights)
        .param("p", cfg.lemma21.p)
        .param("scale_range", cfg.lemma21.scale_range)
        .param("dim", cfg.dim);
    for k in 0..3 {
        let name = format!("part{}", k + 1);
        builder.metric(&format!("{name}_trials"), part_count[k]);
        builder.metric(&format!("{name}_violations"), part_viol[k]);
        builder.metric(&format!("{name}_min_slack"), if part_count[k] > 0 { Some(part_min[k]) } else { None });
    }
    builder.metric("intermediate_step_flags", flagged);
    Ok(builder.finish(&outcomes))
}

/// Catalog tuple spaces for the dual representation.
pub fn duality_catalog(alg: &TracialAlgebra) -> Result<Vec<TupleSpace>> {
    let comp = |phi: OrliczFunction| crate::direct_sum::Component { phi, algebra: alg.clone() };
    Ok(vec![
        TupleSpace::new(vec![comp(power(2.0)), comp(OrliczFunction::expm())], vec![0.5, 2.0], Exponent::new(2.0)?, Gauge::Luxemburg)?,
        TupleSpace::new(vec![comp(power(1.5)), comp(power(3.0))], vec![1.0, 1.0], Exponent::new(3.0)?, Gauge::Luxemburg)?,
        TupleSpace::new(vec![comp(OrliczFunction::linlog()), comp(power(2.0))], vec![2.0, 0.3], Exponent::new(1.5)?, Gauge::Luxemburg)?,
        TupleSpace::new(vec![comp(OrliczFunction::expm())], vec![1.0], Exponent::new(1.0)?, Gauge::Luxemburg)?,
    ])
}

/// One-sided validity of the dual representation (every sampled pairing stays
/// below the norm) plus attainment by search.
pub fn duality(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let alg = cfg.algebra()?;
    let catalog = duality_catalog(&alg)?;
    let d = &cfg.duality;
    let tol = cfg.tol(d.tol);
    if d.cases == 0 {
        return Err(Error::input("duality: cases must be positive"));
    }
    let budget = (cfg.trials / d.cases).max(1);
    let rows = run_trials(d.cases, cfg.seed, |i, s| {
        let space = &catalog[i % catalog.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let a = space.random_tuple(&mut rng, OperatorKind::General, 1.0)?;
        Ok((a.clone(), dual_norm_estimate(space, &a, budget, s)?))
    })?;
    let min_ratio = rows.iter().map(|(_, e)| e.ratio()).fold(f64::INFINITY, f64::min);
    let below = rows.iter().filter(|(_, e)| e.ratio() < d.attainment).count();
    let outcomes: Vec<_> = rows
        .iter()
        .map(|(a, e)| TrialOutcome::new(-e.max_excess / e.norm.max(1.0), tol, || json!({ "a": a, "estimate": e })))
        .collect();
    let mut builder = ReportBuilder::new("duality", cfg.seed, tol)
        .param("cases", d.cases)
        .param("samples_per_case", budget)
        .param("attainment", d.attainment)
        .param("dim", cfg.dim);
    builder.metric("samples", budget * d.cases);
    builder.metric("min_ratio", min_ratio);
    builder.metric("attainment_failures", below);
    Ok(builder.finish(&outcomes))
}

/// Clarkson inequality in `L^{(Phi_s)}`, one report per `s`.
pub fn clarkson(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let alg = cfg.algebra()?;
    let tol = cfg.tol(cfg.clarkson.tol);
    let phi = &cfg.clarkson.phi;
    cfg.clarkson
        .s_values
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::input(format!("clarkson: s must lie in (0, 1], got {s}")));
            }
            let phi_s = OrliczFunction::intermediate(phi, &power(2.0), s)?;
            let outcomes = run_trials(cfg.trials, cfg.seed, |_, seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (a, b) = (general(&mut rng, &alg)?, general(&mut rng, &alg)?);
                let slack = clarkson_slack(&a, &b, &phi_s, s)?;
                Ok(TrialOutcome::new(slack, tol, || json!({ "a": a, "b": b, "slack": slack })))
            })?;
            Ok(ReportBuilder::new("clarkson", cfg.seed, tol)
                .param("phi", phi)
                .param("s", s)
                .param("dim", cfg.dim)
                .finish(&outcomes))
        })
        .collect()
}

/// Clarkson inequalities in `L^p`, one report per `p`.
pub fn lp_clarkson(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let alg = cfg.algebra()?;
    let tol = cfg.tol(cfg.lp_clarkson.tol);
    cfg.lp_clarkson
        .p_values
        .iter()
        .map(|&p| {
            let outcomes = run_trials(cfg.trials, cfg.seed, |_, seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (a, b) = (general(&mut rng, &alg)?, general(&mut rng, &alg)?);
                let slack = lp_clarkson_check(&a, &b, p)?;
                Ok(TrialOutcome::new(slack, tol, || json!({ "a": a, "b": b, "slack": slack })))
            })?;
            let mut builder = ReportBuilder::new("lp-clarkson", cfg.seed, tol).param("p", p).param("dim", cfg.dim);
            let max_abs = outcomes.iter().map(|o| o.slack.abs()).fold(0.0, f64::max);
            builder.metric("max_abs_slack", max_abs);
            Ok(builder.finish(&outcomes))
        })
        .collect()
}

/// Interpolation bound for the Clarkson operator, one report per `s`, with
/// the empirical endpoint constants attached as metrics.
pub fn interpolation(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let alg = cfg.algebra()?;
    let ic = &cfg.interpolation;
    let tol = cfg.tol(ic.tol);
    let setup = RieszThorinSetup::clarkson(&ic.phi, &alg);
    let k1 = endpoint_constant_estimate(&setup.operator, &setup.domain_space(0.0)?, &setup.codomain_space(0.0)?, ic.endpoint_trials, cfg.seed)?;
    let k2 = endpoint_constant_estimate(&setup.operator, &setup.domain_space(1.0)?, &setup.codomain_space(1.0)?, ic.endpoint_trials, cfg.seed)?;
    ic.s_values
        .iter()
        .map(|&s| {
            let mut r = riesz_thorin_check(&setup, s, cfg.trials, cfg.seed, tol)?;
            r.params.insert("phi".into(), json!(ic.phi));
            r.params.insert("dim".into(), json!(cfg.dim));
            r.metrics.insert("k1_estimate".into(), json!(k1));
            r.metrics.insert("k2_estimate".into(), json!(k2));
            Ok(r)
        })
        .collect()
}

fn moduli_report(
    name: &str,
    cfg: &SuiteConfig,
    tol: f64,
    params: Vec<(&str, serde_json::Value)>,
    points: Vec<(ModulusEstimate, f64, Option<f64>)>,
) -> VerificationReport {
    let outcomes: Vec<_> = points
        .iter()
        .map(|(m, slack, _)| TrialOutcome::new(*slack, tol, || json!(m)))
        .collect();
    let mut builder = ReportBuilder::new(name, cfg.seed, tol);
    for (k, v) in params {
        builder = builder.param(k, v);
    }
    let anchor_err = points.iter().filter_map(|(m, _, exact)| exact.map(|e| (m.estimate - e).abs())).fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    if let Some(e) = anchor_err {
        builder.metric("anchor_max_error", e);
    }
    let residual = points.iter().map(|(m, _, _)| m.constraint_residual).fold(0.0, f64::max);
    builder.metric("constraint_residual", residual);
    builder.metric("estimates", points.iter().map(|(m, _, _)| m.clone()).collect::<Vec<_>>());
    let mut r = builder.finish(&outcomes);
    r.params.insert("samples_per_point".into(), json!(cfg.trials));
    r
}

/// Sampled moduli against the closed-form bounds. For `s = 1` the exact `L^2`
/// moduli are attached as anchors.
pub fn moduli(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let m = &cfg.moduli;
    let tol = cfg.tol(m.tol);
    if m.dim == 0 {
        return Err(Error::input("moduli: dim must be positive"));
    }
    let alg = TracialAlgebra::matrix(m.dim);
    let n = cfg.trials;
    let mut reports = Vec::new();
    for &s in &m.s_values {
        let l2 = s == 1.0;
        let mut conv = Vec::new();
        for &eps in &m.eps_values {
            let e = convexity_modulus_estimate(&m.phi, s, eps, &alg, n, cfg.seed)?;
            let exact = l2.then(|| 1.0 - (1.0 - eps * eps / 4.0).sqrt());
            conv.push((e.clone(), e.estimate - convexity_bound(s, eps)?, exact));
        }
        reports.push(moduli_report("moduli.convexity", cfg, tol, vec![("phi", json!(m.phi)), ("s", json!(s)), ("dim", json!(m.dim))], conv));
        let mut smooth = Vec::new();
        for &t in &m.t_values {
            let e = smoothness_modulus_estimate(&m.phi, s, t, &alg, n, cfg.seed)?;
            let exact = l2.then(|| (1.0 + t * t).sqrt() - 1.0);
            smooth.push((e.clone(), smoothness_bound(s, t)? - e.estimate, exact));
        }
        reports.push(moduli_report("moduli.smoothness", cfg, tol, vec![("phi", json!(m.phi)), ("s", json!(s)), ("dim", json!(m.dim))], smooth));
    }
    for &p in &m.p_values {
        let mut conv = Vec::new();
        for &eps in &m.eps_values {
            let e = lp_convexity_estimate(p, eps, &alg, n, cfg.seed)?;
            conv.push((e.clone(), e.estimate - e.bound, None));
        }
        reports.push(moduli_report("moduli.lp_convexity", cfg, tol, vec![("p", json!(p)), ("dim", json!(m.dim))], conv));
        let mut smooth = Vec::new();
        for &t in &m.t_values {
            let e = lp_smoothness_estimate(p, t, &alg, n, cfg.seed)?;
            smooth.push((e.clone(), e.bound - e.estimate, None));
        }
        reports.push(moduli_report("moduli.lp_smoothness", cfg, tol, vec![("p", json!(p)), ("dim", json!(m.dim))], smooth));
    }
    Ok(reports)
}
