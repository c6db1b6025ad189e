//! Search harnesses for two open variants of the phase equation
//! `{|f(x) + f(y)|, |f(x) - f(y)|} = {|x + y|, |x - y|}`: the same equation
//! under `l^p` norms on `R^d`, and its roots-of-unity generalisation on `C^d`,
//! where the distance lists `|f(x) - b f(y)|` and `|x - b y|` must agree over
//! all `n`th roots of unity `b`.
//!
//! Findings are evidence at the sampled scale, never proofs. Every report
//! carries an `evidence` label saying how much was sampled.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{eq22_pair, pair_residual_in, CheckError, ConditionId};
use crate::maps::{
    conjugation_matrix, plane_rotation, random_orthogonal, random_unitary, signed_permutation,
    MapError, MapSpec, SignRule,
};
use crate::space::{sample, Field, Norm, SamplePlan, SpaceSpec, Vector};

pub const MAX_DIM: usize = 8;
pub const DEFAULT_PAIRS: usize = 200;
/// Candidates within this multiple of `tol` are near misses.
pub const NEAR_MISS_FACTOR: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExploreError {
    #[error("invalid explore config: {0}")]
    InvalidConfig(String),
    #[error("roots of unity of order {0} need complex spaces")]
    RealFieldUnsupported(usize),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem")]
pub enum Problem {
    /// The phase equation with the `l^p` norm on `R^d`.
    P1 { p: f64 },
    /// The roots-of-unity equation of order `n` on `C^d`.
    P2 { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Constant,
    Halfspace,
    Seeded,
    /// Phases in the `n`th roots of unity of the configured problem.
    RootsOfUnity,
}

/// Structured candidate families. Each trial instantiates them with the
/// trial seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Candidate {
    /// `eps(x) Q x` with a random orthogonal `Q` on realified coordinates.
    OrthogonalPhase { rule: RuleKind },
    /// `eps(x) P x` with `P` a random signed permutation.
    SignedPermutationPhase { rule: RuleKind },
    /// Rotation by 45 degrees in the first coordinate plane.
    Rotation45,
    /// `eps(x) U x` with a random unitary `U` on `C^d`.
    UnitaryPhase { rule: RuleKind },
    /// Coordinatewise complex conjugation.
    Conjugation,
    /// Conjugation of the last coordinate only.
    PartialConjugation,
    Scaled { c: f64 },
    PerturbedLinear { eta: f64 },
}

impl Candidate {
    pub fn label(&self) -> String {
        match self {
            Candidate::OrthogonalPhase { rule } => format!("OrthogonalPhase/{rule:?}"),
            Candidate::SignedPermutationPhase { rule } => format!("SignedPermutationPhase/{rule:?}"),
            Candidate::UnitaryPhase { rule } => format!("UnitaryPhase/{rule:?}"),
            Candidate::Scaled { c } => format!("Scaled/{c}"),
            Candidate::PerturbedLinear { eta } => format!("PerturbedLinear/{eta}"),
            other => format!("{other:?}"),
        }
    }

    /// Whether the family is phase equivalent to a norm-preserving linear
    /// map of the kind the problem's sufficient condition names, so it must
    /// come out as a solution.
    pub fn is_positive_control(&self, problem: Problem) -> bool {
        match (problem, self) {
            (Problem::P1 { .. }, Candidate::SignedPermutationPhase { rule }) => {
                *rule != RuleKind::RootsOfUnity
            }
            (Problem::P1 { p }, Candidate::OrthogonalPhase { rule }) => {
                p == 2.0 && *rule != RuleKind::RootsOfUnity
            }
            (Problem::P2 { n }, Candidate::UnitaryPhase { rule }) => match rule {
                RuleKind::Constant | RuleKind::RootsOfUnity => true,
                // -1 is an nth root of unity exactly when n is even
                RuleKind::Halfspace | RuleKind::Seeded => n % 2 == 0,
            },
            _ => false,
        }
    }

    /// The default families explored for a problem.
    pub fn defaults(problem: Problem) -> Vec<Candidate> {
        use RuleKind::*;
        match problem {
            Problem::P1 { .. } => vec![
                Candidate::OrthogonalPhase { rule: Constant },
                Candidate::OrthogonalPhase { rule: Halfspace },
                Candidate::OrthogonalPhase { rule: Seeded },
                Candidate::SignedPermutationPhase { rule: Constant },
                Candidate::SignedPermutationPhase { rule: Seeded },
                Candidate::Rotation45,
                Candidate::Scaled { c: 1.1 },
                Candidate::PerturbedLinear { eta: 0.1 },
            ],
            Problem::P2 { .. } => vec![
                Candidate::UnitaryPhase { rule: Constant },
                Candidate::UnitaryPhase { rule: RootsOfUnity },
                Candidate::UnitaryPhase { rule: Seeded },
                Candidate::OrthogonalPhase { rule: Constant },
                Candidate::Conjugation,
                Candidate::PartialConjugation,
                Candidate::Scaled { c: 1.1 },
                Candidate::PerturbedLinear { eta: 0.1 },
            ],
        }
    }

    fn instantiate(&self, problem: Problem, dim: usize, seed: u64) -> Result<MapSpec, ExploreError> {
        let field = match problem {
            Problem::P1 { .. } => Field::Real,
            Problem::P2 { .. } => Field::Complex,
        };
        let space = SpaceSpec::new(field, dim, Norm::Euclidean).map_err(MapError::from)?;
        let rule = |kind: RuleKind| -> Result<SignRule, ExploreError> {
            Ok(match kind {
                RuleKind::Constant => SignRule::Constant { s: 1 },
                RuleKind::Halfspace => {
                    let v = sample(&SamplePlan::gaussian(1, seed ^ 0x5eed), &space)
                        .map_err(MapError::from)?
                        .remove(0);
                    SignRule::Halfspace { v }
                }
                RuleKind::Seeded => SignRule::Seeded { seed },
                RuleKind::RootsOfUnity => match problem {
                    Problem::P2 { n } => SignRule::RootsOfUnity { n, seed },
                    Problem::P1 { .. } => SignRule::RootsOfUnity { n: 2, seed },
                },
            })
        };
        let real_dim = space.real_dim();
        Ok(match self {
            Candidate::OrthogonalPhase { rule: k } => {
                MapSpec::phase_isometry(field, random_orthogonal(real_dim, seed), rule(*k)?)?
            }
            Candidate::SignedPermutationPhase { rule: k } => {
                MapSpec::phase_isometry(field, signed_permutation(real_dim, seed), rule(*k)?)?
            }
            Candidate::Rotation45 => {
                if real_dim < 2 {
                    return Err(ExploreError::InvalidConfig("Rotation45 needs dim >= 2".into()));
                }
                MapSpec::linear_isometry(field, plane_rotation(real_dim, FRAC_PI_4))?
            }
            Candidate::UnitaryPhase { rule: k } => {
                if field != Field::Complex {
                    return Err(ExploreError::InvalidConfig("UnitaryPhase needs P2".into()));
                }
                MapSpec::phase_isometry(field, random_unitary(dim, seed), rule(*k)?)?
            }
            Candidate::Conjugation | Candidate::PartialConjugation => {
                if field != Field::Complex {
                    return Err(ExploreError::InvalidConfig(format!("{} needs P2", self.label())));
                }
                let q = if *self == Candidate::Conjugation {
                    conjugation_matrix(dim)
                } else {
                    let mut q = DMatrix::identity(real_dim, real_dim);
                    q[(real_dim - 1, real_dim - 1)] = -1.0;
                    q
                };
                MapSpec::linear_isometry(field, q)?
            }
            Candidate::Scaled { c } => MapSpec::scaled(MapSpec::identity(&space), *c)?,
            Candidate::PerturbedLinear { eta } => {
                MapSpec::perturbed_linear(field, random_orthogonal(real_dim, seed), *eta, seed)?
            }
        })
    }
}

fn default_pairs() -> usize {
    DEFAULT_PAIRS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreConfig {
    #[serde(flatten)]
    pub problem: Problem,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Families to test; empty means [`Candidate::defaults`].
    #[serde(default)]
    pub candidates: Vec<Candidate>,
    pub tol: f64,
    /// Random pairs per trial, on top of the forced basis pairs.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
}

impl ExploreConfig {
    pub fn new(problem: Problem, dim: usize, trials: usize, seed: u64, tol: f64) -> Self {
        ExploreConfig { problem, dim, trials, seed, candidates: Vec::new(), tol, pairs: DEFAULT_PAIRS }
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        let bad = |m: String| Err(ExploreError::InvalidConfig(m));
        match self.problem {
            Problem::P1 { p } if !(p >= 1.0) => return bad(format!("P1 needs p >= 1, got {p}")),
            Problem::P2 { n: 0 } => return bad("P2 needs n >= 1".into()),
            _ => {}
        }
        if self.dim == 0 || self.dim > MAX_DIM {
            return bad(format!("dim must be in 1..={MAX_DIM}, got {}", self.dim));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        Ok(())
    }

    fn candidate_list(&self) -> Vec<Candidate> {
        if self.candidates.is_empty() {
            Candidate::defaults(self.problem)
        } else {
            self.candidates.clone()
        }
    }
}

/// Seed of trial `t`: `seed + (t + 1) * 0x9E3779B97F4A7C15` with wrapping
/// arithmetic. Trials depend only on their own seed, so any schedule over
/// trials gives the same report.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Solution,
    NearMiss,
    NonSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SolutionsFound,
    NearMiss,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub candidate: Candidate,
    pub label: String,
    pub max_residual: f64,
    pub worst_trial: usize,
    pub classification: Classification,
    pub positive_control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Residuals in `[lower, upper)`; the first bin also holds exact zeros.
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreReport {
    pub config: ExploreConfig,
    pub evidence: String,
    pub candidates: Vec<CandidateResult>,
    /// Index into `candidates` of the smallest residual.
    pub best: usize,
    /// Decade bins of the candidates' max residuals, ascending.
    pub histogram: Vec<HistogramBin>,
    pub verdict: Verdict,
}

impl ExploreReport {
    pub fn find(&self, c: &Candidate) -> Option<&CandidateResult> {
        self.candidates.iter().find(|r| &r.candidate == c)
    }
}

fn classify(r: f64, tol: f64) -> Classification {
    if r <= tol {
        Classification::Solution
    } else if r <= NEAR_MISS_FACTOR * tol {
        Classification::NearMiss
    } else {
        Classification::NonSolution
    }
}

fn histogram(residuals: &[f64]) -> Vec<HistogramBin> {
    let decade = |r: f64| if r > 0.0 { r.log10().floor().max(-17.0) as i32 } else { -17 };
    let mut bins: Vec<HistogramBin> = Vec::new();
    let mut keys: Vec<i32> = residuals.iter().map(|&r| decade(r)).collect();
    keys.sort_unstable();
    for k in keys {
        match bins.last_mut() {
            Some(b) if b.lower == 10f64.powi(k) => b.count += 1,
            _ => bins.push(HistogramBin { lower: 10f64.powi(k), upper: 10f64.powi(k + 1), count: 1 }),
        }
    }
    bins
}

/// Residual function for one pair under the configured problem.
fn pair_residual(problem: Problem, x: &Vector, y: &Vector, fx: &Vector, fy: &Vector) -> Result<f64, ExploreError> {
    Ok(match problem {
        Problem::P1 { p } => {
            let norm = if p == 2.0 { Norm::Euclidean } else { Norm::P(p) };
            pair_residual_in(norm, ConditionId::T2I, x, y, fx, fy, None)?
        }
        Problem::P2 { n } => eq22_pair(Norm::Euclidean, n, x, y, fx, fy)?.0,
    })
}

fn trial_pairs(cfg: &ExploreConfig, space: &SpaceSpec, seed: u64) -> Result<Vec<(Vector, Vector)>, ExploreError> {
    let pts = sample(&SamplePlan::gaussian(2 * cfg.pairs.max(1), seed), space).map_err(MapError::from)?;
    let mut pairs: Vec<(Vector, Vector)> =
        pts.chunks_exact(2).take(cfg.pairs).map(|c| (c[0].clone(), c[1].clone())).collect();
    let basis = space.real_basis();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            pairs.push((basis[a].clone(), basis[b].clone()));
        }
    }
    Ok(pairs)
}

fn run(cfg: &ExploreConfig) -> Result<ExploreReport, ExploreError> {
    cfg.validate()?;
    let field = match cfg.problem {
        Problem::P1 { .. } => Field::Real,
        Problem::P2 { .. } => Field::Complex,
    };
    let space = SpaceSpec::new(field, cfg.dim, Norm::Euclidean).map_err(MapError::from)?;
    let candidates = cfg.candidate_list();
    let mut worst = vec![(0.0f64, 0usize); candidates.len()];
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, t);
        let pairs = trial_pairs(cfg, &space, seed)?;
        for (k, cand) in candidates.iter().enumerate() {
            let m = cand.instantiate(cfg.problem, cfg.dim, seed)?;
            for (x, y) in &pairs {
                let r = pair_residual(cfg.problem, x, y, &m.eval(x)?, &m.eval(y)?)?;
                if r > worst[k].0 || r.is_nan() {
                    worst[k] = (r, t);
                }
            }
        }
    }
    let results: Vec<CandidateResult> = candidates
        .iter()
        .zip(&worst)
        .map(|(c, &(r, t))| CandidateResult {
            candidate: c.clone(),
            label: c.label(),
            max_residual: r,
            worst_trial: t,
            classification: classify(r, cfg.tol),
            positive_control: c.is_positive_control(cfg.problem),
        })
        .collect();
    let best = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.max_residual.total_cmp(&b.1.max_residual))
        .map_or(0, |(k, _)| k);
    let verdict = if results.iter().any(|r| r.classification == Classification::Solution) {
        Verdict::SolutionsFound
    } else if results.iter().any(|r| r.classification == Classification::NearMiss) {
        Verdict::NearMiss
    } else {
        Verdict::None
    };
    let residuals: Vec<f64> = results.iter().map(|r| r.max_residual).collect();
    let per_trial = cfg.pairs + space.real_dim() * (space.real_dim() + 1) / 2;
    Ok(ExploreReport {
        config: cfg.clone(),
        evidence: format!(
            "empirical at {per_trial} pairs x {} trials, dim {} ({field})",
            cfg.trials, cfg.dim
        ),
        candidates: results,
        best,
        histogram: histogram(&residuals),
        verdict,
    })
}

/// The phase equation under `l^p` norms.
pub fn explore_p1(cfg: &ExploreConfig) -> Result<ExploreReport, ExploreError> {
    if !matches!(cfg.problem, Problem::P1 { .. }) {
        return Err(ExploreError::InvalidConfig("explore_p1 needs a P1 config".into()));
    }
    run(cfg)
}

/// The roots-of-unity equation of order `n`.
pub fn explore_p2(cfg: &ExploreConfig) -> Result<ExploreReport, ExploreError> {
    if !matches!(cfg.problem, Problem::P2 { .. }) {
        return Err(ExploreError::InvalidConfig("explore_p2 needs a P2 config".into()));
    }
    run(cfg)
}

pub fn explore(cfg: &ExploreConfig) -> Result<ExploreReport, ExploreError> {
    run(cfg)
}
