//! Worst-case residuals of the functional equations over sampled pairs.
//!
//! Every pair condition is symmetric in `(x, y)`, so reports scan unordered
//! pairs `i <= j` in lexicographic order. The diagonal is included because
//! several conditions only bite at `y = x`. Ties keep the first pair seen.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{MapError, MapSpec};
use crate::space::{
    roots_of_unity, sample, Field, Norm, SamplePlan, Scalar, SpaceError, SpaceSpec, Tolerance,
    Vector,
};

/// Real scalars used by the homogeneity check.
pub const HOMOGENEITY_SCALARS: [f64; 5] = [-2.0, -1.0, -0.5, 0.5, 2.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("T2_III needs the image of 0")]
    MissingZeroImage,
    #[error("{0} needs an evaluable map, got tabulated samples")]
    NeedsEvaluableMap(ConditionId),
    #[error("pair conditions take a tabulated map; tabulate the map first")]
    NotTabulated,
    #[error("{0} does not apply here: {1}")]
    NotApplicable(ConditionId, String),
    #[error("roots of unity of order {0} need complex spaces")]
    RealFieldUnsupported(usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionId {
    /// `| |f(x) - f(y)| - |x - y| |`
    MuIsometry,
    /// `| |f(x) + f(y)| - |x + y| |`
    T1I,
    /// `| <<f(x), f(y)>> - <<x, y>> |`
    T1II,
    Additive,
    RealHomogeneous,
    /// `| |f(x)| - |x| |`
    NormPreserving,
    /// Sorted `{|f(x) + f(y)|, |f(x) - f(y)|}` against sorted `{|x + y|, |x - y|}`.
    T2I,
    /// Difference of the sums `|u + v| + |u - v|`.
    T2II,
    /// Difference of the products `|u + v| |u - v|`, together with `|f(0)|`.
    T2III,
    /// `| |<<f(x), f(y)>>| - |<<x, y>>| |`
    T2IV,
    ComplexLinear,
    /// Sorted `|u - beta_k v|` lists over the `n`th roots of unity.
    Eq22(usize),
}

impl ConditionId {
    /// Conditions that need `f` at derived points (`x + y`, `t x`, `i x`).
    pub fn is_derived(self) -> bool {
        matches!(self, ConditionId::Additive | ConditionId::RealHomogeneous | ConditionId::ComplexLinear)
    }

    /// Pair conditions from the two characterization theorems plus the
    /// isometry equation.
    pub const PAIR_CONDITIONS: [ConditionId; 8] = [
        ConditionId::MuIsometry,
        ConditionId::T1I,
        ConditionId::T1II,
        ConditionId::NormPreserving,
        ConditionId::T2I,
        ConditionId::T2II,
        ConditionId::T2III,
        ConditionId::T2IV,
    ];
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionId::MuIsometry => "MU_ISOMETRY",
            ConditionId::T1I => "T1_I",
            ConditionId::T1II => "T1_II",
            ConditionId::Additive => "ADDITIVE",
            ConditionId::RealHomogeneous => "REAL_HOMOGENEOUS",
            ConditionId::NormPreserving => "NORM_PRESERVING",
            ConditionId::T2I => "T2_I",
            ConditionId::T2II => "T2_II",
            ConditionId::T2III => "T2_III",
            ConditionId::T2IV => "T2_IV",
            ConditionId::ComplexLinear => "COMPLEX_LINEAR",
            ConditionId::Eq22(n) => return write!(f, "EQ22_{n}"),
        };
        f.write_str(s)
    }
}

impl FromStr for ConditionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "MU_ISOMETRY" => ConditionId::MuIsometry,
            "T1_I" => ConditionId::T1I,
            "T1_II" => ConditionId::T1II,
            "ADDITIVE" => ConditionId::Additive,
            "REAL_HOMOGENEOUS" => ConditionId::RealHomogeneous,
            "NORM_PRESERVING" => ConditionId::NormPreserving,
            "T2_I" => ConditionId::T2I,
            "T2_II" => ConditionId::T2II,
            "T2_III" => ConditionId::T2III,
            "T2_IV" => ConditionId::T2IV,
            "COMPLEX_LINEAR" => ConditionId::ComplexLinear,
            other => match other.strip_prefix("EQ22_").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => ConditionId::Eq22(n),
                _ => return Err(format!("unknown condition {other:?}")),
            },
        })
    }
}

impl Serialize for ConditionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConditionId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub max_residual: f64,
    pub argmax: (usize, usize),
    pub pass: bool,
    pub tol: f64,
    /// `EQ22_n` only: pairs where one of the two distance lists has repeated
    /// values, so set and multiset readings may differ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tied_pairs: Option<usize>,
}

/// Running maximum with first-wins ties.
#[derive(Debug, Clone, Copy)]
struct Worst {
    residual: f64,
    at: (usize, usize),
}

impl Worst {
    fn new() -> Self {
        Worst { residual: 0.0, at: (0, 0) }
    }

    fn push(&mut self, r: f64, at: (usize, usize)) {
        // NaN must surface as a failure
        if r > self.residual || (r.is_nan() && !self.residual.is_nan()) {
            self.residual = r;
            self.at = at;
        }
    }

    fn report(self, condition: ConditionId, tol: f64) -> ConditionReport {
        ConditionReport {
            condition,
            max_residual: self.residual,
            argmax: self.at,
            pass: self.residual <= tol,
            tol,
            tied_pairs: None,
        }
    }
}

/// `(|u + v|^2 - |u|^2 - |v|^2) / 2`, the inner product recovered from norms.
pub fn polarize(n_sum: f64, n_x: f64, n_y: f64) -> f64 {
    (n_sum * n_sum - n_x * n_x - n_y * n_y) / 2.0
}

fn sorted2(a: f64, b: f64) -> (f64, f64) {
    if a <= b { (a, b) } else { (b, a) }
}

/// Residual of one pair condition under the euclidean norm.
pub fn pair_residual(
    id: ConditionId,
    x: &Vector,
    y: &Vector,
    fx: &Vector,
    fy: &Vector,
    f0: Option<&Vector>,
) -> Result<f64, CheckError> {
    pair_residual_in(Norm::Euclidean, id, x, y, fx, fy, f0)
}

/// Residual of one pair condition with norms taken in `norm`. Conditions built
/// on inner products require the euclidean norm.
pub fn pair_residual_in(
    norm: Norm,
    id: ConditionId,
    x: &Vector,
    y: &Vector,
    fx: &Vector,
    fy: &Vector,
    f0: Option<&Vector>,
) -> Result<f64, CheckError> {
    let n = |v: &Vector| norm.eval(v);
    let inner = |a: &Vector, b: &Vector| -> Result<f64, CheckError> {
        match norm {
            Norm::Euclidean => Ok(a.dot(b)),
            other => Err(SpaceError::UnsupportedNorm(other).into()),
        }
    };
    Ok(match id {
        ConditionId::MuIsometry => (n(&(fx - fy)) - n(&(x - y))).abs(),
        ConditionId::T1I => (n(&(fx + fy)) - n(&(x + y))).abs(),
        ConditionId::T1II => (inner(fx, fy)? - inner(x, y)?).abs(),
        ConditionId::NormPreserving => (n(fx) - n(x)).abs(),
        ConditionId::T2I => {
            let (a, b) = sorted2(n(&(fx + fy)), n(&(fx - fy)));
            let (a2, b2) = sorted2(n(&(x + y)), n(&(x - y)));
            (a - a2).abs().max((b - b2).abs())
        }
        ConditionId::T2II => {
            ((n(&(fx + fy)) + n(&(fx - fy))) - (n(&(x + y)) + n(&(x - y)))).abs()
        }
        ConditionId::T2III => {
            let f0 = f0.ok_or(CheckError::MissingZeroImage)?;
            let product = (n(&(fx + fy)) * n(&(fx - fy)) - n(&(x + y)) * n(&(x - y))).abs();
            product.max(n(f0))
        }
        ConditionId::T2IV => (inner(fx, fy)?.abs() - inner(x, y)?.abs()).abs(),
        ConditionId::Eq22(k) => eq22_pair(norm, k, x, y, fx, fy)?.0,
        derived => return Err(CheckError::NeedsEvaluableMap(derived)),
    })
}

/// Roots-of-unity residual for one pair plus whether either sorted distance
/// list contains a repeated value.
pub fn eq22_pair(
    norm: Norm,
    n: usize,
    x: &Vector,
    y: &Vector,
    fx: &Vector,
    fy: &Vector,
) -> Result<(f64, bool), CheckError> {
    if n == 0 {
        return Err(CheckError::NotApplicable(ConditionId::Eq22(0), "n must be >= 1".into()));
    }
    if n > 2 && (x.field() == Field::Real || fx.field() == Field::Real) {
        return Err(CheckError::RealFieldUnsupported(n));
    }
    let betas = roots_of_unity(n);
    let mut image = Vec::with_capacity(n);
    let mut domain = Vec::with_capacity(n);
    let unsupported = |_| CheckError::RealFieldUnsupported(n);
    for &b in &betas {
        image.push(norm.eval(&(fx - &fy.mul_scalar(b).map_err(unsupported)?)));
        domain.push(norm.eval(&(x - &y.mul_scalar(b).map_err(unsupported)?)));
    }
    image.sort_by(f64::total_cmp);
    domain.sort_by(f64::total_cmp);
    let tol = Tolerance::default();
    let tied = |v: &[f64]| v.windows(2).any(|w| tol.close(w[0], w[1]));
    let has_ties = tied(&image) || tied(&domain);
    let r = image.iter().zip(&domain).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((r, has_ties))
}

/// Worst pair residual over `samples[i], images[i]`.
pub fn pair_report(
    id: ConditionId,
    samples: &[Vector],
    images: &[Vector],
    f0: Option<&Vector>,
    norm: Norm,
    tol: f64,
) -> Result<ConditionReport, CheckError> {
    assert_eq!(samples.len(), images.len(), "samples and images differ in length");
    if samples.len() < 2 {
        return Err(CheckError::TooFewSamples { need: 2, got: samples.len() });
    }
    if id.is_derived() {
        return Err(CheckError::NeedsEvaluableMap(id));
    }
    if id == ConditionId::T2III && f0.is_none() {
        return Err(CheckError::MissingZeroImage);
    }
    let mut worst = Worst::new();
    let mut tied_pairs = 0usize;
    if id == ConditionId::NormPreserving {
        for (i, (x, fx)) in samples.iter().zip(images).enumerate() {
            worst.push((norm.eval(fx) - norm.eval(x)).abs(), (i, i));
        }
        return Ok(worst.report(id, tol));
    }
    for i in 0..samples.len() {
        for j in i..samples.len() {
            let (x, y, fx, fy) = (&samples[i], &samples[j], &images[i], &images[j]);
            let r = match id {
                ConditionId::Eq22(n) => {
                    let (r, tie) = eq22_pair(norm, n, x, y, fx, fy)?;
                    tied_pairs += usize::from(tie);
                    r
                }
                _ => pair_residual_in(norm, id, x, y, fx, fy, f0)?,
            };
            worst.push(r, (i, j));
        }
    }
    let mut report = worst.report(id, tol);
    if matches!(id, ConditionId::Eq22(_)) {
        report.tied_pairs = Some(tied_pairs);
    }
    Ok(report)
}

/// Image of the zero vector if the table contains it.
pub fn zero_image<'a>(samples: &[Vector], images: &'a [Vector]) -> Option<&'a Vector> {
    samples.iter().position(Vector::is_zero).map(|k| &images[k])
}

fn split_table(m: &MapSpec) -> Result<(Vec<Vector>, Vec<Vector>), CheckError> {
    let pairs = m.pairs().ok_or(CheckError::NotTabulated)?;
    Ok(pairs.iter().cloned().unzip())
}

/// Checks a pair condition on a tabulated map.
pub fn check_condition(id: ConditionId, m: &MapSpec, tol: f64) -> Result<ConditionReport, CheckError> {
    if id.is_derived() && m.is_tabulated() {
        return Err(CheckError::NeedsEvaluableMap(id));
    }
    let (xs, fxs) = split_table(m)?;
    let norm = m.domain()?.norm_kind();
    pair_report(id, &xs, &fxs, zero_image(&xs, &fxs), norm, tol)
}

/// Checks a condition that evaluates `f` away from the samples.
pub fn check_derived(
    id: ConditionId,
    m: &MapSpec,
    xs: &[Vector],
    tol: f64,
) -> Result<ConditionReport, CheckError> {
    if !m.is_evaluable() {
        return Err(CheckError::NeedsEvaluableMap(id));
    }
    if xs.is_empty() {
        return Err(CheckError::TooFewSamples { need: 1, got: 0 });
    }
    let fxs = xs.iter().map(|x| m.eval(x)).collect::<Result<Vec<_>, _>>()?;
    let mut worst = Worst::new();
    match id {
        ConditionId::Additive => {
            for i in 0..xs.len() {
                for j in i..xs.len() {
                    let f_sum = m.eval(&(&xs[i] + &xs[j]))?;
                    worst.push((&(&f_sum - &fxs[i]) - &fxs[j]).euclidean_norm(), (i, j));
                }
            }
        }
        ConditionId::RealHomogeneous => {
            for (i, (x, fx)) in xs.iter().zip(&fxs).enumerate() {
                for t in HOMOGENEITY_SCALARS {
                    let r = (&m.eval(&x.scale(t))? - &fx.scale(t)).euclidean_norm();
                    worst.push(r, (i, i));
                }
            }
        }
        ConditionId::ComplexLinear => {
            if m.domain()?.field() != Field::Complex || m.codomain()?.field() != Field::Complex {
                return Err(CheckError::NotApplicable(id, "needs complex spaces".into()));
            }
            let i_unit = Scalar::new(0.0, 1.0);
            for (k, (x, fx)) in xs.iter().zip(&fxs).enumerate() {
                let lhs = m.eval(&x.mul_scalar(i_unit)?)?;
                let rhs = fx.mul_scalar(i_unit)?;
                worst.push((&lhs - &rhs).euclidean_norm(), (k, k));
            }
        }
        other => return Err(CheckError::NotApplicable(other, "not a derived-point condition".into())),
    }
    Ok(worst.report(id, tol))
}

/// Checks the roots-of-unity condition of order `n` on samples drawn by `plan`.
pub fn check_eq22(
    m: &MapSpec,
    plan: &SamplePlan,
    n: usize,
    tol: f64,
) -> Result<ConditionReport, CheckError> {
    let dom = m.domain()?;
    if n > 2 && (dom.field() == Field::Real || m.codomain()?.field() == Field::Real) {
        return Err(CheckError::RealFieldUnsupported(n));
    }
    let (xs, fxs) = if let Some(pairs) = m.pairs() {
        pairs.iter().cloned().unzip()
    } else {
        let xs = battery_samples(m, plan)?;
        let fxs = xs.iter().map(|x| m.eval(x)).collect::<Result<Vec<_>, _>>()?;
        (xs, fxs)
    };
    pair_report(ConditionId::Eq22(n), &xs, &fxs, None, dom.norm_kind(), tol)
}

/// Sample points for a battery run: the plan's draws followed by `0` and the
/// signed real basis, skipping anything already present. Maps living on a
/// line draw scalars instead and use `0, a, -a` as forced points.
pub fn battery_samples(m: &MapSpec, plan: &SamplePlan) -> Result<Vec<Vector>, CheckError> {
    let mut pts = Vec::new();
    match m {
        MapSpec::AbsOneDim { a, .. } => {
            for t in sample(plan, &SpaceSpec::real(1))? {
                pts.push(a.scale(t.real_coords()[0]));
            }
            pts.push(a.scale(0.0));
            pts.push(a.clone());
            pts.push(a.scale(-1.0));
        }
        MapSpec::Scaled { base, .. } if matches!(**base, MapSpec::AbsOneDim { .. }) => {
            return battery_samples(base, plan);
        }
        _ => {
            let dom = m.domain()?;
            pts = sample(plan, &dom)?;
            pts.push(dom.zero());
            for e in dom.real_basis() {
                pts.push(e.scale(-1.0));
                pts.push(e);
            }
        }
    }
    let tol = Tolerance::default();
    let mut out: Vec<Vector> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| tol.vectors_close(q, &p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Outcome of a battery: the sample list and one report per condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub samples: usize,
    pub reports: Vec<ConditionReport>,
}

impl Battery {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn get(&self, id: ConditionId) -> Option<&ConditionReport> {
        self.reports.iter().find(|r| r.condition == id)
    }
}

/// Conditions a battery evaluates for `m`.
pub fn applicable_conditions(m: &MapSpec, has_zero: bool) -> Result<Vec<ConditionId>, CheckError> {
    let mut ids: Vec<ConditionId> = ConditionId::PAIR_CONDITIONS
        .into_iter()
        .filter(|&id| id != ConditionId::T2III || has_zero)
        .collect();
    if m.is_evaluable() {
        ids.push(ConditionId::Additive);
        ids.push(ConditionId::RealHomogeneous);
        if m.domain()?.field() == Field::Complex && m.codomain()?.field() == Field::Complex {
            ids.push(ConditionId::ComplexLinear);
        }
    }
    Ok(ids)
}

/// Runs every applicable condition. Tabulated maps are checked on their own
/// table; other maps are tabulated over [`battery_samples`] first.
pub fn run_battery(m: &MapSpec, plan: &SamplePlan, tol: f64) -> Result<Battery, CheckError> {
    let (xs, fxs) = match m.pairs() {
        Some(pairs) => pairs.iter().cloned().unzip(),
        None => {
            let xs = battery_samples(m, plan)?;
            let fxs = xs.iter().map(|x| m.eval(x)).collect::<Result<Vec<_>, _>>()?;
            (xs, fxs)
        }
    };
    battery_on(m, &xs, &fxs, tol)
}

/// Battery over explicit samples and their images. Derived-point conditions
/// re-evaluate `m`.
pub fn battery_on(
    m: &MapSpec,
    xs: &[Vector],
    fxs: &[Vector],
    tol: f64,
) -> Result<Battery, CheckError> {
    let f0 = zero_image(xs, fxs);
    let norm = m.domain()?.norm_kind();
    let mut reports = Vec::new();
    for id in applicable_conditions(m, f0.is_some())? {
        let r = if id.is_derived() {
            check_derived(id, m, xs, tol)?
        } else {
            pair_report(id, xs, fxs, f0, norm, tol)?
        };
        reports.push(r);
    }
    Ok(Battery { samples: xs.len(), reports })
}

/// A verdict implication `premise at tol => conclusion at factor * tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationOutcome {
    pub premise: ConditionId,
    pub conclusion: ConditionId,
    pub factor: f64,
    pub premise_pass: bool,
    pub conclusion_pass: bool,
}

impl ImplicationOutcome {
    pub fn holds(&self) -> bool {
        !self.premise_pass || self.conclusion_pass
    }
}

/// Tolerance inflation for each proof step, with `max_norm` the largest
/// euclidean norm among samples and images.
///
/// * `T2_I => T2_II`: 4. Matching sorted pairs within `tol` moves each sum
///   term by at most `tol`.
/// * `T2_II => T2_III` and `T2_III => T2_IV`: `4 (1 + M^2)`. Each step squares
///   norms of size up to `2M`.
/// * `T1_I => T1_II`: `1 + 4M`, the polarization terms `|x + y|, |x|, |y|`.
/// * `T2_II => NORM_PRESERVING`: 1, via `y = x`.
pub fn implication_factor(premise: ConditionId, conclusion: ConditionId, max_norm: f64) -> Option<f64> {
    use ConditionId::*;
    let m2 = max_norm * max_norm;
    Some(match (premise, conclusion) {
        (T2I, T2II) => 4.0,
        (T2II, T2III) | (T2III, T2IV) => 4.0 * (1.0 + m2),
        (T1I, T1II) => 1.0 + 4.0 * max_norm,
        (T2II, NormPreserving) => 1.0,
        _ => return None,
    })
}

/// The implications proved for the two characterization theorems.
pub const IMPLICATIONS: [(ConditionId, ConditionId); 5] = [
    (ConditionId::T2I, ConditionId::T2II),
    (ConditionId::T2II, ConditionId::T2III),
    (ConditionId::T2III, ConditionId::T2IV),
    (ConditionId::T1I, ConditionId::T1II),
    (ConditionId::T2II, ConditionId::NormPreserving),
];

/// Evaluates every implication in [`IMPLICATIONS`] on one sample table, which
/// must contain the zero vector.
pub fn implication_chain(
    xs: &[Vector],
    fxs: &[Vector],
    tol: f64,
) -> Result<Vec<ImplicationOutcome>, CheckError> {
    let f0 = zero_image(xs, fxs).ok_or(CheckError::MissingZeroImage)?;
    let max_norm = xs.iter().chain(fxs).map(Vector::euclidean_norm).fold(0.0, f64::max);
    IMPLICATIONS
        .iter()
        .map(|&(p, c)| {
            let factor = implication_factor(p, c, max_norm).expect("listed implication");
            let premise = pair_report(p, xs, fxs, Some(f0), Norm::Euclidean, tol)?;
            let conclusion = pair_report(c, xs, fxs, Some(f0), Norm::Euclidean, tol * factor)?;
            Ok(ImplicationOutcome {
                premise: p,
                conclusion: c,
                factor,
                premise_pass: premise.pass,
                conclusion_pass: conclusion.pass,
            })
        })
        .collect()
}
