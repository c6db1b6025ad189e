//! Reconstruction of the phase function and the linear map behind a sampled
//! solution of `|<<f(x), f(y)>>| = |<<x, y>>|`.
//!
//! The pipeline reads relative signs `eps_i eps_j = sign(<<x_i, x_j>> <<f_i, f_j>>)`
//! off every pair with a usable inner product, propagates them through each
//! connected component, fits `G` by least squares on `eps_i f_i ~ G x_i` and
//! finally certifies `G^T G = I` together with the fit residual.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{pair_report, CheckError, ConditionId};
use crate::maps::{orthogonality_residual, MapError, MapSpec};
use crate::space::{Norm, Tolerance, Vector};

/// Default relative inner-product threshold below which a pair carries no sign.
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Default node limit for [`brute_force_signs`].
pub const DEFAULT_BRUTE_FORCE_NODES: usize = 16;
/// Relative singular value threshold for the spanning check in [`fit_linear`].
pub const RANK_TOL: f64 = 1e-8;
/// Component counts up to this size have their relative flips searched
/// exhaustively; larger counts fall back to greedy single flips.
pub const EXHAUSTIVE_FLIP_COMPONENTS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoverError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("recovery needs a tabulated map")]
    NotTabulated,
    #[error("{samples} samples but {images} images")]
    LengthMismatch { samples: usize, images: usize },
    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("|<<x_{i}, x_{j}>>| and |<<f_{i}, f_{j}>>| differ by {error:e}")]
    MagnitudeMismatch { i: usize, j: usize, error: f64 },
    #[error("edge ({i}, {j}) contradicts the propagated signs")]
    InconsistentCycle { i: usize, j: usize },
    #[error("samples are not phase equivalent to a linear map: edge ({i}, {j}) closes an odd cycle")]
    NotPhaseEquivalent { i: usize, j: usize },
    #[error("{nodes} nodes exceed the brute-force limit of {max}")]
    TooManyNodes { nodes: usize, max: usize },
    #[error("samples span a space of rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
}

/// Which pairs may carry a relative sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRule {
    /// Every pair passing the inner-product threshold.
    #[default]
    Global,
    /// Additionally require `<<x_i, x_j>> > 0`: `x_j` must lie in the open
    /// half-space around `x_i`, where the ratio `<<x, x_i>> / <<f(x), f(x_i)>>`
    /// never crosses a zero of its numerator. Components then follow the
    /// connected pieces of the sampled domain minus the origin, so a line
    /// splits into its two rays.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphOptions {
    pub delta: f64,
    /// Allowed `| |<<x_i, x_j>>| - |<<f_i, f_j>>| |`, relative per
    /// [`Tolerance`] with equal absolute and relative parts.
    pub edge_tol: f64,
    pub rule: EdgeRule,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { delta: DEFAULT_DELTA, edge_tol: 1e-9, rule: EdgeRule::Global }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignEdge {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
    pub ratio_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignGraph {
    pub sample_count: usize,
    /// Indices of nonzero samples.
    pub nodes: Vec<usize>,
    pub edges: Vec<SignEdge>,
    /// Node partition, each sorted, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

impl SignGraph {
    /// Component index of every sample; `None` for excluded zero samples.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.sample_count];
        for (c, members) in self.components.iter().enumerate() {
            for &i in members {
                out[i] = Some(c);
            }
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<(usize, i8)>> {
        let mut adj = vec![Vec::new(); self.sample_count];
        for e in &self.edges {
            adj[e.i].push((e.j, e.sign));
            adj[e.j].push((e.i, e.sign));
        }
        adj
    }

    /// Edges violated by `signs`.
    pub fn violations(&self, signs: &[i8]) -> usize {
        self.edges.iter().filter(|e| signs[e.i] * signs[e.j] != e.sign).count()
    }
}

fn check_lengths(samples: &[Vector], images: &[Vector]) -> Result<(), RecoverError> {
    if samples.len() != images.len() {
        return Err(RecoverError::LengthMismatch { samples: samples.len(), images: images.len() });
    }
    Ok(())
}

pub fn build_sign_graph(
    samples: &[Vector],
    images: &[Vector],
    delta: f64,
) -> Result<SignGraph, RecoverError> {
    build_sign_graph_with(samples, images, &GraphOptions { delta, ..Default::default() })
}

pub fn build_sign_graph_with(
    samples: &[Vector],
    images: &[Vector],
    opts: &GraphOptions,
) -> Result<SignGraph, RecoverError> {
    check_lengths(samples, images)?;
    if !(opts.delta > 0.0) {
        return Err(RecoverError::InvalidDelta(opts.delta));
    }
    let tol = Tolerance { atol: opts.edge_tol, rtol: opts.edge_tol };
    let nodes: Vec<usize> = (0..samples.len()).filter(|&i| !samples[i].is_zero()).collect();
    let xn: Vec<f64> = samples.iter().map(Vector::euclidean_norm).collect();
    let fn_: Vec<f64> = images.iter().map(Vector::euclidean_norm).collect();
    let mut edges = Vec::new();
    let mut uf = UnionFind::<usize>::new(samples.len());
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            let ix = samples[i].dot(&samples[j]);
            if opts.rule == EdgeRule::Local && ix <= 0.0 {
                continue;
            }
            let if_ = images[i].dot(&images[j]);
            if ix.abs() < opts.delta * xn[i] * xn[j] || if_.abs() < opts.delta * fn_[i] * fn_[j] {
                continue;
            }
            let ratio_error = (ix.abs() - if_.abs()).abs();
            if !tol.close(ix.abs(), if_.abs()) {
                return Err(RecoverError::MagnitudeMismatch { i, j, error: ratio_error });
            }
            let sign = if (ix > 0.0) == (if_ > 0.0) { 1 } else { -1 };
            edges.push(SignEdge { i, j, sign, ratio_error });
            uf.union(i, j);
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; samples.len()];
    for &i in &nodes {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(i);
    }
    Ok(SignGraph { sample_count: samples.len(), nodes, edges, components })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignAssignment {
    /// One sign per sample. Excluded zero samples carry `+1`.
    pub signs: Vec<i8>,
    /// Lowest node index of each component.
    pub component_anchors: Vec<usize>,
}

impl SignAssignment {
    /// Every assignment obtained by flipping whole components.
    pub fn component_flips(&self, g: &SignGraph) -> Vec<Vec<i8>> {
        let k = g.components.len();
        (0u64..1 << k)
            .map(|mask| {
                let mut s = self.signs.clone();
                for (c, members) in g.components.iter().enumerate() {
                    if mask >> c & 1 == 1 {
                        for &i in members {
                            s[i] = -s[i];
                        }
                    }
                }
                s
            })
            .collect()
    }
}

/// Breadth-first propagation from the lowest node of each component, which
/// is assigned `+1`. Every edge is then re-checked, tree or not.
pub fn propagate_signs(g: &SignGraph) -> Result<SignAssignment, RecoverError> {
    let adj = g.adjacency();
    let mut signs = vec![0i8; g.sample_count];
    let mut anchors = Vec::with_capacity(g.components.len());
    for members in &g.components {
        let anchor = members[0];
        anchors.push(anchor);
        signs[anchor] = 1;
        let mut queue = VecDeque::from([anchor]);
        while let Some(u) = queue.pop_front() {
            for &(v, s) in &adj[u] {
                if signs[v] == 0 {
                    signs[v] = signs[u] * s;
                    queue.push_back(v);
                }
            }
        }
    }
    if let Some(e) = g.edges.iter().find(|e| signs[e.i] * signs[e.j] != e.sign) {
        return Err(RecoverError::InconsistentCycle { i: e.i, j: e.j });
    }
    for s in &mut signs {
        if *s == 0 {
            *s = 1;
        }
    }
    Ok(SignAssignment { signs, component_anchors: anchors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub min_violations: usize,
    /// Every sign vector reaching `min_violations`, indexed like the samples.
    pub assignments: Vec<Vec<i8>>,
}

/// Enumerates all `2^n` node signings and keeps those violating the fewest
/// edges.
pub fn brute_force_signs(g: &SignGraph, max_n: usize) -> Result<BruteForce, RecoverError> {
    let n = g.nodes.len();
    if n > max_n || n >= 63 {
        return Err(RecoverError::TooManyNodes { nodes: n, max: max_n });
    }
    let mut best = usize::MAX;
    let mut assignments = Vec::new();
    let mut signs = vec![1i8; g.sample_count];
    for mask in 0u64..1 << n {
        for (b, &node) in g.nodes.iter().enumerate() {
            signs[node] = if mask >> b & 1 == 1 { -1 } else { 1 };
        }
        let v = g.edges.iter().filter(|e| signs[e.i] * signs[e.j] != e.sign).count();
        if v < best {
            best = v;
            assignments.clear();
        }
        if v == best {
            assignments.push(signs.clone());
        }
    }
    Ok(BruteForce { min_violations: best, assignments })
}

/// Least-squares `G` minimizing `sum_i |signs_i f_i - G x_i|^2` over
/// realified coordinates.
pub fn fit_linear(
    samples: &[Vector],
    images: &[Vector],
    signs: &[i8],
) -> Result<DMatrix<f64>, RecoverError> {
    check_lengths(samples, images)?;
    assert_eq!(signs.len(), samples.len(), "one sign per sample");
    let d_in = samples.first().map_or(0, |x| x.real_coords().len());
    let d_out = images.first().map_or(0, |y| y.real_coords().len());
    let n = samples.len();
    let x = DMatrix::from_fn(n, d_in, |i, k| samples[i].real_coords()[k]);
    let y = DMatrix::from_fn(n, d_out, |i, k| f64::from(signs[i]) * images[i].real_coords()[k]);
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < d_in || smax == 0.0 {
        return Err(RecoverError::RankDeficient { rank, needed: d_in });
    }
    let gt = svd.solve(&y, RANK_TOL * smax).expect("both factors were computed");
    Ok(gt.transpose())
}

/// Nearest orthogonal matrix `U V^T` from the SVD of `g`. Never applied
/// implicitly by the pipeline.
pub fn polar_factor(g: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = g.clone().svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

fn fit_residual(samples: &[Vector], images: &[Vector], signs: &[i8], g: &DMatrix<f64>) -> f64 {
    samples
        .iter()
        .zip(images)
        .zip(signs)
        .map(|((x, f), &s)| {
            let gx = g * nalgebra::DVector::from_column_slice(x.real_coords());
            f.real_coords()
                .iter()
                .zip(gx.iter())
                .map(|(a, b)| (f64::from(s) * a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Canonical assignment: each component's lowest node carries `+1`.
    pub assignment: SignAssignment,
    /// Component labels per sample, `null` for zero samples.
    pub component_labels: Vec<Option<usize>>,
    /// Relative flip applied to each component before fitting.
    pub component_flips: Vec<i8>,
    /// Signs used for the fit: canonical signs times component flips.
    pub signs: Vec<i8>,
    #[serde(rename = "G", with = "crate::maps::matrix_json")]
    pub g: DMatrix<f64>,
    pub gram_residual: f64,
    pub fit_residual: f64,
    pub components: usize,
    pub certified: bool,
    pub tol: f64,
}

/// Orthogonality and fit certificates for a candidate `(signs, G)`.
pub fn certify(
    samples: &[Vector],
    images: &[Vector],
    a: &SignAssignment,
    g: &DMatrix<f64>,
    tol: f64,
) -> RecoveryResult {
    let gram_residual = orthogonality_residual(g);
    let fit = fit_residual(samples, images, &a.signs, g);
    RecoveryResult {
        assignment: a.clone(),
        component_labels: Vec::new(),
        component_flips: vec![1; a.component_anchors.len()],
        signs: a.signs.clone(),
        g: g.clone(),
        gram_residual,
        fit_residual: fit,
        components: a.component_anchors.len(),
        certified: gram_residual <= tol && fit <= tol,
        tol,
    }
}

fn apply_flips(g: &SignGraph, base: &[i8], flips: &[i8]) -> Vec<i8> {
    let mut s = base.to_vec();
    for (members, &f) in g.components.iter().zip(flips) {
        for &i in members {
            s[i] *= f;
        }
    }
    s
}

/// Chooses relative component signs that make the samples best fit a linear
/// map. The first component keeps `+1`.
pub fn resolve_component_flips(
    samples: &[Vector],
    images: &[Vector],
    g: &SignGraph,
    a: &SignAssignment,
) -> Result<Vec<i8>, RecoverError> {
    let k = g.components.len();
    let mut flips = vec![1i8; k];
    if k <= 1 {
        return Ok(flips);
    }
    let score = |flips: &[i8]| -> Result<f64, RecoverError> {
        let s = apply_flips(g, &a.signs, flips);
        let gm = fit_linear(samples, images, &s)?;
        Ok(fit_residual(samples, images, &s, &gm))
    };
    if k <= EXHAUSTIVE_FLIP_COMPONENTS {
        let mut best = (f64::INFINITY, flips.clone());
        for mask in 0u64..1 << (k - 1) {
            let cand: Vec<i8> = (0..k)
                .map(|c| if c > 0 && mask >> (c - 1) & 1 == 1 { -1 } else { 1 })
                .collect();
            let r = score(&cand)?;
            if r < best.0 {
                best = (r, cand);
            }
        }
        return Ok(best.1);
    }
    let mut current = score(&flips)?;
    loop {
        let mut improved = false;
        for c in 1..k {
            flips[c] = -flips[c];
            let r = score(&flips)?;
            if r < current {
                current = r;
                improved = true;
            } else {
                flips[c] = -flips[c];
            }
        }
        if !improved {
            return Ok(flips);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoverOptions {
    pub tol: f64,
    pub graph: GraphOptions,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions { tol: 1e-9, graph: GraphOptions::default() }
    }
}

/// Full pipeline on a tabulated map: `T2_IV` precheck, sign graph,
/// propagation, component flip resolution, fit and certificate.
pub fn recover(m: &MapSpec, opts: &RecoverOptions) -> Result<RecoveryResult, RecoverError> {
    let pairs = m.pairs().ok_or(RecoverError::NotTabulated)?;
    let (xs, fxs): (Vec<Vector>, Vec<Vector>) = pairs.iter().cloned().unzip();
    recover_samples(&xs, &fxs, opts)
}

pub fn recover_samples(
    xs: &[Vector],
    fxs: &[Vector],
    opts: &RecoverOptions,
) -> Result<RecoveryResult, RecoverError> {
    check_lengths(xs, fxs)?;
    if xs.len() >= 2 {
        let pre = pair_report(ConditionId::T2IV, xs, fxs, None, Norm::Euclidean, opts.tol)?;
        if !pre.pass {
            let (i, j) = pre.argmax;
            return Err(RecoverError::MagnitudeMismatch { i, j, error: pre.max_residual });
        }
    }
    let graph = build_sign_graph_with(xs, fxs, &opts.graph)?;
    let assignment = propagate_signs(&graph).map_err(|e| match e {
        RecoverError::InconsistentCycle { i, j } => RecoverError::NotPhaseEquivalent { i, j },
        other => other,
    })?;
    let flips = resolve_component_flips(xs, fxs, &graph, &assignment)?;
    let signs = apply_flips(&graph, &assignment.signs, &flips);
    let g = fit_linear(xs, fxs, &signs)?;
    let fitted = SignAssignment { signs: signs.clone(), component_anchors: assignment.component_anchors.clone() };
    let mut result = certify(xs, fxs, &fitted, &g, opts.tol);
    result.assignment = assignment;
    result.component_labels = graph.labels();
    result.component_flips = flips;
    result.signs = signs;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{random_orthogonal, tabulate, SignRule};
    use crate::space::{Field, SpaceSpec};

    fn r(v: &[f64]) -> Vector {
        Vector::real(v.to_vec())
    }

    fn graph(n: usize, edges: &[(usize, usize, i8)]) -> SignGraph {
        let mut uf = UnionFind::<usize>::new(n);
        for &(i, j, _) in edges {
            uf.union(i, j);
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            match comps.iter_mut().find(|c| uf.equiv(c[0], i)) {
                Some(c) => c.push(i),
                None => comps.push(vec![i]),
            }
        }
        SignGraph {
            sample_count: n,
            nodes: (0..n).collect(),
            edges: edges.iter().map(|&(i, j, sign)| SignEdge { i, j, sign, ratio_error: 0.0 }).collect(),
            components: comps,
        }
    }

    #[test]
    fn negated_identity_edge_is_positive() {
        let xs = [r(&[1.0, 0.0]), r(&[1.0, 1.0])];
        let fxs: Vec<Vector> = xs.iter().map(|x| x.scale(-1.0)).collect();
        let g = build_sign_graph(&xs, &fxs, DEFAULT_DELTA).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].sign, 1);
        assert_eq!(g.components, vec![vec![0, 1]]);
    }

    #[test]
    fn orthogonal_samples_have_no_edge() {
        let xs = [r(&[1.0, 0.0]), r(&[0.0, 1.0])];
        let g = build_sign_graph(&xs, &xs, DEFAULT_DELTA).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.components.len(), 2);
    }

    #[test]
    fn halfspace_edges_match_rule_products() {
        let rule = SignRule::Halfspace { v: r(&[1.0, 0.0]) };
        let m = MapSpec::phase_isometry(Field::Real, DMatrix::identity(2, 2), rule.clone()).unwrap();
        let xs = [r(&[1.0, 0.0]), r(&[-1.0, 0.1]), r(&[0.1, 1.0])];
        let fxs: Vec<Vector> = xs.iter().map(|x| m.eval(x).unwrap()).collect();
        let g = build_sign_graph(&xs, &fxs, DEFAULT_DELTA).unwrap();
        // the last two samples are orthogonal
        assert_eq!(g.edges.len(), 2);
        for e in &g.edges {
            let want = rule.phase(&xs[e.i]).re * rule.phase(&xs[e.j]).re;
            assert_eq!(f64::from(e.sign), want);
        }
    }

    #[test]
    fn zero_samples_are_not_nodes() {
        let xs = [r(&[0.0, 0.0]), r(&[1.0, 0.0])];
        let g = build_sign_graph(&xs, &xs, DEFAULT_DELTA).unwrap();
        assert_eq!(g.nodes, vec![1]);
        assert_eq!(g.labels(), vec![None, Some(0)]);
    }

    #[test]
    fn magnitude_mismatch_is_reported() {
        let xs = [r(&[1.0, 0.0]), r(&[1.0, 1.0])];
        let fxs = [r(&[1.0, 0.0]), r(&[0.5, 1.2])];
        assert!(matches!(
            build_sign_graph(&xs, &fxs, DEFAULT_DELTA),
            Err(RecoverError::MagnitudeMismatch { i: 0, j: 1, .. })
        ));
        assert_eq!(build_sign_graph(&xs, &xs, 0.0), Err(RecoverError::InvalidDelta(0.0)));
    }

    #[test]
    fn single_node_gets_plus_one() {
        let a = propagate_signs(&graph(1, &[])).unwrap();
        assert_eq!(a.signs, vec![1]);
        assert_eq!(a.component_anchors, vec![0]);
        let bf = brute_force_signs(&graph(1, &[]), 16).unwrap();
        assert_eq!(bf.min_violations, 0);
        assert_eq!(bf.assignments, vec![vec![1], vec![-1]]);
    }

    #[test]
    fn consistent_triangle() {
        let g = graph(3, &[(0, 1, 1), (1, 2, -1), (0, 2, -1)]);
        let a = propagate_signs(&g).unwrap();
        assert_eq!(a.signs, vec![1, 1, -1]);
        let bf = brute_force_signs(&g, 16).unwrap();
        assert_eq!(bf.min_violations, 0);
        let mut want = a.component_flips(&g);
        let mut got = bf.assignments.clone();
        want.sort();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn inconsistent_triangle() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1), (0, 2, -1)]);
        assert_eq!(propagate_signs(&g), Err(RecoverError::InconsistentCycle { i: 1, j: 2 }));
        let bf = brute_force_signs(&g, 16).unwrap();
        assert_eq!(bf.min_violations, 1);
        assert!(bf.assignments.len() >= 2);
        assert!(matches!(
            brute_force_signs(&graph(17, &[]), 16),
            Err(RecoverError::TooManyNodes { nodes: 17, max: 16 })
        ));
    }

    #[test]
    fn fit_negated_identity() {
        let xs = [r(&[1.0, 0.0]), r(&[0.3, 2.0]), r(&[-1.0, 1.0])];
        let fxs: Vec<Vector> = xs.iter().map(|x| x.scale(-1.0)).collect();
        let g = fit_linear(&xs, &fxs, &[1, 1, 1]).unwrap();
        assert!((g + DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!(matches!(
            fit_linear(&xs[..1], &fxs[..1], &[1]),
            Err(RecoverError::RankDeficient { rank: 1, needed: 2 })
        ));
    }

    #[test]
    fn fit_recovers_generator_and_detects_flip() {
        let q = random_orthogonal(3, 21);
        let rule = SignRule::Halfspace { v: r(&[0.2, -1.0, 0.5]) };
        let m = MapSpec::phase_isometry(Field::Real, q.clone(), rule.clone()).unwrap();
        let xs = crate::space::sample(&crate::space::SamplePlan::gaussian(12, 2), &SpaceSpec::real(3)).unwrap();
        let fxs: Vec<Vector> = xs.iter().map(|x| m.eval(x).unwrap()).collect();
        let mut signs: Vec<i8> = xs.iter().map(|x| rule.phase(x).re as i8).collect();
        let g = fit_linear(&xs, &fxs, &signs).unwrap();
        assert!((&g - &q).amax() <= 1e-10);
        let a = SignAssignment { signs: signs.clone(), component_anchors: vec![0] };
        assert!(certify(&xs, &fxs, &a, &g, 1e-9).certified);

        signs[3] = -signs[3];
        let g = fit_linear(&xs, &fxs, &signs).unwrap();
        let a = SignAssignment { signs, component_anchors: vec![0] };
        let cert = certify(&xs, &fxs, &a, &g, 1e-9);
        assert!(cert.fit_residual >= 0.5, "{}", cert.fit_residual);
        assert!(!cert.certified);
    }

    #[test]
    fn certify_scaled_identity() {
        let xs = [r(&[1.0, 0.0]), r(&[0.0, 1.0]), r(&[1.0, 1.0])];
        let fxs: Vec<Vector> = xs.iter().map(|x| x.scale(2.0)).collect();
        let g = fit_linear(&xs, &fxs, &[1, 1, 1]).unwrap();
        let a = SignAssignment { signs: vec![1, 1, 1], component_anchors: vec![0] };
        let cert = certify(&xs, &fxs, &a, &g, 1e-9);
        assert!((cert.gram_residual - 3.0).abs() < 1e-12);
        assert!(!cert.certified);
    }

    #[test]
    fn abs_one_dim_has_two_local_components() {
        let m = MapSpec::abs_one_dim(r(&[1.0]), r(&[1.0])).unwrap();
        let ts = [-2.0, -0.5, 0.7, 1.5, 3.0, -1.0];
        let xs: Vec<Vector> = ts.iter().map(|&t| r(&[t])).collect();
        let t = tabulate(&m, &xs).unwrap();
        let opts = RecoverOptions {
            graph: GraphOptions { rule: EdgeRule::Local, ..Default::default() },
            ..Default::default()
        };
        let res = recover(&t, &opts).unwrap();
        assert!(res.certified);
        assert_eq!(res.components, 2);
        for (k, &tv) in ts.iter().enumerate() {
            let comp = res.component_labels[k].unwrap();
            let sign = res.assignment.signs[k] * res.component_flips[comp];
            // up to one overall flip
            assert_eq!(f64::from(sign) * f64::from(res.signs[0]), tv.signum() * ts[0].signum());
        }
        let global = recover(&t, &RecoverOptions::default()).unwrap();
        assert_eq!(global.components, 1);
        assert!(global.certified);
    }

    #[test]
    fn polar_factor_is_orthogonal() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.1, -0.3, 1.5]);
        assert!(orthogonality_residual(&polar_factor(&g)) < 1e-12);
    }

    #[test]
    fn recover_rejects_untabulated() {
        assert_eq!(
            recover(&MapSpec::RatzConjugation, &RecoverOptions::default()),
            Err(RecoverError::NotTabulated)
        );
    }
}
