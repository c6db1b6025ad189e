//! Map specifications `f: X -> Y`.
//!
//! Every family is a value: maps are built once, validated, and evaluated as
//! pure functions. Matrices act on realified coordinates, so a complex map on
//! `C^d` carries a `2d x 2d` real matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::space::{roots_of_unity, Field, Norm, Scalar, SpaceError, SpaceSpec, Tolerance, Vector};

/// Entrywise tolerance on `Q^T Q - I` accepted at construction.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Tolerance on `|a| = |b| = 1` for [`MapSpec::AbsOneDim`].
pub const UNIT_TOL: f64 = 1e-12;
/// Default violator magnitude for `Scaled` offsets and `PerturbedLinear` noise.
pub const DEFAULT_VIOLATION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("point is outside the map's domain: {0}")]
    OutOfDomain(String),
    #[error("matrix is not orthogonal: max |Q^T Q - I| = {0:e}")]
    NotOrthogonal(f64),
    #[error("matrix shape {rows}x{cols} does not fit the {field} field")]
    BadShape { rows: usize, cols: usize, field: Field },
    #[error("vector {0} must have unit norm")]
    NotUnit(&'static str),
    #[error("tabulated points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("tabulated map needs at least one pair")]
    EmptyTable,
    #[error("tabulated pairs disagree on their spaces at index {0}")]
    InconsistentTable(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// The phase function `epsilon: X -> {-1, 1}`, or `X -> {beta_k}` for the
/// roots-of-unity extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum SignRule {
    Constant { s: i8 },
    /// `+1` on the closed halfspace `<<x, v>> >= 0`, `-1` elsewhere.
    Halfspace { v: Vector },
    /// Pseudo-random sign derived from the point's bit pattern.
    Seeded { seed: u64 },
    /// Pseudo-random `n`th root of unity derived from the point's bit pattern.
    RootsOfUnity { n: usize, seed: u64 },
}

/// SHA-256 of the seed followed by the little-endian bits of each realified
/// coordinate, with `-0.0` folded onto `0.0`.
fn point_digest(seed: u64, x: &Vector) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for c in x.real_coords() {
        h.update((c + 0.0).to_bits().to_le_bytes());
    }
    h.finalize().into()
}

fn digest_u64(seed: u64, x: &Vector) -> u64 {
    let d = point_digest(seed, x);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl SignRule {
    pub fn phase(&self, x: &Vector) -> Scalar {
        match self {
            SignRule::Constant { s } => Complex64::new(f64::from(*s), 0.0),
            SignRule::Halfspace { v } => {
                if x.dot(v) >= 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            SignRule::Seeded { seed } => {
                let s = if digest_u64(*seed, x) & 1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s, 0.0)
            }
            SignRule::RootsOfUnity { n, seed } => {
                let k = (digest_u64(*seed, x) % *n as u64) as usize;
                roots_of_unity(*n)[k]
            }
        }
    }

    /// Whether every value is `+1` or `-1`.
    pub fn is_real(&self) -> bool {
        !matches!(self, SignRule::RootsOfUnity { n, .. } if *n > 2)
    }

    fn validate(&self, domain: &SpaceSpec) -> Result<(), MapError> {
        match self {
            SignRule::Constant { s } if *s != 1 && *s != -1 => {
                Err(MapError::InvalidParameter(format!("constant sign must be +-1, got {s}")))
            }
            SignRule::Halfspace { v } => Ok(domain.conforms(v)?),
            SignRule::RootsOfUnity { n: 0, .. } => {
                Err(MapError::InvalidParameter("roots of unity need n >= 1".into()))
            }
            SignRule::RootsOfUnity { .. } if !self.is_real() && domain.field() == Field::Real => {
                Err(MapError::InvalidParameter("complex phases need a complex space".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Serde adapter writing matrices as row-major nested arrays.
pub(crate) mod matrix_json {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(D::Error::custom("matrix must be non-empty"));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != ncols) {
            return Err(D::Error::custom(format!("row {r} has a different length")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(DMatrix::from_row_iterator(nrows, ncols, rows.into_iter().flatten()))
    }
}

fn real_field() -> Field {
    Field::Real
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum MapSpec {
    LinearIsometry {
        #[serde(default = "real_field")]
        field: Field,
        #[serde(rename = "Q", with = "matrix_json")]
        q: DMatrix<f64>,
    },
    /// `f(x) = epsilon(x) Q x`.
    PhaseIsometry {
        #[serde(default = "real_field")]
        field: Field,
        #[serde(rename = "Q", with = "matrix_json")]
        q: DMatrix<f64>,
        rule: SignRule,
    },
    /// `f(x1, x2) = (x1, conj(x2))` on `C^2`.
    RatzConjugation,
    /// `f(t a) = |t| b` on the line through the unit vector `a`.
    AbsOneDim { a: Vector, b: Vector },
    Tabulated { pairs: Vec<(Vector, Vector)> },
    /// `f(x) = c base(x)`.
    Scaled { base: Box<MapSpec>, c: f64 },
    /// `f(x) = Q x + eta noise(x)` with standard normal noise keyed on `x`.
    PerturbedLinear {
        #[serde(default = "real_field")]
        field: Field,
        #[serde(rename = "Q", with = "matrix_json")]
        q: DMatrix<f64>,
        eta: f64,
        seed: u64,
    },
}

pub fn orthogonality_residual(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let n = g.nrows();
    (g - DMatrix::<f64>::identity(n, n)).amax()
}

fn check_shape(field: Field, q: &DMatrix<f64>) -> Result<(), MapError> {
    let w = field.width();
    if q.nrows() % w != 0 || q.ncols() % w != 0 || q.nrows() == 0 || q.ncols() == 0 {
        return Err(MapError::BadShape { rows: q.nrows(), cols: q.ncols(), field });
    }
    Ok(())
}

fn check_orthogonal(field: Field, q: &DMatrix<f64>) -> Result<(), MapError> {
    check_shape(field, q)?;
    let r = orthogonality_residual(q);
    if r > ORTHOGONALITY_TOL {
        return Err(MapError::NotOrthogonal(r));
    }
    Ok(())
}

fn apply(field: Field, q: &DMatrix<f64>, x: &Vector) -> Vector {
    let y = q * nalgebra::DVector::from_column_slice(x.real_coords());
    Vector::from_real_coords(field, y.as_slice().to_vec()).expect("shape validated")
}

impl MapSpec {
    pub fn linear_isometry(field: Field, q: DMatrix<f64>) -> Result<Self, MapError> {
        let m = MapSpec::LinearIsometry { field, q };
        m.validate()?;
        Ok(m)
    }

    pub fn phase_isometry(field: Field, q: DMatrix<f64>, rule: SignRule) -> Result<Self, MapError> {
        let m = MapSpec::PhaseIsometry { field, q, rule };
        m.validate()?;
        Ok(m)
    }

    pub fn abs_one_dim(a: Vector, b: Vector) -> Result<Self, MapError> {
        let m = MapSpec::AbsOneDim { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(pairs: Vec<(Vector, Vector)>) -> Result<Self, MapError> {
        let m = MapSpec::Tabulated { pairs };
        m.validate()?;
        Ok(m)
    }

    pub fn scaled(base: MapSpec, c: f64) -> Result<Self, MapError> {
        let m = MapSpec::Scaled { base: Box::new(base), c };
        m.validate()?;
        Ok(m)
    }

    pub fn perturbed_linear(
        field: Field,
        q: DMatrix<f64>,
        eta: f64,
        seed: u64,
    ) -> Result<Self, MapError> {
        let m = MapSpec::PerturbedLinear { field, q, eta, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(s: &SpaceSpec) -> Self {
        let n = s.real_dim();
        MapSpec::LinearIsometry { field: s.field(), q: DMatrix::identity(n, n) }
    }

    /// Re-checks every construction invariant. Deserialized maps should pass
    /// through here before use.
    pub fn validate(&self) -> Result<(), MapError> {
        match self {
            MapSpec::LinearIsometry { field, q } => check_orthogonal(*field, q),
            MapSpec::PhaseIsometry { field, q, rule } => {
                check_orthogonal(*field, q)?;
                rule.validate(&self.domain()?)
            }
            MapSpec::RatzConjugation => Ok(()),
            MapSpec::AbsOneDim { a, b } => {
                a.check_finite()?;
                b.check_finite()?;
                if (a.euclidean_norm() - 1.0).abs() > UNIT_TOL {
                    return Err(MapError::NotUnit("a"));
                }
                if (b.euclidean_norm() - 1.0).abs() > UNIT_TOL {
                    return Err(MapError::NotUnit("b"));
                }
                if a.field() != b.field() {
                    return Err(SpaceError::FieldMismatch { left: a.field(), right: b.field() }.into());
                }
                Ok(())
            }
            MapSpec::Tabulated { pairs } => {
                let (x0, y0) = pairs.first().ok_or(MapError::EmptyTable)?;
                let tol = Tolerance::default();
                for (i, (x, y)) in pairs.iter().enumerate() {
                    if x.field() != x0.field()
                        || x.dim() != x0.dim()
                        || y.field() != y0.field()
                        || y.dim() != y0.dim()
                    {
                        return Err(MapError::InconsistentTable(i));
                    }
                    x.check_finite()?;
                    y.check_finite()?;
                }
                for i in 0..pairs.len() {
                    for j in 0..i {
                        if tol.vectors_close(&pairs[i].0, &pairs[j].0) {
                            return Err(MapError::DuplicatePoint(j, i));
                        }
                    }
                }
                Ok(())
            }
            MapSpec::Scaled { base, c } => {
                if !c.is_finite() || (c.abs() - 1.0).abs() == 0.0 {
                    return Err(MapError::InvalidParameter(format!(
                        "scale must be finite and different from +-1, got {c}"
                    )));
                }
                base.validate()
            }
            MapSpec::PerturbedLinear { field, q, eta, .. } => {
                if !(*eta > 0.0) || !eta.is_finite() {
                    return Err(MapError::InvalidParameter(format!("eta must be > 0, got {eta}")));
                }
                check_orthogonal(*field, q)
            }
        }
    }

    pub fn domain(&self) -> Result<SpaceSpec, MapError> {
        let space = |field: Field, n: usize| SpaceSpec::new(field, n / field.width(), Norm::Euclidean);
        Ok(match self {
            MapSpec::LinearIsometry { field, q }
            | MapSpec::PhaseIsometry { field, q, .. }
            | MapSpec::PerturbedLinear { field, q, .. } => space(*field, q.ncols())?,
            MapSpec::RatzConjugation => SpaceSpec::complex(2),
            MapSpec::AbsOneDim { a, .. } => space(a.field(), a.real_coords().len())?,
            MapSpec::Tabulated { pairs } => {
                let x = &pairs.first().ok_or(MapError::EmptyTable)?.0;
                space(x.field(), x.real_coords().len())?
            }
            MapSpec::Scaled { base, .. } => base.domain()?,
        })
    }

    pub fn codomain(&self) -> Result<SpaceSpec, MapError> {
        let space = |field: Field, n: usize| SpaceSpec::new(field, n / field.width(), Norm::Euclidean);
        Ok(match self {
            MapSpec::LinearIsometry { field, q }
            | MapSpec::PhaseIsometry { field, q, .. }
            | MapSpec::PerturbedLinear { field, q, .. } => space(*field, q.nrows())?,
            MapSpec::RatzConjugation => SpaceSpec::complex(2),
            MapSpec::AbsOneDim { b, .. } => space(b.field(), b.real_coords().len())?,
            MapSpec::Tabulated { pairs } => {
                let y = &pairs.first().ok_or(MapError::EmptyTable)?.1;
                space(y.field(), y.real_coords().len())?
            }
            MapSpec::Scaled { base, .. } => base.codomain()?,
        })
    }

    /// False for maps known only at finitely many points.
    pub fn is_evaluable(&self) -> bool {
        match self {
            MapSpec::Tabulated { .. } => false,
            MapSpec::Scaled { base, .. } => base.is_evaluable(),
            _ => true,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, MapSpec::Tabulated { .. })
    }

    /// Stored `(x, f(x))` pairs of a tabulated map.
    pub fn pairs(&self) -> Option<&[(Vector, Vector)]> {
        match self {
            MapSpec::Tabulated { pairs } => Some(pairs),
            _ => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            MapSpec::LinearIsometry { .. } => "LinearIsometry",
            MapSpec::PhaseIsometry { .. } => "PhaseIsometry",
            MapSpec::RatzConjugation => "RatzConjugation",
            MapSpec::AbsOneDim { .. } => "AbsOneDim",
            MapSpec::Tabulated { .. } => "Tabulated",
            MapSpec::Scaled { .. } => "Scaled",
            MapSpec::PerturbedLinear { .. } => "PerturbedLinear",
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector, MapError> {
        let dom = self.domain()?;
        dom.conforms(x).map_err(|e| MapError::OutOfDomain(e.to_string()))?;
        match self {
            MapSpec::LinearIsometry { field, q } => Ok(apply(*field, q, x)),
            MapSpec::PhaseIsometry { field, q, rule } => {
                Ok(apply(*field, q, x).mul_scalar(rule.phase(x))?)
            }
            MapSpec::RatzConjugation => {
                let e = x.entries();
                Ok(Vector::complex(&[e[0], e[1].conj()]))
            }
            MapSpec::AbsOneDim { a, b } => {
                let t = x.dot(a);
                let off_line = (x - &a.scale(t)).euclidean_norm();
                if off_line > 1e-9 * (1.0 + t.abs()) {
                    return Err(MapError::OutOfDomain(format!(
                        "distance {off_line:e} from the line spanned by a"
                    )));
                }
                Ok(b.scale(t.abs()))
            }
            MapSpec::Tabulated { pairs } => {
                if let Some((_, y)) = pairs.iter().find(|(p, _)| p == x) {
                    return Ok(y.clone());
                }
                let tol = Tolerance::default();
                pairs
                    .iter()
                    .find(|(p, _)| tol.vectors_close(p, x))
                    .map(|(_, y)| y.clone())
                    .ok_or_else(|| MapError::OutOfDomain("point is not tabulated".into()))
            }
            MapSpec::Scaled { base, c } => Ok(base.eval(x)?.scale(*c)),
            MapSpec::PerturbedLinear { field, q, eta, seed } => {
                let clean = apply(*field, q, x);
                let mut rng = ChaCha8Rng::from_seed(point_digest(*seed, x));
                let noise: Vec<f64> =
                    (0..q.nrows()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let noise = Vector::from_real_coords(*field, noise)?;
                Ok(&clean + &noise.scale(*eta))
            }
        }
    }
}

/// Samples `m` at every point of `xs`, yielding a map that downstream code can
/// consume without access to the generator.
pub fn tabulate(m: &MapSpec, xs: &[Vector]) -> Result<MapSpec, MapError> {
    let pairs = xs
        .iter()
        .map(|x| Ok((x.clone(), m.eval(x)?)))
        .collect::<Result<Vec<_>, MapError>>()?;
    MapSpec::tabulated(pairs)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Seeded Haar-distributed orthogonal matrix: QR of a ChaCha8 gaussian matrix
/// (row-major draw order) with columns signed so that `R` has a positive
/// diagonal.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    assert!(dim >= 1, "random_orthogonal needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_row_iterator(
        dim,
        dim,
        (0..dim * dim).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>(),
    );
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Realified matrix of a seeded Haar unitary on `C^dim`: complex QR with the
/// phases of `R`'s diagonal moved into `Q`. Entry `u = a + bi` becomes the
/// block `[[a, -b], [b, a]]`.
pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<f64> {
    assert!(dim >= 1, "random_unitary needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = gaussian_matrix(dim, 2 * dim, &mut rng);
    let a = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(raw[(i, 2 * j)], raw[(i, 2 * j + 1)]));
    let qr = a.qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..dim {
                u[(i, j)] *= phase;
            }
        }
    }
    realify_complex_matrix(&u)
}

pub fn realify_complex_matrix(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(2 * u.nrows(), 2 * u.ncols());
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let z = u[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Seeded permutation matrix with random column signs.
pub fn signed_permutation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(&mut rng);
    let mut q = DMatrix::zeros(dim, dim);
    for (j, &i) in perm.iter().enumerate() {
        q[(i, j)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    q
}

/// Rotation by `angle` in the plane of the first two coordinates.
pub fn plane_rotation(dim: usize, angle: f64) -> DMatrix<f64> {
    assert!(dim >= 2, "plane rotation needs dim >= 2");
    let mut q = DMatrix::identity(dim, dim);
    let (s, c) = angle.sin_cos();
    q[(0, 0)] = c;
    q[(0, 1)] = -s;
    q[(1, 0)] = s;
    q[(1, 1)] = c;
    q
}

/// Realified matrix of coordinatewise conjugation on `C^dim`.
pub fn conjugation_matrix(dim: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(2 * dim, |k, _| {
        if k % 2 == 0 { 1.0 } else { -1.0 }
    }))
}

/// Realified matrix of the map `(x1, x2) -> (x1, conj(x2))`.
pub fn ratz_matrix() -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]))
}
