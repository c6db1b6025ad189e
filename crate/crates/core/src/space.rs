//! Finite-dimensional real and complex spaces viewed through the real inner
//! product `<<x, y>> = Re <x, y>`.
//!
//! Vectors always store realified coordinates. A complex vector of dimension
//! `d` keeps `2d` doubles laid out as `(Re x_1, Im x_1, Re x_2, ...)`, so the
//! real inner product of two complex vectors is the plain dot product of their
//! storage.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Complex scalar. Real-field scalars keep `im == 0`.
pub type Scalar = Complex64;

/// Upper bound on the number of points a grid plan may produce.
pub const MAX_GRID_POINTS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: Field, right: Field },
    #[error("operation requires the euclidean norm, space uses {0}")]
    UnsupportedNorm(Norm),
    #[error("vector is already real")]
    AlreadyReal,
    #[error("non-finite entry at coordinate {0}")]
    NonFinite(usize),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Number of stored doubles per scalar.
    pub fn width(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// Norm carried by a space. Serialized as `"euclidean"` or `{"p": v}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Euclidean,
    P(f64),
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Euclidean => f.write_str("euclidean"),
            Norm::P(p) => write!(f, "l{p}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormRepr {
    Name(String),
    P { p: f64 },
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Norm::Euclidean => NormRepr::Name("euclidean".into()).serialize(s),
            Norm::P(p) => NormRepr::P { p }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NormRepr::deserialize(d)? {
            NormRepr::Name(n) if n == "euclidean" => Ok(Norm::Euclidean),
            NormRepr::Name(n) => Err(serde::de::Error::custom(format!("unknown norm {n:?}"))),
            NormRepr::P { p } if p.is_finite() && p >= 1.0 => Ok(Norm::P(p)),
            NormRepr::P { p } => Err(serde::de::Error::custom(format!("p must be >= 1, got {p}"))),
        }
    }
}

impl Norm {
    /// Evaluates the norm on `x`. `P(p)` uses entry moduli, so it is also
    /// defined for complex storage even though spaces only allow it over R.
    pub fn eval(&self, x: &Vector) -> f64 {
        match *self {
            Norm::Euclidean => x.dot(x).sqrt(),
            Norm::P(p) => {
                let moduli = (0..x.dim()).map(|k| x.entry(k).norm());
                if p == 1.0 {
                    moduli.sum()
                } else if p.is_infinite() {
                    moduli.fold(0.0, f64::max)
                } else {
                    moduli.map(|m| m.powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpecRepr")]
pub struct SpaceSpec {
    field: Field,
    dim: usize,
    norm: Norm,
}

#[derive(Deserialize)]
struct SpaceSpecRepr {
    field: Field,
    dim: usize,
    #[serde(default = "euclidean")]
    norm: Norm,
}

fn euclidean() -> Norm {
    Norm::Euclidean
}

impl TryFrom<SpaceSpecRepr> for SpaceSpec {
    type Error = SpaceError;

    fn try_from(r: SpaceSpecRepr) -> Result<Self, SpaceError> {
        SpaceSpec::new(r.field, r.dim, r.norm)
    }
}

impl SpaceSpec {
    pub fn new(field: Field, dim: usize, norm: Norm) -> Result<Self, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::InvalidSpace("dim must be at least 1".into()));
        }
        if let Norm::P(p) = norm {
            if field == Field::Complex {
                return Err(SpaceError::InvalidSpace("p-norms are only supported over R".into()));
            }
            if !(p >= 1.0) {
                return Err(SpaceError::InvalidSpace(format!("p must be >= 1, got {p}")));
            }
        }
        Ok(SpaceSpec { field, dim, norm })
    }

    pub fn real(dim: usize) -> Self {
        Self::new(Field::Real, dim, Norm::Euclidean).expect("dim >= 1")
    }

    pub fn complex(dim: usize) -> Self {
        Self::new(Field::Complex, dim, Norm::Euclidean).expect("dim >= 1")
    }

    pub fn pnorm(dim: usize, p: f64) -> Result<Self, SpaceError> {
        Self::new(Field::Real, dim, Norm::P(p))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> Norm {
        self.norm
    }

    /// Dimension of the realified space.
    pub fn real_dim(&self) -> usize {
        self.dim * self.field.width()
    }

    pub fn conforms(&self, x: &Vector) -> Result<(), SpaceError> {
        if x.field != self.field {
            return Err(SpaceError::FieldMismatch { left: x.field, right: self.field });
        }
        if x.dim() != self.dim {
            return Err(SpaceError::DimensionMismatch { left: x.dim(), right: self.dim });
        }
        Ok(())
    }

    pub fn zero(&self) -> Vector {
        Vector { field: self.field, coords: vec![0.0; self.real_dim()] }
    }

    /// Basis of the space seen as a real vector space: `e_k` and, over C,
    /// `i e_k` as well.
    pub fn real_basis(&self) -> Vec<Vector> {
        (0..self.real_dim())
            .map(|k| {
                let mut v = self.zero();
                v.coords[k] = 1.0;
                v
            })
            .collect()
    }
}

/// A vector with realified storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    field: Field,
    coords: Vec<f64>,
}

impl Vector {
    pub fn real(entries: Vec<f64>) -> Self {
        Vector { field: Field::Real, coords: entries }
    }

    pub fn complex(entries: &[Scalar]) -> Self {
        let coords = entries.iter().flat_map(|z| [z.re, z.im]).collect();
        Vector { field: Field::Complex, coords }
    }

    /// Builds a vector from realified coordinates.
    pub fn from_real_coords(field: Field, coords: Vec<f64>) -> Result<Self, SpaceError> {
        if coords.len() % field.width() != 0 {
            return Err(SpaceError::InvalidSpace(format!(
                "{} realified coordinates do not describe a complex vector",
                coords.len()
            )));
        }
        let v = Vector { field, coords };
        v.check_finite()?;
        Ok(v)
    }

    pub fn check_finite(&self) -> Result<(), SpaceError> {
        match self.coords.iter().position(|c| !c.is_finite()) {
            Some(k) => Err(SpaceError::NonFinite(k)),
            None => Ok(()),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.coords.len() / self.field.width()
    }

    pub fn real_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn entry(&self, k: usize) -> Scalar {
        match self.field {
            Field::Real => Complex64::new(self.coords[k], 0.0),
            Field::Complex => Complex64::new(self.coords[2 * k], self.coords[2 * k + 1]),
        }
    }

    pub fn entries(&self) -> Vec<Scalar> {
        (0..self.dim()).map(|k| self.entry(k)).collect()
    }

    /// Dot product of the realified storage, i.e. `Re <self, other>`.
    /// Panics on length mismatch; use [`real_inner`] for checked access.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.coords.len(), other.coords.len(), "dot of unequal lengths");
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector { field: self.field, coords: self.coords.iter().map(|x| c * x).collect() }
    }

    /// Multiplies by a complex scalar. Over R the imaginary part of `z` must
    /// vanish.
    pub fn mul_scalar(&self, z: Scalar) -> Result<Vector, SpaceError> {
        match self.field {
            Field::Real if z.im == 0.0 => Ok(self.scale(z.re)),
            Field::Real => Err(SpaceError::FieldMismatch { left: Field::Complex, right: Field::Real }),
            Field::Complex => {
                Ok(Vector::complex(&self.entries().into_iter().map(|w| z * w).collect::<Vec<_>>()))
            }
        }
    }

    pub fn conj(&self) -> Vector {
        match self.field {
            Field::Real => self.clone(),
            Field::Complex => {
                Vector::complex(&self.entries().into_iter().map(|w| w.conj()).collect::<Vec<_>>())
            }
        }
    }

    fn zip_with(&self, other: &Vector, op: impl Fn(f64, f64) -> f64) -> Vector {
        assert_eq!(self.field, other.field, "vector arithmetic across fields");
        assert_eq!(self.coords.len(), other.coords.len(), "vector arithmetic across dimensions");
        Vector {
            field: self.field,
            coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| op(a, b)).collect(),
        }
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum VectorRepr {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.field {
            Field::Real => VectorRepr::Real(self.coords.clone()).serialize(s),
            Field::Complex => VectorRepr::Complex(
                self.coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            )
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = match VectorRepr::deserialize(d)? {
            VectorRepr::Real(c) => Vector::real(c),
            VectorRepr::Complex(c) => Vector {
                field: Field::Complex,
                coords: c.into_iter().flatten().collect(),
            },
        };
        if v.coords.is_empty() {
            return Err(serde::de::Error::custom("vectors need at least one entry"));
        }
        v.check_finite().map_err(serde::de::Error::custom)?;
        Ok(v)
    }
}

fn check_pair(x: &Vector, y: &Vector, s: &SpaceSpec) -> Result<(), SpaceError> {
    s.conforms(x)?;
    s.conforms(y)
}

/// `Re <x, y>` over the space `s`, which must carry the euclidean norm.
pub fn real_inner(x: &Vector, y: &Vector, s: &SpaceSpec) -> Result<f64, SpaceError> {
    check_pair(x, y, s)?;
    if s.norm != Norm::Euclidean {
        return Err(SpaceError::UnsupportedNorm(s.norm));
    }
    Ok(x.dot(y))
}

pub fn norm(x: &Vector, s: &SpaceSpec) -> Result<f64, SpaceError> {
    s.conforms(x)?;
    Ok(s.norm.eval(x))
}

/// Views a complex vector as a real one of twice the dimension.
pub fn realify(x: &Vector) -> Result<Vector, SpaceError> {
    match x.field {
        Field::Real => Err(SpaceError::AlreadyReal),
        Field::Complex => Ok(Vector { field: Field::Real, coords: x.coords.clone() }),
    }
}

/// Inverse of [`realify`].
pub fn complexify(x: &Vector) -> Result<Vector, SpaceError> {
    Vector::from_real_coords(Field::Complex, x.coords.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Independent standard normal realified coordinates.
    Gaussian,
    /// Gaussian draws scaled to unit euclidean norm.
    Sphere,
    /// Every realified coordinate ranges over `-h, -h + step, ..., h`.
    Grid { half_width: f64, step: f64 },
}

/// Sampling recipe.
///
/// Random distributions draw from ChaCha8 (`rand_chacha` 0.9) seeded with
/// `seed_from_u64(seed)`, and standard normals come from `rand_distr`'s
/// `StandardNormal` (ziggurat). Coordinates are drawn in storage order, one
/// vector at a time. Grid plans ignore `count` and `seed` and return the
/// whole lattice in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub count: usize,
    pub distribution: Distribution,
    #[serde(default)]
    pub seed: u64,
}

impl SamplePlan {
    pub fn gaussian(count: usize, seed: u64) -> Self {
        SamplePlan { count, distribution: Distribution::Gaussian, seed }
    }

    pub fn sphere(count: usize, seed: u64) -> Self {
        SamplePlan { count, distribution: Distribution::Sphere, seed }
    }

    pub fn grid(half_width: f64, step: f64) -> Self {
        SamplePlan { count: 1, distribution: Distribution::Grid { half_width, step }, seed: 0 }
    }
}

pub fn sample(plan: &SamplePlan, s: &SpaceSpec) -> Result<Vec<Vector>, SpaceError> {
    if plan.count == 0 {
        return Err(SpaceError::InvalidPlan("count must be at least 1".into()));
    }
    let n = s.real_dim();
    match plan.distribution {
        Distribution::Gaussian | Distribution::Sphere => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            let mut out = Vec::with_capacity(plan.count);
            while out.len() < plan.count {
                let coords: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let v = Vector { field: s.field, coords };
                if plan.distribution == Distribution::Sphere {
                    let r = v.euclidean_norm();
                    // a zero gaussian draw has probability zero; redraw anyway
                    if r == 0.0 {
                        continue;
                    }
                    out.push(v.scale(1.0 / r));
                } else {
                    out.push(v);
                }
            }
            Ok(out)
        }
        Distribution::Grid { half_width, step } => grid(s, half_width, step),
    }
}

fn grid(s: &SpaceSpec, half_width: f64, step: f64) -> Result<Vec<Vector>, SpaceError> {
    if !(step > 0.0) || !(half_width >= 0.0) || !half_width.is_finite() {
        return Err(SpaceError::InvalidPlan(format!(
            "grid needs step > 0 and finite half_width >= 0, got step {step}, half_width {half_width}"
        )));
    }
    let per_axis = (2.0 * half_width / step + 1e-9).floor() as usize + 1;
    let n = s.real_dim();
    let total = (per_axis as f64).powi(n as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(SpaceError::InvalidPlan(format!("grid would have {total} points")));
    }
    let levels: Vec<f64> = (0..per_axis).map(|k| -half_width + k as f64 * step).collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; n];
    loop {
        let coords = idx.iter().map(|&k| levels[k]).collect();
        out.push(Vector { field: s.field, coords });
        // odometer increment, last coordinate fastest
        let mut axis = n;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per_axis {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// The `n`th roots of unity `exp(2 pi i k / n)`, `k = 0..n`. Roots on the
/// axes are returned exactly.
pub fn roots_of_unity(n: usize) -> Vec<Scalar> {
    assert!(n >= 1, "roots_of_unity needs n >= 1");
    (0..n)
        .map(|k| {
            if (4 * k) % n == 0 {
                match 4 * k / n {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                }
            } else {
                Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
            }
        })
        .collect()
}

/// Combined absolute/relative tolerance: `|a - b| <= atol + rtol * max(|a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { atol: 1e-9, rtol: 1e-9 }
    }
}

impl Tolerance {
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.atol + self.rtol * a.abs().max(b.abs())
    }

    pub fn vectors_close(&self, x: &Vector, y: &Vector) -> bool {
        x.field == y.field
            && x.coords.len() == y.coords.len()
            && x.coords.iter().zip(&y.coords).all(|(&a, &b)| self.close(a, b))
    }
}
