//! The matrix C*-algebra model `M_k(C)` and finite-rank modules over it.
//!
//! An [`AlgebraElement`] is a dense `k x k` complex matrix with the usual
//! product and the conjugate transpose as involution. `k = 1` recovers the
//! scalars. A [`ModulePoint`] is a vector of `d` algebra elements on which the
//! algebra acts by left multiplication, coordinate by coordinate.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};

/// Tolerance on `||UU* - I||_F` accepted by [`Unitary::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Scalar field of a module: real points keep zero imaginary parts and the
/// unitary group of the real scalars is `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

/// A `k x k` complex matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElement", into = "RawElement")]
pub struct AlgebraElement {
    k: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawElement {
    k: usize,
    entries: Vec<Complex64>,
}

impl TryFrom<RawElement> for AlgebraElement {
    type Error = Error;
    fn try_from(raw: RawElement) -> Result<Self> {
        AlgebraElement::from_entries(raw.k, raw.entries)
    }
}

impl From<AlgebraElement> for RawElement {
    fn from(a: AlgebraElement) -> Self {
        RawElement {
            k: a.k,
            entries: a.entries,
        }
    }
}

impl AlgebraElement {
    pub fn from_entries(k: usize, entries: Vec<Complex64>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "algebra dimension must be at least 1"));
        }
        if entries.len() != k * k {
            return Err(mismatch(k * k, entries.len()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("entries", "all entries must be finite"));
        }
        Ok(Self { k, entries })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            entries: vec![Complex64::new(0.0, 0.0); k * k],
        }
    }

    pub fn identity(k: usize) -> Self {
        Self::scalar_multiple(k, Complex64::new(1.0, 0.0))
    }

    /// `c * I_k`.
    pub fn scalar_multiple(k: usize, c: Complex64) -> Self {
        let mut a = Self::zeros(k);
        for i in 0..k {
            a.entries[i * k + i] = c;
        }
        a
    }

    pub fn scalar(c: Complex64) -> Self {
        Self {
            k: 1,
            entries: vec![c],
        }
    }

    pub fn real(x: f64) -> Self {
        Self::scalar(Complex64::new(x, 0.0))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let k = diag.len();
        let mut a = Self::zeros(k);
        for (i, d) in diag.iter().enumerate() {
            a.entries[i * k + i] = *d;
        }
        a
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn map_entries(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            k: self.k,
            entries: self.entries.iter().map(|z| f(*z)).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let k = self.k;
        let mut out = Self::zeros(k);
        for i in 0..k {
            for j in 0..k {
                out.entries[j * k + i] = self.entries[i * k + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_entries(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_entries(|z| z * c)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.k).map(|i| self.entry(i, i)).sum()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (self - &self.adjoint()).frobenius_norm() <= tol
    }

    /// Spectral (C*) norm, the square root of the largest eigenvalue of `a* a`.
    pub fn operator_norm(&self) -> f64 {
        if self.k == 1 {
            return self.entries[0].norm();
        }
        let gram = &self.adjoint() * self;
        // power iteration on a PSD matrix; the Rayleigh quotient converges even
        // when the top eigenvalue is degenerate
        let k = self.k;
        let mut v: Vec<Complex64> = (0..k)
            .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
            .collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<Complex64> = (0..k)
                .map(|i| (0..k).map(|j| gram.entry(i, j) * v[j]).sum())
                .collect();
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next: f64 = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (b.conj() * a).re)
                .sum::<f64>()
                / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            v = w.into_iter().map(|z| z / norm).collect();
            if (next - lambda).abs() <= 1e-15 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.max(0.0).sqrt()
    }

    /// `self^degree`, with `self^0 = I`.
    pub fn pow(&self, degree: u32) -> Self {
        let mut acc = Self::identity(self.k);
        for _ in 0..degree {
            acc = &acc * self;
        }
        acc
    }

    /// `u a u*`.
    pub fn conjugate_by(&self, u: &AlgebraElement) -> Self {
        &(u * self) * &u.adjoint()
    }

    fn check_same_k(&self, other: &Self) {
        assert_eq!(
            self.k, other.k,
            "algebra dimension mismatch: {} vs {}",
            self.k, other.k
        );
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.check_same_k(rhs);
        AlgebraElement {
            k: self.k,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.check_same_k(rhs);
        AlgebraElement {
            k: self.k,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.check_same_k(rhs);
        let k = self.k;
        let mut out = AlgebraElement::zeros(k);
        for i in 0..k {
            for l in 0..k {
                let a = self.entries[i * k + l];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..k {
                    out.entries[i * k + j] += a * rhs.entries[l * k + j];
                }
            }
        }
        out
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_entries(|z| -z)
    }
}

/// Which self-adjoint square to form from an algebra element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatMode {
    /// `a a*`
    Left,
    /// `a* a`
    Right,
    /// `(a a* + a* a) / 2`
    Avg,
}

/// The positive element `â` built from `a`.
pub fn hat(a: &AlgebraElement, mode: HatMode) -> AlgebraElement {
    let adj = a.adjoint();
    match mode {
        HatMode::Left => a * &adj,
        HatMode::Right => &adj * a,
        HatMode::Avg => (&(a * &adj) + &(&adj * a)).scale_real(0.5),
    }
}

/// An element `U` of the unitary group, `||UU* - I||_F <= 1e-10`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraElement", into = "AlgebraElement")]
pub struct Unitary(AlgebraElement);

impl TryFrom<AlgebraElement> for Unitary {
    type Error = Error;
    fn try_from(a: AlgebraElement) -> Result<Self> {
        Unitary::new(a)
    }
}

impl From<Unitary> for AlgebraElement {
    fn from(u: Unitary) -> Self {
        u.0
    }
}

impl Unitary {
    pub fn new(a: AlgebraElement) -> Result<Self> {
        let defect = unitarity_defect(&a);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(a))
    }

    pub fn identity(k: usize) -> Self {
        Self(AlgebraElement::identity(k))
    }

    pub fn as_element(&self) -> &AlgebraElement {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }
}

/// `||U U* - I||_F`.
pub fn unitarity_defect(a: &AlgebraElement) -> f64 {
    (&(a * &a.adjoint()) - &AlgebraElement::identity(a.k)).frobenius_norm()
}

/// Haar-distributed element of `U(k)`, deterministic in `seed`.
pub fn sample_unitary(k: usize, seed: u64) -> Unitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary(k, Field::Complex, &mut rng)
}

/// Haar-distributed element of `U(k)` (complex field) or `O(k)` (real field).
///
/// Columns of a Gaussian matrix are orthonormalised by Gram-Schmidt (two
/// passes). Gram-Schmidt yields a triangular factor with positive real
/// diagonal, which is the phase normalisation that makes the result Haar.
pub fn haar_unitary<R: Rng + ?Sized>(k: usize, field: Field, rng: &mut R) -> Unitary {
    assert!(k >= 1, "algebra dimension must be at least 1");
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = match field {
                            Field::Real => 0.0,
                            Field::Complex => rng.sample(StandardNormal),
                        };
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        let mut degenerate = false;
        for j in 0..k {
            for _pass in 0..2 {
                for i in 0..j {
                    let proj: Complex64 = (0..k).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                    for r in 0..k {
                        let delta = proj * cols[i][r];
                        cols[j][r] -= delta;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        if degenerate {
            continue;
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); k * k];
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                entries[i * k + j] = *z;
            }
        }
        let a = AlgebraElement { k, entries };
        if let Ok(u) = Unitary::new(a) {
            return u;
        }
    }
}

/// A point of the rank-`d` module `M_k(C)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AlgebraElement>", into = "Vec<AlgebraElement>")]
pub struct ModulePoint {
    coords: Vec<AlgebraElement>,
}

impl TryFrom<Vec<AlgebraElement>> for ModulePoint {
    type Error = Error;
    fn try_from(coords: Vec<AlgebraElement>) -> Result<Self> {
        ModulePoint::new(coords)
    }
}

impl From<ModulePoint> for Vec<AlgebraElement> {
    fn from(p: ModulePoint) -> Self {
        p.coords
    }
}

/// Rank, algebra dimension and field of a family of module points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointShape {
    pub rank: usize,
    pub k: usize,
    #[serde(default)]
    pub field: Field,
}

impl PointShape {
    pub fn real(rank: usize) -> Self {
        Self {
            rank,
            k: 1,
            field: Field::Real,
        }
    }

    pub fn complex(rank: usize, k: usize) -> Self {
        Self {
            rank,
            k,
            field: Field::Complex,
        }
    }
}

impl ModulePoint {
    pub fn new(coords: Vec<AlgebraElement>) -> Result<Self> {
        let Some(first) = coords.first() else {
            return Err(invalid("coords", "a module point needs at least one coordinate"));
        };
        let k = first.k;
        if let Some(bad) = coords.iter().find(|c| c.k != k) {
            return Err(mismatch(format!("k = {k}"), format!("k = {}", bad.k)));
        }
        Ok(Self { coords })
    }

    pub fn zeros(rank: usize, k: usize) -> Self {
        Self {
            coords: vec![AlgebraElement::zeros(k); rank],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.rank(), self.k())
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        Self {
            coords: xs.iter().map(|x| AlgebraElement::real(*x)).collect(),
        }
    }

    pub fn from_scalars(zs: &[Complex64]) -> Self {
        Self {
            coords: zs.iter().map(|z| AlgebraElement::scalar(*z)).collect(),
        }
    }

    pub fn single(a: AlgebraElement) -> Self {
        Self { coords: vec![a] }
    }

    /// Unit vector `e_i` (identity in slot `i`).
    pub fn basis(rank: usize, k: usize, i: usize) -> Self {
        let mut p = Self::zeros(rank, k);
        p.coords[i] = AlgebraElement::identity(k);
        p
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.coords[0].k
    }

    pub fn coords(&self) -> &[AlgebraElement] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &AlgebraElement {
        &self.coords[i]
    }

    /// Real parts of `k = 1` coordinates.
    pub fn real_parts(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.entry(0, 0).re).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rank() == other.rank() && self.k() == other.k()
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(mismatch(
                format!("rank {} over M_{}", self.rank(), self.k()),
                format!("rank {} over M_{}", other.rank(), other.k()),
            ))
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a.scale_real(c)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Module action `u x`, left multiplication in every coordinate.
    pub fn left_mul(&self, u: &AlgebraElement) -> Self {
        Self {
            coords: self.coords.iter().map(|a| u * a).collect(),
        }
    }

    /// `u b u*` in every coordinate.
    pub fn conjugate_by(&self, u: &AlgebraElement) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a.conjugate_by(u)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a.adjoint()).collect(),
        }
    }

    /// Euclidean length of the vector of coordinate Frobenius norms.
    pub fn frobenius_norm(&self) -> f64 {
        self.coords
            .iter()
            .map(|a| a.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords
            .iter()
            .all(|a| a.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// `sum_i c_i x_i` for integer coefficients; all points must share a shape.
    pub fn linear_combination(coeffs: &[i64], points: &[ModulePoint]) -> Result<Self> {
        if coeffs.len() != points.len() {
            return Err(mismatch(points.len(), coeffs.len()));
        }
        let first = points.first().ok_or(Error::Empty("point list"))?;
        let mut acc = first.zeros_like();
        for (c, p) in coeffs.iter().zip(points) {
            first.ensure_same_shape(p)?;
            if *c != 0 {
                acc = &acc + &p.scale_real(*c as f64);
            }
        }
        Ok(acc)
    }

    pub(crate) fn concat(parts: Vec<ModulePoint>) -> Result<Self> {
        Self::new(parts.into_iter().flat_map(|p| p.coords).collect())
    }
}

impl Add for &ModulePoint {
    type Output = ModulePoint;
    fn add(self, rhs: &ModulePoint) -> ModulePoint {
        assert!(self.same_shape(rhs), "module point shape mismatch");
        ModulePoint {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ModulePoint {
    type Output = ModulePoint;
    fn sub(self, rhs: &ModulePoint) -> ModulePoint {
        assert!(self.same_shape(rhs), "module point shape mismatch");
        ModulePoint {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ModulePoint {
    type Output = ModulePoint;
    fn neg(self) -> ModulePoint {
        self.scale_real(-1.0)
    }
}

fn fmt_complex(z: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if z.im == 0.0 {
        write!(f, "{}", z.re)
    } else {
        write!(f, "{}{:+}i", z.re, z.im)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            return fmt_complex(self.entries[0], f);
        }
        write!(f, "[")?;
        for i in 0..self.k {
            if i > 0 {
                write!(f, "|")?;
            }
            for j in 0..self.k {
                if j > 0 {
                    write!(f, " ")?;
                }
                fmt_complex(self.entry(i, j), f)?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for ModulePoint {
    /// `(c1;c2;...)`; used verbatim in result CSVs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
