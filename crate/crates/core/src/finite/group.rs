use serde::{Deserialize, Serialize};

use super::field;
use crate::error::{invalid, Result};

/// Largest group order handled by dense elimination.
pub const MAX_COLUMNS: u64 = 10_000;

/// The additive group of `F_q^d`. Elements are indexed `0..q^d` with the
/// first coordinate most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroup", into = "RawGroup")]
pub struct GroupSpec {
    q: u64,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGroup {
    q: u64,
    d: usize,
}

impl TryFrom<RawGroup> for GroupSpec {
    type Error = crate::error::Error;
    fn try_from(r: RawGroup) -> Result<Self> {
        GroupSpec::new(r.q, r.d)
    }
}

impl From<GroupSpec> for RawGroup {
    fn from(g: GroupSpec) -> Self {
        RawGroup { q: g.q, d: g.d }
    }
}

impl GroupSpec {
    pub fn new(q: u64, d: usize) -> Result<Self> {
        if !field::is_prime(q) {
            return Err(invalid("q", format!("{q} is not prime")));
        }
        if q < 5 {
            return Err(invalid("q", format!("need q >= 5, got {q}")));
        }
        if d == 0 {
            return Err(invalid("d", "rank must be at least 1"));
        }
        match q.checked_pow(d as u32) {
            Some(order) if order <= MAX_COLUMNS => Ok(Self { q, d }),
            _ => Err(invalid(
                "d",
                format!("q^d exceeds the dense elimination limit of {MAX_COLUMNS}"),
            )),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `q^d`.
    pub fn order(&self) -> usize {
        self.q.pow(self.d as u32) as usize
    }

    pub fn coords(&self, mut idx: usize) -> Vec<u32> {
        let q = self.q as usize;
        let mut out = vec![0u32; self.d];
        for c in out.iter_mut().rev() {
            *c = (idx % q) as u32;
            idx /= q;
        }
        out
    }

    pub fn index(&self, coords: &[u32]) -> usize {
        coords
            .iter()
            .fold(0usize, |acc, c| acc * self.q as usize + *c as usize)
    }

    /// `sum_i coeffs[i] * elems[i]`, as an index.
    pub fn combine(&self, coeffs: &[i64], elems: &[usize]) -> usize {
        let q = self.q as usize;
        let mut out = 0usize;
        let mut stride = 1usize;
        let mut rem: Vec<usize> = elems.to_vec();
        let reduced: Vec<u64> = coeffs.iter().map(|c| field::reduce(*c, self.q) as u64).collect();
        for _ in 0..self.d {
            let mut digit = 0u64;
            for (r, c) in rem.iter_mut().zip(&reduced) {
                digit += (*r % q) as u64 * c;
                *r /= q;
            }
            out += (digit % self.q) as usize * stride;
            stride *= q;
        }
        out
    }

    pub fn neg(&self, x: usize) -> usize {
        self.combine(&[-1], &[x])
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        self.combine(&[1, 1], &[x, y])
    }

    pub fn scale(&self, lambda: i64, x: usize) -> usize {
        self.combine(&[lambda], &[x])
    }
}
