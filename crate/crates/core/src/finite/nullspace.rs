//! Exact elimination over `F_q` and the function tables it produces.

use serde::{Deserialize, Serialize};

use super::constraints::ConstraintMatrix;
use super::field;
use super::group::GroupSpec;
use crate::error::{mismatch, Result};

/// A function `F_q^d -> F_q` stored as its value table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionVector {
    group: GroupSpec,
    table: Vec<u32>,
}

impl FunctionVector {
    pub fn new(group: GroupSpec, table: Vec<u32>) -> Result<Self> {
        if table.len() != group.order() {
            return Err(mismatch(group.order(), table.len()));
        }
        let q = group.q();
        let table = table.into_iter().map(|v| (v as u64 % q) as u32).collect();
        Ok(Self { group, table })
    }

    /// Tabulates `f` on every group element, given by its coordinates.
    pub fn from_fn(group: GroupSpec, f: impl Fn(&[u32]) -> i64) -> Self {
        let table = (0..group.order())
            .map(|i| field::reduce(f(&group.coords(i)), group.q()))
            .collect();
        Self { group, table }
    }

    pub fn zero(group: GroupSpec) -> Self {
        Self {
            group,
            table: vec![0; group.order()],
        }
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn at(&self, idx: usize) -> u32 {
        self.table[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|v| *v == 0)
    }

    /// `f(-x) = f(x)` everywhere.
    pub fn is_even(&self) -> bool {
        (0..self.table.len()).all(|x| self.table[self.group.neg(x)] == self.table[x])
    }

    /// `f(lambda x) = lambda^degree f(x)` everywhere.
    pub fn scales_as(&self, lambda: i64, degree: u32) -> bool {
        let q = self.group.q();
        let factor = field::pow(field::reduce(lambda, q), degree as u64, q);
        (0..self.table.len()).all(|x| {
            self.table[self.group.scale(lambda, x)] == field::mul(factor, self.table[x], q)
        })
    }

    /// `B(x, y) = (f(x + y) - f(x - y)) / 4`.
    pub fn polarize(&self, x: usize, y: usize) -> u32 {
        let q = self.group.q();
        let g = &self.group;
        let diff = field::sub(
            self.table[g.add(x, y)],
            self.table[g.combine(&[1, -1], &[x, y])],
            q,
        );
        field::mul(diff, field::inv(4, q), q)
    }
}

/// Incremental row reduction. Pivot rows are kept fully reduced, so each
/// stored row holds its unit pivot implicitly plus entries on free columns.
#[derive(Debug, Clone)]
pub struct Eliminator {
    q: u64,
    columns: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<PivotRow>,
    scratch: Vec<u32>,
    touched: Vec<usize>,
    is_touched: Vec<bool>,
}

#[derive(Debug, Clone)]
struct PivotRow {
    pivot: usize,
    entries: Vec<(usize, u32)>,
}

impl Eliminator {
    pub fn new(q: u64, columns: usize) -> Self {
        Self {
            q,
            columns,
            pivot_row: vec![None; columns],
            rows: Vec::new(),
            scratch: vec![0; columns],
            touched: Vec::new(),
            is_touched: vec![false; columns],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn nullity(&self) -> usize {
        self.columns - self.rank()
    }

    fn touch(&mut self, c: usize) {
        if !self.is_touched[c] {
            self.is_touched[c] = true;
            self.touched.push(c);
        }
    }

    /// Adds one row; returns whether the rank grew.
    pub fn push_row(&mut self, row: impl IntoIterator<Item = (usize, u32)>) -> bool {
        let q = self.q;
        if self.nullity() == 0 {
            return false;
        }
        for (c, v) in row {
            self.scratch[c] = field::add(self.scratch[c], v, q);
            self.touch(c);
        }
        // Subtracting a pivot row only adds free columns, so one pass over
        // the original support clears every pivot.
        let support = self.touched.len();
        for t in 0..support {
            let c = self.touched[t];
            let coef = self.scratch[c];
            if coef == 0 {
                continue;
            }
            if let Some(r) = self.pivot_row[c] {
                self.scratch[c] = 0;
                for e in 0..self.rows[r].entries.len() {
                    let (j, v) = self.rows[r].entries[e];
                    self.scratch[j] = field::sub(self.scratch[j], field::mul(coef, v, q), q);
                    self.touch(j);
                }
            }
        }
        let mut entries: Vec<(usize, u32)> = self
            .touched
            .iter()
            .filter(|c| self.scratch[**c] != 0)
            .map(|c| (*c, self.scratch[*c]))
            .collect();
        for c in self.touched.drain(..) {
            self.scratch[c] = 0;
            self.is_touched[c] = false;
        }
        if entries.is_empty() {
            return false;
        }
        entries.sort_unstable_by_key(|e| e.0);
        let (pivot, lead) = entries[0];
        let scale = field::inv(lead, q);
        let entries: Vec<(usize, u32)> = entries[1..]
            .iter()
            .map(|(c, v)| (*c, field::mul(*v, scale, q)))
            .collect();
        for r in &mut self.rows {
            if let Ok(pos) = r.entries.binary_search_by_key(&pivot, |e| e.0) {
                let coef = r.entries.remove(pos).1;
                r.entries = axpy(&r.entries, &entries, q - coef as u64, q);
            }
        }
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push(PivotRow { pivot, entries });
        true
    }

    pub fn push_matrix(&mut self, m: &ConstraintMatrix) {
        for i in 0..m.rows() {
            self.push_row(m.row(i));
        }
    }

    /// Basis of the solution space, one vector per free column in increasing
    /// order, each scaled so its first nonzero entry is 1.
    pub fn nullspace(&self) -> Vec<Vec<u32>> {
        let q = self.q;
        let free: Vec<usize> = (0..self.columns)
            .filter(|c| self.pivot_row[*c].is_none())
            .collect();
        let mut basis: Vec<Vec<u32>> = free
            .iter()
            .map(|f| {
                let mut v = vec![0u32; self.columns];
                v[*f] = 1;
                v
            })
            .collect();
        let slot: std::collections::HashMap<usize, usize> =
            free.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        for r in &self.rows {
            for (c, v) in &r.entries {
                basis[slot[c]][r.pivot] = field::sub(0, *v, q);
            }
        }
        for v in &mut basis {
            let lead = *v.iter().find(|x| **x != 0).expect("free column is set");
            let s = field::inv(lead, q);
            for x in v.iter_mut() {
                *x = field::mul(*x, s, q);
            }
        }
        basis
    }
}

/// `a + coef * b` for sorted sparse rows.
fn axpy(a: &[(usize, u32)], b: &[(usize, u32)], coef: u64, q: u64) -> Vec<(usize, u32)> {
    let coef = (coef % q) as u32;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (c, v) = if take_a {
            i += 1;
            a[i - 1]
        } else if take_b {
            j += 1;
            (b[j - 1].0, field::mul(coef, b[j - 1].1, q))
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, field::add(a[i - 1].1, field::mul(coef, b[j - 1].1, q), q))
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    out
}

/// Basis of `{f : M f = 0}`.
pub fn nullspace_basis(m: &ConstraintMatrix) -> Vec<FunctionVector> {
    let group = m.group();
    let mut e = Eliminator::new(group.q(), m.columns());
    e.push_matrix(m);
    e.nullspace()
        .into_iter()
        .map(|table| FunctionVector { group, table })
        .collect()
}
