//! Functional equations instantiated over `F_q^d` as linear constraints on the
//! value table of an unknown `f: F_q^d -> F_q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::field;
use super::group::GroupSpec;
use crate::equation::EquationSpec;
use crate::error::{Error, Result};

/// Tuple count above which the rows are subsampled.
pub const FULL_ENUMERATION_LIMIT: u128 = 1_000_000;
/// Number of random tuples drawn when subsampling.
pub const SUBSAMPLE_TUPLES: usize = 1_000_000;
pub const SUBSAMPLE_SEED: u64 = 0x005e_edf3;

/// Named integer constants that must be units mod `q` for the equivalence with
/// `fe1` to survive reduction mod `q`.
///
/// For `fe3_0(a)` the chain `b = 2..|a|-1` is charged with the factors that
/// the induction step from `b` to `b + 1` divides by; `fe3(n)` reduces to
/// `fe3_0(n - 1)` after dividing by `n` and `n - 1`.
pub fn obstruction_constants(eq: &EquationSpec) -> Vec<(String, i64)> {
    fn chain(a: i64, out: &mut Vec<(String, i64)>) {
        let a = a.abs();
        if a == 0 {
            return;
        }
        out.push(("3".into(), 3));
        out.push(("a-1".into(), a - 1));
        out.push(("a+1".into(), a + 1));
        for b in 2..a {
            out.push((format!("b-1 (b={b})"), b - 1));
            out.push((format!("b+1 (b={b})"), b + 1));
            out.push((format!("2b-1 (b={b})"), 2 * b - 1));
            out.push((format!("2b+1 (b={b})"), 2 * b + 1));
            out.push((format!("3b^2-3b+12 (b={b})"), 3 * b * b - 3 * b + 12));
        }
    }
    let mut out = vec![("2".to_string(), 2)];
    match *eq {
        EquationSpec::Fe1 | EquationSpec::Homogeneity { .. } => {}
        EquationSpec::Fe2 => out.push(("3".into(), 3)),
        EquationSpec::Fe3Zero { a } => chain(a, &mut out),
        EquationSpec::Fe3 { n } => {
            out.push(("n".into(), n as i64));
            out.push(("n-1".into(), n as i64 - 1));
            chain(n as i64 - 1, &mut out);
        }
    }
    out
}

/// Rejects `(eq, group)` when `q` divides an obstruction constant.
pub fn check_admissible(eq: &EquationSpec, group: &GroupSpec) -> Result<()> {
    eq.validate()?;
    let q = group.q() as i64;
    for (name, c) in obstruction_constants(eq) {
        if c % q == 0 {
            return Err(Error::Inadmissible {
                q: group.q(),
                equation: eq.to_string(),
                name,
                constant: c,
            });
        }
    }
    Ok(())
}

/// Sparse rows over `F_q` in compressed-row form, one row per instantiated
/// tuple, one column per group element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintMatrix {
    group: GroupSpec,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<u32>,
    subsampled: bool,
}

impl ConstraintMatrix {
    pub fn from_rows(group: GroupSpec, rows: &[Vec<(u32, u32)>]) -> Self {
        let mut m = Self {
            group,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            subsampled: false,
        };
        let mut scratch = Vec::new();
        for r in rows {
            scratch.clear();
            scratch.extend(r.iter().map(|(c, v)| (*c, *v as i64)));
            m.push_merged(&mut scratch);
        }
        m
    }

    /// A matrix with no constraints.
    pub fn empty(group: GroupSpec) -> Self {
        Self::from_rows(group, &[])
    }

    fn push_merged(&mut self, row: &mut [(u32, i64)]) {
        let q = self.group.q();
        row.sort_unstable_by_key(|e| e.0);
        let mut i = 0;
        while i < row.len() {
            let col = row[i].0;
            let mut acc = 0i64;
            while i < row.len() && row[i].0 == col {
                acc += row[i].1;
                i += 1;
            }
            let v = field::reduce(acc, q);
            if v != 0 {
                self.cols.push(col);
                self.vals.push(v);
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    fn append(&mut self, other: ConstraintMatrix) {
        let base = self.cols.len();
        self.row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + base));
        self.cols.extend(other.cols);
        self.vals.extend(other.vals);
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn columns(&self) -> usize {
        self.group.order()
    }

    pub fn is_subsampled(&self) -> bool {
        self.subsampled
    }

    /// Nonzero `(column, value)` pairs of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(c, v)| (*c as usize, *v))
    }

    /// Dense form of row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<u32> {
        let mut out = vec![0; self.columns()];
        for (c, v) in self.row(i) {
            out[c] = v;
        }
        out
    }

    /// `M f == 0`.
    pub fn annihilates(&self, table: &[u32]) -> bool {
        self.first_violated_row(table).is_none()
    }

    pub fn first_violated_row(&self, table: &[u32]) -> Option<usize> {
        let q = self.group.q();
        (0..self.rows()).find(|&i| {
            let s: u64 = self.row(i).map(|(c, v)| v as u64 * table[c] as u64 % q).sum();
            !s.is_multiple_of(q)
        })
    }
}

/// Tuples of group-element indices, stored flat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    arity: usize,
    flat: Vec<u32>,
    subsampled: bool,
}

impl TupleSet {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn is_subsampled(&self) -> bool {
        self.subsampled
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.flat[i * self.arity..(i + 1) * self.arity]
    }
}

/// Every tuple in `G^arity` when there are at most
/// [`FULL_ENUMERATION_LIMIT`] of them. Otherwise the structured tuples
/// `(x, y, 0, ..)`, `(x, .., x, 0)` and every one-hot tuple, followed by
/// [`SUBSAMPLE_TUPLES`] tuples from a ChaCha8 stream seeded with
/// [`SUBSAMPLE_SEED`].
pub fn constraint_tuples(arity: usize, group: &GroupSpec) -> TupleSet {
    let g = group.order();
    let total = (g as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
    if total <= FULL_ENUMERATION_LIMIT {
        let mut flat = Vec::with_capacity(total as usize * arity);
        for mut idx in 0..total as usize {
            let at = flat.len();
            flat.resize(at + arity, 0);
            for slot in flat[at..].iter_mut().rev() {
                *slot = (idx % g) as u32;
                idx /= g;
            }
        }
        return TupleSet {
            arity,
            flat,
            subsampled: false,
        };
    }
    let mut flat = Vec::with_capacity((g * g + g * (arity + 1) + SUBSAMPLE_TUPLES) * arity);
    let mut push = |t: &mut dyn Iterator<Item = u32>| flat.extend(t);
    for x in 0..g as u32 {
        for y in 0..g as u32 {
            push(&mut [x, y].into_iter().chain(std::iter::repeat_n(0, arity - 2)));
        }
    }
    for x in 0..g as u32 {
        push(&mut std::iter::repeat_n(x, arity - 1).chain([0]));
    }
    for i in 0..arity {
        for x in 0..g as u32 {
            push(&mut (0..arity).map(|j| if j == i { x } else { 0 }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SUBSAMPLE_SEED);
    for _ in 0..SUBSAMPLE_TUPLES * arity {
        flat.push(rng.random_range(0..g as u32));
    }
    TupleSet {
        arity,
        flat,
        subsampled: true,
    }
}

/// One row per tuple; see [`constraint_tuples`] for the tuple set.
pub fn enumerate_constraints(eq: &EquationSpec, group: &GroupSpec) -> Result<ConstraintMatrix> {
    check_admissible(eq, group)?;
    let q = group.q();
    let (d, order) = (group.d(), group.order());
    let terms: Vec<(i64, Vec<u64>)> = eq
        .terms()
        .into_iter()
        .map(|t| (t.coeff, t.args.iter().map(|a| field::reduce(*a, q) as u64).collect()))
        .collect();
    let coords: Vec<u64> = (0..order)
        .flat_map(|i| group.coords(i).into_iter().map(u64::from))
        .collect();
    let tuples = constraint_tuples(eq.arity(), group);

    const CHUNK: usize = 1 << 14;
    let chunks: Vec<ConstraintMatrix> = (0..tuples.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut part = ConstraintMatrix::empty(*group);
            let mut row = Vec::with_capacity(terms.len());
            for i in c * CHUNK..((c + 1) * CHUNK).min(tuples.len()) {
                let t = tuples.get(i);
                row.clear();
                for (coeff, args) in &terms {
                    let mut idx = 0u64;
                    for k in 0..d {
                        let mut digit = 0u64;
                        for (a, x) in args.iter().zip(t) {
                            digit += a * coords[*x as usize * d + k];
                        }
                        idx = idx * q + digit % q;
                    }
                    row.push((idx as u32, *coeff));
                }
                part.push_merged(&mut row);
            }
            part
        })
        .collect();
    let mut m = ConstraintMatrix::empty(*group);
    m.subsampled = tuples.is_subsampled();
    for part in chunks {
        m.append(part);
    }
    Ok(m)
}
