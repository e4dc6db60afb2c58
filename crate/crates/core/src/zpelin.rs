//! Row spans over `Z/p^e`: Howell normal form, membership and module sizes.
//!
//! Over a ring with zero divisors an echelon form alone does not decide
//! membership. The Howell form adds the annihilated multiple `p^{e-v}·row` of
//! every pivot row back into the pool, so that every span element vanishing on
//! the first `c` columns is spanned by the rows whose pivots lie beyond `c`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pgroup::GroupElement;
use crate::residue::{valuation, Residue};
use crate::ring::{unit_inverse_mod, GroupRing, RingElement, RingSpec};

/// A rectangular matrix with entries in `Z/p^e`, read as a list of row vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueMatrix<T: Residue = u32> {
    p: u64,
    e: u32,
    ncols: usize,
    rows: Vec<Vec<T>>,
}

impl<T: Residue> ResidueMatrix<T> {
    pub fn new(p: u64, e: u32, ncols: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        if !crate::residue::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::ZeroCharacteristic);
        }
        let q = crate::residue::checked_pow(p, e as u64)
            .filter(|&q| q <= T::max_modulus())
            .ok_or(Error::ModulusTooLarge { base: p, exp: e })?;
        for row in &rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            if let Some(c) = row.iter().find(|c| c.as_u64() >= q) {
                return Err(Error::InvalidElement(format!(
                    "entry {c} not reduced mod {q}"
                )));
            }
        }
        Ok(Self { p, e, ncols, rows })
    }

    /// Rows are the coefficient vectors of the given ring elements.
    pub fn from_elements(ring: &GroupRing, elements: &[RingElement<T>]) -> Result<Self> {
        let rows = elements.iter().map(|x| x.coeffs().to_vec()).collect();
        Self::new(ring.p(), ring.e(), ring.dim(), rows)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    fn modulus(&self) -> u64 {
        self.p.pow(self.e)
    }

    fn raw_rows(&self) -> Vec<Vec<u64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|c| c.as_u64()).collect())
            .collect()
    }

    fn with_raw_rows(&self, rows: Vec<Vec<u64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(T::from_u64).collect())
            .collect();
        Self {
            p: self.p,
            e: self.e,
            ncols: self.ncols,
            rows,
        }
    }

    /// The Howell normal form: same span, echelon, pivots exactly `p^v`,
    /// entries above a pivot reduced below it, and the trailing-span property.
    pub fn howell_form(&self) -> Self {
        self.with_raw_rows(howell_rows(self.p, self.e, self.ncols, self.raw_rows()))
    }

    /// Whether `v` lies in the row span.
    pub fn contains(&self, v: &[T]) -> Result<bool> {
        if v.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: v.len(),
            });
        }
        let v: Vec<u64> = v.iter().map(|c| c.as_u64() % self.modulus()).collect();
        Ok(HowellBasis::from_matrix(self).contains_raw(&v))
    }

    /// `t` with `|span| = p^t`.
    pub fn size_exp(&self) -> u64 {
        HowellBasis::from_matrix(self).size_exp()
    }
}

/// `v` in the row span of `m`.
pub fn module_membership<T: Residue>(v: &[T], m: &ResidueMatrix<T>) -> Result<bool> {
    m.contains(v)
}

/// `log_p` of the size of the row span.
pub fn module_size_exp<T: Residue>(m: &ResidueMatrix<T>) -> u64 {
    m.size_exp()
}

pub fn howell_form<T: Residue>(m: &ResidueMatrix<T>) -> ResidueMatrix<T> {
    m.howell_form()
}

fn subtract_multiple(target: &mut [u64], row: &[u64], f: u64, q: u64) {
    let f = f % q;
    for (t, &r) in target.iter_mut().zip(row) {
        *t = (*t + q - f * r % q) % q;
    }
}

fn howell_rows(p: u64, e: u32, ncols: usize, rows: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    let q = p.pow(e);
    let mut pool: Vec<Vec<u64>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|&c| c != 0))
        .collect();
    let mut out: Vec<(usize, u64, Vec<u64>)> = Vec::new();
    for col in 0..ncols {
        // Leftmost pivot column, minimal valuation, earliest row on ties.
        let best = pool
            .iter()
            .enumerate()
            .filter_map(|(i, r)| valuation(r[col], p).map(|v| (v, i)))
            .min();
        let Some((v, at)) = best else { continue };
        let mut pivot = pool.remove(at);
        let pv = p.pow(v);
        let inv = unit_inverse_mod(pivot[col] / pv, q);
        for c in pivot.iter_mut() {
            *c = *c * inv % q;
        }
        debug_assert_eq!(pivot[col], pv);
        for r in pool.iter_mut() {
            if r[col] != 0 {
                let f = r[col] / pv;
                subtract_multiple(r, &pivot, f, q);
            }
        }
        if v > 0 {
            let scale = p.pow(e - v);
            let ann: Vec<u64> = pivot.iter().map(|&c| c * scale % q).collect();
            pool.push(ann);
        }
        pool.retain(|r| r.iter().any(|&c| c != 0));
        out.push((col, pv, pivot));
    }
    for i in 0..out.len() {
        let (col, pv) = (out[i].0, out[i].1);
        let (above, rest) = out.split_at_mut(i);
        let pivot_row = &rest[0].2;
        for (_, _, row) in above.iter_mut() {
            let f = row[col] / pv;
            if f > 0 {
                subtract_multiple(row, pivot_row, f, q);
            }
        }
    }
    out.into_iter().map(|(_, _, r)| r).collect()
}

/// A Howell basis kept in `u64` form with pivot metadata, for repeated queries.
#[derive(Debug, Clone)]
pub struct HowellBasis {
    p: u64,
    e: u32,
    ncols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<(usize, u32)>,
}

impl HowellBasis {
    pub fn from_matrix<T: Residue>(m: &ResidueMatrix<T>) -> Self {
        Self::from_raw(m.p, m.e, m.ncols, m.raw_rows())
    }

    pub(crate) fn from_raw(p: u64, e: u32, ncols: usize, rows: Vec<Vec<u64>>) -> Self {
        let rows = howell_rows(p, e, ncols, rows);
        let pivots = rows
            .iter()
            .map(|r| {
                let col = r
                    .iter()
                    .position(|&c| c != 0)
                    .expect("Howell rows are nonzero");
                (col, valuation(r[col], p).expect("nonzero pivot"))
            })
            .collect();
        Self {
            p,
            e,
            ncols,
            rows,
            pivots,
        }
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn size_exp(&self) -> u64 {
        self.pivots.iter().map(|&(_, v)| (self.e - v) as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains_raw(&self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.ncols, "vector length must match column count");
        let q = self.p.pow(self.e);
        let mut v = v.to_vec();
        for ((col, val), row) in self.pivots.iter().zip(&self.rows) {
            let pv = self.p.pow(*val);
            if !v[*col].is_multiple_of(pv) {
                return false;
            }
            let f = v[*col] / pv;
            if f > 0 {
                subtract_multiple(&mut v, row, f, q);
            }
        }
        v.iter().all(|&c| c == 0)
    }

    pub fn contains<T: Residue>(&self, x: &RingElement<T>) -> bool {
        self.contains_raw(&x.coeffs_u64())
    }

    pub fn to_matrix<T: Residue>(&self) -> ResidueMatrix<T> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&c| T::from_u64(c)).collect())
            .collect();
        ResidueMatrix {
            p: self.p,
            e: self.e,
            ncols: self.ncols,
            rows,
        }
    }
}

/// Translates of a coefficient vector by every group element: `{h · x : h ∈ G}`.
fn translates(ring: &GroupRing, x: &[u64]) -> Vec<Vec<u64>> {
    let n = ring.dim();
    (0..n)
        .map(|h| {
            let mut out = vec![0; n];
            for (i, &c) in x.iter().enumerate() {
                out[ring.product_index(h, i)] = c;
            }
            out
        })
        .collect()
}

/// Multisets of size `n` drawn from `0..k`, as nondecreasing index lists.
fn multisets(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(k: usize, n: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for j in start..k {
            current.push(j);
            rec(k, n, j, current, out);
            current.pop();
        }
    }
    rec(k, n, 0, &mut current, &mut out);
    out
}

/// A spanning set of `ω^n` as a `Z/p^e`-module: every translate `h·Π(g_i - 1)`
/// over multisets of `n` canonical generators.
pub fn ideal_power_generators(rs: &RingSpec, n: u32) -> Result<ResidueMatrix<u64>> {
    if n == 0 {
        return Err(Error::Domain(
            "ideal power exponent must be positive".into(),
        ));
    }
    let ring = GroupRing::new(rs.clone())?;
    let diffs: Vec<Vec<u64>> = rs
        .group()
        .generators()
        .iter()
        .map(|g| ring.diff::<u64>(g).coeffs_u64())
        .collect();
    let mut rows = Vec::new();
    let mut acc = vec![0; ring.dim()];
    for multiset in multisets(diffs.len(), n as usize) {
        let mut prod = ring.one::<u64>().coeffs_u64();
        for &j in &multiset {
            ring.mul_raw(&prod, &diffs[j], &mut acc);
            std::mem::swap(&mut prod, &mut acc);
        }
        rows.extend(translates(&ring, &prod));
    }
    ResidueMatrix::new(rs.p(), rs.e(), ring.dim(), rows)
}

/// Howell bases of `ω, ω^2, …`, ending with the first zero power.
pub fn ideal_power_chain(ring: &Arc<GroupRing>) -> Vec<HowellBasis> {
    let (p, e, n) = (ring.p(), ring.e(), ring.dim());
    let diffs: Vec<Vec<u64>> = ring
        .group()
        .generators()
        .iter()
        .map(|g| ring.diff::<u64>(g).coeffs_u64())
        .collect();
    let first: Vec<Vec<u64>> = diffs.iter().flat_map(|d| translates(ring, d)).collect();
    let mut chain = vec![HowellBasis::from_raw(p, e, n, first)];
    let mut acc = vec![0; n];
    while !chain.last().expect("chain is nonempty").is_zero() {
        let prev = chain.last().expect("chain is nonempty");
        let mut rows = Vec::with_capacity(prev.rows().len() * diffs.len());
        for b in prev.rows() {
            for d in &diffs {
                ring.mul_raw(b, d, &mut acc);
                rows.push(acc.clone());
            }
        }
        chain.push(HowellBasis::from_raw(p, e, n, rows));
    }
    chain
}

/// Howell basis of the ideal `I(H)` spanned by `g(h - 1)` for `g ∈ G`, `h ∈ H`.
pub fn subgroup_ideal(ring: &Arc<GroupRing>, subgroup: &[GroupElement]) -> HowellBasis {
    let rows: Vec<Vec<u64>> = subgroup
        .iter()
        .flat_map(|h| translates(ring, &ring.diff::<u64>(h).coeffs_u64()))
        .collect();
    HowellBasis::from_raw(ring.p(), ring.e(), ring.dim(), rows)
}
