//! Brute-force ground truth for small instances.
//!
//! Every normalized unit of `Z/p^e [G]` is enumerated, its order measured by
//! repeated p-th powering, and the abelian invariants of `V` are recovered
//! from the order census. The checks in [`checks`] compare these observations
//! with the closed forms in [`crate::theory`].

pub mod checks;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::{checked_pow, exact_log, Residue};
use crate::ring::{GroupRing, PowerEngine, RingElement, RingSpec};
use crate::theory::AbelianInvariants;

pub use checks::{verify_check, CheckId, CheckParams, Verdict, VerificationReport, Verifier};

/// Default cap on the number of units an enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Upper bound on the number of contiguous index blocks handed to workers.
const MAX_BLOCKS: u64 = 256;

/// Number of elements of each exact order `p^k`, keyed by `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderHistogram {
    pub counts: BTreeMap<u32, u64>,
}

impl OrderHistogram {
    pub fn record(&mut self, order_exp: u32) {
        *self.counts.entry(order_exp).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &OrderHistogram) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of elements of order dividing `p^i`.
    pub fn cumulative(&self, i: u32) -> u64 {
        self.counts.range(..=i).map(|(_, c)| c).sum()
    }

    pub fn max_order_exp(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

/// Recovers the invariants of a finite abelian p-group from its order census.
///
/// With `ℓ_i = log_p #{x : x^{p^i} = 1}`, the multiplicity of `C_{p^i}` is
/// `2ℓ_i - ℓ_{i-1} - ℓ_{i+1}`.
pub fn invariants_from_histogram(h: &OrderHistogram, p: u64) -> Result<AbelianInvariants> {
    if h.counts.get(&0) != Some(&1) {
        return Err(Error::Inconsistent(
            "census must contain exactly one identity".into(),
        ));
    }
    let top = h.max_order_exp();
    let ell = (0..=top + 1)
        .map(|i| {
            let n = h.cumulative(i);
            exact_log(n, p).map(|v| v as i64).ok_or_else(|| {
                Error::Inconsistent(format!(
                    "{n} elements of order | {p}^{i} is not a power of {p}"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 1..=top as usize {
        let m = 2 * ell[i] - ell[i - 1] - ell[i + 1];
        if m < 0 {
            return Err(Error::Inconsistent(format!(
                "negative multiplicity {m} for order {p}^{i}"
            )));
        }
        pairs.push((i as u32, m as u64));
    }
    Ok(AbelianInvariants::from_pairs(pairs))
}

/// `log_p |V|` after checking it against the budget.
pub fn enumeration_size(rs: &RingSpec, budget: u64) -> Result<u64> {
    let exp = rs.unit_group_order_exp()?;
    match checked_pow(rs.p(), exp) {
        Some(total) if total <= budget => Ok(total),
        _ => Err(Error::BudgetExceeded {
            base: rs.p(),
            exp,
            budget,
        }),
    }
}

/// Writes the unit with enumeration index `index` into `out`.
///
/// The non-identity coefficients are the base-`p^e` digits of `index`
/// (last position fastest); the identity coefficient restores augmentation 1.
fn decode_unit(ring: &GroupRing, mut index: u64, out: &mut [u64]) {
    let q = ring.modulus();
    let mut sum = 0;
    for c in out[1..].iter_mut().rev() {
        *c = index % q;
        index /= q;
        sum = (sum + *c) % q;
    }
    out[0] = (1 + q - sum) % q;
}

/// Advances `x` to the next unit in enumeration order.
#[inline]
fn advance_unit(q: u64, x: &mut [u64]) {
    let n = x.len();
    let mut j = n - 1;
    loop {
        if j == 0 {
            return;
        }
        x[j] += 1;
        x[0] = (x[0] + q - 1) % q;
        if x[j] < q {
            return;
        }
        // digit wrapped from q to 0: the augmentation dropped by q
        x[j] = 0;
        j -= 1;
    }
}

/// All normalized units in enumeration order.
pub fn enumerate_units<T: Residue>(
    rs: &RingSpec,
    budget: u64,
) -> Result<impl Iterator<Item = RingElement<T>>> {
    let total = enumeration_size(rs, budget)?;
    let ring = GroupRing::new(rs.clone())?;
    if T::max_modulus() < ring.modulus() {
        return Err(Error::ResidueTooNarrow(ring.modulus() - 1));
    }
    let mut x = vec![0; ring.dim()];
    decode_unit(&ring, 0, &mut x);
    Ok((0..total).map(move |i| {
        if i > 0 {
            advance_unit(ring.modulus(), &mut x);
        }
        RingElement::from_raw(Arc::clone(&ring), &x)
    }))
}

/// Folds a visitor over every unit, split into contiguous index blocks.
///
/// The visitor sees the unit and a scratch copy of it that it may clobber.
///
/// Block results are merged in block order, so the outcome does not depend
/// on `workers` as long as `merge` is associative.
pub(crate) fn fold_units<R, V, M>(
    ring: &Arc<GroupRing>,
    budget: u64,
    workers: usize,
    visit: V,
    merge: M,
) -> Result<R>
where
    R: Default + Send,
    V: Fn(&mut R, &[u64], &mut [u64], &mut PowerEngine<'_>) + Sync,
    M: Fn(&mut R, R),
{
    let total = enumeration_size(ring.spec(), budget)?;
    let blocks = total.clamp(1, MAX_BLOCKS);
    let bounds = |b: u64| (total * b / blocks, total * (b + 1) / blocks);
    let run_block = |b: u64, engine: &mut PowerEngine<'_>| {
        let (start, end) = bounds(b);
        let mut acc = R::default();
        let mut x = vec![0; ring.dim()];
        let mut scratch = vec![0; ring.dim()];
        decode_unit(ring, start, &mut x);
        for i in start..end {
            if i > start {
                advance_unit(ring.modulus(), &mut x);
            }
            scratch.copy_from_slice(&x);
            visit(&mut acc, &x, &mut scratch, engine);
        }
        acc
    };

    let mut results: Vec<Option<R>> = (0..blocks).map(|_| None).collect();
    if workers <= 1 {
        let mut engine = PowerEngine::new(ring);
        for (b, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_block(b as u64, &mut engine));
        }
    } else {
        let next = AtomicUsize::new(0);
        let slots = Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..workers.min(blocks as usize) {
                scope.spawn(|| {
                    let mut engine = PowerEngine::new(ring);
                    loop {
                        let b = next.fetch_add(1, Ordering::Relaxed);
                        if b >= blocks as usize {
                            break;
                        }
                        let r = run_block(b as u64, &mut engine);
                        slots.lock().expect("worker panicked")[b] = Some(r);
                    }
                });
            }
        });
    }
    let mut out = R::default();
    for r in results {
        merge(&mut out, r.expect("every block is visited"));
    }
    Ok(out)
}

/// One pass over `V` collecting everything the unit-level checks need.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Census {
    pub histogram: OrderHistogram,
    /// Exact-order-p units not congruent to an element of `G[p]` mod `p^{e-1}`.
    pub nonconforming: u64,
    pub first_nonconforming: Option<Vec<u64>>,
    /// Units congruent to 1 mod `p^{e-1}` (only counted for `e >= 2`).
    pub kernel: u64,
    /// Kernel elements whose order exceeds `p`.
    pub kernel_non_elementary: u64,
}

impl Census {
    fn merge(&mut self, other: Census) {
        self.histogram.merge(&other.histogram);
        self.nonconforming += other.nonconforming;
        if self.first_nonconforming.is_none() {
            self.first_nonconforming = other.first_nonconforming;
        }
        self.kernel += other.kernel;
        self.kernel_non_elementary += other.kernel_non_elementary;
    }
}

/// Index of the group element a vector reduces to mod `p^{e-1}`, if it is one.
fn reduces_to_group_element(x: &[u64], modulus: u64) -> Option<usize> {
    let mut found = None;
    for (i, &c) in x.iter().enumerate() {
        match c % modulus {
            0 => {}
            1 if found.is_none() => found = Some(i),
            _ => return None,
        }
    }
    found
}

pub fn census(ring: &Arc<GroupRing>, budget: u64, workers: usize) -> Result<Census> {
    let e = ring.e();
    let lower = ring.p().pow(e.saturating_sub(1));
    let group = ring.group();
    let order_p: Vec<bool> = group
        .enumerate_elements()
        .map(|g| group.element_order_exp(&g) <= 1)
        .collect();
    let visit = |acc: &mut Census, unit: &[u64], work: &mut [u64], engine: &mut PowerEngine<'_>| {
        let k = engine
            .order_exp_memo(work)
            .expect("normalized units have p-power order");
        acc.histogram.record(k);
        if e < 2 {
            return;
        }
        if k == 1 && !reduces_to_group_element(unit, lower).is_some_and(|i| order_p[i]) {
            acc.nonconforming += 1;
            acc.first_nonconforming.get_or_insert_with(|| unit.to_vec());
        }
        if reduces_to_group_element(unit, lower) == Some(0) {
            acc.kernel += 1;
            if k > 1 {
                acc.kernel_non_elementary += 1;
            }
        }
    };
    fold_units(ring, budget, workers, visit, Census::merge)
}

/// Order census of `V(Z/p^e [G])`.
pub fn order_histogram(rs: &RingSpec, budget: u64, workers: usize) -> Result<OrderHistogram> {
    let ring = GroupRing::new(rs.clone())?;
    let visit =
        |h: &mut OrderHistogram, _: &[u64], work: &mut [u64], engine: &mut PowerEngine<'_>| {
            h.record(
                engine
                    .order_exp_memo(work)
                    .expect("normalized units have p-power order"),
            );
        };
    fold_units(&ring, budget, workers, visit, |a, b| a.merge(&b))
}
