//! Exact arithmetic in the group ring `Z/p^e [G]`.
//!
//! A [`GroupRing`] holds the shared context (modulus, product index table).
//! [`RingElement`] is a dense coefficient vector indexed in
//! [`GroupSpec::enumerate_elements`] order, generic over the storage word.
//! All arithmetic runs on `u64` kernels; the naive `O(|G|^2)` convolution is
//! the reference semantics.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use strength_reduce::{StrengthReducedU32, StrengthReducedU64};

use crate::error::{Error, Result};
use crate::pgroup::{join, parse_fields, parse_list, parse_num, GroupElement, GroupSpec};
use crate::residue::{checked_pow, inverse_mod, valuation, PPower, Residue};

/// Largest supported coefficient modulus `p^e`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Groups up to this order get a precomputed `|G| × |G|` product table.
const MAX_TABLE_ORDER: usize = 1024;

/// The coefficient ring `Z/p^e` together with the group `G`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRingSpec", into = "RawRingSpec")]
pub struct RingSpec {
    group: GroupSpec,
    e: u32,
}

#[derive(Serialize, Deserialize)]
struct RawRingSpec {
    group: GroupSpec,
    e: u32,
}

impl TryFrom<RawRingSpec> for RingSpec {
    type Error = Error;

    fn try_from(raw: RawRingSpec) -> Result<Self> {
        RingSpec::new(raw.group, raw.e)
    }
}

impl From<RingSpec> for RawRingSpec {
    fn from(rs: RingSpec) -> Self {
        RawRingSpec {
            group: rs.group,
            e: rs.e,
        }
    }
}

impl RingSpec {
    pub fn new(group: GroupSpec, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::ZeroCharacteristic);
        }
        match checked_pow(group.p(), e as u64) {
            Some(q) if q <= MAX_MODULUS => Ok(Self { group, e }),
            _ => Err(Error::ModulusTooLarge {
                base: group.p(),
                exp: e,
            }),
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn p(&self) -> u64 {
        self.group.p()
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// `p^e`.
    pub fn modulus(&self) -> u64 {
        self.p().pow(self.e)
    }

    /// The same group over `Z/p^{e'}`.
    pub fn with_e(&self, e: u32) -> Result<Self> {
        RingSpec::new(self.group.clone(), e)
    }

    /// `log_p |V| = e(|G| - 1)`, refusing groups beyond the materialization cap.
    pub fn unit_group_order_exp(&self) -> Result<u64> {
        Ok(self.e as u64 * (self.group.order()? - 1))
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};e={}", self.group, self.e)
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Parses `p=<prime>;lambda=<list>;e=<int>`.
    fn from_str(s: &str) -> Result<Self> {
        let (rs, coeffs) = parse_ring_text(s)?;
        if coeffs.is_some() {
            return Err(Error::Parse("unexpected `coeffs` in ring spec".into()));
        }
        Ok(rs)
    }
}

fn parse_ring_text(s: &str) -> Result<(RingSpec, Option<Vec<u64>>)> {
    let mut group_fields = Vec::new();
    let mut e = None;
    let mut coeffs = None;
    for (key, value) in parse_fields(s)? {
        match key {
            "e" => e = Some(parse_num(key, value)?),
            "coeffs" => coeffs = Some(parse_list(value)?),
            _ => group_fields.push(format!("{key}={value}")),
        }
    }
    let group: GroupSpec = group_fields.join(";").parse()?;
    let e = e.ok_or_else(|| Error::Parse("missing `e`".into()))?;
    Ok((RingSpec::new(group, e)?, coeffs))
}

/// Shared arithmetic context for one ring `Z/p^e [G]`.
#[derive(Debug)]
pub struct GroupRing {
    spec: RingSpec,
    p: u64,
    q: u64,
    /// `q` prepared for division-free reduction.
    rq: StrengthReducedU64,
    /// Set when every unreduced convolution sum fits in `u32`.
    rq32: Option<StrengthReducedU32>,
    n: usize,
    table: Option<Vec<u32>>,
    /// `quotients[k * n + i]` is the index of `g_k g_i^{-1}`; present with `table`.
    quotients: Option<Vec<u32>>,
    /// Mixed-radix digits of every index, used when there is no table.
    digits: Vec<u32>,
    strides: Vec<usize>,
    lazy: bool,
}

impl GroupRing {
    pub fn new(spec: RingSpec) -> Result<Arc<Self>> {
        let group = spec.group();
        let n = group.order()? as usize;
        let k = group.rank();
        let moduli = group.factor_moduli();
        let mut strides = vec![1usize; k];
        for j in (0..k.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * moduli[j + 1] as usize;
        }
        let mut digits = Vec::with_capacity(n * k);
        for g in group.enumerate_elements() {
            digits.extend(g.exponents().iter().map(|&a| a as u32));
        }
        let q = spec.modulus();
        let bound = (q - 1)
            .checked_mul(q - 1)
            .and_then(|sq| sq.checked_mul(n as u64));
        let lazy = bound.is_some();
        let rq32 = bound
            .filter(|&b| b <= u32::MAX as u64)
            .map(|_| StrengthReducedU32::new(q as u32));
        let mut ring = Self {
            p: spec.p(),
            q,
            rq: StrengthReducedU64::new(q),
            rq32,
            n,
            table: None,
            quotients: None,
            digits,
            strides,
            lazy,
            spec,
        };
        if n <= MAX_TABLE_ORDER {
            let mut table = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    table.push(ring.product_index_slow(i, j) as u32);
                }
            }
            let mut quotients = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    quotients[table[i * n + j] as usize * n + i] = j as u32;
                }
            }
            ring.table = Some(table);
            ring.quotients = Some(quotients);
        }
        Ok(Arc::new(ring))
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn group(&self) -> &GroupSpec {
        self.spec.group()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.spec.e
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `|G|`, the length of every coefficient vector.
    pub fn dim(&self) -> usize {
        self.n
    }

    fn product_index_slow(&self, i: usize, j: usize) -> usize {
        let k = self.strides.len();
        let moduli = self.group().factor_moduli();
        let (di, dj) = (
            &self.digits[i * k..(i + 1) * k],
            &self.digits[j * k..(j + 1) * k],
        );
        (0..k)
            .map(|c| ((di[c] as u64 + dj[c] as u64) % moduli[c]) as usize * self.strides[c])
            .sum()
    }

    /// Index of the product of the group elements at positions `i` and `j`.
    #[inline]
    pub fn product_index(&self, i: usize, j: usize) -> usize {
        match &self.table {
            Some(t) => t[i * self.n + j] as usize,
            None => self.product_index_slow(i, j),
        }
    }

    /// Convolution of raw coefficient slices: `out = x * y`.
    pub(crate) fn mul_raw(&self, x: &[u64], y: &[u64], out: &mut [u64]) {
        let q = self.rq;
        let n = self.n;
        match (&self.quotients, self.lazy) {
            (Some(quotients), true) if self.rq32.is_some() => {
                let q32 = self.rq32.expect("checked by the guard");
                for (o, row) in out.iter_mut().zip(quotients.chunks_exact(n)) {
                    let sum: u64 = row.iter().zip(x).map(|(&j, &a)| a * y[j as usize]).sum();
                    *o = (sum as u32 % q32) as u64;
                }
            }
            (Some(quotients), true) => {
                for (o, row) in out.iter_mut().zip(quotients.chunks_exact(n)) {
                    let sum: u64 = row.iter().zip(x).map(|(&j, &a)| a * y[j as usize]).sum();
                    *o = sum % q;
                }
            }
            _ => {
                out.fill(0);
                for (i, &a) in x.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (j, &b) in y.iter().enumerate() {
                        let k = self.product_index(i, j);
                        out[k] = (out[k] + a * b % q) % q;
                    }
                }
            }
        }
    }

    pub(crate) fn is_one_raw(x: &[u64]) -> bool {
        x[0] == 1 && x[1..].iter().all(|&c| c == 0)
    }

    pub(crate) fn augmentation_raw(&self, x: &[u64]) -> u64 {
        x.iter().fold(0, |acc, &c| (acc + c) % self.q)
    }

    /// Upper bound on `log_p` of the order of any unit of p-power order.
    pub(crate) fn order_exp_bound(&self) -> u32 {
        self.group().exponent_exp() + self.e()
    }

    pub fn zero<T: Residue>(self: &Arc<Self>) -> RingElement<T> {
        RingElement {
            ring: Arc::clone(self),
            coeffs: vec![T::zero(); self.n],
        }
    }

    pub fn one<T: Residue>(self: &Arc<Self>) -> RingElement<T> {
        let mut x = self.zero();
        x.coeffs[0] = T::one();
        x
    }

    /// The group element `g` embedded in the ring.
    pub fn embed<T: Residue>(self: &Arc<Self>, g: &GroupElement) -> RingElement<T> {
        let mut x = self.zero();
        x.coeffs[self.group().index_of(g)] = T::one();
        x
    }

    /// `g - 1`.
    pub fn diff<T: Residue>(self: &Arc<Self>, g: &GroupElement) -> RingElement<T> {
        let mut x: RingElement<T> = self.embed(g);
        x.coeffs[0] = T::from_u64((x.coeffs[0].as_u64() + self.q - 1) % self.q);
        x
    }

    /// Builds an element from canonical residues.
    pub fn element<T: Residue>(self: &Arc<Self>, coeffs: &[u64]) -> Result<RingElement<T>> {
        if coeffs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: coeffs.len(),
            });
        }
        if T::max_modulus() < self.q {
            return Err(Error::ResidueTooNarrow(self.q - 1));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= self.q) {
            return Err(Error::InvalidElement(format!(
                "coefficient {c} not reduced mod {}",
                self.q
            )));
        }
        Ok(RingElement::from_raw(Arc::clone(self), coeffs))
    }

    /// Builds an element from arbitrary integers, reducing each modulo `p^e`.
    pub fn element_from_ints<T: Residue>(
        self: &Arc<Self>,
        coeffs: &[i64],
    ) -> Result<RingElement<T>> {
        let reduced: Vec<u64> = coeffs
            .iter()
            .map(|&c| (c as i128).rem_euclid(self.q as i128) as u64)
            .collect();
        self.element(&reduced)
    }
}

/// Most p-th powers whose order is remembered by one [`PowerEngine`].
const MEMO_CAPACITY: usize = 1 << 20;

/// Repeated powering with reusable buffers.
pub(crate) struct PowerEngine<'a> {
    ring: &'a GroupRing,
    base: Vec<u64>,
    acc: Vec<u64>,
    tmp: Vec<u64>,
    /// Order exponents of p-th powers already seen by [`Self::order_exp_memo`].
    memo: FxHashMap<Vec<u64>, u32>,
}

impl<'a> PowerEngine<'a> {
    pub(crate) fn new(ring: &'a GroupRing) -> Self {
        let n = ring.dim();
        Self {
            ring,
            base: vec![0; n],
            acc: vec![0; n],
            tmp: vec![0; n],
            memo: FxHashMap::default(),
        }
    }

    /// `x <- x^exp` by square-and-multiply.
    pub(crate) fn pow_in_place(&mut self, x: &mut [u64], mut exp: u64) {
        if exp == 0 {
            x.fill(0);
            x[0] = 1;
            return;
        }
        self.base.copy_from_slice(x);
        let mut acc_is_one = true;
        loop {
            if exp & 1 == 1 {
                if acc_is_one {
                    self.acc.copy_from_slice(&self.base);
                    acc_is_one = false;
                } else {
                    self.ring.mul_raw(&self.acc, &self.base, &mut self.tmp);
                    std::mem::swap(&mut self.acc, &mut self.tmp);
                }
            }
            exp >>= 1;
            if exp == 0 {
                break;
            }
            self.ring.mul_raw(&self.base, &self.base, &mut self.tmp);
            std::mem::swap(&mut self.base, &mut self.tmp);
        }
        x.copy_from_slice(&self.acc);
    }

    /// `log_p` of the multiplicative order of `x`, or `None` when the
    /// p-power bound is exceeded. Clobbers `x`.
    pub(crate) fn order_exp(&mut self, x: &mut [u64]) -> Option<u32> {
        let bound = self.ring.order_exp_bound();
        let p = self.ring.p();
        let mut k = 0;
        while !GroupRing::is_one_raw(x) {
            if k == bound {
                return None;
            }
            self.pow_in_place(x, p);
            k += 1;
        }
        Some(k)
    }

    /// As [`Self::order_exp`], remembering the order of `x^p`.
    ///
    /// Over a whole group the p-th powers form the much smaller subgroup
    /// `V^p`, so this saves all but one powering per element.
    pub(crate) fn order_exp_memo(&mut self, x: &mut [u64]) -> Option<u32> {
        if GroupRing::is_one_raw(x) {
            return Some(0);
        }
        self.pow_in_place(x, self.ring.p());
        if let Some(&k) = self.memo.get(&*x) {
            return Some(k + 1);
        }
        let key = (self.memo.len() < MEMO_CAPACITY).then(|| x.to_vec());
        let k = self.order_exp(x)?;
        if let Some(key) = key {
            self.memo.insert(key, k);
        }
        Some(k + 1)
    }
}

/// An element of `Z/p^e [G]` stored with coefficient word `T`.
#[derive(Clone)]
pub struct RingElement<T: Residue = u32> {
    ring: Arc<GroupRing>,
    coeffs: Vec<T>,
}

impl<T: Residue> PartialEq for RingElement<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.coeffs == other.coeffs
    }
}

impl<T: Residue> Eq for RingElement<T> {}

impl<T: Residue> fmt::Debug for RingElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement({self})")
    }
}

impl<T: Residue> fmt::Display for RingElement<T> {
    /// `p=..;lambda=..;e=..;coeffs=..`, the element text format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};coeffs={}", self.ring.spec(), join(&self.coeffs))
    }
}

impl<T: Residue> FromStr for RingElement<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (rs, coeffs) = parse_ring_text(s)?;
        let coeffs = coeffs.ok_or_else(|| Error::Parse("missing `coeffs`".into()))?;
        GroupRing::new(rs)?.element(&coeffs)
    }
}

#[allow(clippy::should_implement_trait)]
impl<T: Residue> RingElement<T> {
    pub(crate) fn from_raw(ring: Arc<GroupRing>, raw: &[u64]) -> Self {
        Self {
            ring,
            coeffs: raw.iter().map(|&c| T::from_u64(c)).collect(),
        }
    }

    pub(crate) fn to_raw(&self) -> Vec<u64> {
        self.coeffs.iter().map(|c| c.as_u64()).collect()
    }

    pub fn ring(&self) -> &Arc<GroupRing> {
        &self.ring
    }

    pub fn spec(&self) -> &RingSpec {
        self.ring.spec()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_u64(&self) -> Vec<u64> {
        self.to_raw()
    }

    fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring.spec() == other.ring.spec()
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    fn map2(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.check_ring(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| T::from_u64(f(a.as_u64(), b.as_u64())))
            .collect();
        Ok(Self {
            ring: Arc::clone(&self.ring),
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        GroupRing::is_one_raw(&self.to_raw())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let q = self.ring.q;
        self.map2(other, |a, b| (a + b) % q)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let q = self.ring.q;
        self.map2(other, |a, b| (a + q - b) % q)
    }

    pub fn neg(&self) -> Self {
        let q = self.ring.q;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| T::from_u64((q - c.as_u64()) % q))
            .collect();
        Self {
            ring: Arc::clone(&self.ring),
            coeffs,
        }
    }

    /// Multiplication by the integer `k`.
    pub fn scale(&self, k: u64) -> Self {
        let q = self.ring.q;
        let k = k % q;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| T::from_u64(c.as_u64() * k % q))
            .collect();
        Self {
            ring: Arc::clone(&self.ring),
            coeffs,
        }
    }

    /// Group-ring product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = vec![0; self.ring.n];
        self.ring.mul_raw(&self.to_raw(), &other.to_raw(), &mut out);
        Ok(Self::from_raw(Arc::clone(&self.ring), &out))
    }

    pub fn pow(&self, exp: u64) -> Self {
        let mut x = self.to_raw();
        PowerEngine::new(&self.ring).pow_in_place(&mut x, exp);
        Self::from_raw(Arc::clone(&self.ring), &x)
    }

    /// `x^{p^l}` by `l` successive p-th powers.
    pub fn pow_p_power(&self, l: u32) -> Self {
        let mut x = self.to_raw();
        let mut engine = PowerEngine::new(&self.ring);
        for _ in 0..l {
            engine.pow_in_place(&mut x, self.ring.p);
        }
        Self::from_raw(Arc::clone(&self.ring), &x)
    }

    /// Sum of the coefficients modulo `p^e`.
    pub fn augmentation(&self) -> u64 {
        self.ring.augmentation_raw(&self.to_raw())
    }

    pub fn in_augmentation_ideal(&self) -> bool {
        self.augmentation() == 0
    }

    pub fn is_normalized_unit(&self) -> bool {
        self.augmentation() == 1
    }

    /// `log_p` of the multiplicative order.
    ///
    /// Accepts every unit of p-power order, i.e. every element whose
    /// augmentation is `1 mod p`; normalized units are the main case.
    pub fn unit_order_exp(&self) -> Result<u32> {
        if self.augmentation() % self.ring.p != 1 % self.ring.p {
            return Err(Error::NotAUnit);
        }
        let mut x = self.to_raw();
        PowerEngine::new(&self.ring)
            .order_exp(&mut x)
            .ok_or_else(|| {
                Error::Inconsistent(format!("order of {self} exceeds the p-power bound"))
            })
    }

    pub fn unit_order(&self) -> Result<PPower> {
        Ok(PPower::new(self.ring.p, self.unit_order_exp()? as u64))
    }

    /// `u^{-1} = u^{|u| - 1}`.
    pub fn unit_inverse(&self) -> Result<Self> {
        let order = self.unit_order()?.value().ok_or(Error::NotAUnit)?;
        Ok(self.pow(order - 1))
    }

    /// Coefficientwise reduction to `Z/p^{e_target} [G]`; a ring homomorphism.
    pub fn reduce_mod(&self, e_target: u32) -> Result<Self> {
        let e = self.ring.e();
        if e_target == 0 || e_target > e {
            return Err(Error::Domain(format!(
                "cannot reduce from e={e} to e={e_target}"
            )));
        }
        if e_target == e {
            return Ok(self.clone());
        }
        let target = GroupRing::new(self.spec().with_e(e_target)?)?;
        let q = target.q;
        let raw: Vec<u64> = self.to_raw().iter().map(|c| c % q).collect();
        Ok(Self::from_raw(target, &raw))
    }

    /// Splits a normalized unit as `u = red_p(u) · (1 + p^{e-1} z)`.
    ///
    /// `red_p(u) = 1 + Σ α_g (g - 1)` keeps the non-identity coefficients of
    /// `u` reduced below `p^{e-1}`, so it is again a normalized unit and its
    /// identity coefficient is fixed by the augmentation. The returned `z`
    /// lies in the augmentation ideal, with non-identity coefficients in `[0, p)`.
    pub fn p_reduced_factorization(&self) -> Result<(Self, Self)> {
        let e = self.ring.e();
        if e < 2 {
            return Err(Error::Domain("p-reduced factorization needs e >= 2".into()));
        }
        if !self.is_normalized_unit() {
            return Err(Error::NotNormalized);
        }
        let q = self.ring.q;
        let top = self.ring.p.pow(e - 1);
        let mut red = self.to_raw();
        for c in red[1..].iter_mut() {
            *c %= top;
        }
        let rest: u64 = red[1..].iter().fold(0, |acc, &c| (acc + c) % q);
        red[0] = (1 + q - rest) % q;
        let red = Self::from_raw(Arc::clone(&self.ring), &red);

        let quotient = red.unit_inverse()?.mul(self)?;
        let mut w = quotient.to_raw();
        w[0] = (w[0] + q - 1) % q;
        if w.iter().any(|c| c % top != 0) {
            return Err(Error::Inconsistent(
                "red_p(u)^-1 u is not 1 mod p^(e-1)".into(),
            ));
        }
        let mut z: Vec<u64> = w.iter().map(|c| c / top).collect();
        let aug = z[1..].iter().fold(0, |acc, &c| (acc + c) % q);
        z[0] = (q - aug) % q;
        Ok((red, Self::from_raw(Arc::clone(&self.ring), &z)))
    }

    /// Smallest coefficient valuation, `None` for zero.
    pub fn min_valuation(&self) -> Option<u32> {
        self.coeffs
            .iter()
            .filter_map(|c| valuation(c.as_u64(), self.ring.p))
            .min()
    }

    /// The order of `1 + p^d y` predicted from its shape alone.
    ///
    /// `y` is written as `p^s z` with some coefficient of `z` prime to `p`;
    /// the prediction is `p^{max(e-d-s, 0)}`. For `p = 2`, `d + s = 1` and
    /// `z^2` with an odd coefficient the order is not determined by the
    /// shape and `Ok(None)` is returned.
    pub fn predicted_order_one_plus(&self, d: u32) -> Result<Option<PPower>> {
        let e = self.ring.e();
        let p = self.ring.p;
        if d == 0 || d >= e {
            return Err(Error::Domain(format!("need 1 <= d < e, got d={d}, e={e}")));
        }
        let s = self
            .min_valuation()
            .ok_or_else(|| Error::Domain("y must be nonzero".into()))?;
        if p == 2 && d + s == 1 {
            let z_sq = self.mul(self)?;
            if z_sq.coeffs.iter().any(|c| c.as_u64() % 2 == 1) {
                return Ok(None);
            }
        }
        Ok(Some(PPower::new(p, e.saturating_sub(d + s) as u64)))
    }

    /// `1 + p^d · self`.
    pub fn one_plus_p_power(&self, d: u32) -> Self {
        let q = self.ring.q;
        let mut x = self
            .scale(self.ring.p.pow(d.min(self.ring.e())) % q)
            .to_raw();
        x[0] = (x[0] + 1) % q;
        Self::from_raw(Arc::clone(&self.ring), &x)
    }
}

/// `t` with `p^t` exactly dividing `C(p^n, j)`, for `1 <= j <= p^n`.
///
/// Counts the carries when adding `j` and `p^n - j` in base `p`.
pub fn binomial_p_power(p: u64, n: u32, j: u64) -> Result<u32> {
    if !crate::residue::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let top =
        checked_pow(p, n as u64).ok_or_else(|| Error::Domain(format!("{p}^{n} overflows")))?;
    if j == 0 || j > top {
        return Err(Error::Domain(format!("need 1 <= j <= {p}^{n}, got {j}")));
    }
    let (mut a, mut b) = (j, top - j);
    let (mut carry, mut carries) = (0, 0);
    while a > 0 || b > 0 {
        let digit_sum = a % p + b % p + carry;
        carry = u64::from(digit_sum >= p);
        carries += carry as u32;
        a /= p;
        b /= p;
    }
    Ok(carries)
}

/// `p`-adic inverse of a coefficient unit, exposed for row normalization.
pub(crate) fn unit_inverse_mod(a: u64, q: u64) -> u64 {
    inverse_mod(a, q).expect("pivot unit part must be invertible")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, l: &[u32], e: u32) -> Arc<GroupRing> {
        GroupRing::new(RingSpec::new(GroupSpec::new(p, l.to_vec()).unwrap(), e).unwrap()).unwrap()
    }

    fn el(r: &Arc<GroupRing>, c: &[i64]) -> RingElement {
        r.element_from_ints(c).unwrap()
    }

    #[test]
    fn spec_validation() {
        let g = GroupSpec::new(2, vec![1]).unwrap();
        assert_eq!(RingSpec::new(g.clone(), 0), Err(Error::ZeroCharacteristic));
        assert!(matches!(
            RingSpec::new(g, 32),
            Err(Error::ModulusTooLarge { .. })
        ));
    }

    #[test]
    fn mul_examples() {
        let r = ring(2, &[1], 2);
        let x = el(&r, &[3, 2]);
        assert!(x.mul(&x).unwrap().is_one());
        assert_eq!(x.mul(&r.one()).unwrap(), x);
        let c4 = ring(2, &[2], 2);
        let u = c4.diff::<u32>(&c4.group().generator(0));
        assert_eq!(u.mul(&u).unwrap().coeffs_u64(), vec![1, 2, 1, 0]);
    }

    #[test]
    fn mismatched_rings() {
        let a = ring(2, &[1], 2).one::<u32>();
        let b = ring(2, &[1], 3).one::<u32>();
        assert_eq!(a.mul(&b), Err(Error::SpecMismatch));
        assert_eq!(a.add(&b), Err(Error::SpecMismatch));
    }

    #[test]
    fn augmentation_examples() {
        let r = ring(2, &[1], 2);
        assert_eq!(el(&r, &[2, 3]).augmentation(), 1);
        assert_eq!(r.diff::<u32>(&r.group().generator(0)).augmentation(), 0);
        assert_eq!(r.zero::<u32>().augmentation(), 0);
    }

    #[test]
    fn normalized_unit_examples() {
        let r8 = ring(2, &[1], 3);
        assert!(el(&r8, &[-1, 2]).is_normalized_unit());
        let r4 = ring(2, &[1], 2);
        assert!(!el(&r4, &[-1, 1]).is_normalized_unit());
        assert!(!el(&r4, &[2, 0]).is_normalized_unit());
    }

    #[test]
    fn inverse_examples() {
        let r4 = ring(2, &[1], 2);
        let a = el(&r4, &[0, 1]);
        assert_eq!(a.unit_inverse().unwrap(), a);
        let r8 = ring(2, &[1], 3);
        let u = el(&r8, &[-1, 2]);
        let expected = el(&r8, &[1 - 6, 6]);
        assert_eq!(u.unit_inverse().unwrap(), expected);
        assert!(u.mul(&expected).unwrap().is_one());
        assert!(r8.one::<u32>().unit_inverse().unwrap().is_one());
        assert_eq!(el(&r8, &[2, 2]).unit_inverse(), Err(Error::NotAUnit));
    }

    #[test]
    fn order_examples() {
        let r8 = ring(2, &[1], 3);
        assert_eq!(el(&r8, &[-1, 2]).unit_order().unwrap().value(), Some(4));
        let r4 = ring(2, &[1], 2);
        assert_eq!(el(&r4, &[0, 1]).unit_order().unwrap().value(), Some(2));
        assert_eq!(r4.one::<u32>().unit_order().unwrap().value(), Some(1));
        assert_eq!(el(&r4, &[0, 2]).unit_order(), Err(Error::NotAUnit));
    }

    #[test]
    fn reduce_examples() {
        let r4 = ring(2, &[1], 2);
        let x = el(&r4, &[3, 2]);
        assert!(x.reduce_mod(1).unwrap().is_one());
        assert_eq!(x.reduce_mod(2).unwrap(), x);
        assert!(x.reduce_mod(3).is_err());
        let r8 = ring(2, &[1], 3);
        let u = el(&r8, &[-1, 2]);
        assert_eq!(u.reduce_mod(2).unwrap(), el(&r4, &[-1, 2]));
    }

    #[test]
    fn factorization_examples() {
        let r4 = ring(2, &[1], 2);
        let (red, z) = el(&r4, &[3, 2]).p_reduced_factorization().unwrap();
        assert!(red.is_one());
        assert!(z.in_augmentation_ideal());
        assert_eq!(z, el(&r4, &[-1, 1]));
        assert_eq!(red.mul(&z.one_plus_p_power(1)).unwrap(), el(&r4, &[3, 2]));

        let r8 = ring(2, &[2], 3);
        let small = el(&r8, &[-2, 1, 2, 0]);
        assert!(small.is_normalized_unit());
        let (red, z) = small.p_reduced_factorization().unwrap();
        assert_eq!(red, small);
        assert!(z.is_zero());

        let top = el(&r8, &[-4, 4, 0, 0]);
        let g = r8.group().generator(0);
        let (red, z) = r8
            .one::<u32>()
            .add(&top)
            .unwrap()
            .p_reduced_factorization()
            .unwrap();
        assert!(red.is_one());
        assert_eq!(z, r8.diff(&g));

        assert!(r4
            .one::<u32>()
            .reduce_mod(1)
            .unwrap()
            .p_reduced_factorization()
            .is_err());
        assert_eq!(
            el(&r4, &[0, 2]).p_reduced_factorization(),
            Err(Error::NotNormalized)
        );
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_p_power(2, 3, 4), Ok(1));
        assert_eq!(binomial_p_power(3, 2, 3), Ok(1));
        assert_eq!(binomial_p_power(5, 3, 125), Ok(0));
        assert!(binomial_p_power(2, 3, 0).is_err());
        assert!(binomial_p_power(2, 3, 9).is_err());
        assert!(binomial_p_power(4, 3, 1).is_err());
    }

    #[test]
    fn predicted_order_examples() {
        let r8 = ring(2, &[1], 3);
        let y = r8.diff::<u32>(&r8.group().generator(0));
        assert_eq!(
            y.predicted_order_one_plus(1).unwrap().unwrap().value(),
            Some(4)
        );

        let r9 = ring(3, &[1], 2);
        let y = r9.diff::<u32>(&r9.group().generator(0));
        let predicted = y.predicted_order_one_plus(1).unwrap().unwrap();
        assert_eq!(predicted.value(), Some(3));
        assert_eq!(y.one_plus_p_power(1).unit_order().unwrap(), predicted);

        let c4 = ring(2, &[2], 3);
        let y = c4.diff::<u32>(&c4.group().generator(0));
        assert_eq!(y.predicted_order_one_plus(1), Ok(None));

        assert!(y.predicted_order_one_plus(3).is_err());
        assert!(y.predicted_order_one_plus(0).is_err());
        assert!(c4.zero::<u32>().predicted_order_one_plus(1).is_err());
    }

    #[test]
    fn text_format() {
        let x: RingElement = "p=2;lambda=1;e=2;coeffs=3,2".parse().unwrap();
        assert_eq!(x.coeffs_u64(), vec![3, 2]);
        assert_eq!(x.to_string(), "p=2;lambda=1;e=2;coeffs=3,2");
        assert!("p=2;lambda=1;e=2;coeffs=3,4"
            .parse::<RingElement>()
            .is_err());
        assert!("p=2;lambda=1;e=2;coeffs=3".parse::<RingElement>().is_err());
        assert!("p=2;lambda=1;coeffs=3,2".parse::<RingElement>().is_err());
        let rs: RingSpec = "p=3;lambda=1,2;e=2".parse().unwrap();
        assert_eq!(rs.to_string(), "p=3;lambda=2,1;e=2");
    }

    #[test]
    fn narrow_storage() {
        let r = ring(2, &[1], 9);
        assert_eq!(r.element::<u8>(&[1, 0]), Err(Error::ResidueTooNarrow(511)));
        let x: RingElement<u16> = r.element(&[1, 2]).unwrap();
        assert_eq!(x.unit_order_exp().unwrap(), 8);
    }

    #[test]
    fn untabled_groups_agree_with_tabled() {
        // |G| = 2048 falls back to on-the-fly indexing.
        let big = ring(2, &[11], 1);
        let small_idx = big.product_index(5, 2047);
        assert_eq!(small_idx, 4);
    }
}
