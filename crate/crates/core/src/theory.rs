//! Closed-form structure of `V(Z/p^e [G])`, computed from `(p, λ, e)` alone.
//!
//! `V = G × L` with
//! `L ≅ l·C_{p^{e-1}} × Π_i s_i·C_{p^{i+e-1}}`, where `t_i` below counts the
//! cyclic factors `C_{p^i}` of `V(Z/p [G])`, `s_i = t_i - #{j : λ_j = i}` and
//! `l = |G| - 1 - Σ s_i`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pgroup::GroupSpec;
use crate::residue::PPower;

/// Isomorphism type of a finite abelian p-group, as `(order_exp, multiplicity)`
/// pairs sorted by `order_exp`. Trivial factors and zero multiplicities are dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<InvariantEntry>", into = "Vec<InvariantEntry>")]
pub struct AbelianInvariants {
    entries: Vec<(u32, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub order_exp: u32,
    pub multiplicity: u64,
}

impl From<Vec<InvariantEntry>> for AbelianInvariants {
    fn from(entries: Vec<InvariantEntry>) -> Self {
        Self::from_pairs(entries.into_iter().map(|x| (x.order_exp, x.multiplicity)))
    }
}

impl From<AbelianInvariants> for Vec<InvariantEntry> {
    fn from(inv: AbelianInvariants) -> Self {
        inv.entries
            .into_iter()
            .map(|(order_exp, multiplicity)| InvariantEntry {
                order_exp,
                multiplicity,
            })
            .collect()
    }
}

impl AbelianInvariants {
    /// Merges duplicate orders and drops trivial entries.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u64)>) -> Self {
        let mut merged = BTreeMap::new();
        for (order_exp, mult) in pairs {
            if order_exp > 0 && mult > 0 {
                *merged.entry(order_exp).or_insert(0) += mult;
            }
        }
        Self {
            entries: merged.into_iter().collect(),
        }
    }

    /// One cyclic factor `C_{p^a}` per listed exponent `a`.
    pub fn from_cyclic(exps: impl IntoIterator<Item = u32>) -> Self {
        Self::from_pairs(exps.into_iter().map(|a| (a, 1)))
    }

    pub fn entries(&self) -> &[(u32, u64)] {
        &self.entries
    }

    pub fn multiplicity(&self, order_exp: u32) -> u64 {
        self.entries
            .iter()
            .find(|(a, _)| *a == order_exp)
            .map_or(0, |&(_, m)| m)
    }

    /// `log_p` of the group order.
    pub fn size_exp(&self) -> u64 {
        self.entries.iter().map(|&(a, m)| a as u64 * m).sum()
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    /// `log_p` of the exponent.
    pub fn exponent_exp(&self) -> u32 {
        self.entries.last().map_or(0, |&(a, _)| a)
    }

    /// `log_p |A[p^i]|`, the number of elements of order dividing `p^i`.
    pub fn torsion_exp(&self, i: u32) -> u64 {
        self.entries.iter().map(|&(a, m)| a.min(i) as u64 * m).sum()
    }

    /// Direct product.
    pub fn merge(&self, other: &Self) -> Self {
        Self::from_pairs(self.entries.iter().chain(&other.entries).copied())
    }

    /// Human rendering such as `C_2^4 × C_4`.
    pub fn render(&self, p: u64) -> String {
        if self.entries.is_empty() {
            return "1".into();
        }
        self.entries
            .iter()
            .map(|&(a, m)| {
                let order = p
                    .checked_pow(a)
                    .map_or(format!("{p}^{a}"), |v| v.to_string());
                if m == 1 {
                    format!("C_{order}")
                } else {
                    format!("C_{order}^{m}")
                }
            })
            .collect::<Vec<_>>()
            .join(" × ")
    }
}

/// `D_n = G ∩ (1 + ω^n)` as predicted in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionSubgroup {
    Whole,
    /// `G^{p^k}`.
    Agemo(u32),
}

impl DimensionSubgroup {
    pub fn agemo_index(&self) -> u32 {
        match self {
            Self::Whole => 0,
            Self::Agemo(k) => *k,
        }
    }

    pub fn order_exp(&self, spec: &GroupSpec) -> u64 {
        spec.agemo_order_exp(self.agemo_index())
    }
}

/// Everything the closed forms say about one `(G, e)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub group: GroupSpec,
    pub e: u32,
    pub s: Vec<u64>,
    pub l: u64,
    pub v_invariants: AbelianInvariants,
    pub v_order_exp: u64,
    pub v_p_torsion_exp: u64,
    /// Number of cyclic factors of `V(Z/p^e [G])`.
    pub p_rank: u64,
}

impl StructureReport {
    pub fn v_order(&self) -> PPower {
        PPower::new(self.group.p(), self.v_order_exp)
    }
}

fn check_e(e: u32) -> Result<()> {
    if e == 0 {
        Err(Error::ZeroCharacteristic)
    } else {
        Ok(())
    }
}

/// `log_p |V(Z/p^e [G])| = e(|G| - 1)`.
pub fn v_order_exp(spec: &GroupSpec, e: u32) -> Result<u64> {
    check_e(e)?;
    Ok(e as u64 * (spec.order()? - 1))
}

/// p-rank of `V(Z/p [G])`: `|G| - |G^p|`.
pub fn p_rank_vzp(spec: &GroupSpec) -> Result<u64> {
    Ok(spec.order()? - spec.agemo_order(1)?)
}

/// `t_i = |G^{p^{i-1}}| - 2|G^{p^i}| + |G^{p^{i+1}}|` for `i = 1..=n`,
/// the number of cyclic factors `C_{p^i}` of `V(Z/p [G])`.
pub fn vzp_factor_counts(spec: &GroupSpec) -> Result<Vec<u64>> {
    spec.order()?;
    (1..=spec.exponent_exp())
        .map(|i| {
            let t = spec.agemo_order(i - 1)? as i128 - 2 * spec.agemo_order(i)? as i128
                + spec.agemo_order(i + 1)? as i128;
            u64::try_from(t).map_err(|_| Error::Inconsistent(format!("t_{i} = {t} is negative")))
        })
        .collect()
}

/// `(s_1..s_n, l)`, with `s_i` subtracting the cyclic direct factors of `G` of order `p^i`.
pub fn s_and_l(spec: &GroupSpec) -> Result<(Vec<u64>, u64)> {
    let t = vzp_factor_counts(spec)?;
    let s = t
        .iter()
        .enumerate()
        .map(|(idx, &ti)| {
            let i = idx as u32 + 1;
            let c = spec.cyclic_factor_count(i) as u64;
            ti.checked_sub(c)
                .ok_or_else(|| Error::Inconsistent(format!("s_{i} = {ti} - {c} is negative")))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: u64 = s.iter().sum();
    let l = (spec.order()? - 1)
        .checked_sub(total)
        .ok_or_else(|| Error::Inconsistent(format!("l = |G| - 1 - {total} is negative")))?;
    Ok((s, l))
}

/// Invariants of `L(Z/p^e [G])` alone.
pub fn complement_invariants(spec: &GroupSpec, e: u32) -> Result<AbelianInvariants> {
    check_e(e)?;
    let (s, l) = s_and_l(spec)?;
    let top = s
        .iter()
        .enumerate()
        .map(|(idx, &si)| (idx as u32 + 1 + e - 1, si));
    Ok(AbelianInvariants::from_pairs(
        std::iter::once((e - 1, l)).chain(top),
    ))
}

/// Invariants of `V(Z/p^e [G]) = G × L`.
pub fn v_invariants(spec: &GroupSpec, e: u32) -> Result<AbelianInvariants> {
    let group = AbelianInvariants::from_cyclic(spec.lambdas().iter().copied());
    let complement = complement_invariants(spec, e)?;
    // |G| · |L| = |V|
    let expected = v_order_exp(spec, e)?;
    if group.size_exp() + complement.size_exp() != expected {
        return Err(Error::Inconsistent(format!(
            "|G|·|L| = p^{}, expected p^{expected}",
            group.size_exp() + complement.size_exp()
        )));
    }
    Ok(group.merge(&complement))
}

/// `m` with `|V[p]| = p^m`.
pub fn v_p_torsion_exp(spec: &GroupSpec, e: u32) -> Result<u64> {
    check_e(e)?;
    if e == 1 {
        p_rank_vzp(spec)
    } else {
        Ok(spec.omega_order_exp(1) + spec.order()? - 1)
    }
}

/// Closed-form `D_n(Z/p^e [G])`: `G` for `n = 1`, else `G^{p^{e+i}}` with `p^i < n <= p^{i+1}`.
pub fn dimension_subgroup(spec: &GroupSpec, e: u32, n: u64) -> Result<DimensionSubgroup> {
    check_e(e)?;
    if n == 0 {
        return Err(Error::Domain("dimension subgroups start at n = 1".into()));
    }
    if n == 1 {
        return Ok(DimensionSubgroup::Whole);
    }
    let p = spec.p() as u128;
    let (mut i, mut lower) = (0u32, 1u128);
    while !(lower < n as u128 && n as u128 <= lower * p) {
        lower *= p;
        i += 1;
    }
    Ok(DimensionSubgroup::Agemo(e + i))
}

pub fn structure_report(spec: &GroupSpec, e: u32) -> Result<StructureReport> {
    let (s, l) = s_and_l(spec)?;
    let v_invariants = v_invariants(spec, e)?;
    Ok(StructureReport {
        group: spec.clone(),
        e,
        s,
        l,
        p_rank: v_invariants.rank(),
        v_invariants,
        v_order_exp: v_order_exp(spec, e)?,
        v_p_torsion_exp: v_p_torsion_exp(spec, e)?,
    })
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V ≅ {}", self.v_invariants.render(self.group.p()))
    }
}
