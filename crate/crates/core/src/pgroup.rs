//! Finite abelian p-groups `C_{p^λ1} × … × C_{p^λk}` and their element arithmetic.
//!
//! Subgroup orders are reported as exponents of `p`. Magnitudes are only
//! materialized for groups of order at most [`MAX_GROUP_ORDER`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::{checked_pow, is_prime, valuation, PPower};

/// Largest group order that is ever expanded into an integer.
pub const MAX_GROUP_ORDER: u64 = 1 << 20;

/// A finite abelian p-group given by the exponents of its cyclic factors.
///
/// The exponent list is kept sorted in descending order, so two specs compare
/// equal exactly when they describe the same group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroupSpec", into = "RawGroupSpec")]
pub struct GroupSpec {
    p: u64,
    lambdas: Vec<u32>,
    moduli: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawGroupSpec {
    p: u64,
    lambda: Vec<u32>,
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = Error;

    fn try_from(raw: RawGroupSpec) -> Result<Self> {
        GroupSpec::new(raw.p, raw.lambda)
    }
}

impl From<GroupSpec> for RawGroupSpec {
    fn from(spec: GroupSpec) -> Self {
        RawGroupSpec {
            p: spec.p,
            lambda: spec.lambdas,
        }
    }
}

/// An element of a [`GroupSpec`], as reduced exponents of the canonical generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    exponents: Vec<u64>,
}

impl GroupElement {
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, a) in self.exponents.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl GroupSpec {
    pub fn new(p: u64, mut lambdas: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if lambdas.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if lambdas.contains(&0) {
            return Err(Error::ZeroExponent);
        }
        lambdas.sort_unstable_by(|a, b| b.cmp(a));
        let moduli = lambdas
            .iter()
            .map(|&l| {
                checked_pow(p, l as u64).ok_or(Error::OverCap {
                    what: "cyclic factor",
                    base: p,
                    exp: l as u64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, lambdas, moduli })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Cyclic factor exponents, sorted descending.
    pub fn lambdas(&self) -> &[u32] {
        &self.lambdas
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// Orders `p^{λ_j}` of the cyclic factors.
    pub fn factor_moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// `log_p |G|`.
    pub fn order_exp(&self) -> u64 {
        self.lambdas.iter().map(|&l| l as u64).sum()
    }

    /// `n` with `exp(G) = p^n`.
    pub fn exponent_exp(&self) -> u32 {
        self.lambdas[0]
    }

    pub fn order_pp(&self) -> PPower {
        PPower::new(self.p, self.order_exp())
    }

    /// `|G|` as an integer, refused beyond [`MAX_GROUP_ORDER`].
    pub fn order(&self) -> Result<u64> {
        materialize(self.p, self.order_exp(), "group order")
    }

    /// `m` with `|G^{p^i}| = p^m`.
    pub fn agemo_order_exp(&self, i: u32) -> u64 {
        self.lambdas
            .iter()
            .map(|&l| l.saturating_sub(i) as u64)
            .sum()
    }

    /// `|G^{p^i}|` as an integer.
    pub fn agemo_order(&self, i: u32) -> Result<u64> {
        materialize(self.p, self.agemo_order_exp(i), "power subgroup order")
    }

    /// `m` with `|G[p^i]| = p^m`.
    pub fn omega_order_exp(&self, i: u32) -> u64 {
        self.lambdas.iter().map(|&l| l.min(i) as u64).sum()
    }

    /// Number of cyclic direct factors of order `p^i`.
    pub fn cyclic_factor_count(&self, i: u32) -> usize {
        self.lambdas.iter().filter(|&&l| l == i).count()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            exponents: vec![0; self.rank()],
        }
    }

    /// The `j`-th canonical generator.
    pub fn generator(&self, j: usize) -> GroupElement {
        let mut exponents = vec![0; self.rank()];
        exponents[j] = 1;
        GroupElement { exponents }
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.rank()).map(|j| self.generator(j)).collect()
    }

    /// Builds an element, rejecting unreduced or wrongly sized exponent vectors.
    pub fn element(&self, exponents: Vec<u64>) -> Result<GroupElement> {
        if exponents.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: exponents.len(),
            });
        }
        if let Some((a, m)) = exponents.iter().zip(&self.moduli).find(|(a, m)| **a >= **m) {
            return Err(Error::InvalidElement(format!(
                "exponent {a} not reduced modulo {m}"
            )));
        }
        Ok(GroupElement { exponents })
    }

    pub fn element_mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let exponents = g
            .exponents
            .iter()
            .zip(&h.exponents)
            .zip(&self.moduli)
            .map(|((a, b), m)| (a + b) % m)
            .collect();
        GroupElement { exponents }
    }

    pub fn element_inverse(&self, g: &GroupElement) -> GroupElement {
        let exponents = g
            .exponents
            .iter()
            .zip(&self.moduli)
            .map(|(a, m)| (m - a) % m)
            .collect();
        GroupElement { exponents }
    }

    /// `g^m`.
    pub fn element_pow(&self, g: &GroupElement, m: u64) -> GroupElement {
        let exponents = g
            .exponents
            .iter()
            .zip(&self.moduli)
            .map(|(&a, &q)| ((a as u128 * m as u128) % q as u128) as u64)
            .collect();
        GroupElement { exponents }
    }

    /// Exponent `t` of the order `p^t` of `g`.
    pub fn element_order_exp(&self, g: &GroupElement) -> u32 {
        g.exponents
            .iter()
            .zip(&self.lambdas)
            .map(|(&a, &l)| match valuation(a, self.p) {
                None => 0,
                Some(v) => l.saturating_sub(v),
            })
            .max()
            .unwrap_or(0)
    }

    pub fn element_order(&self, g: &GroupElement) -> PPower {
        PPower::new(self.p, self.element_order_exp(g) as u64)
    }

    /// Whether `g` is a `p^i`-th power, i.e. lies in `G^{p^i}`.
    pub fn in_agemo(&self, g: &GroupElement, i: u32) -> bool {
        g.exponents.iter().zip(&self.lambdas).all(|(&a, &l)| {
            let needed = i.min(l);
            a % self.p.pow(needed) == 0
        })
    }

    /// Mixed-radix position of `g` in [`GroupSpec::enumerate_elements`] order.
    pub fn index_of(&self, g: &GroupElement) -> usize {
        g.exponents
            .iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (&a, &m)| acc * m as usize + a as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut exponents = vec![0; self.rank()];
        for j in (0..self.rank()).rev() {
            let m = self.moduli[j] as usize;
            exponents[j] = (index % m) as u64;
            index /= m;
        }
        GroupElement { exponents }
    }

    /// All elements in mixed-radix order, last coordinate fastest.
    ///
    /// This order indexes group-ring coefficient vectors throughout the crate.
    pub fn enumerate_elements(&self) -> Elements<'_> {
        Elements {
            spec: self,
            next: Some(self.identity()),
        }
    }
}

fn materialize(p: u64, exp: u64, what: &'static str) -> Result<u64> {
    match checked_pow(p, exp) {
        Some(v) if v <= MAX_GROUP_ORDER => Ok(v),
        _ => Err(Error::OverCap { what, base: p, exp }),
    }
}

pub struct Elements<'a> {
    spec: &'a GroupSpec,
    next: Option<GroupElement>,
}

impl Iterator for Elements<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut j = succ.exponents.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            succ.exponents[j] += 1;
            if succ.exponents[j] < self.spec.moduli[j] {
                self.next = Some(succ);
                break;
            }
            succ.exponents[j] = 0;
        }
        Some(current)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={};lambda={}", self.p, join(&self.lambdas))
    }
}

pub(crate) fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Key/value fields of the `k=v;k=v` text formats.
pub(crate) fn parse_fields(s: &str) -> Result<Vec<(&str, &str)>> {
    s.split(';')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))
        })
        .collect()
}

pub(crate) fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad list entry `{x}`")))
        })
        .collect()
}

pub(crate) fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad value `{s}` for `{key}`")))
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses `p=<prime>;lambda=<comma-list>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut lambdas = None;
        for (key, value) in parse_fields(s)? {
            match key {
                "p" => p = Some(parse_num(key, value)?),
                "lambda" => lambdas = Some(parse_list(value)?),
                other => return Err(Error::Parse(format!("unknown group field `{other}`"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing `p`".into()))?;
        let lambdas = lambdas.ok_or_else(|| Error::Parse("missing `lambda`".into()))?;
        GroupSpec::new(p, lambdas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u64, l: &[u32]) -> GroupSpec {
        GroupSpec::new(p, l.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(GroupSpec::new(4, vec![1]), Err(Error::NotPrime(4)));
        assert_eq!(GroupSpec::new(1, vec![1]), Err(Error::NotPrime(1)));
        assert_eq!(GroupSpec::new(2, vec![]), Err(Error::EmptyGroup));
        assert_eq!(GroupSpec::new(3, vec![1, 0]), Err(Error::ZeroExponent));
        assert!(matches!(
            GroupSpec::new(2, vec![70]),
            Err(Error::OverCap { .. })
        ));
    }

    #[test]
    fn canonical_order() {
        assert_eq!(spec(2, &[1, 2]), spec(2, &[2, 1]));
        assert_eq!(spec(2, &[1, 3, 2]).lambdas(), &[3, 2, 1]);
        assert_eq!(spec(2, &[1, 2]).exponent_exp(), 2);
    }

    #[test]
    fn agemo_examples() {
        assert_eq!(spec(2, &[1, 2]).agemo_order_exp(0), 3);
        assert_eq!(spec(2, &[1, 2]).agemo_order_exp(1), 1);
        assert_eq!(spec(3, &[1]).agemo_order_exp(2), 0);
        assert_eq!(spec(2, &[1, 2]).agemo_order(1), Ok(2));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(spec(2, &[1, 2]).omega_order_exp(1), 2);
        assert_eq!(spec(5, &[3, 1]).omega_order_exp(0), 0);
        assert_eq!(spec(3, &[2, 1]).omega_order_exp(2), 3);
    }

    #[test]
    fn cyclic_factor_examples() {
        assert_eq!(spec(2, &[1, 1]).cyclic_factor_count(1), 2);
        assert_eq!(spec(2, &[1, 2]).cyclic_factor_count(2), 1);
        assert_eq!(spec(2, &[1, 2]).cyclic_factor_count(3), 0);
    }

    // Canonical coordinates of C_2 × C_4 are (C_4, C_2), so the element written
    // (1,1) in (C_2, C_4) coordinates is (1,1) here too, and (0,1) becomes (1,0).
    #[test]
    fn pow_examples() {
        let g = spec(2, &[1, 2]);
        let x = g.element(vec![1, 1]).unwrap();
        assert_eq!(g.element_pow(&x, 2).exponents(), &[2, 0]);
        assert_eq!(g.element_pow(&x, 0), g.identity());
        let c4 = spec(2, &[2]);
        let y = c4.element(vec![3]).unwrap();
        assert_eq!(c4.element_pow(&y, 4), c4.identity());
    }

    #[test]
    fn order_examples() {
        let g = spec(2, &[1, 2]);
        assert_eq!(
            g.element_order(&g.element(vec![2, 1]).unwrap()).value(),
            Some(2)
        );
        assert_eq!(
            g.element_order(&g.element(vec![1, 0]).unwrap()).value(),
            Some(4)
        );
        assert_eq!(g.element_order(&g.identity()).value(), Some(1));
    }

    #[test]
    fn enumeration_examples() {
        let c2 = spec(2, &[1]);
        let got: Vec<_> = c2
            .enumerate_elements()
            .map(|g| g.exponents().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0], vec![1]]);
        let v4 = spec(2, &[1, 1]);
        let got: Vec<_> = v4
            .enumerate_elements()
            .map(|g| g.exponents().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(spec(2, &[1, 2]).enumerate_elements().count(), 8);
    }

    #[test]
    fn indexing_matches_enumeration() {
        let g = spec(3, &[2, 1]);
        for (i, x) in g.enumerate_elements().enumerate() {
            assert_eq!(g.index_of(&x), i);
            assert_eq!(g.element_at(i), x);
        }
    }

    #[test]
    fn element_validation() {
        let g = spec(2, &[2, 1]);
        assert!(g.element(vec![4, 0]).is_err());
        assert!(g.element(vec![1]).is_err());
    }

    #[test]
    fn text_format() {
        let g: GroupSpec = "p=2;lambda=1,2".parse().unwrap();
        assert_eq!(g.to_string(), "p=2;lambda=2,1");
        assert!("p=4;lambda=1".parse::<GroupSpec>().is_err());
        assert!("p=2".parse::<GroupSpec>().is_err());
        assert!("p=2;lambda=1;q=3".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn json_schema() {
        let g = spec(2, &[1, 2]);
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"p":2,"lambda":[2,1]}"#
        );
        let back: GroupSpec = serde_json::from_str(r#"{"p":2,"lambda":[1,2]}"#).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GroupSpec>(r#"{"p":6,"lambda":[1]}"#).is_err());
    }
}
