use unitgroup::theory::{complement_invariants, s_and_l, v_order_exp, vzp_factor_counts};
use unitgroup::{structure_report, v_invariants, AbelianInvariants, GroupSpec};

fn groups() -> Vec<GroupSpec> {
    let mut out = Vec::new();
    for (p, lambdas) in [
        (
            2u64,
            vec![
                vec![1],
                vec![2],
                vec![3],
                vec![1, 1],
                vec![2, 1],
                vec![1, 1, 1],
                vec![2, 2],
                vec![3, 1],
                vec![2, 1, 1],
                vec![4],
            ],
        ),
        (3, vec![vec![1], vec![2], vec![1, 1], vec![2, 1], vec![3]]),
        (5, vec![vec![1], vec![2], vec![1, 1]]),
        (7, vec![vec![1], vec![2]]),
    ] {
        for lambda in lambdas {
            out.push(GroupSpec::new(p, lambda).unwrap());
        }
    }
    out
}

#[test]
fn invariants_account_for_all_of_v() {
    for g in groups() {
        for e in 1..=5 {
            let inv = v_invariants(&g, e).unwrap();
            assert_eq!(inv.size_exp(), v_order_exp(&g, e).unwrap(), "{g} e={e}");
            let t: u64 = vzp_factor_counts(&g).unwrap().iter().sum();
            assert_eq!(t, g.order().unwrap() - g.agemo_order(1).unwrap(), "{g}");
        }
    }
}

/// `L` at `e` is `L` at `e - 1` with every factor one step larger, plus the
/// `l` factors that were trivial at `e = 1`.
#[test]
fn complement_grows_one_step_per_e() {
    for g in groups() {
        let (_, l) = s_and_l(&g).unwrap();
        for e in 2..=5 {
            let previous = complement_invariants(&g, e - 1).unwrap();
            let mut raised: Vec<(u32, u64)> = previous
                .entries()
                .iter()
                .map(|&(a, m)| (a + 1, m))
                .collect();
            if e == 2 {
                raised.push((1, l));
            }
            assert_eq!(
                complement_invariants(&g, e).unwrap(),
                AbelianInvariants::from_pairs(raised),
                "{g} e={e}"
            );
            let group = AbelianInvariants::from_cyclic(g.lambdas().iter().copied());
            assert_eq!(
                v_invariants(&g, e).unwrap(),
                group.merge(&complement_invariants(&g, e).unwrap())
            );
        }
    }
}

#[test]
fn exponent_of_v() {
    for g in groups() {
        let (s, l) = s_and_l(&g).unwrap();
        let n = g.exponent_exp();
        for e in 1..=5 {
            let top = v_invariants(&g, e).unwrap().exponent_exp();
            let from_l = s
                .iter()
                .enumerate()
                .filter(|(_, &si)| si > 0)
                .map(|(i, _)| i as u32 + e)
                .max()
                .unwrap_or(0)
                .max(if l > 0 { e - 1 } else { 0 });
            if s[n as usize - 1] > 0 {
                assert_eq!(top, n + e - 1, "{g} e={e}");
            }
            assert_eq!(top, n.max(from_l), "{g} e={e}");
        }
    }
}

#[test]
fn reports_depend_only_on_the_canonical_group() {
    let a = GroupSpec::new(2, vec![1, 2]).unwrap();
    let b = GroupSpec::new(2, vec![2, 1]).unwrap();
    for e in 1..=4 {
        assert_eq!(
            structure_report(&a, e).unwrap(),
            structure_report(&b, e).unwrap()
        );
    }
}

#[test]
fn cyclic_two_group() {
    // V(Z/2^e C_2) = C_2 × C_{2^{e-1}}
    let g = GroupSpec::new(2, vec![1]).unwrap();
    for e in 1..=8 {
        let expected = AbelianInvariants::from_cyclic([1, e - 1]);
        assert_eq!(v_invariants(&g, e).unwrap(), expected, "e={e}");
    }
}
