//! Acceptance run: one pass/fail line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use unitgroup::{
    binomial_p_power, invariants_from_histogram, v_invariants, AbelianInvariants, CheckId,
    CheckParams, GroupSpec, OrderHistogram, RingSpec, Verifier,
};
use unitgroup_cli::suite::{default_catalog, SUITE_BUDGET};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn rs(p: u64, lambda: &[u32], e: u32) -> RingSpec {
    RingSpec::new(GroupSpec::new(p, lambda.to_vec()).unwrap(), e).unwrap()
}

fn params() -> CheckParams {
    CheckParams {
        budget: SUITE_BUDGET,
        workers: 1,
        ..CheckParams::default()
    }
}

/// Runs `check` on every verifier selected by `keep`; returns (run, failures).
fn sweep(
    verifiers: &[Verifier],
    check: CheckId,
    keep: impl Fn(&RingSpec) -> bool,
) -> (usize, Vec<String>) {
    let mut run = 0;
    let mut failures = Vec::new();
    for v in verifiers {
        let spec = v.ring().spec();
        if !keep(spec) {
            continue;
        }
        run += 1;
        match v.run(check) {
            Ok(r) if r.passed() => {}
            Ok(r) => failures.push(format!(
                "{spec}: predicted {} observed {}",
                r.predicted, r.observed
            )),
            Err(err) => failures.push(format!("{spec}: {err}")),
        }
    }
    (run, failures)
}

fn summarize(run: usize, failures: Vec<String>, extra: &str) -> Outcome {
    if failures.is_empty() {
        outcome(run > 0, format!("{run} instances{extra}"))
    } else {
        outcome(
            false,
            format!("{} of {run} failed; first: {}", failures.len(), failures[0]),
        )
    }
}

fn order(spec: &RingSpec) -> u64 {
    spec.group().order().unwrap()
}

fn two_group_family() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for e in 2..=5 {
        let spec = rs(2, &[1], e);
        let theory = v_invariants(spec.group(), e).unwrap();
        if theory != AbelianInvariants::from_cyclic([1, e - 1]) {
            bad.push(format!("e={e}: closed form {}", theory.render(2)));
        }
        let report = Verifier::new(&spec, params())
            .unwrap()
            .run(CheckId::Theorem2)
            .unwrap();
        if !report.passed() {
            bad.push(format!("e={e}: oracle {}", report.observed));
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(1);
    let detail = if bad.is_empty() {
        format!("e=2..5 in {}", secs(elapsed))
    } else {
        bad.join("; ")
    };
    outcome(ok, detail)
}

fn binomial_valuations() -> Outcome {
    fn fact_val(p: u64, m: u64) -> u64 {
        let (mut t, mut q) = (0, p);
        while q <= m {
            t += m / q;
            q *= p;
        }
        t
    }
    let mut cases = 0u64;
    for p in [2u64, 3, 5] {
        for n in 0..=8 {
            let top = p.pow(n);
            for j in 1..=top {
                cases += 1;
                let legendre = fact_val(p, top) - fact_val(p, j) - fact_val(p, top - j);
                if binomial_p_power(p, n, j).ok().map(u64::from) != Some(legendre) {
                    return outcome(false, format!("p={p} n={n} j={j}"));
                }
            }
        }
    }
    outcome(true, format!("{cases} binomials"))
}

fn partitions(total: u32, cap: u32) -> Vec<Vec<u32>> {
    if total == 0 {
        return vec![vec![]];
    }
    (1..=cap.min(total))
        .rev()
        .flat_map(|first| {
            partitions(total - first, first)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

fn histogram_round_trip() -> Outcome {
    let mut groups = 0;
    for p in [2u64, 3] {
        for size in 1..=12 {
            for lambda in partitions(size, size) {
                let g = GroupSpec::new(p, lambda.clone()).unwrap();
                let mut h = OrderHistogram::default();
                for x in g.enumerate_elements() {
                    h.record(g.element_order_exp(&x));
                }
                let expected = AbelianInvariants::from_cyclic(lambda.iter().copied());
                match invariants_from_histogram(&h, p) {
                    Ok(got) if got == expected => groups += 1,
                    other => return outcome(false, format!("p={p} λ={lambda:?}: {other:?}")),
                }
            }
        }
    }
    outcome(
        true,
        format!("{groups} groups, p in {{2,3}}, size exponent <= 12"),
    )
}

fn suite_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let path = dir.path().join(format!("suite-{workers}.json"));
        let args = [
            "unitgroup",
            "suite",
            "--seed",
            "17",
            "--workers",
            &workers.to_string(),
            "--out",
            path.to_str().unwrap(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = unitgroup_cli::run(args, &mut out, &mut err);
        if code != 0 {
            return outcome(
                false,
                format!(
                    "workers={workers} exit {code}: {}",
                    String::from_utf8_lossy(&err)
                ),
            );
        }
        outputs.push(std::fs::read(&path).unwrap());
    }
    let same = outputs[0] == outputs[1];
    outcome(
        same,
        format!(
            "{} bytes, workers 1 vs 4 {}",
            outputs[0].len(),
            if same { "identical" } else { "differ" }
        ),
    )
}

fn main() {
    let catalog: Vec<RingSpec> = default_catalog()
        .iter()
        .map(|i| i.ring_spec().unwrap())
        .collect();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!(
            "[{}] {n:>2} {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };

    report(
        1,
        "V(Z/2^e C_2) = C_2 x C_2^(e-1), closed form and oracle",
        two_group_family(),
    );

    let start = Instant::now();
    let verifiers: Vec<Verifier> = catalog
        .iter()
        .map(|s| Verifier::new(s, params()).unwrap())
        .collect();
    let (run, failures) = sweep(&verifiers, CheckId::Theorem2, |_| true);
    let elapsed = start.elapsed();
    let mut o = summarize(
        run,
        failures,
        &format!(", single-threaded in {}", secs(elapsed)),
    );
    if elapsed >= Duration::from_secs(120) {
        o = outcome(false, format!("{} (limit 120 s)", o.detail));
    }
    report(2, "invariants of V, closed form vs census", o);

    let (run, failures) = sweep(&verifiers, CheckId::Theorem1, |s| s.e() >= 2);
    report(
        3,
        "order-p units: count and shape c + p^(e-1) z",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma6, |s| s.e() >= 2);
    report(
        4,
        "kernel of reduction mod p^(e-1) is elementary of order p^(|G|-1)",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma4, |s| s.e() == 1 && s.p() <= 3);
    report(
        5,
        "e=1: order-p units are exactly 1 + I(G[p])",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma3, |s| {
        order(s) <= 16 && s.e() <= 3
    });
    report(
        6,
        "dimension subgroups by Howell membership vs closed form",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma5, |s| order(s) <= 8 && s.e() <= 2);
    report(
        7,
        "|1+w^m| / |1+w^(m+1)| = |w^m / w^(m+1)|",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma2, |_| true);
    report(
        8,
        "(1-g)^(p^l) = (1-g^(p^s))^(p^(l-s))",
        summarize(run, failures, ""),
    );

    let (run, failures) = sweep(&verifiers, CheckId::Lemma9, |s| s.e() >= 2);
    report(
        9,
        "order of 1 + p^d y vs its shape",
        summarize(run, failures, ""),
    );
    drop(verifiers);

    report(
        10,
        "binomial valuations vs Legendre sums",
        binomial_valuations(),
    );
    report(
        11,
        "invariants recovered from synthetic order census",
        histogram_round_trip(),
    );
    report(
        12,
        "suite JSON byte-identical across worker counts",
        suite_determinism(),
    );

    let failed: Vec<u32> = results
        .iter()
        .filter(|(_, _, o)| !o.ok)
        .map(|(n, _, _)| *n)
        .collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
