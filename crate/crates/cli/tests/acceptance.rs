//! Acceptance gate: runs every criterion and prints one PASS/FAIL line each.
//! Exits nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use concordance::certificate::{verify_certificate, IndependenceCertificate, Mode};
use concordance::cover::{cover_homology, whitehead_cover};
use concordance::knot::KnotExpr;
use concordance::obstruction::{check_slice_obstruction, Budget, CgProfile, ObstructionInstance, SliceVerdict};
use concordance::signature::{
    check_ordering_hypothesis, farey_half, levine_tristram, satellite_signature_function, signature_function, CirclePoint,
    SignatureEngine,
};
use concordance::subgroups::{subgroups_of_order_exp, HomocyclicGroup, Subgroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn knot(s: &str) -> KnotExpr {
    KnotExpr::parse(s).unwrap()
}

fn whitehead_orders() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for a in (-10i64..=10).filter(|&a| a != 0) {
        for b in (-10i64..=10).filter(|&b| b != 0) {
            let c = whitehead_cover(a, b).map_err(|e| format!("({a},{b}): {e}"))?;
            let n = (4 * a * b - 1).unsigned_abs();
            ensure(c.group.is_cyclic() && c.group.order() == n, || format!("({a},{b}): got {}", c.group))?;
            checked += 1;
        }
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("{checked} patterns cyclic of order |4ab-1| in {t:.2?}"))
}

fn torus_covers() -> Outcome {
    let start = Instant::now();
    for n in (3i64..=99).step_by(2) {
        let h = cover_homology(&KnotExpr::torus(n).evaluate().unwrap()).map_err(|e| e.to_string())?;
        ensure(h.group.order() == n as u64, || format!("torus(2,{n}): order {}", h.group.order()))?;
    }
    let t = within(start, Duration::from_secs(5))?;
    Ok(format!("49 torus covers of order n in {t:.2?}"))
}

const CORPUS: [&str; 20] = [
    "torus(2,3)",
    "torus(2,5)",
    "torus(2,7)",
    "torus(2,9)",
    "torus(2,13)",
    "mirror(torus(2,3))",
    "mirror(torus(2,5))",
    "mirror(torus(2,11))",
    "torus(2,3) # torus(2,5)",
    "torus(2,3) # mirror(torus(2,3))",
    "torus(2,5) # mirror(torus(2,3))",
    "2*torus(2,3)",
    "3*mirror(torus(2,5))",
    "4*torus(2,3) # mirror(torus(2,7))",
    "[[1,1],[0,-1]]",
    "[[-1,1],[0,2]]",
    "[[2,1],[0,3]] # torus(2,3)",
    "2*[[1,1],[0,-1]]",
    "torus(2,3) # torus(2,5) # torus(2,7)",
    "mirror(2*torus(2,5) # [[-1,1],[0,2]])",
];

fn signature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let points: Vec<CirclePoint> = (0..1000)
        .map(|_| {
            let p = rng.gen_range(2u64..=400);
            CirclePoint::new(rng.gen_range(0..p as i64), p).unwrap()
        })
        .collect();
    let mut disagreements = Vec::new();
    let mut on_jumps = 0;
    for s in CORPUS {
        let e = knot(s);
        let rows = e.evaluate().unwrap().matrix().to_rows();
        let engine = SignatureEngine::from_expr(&e).unwrap();
        for &x in &points {
            let exact = levine_tristram(&e, x).map_err(|err| err.to_string())?;
            let nullity = engine.nullity(x);
            let (sig, nu) = common::eigen_signature(&rows, x.to_f64());
            on_jumps += usize::from(!x.is_zero() && nullity > 0);
            if (exact, nullity) != (sig, nu) {
                disagreements.push(format!("{s} at {x}: exact ({exact}, {nullity}) vs oracle ({sig}, {nu})"));
            }
        }
    }
    ensure(disagreements.is_empty(), || format!("{} disagreements, first: {}", disagreements.len(), disagreements[0]))?;
    Ok(format!("{} expressions x {} points ({on_jumps} on jumps), 0 disagreements", CORPUS.len(), points.len()))
}

fn mirror_torus_positivity() -> Outcome {
    let mut sampled = 0;
    for n in [3u64, 5, 7, 9] {
        let engine = SignatureEngine::from_expr(&KnotExpr::torus(n as i64).mirror()).unwrap();
        for x in farey_half(200).into_iter().filter(|x| 2 * n * x.num() > x.den()) {
            let s = engine.signature(x);
            ensure(s > 0, || format!("mirror(torus(2,{n})) at {x}: {s}"))?;
            sampled += 1;
        }
    }
    Ok(format!("{sampled} samples with x > 1/(2n), 0 violations"))
}

fn ordering_ledger() -> Outcome {
    let base = KnotExpr::torus(5).mirror();
    let fam = |ms: &[i64]| ms.iter().map(|&m| KnotExpr::multiple(m, base.clone())).collect::<Vec<_>>();
    let short = check_ordering_hypothesis(&fam(&[1, 2]), 5).map_err(|e| e.to_string())?;
    ensure(!short.holds, || "{1,2} family unexpectedly passes".into())?;
    let long = check_ordering_hypothesis(&fam(&[1, 3, 7, 15]), 5).map_err(|e| e.to_string())?;
    ensure(long.holds, || "{1,3,7,15} family fails".into())?;
    let got: Vec<(i64, i64)> = long.knots.iter().map(|k| (k.min, k.max)).collect();
    ensure(got == [(2, 4), (6, 12), (14, 28), (30, 60)], || format!("ledger {got:?}"))?;
    Ok("{1,2} fails; {1,3,7,15} passes with 2/4, 6/12, 14/28, 30/60".into())
}

fn library_counts(p: u64, k: u32, n: usize) -> Result<Vec<(u64, usize)>, String> {
    let g = HomocyclicGroup::new(p, k, n).map_err(|e| e.to_string())?;
    (0..=g.order_exp())
        .map(|t| subgroups_of_order_exp(&g, t).map(|s| (p.pow(t), s.len())).map_err(|e| e.to_string()))
        .collect()
}

fn subgroup_counts() -> Outcome {
    let start = Instant::now();
    let cases: [(u64, u32, usize, bool); 4] = [(3, 1, 2, true), (2, 1, 4, true), (3, 2, 2, false), (3, 1, 4, false)];
    for (p, k, n, subsets) in cases {
        let q = p.pow(k);
        let oracle = if subsets { common::subset_subgroup_counts(q, n) } else { common::closure_subgroup_counts(q, n) };
        let lib = library_counts(p, k, n)?;
        for (order, count) in &lib {
            let expect = oracle.get(order).copied().unwrap_or(0);
            ensure(*count == expect, || format!("(Z{q})^{n} order {order}: {count} vs oracle {expect}"))?;
        }
        let total: usize = lib.iter().map(|x| x.1).sum();
        ensure(total == oracle.values().sum::<usize>(), || format!("(Z{q})^{n}: total mismatch"))?;
    }
    let z3 = library_counts(3, 1, 2)?;
    let z2 = library_counts(2, 1, 4)?;
    ensure(z3[1] == (3, 4), || format!("(Z3)^2 order 3: {:?}", z3[1]))?;
    ensure(z2[2] == (4, 35), || format!("(Z2)^4 order 4: {:?}", z2[2]))?;
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("4 groups match brute force (4 order-3 in (Z3)^2, 35 order-4 in (Z2)^4) in {t:.2?}"))
}

/// Checks the projection properties of `M ⊆ A ⊕ B`, `A` the first `m` coordinates.
fn projection_properties(g: &HomocyclicGroup, s: &Subgroup, m: usize) -> Result<(), String> {
    let els = s.elements(g);
    let is_zero = |x: &[u64]| x.iter().all(|&c| c == 0);
    let a_part: std::collections::HashSet<Vec<u64>> = els.iter().map(|x| x[..m].to_vec()).collect();
    let b_part: std::collections::HashSet<Vec<u64>> = els.iter().map(|x| x[m..].to_vec()).collect();
    let meets_b = els.iter().any(|x| !is_zero(x) && is_zero(&x[..m]));
    let meets_a = els.iter().any(|x| !is_zero(x) && is_zero(&x[m..]));
    if !meets_b {
        ensure(a_part.len() == els.len(), || format!("{s:?}: projection to A not injective"))?;
        let (half, a_exp) = (g.order_exp() as u64, (m as u64) * g.k as u64);
        if 2 * s.order_exp(g) as u64 == half {
            ensure(half <= 2 * a_exp, || format!("{s:?}: half-order exceeds |A|"))?;
        }
    }
    if !meets_a && !meets_b {
        ensure(a_part.len() == els.len() && b_part.len() == els.len(), || format!("{s:?}: projection orders differ"))?;
    }
    Ok(())
}

fn projection_checks() -> Outcome {
    let mut checked = 0;
    for (p, k, n) in [(3u64, 1u32, 2usize), (3, 1, 4), (3, 2, 2), (2, 1, 4)] {
        let g = HomocyclicGroup::new(p, k, n).map_err(|e| e.to_string())?;
        for t in 0..=g.order_exp() {
            for s in subgroups_of_order_exp(&g, t).map_err(|e| e.to_string())?.iter() {
                for m in 1..n {
                    projection_properties(&g, s, m)?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} subgroups, every split, 0 violations"))
}

fn end_to_end_demo() -> Outcome {
    let start = Instant::now();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = concordance_cli::run(["concordance", "--format", "json", "demo", "--a", "1", "--b", "1"], &mut out, &mut err);
    ensure(code == 0, || format!("exit {code}: {}", String::from_utf8_lossy(&err)))?;
    let cert: IndependenceCertificate = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    ensure(cert.options.mode == Mode::Exhaustive, || "demo did not run exhaustively".into())?;
    ensure(cert.prime == 3 && cert.exponent == 1, || format!("group Z{}^{}", cert.prime, cert.exponent))?;
    ensure(matches!(cert.profile, CgProfile::Zero), || "profile is not zero".into())?;
    ensure(!cert.combinations.is_empty(), || "no combinations".into())?;
    for c in &cert.combinations {
        ensure(c.positive.len() <= 3 && c.negative.len() <= 3, || format!("{:?} vs {:?}", c.positive, c.negative))?;
    }
    let report = verify_certificate(&cert).map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} combinations, {} subgroups all obstructed, re-verified in {t:.2?}",
        report.combinations, report.subgroups
    ))
}

fn winding_zero_contrast() -> Outcome {
    let pattern = signature_function(&knot("[[-1,1],[0,2]]"), 60).map_err(|e| e.to_string())?;
    let companions = [
        "unknot",
        "torus(2,3)",
        "mirror(torus(2,3))",
        "torus(2,5)",
        "torus(2,7) # torus(2,3)",
        "3*torus(2,3)",
        "[[1,1],[0,-1]]",
        "mirror(torus(2,9))",
        "2*torus(2,5) # mirror(torus(2,3))",
        "torus(2,11)",
    ];
    let mut moved = 0;
    for s in companions {
        let k = knot(s);
        let f = satellite_signature_function(0, &pattern, &k).map_err(|e| e.to_string())?;
        ensure(f == pattern, || format!("winding 0 with {s} changed the function"))?;
        if satellite_signature_function(2, &pattern, &k).map_err(|e| e.to_string())? != pattern {
            moved += 1;
        }
    }
    ensure(moved >= 8, || format!("winding 2 moved only {moved} companions"))?;
    Ok(format!("10 companions leave the winding-0 function unchanged (winding 2 moves {moved})"))
}

fn identical_sides() -> Outcome {
    let pattern = whitehead_cover(1, 1).map_err(|e| e.to_string())?;
    let sides = [vec!["mirror(torus(2,3))"], vec!["mirror(torus(2,3))", "3*mirror(torus(2,3))"]];
    for side in sides {
        let ks: Vec<KnotExpr> = side.iter().map(|s| knot(s)).collect();
        let inst = ObstructionInstance::new(pattern.clone(), CgProfile::Zero, ks.clone(), ks, 3).map_err(|e| e.to_string())?;
        let verdict = check_slice_obstruction(&inst, &Budget::default(), false).map_err(|e| e.to_string())?;
        ensure(matches!(verdict, SliceVerdict::Inconclusive { .. }), || format!("{side:?}: reported obstructed"))?;
    }
    Ok("identical sides reported inconclusive".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("whitehead cover orders", whitehead_orders),
        ("torus knot covers", torus_covers),
        ("signature engine vs eigenvalue oracle", signature_oracle),
        ("mirror torus positivity", mirror_torus_positivity),
        ("ordering hypothesis ledger", ordering_ledger),
        ("subgroup enumeration vs brute force", subgroup_counts),
        ("projection properties on enumerated subgroups", projection_checks),
        ("end-to-end demo", end_to_end_demo),
        ("winding-0 contrast", winding_zero_contrast),
        ("identical sides never obstructed", identical_sides),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
