//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails or exceeds its time limit.

mod common;

use std::time::{Duration, Instant};

use agspace::classify::pre_l1_suite;
use agspace::derived::{
    derived_identity, derived_inverse, generated_subalgebra, sample_left_invertive,
    MATERIALIZE_LIMIT,
};
use agspace::enumerate::{enumerate_models, naive_oracle, ModelClass, SearchSpec};
use agspace::parallelogram::verify_parallelogram_space;
use agspace::table::s3_reference;
use agspace::{build_derived, classify, CayleyTable, Par};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden() -> Outcome {
    let t: CayleyTable = include_str!("data/example_order12.tbl")
        .parse()
        .map_err(|e| format!("{e}"))?;
    let r = classify(&t);
    ensure(r.is_ag_group.holds, || "not an AG-group".into())?;
    ensure(!r.is_associative.holds, || "associative".into())?;
    ensure(!r.is_commutative.holds, || "commutative".into())?;
    ensure(r.left_identity == Some(0), || {
        format!("left identity {:?}", r.left_identity)
    })?;
    Ok("order 12 AG-group, neither associative nor commutative, left identity 0".into())
}

fn identity_suite() -> Outcome {
    let suite = pre_l1_suite(&common::e1());
    for entry in &suite {
        match &entry.outcome {
            Ok(v) if v.holds => {}
            Ok(v) => return Err(format!("{} fails at {:?}", entry.item, v.counterexample)),
            Err(e) => return Err(format!("{}: {e}", entry.item)),
        }
    }
    Ok(format!("{} items hold", suite.len()))
}

fn axioms() -> Outcome {
    let report = verify_parallelogram_space(&common::e1(), false).map_err(|e| e.to_string())?;
    for (name, v) in report.axioms() {
        ensure(v.holds, || {
            format!("{name} fails at {:?}", v.counterexample)
        })?;
    }
    Ok("P1-P4 and V1-V3 hold".into())
}

fn worked_examples() -> Outcome {
    let t = common::e1();
    let par = Par::new(&t).map_err(|e| e.to_string())?;
    let fv = par.fourth_vertex(3, 7, 2).map_err(|e| e.to_string())?;
    ensure(fv == 6, || format!("fourth_vertex(3,7,2) = {fv}"))?;
    let ratio = par.c1_ratio(3, 7).map_err(|e| e.to_string())?;
    ensure(ratio == 8, || format!("ratio {ratio}"))?;
    let ws = par.witnesses(3, 7, 2, 6).map_err(|e| e.to_string())?;
    for (q, p) in [(10, 1), (4, 3)] {
        ensure(ws.iter().any(|w| w.q == q && w.p == p), || {
            format!("missing q={q} -> p={p}")
        })?;
    }
    let shown = |r: agspace::Result<agspace::Parallelogram>| {
        r.map(|p| p.to_string()).map_err(|e| e.to_string())
    };
    let cases = [
        (shown(par.construct_t3(2, 7, 9))?, "Par(2,7,6,5)"),
        (shown(par.construct_t4(3, 8))?, "Par(3,8,2,11)"),
        (shown(par.construct_t5(5, 2))?, "Par(5,11,1,2)"),
        (shown(par.construct_c2(6).map(|(p, _)| p))?, "Par(6,4,1,0)"),
    ];
    for (got, want) in cases {
        ensure(got == want, || format!("got {got}, want {want}"))?;
    }
    Ok("all worked examples reproduce".into())
}

/// Witness pairs are found by brute force, independently of the ratio.
fn witness_ratio() -> Outcome {
    let t = common::e1();
    let par = Par::new(&t).map_err(|e| e.to_string())?;
    let n = t.order();
    let mut pairs = 0;
    for a in 0..n {
        for b in 0..n {
            let ratio = t.op(a, t.inverse(b).map_err(|e| e.to_string())?);
            for c in 0..n {
                let d = par.fourth_vertex(a, b, c).map_err(|e| e.to_string())?;
                let mut found = 0;
                for p in 0..n {
                    let p_inv = t.inverse(p).map_err(|e| e.to_string())?;
                    for q in 0..n {
                        if t.op(p, a) == t.op(q, b) && t.op(p, d) == t.op(q, c) {
                            ensure(t.op(p_inv, q) == ratio, || {
                                format!("({a},{b},{c},{d}) p={p} q={q}")
                            })?;
                            found += 1;
                        }
                    }
                }
                ensure(found == n, || {
                    format!("({a},{b},{c},{d}) has {found} witness pairs")
                })?;
                pairs += found;
            }
        }
    }
    Ok(format!(
        "{} parallelograms, {pairs} witness pairs",
        n.pow(3)
    ))
}

fn valid_quads(par: &Par) -> Result<Vec<agspace::Parallelogram>, String> {
    let n = par.table().order();
    (0..n * n * n)
        .map(|i| {
            let (a, b, c) = (i / (n * n), i / n % n, i % n);
            let d = par.fourth_vertex(a, b, c)?;
            par.parallelogram([a, b, c, d])
        })
        .collect::<agspace::Result<Vec<_>>>()
        .map_err(|e| e.to_string())
}

fn closure() -> Outcome {
    let mut pairs = 0usize;
    for t in common::models(ModelClass::AgGroup, 1..=4) {
        let par = Par::new(&t).map_err(|e| e.to_string())?;
        let quads = valid_quads(&par)?;
        for x in &quads {
            for y in &quads {
                let z = par.par_product(x, y).map_err(|e| e.to_string())?;
                ensure(z.valid, || format!("{x} @ {y} = {z} on\n{t}"))?;
                pairs += 1;
            }
        }
    }
    let t = common::e1();
    let par = Par::new(&t).map_err(|e| e.to_string())?;
    let quads = valid_quads(&par)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples = 100_000;
    for _ in 0..samples {
        let x = &quads[rng.gen_range(0..quads.len())];
        let y = &quads[rng.gen_range(0..quads.len())];
        let z = par.par_product(x, y).map_err(|e| e.to_string())?;
        ensure(z.valid, || format!("{x} @ {y} = {z} on the golden table"))?;
    }
    Ok(format!(
        "{pairs} exhaustive pairs, {samples} random pairs on the golden table"
    ))
}

fn derived_small() -> Outcome {
    let mut bases = common::models(ModelClass::AgGroup, 1..=4);
    bases.push(s3_reference());
    let count = bases.len();
    for t in &bases {
        let d = build_derived(t, MATERIALIZE_LIMIT).map_err(|e| e.to_string())?;
        let r = classify(d.table().expect("small derived algebras are materialized"));
        ensure(r.is_ag_group.holds, || {
            format!("derived algebra of\n{t}is not an AG-group")
        })?;
    }
    for n in [3, 4] {
        let d = build_derived(&CayleyTable::cyclic(n).unwrap(), MATERIALIZE_LIMIT)
            .map_err(|e| e.to_string())?;
        let r = classify(d.table().unwrap());
        ensure(r.is_abelian_group.holds, || {
            format!("derived algebra of Z{n} is not abelian")
        })?;
    }
    Ok(format!(
        "{count} bases give AG-groups; Z3 and Z4 give abelian groups"
    ))
}

fn derived_golden() -> Outcome {
    let d = build_derived(&common::e1(), MATERIALIZE_LIMIT).map_err(|e| e.to_string())?;
    ensure(d.order() == 1728, || format!("order {}", d.order()))?;
    derived_identity(&d).map_err(|e| e.to_string())?;
    for i in 0..d.order() {
        derived_inverse(&d, i).map_err(|e| e.to_string())?;
    }
    let samples = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    if let Some(bad) = sample_left_invertive(&d, samples, &mut rng).map_err(|e| e.to_string())? {
        return Err(format!("left invertive law fails at {bad:?}"));
    }
    // every triple inside two-generated subalgebras
    let mut generators = vec![[[3, 7, 2, 6], [2, 7, 6, 5]], [[5, 11, 1, 2], [6, 4, 1, 0]]]
        .into_iter()
        .map(|[x, y]| [d.index_of(x).unwrap(), d.index_of(y).unwrap()])
        .collect::<Vec<_>>();
    generators.extend((0..200).map(|_| [rng.gen_range(0..d.order()), rng.gen_range(0..d.order())]));
    let (mut subalgebras, mut triples) = (0, 0usize);
    for gens in generators {
        let Some(sub) = generated_subalgebra(&d, &gens, 200).map_err(|e| e.to_string())? else {
            continue;
        };
        subalgebras += 1;
        for &x in &sub {
            for &y in &sub {
                let xy = d.multiply(x, y).map_err(|e| e.to_string())?;
                for &z in &sub {
                    let lhs = d.multiply(xy, z).map_err(|e| e.to_string())?;
                    let rhs = d
                        .multiply(d.multiply(z, y).map_err(|e| e.to_string())?, x)
                        .map_err(|e| e.to_string())?;
                    ensure(lhs == rhs, || {
                        format!("left invertive law fails at ({x},{y},{z})")
                    })?;
                    triples += 1;
                }
            }
        }
    }
    ensure(subalgebras >= 2, || {
        "no two-generated subalgebra checked".into()
    })?;
    Ok(format!(
        "order 1728, identity and inverses checked, {samples} triples sampled, \
         {triples} triples in {subalgebras} two-generated subalgebras"
    ))
}

fn medial_derived() -> Outcome {
    let bases = common::models(ModelClass::MedialQuasigroup, 1..=4);
    for t in &bases {
        let d = build_derived(t, MATERIALIZE_LIMIT).map_err(|e| e.to_string())?;
        let r = classify(d.table().unwrap());
        ensure(r.is_quasigroup.holds && r.is_medial.holds, || {
            format!("derived algebra of\n{t}is not a medial quasigroup")
        })?;
    }
    Ok(format!("{} medial quasigroups checked", bases.len()))
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for class in ModelClass::ALL {
        for n in 1..=3 {
            let oracle = naive_oracle(n, class).map_err(|e| e.to_string())?;
            let labeled = enumerate_models(&SearchSpec::new(n, class).count_only(true))
                .map_err(|e| e.to_string())?;
            let iso = enumerate_models(&SearchSpec::new(n, class).up_to_iso(true))
                .map_err(|e| e.to_string())?;
            ensure(labeled.count == oracle.labeled_count, || {
                format!(
                    "{class} {n}: {} labeled, oracle {}",
                    labeled.count, oracle.labeled_count
                )
            })?;
            ensure(iso.models == oracle.models, || {
                format!("{class} {n}: canonical sets differ")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (class, order) pairs agree"))
}

fn decider_agreement() -> Outcome {
    let mut tables = common::models(ModelClass::AgGroup, 1..=6);
    tables.push(common::e1());
    let mut quads = 0usize;
    for t in &tables {
        let par = Par::new(t).map_err(|e| e.to_string())?;
        let n = t.order();
        for i in 0..n.pow(4) {
            let (a, b, c, d) = (i / n.pow(3), i / (n * n) % n, i % (n * n) / n, i % n);
            let def = par.holds(a, b, c, d).map_err(|e| e.to_string())?;
            let fv = par.fourth_vertex(a, b, c).map_err(|e| e.to_string())? == d;
            let t1 = par
                .t1_decompose(a, b, c, d)
                .map_err(|e| e.to_string())?
                .is_some();
            ensure(def == fv && def == t1, || {
                format!("({a},{b},{c},{d}): {def} {fv} {t1}")
            })?;
            quads += 1;
        }
    }
    Ok(format!("{quads} quadruples over {} tables", tables.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1", golden, 1),
        ("2", identity_suite, 5),
        ("3", axioms, 30),
        ("4", worked_examples, 1),
        ("5", witness_ratio, 10),
        ("6", closure, 60),
        ("7", derived_small, 60),
        ("7 (golden)", derived_golden, 300),
        ("8", medial_derived, 60),
        ("9", oracle_equivalence, 120),
        ("10", decider_agreement, 60),
    ];
    let mut failed = 0;
    for (id, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{msg}, but over the {limit}s limit"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {id}: PASS ({:.2?}) {msg}", elapsed),
            Err(msg) => {
                failed += 1;
                println!("criterion {id}: FAIL ({:.2?}) {msg}", elapsed);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
