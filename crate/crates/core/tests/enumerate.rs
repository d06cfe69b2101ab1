mod common;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use agspace::enumerate::{
    canonical_form, enumerate_models, naive_oracle, ModelClass, Search, SearchSpec,
};
use agspace::table::s3_reference;
use agspace::{classify, CayleyTable, StructureReport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn in_class(class: ModelClass, r: &StructureReport) -> bool {
    match class {
        ModelClass::Quasigroup => r.is_quasigroup.holds,
        ModelClass::MedialQuasigroup => r.is_quasigroup.holds && r.is_medial.holds,
        ModelClass::AgGroup => r.is_ag_group.holds,
        ModelClass::AbelianGroup => r.is_abelian_group.holds,
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn search_matches_the_oracle() {
    for class in ModelClass::ALL {
        for n in 1..=3 {
            let oracle = naive_oracle(n, class).unwrap();
            let labeled = enumerate_models(&SearchSpec::new(n, class)).unwrap();
            let iso = enumerate_models(&SearchSpec::new(n, class).up_to_iso(true)).unwrap();
            assert_eq!(labeled.count, oracle.labeled_count, "{class} {n}");
            assert_eq!(iso.models, oracle.models, "{class} {n}");
        }
    }
}

#[test]
fn every_labeled_model_is_in_its_class() {
    for class in ModelClass::ALL {
        for n in 1..=4 {
            let e = enumerate_models(&SearchSpec::new(n, class)).unwrap();
            assert_eq!(e.count, e.models.len());
            let distinct: BTreeSet<_> = e.models.iter().map(|t| t.entries().to_vec()).collect();
            assert_eq!(distinct.len(), e.count);
            for t in &e.models {
                assert!(in_class(class, &classify(t)), "{class}\n{t}");
            }
        }
    }
}

/// Orbit-stabilizer: the labeled count is the sum of n!/|Aut| over classes.
#[test]
fn labeled_and_iso_counts_are_consistent() {
    for class in ModelClass::ALL {
        for n in 1..=5 {
            let perms = permutations(n);
            let iso = enumerate_models(&SearchSpec::new(n, class).up_to_iso(true)).unwrap();
            let labeled = enumerate_models(&SearchSpec::new(n, class).count_only(true)).unwrap();
            let total: usize = iso
                .models
                .iter()
                .map(|t| {
                    let aut = perms.iter().filter(|p| &t.relabel(p).unwrap() == t).count();
                    perms.len() / aut
                })
                .sum();
            assert_eq!(total, labeled.count, "{class} {n}");
        }
    }
}

#[test]
fn canonical_form_ignores_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tables = common::models(ModelClass::Quasigroup, 1..=4);
    tables.extend(common::models(ModelClass::AgGroup, 5..=8));
    tables.push(CayleyTable::new(3, vec![0, 0, 1, 2, 2, 2, 1, 0, 0]).unwrap());
    for t in tables {
        let canon = canonical_form(&t, false).unwrap();
        assert_eq!(t.relabel(&canon.certificate).unwrap(), canon.table);
        for _ in 0..5 {
            let mut perm: Vec<usize> = t.elements().collect();
            perm.shuffle(&mut rng);
            let u = t.relabel(&perm).unwrap();
            assert_eq!(canonical_form(&u, false).unwrap().table, canon.table, "{t}");
        }
    }
}

#[test]
fn relabeled_s3_is_the_same_class() {
    let s3 = s3_reference();
    let swapped = s3.relabel(&[0, 2, 1]).unwrap();
    // x ↦ −x is an automorphism of y − x, so the swap fixes the table
    assert_eq!(s3, swapped);
    let z3 = CayleyTable::cyclic(3).unwrap();
    assert_ne!(
        canonical_form(&z3, false).unwrap().table,
        canonical_form(&s3, false).unwrap().table
    );
    let iso = enumerate_models(&SearchSpec::new(3, ModelClass::AgGroup).up_to_iso(true)).unwrap();
    assert_eq!(iso.count, 2);
    let canon = canonical_form(&swapped, false).unwrap().table;
    assert_eq!(canon, canonical_form(&s3, false).unwrap().table);
    assert!(iso.models.contains(&canon));
}

#[test]
fn seeded_search_recovers_the_golden_table() {
    let e1 = common::e1();
    let n = e1.order();
    let mut search = Search::new(n, ModelClass::AgGroup, Some(0))
        .unwrap()
        .unwrap();
    let seed: Vec<_> = (1..3)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, e1.op(a, b)))
        .collect();
    assert!(search.seed(&seed));
    let mut completions = 0;
    let mut found = false;
    let _ = search.run(|cells| {
        completions += 1;
        let t = CayleyTable::new(n, cells.iter().map(|&v| v as usize).collect()).unwrap();
        assert!(classify(&t).is_ag_group.holds);
        found |= t == e1;
        ControlFlow::Continue(())
    });
    assert!(
        found,
        "golden table missing among {completions} completions"
    );
}

#[test]
fn default_bounds_need_force() {
    let spec = SearchSpec::new(6, ModelClass::Quasigroup);
    assert!(enumerate_models(&spec).is_err());
    let forced = enumerate_models(
        &SearchSpec::new(9, ModelClass::AbelianGroup)
            .up_to_iso(true)
            .force(true),
    )
    .unwrap();
    assert_eq!(forced.count, 2);
}
