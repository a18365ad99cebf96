use std::collections::HashSet;

use relhyp::backends::{GroupBackend, SubgroupHandle};
use relhyp::presentation::extract_omega;
use relhyp::shrink::{descend, parabolic_witness, shrink_cyclic, shrink_peripheral_endpoints, NormedWordSet, ShrinkCase};
use relhyp::words::{is_cyclically_reduced, Word};
use relhyp::{bundled, Error};

fn words_up_to(b: &dyn GroupBackend, n: usize) -> Vec<Word> {
    let alphabet = b.presentation().alphabet().unwrap();
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &alphabet {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Subsets of size 1..=k with pairwise distinct elements.
fn injective_subsets(b: &dyn GroupBackend, pool: &[Word], k: usize) -> Vec<Vec<Word>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<Word>)> = vec![(0, Vec::new())];
    while let Some((start, cur)) = stack.pop() {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            continue;
        }
        let seen: HashSet<_> = cur.iter().map(|w| b.evaluate(w).unwrap()).collect();
        for i in start..pool.len() {
            if seen.contains(&b.evaluate(&pool[i]).unwrap()) {
                continue;
            }
            let mut next = cur.clone();
            next.push(pool[i].clone());
            stack.push((i + 1, next));
        }
    }
    out
}

fn whole(b: &dyn GroupBackend) -> SubgroupHandle {
    SubgroupHandle::from_elements(b.elements().unwrap())
}

#[test]
fn cyclic_lemma_sweep() {
    // no cyclically reduced geodesic of length at most 3 fails to be doubly
    // Λ-reduced in these models; s4cox has such words at length 5
    let mut shortened = 0;
    for (name, max_len, max_set) in [("s3", 3, 4), ("d4", 3, 4), ("s4cox", 3, 4), ("s4cox", 5, 2)] {
        let b = bundled::backend(name);
        let p = b.presentation();
        let om = extract_omega(p);
        let pool: Vec<Word> = words_up_to(b.as_ref(), max_len)
            .into_iter()
            .filter(|w| is_cyclically_reduced(w) && b.is_geodesic(w).unwrap())
            .collect();
        for set in injective_subsets(b.as_ref(), &pool, max_set) {
            if set.iter().all(Word::is_empty) {
                continue;
            }
            let s = NormedWordSet::new(set, whole(b.as_ref()), b.as_ref()).unwrap();
            for force in [false, true] {
                let out = shrink_cyclic(&s, b.as_ref(), &om, 1, force).unwrap();
                assert!(out.guarantee.all_hold(), "{name} {:?} {:?}", s.words(), out.guarantee);
                shortened += usize::from(out.case == ShrinkCase::Shortened && !out.s1.is_empty());
            }
        }
    }
    assert!(shortened > 0, "the shortening branch never ran");
}

#[test]
fn endpoint_lemma_sweep() {
    // S3 has diameter 2: its pool is empty and the sweep is vacuous there
    let mut cases = HashSet::new();
    for name in ["s3", "d4", "s4cox"] {
        let b = bundled::backend(name);
        let p = b.presentation();
        let om = extract_omega(p);
        let pool: Vec<Word> = words_up_to(b.as_ref(), 3)
            .into_iter()
            .filter(|w| {
                w.len() == 3
                    && w.first().unwrap().peripheral() == Some(0)
                    && w.last().unwrap().peripheral() == Some(0)
                    && b.is_geodesic(w).unwrap()
            })
            .collect();
        for set in injective_subsets(b.as_ref(), &pool, 4) {
            let s = NormedWordSet::new(set, whole(b.as_ref()), b.as_ref()).unwrap();
            let out = shrink_peripheral_endpoints(&s, 0, b.as_ref(), &om, 1).unwrap();
            assert!(out.guarantee.all_hold(), "{name} {:?} {:?}", s.words(), out.guarantee);
            assert!(out.omega_checks.iter().all(|c| c.holds), "{name} {:?}", out.omega_checks);
            cases.insert(out.case);
        }
    }
    assert!(cases.contains(&ShrinkCase::FirstEndpoint) || cases.contains(&ShrinkCase::LastEndpoint));
    eprintln!("endpoint cases reached {cases:?}");
}

#[test]
fn descent_sweep() {
    for name in bundled::FINITE_NAMES {
        let b = bundled::backend(name);
        let p = b.presentation();
        let om = extract_omega(p);
        let consts = p.constants().unwrap();
        let mut nonparabolic = 0;
        for h in b.subgroups().unwrap() {
            match descend(&h, b.as_ref(), &om, consts.c, consts.delta) {
                Ok(trace) => {
                    assert!(trace.holds(), "{name}: {trace:?}");
                    assert!(trace.steps.len() <= trace.ell);
                    nonparabolic += usize::from(!h.is_trivial());
                }
                Err(Error::ParabolicSubgroup(_)) => {
                    assert!(parabolic_witness(&h, b.as_ref()).unwrap().is_some());
                }
                Err(e) => panic!("{name}: {e}"),
            }
        }
        assert!(nonparabolic > 0, "{name}");
    }
}
