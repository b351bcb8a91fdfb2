//! Property tests over random instances. Each case draws a seed and builds
//! its instance from a seeded generator, so failures shrink to a seed.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{bra_rule, known_observable, max_diff, random_levels};
use twostate::error::Error;
use twostate::linalg::{tensor, Ket};
use twostate::measure::{abl, abl_generalized, sequential_oracle, Observable, OutcomeDistribution};
use twostate::protocols::flip_backward_to_forward;
use twostate::random;
use twostate::states::{maximally_entangled, BackwardState, ForwardState};
use twostate::timeline::{enumerate, sample, Event, Timeline};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn post_selected(pre: ForwardState, b: &Observable, post: &Ket) -> Timeline {
    let d = pre.len();
    let proj = Observable::projector_onto(post).unwrap();
    let found = proj.outcome_index(1.0).unwrap();
    Timeline::new([("q", d)])
        .preselect(pre)
        .measure(b.clone(), &["q"], "b")
        .measure(proj, &["q"], "post")
        .postselect("post", found)
}

fn well_formed(d: &OutcomeDistribution) -> bool {
    d.probabilities().iter().all(|&p| p >= 0.0) && (d.total() - 1.0).abs() <= 1e-10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn time_symmetry(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let psi = random::forward(vec![d], &mut r);
        let phi = random::forward(vec![d], &mut r);
        let b = known_observable(&random_levels(d, &mut r), &mut r).obs;
        let forward = abl(&psi, &phi.to_backward(), &b).unwrap();
        let swapped = abl(&phi, &psi.to_backward(), &b).unwrap();
        prop_assert_eq!(forward, swapped);
    }

    #[test]
    fn unitary_covariance(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let psi = random::forward(vec![d], &mut r);
        let phi = random::backward(vec![d], &mut r);
        let b = known_observable(&random_levels(d, &mut r), &mut r).obs;
        let u = random::unitary(d, &mut r);
        let base = abl(&psi, &phi, &b).unwrap();
        let moved = abl(
            &psi.evolve(&u).unwrap(),
            &phi.evolve_back(&u.dagger()).unwrap(),
            &b.conjugated_by(&u).unwrap(),
        )
        .unwrap();
        prop_assert!(base.max_abs_diff(&moved) <= 1e-12);
    }

    #[test]
    fn erasure_equivalence(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let chi = random::ket(vec![d], &mut r);
        let known = known_observable(&random_levels(d, &mut r), &mut r);
        let got = abl_generalized(
            &maximally_entangled(d).unwrap(),
            &BackwardState::from_outcome(chi.clone()).unwrap(),
            &known.obs,
        )
        .unwrap();
        prop_assert!(max_diff(got.probabilities(), &bra_rule(&chi, &known)) <= 1e-12);
    }

    #[test]
    fn flip_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let chi = random::backward(vec![2], &mut r);
        let once = flip_backward_to_forward(&chi).unwrap();
        prop_assert!(chi.apply(once.ket()).unwrap().norm() <= 1e-12);
        let twice = flip_backward_to_forward(
            &BackwardState::from_coefficients(once.ket().clone()).unwrap(),
        )
        .unwrap();
        let minus = chi.coefficients().scaled(twostate::linalg::C64::new(-1.0, 0.0));
        prop_assert!(twice.ket().max_abs_diff(&minus) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// The ABL rule agrees with brute-force sequential measurement.
    #[test]
    fn oracle_equivalence(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let psi = random::forward(vec![d], &mut r);
        let post = random::ket(vec![d], &mut r);
        let b = known_observable(&random_levels(d, &mut r), &mut r).obs;
        let rule = abl(&psi, &BackwardState::from_outcome(post.clone()).unwrap(), &b).unwrap();
        let oracle = sequential_oracle(&post_selected(psi, &b, &post)).unwrap();
        prop_assert!(well_formed(&rule));
        prop_assert!(rule.max_abs_diff(&oracle[0].1) <= 1e-10);
    }

    /// Same with a generic entangled pre-selection and an untouched ancilla.
    #[test]
    fn oracle_equivalence_partial(seed in any::<u64>(), d in 2usize..=3, e in 2usize..=3) {
        let mut r = rng(seed);
        let pre = random::forward(vec![d, e], &mut r);
        let post = random::ket(vec![d], &mut r);
        let b = known_observable(&random_levels(d, &mut r), &mut r).obs;
        let rule =
            abl_generalized(&pre, &BackwardState::from_outcome(post.clone()).unwrap(), &b).unwrap();
        let proj = Observable::projector_onto(&post).unwrap();
        let found = proj.outcome_index(1.0).unwrap();
        let t = Timeline::new([("s", d), ("anc", e)])
            .preselect(pre)
            .guard(&["anc"])
            .measure(b, &["s"], "b")
            .measure(proj, &["s"], "post")
            .postselect("post", found);
        let oracle = sequential_oracle(&t).unwrap();
        prop_assert!(well_formed(&rule));
        prop_assert!(rule.max_abs_diff(&oracle[0].1) <= 1e-10);
    }
}

/// Two qubits, a few random measurements and unitaries, one post-selection.
fn random_timeline(r: &mut ChaCha20Rng) -> (Timeline, usize) {
    let mut t = Timeline::new([("a", 2), ("b", 2)]).preselect(random::forward(vec![2, 2], r));
    let steps = r.random_range(2..=4);
    for k in 0..steps {
        if r.random_bool(0.3) {
            t = t.unitary(
                random::unitary(4, r).with_dims(vec![2, 2]).unwrap(),
                &["a", "b"],
            );
        }
        let target = if r.random_bool(0.5) { "a" } else { "b" };
        t = t.measure(random::observable(2, r), &[target], &format!("m{k}"));
    }
    let post = r.random_range(0..steps);
    let at = t.events().len();
    t.push(Event::Postselect {
        label: format!("m{post}"),
        outcome: r.random_range(0..2),
    });
    (t, at)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn law_of_total_probability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (t, at) = random_timeline(&mut r);
        let Event::Postselect { label, .. } = t.events()[at].clone() else { unreachable!() };
        let mut open = t.clone();
        open.remove(at);
        let base = enumerate(&open).unwrap();
        let mut mixed: Vec<Vec<f64>> =
            base.measurements().iter().map(|m| vec![0.0; m.distribution.len()]).collect();
        for outcome in 0..2 {
            let mut v = open.clone();
            v.push(Event::Postselect { label: label.clone(), outcome });
            let run = match enumerate(&v) {
                Ok(run) => run,
                Err(Error::EmptyEnsemble { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            for (acc, m) in mixed.iter_mut().zip(run.measurements()) {
                for (a, p) in acc.iter_mut().zip(m.distribution.probabilities()) {
                    *a += run.postselection_probability() * p;
                }
            }
        }
        for (acc, m) in mixed.iter().zip(base.measurements()) {
            prop_assert!(max_diff(acc, m.distribution.probabilities()) <= 1e-12);
        }
    }

    #[test]
    fn three_consecutive_measurements_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let psi = random::forward(vec![3], &mut r);
        let b = known_observable(&random_levels(3, &mut r), &mut r).obs;
        let mut t = Timeline::new([("q", 3)])
            .preselect(psi)
            .measure(b.clone(), &["q"], "first")
            .measure(b.clone(), &["q"], "second")
            .measure(b, &["q"], "third");
        if r.random_bool(0.5) {
            let post = random::ket(vec![3], &mut r);
            let proj = Observable::projector_onto(&post).unwrap();
            let found = proj.outcome_index(1.0).unwrap();
            t = t.measure(proj, &["q"], "post").postselect("post", found);
        }
        let run = enumerate(&t).unwrap();
        let joint = run.joint_over(&["first", "second", "third"]).unwrap();
        let agree: f64 = joint
            .iter()
            .filter(|(k, _)| k[0] == k[1] && k[1] == k[2])
            .map(|(_, p)| p)
            .sum();
        prop_assert!((agree - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unitary_after_preselect_is_evolution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let psi = random::forward(vec![2, 2], &mut r);
        let u = random::unitary(4, &mut r).with_dims(vec![2, 2]).unwrap();
        let obs = random::observable(2, &mut r);
        let tail = |t: Timeline| t.measure(obs.clone(), &["a"], "m").measure(obs.clone(), &["b"], "n");
        let inserted = tail(
            Timeline::new([("a", 2), ("b", 2)]).preselect(psi.clone()).unitary(u.clone(), &["a", "b"]),
        );
        let evolved = tail(Timeline::new([("a", 2), ("b", 2)]).preselect(psi.evolve(&u).unwrap()));
        let x = enumerate(&inserted).unwrap();
        let y = enumerate(&evolved).unwrap();
        for (m, n) in x.measurements().iter().zip(y.measurements()) {
            prop_assert!(m.distribution.max_abs_diff(&n.distribution) <= 1e-14);
        }
    }
}

#[test]
fn sampler_ignores_thread_count() {
    let mut r = rng(99);
    let (t, _) = random_timeline(&mut r);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample(&t, 5000, 1234))
    };
    match (run(1), run(4)) {
        (Ok(a), Ok(b)) => assert_eq!(a.sampler().unwrap().records, b.sampler().unwrap().records),
        (Err(a), Err(b)) => assert_eq!(a, b),
        other => panic!("thread count changed the outcome: {other:?}"),
    }
}

#[test]
fn tensor_of_erased_pairs_is_still_maximally_entangled_per_pair() {
    let pair = maximally_entangled(2).unwrap();
    let both = tensor(pair.ket(), pair.ket());
    assert_eq!(both.dims(), &[2, 2, 2, 2]);
    assert!((both.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn sampling_matches_enumeration_on_every_builtin_timeline() {
    use twostate::experiments::builtin_timelines;
    for (name, t) in builtin_timelines() {
        let exact = enumerate(&t).unwrap();
        let run = sample(&t, 100_000, 5).unwrap();
        let accepted = run.sampler().unwrap().accepted;
        let rate = accepted as f64 / 100_000.0;
        let p = exact.postselection_probability();
        assert!(
            (rate - p).abs() <= common::five_sigma(p, 100_000),
            "{name}: acceptance {rate} vs {p}"
        );
        for (e, s) in exact.measurements().iter().zip(run.measurements()) {
            for (p, q) in e
                .distribution
                .probabilities()
                .iter()
                .zip(s.distribution.probabilities())
            {
                let band = common::five_sigma(*p, accepted);
                assert!(
                    (p - q).abs() <= band,
                    "{name} {}: exact {p}, sampled {q}",
                    e.label
                );
            }
        }
    }
}
