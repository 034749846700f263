//! Worked examples: the six-row proof join, the motivating category
//! structure, refinement of an inferred dependency and the error measure.

mod common;

use common::brute_holds;
use joinfd::fd::FunctionalDependency as Fd;
use joinfd::fixture::{make_fixture, proof_tables, FixtureProfile};
use joinfd::sample::consensus;
use joinfd::{
    discover_join_fds, g3_error, join, violating_tuples, AttrId, AttrSet, FdSet, Instance,
    JoinOperator, JoinSpec, Origin, PipelineConfig,
};

fn attrs(ids: &[usize]) -> AttrSet {
    ids.iter().map(|&i| AttrId::new(i)).collect()
}

fn fd(lhs: &[usize], rhs: usize) -> Fd {
    Fd::new(attrs(lhs), AttrId::new(rhs))
}

fn on_first(op: JoinOperator) -> JoinSpec {
    JoinSpec::new(op, vec![AttrId::new(0)], vec![AttrId::new(0)])
}

#[test]
fn proof_join_has_the_printed_rows() {
    let (l, r) = proof_tables();
    let j = join(&l, &r, &on_first(JoinOperator::Inner)).unwrap();
    let mut rows: Vec<Vec<String>> = j
        .to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.unwrap()).collect())
        .collect();
    rows.sort();
    let expected: Vec<Vec<&str>> = vec![
        vec!["0", "0", "0", "0", "0"],
        vec!["1", "0", "1", "0", "0"],
        vec!["1", "0", "1", "1", "1"],
        vec!["1", "1", "1", "0", "0"],
        vec!["1", "1", "1", "1", "1"],
        vec!["2", "2", "2", "1", "0"],
    ];
    assert_eq!(rows, expected);
    // A A' -> b holds although neither part determines b alone.
    assert!(brute_holds(&j, attrs(&[1, 3]), AttrId::new(4)));
    assert!(!brute_holds(&j, attrs(&[1]), AttrId::new(4)));
    assert!(!brute_holds(&j, attrs(&[3]), AttrId::new(4)));
}

#[test]
fn proof_tables_need_mining_for_the_cross_dependency() {
    let (l, r) = proof_tables();
    let run = discover_join_fds(&l, &r, &on_first(JoinOperator::Inner), &PipelineConfig::default()).unwrap();
    assert!(run.stages.inferred.iter().all(|f| f.rhs != AttrId::new(4) || !f.lhs.is_subset(attrs(&[0, 1]))));
    assert!(run.fds.implies(&fd(&[1, 3], 4)));
    assert_eq!(run.fds.origin(&fd(&[1, 3], 4)), Some(Origin::Mined));
}

/// Admissions joined with patients: the inferred `{location, diagnosis} →
/// dob` shrinks to `diagnosis → dob`.
#[test]
fn inferred_dependency_is_refined_to_a_smaller_lhs() {
    let l = Instance::from_strs(
        "admissions",
        &["subject_id", "location", "diagnosis"],
        &[
            &["s1", "ER", "flu"],
            &["s2", "ER", "cold"],
            &["s3", "ICU", "flu"],
            &["s2", "ICU", "cold"],
        ],
    )
    .unwrap();
    let r = Instance::from_strs(
        "patients",
        &["subject_id", "dob"],
        &[&["s1", "d1"], &["s2", "d2"], &["s3", "d1"]],
    )
    .unwrap();
    let run = discover_join_fds(&l, &r, &on_first(JoinOperator::Inner), &PipelineConfig::default()).unwrap();
    let refined = fd(&[2], 4);
    assert_eq!(run.fds.origin(&refined), Some(Origin::Refined));
    assert!(!run.fds.contains(&fd(&[1, 2], 4)));
    let j = join(&l, &r, &on_first(JoinOperator::Inner)).unwrap();
    for f in run.fds.iter() {
        assert!(brute_holds(&j, f.lhs, f.rhs), "{f:?}");
    }
}

#[test]
fn motivating_profile_shows_every_category() {
    let p = FixtureProfile::parse("motivating").unwrap();
    let mut complete = 0;
    for seed in 0..20 {
        let f = make_fixture(&p, seed).unwrap();
        let run = discover_join_fds(&f.left, &f.right, &f.spec, &PipelineConfig { epsilon: f.epsilon, ..PipelineConfig::default() })
            .unwrap();
        let c = &run.report.origin_counts;
        let n = |k: &str| c.get(k).copied().unwrap_or(0);
        let preserved = n("preserved-left") + n("preserved-right");
        let upstaged = n("upstaged-left") + n("upstaged-right");
        let inferred = n("inferred") + n("refined");
        if preserved > 0 && upstaged > 0 && inferred > 0 && n("mined") > 0 {
            complete += 1;
        }
    }
    assert!(complete >= 10, "{complete} of 20 seeds show all four categories");
}

#[test]
fn error_measure_examples() {
    let t = Instance::from_strs("T", &["X", "Y"], &[&["a", "1"], &["a", "2"]]).unwrap();
    assert_eq!(g3_error(&t, attrs(&[0]), AttrId::new(1)).unwrap(), 0.5);
    let t = Instance::from_strs("T", &["X", "Y"], &[&["a", "1"], &["a", "1"], &["a", "2"]]).unwrap();
    let v = violating_tuples(&t, &fd(&[0], 1)).unwrap();
    assert_eq!(v.tuple_ids.into_iter().collect::<Vec<_>>(), vec![2]);
    let t = Instance::from_strs(
        "patients",
        &["expire_flag", "dod"],
        &[&["0", "none"], &["0", "none"], &["1", "d1"], &["1", "d1"], &["0", "d2"]],
    )
    .unwrap();
    assert_eq!(g3_error(&t, attrs(&[0]), AttrId::new(1)).unwrap(), 0.2);
    assert_eq!(violating_tuples(&t, &fd(&[0], 1)).unwrap().tuple_ids.len(), 1);
}

#[test]
fn consensus_examples() {
    let only: FdSet = [fd(&[0], 1), fd(&[0, 2], 1)].into_iter().collect();
    assert_eq!(consensus(&[only]).unwrap().to_vec(), vec![fd(&[0], 1)]);
    let a: FdSet = [fd(&[0], 1)].into_iter().collect();
    let b: FdSet = [fd(&[0], 1), fd(&[2], 1)].into_iter().collect();
    assert_eq!(consensus(&[a.clone(), b]).unwrap().to_vec(), vec![fd(&[0], 1)]);
    assert!(consensus(&[a, FdSet::new()]).unwrap().is_empty());
    assert!(consensus(&[]).is_err());
}
