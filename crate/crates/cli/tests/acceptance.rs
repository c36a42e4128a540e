//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rulex_core::classifiers::{int_labels, Node};
use rulex_core::engine::ExplainOutcome;
use rulex_core::family::ConditionCheck;
use rulex_core::lab::unexplained_points;
use rulex_core::measures::{hoeffding_radius, substream};
use rulex_core::{
    audit, check_equivalence, coverage, enumerate_basic, explain, fidelity_estimate, is_explainable,
    refinement_witness_continuous, sample_in_rule, verify_scalable, Classifier, Constraint, CoverageMeasure, Error,
    ExplanationScheme, ExtendedReal, FeatureSpace, FeatureSpec, Point, PointSet, Rule, RuleFamily, SearchBudget,
};

type Outcome = Result<String, String>;

/// Id, name, check, time limit.
type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T>(r: rulex_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(criterion: u64) -> ChaCha8Rng {
    substream(0xacce_97ed, criterion)
}

// ---------------------------------------------------------------------------
// Finite schemes and the definitional oracle

struct FiniteCase {
    n: usize,
    sets: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl FiniteCase {
    fn space(&self) -> FeatureSpace {
        FeatureSpace::integer_grid(1, self.n as i64 - 1)
    }

    fn scheme(&self) -> ExplanationScheme {
        ExplanationScheme::new(
            self.space(),
            RuleFamily::explicit(self.sets.clone()),
            CoverageMeasure::Weighted(self.weights.clone()),
        )
        .unwrap()
    }
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<usize> {
    if rng.random_bool(0.6) {
        let a = rng.random_range(0..n);
        let len = rng.random_range(1..=(n / 3).max(2));
        (a..(a + len).min(n)).collect()
    } else {
        let p = rng.random_range(0.1..0.5);
        let s: BTreeSet<usize> = (0..n).filter(|_| rng.random_bool(p)).collect();
        if s.is_empty() {
            BTreeSet::from([rng.random_range(0..n)])
        } else {
            s
        }
    }
}

/// Random generators plus covering sets, closed under intersection, at most 24 sets.
fn random_case(rng: &mut ChaCha8Rng) -> FiniteCase {
    loop {
        let n = rng.random_range(2..=64);
        let mut sets: BTreeSet<BTreeSet<usize>> = (0..rng.random_range(1..=5)).map(|_| random_set(rng, n)).collect();
        let covered = |sets: &BTreeSet<BTreeSet<usize>>, x: usize| sets.iter().any(|s| s.contains(&x));
        for x in 0..n {
            if !covered(&sets, x) {
                let len = rng.random_range(1..=(n / 2).max(1));
                let a = x.saturating_sub(rng.random_range(0..len));
                sets.insert((a..(a + len).min(n).max(x + 1)).collect());
            }
        }
        loop {
            let before = sets.len();
            let cur: Vec<BTreeSet<usize>> = sets.iter().cloned().collect();
            for (i, a) in cur.iter().enumerate() {
                for b in &cur[i + 1..] {
                    let c: BTreeSet<usize> = a.intersection(b).copied().collect();
                    if !c.is_empty() {
                        sets.insert(c);
                    }
                }
            }
            if sets.len() == before || sets.len() > 24 {
                break;
            }
        }
        if sets.len() > 24 {
            continue;
        }
        let weights = (0..n)
            .map(|_| {
                if rng.random_bool(0.6) {
                    0.0
                } else {
                    rng.random_range(1..=3) as f64
                }
            })
            .collect();
        return FiniteCase {
            n,
            sets: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            weights,
        };
    }
}

/// Labels painted set by set in random order, then a few flipped points.
fn random_labels(rng: &mut ChaCha8Rng, case: &FiniteCase, k: usize, flips: usize) -> Vec<usize> {
    let mut labels = vec![0; case.n];
    let mut order: Vec<usize> = (0..case.sets.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for j in order {
        let y = rng.random_range(0..k);
        for &x in &case.sets[j] {
            labels[x] = y;
        }
    }
    for _ in 0..flips {
        labels[rng.random_range(0..case.n)] = rng.random_range(0..k);
    }
    labels
}

/// Definitional check straight from the basis: the points with no constant
/// basic set around them form a set that is meagre and of measure zero.
///
/// On a finite space a meagre set is a finite union of nowhere dense sets,
/// which is itself nowhere dense, so meagre means nowhere dense here.
fn oracle(case: &FiniteCase, labels: &[usize]) -> (bool, Vec<usize>) {
    let n = case.n;
    let unexplained: Vec<usize> = (0..n)
        .filter(|&x| {
            !case
                .sets
                .iter()
                .any(|s| s.contains(&x) && s.iter().all(|&z| labels[z] == labels[x]))
        })
        .collect();
    let in_u = |z: usize| unexplained.contains(&z);
    let closure: Vec<bool> = (0..n)
        .map(|z| {
            case.sets
                .iter()
                .filter(|s| s.contains(&z))
                .all(|s| s.iter().any(|&w| in_u(w)))
        })
        .collect();
    let interior_of_closure_empty = !(0..n).any(|y| {
        case.sets
            .iter()
            .any(|s| s.contains(&y) && s.iter().all(|&w| closure[w]))
    });
    let null = unexplained.iter().map(|&x| case.weights[x]).sum::<f64>() == 0.0;
    (interior_of_closure_empty && null, unexplained)
}

fn criterion_1() -> Outcome {
    let mut rng = rng(1);
    let (mut agree, mut positive) = (0, 0);
    for i in 0..500 {
        let case = random_case(&mut rng);
        let report = ok(verify_scalable(&RuleFamily::explicit(case.sets.clone()), &case.space()))?;
        ensure!(report.is_scalable(), "case {i}: generated basis is not scalable");
        let k = rng.random_range(1..=4);
        let flips = rng.random_range(0..=2);
        let labels = random_labels(&mut rng, &case, k, flips);
        let sch = case.scheme();
        let f = ok(Classifier::table(sch.space(), labels.clone(), int_labels(k)))?;
        let verdict = ok(is_explainable(&sch, &f))?;
        let (want, unexplained) = oracle(&case, &labels);
        let got_u: Vec<usize> = ok(unexplained_points(&sch, &f))?
            .iter()
            .map(|p| sch.space().index_of(p).unwrap())
            .collect();
        ensure!(
            got_u == unexplained,
            "case {i}: unexplained {got_u:?} vs {unexplained:?}"
        );
        ensure!(
            verdict.explainable == want,
            "case {i}: verdict {} vs definition {want}",
            verdict.explainable
        );
        agree += 1;
        positive += usize::from(want);
    }
    Ok(format!(
        "{agree}/500 agree ({positive} explainable, {} not)",
        500 - positive
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let mut done = 0;
    let mut nontrivial = 0;
    while done < 200 {
        let case = random_case(&mut rng);
        let k = if rng.random_bool(0.5) { 3 } else { 5 };
        let n_labels = rng.random_range(2..=3);
        let mut members = Vec::new();
        for _ in 0..200 {
            if members.len() == k {
                break;
            }
            let flips = rng.random_range(0..=1);
            let labels = random_labels(&mut rng, &case, n_labels, flips);
            if oracle(&case, &labels).0 {
                members.push(labels);
            }
        }
        if members.len() < k {
            continue;
        }
        let sch = case.scheme();
        let fs: Vec<Classifier> = members
            .iter()
            .map(|l| Classifier::table(sch.space(), l.clone(), int_labels(n_labels)).unwrap())
            .collect();
        for f in &fs {
            ensure!(
                ok(is_explainable(&sch, f))?.explainable,
                "tuple {done}: member not explainable"
            );
        }
        let vote = ok(Classifier::ensemble(fs))?;
        ensure!(
            ok(is_explainable(&sch, &vote))?.explainable,
            "tuple {done}: ensemble not explainable"
        );
        let vote_labels = ok(vote.evaluate_batch(&ok(sch.space().enumerate_points())?))?;
        ensure!(
            oracle(&case, &vote_labels).0,
            "tuple {done}: ensemble fails the definitional check"
        );
        if vote_labels.iter().any(|&y| y != vote_labels[0]) {
            nontrivial += 1;
        }
        done += 1;
    }
    Ok(format!("200/200 ensembles explainable ({nontrivial} non-constant)"))
}

// ---------------------------------------------------------------------------
// The diagonal classifier on the unit square

/// Fraction of the open box above x0 + x1 = 1, integrating the clipped height.
fn area_above(lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let below = |x0: f64| (1.0 - x0 - lo[1]).clamp(0.0, hi[1] - lo[1]);
    let mut knots = vec![lo[0], hi[0]];
    for k in [1.0 - hi[1], 1.0 - lo[1]] {
        if k > lo[0] && k < hi[0] {
            knots.push(k);
        }
    }
    knots.sort_by(f64::total_cmp);
    let area_below: f64 = knots
        .windows(2)
        .map(|w| (w[1] - w[0]) * (below(w[0]) + below(w[1])) / 2.0)
        .sum();
    1.0 - area_below / ((hi[0] - lo[0]) * (hi[1] - lo[1]))
}

fn open_bounds(rule: &Rule) -> Vec<(f64, f64)> {
    rule.constraints()
        .expect("a box")
        .iter()
        .map(|c| match c {
            Constraint::Open { lo, hi } => (*lo, *hi),
            other => panic!("unexpected constraint {other:?}"),
        })
        .collect()
}

fn square_scheme() -> ExplanationScheme {
    ExplanationScheme::new(
        FeatureSpace::unit_cube(2),
        RuleFamily::bounded_boxes(),
        CoverageMeasure::Lebesgue,
    )
    .unwrap()
}

fn diagonal(space: &FeatureSpace) -> Classifier {
    Classifier::linear(space, vec![1.0, 1.0], -1.0, int_labels(2)).unwrap()
}

fn criterion_3() -> Outcome {
    let sch = square_scheme();
    let f = diagonal(sch.space());
    let report = ok(audit(&sch, &f, Some(1000), 0.95, &SearchBudget::default()))?;
    ensure!(report.sampled == 1000, "audited {} points", report.sampled);
    ensure!(
        report.unexplained_fraction == 0.0,
        "unexplained fraction {}",
        report.unexplained_fraction
    );
    let mut worst = 1.0f64;
    for e in &report.entries {
        let b = open_bounds(e.rule.as_ref().unwrap());
        let above = area_above([b[0].0, b[1].0], [b[0].1, b[1].1]);
        let fid = if e.point.real(0) + e.point.real(1) > 1.0 {
            above
        } else {
            1.0 - above
        };
        worst = worst.min(fid);
        ensure!(fid >= 0.95, "rule at {} has exact fidelity {fid}", e.point);
    }

    let mut fractions = Vec::new();
    for n in [10usize, 50, 100] {
        // Cells of the n x n grid, labelled at their centres.
        let g = FeatureSpace::integer_grid(2, n as i64 - 1);
        let labels: Vec<usize> = (0..n * n).map(|i| usize::from((i / n) + (i % n) + 1 > n)).collect();
        let t = ok(Classifier::table(&g, labels, int_labels(2)))?;
        let gs = ok(ExplanationScheme::new(
            g,
            RuleFamily::boxes(),
            CoverageMeasure::Counting,
        ))?;
        let v = ok(is_explainable(&gs, &t))?;
        let edge: usize = v.per_label.iter().map(|d| d.edge_part.len()).sum();
        let frac = edge as f64 / (n * n) as f64;
        ensure!(frac <= 2.0 / n as f64, "n={n}: edge fraction {frac}");
        fractions.push(format!("n={n}: {frac}"));
    }
    Ok(format!(
        "1000/1000 explained, worst exact fidelity {worst:.4}; grid edge fractions {}",
        fractions.join(", ")
    ))
}

// ---------------------------------------------------------------------------

fn f4_scheme(measure: CoverageMeasure) -> ExplanationScheme {
    ExplanationScheme::new(
        FeatureSpace::integer_grid(1, 3),
        RuleFamily::explicit(vec![vec![0, 1], vec![1], vec![1, 2, 3]]),
        measure,
    )
    .unwrap()
}

fn criterion_4() -> Outcome {
    let sch = f4_scheme(CoverageMeasure::Counting);
    let f = ok(Classifier::table(sch.space(), vec![0, 1, 0, 0], int_labels(2)))?;
    let v = ok(is_explainable(&sch, &f))?;
    ensure!(!v.explainable, "counting: reported explainable");
    let d = &v.per_label[0];
    ensure!(d.edge_part.to_vec() == vec![0, 2, 3], "edge {:?}", d.edge_part.to_vec());
    ensure!(
        d.edge_is_meagre && !d.edge_is_null,
        "edge meagre={} null={}",
        d.edge_is_meagre,
        d.edge_is_null
    );
    let w = ok(sch.with_measure(CoverageMeasure::Weighted(vec![0.0, 1.0, 0.0, 0.0])))?;
    let v = ok(is_explainable(&w, &f))?;
    ensure!(v.explainable, "weighted: reported not explainable");
    Ok("counting: not explainable, edge {0,2,3} meagre and not null; weighted: explainable".into())
}

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    let mut checked = 0usize;
    for i in 0..10_000u64 {
        let d = rng.random_range(2..=3);
        let space = FeatureSpace::new(
            (0..d)
                .map(|k| FeatureSpec::continuous(format!("x{k}"), -1.0, 2.0))
                .collect(),
        )
        .unwrap();
        let outer = if rng.random_bool(0.5) {
            let bounds: Vec<(f64, f64)> = (0..d)
                .map(|_| {
                    let a = rng.random_range(0.0..0.9);
                    (a, rng.random_range(a + 0.05..=1.0))
                })
                .collect();
            ok(Rule::open_box(&space, &bounds))?
        } else {
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..0.8)).collect();
            ok(Rule::ball(&space, c, rng.random_range(0.05..0.5)))?
        };
        let x = ok(sample_in_rule(&space, &CoverageMeasure::Lebesgue, &outer, 1, i))?.remove(0);
        let w = ok(refinement_witness_continuous(&space, &outer, &x))?;
        ensure!(ok(w.contains(&space, &x))?, "pair {i}: witness misses the point");
        let pts = ok(sample_in_rule(
            &space,
            &CoverageMeasure::Lebesgue,
            &w,
            1000,
            i + 1_000_000,
        ))?;
        for p in &pts {
            ensure!(
                ok(outer.contains(&space, p))?,
                "pair {i}: witness point {p} escapes {outer:?}"
            );
        }
        checked += pts.len();
    }

    let grid = FeatureSpace::integer_grid(1, 3);
    let f4 = RuleFamily::explicit(vec![vec![0, 1], vec![1], vec![1, 2, 3]]);
    let singletons = RuleFamily::explicit((0..4).map(|i| vec![i]).collect());
    let v = ok(check_equivalence(&f4, &singletons, &grid))?;
    ensure!(!v.equivalent, "F4 and singletons reported equivalent");
    let c = v.counterexample.ok_or("no counterexample")?;
    let rule_set = ok(c.rule.to_point_set(&grid))?;
    let x = ok(grid.index_of(&c.point))?;
    ensure!(rule_set.contains(x), "counterexample point outside its rule");
    let f4_sets: Vec<PointSet> = ok(enumerate_basic(&f4, &grid))?
        .map(|r| r.to_point_set(&grid).unwrap())
        .collect();
    ensure!(
        !f4_sets.iter().any(|b| b.contains(x) && b.is_subset(&rule_set)),
        "counterexample is refined after all"
    );
    Ok(format!(
        "10000 witnesses, {checked} sampled points, 0 violations; counterexample ({:?}, {})",
        rule_set.to_vec(),
        c.point
    ))
}

fn criterion_6() -> Outcome {
    let space = FeatureSpace::new(vec![
        FeatureSpec::continuous("x0", 0.0, f64::INFINITY),
        FeatureSpec::continuous("x1", 0.0, 1.0),
    ])
    .unwrap();
    for bounds in [[(0.0, f64::INFINITY), (0.0, 0.5)], [(3.0, f64::INFINITY), (0.2, 1.0)]] {
        let r = ok(Rule::open_box(&space, &bounds))?;
        let c = ok(coverage(&space, &CoverageMeasure::Lebesgue, &r))?;
        ensure!(c == ExtendedReal::Infinite, "coverage of {bounds:?} is {c:?}");
    }
    let cuts: Vec<f64> = (1..=10).map(f64::from).collect();
    let open = RuleFamily::boxes_with_cuts([("x0", cuts.clone()), ("x1", vec![0.5])]);
    let f = ok(Classifier::linear(&space, vec![1.0, 0.0], -5.0, int_labels(2)))?;
    let x = Point::reals(&[2.5, 0.3]);
    let sch = ok(ExplanationScheme::new(space.clone(), open, CoverageMeasure::Lebesgue))?;
    match explain(&sch, &f, &x, 0.95, 0.0, &SearchBudget::default()) {
        Err(Error::Principle2Violation(_)) => {}
        other => return Err(format!("unbounded family accepted: {other:?}")),
    }
    let bounded = RuleFamily::Boxes {
        bounded_only: true,
        min_cells: 1,
        cuts: [("x0".to_string(), cuts), ("x1".to_string(), vec![0.5])].into(),
    };
    let sch = ok(ExplanationScheme::new(space, bounded, CoverageMeasure::Lebesgue))?;
    let e = match ok(explain(&sch, &f, &x, 0.95, 0.0, &SearchBudget::default()))? {
        ExplainOutcome::Explained(e) => e,
        other => return Err(format!("bounded family found nothing: {other:?}")),
    };
    ensure!(e.coverage.is_finite(), "coverage {:?}", e.coverage);
    Ok(format!(
        "unbounded rules cover +inf; guard fires; bounded_only explains with coverage {:?}",
        e.coverage
    ))
}

fn criterion_7() -> Outcome {
    let sch = square_scheme();
    let f = diagonal(sch.space());
    let r = ok(Rule::open_box(sch.space(), &[(0.25, 0.75), (0.25, 0.75)]))?;
    let x = Point::reals(&[0.7, 0.7]);
    ensure!(
        area_above([0.25, 0.25], [0.75, 0.75]) == 0.5,
        "oracle fidelity is not 0.5"
    );
    let n = 100_000;
    let conf = 0.95;
    let radius = hoeffding_radius(n, conf);
    let mut inside = 0;
    for seed in 0..100 {
        let e = ok(fidelity_estimate(&sch, &f, &r, &x, n, conf, seed))?;
        if (e.estimate - 0.5).abs() <= radius {
            inside += 1;
        }
    }
    ensure!(inside >= 95, "{inside}/100 within radius {radius}");
    Ok(format!("{inside}/100 estimates within {radius:.5} of 0.5"))
}

// ---------------------------------------------------------------------------
// Random trees on the unit cube

fn random_tree(rng: &mut ChaCha8Rng, depth: usize, cells: [(u32, u32); 3], root: bool) -> Node {
    if depth == 0 || (!root && rng.random_bool(0.3)) {
        return Node::Leaf(rng.random_range(0..2));
    }
    let feature = rng.random_range(0..3);
    let (lo, hi) = cells[feature];
    if hi - lo < 2 {
        return Node::Leaf(rng.random_range(0..2));
    }
    let t = rng.random_range(lo + 1..hi);
    let (mut left, mut right) = (cells, cells);
    left[feature] = (lo, t);
    right[feature] = (t, hi);
    Node::split(
        feature,
        f64::from(t) / 20.0,
        random_tree(rng, depth - 1, left, false),
        random_tree(rng, depth - 1, right, false),
    )
}

fn box_volume(b: &[(f64, f64)]) -> f64 {
    b.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product()
}

/// Exact fidelity: summed overlap of the rule with the label's leaf boxes.
fn tree_fidelity(f: &Classifier, rule: &Rule, x: &Point) -> f64 {
    let r = open_bounds(rule);
    let leaves = f.tree_preimage(&f.evaluate(x).unwrap()).unwrap();
    let overlap: f64 = leaves
        .iter()
        .map(|leaf| {
            let l = open_bounds(leaf);
            let meet: Vec<(f64, f64)> = r.iter().zip(&l).map(|(a, b)| (a.0.max(b.0), a.1.min(b.1))).collect();
            box_volume(&meet)
        })
        .sum();
    overlap / box_volume(&r)
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let sch = ok(ExplanationScheme::new(
        FeatureSpace::unit_cube(3),
        RuleFamily::bounded_boxes(),
        CoverageMeasure::Lebesgue,
    ))?;
    let (mut good, mut explained) = (0, 0);
    for run in 0..50u64 {
        let depth = rng.random_range(1..=4);
        let root = random_tree(&mut rng, depth, [(0, 20); 3], true);
        let f = ok(Classifier::tree(sch.space(), root, int_labels(2)))?;
        let x = Point::reals(&[rng.random(), rng.random(), rng.random()]);
        let budget = SearchBudget::default().with_seed(run);
        let e = match ok(explain(&sch, &f, &x, 0.95, 0.0, &budget))? {
            ExplainOutcome::Explained(e) => e,
            ExplainOutcome::NoExplanation(_) => continue,
        };
        explained += 1;
        let fid = tree_fidelity(&f, &e.rule, &x);
        if fid >= 0.95 {
            good += 1;
        }
        let leaf = ok(sch.coverage(&ok(f.leaf_box(&x))?))?.finite().unwrap();
        let got = e.coverage.finite().unwrap();
        ensure!(
            got >= leaf - 1e-12,
            "run {run}: coverage {got} below leaf coverage {leaf}"
        );
    }
    ensure!(good >= 48, "{good}/50 runs with exact fidelity >= 0.95");
    Ok(format!(
        "{good}/50 rules with exact fidelity >= 0.95; coverage >= leaf box in {explained}/{explained}"
    ))
}

// ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let spaces = vec![
        FeatureSpace::integer_grid(1, 7),
        FeatureSpace::integer_grid(2, 5),
        FeatureSpace::integer_grid(3, 3),
        FeatureSpace::unit_cube(2),
        FeatureSpace::new(vec![
            FeatureSpec::continuous("a", 0.0, 1.0),
            FeatureSpec::integer("b", -2, 2),
            FeatureSpec::categorical("c", ["r", "g", "b"]),
        ])
        .unwrap(),
    ];
    for s in &spaces {
        for fam in [RuleFamily::boxes(), RuleFamily::bounded_boxes()] {
            let r = ok(verify_scalable(&fam, s))?;
            ensure!(r.is_scalable(), "box family fails on {s:?}: {r:?}");
        }
    }
    let cut = RuleFamily::boxes_with_cuts([("x0", vec![0.25, 0.5]), ("x1", vec![0.1, 0.7, 0.9])]);
    ensure!(
        ok(verify_scalable(&cut, &FeatureSpace::unit_cube(2)))?.is_scalable(),
        "cut grid fails"
    );

    let s = FeatureSpace::new(vec![FeatureSpec::integer("x0", 0, 2), FeatureSpec::integer("x1", 0, 5)]).unwrap();
    let wide = RuleFamily::Boxes {
        bounded_only: false,
        min_cells: 2,
        cuts: Default::default(),
    };
    let r = ok(verify_scalable(&wide, &s))?;
    ensure!(r.condition1.passed(), "wide boxes fail to cover");
    let ConditionCheck::NoRefinement { first, second, point } = r.condition2 else {
        return Err("wide boxes pass Condition 2".into());
    };
    let a = ok(first.to_point_set(&s))?;
    let b = ok(second.to_point_set(&s))?;
    let x = ok(s.index_of(&point))?;
    ensure!(a.contains(x) && b.contains(x), "witness point is not shared");
    let both = a.intersection(&b);
    let refined = ok(enumerate_basic(&wide, &s))?
        .map(|c| c.to_point_set(&s).unwrap())
        .any(|c| c.contains(x) && c.is_subset(&both));
    ensure!(!refined, "a basic set fits inside the witness intersection");
    Ok(format!(
        "{} grids pass; wide boxes fail with ({}, {}, {point})",
        spaces.len() + 1,
        first.describe(&s),
        second.describe(&s)
    ))
}

fn criterion_10() -> Outcome {
    let fx = |name: &str| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name)
            .display()
            .to_string()
    };
    let runs: Vec<Vec<String>> = vec![
        vec![
            "explain",
            "--scheme",
            &fx("square.json"),
            "--model",
            &fx("linear.json"),
            "--point",
            "0.9,0.9",
            "--tau",
            "0.95",
            "--seed",
            "7",
        ],
        vec![
            "audit",
            "--scheme",
            &fx("square.json"),
            "--model",
            &fx("linear.json"),
            "--points",
            "200",
            "--seed",
            "3",
        ],
        vec![
            "audit",
            "--scheme",
            &fx("f4.json"),
            "--model",
            &fx("f4_table.json"),
            "--tau",
            "1",
        ],
        vec!["verify", "--scheme", &fx("f4.json"), "--model", &fx("f4_table.json")],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let once = || Command::new(env!("CARGO_BIN_EXE_rulex")).args(args).output().unwrap();
        let first = once();
        ensure!(!first.stdout.is_empty(), "{}: no output", args[0]);
        ensure!(once().stdout == first.stdout, "{}: repeated run differs", args[0]);
        for jobs in ["1", "4"] {
            let out = Command::new(env!("CARGO_BIN_EXE_rulex"))
                .args(args)
                .args(["--jobs", jobs])
                .output()
                .unwrap();
            ensure!(out.stdout == first.stdout, "{}: --jobs {jobs} differs", args[0]);
            ensure!(
                out.status.code() == first.status.code(),
                "{}: exit code differs",
                args[0]
            );
        }
    }
    Ok(format!(
        "{} commands byte-identical across repeats and --jobs 1/4",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "explainability verdict matches the definition",
            criterion_1,
            Duration::from_secs(60),
        ),
        (
            2,
            "majority vote preserves explainability",
            criterion_2,
            Duration::from_secs(60),
        ),
        (
            3,
            "linear classifier audit and grid edges",
            criterion_3,
            Duration::from_secs(120),
        ),
        (4, "fixture F4 verdicts", criterion_4, Duration::MAX),
        (5, "refinement witnesses and equivalence", criterion_5, Duration::MAX),
        (6, "unbounded coverage guard", criterion_6, Duration::MAX),
        (7, "fidelity estimate calibration", criterion_7, Duration::from_secs(60)),
        (8, "search on random trees", criterion_8, Duration::from_secs(120)),
        (9, "scalability verifier", criterion_9, Duration::MAX),
        (10, "deterministic CLI output", criterion_10, Duration::MAX),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.1?}, limit {limit:.0?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS criterion {id:>2} ({name}): {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2} ({name}): {why} [{took:.2?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
