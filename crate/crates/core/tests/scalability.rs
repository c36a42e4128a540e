//! Box-family verification against a literal scan over every basic triple.

use rulex_core::{enumerate_basic, verify_scalable, FeatureSpace, FeatureSpec, PointSet, RuleFamily};

/// Condition 1 and 2 by enumerating every basic set and every shared point.
fn brute_force(family: &RuleFamily, space: &FeatureSpace) -> (bool, bool) {
    let sets: Vec<PointSet> = enumerate_basic(family, space)
        .unwrap()
        .map(|r| r.to_point_set(space).unwrap())
        .collect();
    let n = space.cardinality().unwrap();
    let cover = (0..n).all(|x| sets.iter().any(|s| s.contains(x)));
    let mut refine = true;
    'outer: for a in &sets {
        for b in &sets {
            let both = a.intersection(b);
            for x in both.iter() {
                if !sets.iter().any(|c| c.contains(x) && c.is_subset(&both)) {
                    refine = false;
                    break 'outer;
                }
            }
        }
    }
    (cover, refine)
}

fn wide(min_cells: usize) -> RuleFamily {
    RuleFamily::Boxes {
        bounded_only: false,
        min_cells,
        cuts: Default::default(),
    }
}

#[test]
fn integer_box_families_agree_with_brute_force() {
    let spaces = [
        FeatureSpace::integer_grid(1, 4),
        FeatureSpace::integer_grid(2, 2),
        FeatureSpace::new(vec![
            FeatureSpec::integer("a", 0, 3),
            FeatureSpec::categorical("c", ["r", "g", "b"]),
        ])
        .unwrap(),
    ];
    let families = [
        RuleFamily::boxes(),
        wide(2),
        wide(3),
        RuleFamily::boxes_with_cuts([("a", vec![1.5])]),
        RuleFamily::boxes_with_cuts([("x0", vec![0.5, 1.5])]),
    ];
    for space in &spaces {
        for family in &families {
            if family.validate(space).is_err() {
                continue;
            }
            let report = verify_scalable(family, space).unwrap();
            let (c1, c2) = brute_force(family, space);
            assert_eq!(report.condition1.passed(), c1, "{family:?} on {space:?}");
            assert_eq!(report.condition2.passed(), c2, "{family:?} on {space:?}");
        }
    }
}

#[test]
fn explicit_families_agree_with_brute_force() {
    let s = FeatureSpace::integer_grid(1, 3);
    let cases = [
        vec![vec![0, 1], vec![1], vec![1, 2, 3]],
        vec![vec![0, 1], vec![1, 2], vec![3]],
        vec![vec![0, 1, 2], vec![3]],
        vec![vec![0], vec![1]],
    ];
    for sets in cases {
        let f = RuleFamily::explicit(sets.clone());
        let r = verify_scalable(&f, &s).unwrap();
        let (c1, c2) = brute_force(&f, &s);
        assert_eq!((r.condition1.passed(), r.condition2.passed()), (c1, c2), "{sets:?}");
    }
}
