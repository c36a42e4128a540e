//! Rules: the basic definable regions used as candidate explanations.
//!
//! Continuous constraints are open intervals clipped to the feature's closed
//! domain, so an endpoint that coincides with a domain bound is included
//! (relatively open sets of the subspace). Integer constraints are inclusive
//! ranges and categorical constraints are value subsets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::bound;
use crate::set::PointSet;
use crate::space::{FeatureKind, FeatureSpace, FeatureSpec, Point, Value, EPS};

/// Per-feature constraint of a box rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Open interval `(lo, hi)` over a continuous feature.
    Open {
        #[serde(with = "bound")]
        lo: f64,
        #[serde(with = "bound")]
        hi: f64,
    },
    /// Inclusive range `[lo, hi]` over an integer feature.
    Range { lo: i64, hi: i64 },
    /// Sorted indices of admitted categorical values.
    Subset(Vec<usize>),
}

impl Constraint {
    /// The whole domain of a feature.
    pub fn full(feature: &FeatureSpec) -> Constraint {
        match &feature.kind {
            FeatureKind::Continuous { lower, upper } => Constraint::Open { lo: *lower, hi: *upper },
            FeatureKind::Integer { lo, hi } => Constraint::Range { lo: *lo, hi: *hi },
            FeatureKind::Categorical { values } => Constraint::Subset((0..values.len()).collect()),
        }
    }

    /// Clips to the feature domain and checks non-emptiness.
    fn normalize(self, feature: &FeatureSpec) -> Result<Constraint> {
        let out = match (self, &feature.kind) {
            (Constraint::Open { lo, hi }, FeatureKind::Continuous { lower, upper }) => {
                if lo.is_nan() || hi.is_nan() {
                    return Err(Error::structural("NaN interval bound"));
                }
                let lo = lo.max(*lower);
                let hi = hi.min(*upper);
                if lo >= hi {
                    return Err(Error::structural(format!(
                        "interval on `{}` is empty after clipping",
                        feature.name
                    )));
                }
                Constraint::Open { lo, hi }
            }
            (Constraint::Range { lo, hi }, FeatureKind::Integer { lo: dlo, hi: dhi }) => {
                let lo = lo.max(*dlo);
                let hi = hi.min(*dhi);
                if lo > hi {
                    return Err(Error::structural(format!(
                        "range on `{}` is empty after clipping",
                        feature.name
                    )));
                }
                Constraint::Range { lo, hi }
            }
            (Constraint::Subset(mut idx), FeatureKind::Categorical { values }) => {
                idx.sort_unstable();
                idx.dedup();
                if idx.is_empty() || idx.iter().any(|&i| i >= values.len()) {
                    return Err(Error::structural(format!(
                        "subset on `{}` is empty or out of range",
                        feature.name
                    )));
                }
                Constraint::Subset(idx)
            }
            (c, _) => {
                return Err(Error::structural(format!(
                    "constraint {c:?} does not match the kind of `{}`",
                    feature.name
                )))
            }
        };
        Ok(out)
    }

    pub(crate) fn admits(&self, feature: &FeatureSpec, v: &Value) -> bool {
        match (self, v) {
            (Constraint::Open { lo, hi }, Value::Real(x)) => {
                let (lower, upper) = match feature.kind {
                    FeatureKind::Continuous { lower, upper } => (lower, upper),
                    _ => return false,
                };
                (*x > *lo || (*x == *lo && *lo == lower)) && (*x < *hi || (*x == *hi && *hi == upper))
            }
            (Constraint::Range { lo, hi }, Value::Int(i)) => lo <= i && i <= hi,
            (Constraint::Subset(idx), Value::Symbol(s)) => match feature.symbol_index(s) {
                Some(k) => idx.binary_search(&k).is_ok(),
                None => false,
            },
            _ => false,
        }
    }

    pub(crate) fn intersect(&self, other: &Constraint) -> Option<Constraint> {
        match (self, other) {
            (Constraint::Open { lo: a, hi: b }, Constraint::Open { lo: c, hi: d }) => {
                let lo = a.max(*c);
                let hi = b.min(*d);
                (lo < hi).then_some(Constraint::Open { lo, hi })
            }
            (Constraint::Range { lo: a, hi: b }, Constraint::Range { lo: c, hi: d }) => {
                let lo = *a.max(c);
                let hi = *b.min(d);
                (lo <= hi).then_some(Constraint::Range { lo, hi })
            }
            (Constraint::Subset(a), Constraint::Subset(b)) => {
                let v: Vec<usize> = a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect();
                (!v.is_empty()).then_some(Constraint::Subset(v))
            }
            _ => None,
        }
    }

    pub(crate) fn is_subset_of(&self, other: &Constraint) -> bool {
        match (self, other) {
            (Constraint::Open { lo: a, hi: b }, Constraint::Open { lo: c, hi: d }) => *a >= *c - EPS && *b <= *d + EPS,
            (Constraint::Range { lo: a, hi: b }, Constraint::Range { lo: c, hi: d }) => a >= c && b <= d,
            (Constraint::Subset(a), Constraint::Subset(b)) => a.iter().all(|i| b.binary_search(i).is_ok()),
            _ => false,
        }
    }

    /// Discrete digits admitted by a constraint over an integer or categorical feature.
    pub(crate) fn digits(&self, feature: &FeatureSpec) -> Vec<usize> {
        match (self, &feature.kind) {
            (Constraint::Range { lo, hi }, FeatureKind::Integer { lo: dlo, .. }) => {
                ((lo - dlo) as usize..=(hi - dlo) as usize).collect()
            }
            (Constraint::Subset(idx), _) => idx.clone(),
            _ => Vec::new(),
        }
    }

    fn is_full(&self, feature: &FeatureSpec) -> bool {
        *self == Constraint::full(feature)
    }
}

/// A candidate explanation region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Rule {
    /// Axis-aligned box: one constraint per feature.
    Box { constraints: Vec<Constraint> },
    /// Open Euclidean ball over an all-continuous space.
    Ball { center: Vec<f64>, radius: f64 },
    /// Explicit set of points of a finite space (lexicographic indices).
    Set { members: PointSet },
}

impl Rule {
    /// Builds a box rule, clipping each constraint to its feature's domain.
    pub fn boxed(space: &FeatureSpace, constraints: Vec<Constraint>) -> Result<Rule> {
        if constraints.len() != space.dim() {
            return Err(Error::structural(format!(
                "box has {} constraints but the space has {} features",
                constraints.len(),
                space.dim()
            )));
        }
        let constraints = constraints
            .into_iter()
            .zip(space.features())
            .map(|(c, f)| c.normalize(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Rule::Box { constraints })
    }

    /// Box of open intervals on an all-continuous space.
    pub fn open_box(space: &FeatureSpace, bounds: &[(f64, f64)]) -> Result<Rule> {
        Rule::boxed(
            space,
            bounds.iter().map(|&(lo, hi)| Constraint::Open { lo, hi }).collect(),
        )
    }

    /// Box of inclusive ranges on an all-integer space.
    pub fn int_box(space: &FeatureSpace, bounds: &[(i64, i64)]) -> Result<Rule> {
        Rule::boxed(
            space,
            bounds.iter().map(|&(lo, hi)| Constraint::Range { lo, hi }).collect(),
        )
    }

    /// The box covering the whole domain.
    pub fn full(space: &FeatureSpace) -> Rule {
        Rule::Box {
            constraints: space.features().iter().map(Constraint::full).collect(),
        }
    }

    pub fn ball(space: &FeatureSpace, center: Vec<f64>, radius: f64) -> Result<Rule> {
        if !space.is_all_continuous() {
            return Err(Error::UnsupportedShape(
                "balls are defined only on all-continuous spaces".into(),
            ));
        }
        if center.len() != space.dim() {
            return Err(Error::structural("ball center arity does not match the space"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::structural(format!("ball radius must be positive, got {radius}")));
        }
        space.check_point(&Point::reals(&center))?;
        Ok(Rule::Ball { center, radius })
    }

    /// Explicit point set over a finite space.
    pub fn set(space: &FeatureSpace, members: impl IntoIterator<Item = usize>) -> Result<Rule> {
        let n = space
            .cardinality()
            .filter(|_| space.is_finite())
            .ok_or_else(|| Error::UnsupportedShape("explicit sets need a finite space".into()))?;
        let members: Vec<usize> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::structural("explicit rule sets must be non-empty"));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::structural(format!(
                "point index {bad} out of range for {n} points"
            )));
        }
        Ok(Rule::Set {
            members: PointSet::from_indices(n, members),
        })
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Rule::Box { .. })
    }

    pub fn constraints(&self) -> Option<&[Constraint]> {
        match self {
            Rule::Box { constraints } => Some(constraints),
            _ => None,
        }
    }

    /// Membership test; errors on arity or domain mismatch.
    pub fn contains(&self, space: &FeatureSpace, x: &Point) -> Result<bool> {
        space.check_point(x)?;
        self.check_space(space)?;
        Ok(self.contains_unchecked(space, x))
    }

    /// Membership for a point already known to be in `space`.
    pub(crate) fn contains_unchecked(&self, space: &FeatureSpace, x: &Point) -> bool {
        match self {
            Rule::Box { constraints } => constraints
                .iter()
                .zip(space.features())
                .zip(x.values())
                .all(|((c, f), v)| c.admits(f, v)),
            Rule::Ball { center, radius } => {
                let d2: f64 = center
                    .iter()
                    .zip(x.values())
                    .map(|(c, v)| {
                        let d = v.as_f64().unwrap_or(f64::NAN) - c;
                        d * d
                    })
                    .sum();
                d2.sqrt() < *radius
            }
            Rule::Set { members } => match space.index_of(x) {
                Ok(i) => members.contains(i),
                Err(_) => false,
            },
        }
    }

    fn check_space(&self, space: &FeatureSpace) -> Result<()> {
        let ok = match self {
            Rule::Box { constraints } => constraints.len() == space.dim(),
            Rule::Ball { center, .. } => center.len() == space.dim() && space.is_all_continuous(),
            Rule::Set { members } => space.is_finite() && space.cardinality() == Some(members.universe()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::structural("rule is not defined over this space"))
        }
    }

    /// Intersection of two rules; `None` when it is empty.
    pub fn intersect(&self, other: &Rule) -> Result<Option<Rule>> {
        match (self, other) {
            (Rule::Box { constraints: a }, Rule::Box { constraints: b }) => {
                if a.len() != b.len() {
                    return Err(Error::structural("boxes over different spaces"));
                }
                let mut out = Vec::with_capacity(a.len());
                for (ca, cb) in a.iter().zip(b) {
                    match ca.intersect(cb) {
                        Some(c) => out.push(c),
                        None => return Ok(None),
                    }
                }
                Ok(Some(Rule::Box { constraints: out }))
            }
            (Rule::Set { members: a }, Rule::Set { members: b }) => {
                if a.universe() != b.universe() {
                    return Err(Error::structural("sets over different spaces"));
                }
                let m = a.intersection(b);
                Ok((!m.is_empty()).then_some(Rule::Set { members: m }))
            }
            (Rule::Ball { .. }, _) | (_, Rule::Ball { .. }) => Err(Error::UnsupportedShape(
                "ball intersections are not balls; use a shrink witness".into(),
            )),
            _ => Err(Error::UnsupportedShape(
                "cannot intersect a box with an explicit set".into(),
            )),
        }
    }

    /// Region containment `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Rule, space: &FeatureSpace) -> Result<bool> {
        match (self, other) {
            (Rule::Box { constraints: a }, Rule::Box { constraints: b }) => {
                Ok(a.iter().zip(b).all(|(ca, cb)| ca.is_subset_of(cb)))
            }
            (Rule::Ball { center: c1, radius: r1 }, Rule::Ball { center: c2, radius: r2 }) => {
                Ok(euclid(c1, c2) + r1 <= r2 + EPS)
            }
            (Rule::Ball { center, radius }, Rule::Box { constraints }) => {
                Ok(center.iter().zip(constraints).all(|(c, k)| match k {
                    Constraint::Open { lo, hi } => c - radius >= lo - EPS && c + radius <= hi + EPS,
                    _ => false,
                }))
            }
            (Rule::Box { constraints }, Rule::Ball { center, radius }) => {
                // Farthest corner of the box from the center.
                let mut d2 = 0.0;
                for (k, c) in constraints.iter().zip(center) {
                    match k {
                        Constraint::Open { lo, hi } => {
                            let d = (c - lo).abs().max((hi - c).abs());
                            d2 += d * d;
                        }
                        _ => return Ok(false),
                    }
                }
                Ok(d2.sqrt() <= radius + EPS)
            }
            _ if space.is_finite() => Ok(self.to_point_set(space)?.is_subset(&other.to_point_set(space)?)),
            _ => Err(Error::UnsupportedShape("cannot compare these rule shapes".into())),
        }
    }

    /// Members of the rule as a point set of a finite space.
    pub fn to_point_set(&self, space: &FeatureSpace) -> Result<PointSet> {
        let n = space
            .cardinality()
            .filter(|_| space.is_finite())
            .ok_or_else(|| Error::UnsupportedShape("point sets need a finite space".into()))?;
        match self {
            Rule::Set { members } => Ok(members.clone()),
            Rule::Box { constraints } => Ok(PointSet::from_indices(n, box_member_indices(space, constraints))),
            Rule::Ball { .. } => Err(Error::UnsupportedShape("balls need continuous spaces".into())),
        }
    }

    /// True when every continuous constraint has finite endpoints.
    pub fn is_bounded(&self) -> bool {
        match self {
            Rule::Box { constraints } => constraints.iter().all(|c| match c {
                Constraint::Open { lo, hi } => lo.is_finite() && hi.is_finite(),
                _ => true,
            }),
            Rule::Ball { .. } | Rule::Set { .. } => true,
        }
    }

    /// Number of non-trivial predicates: constrained features for a box, the
    /// dimension for a ball, one for an explicit set.
    pub fn length(&self, space: &FeatureSpace) -> usize {
        match self {
            Rule::Box { constraints } => constraints
                .iter()
                .zip(space.features())
                .filter(|(c, f)| !c.is_full(f))
                .count(),
            Rule::Ball { center, .. } => center.len(),
            Rule::Set { .. } => 1,
        }
    }

    /// Human-readable conjunction of predicates.
    pub fn describe(&self, space: &FeatureSpace) -> String {
        match self {
            Rule::Box { constraints } => {
                let mut parts = Vec::new();
                for (c, f) in constraints.iter().zip(space.features()) {
                    if c.is_full(f) {
                        continue;
                    }
                    let text = match (c, &f.kind) {
                        (Constraint::Open { lo, hi }, FeatureKind::Continuous { lower, upper }) => {
                            let mut s = String::new();
                            if lo.is_finite() {
                                let op = if lo == lower { "<=" } else { "<" };
                                let _ = write!(s, "{lo} {op} ");
                            }
                            s.push_str(&f.name);
                            if hi.is_finite() {
                                let op = if hi == upper { "<=" } else { "<" };
                                let _ = write!(s, " {op} {hi}");
                            }
                            s
                        }
                        (Constraint::Range { lo, hi }, _) if lo == hi => format!("{} = {lo}", f.name),
                        (Constraint::Range { lo, hi }, _) => format!("{lo} <= {} <= {hi}", f.name),
                        (Constraint::Subset(idx), FeatureKind::Categorical { values }) => {
                            let names: Vec<&str> = idx.iter().map(|&i| values[i].as_str()).collect();
                            format!("{} in {{{}}}", f.name, names.join(", "))
                        }
                        _ => format!("{c:?}"),
                    };
                    parts.push(text);
                }
                if parts.is_empty() {
                    "TRUE".into()
                } else {
                    parts.join(" AND ")
                }
            }
            Rule::Ball { center, radius } => {
                let names: Vec<&str> = space.features().iter().map(|f| f.name.as_str()).collect();
                format!("|({}) - {:?}| < {radius}", names.join(", "), center)
            }
            Rule::Set { members } => {
                let pts: Vec<String> = members
                    .iter()
                    .map(|i| space.point_at(i).map(|p| p.to_string()).unwrap_or_default())
                    .collect();
                format!("x in {{{}}}", pts.join(", "))
            }
        }
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lexicographic indices of the points inside a box over a finite space.
pub(crate) fn box_member_indices(space: &FeatureSpace, constraints: &[Constraint]) -> Vec<usize> {
    let digits: Vec<Vec<usize>> = constraints
        .iter()
        .zip(space.features())
        .map(|(c, f)| c.digits(f))
        .collect();
    let cards: Vec<usize> = space.features().iter().map(|f| f.cardinality().unwrap_or(1)).collect();
    if digits.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut pos = vec![0usize; digits.len()];
    loop {
        let idx = pos
            .iter()
            .zip(&digits)
            .zip(&cards)
            .fold(0usize, |acc, ((&p, d), &c)| acc * c + d[p]);
        out.push(idx);
        let mut k = digits.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < digits[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> FeatureSpace {
        FeatureSpace::unit_cube(2)
    }

    #[test]
    fn open_box_membership() {
        let s = square();
        let r = Rule::open_box(&s, &[(0.2, 0.7), (0.0, 1.0)]).unwrap();
        assert!(r.contains(&s, &Point::reals(&[0.5, 0.5])).unwrap());
        assert!(!r.contains(&s, &Point::reals(&[0.2, 0.5])).unwrap());
        // Endpoints on the domain bound are relatively open, hence included.
        assert!(r.contains(&s, &Point::reals(&[0.5, 0.0])).unwrap());
        assert!(r.contains(&s, &Point::reals(&[0.5, 1.0])).unwrap());
    }

    #[test]
    fn ball_membership() {
        let s = square();
        let b = Rule::ball(&s, vec![0.5, 0.5], 0.1).unwrap();
        assert!(!b.contains(&s, &Point::reals(&[0.5, 0.65])).unwrap());
        assert!(b.contains(&s, &Point::reals(&[0.55, 0.5])).unwrap());
    }

    #[test]
    fn membership_rejects_foreign_points() {
        let s = square();
        let r = Rule::full(&s);
        assert!(matches!(
            r.contains(&s, &Point::reals(&[0.5])),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            r.contains(&s, &Point::reals(&[0.5, 2.0])),
            Err(Error::Structural(_))
        ));
        assert!(r.contains(&s, &Point::ints(&[0, 1])).is_err());
    }

    #[test]
    fn box_intersections() {
        let s = square();
        let a = Rule::open_box(&s, &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let b = Rule::open_box(&s, &[(0.5, 2.0), (0.0, 1.0)]).unwrap();
        assert_eq!(
            a.intersect(&b).unwrap().unwrap(),
            Rule::open_box(&s, &[(0.5, 1.0), (0.0, 1.0)]).unwrap()
        );
        let c = Rule::open_box(&s, &[(0.0, 0.4), (0.0, 1.0)]).unwrap();
        let d = Rule::open_box(&s, &[(0.6, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(c.intersect(&d).unwrap(), None);

        let g = FeatureSpace::integer_grid(2, 5);
        let p = Rule::int_box(&g, &[(1, 3), (2, 4)]).unwrap();
        let q = Rule::int_box(&g, &[(3, 5), (0, 2)]).unwrap();
        assert_eq!(
            p.intersect(&q).unwrap().unwrap(),
            Rule::int_box(&g, &[(3, 3), (2, 2)]).unwrap()
        );
    }

    #[test]
    fn ball_intersection_is_unsupported() {
        let s = square();
        let b = Rule::ball(&s, vec![0.5, 0.5], 0.1).unwrap();
        assert!(matches!(b.intersect(&Rule::full(&s)), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn construction_rejects_empty_regions() {
        let s = square();
        assert!(Rule::open_box(&s, &[(0.5, 0.5), (0.0, 1.0)]).is_err());
        assert!(Rule::open_box(&s, &[(1.5, 2.0), (0.0, 1.0)]).is_err());
        assert!(Rule::ball(&s, vec![0.5, 0.5], 0.0).is_err());
        let g = FeatureSpace::integer_grid(1, 3);
        assert!(Rule::set(&g, Vec::<usize>::new()).is_err());
        assert!(Rule::set(&g, [4]).is_err());
    }

    #[test]
    fn box_members_on_grids() {
        let g = FeatureSpace::integer_grid(2, 5);
        let r = Rule::int_box(&g, &[(1, 3), (2, 4)]).unwrap();
        let set = r.to_point_set(&g).unwrap();
        assert_eq!(set.len(), 9);
        for i in set.iter() {
            assert!(r.contains(&g, &g.point_at(i).unwrap()).unwrap());
        }
    }

    #[test]
    fn describes_rules() {
        let s = square();
        let r = Rule::open_box(&s, &[(0.2, 0.7), (0.0, 1.0)]).unwrap();
        assert_eq!(r.describe(&s), "0.2 < x0 < 0.7");
        assert_eq!(r.length(&s), 1);
        assert_eq!(Rule::full(&s).describe(&s), "TRUE");
    }

    fn arb_int_box() -> impl Strategy<Value = Vec<(i64, i64)>> {
        prop::collection::vec((0i64..6, 0i64..6).prop_map(|(a, b)| (a.min(b), a.max(b))), 2)
    }

    proptest! {
        #[test]
        fn intersection_membership_is_conjunction(a in arb_int_box(), b in arb_int_box(), x in 0i64..6, y in 0i64..6) {
            let g = FeatureSpace::integer_grid(2, 5);
            let ra = Rule::int_box(&g, &a).unwrap();
            let rb = Rule::int_box(&g, &b).unwrap();
            let p = Point::ints(&[x, y]);
            let both = ra.contains(&g, &p).unwrap() && rb.contains(&g, &p).unwrap();
            match ra.intersect(&rb).unwrap() {
                Some(r) => prop_assert_eq!(r.contains(&g, &p).unwrap(), both),
                None => prop_assert!(!both),
            }
        }

        #[test]
        fn continuous_intersection_membership(
            a in (0.0f64..1.0, 0.0f64..1.0), b in (0.0f64..1.0, 0.0f64..1.0), x in 0.0f64..=1.0
        ) {
            let s = FeatureSpace::unit_cube(1);
            let mk = |(p, q): (f64, f64)| Rule::open_box(&s, &[(p.min(q), p.max(q))]);
            if let (Ok(ra), Ok(rb)) = (mk(a), mk(b)) {
                let p = Point::reals(&[x]);
                let both = ra.contains(&s, &p).unwrap() && rb.contains(&s, &p).unwrap();
                match ra.intersect(&rb).unwrap() {
                    Some(r) => prop_assert_eq!(r.contains(&s, &p).unwrap(), both),
                    None => prop_assert!(!both),
                }
            }
        }
    }
}
