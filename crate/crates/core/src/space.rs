//! Feature spaces and points.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::bound;

/// Absolute tolerance for floating-point comparisons against cuts and bounds.
pub const EPS: f64 = 1e-9;

/// Domain of a single feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous {
        #[serde(with = "bound", default = "neg_inf")]
        lower: f64,
        #[serde(with = "bound", default = "pos_inf")]
        upper: f64,
    },
    Integer {
        #[serde(alias = "lower")]
        lo: i64,
        #[serde(alias = "upper")]
        hi: i64,
    },
    Categorical {
        values: Vec<String>,
    },
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

fn pos_inf() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Continuous { lower, upper },
        }
    }

    pub fn integer(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Integer { lo, hi },
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                values: values.into_iter().map(Into::into).collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            FeatureKind::Continuous { lower, upper } => {
                if lower.is_nan() || upper.is_nan() || lower >= upper {
                    return Err(Error::structural(format!(
                        "feature `{}` needs lower < upper, got [{lower}, {upper}]",
                        self.name
                    )));
                }
            }
            FeatureKind::Integer { lo, hi } => {
                if lo > hi {
                    return Err(Error::structural(format!(
                        "feature `{}` needs lo <= hi, got [{lo}, {hi}]",
                        self.name
                    )));
                }
            }
            FeatureKind::Categorical { values } => {
                if values.is_empty() {
                    return Err(Error::structural(format!("feature `{}` has no values", self.name)));
                }
                let mut seen = HashSet::new();
                for v in values {
                    if !seen.insert(v) {
                        return Err(Error::structural(format!(
                            "feature `{}` repeats value `{v}`",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, FeatureKind::Continuous { .. })
    }

    /// A feature is bounded when it has both a minimum and a maximum value.
    pub fn is_bounded(&self) -> bool {
        match self.kind {
            FeatureKind::Continuous { lower, upper } => lower.is_finite() && upper.is_finite(),
            _ => true,
        }
    }

    /// Number of values of a discrete feature; `None` for continuous ones.
    pub fn cardinality(&self) -> Option<usize> {
        match &self.kind {
            FeatureKind::Continuous { .. } => None,
            FeatureKind::Integer { lo, hi } => usize::try_from(hi - lo).ok().and_then(|d| d.checked_add(1)),
            FeatureKind::Categorical { values } => Some(values.len()),
        }
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        match &self.kind {
            FeatureKind::Categorical { values } => values.iter().position(|v| v == symbol),
            _ => None,
        }
    }

    /// Position of a discrete value within the feature's enumeration.
    pub(crate) fn digit(&self, value: &Value) -> Result<usize> {
        match (&self.kind, value) {
            (FeatureKind::Integer { lo, hi }, Value::Int(v)) if v >= lo && v <= hi => Ok((v - lo) as usize),
            (FeatureKind::Categorical { .. }, Value::Symbol(s)) => self
                .symbol_index(s)
                .ok_or_else(|| Error::structural(format!("`{s}` is not a value of `{}`", self.name))),
            _ => Err(Error::structural(format!(
                "value {value} is outside the domain of `{}`",
                self.name
            ))),
        }
    }

    pub(crate) fn value_at(&self, digit: usize) -> Value {
        match &self.kind {
            FeatureKind::Integer { lo, .. } => Value::Int(lo + digit as i64),
            FeatureKind::Categorical { values } => Value::Symbol(values[digit].clone()),
            FeatureKind::Continuous { .. } => unreachable!("continuous features have no digits"),
        }
    }

    /// Coerces a raw value into this feature's representation, checking the domain.
    pub fn coerce(&self, value: Value) -> Result<Value> {
        let out = match (&self.kind, value) {
            (FeatureKind::Continuous { lower, upper }, v) => {
                let x = match v {
                    Value::Real(x) => x,
                    Value::Int(i) => i as f64,
                    Value::Symbol(s) => s
                        .parse::<f64>()
                        .map_err(|_| Error::structural(format!("`{s}` is not a number for `{}`", self.name)))?,
                };
                if !x.is_finite() || x < *lower || x > *upper {
                    return Err(Error::structural(format!(
                        "{x} is outside [{lower}, {upper}] for `{}`",
                        self.name
                    )));
                }
                Value::Real(x)
            }
            (FeatureKind::Integer { lo, hi }, v) => {
                let i = match v {
                    Value::Int(i) => i,
                    Value::Real(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => x as i64,
                    Value::Symbol(s) => s
                        .parse::<i64>()
                        .map_err(|_| Error::structural(format!("`{s}` is not an integer for `{}`", self.name)))?,
                    Value::Real(x) => {
                        return Err(Error::structural(format!("{x} is not an integer for `{}`", self.name)))
                    }
                };
                if i < *lo || i > *hi {
                    return Err(Error::structural(format!(
                        "{i} is outside [{lo}, {hi}] for `{}`",
                        self.name
                    )));
                }
                Value::Int(i)
            }
            (FeatureKind::Categorical { values }, v) => {
                let s = match v {
                    Value::Symbol(s) => s,
                    Value::Int(i) => i.to_string(),
                    Value::Real(x) => x.to_string(),
                };
                if !values.contains(&s) {
                    return Err(Error::structural(format!("`{s}` is not a value of `{}`", self.name)));
                }
                Value::Symbol(s)
            }
        };
        Ok(out)
    }
}

/// A single coordinate of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Symbol(String),
}

impl Value {
    /// Numeric view of integer and real values.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(x) => Some(*x),
            Value::Symbol(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Value::Symbol(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x}"),
            Value::Symbol(s) => f.write_str(s),
        }
    }
}

/// A point of a feature space, one value per feature in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Value>);

impl Point {
    /// Builds a point without checking it against a space.
    pub fn new(values: Vec<Value>) -> Self {
        Point(values)
    }

    pub fn reals(values: &[f64]) -> Self {
        Point(values.iter().map(|&x| Value::Real(x)).collect())
    }

    pub fn ints(values: &[i64]) -> Self {
        Point(values.iter().map(|&x| Value::Int(x)).collect())
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Value {
        &self.0[i]
    }

    pub fn real(&self, i: usize) -> f64 {
        self.0[i].as_f64().unwrap_or(f64::NAN)
    }
}

impl Eq for Point {}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for v in &self.0 {
            match v {
                Value::Int(i) => {
                    0u8.hash(state);
                    i.hash(state);
                }
                Value::Real(x) => {
                    1u8.hash(state);
                    // -0.0 and 0.0 compare equal, so they must hash equal.
                    let x = if *x == 0.0 { 0.0f64 } else { *x };
                    x.to_bits().hash(state);
                }
                Value::Symbol(s) => {
                    2u8.hash(state);
                    s.hash(state);
                }
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// An ordered list of uniquely named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct FeatureSpace {
    features: Vec<FeatureSpec>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    features: Vec<FeatureSpec>,
}

impl TryFrom<RawSpace> for FeatureSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        FeatureSpace::new(raw.features)
    }
}

impl From<FeatureSpace> for RawSpace {
    fn from(s: FeatureSpace) -> Self {
        RawSpace { features: s.features }
    }
}

impl FeatureSpace {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::structural("a feature space needs at least one feature"));
        }
        let mut names = HashSet::new();
        for f in &features {
            f.validate()?;
            if !names.insert(f.name.as_str()) {
                return Err(Error::structural(format!("duplicate feature name `{}`", f.name)));
            }
        }
        Ok(Self { features })
    }

    /// The unit hypercube `[0,1]^d` with features `x0..x{d-1}`.
    pub fn unit_cube(d: usize) -> Self {
        Self::new(
            (0..d)
                .map(|i| FeatureSpec::continuous(format!("x{i}"), 0.0, 1.0))
                .collect(),
        )
        .expect("unit cube is well formed")
    }

    /// The integer grid `{0..=hi}^d` with features `x0..x{d-1}`.
    pub fn integer_grid(d: usize, hi: i64) -> Self {
        Self::new((0..d).map(|i| FeatureSpec::integer(format!("x{i}"), 0, hi)).collect()).expect("grid is well formed")
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &FeatureSpec {
        &self.features[i]
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// True when every feature is integer or categorical.
    pub fn is_finite(&self) -> bool {
        self.features.iter().all(|f| !f.is_continuous())
    }

    pub fn is_all_continuous(&self) -> bool {
        self.features.iter().all(FeatureSpec::is_continuous)
    }

    pub fn continuous_dims(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.features[i].is_continuous()).collect()
    }

    /// Number of points of a finite space, if it fits in `usize`.
    pub fn cardinality(&self) -> Option<usize> {
        self.features
            .iter()
            .try_fold(1usize, |acc, f| f.cardinality().and_then(|c| acc.checked_mul(c)))
    }

    /// Validates and coerces raw values into a point of this space.
    pub fn point(&self, values: Vec<Value>) -> Result<Point> {
        if values.len() != self.dim() {
            return Err(Error::structural(format!(
                "point has {} values but the space has {} features",
                values.len(),
                self.dim()
            )));
        }
        let values = values
            .into_iter()
            .zip(&self.features)
            .map(|(v, f)| f.coerce(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Point(values))
    }

    /// Checks arity and domain membership of an existing point.
    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::structural(format!(
                "point has {} values but the space has {} features",
                x.len(),
                self.dim()
            )));
        }
        for (v, f) in x.values().iter().zip(&self.features) {
            let ok = match (&f.kind, v) {
                (FeatureKind::Continuous { lower, upper }, Value::Real(x)) => x >= lower && x <= upper,
                (FeatureKind::Integer { lo, hi }, Value::Int(i)) => i >= lo && i <= hi,
                (FeatureKind::Categorical { values }, Value::Symbol(s)) => values.contains(s),
                _ => false,
            };
            if !ok {
                return Err(Error::structural(format!(
                    "value {v} is outside the domain of `{}`",
                    f.name
                )));
            }
        }
        Ok(())
    }

    /// Parses comma-separated values in feature order; categorical values are bare symbols.
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let raw = text.split(',').map(|s| Value::Symbol(s.trim().to_string())).collect();
        self.point(raw)
    }

    fn require_finite(&self) -> Result<usize> {
        if let Some(f) = self.features.iter().find(|f| f.is_continuous()) {
            return Err(Error::NotEnumerable {
                feature: f.name.clone(),
                reason: "continuous features have no point enumeration".into(),
            });
        }
        self.cardinality()
            .ok_or_else(|| Error::structural("finite space is too large to enumerate"))
    }

    /// Lexicographic index of a point of a finite space.
    pub fn index_of(&self, x: &Point) -> Result<usize> {
        self.require_finite()?;
        if x.len() != self.dim() {
            return Err(Error::structural("point arity does not match the space"));
        }
        let mut idx = 0usize;
        for (f, v) in self.features.iter().zip(x.values()) {
            let card = f.cardinality().unwrap_or(1);
            idx = idx * card + f.digit(v)?;
        }
        Ok(idx)
    }

    /// Point at a lexicographic index of a finite space.
    pub fn point_at(&self, mut index: usize) -> Result<Point> {
        let n = self.require_finite()?;
        if index >= n {
            return Err(Error::structural(format!("index {index} out of range for {n} points")));
        }
        let mut values = vec![Value::Int(0); self.dim()];
        for (i, f) in self.features.iter().enumerate().rev() {
            let card = f.cardinality().unwrap_or(1);
            values[i] = f.value_at(index % card);
            index /= card;
        }
        Ok(Point(values))
    }

    /// All points of a finite space in lexicographic order.
    pub fn enumerate_points(&self) -> Result<Vec<Point>> {
        let n = self.require_finite()?;
        (0..n).map(|i| self.point_at(i)).collect()
    }
}
