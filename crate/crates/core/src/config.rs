//! JSON scheme documents.
//!
//! A scheme document has the keys `features`, `family` and `measure`.
//! Explicit family sets list point indices or point value tuples, and an
//! empirical measure names a CSV file relative to the document's directory.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};
use crate::family::RuleFamily;
use crate::measures::{CoverageMeasure, Dataset};
use crate::scheme::ExplanationScheme;
use crate::space::{FeatureSpace, FeatureSpec, Value};

const SCHEME_KEYS: [&str; 3] = ["features", "family", "measure"];

fn object<'a>(doc: &'a Json, path: &str) -> Result<&'a Map<String, Json>> {
    doc.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json> {
    obj.get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field `{key}`")))
}

fn parse_json(text: &str, path: &str) -> Result<Json> {
    serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), format!("cannot read: {e}")))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Reads the `features` array of a document.
pub fn space_from_json(doc: &Json) -> Result<FeatureSpace> {
    let obj = object(doc, "scheme")?;
    let arr = field(obj, "features", "scheme")?
        .as_array()
        .ok_or_else(|| Error::parse("scheme.features", "expected an array"))?;
    let features = arr
        .iter()
        .enumerate()
        .map(|(i, f)| {
            serde_json::from_value::<FeatureSpec>(f.clone())
                .map_err(|e| Error::parse(format!("scheme.features[{i}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureSpace::new(features)
}

/// Reads a family object: `{"kind": "boxes" | "balls" | "explicit", ...}`.
pub fn family_from_json(doc: &Json, space: &FeatureSpace, path: &str) -> Result<RuleFamily> {
    let obj = object(doc, path)?;
    let family = if field(obj, "kind", path)?.as_str() == Some("explicit") {
        let mut rest = obj.clone();
        let sets = field(obj, "sets", path)?
            .as_array()
            .ok_or_else(|| Error::parse(format!("{path}.sets"), "expected an array of sets"))?;
        let sets = sets
            .iter()
            .enumerate()
            .map(|(i, s)| explicit_set(s, space, &format!("{path}.sets[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        rest.insert(
            "sets".into(),
            serde_json::to_value(sets).map_err(|e| Error::parse(path, e.to_string()))?,
        );
        serde_json::from_value::<RuleFamily>(Json::Object(rest))
    } else {
        serde_json::from_value::<RuleFamily>(doc.clone())
    }
    .map_err(|e| Error::parse(path, e.to_string()))?;
    family.validate(space)?;
    Ok(family)
}

/// Members given as indices, or as value tuples in feature order.
fn explicit_set(doc: &Json, space: &FeatureSpace, path: &str) -> Result<Vec<usize>> {
    let arr = doc
        .as_array()
        .ok_or_else(|| Error::parse(path, "expected an array of points"))?;
    arr.iter()
        .enumerate()
        .map(|(i, m)| {
            let at = format!("{path}[{i}]");
            match m {
                Json::Number(n) => n
                    .as_u64()
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::parse(&at, "point indices must be nonnegative integers")),
                Json::Array(_) => {
                    let values: Vec<Value> =
                        serde_json::from_value(m.clone()).map_err(|e| Error::parse(&at, e.to_string()))?;
                    let x = space.point(values).map_err(|e| Error::parse(&at, e.to_string()))?;
                    space.index_of(&x)
                }
                _ => Err(Error::parse(&at, "expected a point index or a value tuple")),
            }
        })
        .collect()
}

/// Reads a measure object. Dataset paths resolve against `base`.
pub fn measure_from_json(doc: &Json, space: &FeatureSpace, base: &Path) -> Result<CoverageMeasure> {
    let path = "scheme.measure";
    let obj = object(doc, path)?;
    let kind = field(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{path}.kind"), "expected a string"))?;
    let allowed: &[&str] = match kind {
        "counting" | "lebesgue" => &["kind"],
        "empirical" => &["kind", "dataset"],
        "weighted" => &["kind", "weights"],
        other => {
            return Err(Error::parse(
                format!("{path}.kind"),
                format!("unknown measure kind `{other}`"),
            ))
        }
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::parse(path, format!("unknown field `{k}` for a {kind} measure")));
    }
    let measure = match kind {
        "counting" => CoverageMeasure::Counting,
        "lebesgue" => CoverageMeasure::Lebesgue,
        "empirical" => {
            let file = field(obj, "dataset", path)?
                .as_str()
                .ok_or_else(|| Error::parse(format!("{path}.dataset"), "expected a file path"))?;
            CoverageMeasure::Empirical(Dataset::from_csv(space, &base.join(file))?)
        }
        _ => {
            let w: Vec<f64> = serde_json::from_value(field(obj, "weights", path)?.clone())
                .map_err(|e| Error::parse(format!("{path}.weights"), e.to_string()))?;
            CoverageMeasure::Weighted(w)
        }
    };
    measure.validate(space)?;
    Ok(measure)
}

/// Builds a scheme from document text; `base` resolves dataset paths.
pub fn parse_scheme(text: &str, base: &Path) -> Result<ExplanationScheme> {
    let doc = parse_json(text, "scheme")?;
    let obj = object(&doc, "scheme")?;
    if let Some(k) = obj.keys().find(|k| !SCHEME_KEYS.contains(&k.as_str())) {
        return Err(Error::parse("scheme", format!("unknown field `{k}`")));
    }
    let space = space_from_json(&doc)?;
    let family = family_from_json(field(obj, "family", "scheme")?, &space, "scheme.family")?;
    let measure = measure_from_json(field(obj, "measure", "scheme")?, &space, base)?;
    ExplanationScheme::new(space, family, measure)
}

pub fn load_scheme(path: &Path) -> Result<ExplanationScheme> {
    parse_scheme(&read(path)?, &base_dir(path))
}

/// Reads the features of a space document or of a full scheme document.
pub fn load_space(path: &Path) -> Result<FeatureSpace> {
    space_from_json(&parse_json(&read(path)?, &path.display().to_string())?)
}

/// Reads a bare family object, or the `family` of a scheme document.
pub fn load_family(path: &Path, space: &FeatureSpace) -> Result<RuleFamily> {
    let doc = parse_json(&read(path)?, &path.display().to_string())?;
    match doc.get("family") {
        Some(inner) => family_from_json(inner, space, "family"),
        None => family_from_json(&doc, space, "family"),
    }
}
