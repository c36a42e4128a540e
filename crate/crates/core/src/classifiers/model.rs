//! JSON model documents.

use serde_json::{Map, Value as Json};

use super::{BlackBox, Classifier, Label, Node, SplitTest, DEFAULT_BATCH, DEFAULT_TIMEOUT_MS};
use crate::error::{Error, Result};
use crate::space::{FeatureKind, FeatureSpace, Value};

/// Parses a model document from text.
pub fn parse_model(text: &str, space: &FeatureSpace) -> Result<Classifier> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Error::parse("model", e.to_string()))?;
    load_model(&doc, space)
}

/// Builds a classifier from a model document over `space`.
pub fn load_model(doc: &Json, space: &FeatureSpace) -> Result<Classifier> {
    load_at(doc, space, "model")
}

fn object<'a>(doc: &'a Json, path: &str) -> Result<&'a Map<String, Json>> {
    doc.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json> {
    obj.get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field `{key}`")))
}

fn number(v: &Json, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::parse(path, "expected a number"))
}

fn label(v: &Json, path: &str) -> Result<Label> {
    match v {
        Json::Number(n) => n
            .as_i64()
            .map(Label::Int)
            .ok_or_else(|| Error::parse(path, "numeric labels must be integers")),
        Json::String(s) => Ok(Label::Symbol(s.clone())),
        _ => Err(Error::parse(path, "expected an integer or string label")),
    }
}

fn label_list(v: &Json, path: &str) -> Result<Vec<Label>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse(path, "expected an array of labels"))?;
    let labels = arr
        .iter()
        .enumerate()
        .map(|(i, l)| label(l, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if labels.is_empty() {
        return Err(Error::parse(path, "label set must not be empty"));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::parse(path, format!("duplicate label `{l}`")));
        }
    }
    Ok(labels)
}

fn declared_labels(obj: &Map<String, Json>, path: &str) -> Result<Option<Vec<Label>>> {
    obj.get("labels")
        .map(|v| label_list(v, &format!("{path}.labels")))
        .transpose()
}

fn wrap(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Structural(m) => Error::parse(path, m),
        other => other,
    }
}

fn load_at(doc: &Json, space: &FeatureSpace, path: &str) -> Result<Classifier> {
    let obj = object(doc, path)?;
    let kind = field(obj, "type", path)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{path}.type"), "expected a string"))?;
    match kind {
        "linear" => {
            let wpath = format!("{path}.weights");
            let weights = field(obj, "weights", path)?
                .as_array()
                .ok_or_else(|| Error::parse(&wpath, "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, w)| number(w, &format!("{wpath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let bias = obj
                .get("bias")
                .map(|b| number(b, &format!("{path}.bias")))
                .transpose()?
                .unwrap_or(0.0);
            let labels = declared_labels(obj, path)?.unwrap_or_else(|| vec![Label::Int(0), Label::Int(1)]);
            Classifier::linear(space, weights, bias, labels).map_err(wrap(path))
        }
        "tree" => {
            let root_path = format!("{path}.root");
            let declared = declared_labels(obj, path)?;
            let mut labels = declared.clone().unwrap_or_default();
            let root = parse_node(
                field(obj, "root", path)?,
                space,
                &root_path,
                &mut labels,
                declared.is_some(),
            )?;
            Classifier::tree(space, root, labels).map_err(wrap(path))
        }
        "table" => load_table(obj, space, path),
        "ensemble" => {
            let mpath = format!("{path}.members");
            let members = field(obj, "members", path)?
                .as_array()
                .ok_or_else(|| Error::parse(&mpath, "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, m)| load_at(m, space, &format!("{mpath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            if members.is_empty() {
                return Err(Error::parse(mpath, "ensemble needs at least one member"));
            }
            match declared_labels(obj, path)? {
                Some(labels) => Classifier::ensemble_with_labels(members, labels),
                None => Classifier::ensemble(members),
            }
            .map_err(wrap(path))
        }
        "blackbox" => {
            let cpath = format!("{path}.cmd");
            let cmd = field(obj, "cmd", path)?
                .as_array()
                .ok_or_else(|| Error::parse(&cpath, "expected an array of strings"))?
                .iter()
                .map(|c| c.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::parse(&cpath, "expected an array of strings"))?;
            let timeout = match obj.get("timeout_ms") {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| Error::parse(format!("{path}.timeout_ms"), "expected a positive integer"))?,
                None => DEFAULT_TIMEOUT_MS,
            };
            let batch = match obj.get("batch") {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| Error::parse(format!("{path}.batch"), "expected a positive integer"))?
                    as usize,
                None => DEFAULT_BATCH,
            };
            let labels = label_list(field(obj, "labels", path)?, &format!("{path}.labels"))?;
            let adapter = BlackBox::new(cmd, timeout, batch).map_err(|e| match e {
                Error::Parse { path: p, message } => Error::parse(format!("{path}.{p}"), message),
                other => other,
            })?;
            Classifier::blackbox(space, adapter, labels).map_err(wrap(path))
        }
        other => Err(Error::parse(
            format!("{path}.type"),
            format!("unknown model type `{other}`"),
        )),
    }
}

fn leaf_index(l: Label, labels: &mut Vec<Label>, fixed: bool, path: &str) -> Result<usize> {
    if let Some(i) = labels.iter().position(|x| *x == l) {
        return Ok(i);
    }
    if fixed {
        return Err(Error::parse(path, format!("label `{l}` is not in the declared labels")));
    }
    labels.push(l);
    Ok(labels.len() - 1)
}

fn parse_node(doc: &Json, space: &FeatureSpace, path: &str, labels: &mut Vec<Label>, fixed: bool) -> Result<Node> {
    let obj = object(doc, path)?;
    if let Some(l) = obj.get("leaf") {
        let lpath = format!("{path}.leaf");
        let l = label(l, &lpath)?;
        return Ok(Node::Leaf(leaf_index(l, labels, fixed, &lpath)?));
    }
    let spath = format!("{path}.split");
    let split = object(field(obj, "split", path)?, &spath)?;
    let fname = field(split, "feature", &spath)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{spath}.feature"), "expected a feature name"))?;
    let feature = space
        .feature_index(fname)
        .ok_or_else(|| Error::parse(format!("{spath}.feature"), format!("unknown feature `{fname}`")))?;
    let spec = space.feature(feature);
    let test = match (split.get("threshold"), split.get("subset")) {
        (Some(t), None) => {
            let tpath = format!("{spath}.threshold");
            let t = number(t, &tpath)?;
            let (lo, hi) = match spec.kind {
                FeatureKind::Continuous { lower, upper } => (lower, upper),
                FeatureKind::Integer { lo, hi } => (lo as f64, hi as f64),
                FeatureKind::Categorical { .. } => {
                    return Err(Error::parse(
                        tpath,
                        format!("`{fname}` is categorical; use a subset split"),
                    ))
                }
            };
            if !(t >= lo && t <= hi) {
                return Err(Error::parse(
                    tpath,
                    format!("threshold {t} outside the bounds [{lo}, {hi}] of `{fname}`"),
                ));
            }
            SplitTest::Threshold(t)
        }
        (None, Some(s)) => {
            let sp = format!("{spath}.subset");
            let arr = s
                .as_array()
                .ok_or_else(|| Error::parse(&sp, "expected an array of symbols"))?;
            let mut idx = Vec::with_capacity(arr.len());
            for (i, v) in arr.iter().enumerate() {
                let sym = match v {
                    Json::String(s) => s.clone(),
                    Json::Number(n) => n.to_string(),
                    _ => return Err(Error::parse(format!("{sp}[{i}]"), "expected a symbol")),
                };
                let d = spec.symbol_index(&sym).ok_or_else(|| {
                    Error::parse(format!("{sp}[{i}]"), format!("`{sym}` is not a value of `{fname}`"))
                })?;
                idx.push(d);
            }
            SplitTest::Subset(idx)
        }
        _ => return Err(Error::parse(&spath, "expected exactly one of `threshold` or `subset`")),
    };
    let left = parse_node(field(obj, "left", path)?, space, &format!("{path}.left"), labels, fixed)?;
    let right = parse_node(
        field(obj, "right", path)?,
        space,
        &format!("{path}.right"),
        labels,
        fixed,
    )?;
    Ok(Node::Split {
        feature,
        test,
        left: Box::new(left),
        right: Box::new(right),
    })
}

fn json_value(v: &Json) -> Option<Value> {
    match v {
        Json::Number(n) => Some(match n.as_i64() {
            Some(i) => Value::Int(i),
            None => Value::Real(n.as_f64()?),
        }),
        Json::String(s) => Some(Value::Symbol(s.clone())),
        _ => None,
    }
}

fn load_table(obj: &Map<String, Json>, space: &FeatureSpace, path: &str) -> Result<Classifier> {
    let n = space
        .cardinality()
        .filter(|_| space.is_finite())
        .ok_or_else(|| Error::parse(path, "table models need a finite space"))?;
    let declared = declared_labels(obj, path)?;
    let fixed = declared.is_some();
    let mut labels = declared.unwrap_or_default();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let rpath = format!("{path}.rows");
    let rows = field(obj, "rows", path)?
        .as_array()
        .ok_or_else(|| Error::parse(&rpath, "expected an array of rows"))?;
    for (r, row) in rows.iter().enumerate() {
        let here = format!("{rpath}[{r}]");
        let cells = row.as_array().ok_or_else(|| Error::parse(&here, "expected an array"))?;
        if cells.len() != space.dim() + 1 {
            return Err(Error::parse(
                &here,
                format!("expected {} point values and a label", space.dim()),
            ));
        }
        let values = cells[..space.dim()]
            .iter()
            .map(json_value)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::parse(&here, "point values must be numbers or symbols"))?;
        let point = space.point(values).map_err(wrap(&here))?;
        let lpath = format!("{here}[{}]", space.dim());
        let l = label(&cells[space.dim()], &lpath)?;
        let li = leaf_index(l, &mut labels, fixed, &lpath)?;
        let i = space.index_of(&point)?;
        match assignment[i] {
            Some(prev) if prev != li => {
                return Err(Error::parse(&here, format!("conflicting label for {point}")));
            }
            _ => assignment[i] = Some(li),
        }
    }
    let default = obj
        .get("default")
        .map(|d| {
            let dpath = format!("{path}.default");
            let l = label(d, &dpath)?;
            leaf_index(l, &mut labels, fixed, &dpath)
        })
        .transpose()?;
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            a.or(default).ok_or_else(|| {
                let p = space.point_at(i).map(|p| p.to_string()).unwrap_or_default();
                Error::parse(&rpath, format!("no row for point {p} and no default label"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Classifier::table(space, assignment, labels).map_err(wrap(path))
}
