//! JSON input schemas and report serialization.
//!
//! Rationals travel as strings "p/q" (or "p" when the denominator is 1)
//! with the sign on the numerator; integer matrices as plain JSON numbers;
//! counts as decimal strings with the literal string "infinite" for the
//! infinite value. Emitted reports are deterministic: keys are ordered and
//! no hash-based iteration reaches the output.

use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::group::{BasisIndex, GroupElement, GroupPresentation, Polynomial, Term};
use crate::linalg::{
    rat_from_str, rat_to_string, ExtendedCount, IntegerMatrix, Rational, RationalMatrix,
};
use crate::nvalued::{AffineLift, AffineNValuedMap, MapReport};
use crate::torus::TorusFixedPoint;
use crate::twisted::{LayerDatum, TwistedSetup};

/// Parses a JSON document, reporting syntax errors with their position.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

fn as_object<'v>(v: &'v Value, what: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Parse(format!("{what} must be a JSON object")))
}

fn as_array<'v>(v: &'v Value, what: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be a JSON array")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|u| usize::try_from(u).ok())
        .ok_or_else(|| Error::Parse(format!("{what} must be a non-negative integer")))
}

fn get<'v>(obj: &'v Map<String, Value>, key: &str, what: &str) -> Result<&'v Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("{what} is missing field '{key}'")))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Parse(format!("{what} has unknown field '{key}'")));
        }
    }
    Ok(())
}

fn rational_from_value(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => rat_from_str(s),
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains('.') || s.contains('e') || s.contains('E') {
                return Err(Error::Parse(format!(
                    "{what}: rationals must be strings like \"p/q\", got float {s}"
                )));
            }
            rat_from_str(&s)
        }
        _ => Err(Error::Parse(format!("{what} must be a rational string \"p/q\""))),
    }
}

fn bigint_from_value(v: &Value, what: &str) -> Result<BigInt> {
    let r = rational_from_value(v, what)?;
    if !r.is_integer() {
        return Err(Error::Parse(format!("{what} must be an integer")));
    }
    Ok(r.to_integer())
}

fn layer_vectors(v: &Value, what: &str) -> Result<Vec<Vec<Rational>>> {
    as_array(v, what)?
        .iter()
        .enumerate()
        .map(|(i, layer)| {
            as_array(layer, &format!("{what} layer {}", i + 1))?
                .iter()
                .map(|entry| rational_from_value(entry, what))
                .collect()
        })
        .collect()
}

fn rational_matrix_from_value(v: &Value, what: &str) -> Result<RationalMatrix> {
    let rows = as_array(v, what)?
        .iter()
        .map(|row| {
            as_array(row, &format!("row of {what}"))?
                .iter()
                .map(|entry| rational_from_value(entry, what))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RationalMatrix::from_rows(rows)
}

fn integer_matrix_from_value(v: &Value, what: &str) -> Result<IntegerMatrix> {
    let rows = as_array(v, what)?
        .iter()
        .map(|row| {
            as_array(row, &format!("row of {what}"))?
                .iter()
                .map(|entry| bigint_from_value(entry, what))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntegerMatrix::from_rows(rows)
}

fn var_list(v: &Value, what: &str) -> Result<Vec<(BasisIndex, u32)>> {
    as_array(v, what)?
        .iter()
        .map(|triple| {
            let t = as_array(triple, &format!("variable of {what}"))?;
            if t.len() != 3 {
                return Err(Error::Parse(format!(
                    "{what}: variables are [layer, index, exponent] triples"
                )));
            }
            let layer = as_usize(&t[0], "variable layer")?;
            let pos = as_usize(&t[1], "variable index")?;
            let exp = as_usize(&t[2], "variable exponent")? as u32;
            Ok((BasisIndex::new(layer, pos), exp))
        })
        .collect()
}

/// Parses a group presentation: {"builtin": "heisenberg" | "abelian(k)"}
/// or {"class": c, "ranks": [...], "law": [{"layer", "coordinate", "terms"}]}.
pub fn presentation_from_value(v: &Value) -> Result<GroupPresentation> {
    let obj = as_object(v, "group presentation")?;
    if let Some(name) = obj.get("builtin") {
        reject_unknown(obj, &["builtin"], "builtin presentation")?;
        let name = name
            .as_str()
            .ok_or_else(|| Error::Parse("'builtin' must be a string".into()))?;
        return GroupPresentation::builtin(name);
    }
    reject_unknown(obj, &["class", "ranks", "law"], "group presentation")?;
    let class = as_usize(get(obj, "class", "group presentation")?, "class")?;
    let ranks = as_array(get(obj, "ranks", "group presentation")?, "ranks")?
        .iter()
        .map(|r| as_usize(r, "rank"))
        .collect::<Result<Vec<_>>>()?;
    if ranks.len() != class {
        return Err(Error::Parse(format!(
            "class is {class} but {} ranks were given",
            ranks.len()
        )));
    }
    let mut entries = Vec::new();
    if let Some(law) = obj.get("law") {
        for item in as_array(law, "law")? {
            let entry = as_object(item, "law entry")?;
            reject_unknown(entry, &["layer", "coordinate", "terms"], "law entry")?;
            let layer = as_usize(get(entry, "layer", "law entry")?, "layer")?;
            let coordinate = as_usize(get(entry, "coordinate", "law entry")?, "coordinate")?;
            let mut terms = Vec::new();
            for term in as_array(get(entry, "terms", "law entry")?, "terms")? {
                let term_obj = as_object(term, "term")?;
                reject_unknown(term_obj, &["coeff", "x", "y"], "term")?;
                let coeff = rational_from_value(get(term_obj, "coeff", "term")?, "coeff")?;
                let x_vars = match term_obj.get("x") {
                    Some(x) => var_list(x, "x variables")?,
                    None => Vec::new(),
                };
                let y_vars = match term_obj.get("y") {
                    Some(y) => var_list(y, "y variables")?,
                    None => Vec::new(),
                };
                terms.push(Term { coeff, x_vars, y_vars });
            }
            entries.push((layer, coordinate, Polynomial { terms }));
        }
    }
    GroupPresentation::new(ranks, entries)
}

fn element_from_value(
    v: &Value,
    p: &Arc<GroupPresentation>,
    what: &str,
) -> Result<GroupElement> {
    p.element(layer_vectors(v, what)?)
}

/// Parses an endomorphism {"images": [{"basis": [i,j], "value": [[...]]}]}.
/// Every basis element must be listed; missing entries are an error.
pub fn endomorphism_from_value(v: &Value, p: &Arc<GroupPresentation>) -> Result<Endomorphism> {
    let obj = as_object(v, "endomorphism")?;
    reject_unknown(obj, &["images"], "endomorphism")?;
    let mut images = Vec::new();
    for item in as_array(get(obj, "images", "endomorphism")?, "images")? {
        let image = as_object(item, "image")?;
        reject_unknown(image, &["basis", "value"], "image")?;
        let basis = as_array(get(image, "basis", "image")?, "basis")?;
        if basis.len() != 2 {
            return Err(Error::Parse("'basis' must be a [layer, index] pair".into()));
        }
        let idx = BasisIndex::new(as_usize(&basis[0], "layer")?, as_usize(&basis[1], "index")?);
        let value = element_from_value(get(image, "value", "image")?, p, "image value")?;
        images.push((idx, value));
    }
    Endomorphism::new(p.clone(), images)
}

/// Parses an affine n-valued map {"group": ..., "lifts": [...]}.
pub fn map_from_value(v: &Value) -> Result<AffineNValuedMap> {
    let obj = as_object(v, "map")?;
    reject_unknown(obj, &["group", "lifts"], "map")?;
    let p = Arc::new(presentation_from_value(get(obj, "group", "map")?)?);
    let mut lifts = Vec::new();
    for (i, item) in as_array(get(obj, "lifts", "map")?, "lifts")?.iter().enumerate() {
        let lift = as_object(item, "lift")?;
        reject_unknown(lift, &["translation", "endomorphism"], "lift")?;
        let translation = element_from_value(
            get(lift, "translation", "lift")?,
            &p,
            &format!("translation of lift {}", i + 1),
        )?;
        let linear_part =
            endomorphism_from_value(get(lift, "endomorphism", "lift")?, &p)?;
        lifts.push(AffineLift { translation, linear_part });
    }
    AffineNValuedMap::new(lifts)
}

/// Parses twisted-conjugacy layer data {"B": [[...]], "M": [[...]]}.
pub fn layer_datum_from_value(v: &Value) -> Result<LayerDatum> {
    let obj = as_object(v, "layer datum")?;
    reject_unknown(obj, &["B", "M"], "layer datum")?;
    let b = integer_matrix_from_value(get(obj, "B", "layer datum")?, "B")?;
    let m = rational_matrix_from_value(get(obj, "M", "layer datum")?, "M")?;
    LayerDatum::new(b, m)
}

/// Parses a twisted setup {"layers": [{"B": ..., "M": ...}, ...]}.
pub fn twisted_setup_from_value(v: &Value) -> Result<TwistedSetup> {
    let obj = as_object(v, "twisted setup")?;
    reject_unknown(obj, &["layers"], "twisted setup")?;
    let layers = as_array(get(obj, "layers", "twisted setup")?, "layers")?
        .iter()
        .map(layer_datum_from_value)
        .collect::<Result<Vec<_>>>()?;
    TwistedSetup::new(layers)
}

/// Input selecting one of the brute-force oracles.
#[derive(Debug)]
pub enum OracleRequest {
    /// Single abelian layer: formula vs direct enumeration.
    Abelian(LayerDatum),
    /// Nilpotent endomorphism with H = N: closed form vs box census.
    Nilpotent(Endomorphism),
    /// Multi-layer setup: per-layer counts, product and index-form cross-check.
    Product(TwistedSetup),
}

/// Parses an oracle request, dispatched on the "oracle" field:
/// "abelian" (B, M), "nilpotent" (group, endomorphism) or "product" (layers).
pub fn oracle_request_from_value(v: &Value) -> Result<OracleRequest> {
    let obj = as_object(v, "oracle request")?;
    let kind = get(obj, "oracle", "oracle request")?
        .as_str()
        .ok_or_else(|| Error::Parse("'oracle' must be a string".into()))?;
    match kind {
        "abelian" => {
            reject_unknown(obj, &["oracle", "B", "M"], "abelian oracle request")?;
            let b = integer_matrix_from_value(get(obj, "B", "oracle request")?, "B")?;
            let m = rational_matrix_from_value(get(obj, "M", "oracle request")?, "M")?;
            Ok(OracleRequest::Abelian(LayerDatum::new(b, m)?))
        }
        "nilpotent" => {
            reject_unknown(obj, &["oracle", "group", "endomorphism"], "nilpotent oracle request")?;
            let p = Arc::new(presentation_from_value(get(obj, "group", "oracle request")?)?);
            let phi = endomorphism_from_value(get(obj, "endomorphism", "oracle request")?, &p)?;
            Ok(OracleRequest::Nilpotent(phi))
        }
        "product" => {
            reject_unknown(obj, &["oracle", "layers"], "product oracle request")?;
            let layers = as_array(get(obj, "layers", "oracle request")?, "layers")?
                .iter()
                .map(layer_datum_from_value)
                .collect::<Result<Vec<_>>>()?;
            Ok(OracleRequest::Product(TwistedSetup::new(layers)?))
        }
        other => Err(Error::Parse(format!(
            "unknown oracle '{other}' (expected abelian, nilpotent or product)"
        ))),
    }
}

fn count_to_value(c: &ExtendedCount) -> Value {
    Value::String(c.to_string())
}

/// Parses "infinite" or a decimal count string.
pub fn count_from_value(v: &Value, what: &str) -> Result<ExtendedCount> {
    let s = v
        .as_str()
        .ok_or_else(|| Error::Parse(format!("{what} must be a count string")))?;
    if s == "infinite" {
        return Ok(ExtendedCount::Infinite);
    }
    let n = s
        .parse::<num_bigint::BigUint>()
        .map_err(|_| Error::Parse(format!("{what}: invalid count '{s}'")))?;
    Ok(ExtendedCount::Finite(n))
}

fn number_from_digits(digits: &str) -> Value {
    let n: serde_json::Number =
        serde_json::from_str(digits).expect("decimal digits are a valid JSON number");
    Value::Number(n)
}

/// Map analysis as JSON, with 1-based lift indices in the orbits.
pub fn map_report_to_value(report: &MapReport) -> Value {
    let components: Vec<Value> = report
        .components
        .iter()
        .map(|c| {
            json!({
                "orbit": c.orbit.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                "det": rat_to_string(&c.det_value),
                "R": count_to_value(&c.reidemeister),
                "N": number_from_digits(&c.nielsen.to_string()),
                "index_sign": c.index_sign,
            })
        })
        .collect();
    json!({
        "reidemeister": count_to_value(&report.reidemeister),
        "nielsen": number_from_digits(&report.nielsen.to_string()),
        "components": components,
    })
}

/// Re-reads an emitted map report; used to verify round-trips.
pub fn map_report_counts_from_value(v: &Value) -> Result<(ExtendedCount, num_bigint::BigUint)> {
    let obj = as_object(v, "map report")?;
    let r = count_from_value(get(obj, "reidemeister", "map report")?, "reidemeister")?;
    let n_value = get(obj, "nielsen", "map report")?;
    let digits = match n_value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(Error::Parse("nielsen must be a number".into())),
    };
    let n = digits
        .parse::<num_bigint::BigUint>()
        .map_err(|_| Error::Parse(format!("invalid nielsen number '{digits}'")))?;
    Ok((r, n))
}

pub fn map_report_to_text(report: &MapReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("reidemeister: {}\n", report.reidemeister));
    out.push_str(&format!("nielsen: {}\n", report.nielsen));
    out.push_str("components:\n");
    for c in &report.components {
        let orbit: Vec<String> = c.orbit.iter().map(|&i| (i + 1).to_string()).collect();
        out.push_str(&format!(
            "  orbit [{}]: det = {}, R = {}, N = {}, index sign = {}\n",
            orbit.join(", "),
            rat_to_string(&c.det_value),
            c.reidemeister,
            c.nielsen,
            c.index_sign,
        ));
    }
    out
}

pub fn fixed_points_to_value(points: &[TorusFixedPoint]) -> Value {
    json!({
        "count": points.len(),
        "points": points.iter().map(|p| {
            json!({
                "coordinates": p.coordinates.iter().map(rat_to_string).collect::<Vec<_>>(),
                "lift": p.lift_index,
                "witness": p.witness.iter().map(|z| z.to_string()).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
}

pub fn fixed_points_to_text(points: &[TorusFixedPoint]) -> String {
    let mut out = format!("{} fixed points\n", points.len());
    for p in points {
        let coords: Vec<String> = p.coordinates.iter().map(rat_to_string).collect();
        let witness: Vec<String> = p.witness.iter().map(|z| z.to_string()).collect();
        out.push_str(&format!(
            "  ({})  lift {}  witness ({})\n",
            coords.join(", "),
            p.lift_index,
            witness.join(", ")
        ));
    }
    out
}
