//! Declarative JSON model files.
//!
//! ```json
//! {
//!   "name": "sphere",
//!   "group_dim": 1,
//!   "chart_dim": 2,
//!   "moment": [["*", 2, "pi", "x0"]],
//!   "flow": [[["*", 2, "pi", ["-", 1, ["^", "x0", 2]]], 0]],
//!   "laplacian": [["*", -4, "pi", "x0"]],
//!   "zero_level_points": [[0, 0]],
//!   "orbit_volume": ["*", 2, "pi"],
//!   "volume_density": 1,
//!   "zero_level_chart": { "coords": [0, "x0"], "density": 1 }
//! }
//! ```

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{HamiltonianModel, ZeroLevelChart};
use crate::error::{Error, Result};
use crate::jets::{parse_expr, Expr};

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::ModelFile(format!("missing field {key:?}")))
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::ModelFile(format!("field {key:?} must be a nonnegative integer")))
}

fn expr_list(v: &Value, what: &str) -> Result<Vec<Expr>> {
    v.as_array()
        .ok_or_else(|| Error::ModelFile(format!("{what} must be a list")))?
        .iter()
        .map(|e| parse_expr(e).map_err(|err| Error::ModelFile(format!("{what}: {err}"))))
        .collect()
}

fn point(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::ModelFile("zero-level point must be a list of numbers".into()))?
        .iter()
        .map(|c| {
            c.as_f64()
                .ok_or_else(|| Error::ModelFile(format!("bad coordinate {c}")))
        })
        .collect()
}

/// Parse and validate a model.
pub fn model_from_json(v: &Value) -> Result<HamiltonianModel> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::ModelFile("model must be a JSON object".into()))?;
    let flow = field(obj, "flow")?
        .as_array()
        .ok_or_else(|| Error::ModelFile("flow must be a list of vector fields".into()))?
        .iter()
        .map(|f| expr_list(f, "flow"))
        .collect::<Result<_>>()?;
    let zero_level_points = field(obj, "zero_level_points")?
        .as_array()
        .ok_or_else(|| Error::ModelFile("zero_level_points must be a list".into()))?
        .iter()
        .map(point)
        .collect::<Result<_>>()?;
    let zero_level_chart = match obj.get("zero_level_chart") {
        None | Some(Value::Null) => None,
        Some(Value::Object(c)) => Some(ZeroLevelChart {
            coords: expr_list(field(c, "coords")?, "zero_level_chart.coords")?,
            density: parse_expr(field(c, "density")?)?,
        }),
        Some(_) => {
            return Err(Error::ModelFile(
                "zero_level_chart must be an object".into(),
            ))
        }
    };
    let model = HamiltonianModel {
        name: obj
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("model")
            .to_string(),
        group_dim: usize_field(obj, "group_dim")?,
        chart_dim: usize_field(obj, "chart_dim")?,
        moment: expr_list(field(obj, "moment")?, "moment")?,
        flow,
        laplacian: expr_list(field(obj, "laplacian")?, "laplacian")?,
        zero_level_points,
        orbit_volume: parse_expr(field(obj, "orbit_volume")?)?,
        volume_density: match obj.get("volume_density") {
            Some(v) => parse_expr(v)?,
            None => Expr::int(1),
        },
        zero_level_chart,
    };
    model.validate()?;
    Ok(model)
}

pub fn model_to_json(model: &HamiltonianModel) -> Value {
    let list = |v: &[Expr]| Value::Array(v.iter().map(Expr::to_json).collect());
    let mut out = json!({
        "name": model.name,
        "group_dim": model.group_dim,
        "chart_dim": model.chart_dim,
        "moment": list(&model.moment),
        "flow": Value::Array(model.flow.iter().map(|f| list(f)).collect()),
        "laplacian": list(&model.laplacian),
        "zero_level_points": model.zero_level_points,
        "orbit_volume": model.orbit_volume.to_json(),
        "volume_density": model.volume_density.to_json(),
    });
    if let Some(c) = &model.zero_level_chart {
        out["zero_level_chart"] =
            json!({ "coords": list(&c.coords), "density": c.density.to_json() });
    }
    out
}

pub fn load_model(path: &Path) -> Result<HamiltonianModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))?;
    model_from_json(&v)
}
