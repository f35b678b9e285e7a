//! Text checkpoint container.
//!
//! ```text
//! kgatnet-checkpoint 1
//! shape {"features":..,"dense_units":..,...}
//! config {"epochs":..,...}
//! tensor input_w 50 128
//! <16-hex-digit IEEE-754 bit patterns, one tensor row per line>
//! ...
//! end
//! ```
//!
//! Values are stored as raw bit patterns, so loading is bit-exact.

use std::fmt::Write as _;

use super::model::{GatModel, GatParams, ModelShape};
use super::train::TrainConfig;
use super::GatError;

const MAGIC: &str = "kgatnet-checkpoint 1";

fn tensor_dims(name: &str, len: usize, shape: &ModelShape) -> (usize, usize) {
    let cols = if name == "input_w" {
        shape.dense_units
    } else if name == "out_w" {
        shape.classifier_inputs()
    } else if name.ends_with(".w") {
        let layer: usize = name[5..name.find('.').unwrap()].parse().unwrap();
        if layer == 0 { shape.dense_units } else { shape.hidden_units }
    } else {
        len
    };
    (len / cols.max(1), cols)
}

pub fn save_checkpoint(model: &GatModel, config: &TrainConfig) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "shape {}", serde_json::to_string(&model.shape).unwrap()).unwrap();
    writeln!(out, "config {}", serde_json::to_string(config).unwrap()).unwrap();
    model.params.for_each(|name, values| {
        let (rows, cols) = tensor_dims(name, values.len(), &model.shape);
        writeln!(out, "tensor {name} {rows} {cols}").unwrap();
        for row in values.chunks(cols.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format!("{:016x}", v.to_bits())).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    });
    out.push_str("end\n");
    out
}

pub fn load_checkpoint(text: &str) -> Result<(GatModel, TrainConfig), GatError> {
    let bad = |m: String| GatError::Checkpoint(m);
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("not a kgatnet checkpoint (or unsupported version)".into()));
    }
    let shape: ModelShape = lines
        .next()
        .and_then(|l| l.strip_prefix("shape "))
        .ok_or_else(|| bad("missing shape line".into()))
        .and_then(|j| serde_json::from_str(j).map_err(|e| bad(format!("shape: {e}"))))?;
    shape.validate()?;
    let config: TrainConfig = lines
        .next()
        .and_then(|l| l.strip_prefix("config "))
        .ok_or_else(|| bad("missing config line".into()))
        .and_then(|j| serde_json::from_str(j).map_err(|e| bad(format!("config: {e}"))))?;
    let mut params = GatParams::zeros(&shape);
    let mut failure = None;
    params.for_each_mut(|name, values| {
        if failure.is_some() {
            return;
        }
        let (rows, cols) = tensor_dims(name, values.len(), &shape);
        let expected = format!("tensor {name} {rows} {cols}");
        match lines.next() {
            Some(h) if h == expected => {}
            other => {
                failure = Some(format!("expected `{expected}`, found {other:?}"));
                return;
            }
        }
        let mut filled = 0;
        for _ in 0..rows {
            let Some(line) = lines.next() else {
                failure = Some(format!("tensor {name} truncated"));
                return;
            };
            for cell in line.split_whitespace() {
                match u64::from_str_radix(cell, 16) {
                    Ok(bits) if filled < values.len() => {
                        values[filled] = f64::from_bits(bits);
                        filled += 1;
                    }
                    _ => {
                        failure = Some(format!("bad value `{cell}` in tensor {name}"));
                        return;
                    }
                }
            }
        }
        if filled != values.len() {
            failure = Some(format!("tensor {name} has {filled} values, expected {}", values.len()));
        }
    });
    if let Some(msg) = failure {
        return Err(bad(msg));
    }
    if lines.next() != Some("end") {
        return Err(bad("missing end marker".into()));
    }
    Ok((GatModel::new(shape, params), config))
}
