use std::path::{Path, PathBuf};

use needlekit_core::density1d::{IntervalSet, PLConcave};
use needlekit_core::io::read_json;
use needlekit_core::localize::DiscreteSpace;
use needlekit_core::models::{build_1d, build_strip, ModelSpec, Strip};

use crate::output::{Failure, Run};

/// A model given inline as JSON or as a path to a JSON file.
pub fn model(arg: &str) -> Run<ModelSpec> {
    let parsed = if arg.trim_start().starts_with('{') {
        serde_json::from_str(arg).map_err(needlekit_core::Error::from)
    } else {
        read_json(Path::new(arg))
    };
    Ok(parsed?)
}

pub fn space_1d(space: Option<&Path>, model_arg: Option<&str>) -> Run<PLConcave> {
    match (space, model_arg) {
        (Some(p), None) => Ok(read_json(p)?),
        (None, Some(m)) => Ok(build_1d(&model(m)?)?.space),
        (Some(_), Some(_)) => Err(Failure::Input("give either --space or --model, not both".into())),
        (None, None) => Err(Failure::Input("a space is required: --space FILE or --model JSON".into())),
    }
}

pub fn set(path: Option<&Path>) -> Run<IntervalSet> {
    let p = path.ok_or_else(|| Failure::Input("--set FILE is required".into()))?;
    Ok(read_json(p)?)
}

pub fn required<T: Copy>(value: Option<T>, flag: &str) -> Run<T> {
    value.ok_or_else(|| Failure::Input(format!("--{flag} is required")))
}

/// Set mask given as a JSON array of booleans or of point indices.
fn mask(path: &Path, n: usize) -> Run<Vec<bool>> {
    let v: serde_json::Value = read_json(path)?;
    let items = v.as_array().ok_or_else(|| Failure::Input(format!("{}: expected a JSON array", path.display())))?;
    if items.iter().all(|x| x.is_boolean()) {
        if items.len() != n {
            return Err(Failure::Input(format!("mask has {} entries for {n} points", items.len())));
        }
        return Ok(items.iter().map(|x| x.as_bool().unwrap()).collect());
    }
    let mut m = vec![false; n];
    for x in items {
        let i = x.as_u64().ok_or_else(|| Failure::Input(format!("{}: entries must be booleans or indices", path.display())))?
            as usize;
        if i >= n {
            return Err(Failure::Input(format!("index {i} out of range for {n} points")));
        }
        m[i] = true;
    }
    Ok(m)
}

/// Everything the localization pipeline needs.
pub struct Partition {
    pub space: DiscreteSpace,
    pub omega: Vec<bool>,
    pub center: usize,
    pub radius: f64,
    pub strip: Option<Strip>,
}

pub struct PartitionArgs<'a> {
    pub space: Option<&'a PathBuf>,
    pub model: Option<&'a str>,
    pub omega: Option<&'a PathBuf>,
    pub center: Option<usize>,
    pub radius: Option<f64>,
    pub wedge: Option<f64>,
}

pub fn partition(a: PartitionArgs) -> Run<Partition> {
    match (a.space, a.model) {
        (None, Some(m)) => {
            let spec = model(m)?;
            if spec.is_1d() {
                return Err(Failure::Input("localization needs a product_strip model or --space".into()));
            }
            let strip = build_strip(&spec)?;
            let omega = match a.wedge {
                Some(tilt) => strip.wedge_mask(tilt),
                None => strip.omega_mask.clone(),
            };
            Ok(Partition {
                space: strip.space.clone(),
                omega,
                center: a.center.unwrap_or(strip.center),
                radius: a.radius.unwrap_or(strip.radius),
                strip: Some(strip),
            })
        }
        (Some(p), None) => {
            let space: DiscreteSpace = read_json(p)?;
            let omega_path = a.omega.ok_or_else(|| Failure::Input("--omega FILE is required with --space".into()))?;
            let omega = mask(omega_path, space.len())?;
            let center = a.center.unwrap_or(0);
            if center >= space.len() {
                return Err(Failure::Input(format!("center {center} out of range")));
            }
            let reach = (0..space.len()).map(|i| space.d(center, i)).fold(0.0, f64::max);
            let radius = a.radius.unwrap_or(2.0 * reach + 1.0);
            Ok(Partition { space, omega, center, radius, strip: None })
        }
        (Some(_), Some(_)) => Err(Failure::Input("give either --space or --model, not both".into())),
        (None, None) => Err(Failure::Input("a space is required: --space FILE or --model JSON".into())),
    }
}
