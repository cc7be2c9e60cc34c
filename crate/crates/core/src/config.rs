//! Pipeline configuration file.
//!
//! A single JSON document with SI units spelled out in every field name:
//!
//! ```json
//! {
//!   "schema": "gelforce-config/1",
//!   "mesh_path": "pad.mesh",
//!   "stiffness_path": "pad.stiff",
//!   "material": "paper-defaults",
//!   "camera": { "virtual_camera_m": [0.024, -0.03, -0.035], "refractive_index": 1.41 },
//!   "marker_spacing_m": 0.001,
//!   "pixel_pitch_m": 0.0001,
//!   "image_origin_m": [0.0, 0.0],
//!   "match_radius_m": 0.0005,
//!   "idw_cutoff_m": 0.002,
//!   "indenter": { "sphere_radius_m": 0.01 },
//!   "detection": { "threshold": 128, "min_area_px": 3, "max_area_px": 400 }
//! }
//! ```
//!
//! `material` is either the string `"paper-defaults"` (E = 147 MPa,
//! nu = 0.3223) or an object `{ "youngs_modulus_pa": .., "poisson_ratio": .. }`.
//! `stiffness_path`, `image_origin_m` (default origin), `match_radius_m`
//! (default half the marker spacing), `idw_cutoff_m` (default twice the marker
//! spacing) and `detection` are optional. Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::mesh::MaterialParams;
use crate::optics::CameraModel;
use crate::raster::PixelFrame;
use crate::tracking::{DetectParams, IdwParams};

pub const CONFIG_SCHEMA: &str = "gelforce-config/1";
pub const PAPER_DEFAULTS: &str = "paper-defaults";

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub mesh_path: PathBuf,
    pub stiffness_path: Option<PathBuf>,
    pub material: MaterialParams,
    pub camera: CameraModel,
    pub marker_spacing_m: f64,
    pub pixel_pitch_m: f64,
    pub image_origin_m: [f64; 2],
    pub match_radius_m: f64,
    pub idw_cutoff_m: f64,
    pub sphere_radius_m: f64,
    pub detection: DetectParams,
}

impl PipelineConfig {
    pub fn pixel_frame(&self) -> PixelFrame {
        PixelFrame {
            origin_m: self.image_origin_m,
            pitch_m: self.pixel_pitch_m,
        }
    }

    pub fn idw(&self) -> IdwParams {
        IdwParams {
            cutoff: self.idw_cutoff_m,
            ..IdwParams::for_spacing(self.marker_spacing_m)
        }
    }

    /// Checks every length and derived invariant.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("marker_spacing_m", self.marker_spacing_m),
            ("pixel_pitch_m", self.pixel_pitch_m),
            ("match_radius_m", self.match_radius_m),
            ("idw_cutoff_m", self.idw_cutoff_m),
            ("indenter.sphere_radius_m", self.sphere_radius_m),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(
                    field,
                    format!("must be a positive length, got {v}"),
                ));
            }
        }
        if self.detection.min_area_px > self.detection.max_area_px {
            return Err(config_err("detection", "min_area_px exceeds max_area_px"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema": CONFIG_SCHEMA,
            "mesh_path": self.mesh_path,
            "material": {
                "youngs_modulus_pa": self.material.youngs_modulus(),
                "poisson_ratio": self.material.poisson_ratio(),
            },
            "camera": {
                "virtual_camera_m": self.camera.position(),
                "refractive_index": self.camera.refractive_index(),
            },
            "marker_spacing_m": self.marker_spacing_m,
            "pixel_pitch_m": self.pixel_pitch_m,
            "image_origin_m": self.image_origin_m,
            "match_radius_m": self.match_radius_m,
            "idw_cutoff_m": self.idw_cutoff_m,
            "indenter": { "sphere_radius_m": self.sphere_radius_m },
            "detection": {
                "threshold": self.detection.threshold,
                "min_area_px": self.detection.min_area_px,
                "max_area_px": self.detection.max_area_px,
            },
        });
        if let Some(p) = &self.stiffness_path {
            v["stiffness_path"] = json!(p);
        }
        v
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("config serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

struct Fields<'a> {
    prefix: &'a str,
    map: &'a Map<String, Value>,
}

impl<'a> Fields<'a> {
    fn new(prefix: &'a str, v: &'a Value, allowed: &[&str]) -> Result<Self> {
        let map = v
            .as_object()
            .ok_or_else(|| config_err(prefix_or_root(prefix), "expected an object"))?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(config_err(&join(prefix, k), "unknown field"));
        }
        Ok(Self { prefix, map })
    }

    fn path(&self, key: &str) -> String {
        join(self.prefix, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn require(&self, key: &str) -> Result<&'a Value> {
        self.get(key)
            .ok_or_else(|| config_err(&self.path(key), "missing required field"))
    }

    fn number(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .as_f64()
            .ok_or_else(|| config_err(&self.path(key), "expected a number"))
    }

    fn opt_number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.number(key).map(Some),
        }
    }

    fn array<const N: usize>(&self, key: &str) -> Result<[f64; N]> {
        let err = || config_err(&self.path(key), format!("expected an array of {N} numbers"));
        let arr = self.require(key)?.as_array().ok_or_else(err)?;
        if arr.len() != N {
            return Err(err());
        }
        let mut out = [0.0; N];
        for (o, v) in out.iter_mut().zip(arr) {
            *o = v.as_f64().ok_or_else(err)?;
        }
        Ok(out)
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        self.require(key)?
            .as_str()
            .ok_or_else(|| config_err(&self.path(key), "expected a string"))
    }

    fn unsigned(&self, key: &str) -> Result<u64> {
        self.require(key)?
            .as_u64()
            .ok_or_else(|| config_err(&self.path(key), "expected a non-negative integer"))
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn prefix_or_root(prefix: &str) -> &str {
    if prefix.is_empty() {
        "<root>"
    } else {
        prefix
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses config text; relative paths resolve against `base_dir`. Does not
/// touch the filesystem.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<PipelineConfig> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| config_err("<root>", format!("invalid JSON: {e}")))?;
    let top = Fields::new(
        "",
        &root,
        &[
            "schema",
            "mesh_path",
            "stiffness_path",
            "material",
            "camera",
            "marker_spacing_m",
            "pixel_pitch_m",
            "image_origin_m",
            "match_radius_m",
            "idw_cutoff_m",
            "indenter",
            "detection",
        ],
    )?;
    let schema = top.string("schema")?;
    if schema != CONFIG_SCHEMA {
        return Err(config_err(
            "schema",
            format!("expected `{CONFIG_SCHEMA}`, got `{schema}`"),
        ));
    }
    let mesh_path = resolve(base_dir, top.string("mesh_path")?);
    let stiffness_path = match top.get("stiffness_path") {
        None => None,
        Some(_) => Some(resolve(base_dir, top.string("stiffness_path")?)),
    };

    let material = match top.require("material")? {
        Value::String(s) if s == PAPER_DEFAULTS => MaterialParams::gel_default(),
        Value::String(s) => {
            return Err(config_err(
                "material",
                format!("unknown preset `{s}` (only `{PAPER_DEFAULTS}` is defined)"),
            ))
        }
        v => {
            let m = Fields::new("material", v, &["youngs_modulus_pa", "poisson_ratio"])?;
            let e = m.number("youngs_modulus_pa")?;
            let nu = m.number("poisson_ratio")?;
            if !(e.is_finite() && e > 0.0) {
                return Err(config_err("material.youngs_modulus_pa", "must be positive"));
            }
            if !(0.0..0.5).contains(&nu) {
                return Err(config_err("material.poisson_ratio", "must lie in [0, 0.5)"));
            }
            MaterialParams::new(e, nu)?
        }
    };

    let cam = Fields::new(
        "camera",
        top.require("camera")?,
        &["virtual_camera_m", "refractive_index"],
    )?;
    let gamma = cam.number("refractive_index")?;
    let camera = CameraModel::new(cam.array::<3>("virtual_camera_m")?, gamma)
        .map_err(|e| config_err("camera", e.to_string()))?;

    let marker_spacing_m = top.number("marker_spacing_m")?;
    let indenter = Fields::new("indenter", top.require("indenter")?, &["sphere_radius_m"])?;
    let detection = match top.get("detection") {
        None => DetectParams::default(),
        Some(v) => {
            let d = Fields::new("detection", v, &["threshold", "min_area_px", "max_area_px"])?;
            let threshold = d.unsigned("threshold")?;
            DetectParams {
                threshold: u8::try_from(threshold)
                    .map_err(|_| config_err("detection.threshold", "must be in 0..=255"))?,
                min_area_px: d.unsigned("min_area_px")? as usize,
                max_area_px: d.unsigned("max_area_px")? as usize,
            }
        }
    };
    let config = PipelineConfig {
        mesh_path,
        stiffness_path,
        material,
        camera,
        marker_spacing_m,
        pixel_pitch_m: top.number("pixel_pitch_m")?,
        image_origin_m: if top.get("image_origin_m").is_some() {
            top.array::<2>("image_origin_m")?
        } else {
            [0.0, 0.0]
        },
        match_radius_m: top
            .opt_number("match_radius_m")?
            .unwrap_or(0.5 * marker_spacing_m),
        idw_cutoff_m: top
            .opt_number("idw_cutoff_m")?
            .unwrap_or(2.0 * marker_spacing_m),
        sphere_radius_m: indenter.number("sphere_radius_m")?,
        detection,
    };
    config.validate()?;
    Ok(config)
}

/// Reads and validates a config file; the mesh it names must exist.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let config = parse_config(&text, base)?;
    if !config.mesh_path.exists() {
        return Err(config_err(
            "mesh_path",
            format!("{} does not exist", config.mesh_path.display()),
        ));
    }
    Ok(config)
}
