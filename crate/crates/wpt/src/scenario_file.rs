//! JSON scenario files.
//!
//! ```json
//! {
//!   "receivers": [[0.5, 1.0], [4.0, 2.5]],
//!   "q0_dbm": 10.0,
//!   "box": {"x_min": 0.0, "x_max": 5.0, "y_min": 0.0, "y_max": 5.0},
//!   "diode": {"i_s": 5e-6, "n": 1.05, "v_t": 0.02586, "r_ant": 50.0, "r_load": 5000.0, "trunc_order": 4},
//!   "waveform": "cw",
//!   "tx_power_dbm": 30.0
//! }
//! ```
//!
//! Only `receivers` and `q0_dbm` are required. `waveform` is either a builtin
//! name or a map from even order to factor, e.g. `{"4": 1.5}`. Unknown fields
//! are rejected. `tx_power_dbm` is recorded but not used by any computation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use wpt_core::positioning::{BBox, Point, Scenario};
use wpt_core::waveforms::{builtin_waveform, custom_waveform};
use wpt_core::{dbm_to_watts, HarvestModel, RectifierParams, Waveform, WaveformKind};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub receivers: Vec<[f64; 2]>,
    pub q0_dbm: f64,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxSpec>,
    #[serde(default)]
    pub diode: DiodeSpec,
    #[serde(default)]
    pub waveform: WaveformSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Rectifier constants; missing entries take the library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiodeSpec {
    pub i_s: f64,
    pub n: f64,
    pub v_t: f64,
    pub r_ant: f64,
    pub r_load: f64,
    pub trunc_order: u32,
}

impl Default for DiodeSpec {
    fn default() -> Self {
        let p = RectifierParams::default();
        Self { i_s: p.i_s, n: p.n_ideality, v_t: p.v_t, r_ant: p.r_ant, r_load: p.r_load, trunc_order: p.trunc_order }
    }
}

impl DiodeSpec {
    pub fn params(&self) -> RectifierParams {
        RectifierParams {
            i_s: self.i_s,
            n_ideality: self.n,
            v_t: self.v_t,
            r_ant: self.r_ant,
            r_load: self.r_load,
            trunc_order: self.trunc_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveformSpec {
    Named(String),
    Factors(BTreeMap<u32, f64>),
}

impl Default for WaveformSpec {
    fn default() -> Self {
        WaveformSpec::Named(WaveformKind::ContinuousWave.name().to_string())
    }
}

impl fmt::Display for WaveformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveformSpec::Named(n) => f.write_str(n),
            WaveformSpec::Factors(m) => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for WaveformSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WaveformSpec::Named(n) => s.serialize_str(n),
            WaveformSpec::Factors(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for WaveformSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => Ok(WaveformSpec::Named(s)),
            serde_json::Value::Object(obj) => {
                let mut out = BTreeMap::new();
                for (k, v) in obj {
                    let order: u32 = k
                        .parse()
                        .map_err(|_| de::Error::custom(format!("waveform factor key {k:?} is not an integer order")))?;
                    let value = v
                        .as_f64()
                        .ok_or_else(|| de::Error::custom(format!("waveform factor {k:?} must be a number")))?;
                    out.insert(order, value);
                }
                Ok(WaveformSpec::Factors(out))
            }
            other => Err(de::Error::custom(format!("waveform must be a name or an order -> factor map, got {other}"))),
        }
    }
}

impl WaveformSpec {
    /// Factors up to `max_order`.
    pub fn resolve(&self, max_order: u32) -> wpt_core::Result<Waveform> {
        match self {
            WaveformSpec::Named(name) => {
                let kind = WaveformKind::from_name(name).ok_or_else(|| {
                    invalid("waveform", format!("unknown waveform {name:?}; expected cw or gaussian"))
                })?;
                builtin_waveform(kind, max_order)
            }
            WaveformSpec::Factors(m) => custom_waveform(m.iter().map(|(&k, &v)| (k, v))),
        }
    }
}

/// Command-line replacements for scenario entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelOverrides {
    pub waveform: Option<WaveformSpec>,
    pub i_s: Option<f64>,
    pub n: Option<f64>,
    pub v_t: Option<f64>,
    pub r_ant: Option<f64>,
    pub r_load: Option<f64>,
    pub trunc_order: Option<u32>,
}

impl ModelOverrides {
    pub fn apply(&self, diode: &mut DiodeSpec, waveform: &mut WaveformSpec) {
        if let Some(w) = &self.waveform {
            *waveform = w.clone();
        }
        let d = diode;
        d.i_s = self.i_s.unwrap_or(d.i_s);
        d.n = self.n.unwrap_or(d.n);
        d.v_t = self.v_t.unwrap_or(d.v_t);
        d.r_ant = self.r_ant.unwrap_or(d.r_ant);
        d.r_load = self.r_load.unwrap_or(d.r_load);
        d.trunc_order = self.trunc_order.unwrap_or(d.trunc_order);
    }
}

fn invalid(name: &'static str, reason: String) -> wpt_core::Error {
    wpt_core::Error::InvalidParameter { name, reason }
}

/// Builds the harvesting model from diode constants and a waveform.
pub fn build_model(diode: &DiodeSpec, waveform: &WaveformSpec) -> wpt_core::Result<HarvestModel> {
    let params = diode.params();
    params.validate()?;
    HarvestModel::build(params, &waveform.resolve(params.trunc_order)?)
}

impl ScenarioFile {
    pub fn model(&self) -> wpt_core::Result<HarvestModel> {
        build_model(&self.diode, &self.waveform)
    }

    /// Converts to the library type; `q0_dbm` becomes watts here.
    pub fn build(&self) -> wpt_core::Result<Scenario> {
        let model = self.model()?;
        if !self.q0_dbm.is_finite() {
            return Err(invalid("q0_dbm", format!("must be finite, got {}", self.q0_dbm)));
        }
        let q0 = dbm_to_watts(self.q0_dbm);
        let receivers: Vec<Point> = self.receivers.iter().map(|&[x, y]| Point::new(x, y)).collect();
        match self.bbox {
            Some(b) => Scenario::with_box(
                receivers,
                q0,
                BBox { x_min: b.x_min, x_max: b.x_max, y_min: b.y_min, y_max: b.y_max },
                model,
            ),
            None => Scenario::new(receivers, q0, model),
        }
    }

    /// Pretty JSON with a trailing newline; the format files are written in.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }
}

/// Parses scenario text. Syntax and type errors carry line and column.
pub fn parse_scenario(text: &str, path: &Path) -> AppResult<ScenarioFile> {
    serde_json::from_str(text).map_err(|e| AppError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

// serde_json appends " at line L column C"; the record carries those separately
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> AppResult<(ScenarioFile, Scenario)> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let file = parse_scenario(&text, path)?;
    let scenario = file.build().map_err(|e| anchor_error(e, &text, path))?;
    Ok((file, scenario))
}

/// Turns a model error into a validation error pointing at the offending key.
pub fn anchor_error(err: wpt_core::Error, text: &str, path: &Path) -> AppError {
    let offset = match &err {
        wpt_core::Error::InvalidParameter { name, .. } => {
            let key = match *name {
                "n_ideality" => "n",
                "q0" => "q0_dbm",
                other => other,
            };
            find_key(text, key, 0)
        }
        wpt_core::Error::InvalidWaveformFactor { order, .. } => find_key(text, "waveform", 0)
            .and_then(|w| find_key(text, &order.to_string(), w))
            .or_else(|| find_key(text, "waveform", 0)),
        wpt_core::Error::MissingMomentFactor { .. } => find_key(text, "waveform", 0),
        _ => None,
    };
    AppError::Invalid {
        path: Some(path.to_path_buf()),
        line: offset.map(|o| text[..o].matches('\n').count() + 1),
        message: err.to_string(),
    }
}

/// Byte offset of the first `"key"` followed by a colon, searching from `from`.
fn find_key(text: &str, key: &str, from: usize) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let mut start = from;
    while let Some(i) = text[start..].find(&needle) {
        let at = start + i;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(at);
        }
        start = at + needle.len();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> &'static Path {
        Path::new("test.json")
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let f = parse_scenario(r#"{"receivers": [[1.0, 2.0]], "q0_dbm": 10}"#, path()).unwrap();
        assert_eq!(f.diode, DiodeSpec::default());
        assert_eq!(f.waveform, WaveformSpec::Named("cw".into()));
        let s = f.build().unwrap();
        assert_eq!(s.model().params(), &RectifierParams::default());
        assert!((s.q0() - 0.01).abs() < 1e-17);
    }

    #[test]
    fn unknown_fields_rejected_with_position() {
        let text = "{\n  \"receivers\": [[1.0, 2.0]],\n  \"q0_dbm\": 10,\n  \"extra\": 1\n}";
        match parse_scenario(text, path()) {
            Err(AppError::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("extra"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = r#"{"receivers": [[1, 2]], "q0_dbm": 10, "diode": {"r_loud": 3}}"#;
        assert!(matches!(parse_scenario(text, path()), Err(AppError::Parse { .. })));
    }

    #[test]
    fn factor_map_parses_and_rejects_bad_keys() {
        let f = parse_scenario(r#"{"receivers": [[0, 0]], "q0_dbm": 0, "waveform": {"4": 2.0}}"#, path()).unwrap();
        assert_eq!(f.waveform, WaveformSpec::Factors(BTreeMap::from([(4, 2.0)])));
        assert!(f.build().is_ok());
        let bad = r#"{"receivers": [[0, 0]], "q0_dbm": 0, "waveform": {"four": 2.0}}"#;
        assert!(parse_scenario(bad, path()).is_err());
        let bad = r#"{"receivers": [[0, 0]], "q0_dbm": 0, "waveform": 3}"#;
        assert!(parse_scenario(bad, path()).is_err());
    }

    #[test]
    fn validation_errors_point_at_the_key() {
        let text = "{\n  \"receivers\": [[0, 0]],\n  \"q0_dbm\": 0,\n  \"diode\": {\n    \"r_load\": -5\n  }\n}";
        let f = parse_scenario(text, path()).unwrap();
        let e = anchor_error(f.build().unwrap_err(), text, path());
        assert!(matches!(e, AppError::Invalid { line: Some(5), .. }), "{e:?}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn overrides_replace_entries() {
        let mut d = DiodeSpec::default();
        let mut w = WaveformSpec::default();
        let o = ModelOverrides {
            waveform: Some(WaveformSpec::Named("gaussian".into())),
            r_load: Some(1e3),
            ..Default::default()
        };
        o.apply(&mut d, &mut w);
        assert_eq!(d.r_load, 1e3);
        assert_eq!(d.i_s, DiodeSpec::default().i_s);
        assert_eq!(w.to_string(), "gaussian");
    }

    #[test]
    fn find_key_skips_values() {
        let text = r#"{"a": "n", "n": 1}"#;
        assert_eq!(find_key(text, "n", 0), Some(11));
    }
}
