use serde::{Deserialize, Serialize, Serializer};

use crate::methods::Method;

/// One (image, method) row of a comparison run.
///
/// `t` and `foreground_fraction` are null only when the method failed, in
/// which case `error` carries the reason. `error` is omitted otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub image_id: String,
    pub method: Method,
    pub t: Option<u8>,
    #[serde(serialize_with = "ser_round6")]
    pub criterion: Option<f64>,
    #[serde(serialize_with = "ser_round6")]
    pub foreground_fraction: Option<f64>,
    pub elapsed_micros: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Round to six fractional digits. The shortest round-trip rendering of the
/// result never needs more than six.
pub fn round6(v: f64) -> f64 {
    if v.is_finite() && v.abs() < 1e15 {
        (v * 1e6).round() / 1e6
    } else {
        v
    }
}

fn ser_round6<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(round6(*x)),
        None => s.serialize_none(),
    }
}

/// JSON array of entries in input order.
pub fn write_report(entries: &[ReportEntry]) -> Vec<u8> {
    serde_json::to_vec(entries).expect("report entries always serialize")
}
