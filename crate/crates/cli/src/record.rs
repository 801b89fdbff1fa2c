use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Structured output of one command run. `config` echoes every parameter
/// needed to rerun it; object keys serialize in sorted order so identical
/// runs give identical bytes. Wall-clock time is opt-in for the same reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub metrics: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl ResultRecord {
    pub fn new(
        command: &str,
        seed: Option<u64>,
        config: &impl Serialize,
        metrics: &impl Serialize,
    ) -> serde_json::Result<Self> {
        Ok(Self {
            tool: "ipursuit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
            metrics: serde_json::to_value(metrics)?,
            elapsed_ms: None,
        })
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        #[derive(Serialize)]
        struct Cfg {
            zeta: f64,
            alpha: usize,
        }
        let mut r = ResultRecord::new("x", Some(7), &Cfg { zeta: 0.1 + 0.2, alpha: 3 }, &[1.0 / 3.0]).unwrap();
        r.elapsed_ms = Some(12.5);
        let text = r.to_json().unwrap();
        assert_eq!(ResultRecord::from_json(&text).unwrap(), r);
        // Sorted keys.
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }

    #[test]
    fn timing_omitted_by_default() {
        let r = ResultRecord::new("x", None, &(), &()).unwrap();
        assert!(!r.to_json().unwrap().contains("elapsed_ms"));
    }
}
