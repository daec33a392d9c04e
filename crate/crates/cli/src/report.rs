//! Machine-readable reports. The layout is versioned by `SCHEMA_VERSION`;
//! see the README for the field list.

use serde::Serialize;
use sha2::{Digest, Sha256};

use quantsafe::{LassoWord, Letter, Rational, Verdict, Witness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub input: Input,
    pub question: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_decimal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    pub method: Vec<String>,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

impl Input {
    pub fn new(path: &str, bytes: &[u8]) -> Self {
        Input {
            path: path.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// A witness as letter names. `loop` is absent for finite prefixes.
#[derive(Serialize, Debug, PartialEq, Eq)]
pub struct WitnessJson {
    pub prefix: Vec<String>,
    #[serde(rename = "loop", skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<String>>,
}

fn names(alphabet: &[String], w: &[Letter]) -> Vec<String> {
    w.iter().map(|&s| alphabet[s].clone()).collect()
}

impl WitnessJson {
    pub fn lasso(alphabet: &[String], w: &LassoWord) -> Self {
        WitnessJson {
            prefix: names(alphabet, w.prefix()),
            cycle: Some(names(alphabet, w.cycle())),
        }
    }

    pub fn from_verdict(alphabet: &[String], w: &Witness) -> Self {
        match w {
            Witness::Lasso(w) => Self::lasso(alphabet, w),
            Witness::Prefix(u) => WitnessJson {
                prefix: names(alphabet, u),
                cycle: None,
            },
        }
    }

    pub fn human(&self) -> String {
        let p = self.prefix.join(" ");
        match &self.cycle {
            Some(v) if p.is_empty() => format!("({})^w", v.join(" ")),
            Some(v) => format!("{p} ({})^w", v.join(" ")),
            None if p.is_empty() => "(empty prefix)".to_string(),
            None => format!("{p} (prefix)"),
        }
    }
}

impl Report {
    pub fn new(input: Input, question: &str) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "quantsafe",
            version: env!("CARGO_PKG_VERSION"),
            input,
            question: question.to_string(),
            answer: None,
            value: None,
            value_decimal: None,
            witness: None,
            method: Vec::new(),
            elapsed_ms: 0.0,
            details: serde_json::Map::new(),
        }
    }

    pub fn set_value(&mut self, v: Rational, decimal: Option<usize>) {
        self.value = Some(v.to_string());
        self.value_decimal = decimal.map(|d| v.to_decimal(d));
    }

    pub fn set_verdict(&mut self, alphabet: &[String], v: &Verdict, decimal: Option<usize>) {
        self.answer = Some(v.answer);
        if let Some(x) = v.value {
            self.set_value(x, decimal);
        }
        self.witness = v.witness.as_ref().map(|w| WitnessJson::from_verdict(alphabet, w));
        self.method = v.method.clone();
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        if let Some(a) = self.answer {
            out.push_str(&format!("{}: {a}\n", self.question));
        }
        if let Some(v) = &self.value {
            let label = if self.answer.is_some() { "value" } else { self.question.as_str() };
            match &self.value_decimal {
                Some(d) => out.push_str(&format!("{label}: {v} (~{d})\n")),
                None => out.push_str(&format!("{label}: {v}\n")),
            }
        }
        if let Some(w) = &self.witness {
            out.push_str(&format!("witness: {}\n", w.human()));
        }
        for (k, v) in &self.details {
            if let Some(s) = v.as_str() {
                out.push_str(&format!("{k}: {s}\n"));
            }
        }
        out
    }
}
