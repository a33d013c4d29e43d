//! Record collection and the json-lines / csv writers.
//!
//! Every record carries `command`, `seed` and `config_hash`. JSON keys are
//! sorted. The csv form is long: one line per (record, key, value).

use serde::Serialize;
use serde_json::{Map, Value};

use crate::settings::Format;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: &'static str,
    pub fields: Map<String, Value>,
}

impl Record {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            fields: Map::new(),
        }
    }

    /// Fields of a serializable struct, which must serialize to a map.
    pub fn from_struct<T: Serialize>(kind: &'static str, value: &T) -> Self {
        match serde_json::to_value(value).expect("plain data serializes") {
            Value::Object(fields) => Self { kind, fields },
            other => panic!("expected a map, got {other}"),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.fields.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data serializes"),
        );
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub records: Vec<Record>,
    pub failed_assertions: Vec<String>,
}

impl RunOutput {
    pub fn new(command: String, seed: u64, config_hash: String) -> Self {
        Self {
            command,
            seed,
            config_hash,
            records: Vec::new(),
            failed_assertions: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    /// Records `name` as failed unless `ok`.
    pub fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failed_assertions.push(name.to_string());
        }
    }

    pub fn passed(&self) -> bool {
        self.failed_assertions.is_empty()
    }

    fn tagged(&self, record: &Record) -> Map<String, Value> {
        let mut fields = record.fields.clone();
        fields.insert("record".into(), record.kind.into());
        fields.insert("command".into(), self.command.clone().into());
        fields.insert("seed".into(), self.seed.into());
        fields.insert("config_hash".into(), self.config_hash.clone().into());
        fields
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut out = Vec::new();
                for record in &self.records {
                    serde_json::to_writer(&mut out, &self.tagged(record))
                        .expect("writing to memory");
                    out.push(b'\n');
                }
                out
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "row",
                    "record",
                    "command",
                    "seed",
                    "config_hash",
                    "key",
                    "value",
                ])
                .expect("writing to memory");
                let seed = self.seed.to_string();
                for (row, record) in self.records.iter().enumerate() {
                    let row = row.to_string();
                    for (key, value) in &record.fields {
                        let value = match value {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        };
                        w.write_record([
                            &row,
                            record.kind,
                            &self.command,
                            &seed,
                            &self.config_hash,
                            key,
                            &value,
                        ])
                        .expect("writing to memory");
                    }
                }
                w.into_inner().expect("writing to memory")
            }
        }
    }
}
