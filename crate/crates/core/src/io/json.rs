use serde_json::{Map, Value};

use crate::domain::TemporalSegment;

use super::IoError;

pub(crate) struct Record {
    pub line: usize,
    map: Map<String, Value>,
}

impl Record {
    pub fn parse(line: usize, text: &str) -> Result<Self, IoError> {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => Ok(Self { line, map }),
            Ok(_) => Err(IoError::parse(line, None, "record must be a JSON object")),
            Err(e) => Err(IoError::parse(line, None, format!("malformed JSON: {e}"))),
        }
    }

    fn err(&self, field: impl Into<String>, message: impl Into<String>) -> IoError {
        IoError::parse(self.line, Some(field.into()), message)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.map.get(name).filter(|v| !v.is_null())
    }

    pub fn string(&self, name: &str) -> Result<String, IoError> {
        match self.get(name) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.err(name, "expected a string")),
            None => Err(self.err(name, "missing required field")),
        }
    }

    /// Accepts a string or an integer; ids are opaque either way.
    pub fn id(&self, name: &str) -> Result<String, IoError> {
        match self.get(name) {
            Some(Value::Number(n)) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
            _ => self.string(name),
        }
    }

    pub fn array(&self, name: &str) -> Result<&[Value], IoError> {
        match self.get(name) {
            Some(Value::Array(a)) => Ok(a),
            Some(_) => Err(self.err(name, "expected an array")),
            None => Err(self.err(name, "missing required field")),
        }
    }

    pub fn opt_array(&self, name: &str) -> Result<Option<&[Value]>, IoError> {
        self.get(name).map(|_| self.array(name)).transpose()
    }

    pub fn number_at(&self, path: &str, v: &Value) -> Result<f64, IoError> {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.err(path, "expected a finite number"))
    }

    pub fn opt_number(&self, name: &str) -> Result<Option<f64>, IoError> {
        self.get(name).map(|v| self.number_at(name, v)).transpose()
    }

    pub fn index_at(&self, path: &str, v: &Value) -> Result<usize, IoError> {
        v.as_u64()
            .and_then(|x| usize::try_from(x).ok())
            .ok_or_else(|| self.err(path, "expected a non-negative integer"))
    }

    pub fn string_at(&self, path: &str, v: &Value) -> Result<String, IoError> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
            _ => Err(self.err(path, "expected a string")),
        }
    }

    /// `[a, b, ...]` with exactly `arity` finite numbers.
    pub fn tuple_at(&self, path: &str, v: &Value, arity: usize) -> Result<Vec<f64>, IoError> {
        let items = v
            .as_array()
            .filter(|a| a.len() == arity)
            .ok_or_else(|| self.err(path, format!("expected an array of {arity} numbers")))?;
        items.iter().map(|x| self.number_at(path, x)).collect()
    }

    pub fn segment(&self, path: &str, start: f64, end: f64) -> Result<TemporalSegment, IoError> {
        TemporalSegment::new(start, end).map_err(|e| self.err(path, e.to_string()))
    }

    pub fn segment_at(&self, path: &str, v: &Value) -> Result<TemporalSegment, IoError> {
        let pair = self.tuple_at(path, v, 2)?;
        self.segment(path, pair[0], pair[1])
    }

    pub fn error(&self, field: &str, message: impl Into<String>) -> IoError {
        self.err(field, message)
    }
}
