//! Canonical JSON: keys sorted, floats written with 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

use crate::error::{FileError, Result};

struct Canonical;

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// `d.dddddddddddddddde±x`, exact on round trip.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a value with sorted keys and canonical floats, ending in a
/// newline.
pub fn to_canonical_string(v: &Value) -> Result<String> {
    check_finite(v, "")?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical);
    // serde_json's Map is a BTreeMap here, so keys come out sorted.
    v.serialize(&mut ser).map_err(io::Error::from)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

fn check_finite(v: &Value, path: &str) -> Result<()> {
    match v {
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                check_finite(x, &format!("{path}/{i}"))?;
            }
        }
        Value::Object(o) => {
            for (k, x) in o {
                check_finite(x, &format!("{path}/{}", escape(k)))?;
            }
        }
        Value::Number(n) if n.as_f64().is_some_and(|f| !f.is_finite()) => {
            return Err(FileError::schema(path, "non-finite number"));
        }
        _ => {}
    }
    Ok(())
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| FileError::schema("", format!("not valid JSON: {e}")))
}

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn pair(x: f64, y: f64) -> Value {
    Value::Array(vec![float(x), float(y)])
}

/// Read access to a parsed document that remembers where it is, so errors
/// carry a JSON pointer.
#[derive(Clone)]
pub struct Node<'a> {
    pub value: &'a Value,
    path: String,
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Self {
        Node {
            value,
            path: String::new(),
        }
    }

    fn child(&self, value: &'a Value, seg: &str) -> Node<'a> {
        Node {
            value,
            path: format!("{}/{}", self.path, escape(seg)),
        }
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn err(&self, message: impl Into<String>) -> FileError {
        FileError::schema(&self.path, message)
    }

    pub fn object(&self) -> Result<&'a Map<String, Value>> {
        self.value.as_object().ok_or_else(|| self.err("expected an object"))
    }

    pub fn field(&self, key: &str) -> Result<Node<'a>> {
        self.opt_field(key)?.ok_or_else(|| {
            FileError::schema(&format!("{}/{}", self.path, escape(key)), "missing field")
        })
    }

    pub fn opt_field(&self, key: &str) -> Result<Option<Node<'a>>> {
        Ok(self.object()?.get(key).map(|v| self.child(v, key)))
    }

    pub fn array(&self) -> Result<Vec<Node<'a>>> {
        let a = self.value.as_array().ok_or_else(|| self.err("expected an array"))?;
        Ok(a.iter().enumerate().map(|(i, v)| self.child(v, &i.to_string())).collect())
    }

    pub fn array_of_len(&self, n: usize) -> Result<Vec<Node<'a>>> {
        let a = self.array()?;
        if a.len() != n {
            return Err(self.err(format!("expected {n} entries, found {}", a.len())));
        }
        Ok(a)
    }

    pub fn f64(&self) -> Result<f64> {
        let x = self.value.as_f64().ok_or_else(|| self.err("expected a number"))?;
        if !x.is_finite() {
            return Err(self.err("expected a finite number"));
        }
        Ok(x)
    }

    pub fn i64(&self) -> Result<i64> {
        self.value.as_i64().ok_or_else(|| self.err("expected an integer"))
    }

    pub fn usize(&self) -> Result<usize> {
        self.value
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| self.err("expected a non-negative integer"))
    }

    pub fn str(&self) -> Result<&'a str> {
        self.value.as_str().ok_or_else(|| self.err("expected a string"))
    }

    pub fn f64_pair(&self) -> Result<[f64; 2]> {
        let a = self.array_of_len(2)?;
        Ok([a[0].f64()?, a[1].f64()?])
    }

    pub fn i64_pair(&self) -> Result<[i64; 2]> {
        let a = self.array_of_len(2)?;
        Ok([a[0].i64()?, a[1].i64()?])
    }

    pub fn expect_version(&self) -> Result<()> {
        let v = self.field("version")?;
        match v.value.as_str() {
            Some("1") => Ok(()),
            _ => Err(v.err("unsupported version, expected \"1\"")),
        }
    }
}
