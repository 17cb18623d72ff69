//! Line-delimited JSON records with fixed key order.

use std::io::{self, Write};

use num_complex::Complex64 as C;
use serde::{Serialize, Serializer};

/// A float that serializes infinities as `"inf"` / `"-inf"` and NaN as `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

/// A complex value as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub C);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [Num(self.0.re), Num(self.0.im)].serialize(s)
    }
}

pub fn cxs(v: &[C]) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

/// Buffered record sink; records are written in the order they are pushed.
#[derive(Default)]
pub struct Records {
    lines: Vec<String>,
}

impl Records {
    pub fn push<T: Serialize>(&mut self, rec: &T) {
        self.lines.push(serde_json::to_string(rec).expect("records serialize"));
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        for l in &self.lines {
            writeln!(out, "{l}")?;
        }
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_are_strings() {
        let s = serde_json::to_string(&(Num(f64::INFINITY), Num(f64::NEG_INFINITY), Num(1.5))).unwrap();
        assert_eq!(s, r#"["inf","-inf",1.5]"#);
        assert_eq!(serde_json::to_string(&Cx(C::new(0.0, -2.0))).unwrap(), "[0.0,-2.0]");
    }

    #[test]
    fn field_order_is_declaration_order() {
        #[derive(Serialize)]
        struct R {
            zeta: u8,
            alpha: u8,
        }
        let mut r = Records::default();
        r.push(&R { zeta: 1, alpha: 2 });
        let mut out = Vec::new();
        r.write_to(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"zeta\":1,\"alpha\":2}\n");
    }
}
