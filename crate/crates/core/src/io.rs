//! Tensor JSON: `{"field": "real"|"complex", "dims": [..], "data": [..]}`,
//! row-major with the last index fastest; complex entries are `[re, im]`.
//! `serde_json` writes the shortest decimal that round-trips, so output is
//! bit-exact on re-read.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::tensor::DenseTensor;

/// A tensor over either field, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Real(DenseTensor<f64>),
    Complex(DenseTensor<Complex64>),
}

impl AnyTensor {
    pub fn field(&self) -> Field {
        match self {
            AnyTensor::Real(_) => Field::Real,
            AnyTensor::Complex(_) => Field::Complex,
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            AnyTensor::Real(t) => t.dims(),
            AnyTensor::Complex(t) => t.dims(),
        }
    }

    /// The real tensor, or a field error for complex input.
    pub fn into_real(self) -> Result<DenseTensor<f64>> {
        match self {
            AnyTensor::Real(t) => Ok(t),
            AnyTensor::Complex(_) => Err(Error::Field("solvers work over the reals; got a complex tensor".into())),
        }
    }
}

#[derive(Serialize)]
struct Wire<'a, S: Serialize> {
    field: Field,
    dims: &'a [usize],
    data: &'a [S],
}

pub fn real_to_json(t: &DenseTensor<f64>) -> String {
    serde_json::to_string(&Wire {
        field: Field::Real,
        dims: t.dims(),
        data: t.data(),
    })
    .expect("finite tensors serialize")
}

pub fn complex_to_json(t: &DenseTensor<Complex64>) -> String {
    serde_json::to_string(&Wire {
        field: Field::Complex,
        dims: t.dims(),
        data: t.data(),
    })
    .expect("finite tensors serialize")
}

pub fn to_json(t: &AnyTensor) -> String {
    match t {
        AnyTensor::Real(t) => real_to_json(t),
        AnyTensor::Complex(t) => complex_to_json(t),
    }
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{path}`: {msg}"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| field_err(path, format!("expected a finite number, got {v}")))
}

/// Parses tensor JSON. Syntax errors report line and column; schema errors
/// name the offending field (`data[5]`, `dims[1]`, ...).
pub fn from_json(text: &str) -> Result<AnyTensor> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let field = match obj.get("field") {
        None => Field::Real,
        Some(v) => Field::deserialize(v).map_err(|_| field_err("field", format!("expected \"real\" or \"complex\", got {v}")))?,
    };
    let dims_v = obj
        .get("dims")
        .and_then(Value::as_array)
        .ok_or_else(|| field_err("dims", "missing or not an array"))?;
    let mut dims = Vec::with_capacity(dims_v.len());
    for (i, v) in dims_v.iter().enumerate() {
        let n = v
            .as_u64()
            .filter(|&n| n > 0)
            .ok_or_else(|| field_err(&format!("dims[{i}]"), format!("expected a positive integer, got {v}")))?;
        dims.push(n as usize);
    }
    if dims.is_empty() {
        return Err(field_err("dims", "order must be at least 1"));
    }
    let data_v = obj
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| field_err("data", "missing or not an array"))?;
    let expected: usize = dims.iter().product();
    if data_v.len() != expected {
        return Err(field_err(
            "data",
            format!("dims {dims:?} need {expected} entries, found {}", data_v.len()),
        ));
    }
    match field {
        Field::Real => {
            let data = data_v
                .iter()
                .enumerate()
                .map(|(i, v)| number(v, &format!("data[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyTensor::Real(DenseTensor::new(dims, data)?))
        }
        Field::Complex => {
            let data = data_v
                .iter()
                .enumerate()
                .map(|(i, v)| match v.as_array().map(Vec::as_slice) {
                    Some([re, im]) => Ok(Complex64::new(
                        number(re, &format!("data[{i}][0]"))?,
                        number(im, &format!("data[{i}][1]"))?,
                    )),
                    _ => Err(field_err(&format!("data[{i}]"), format!("expected [re, im], got {v}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyTensor::Complex(DenseTensor::new(dims, data)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_is_exact() {
        let t = DenseTensor::from_fn(vec![2, 3], |i| (i[0] as f64 + 0.1) / (i[1] as f64 + 3.0)).unwrap();
        let s = real_to_json(&t);
        assert_eq!(from_json(&s).unwrap(), AnyTensor::Real(t.clone()));
        assert_eq!(to_json(&from_json(&s).unwrap()), s);
    }

    #[test]
    fn complex_entries_are_pairs() {
        let t = DenseTensor::new(vec![2], vec![Complex64::new(1.0, -0.5), Complex64::new(0.0, 2.0)]).unwrap();
        let s = complex_to_json(&t);
        assert_eq!(s, r#"{"field":"complex","dims":[2],"data":[[1.0,-0.5],[0.0,2.0]]}"#);
        assert_eq!(from_json(&s).unwrap(), AnyTensor::Complex(t));
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let e = from_json("{\"dims\": [2],\n \"data\": [1, }").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = from_json(r#"{"dims":[2,2],"data":[1,2,3]}"#).unwrap_err();
        assert!(e.to_string().contains("need 4 entries"), "{e}");
        let e = from_json(r#"{"dims":[2,0],"data":[]}"#).unwrap_err();
        assert!(e.to_string().contains("dims[1]"), "{e}");
        let e = from_json(r#"{"field":"complex","dims":[1],"data":[1.0]}"#).unwrap_err();
        assert!(e.to_string().contains("data[0]"), "{e}");
        let e = from_json(r#"{"field":"quaternion","dims":[1],"data":[1.0]}"#).unwrap_err();
        assert!(e.to_string().contains("field `field`"), "{e}");
    }
}
