//! Scalars in JSON: floats as numbers, rationals as `["num", "den"]`.

use anyhow::{anyhow, bail};
use lattice_bpb::operator::Matrix;
use lattice_bpb::{LatticeVector, Rational, Scalar};
use num_bigint::BigInt;
use serde_json::Value;

pub trait WireScalar: Scalar {
    fn to_wire(&self) -> Value;
    fn from_wire(v: &Value) -> anyhow::Result<Self>;
}

impl WireScalar for f64 {
    fn to_wire(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }

    fn from_wire(v: &Value) -> anyhow::Result<Self> {
        v.as_f64()
            .ok_or_else(|| anyhow!("expected a number, found {v}"))
    }
}

impl WireScalar for Rational {
    fn to_wire(&self) -> Value {
        Value::Array(vec![
            Value::String(self.numer().to_string()),
            Value::String(self.denom().to_string()),
        ])
    }

    fn from_wire(v: &Value) -> anyhow::Result<Self> {
        let pair = match v.as_array() {
            Some(p) if p.len() == 2 => p,
            _ => bail!("expected a [numerator, denominator] pair, found {v}"),
        };
        let part = |x: &Value| -> anyhow::Result<BigInt> {
            match x {
                Value::String(s) => s.parse().map_err(|_| anyhow!("bad integer {s:?}")),
                Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap_or_default())),
                other => bail!("bad integer {other}"),
            }
        };
        let (num, den) = (part(&pair[0])?, part(&pair[1])?);
        if den == BigInt::from(0) {
            bail!("zero denominator");
        }
        Ok(Rational::new(num, den))
    }
}

pub fn vector_to_wire<S: WireScalar>(x: &LatticeVector<S>) -> Value {
    Value::Array(x.entries().iter().map(WireScalar::to_wire).collect())
}

pub fn matrix_to_wire<S: WireScalar>(m: &Matrix<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| m.get(i, j).to_wire()).collect()))
            .collect(),
    )
}

pub fn vector_from_wire<S: WireScalar>(v: &Value) -> anyhow::Result<LatticeVector<S>> {
    let items = v.as_array().ok_or_else(|| anyhow!("expected an array"))?;
    let entries = items
        .iter()
        .map(S::from_wire)
        .collect::<anyhow::Result<Vec<S>>>()?;
    Ok(LatticeVector::new(entries)?)
}

pub fn matrix_from_wire<S: WireScalar>(v: &Value) -> anyhow::Result<Matrix<S>> {
    let rows = v
        .as_array()
        .ok_or_else(|| anyhow!("expected an array of rows"))?;
    if rows.is_empty() {
        bail!("matrix has no rows");
    }
    let mut data = Vec::new();
    let mut cols = None;
    for r in rows {
        let r = r
            .as_array()
            .ok_or_else(|| anyhow!("expected a row array"))?;
        match cols {
            None => cols = Some(r.len()),
            Some(c) if c != r.len() => bail!("ragged matrix"),
            _ => {}
        }
        for x in r {
            data.push(S::from_wire(x)?);
        }
    }
    Ok(Matrix::from_row_major(rows.len(), cols.unwrap_or(0), data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lattice_bpb::scalar::ratio;

    #[test]
    fn round_trips() {
        let q = ratio(-7, 12);
        assert_eq!(q.to_wire(), serde_json::json!(["-7", "12"]));
        assert_eq!(Rational::from_wire(&q.to_wire()).unwrap(), q);
        for x in [0.1, 1.0 / 3.0, 0.0, 1e-300] {
            assert_eq!(f64::from_wire(&x.to_wire()).unwrap(), x);
        }
        let m = Matrix::from_row_major(
            2,
            2,
            vec![ratio(1, 2), ratio(0, 1), ratio(3, 4), ratio(1, 1)],
        )
        .unwrap();
        assert_eq!(
            matrix_from_wire::<Rational>(&matrix_to_wire(&m)).unwrap(),
            m
        );
        assert!(Rational::from_wire(&serde_json::json!(["1", "0"])).is_err());
        assert!(matrix_from_wire::<f64>(&serde_json::json!([[1.0], [1.0, 2.0]])).is_err());
    }
}
