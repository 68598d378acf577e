use std::collections::BTreeSet;

use num::Zero;
use serde::{Deserialize, Serialize};

use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};
use crate::rational::{is_positive_int, JsonInt, Rational};

/// `{"dim": n, "terms": [{"exp": [...], "num": int, "den": int}, ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialJson {
    pub dim: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: JsonInt,
    pub den: JsonInt,
}

impl From<&Polynomial> for PolynomialJson {
    fn from(p: &Polynomial) -> Self {
        PolynomialJson {
            dim: p.dim,
            terms: p
                .terms
                .iter()
                .map(|(k, v)| TermJson {
                    exp: k.exponents().to_vec(),
                    num: JsonInt(v.numer().clone()),
                    den: JsonInt(v.denom().clone()),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = Error;

    fn try_from(doc: PolynomialJson) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut p = Polynomial::zero(doc.dim);
        for t in doc.terms {
            if t.exp.len() != doc.dim {
                return Err(Error::Parse(format!(
                    "exponent vector {:?} has length {}, expected {}",
                    t.exp,
                    t.exp.len(),
                    doc.dim
                )));
            }
            if !is_positive_int(&t.den.0) {
                return Err(Error::Parse(format!("denominator {} is not positive", t.den.0)));
            }
            if t.num.0.is_zero() {
                return Err(Error::Parse(format!("zero coefficient at {:?}", t.exp)));
            }
            if !seen.insert(t.exp.clone()) {
                return Err(Error::Parse(format!("duplicate exponent vector {:?}", t.exp)));
            }
            p.add_term(MultiIndex::new(t.exp), Rational::new(t.num.0, t.den.0));
        }
        Ok(p)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PolynomialJson::deserialize(deserializer)?;
        Polynomial::try_from(doc).map_err(serde::de::Error::custom)
    }
}
