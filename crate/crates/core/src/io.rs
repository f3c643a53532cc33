//! Map-description documents, point files and number formatting.
//!
//! A map document is JSON:
//!
//! ```text
//! {"type":"henon","a":"1","p":"x^2"}
//! {"type":"triangular","a":"1","b":"1","c":"0","P":"y^3"}
//! {"type":"compose","maps":[...]}            applied right-to-left
//! {"type":"conjugate","inner":{...},"by":{...}}   by^-1 ∘ inner ∘ by
//! {"type":"pair","p":"..","q":"..","pinv":"..","qinv":".."}
//! ```

use serde::{Deserialize, Serialize};

use crate::automorphism::{compose_maps, conjugate, PlaneAutomorphism};
use crate::canonical::HeightEngine;
use crate::error::{Error, Result};
use crate::heights::AffinePoint;
use crate::ratpoly::{parse_poly, parse_rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapDesc {
    Henon {
        a: String,
        p: String,
    },
    Triangular {
        a: String,
        b: String,
        c: String,
        #[serde(rename = "P")]
        big_p: String,
    },
    Compose {
        maps: Vec<MapDesc>,
    },
    Conjugate {
        inner: Box<MapDesc>,
        by: Box<MapDesc>,
    },
    Pair {
        p: String,
        q: String,
        pinv: String,
        qinv: String,
    },
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Input(format!("field {name:?}: {e}")))
}

impl MapDesc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("map document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map documents serialise")
    }

    /// The automorphism the document describes.
    pub fn build(&self) -> Result<PlaneAutomorphism> {
        match self {
            MapDesc::Henon { a, p } => {
                PlaneAutomorphism::henon(field("a", parse_rat(a))?, field("p", parse_poly(p))?)
            }
            MapDesc::Triangular { a, b, c, big_p } => PlaneAutomorphism::triangular(
                field("a", parse_rat(a))?,
                field("b", parse_rat(b))?,
                field("c", parse_rat(c))?,
                field("P", parse_poly(big_p))?,
            ),
            MapDesc::Compose { maps } => {
                let mut acc = PlaneAutomorphism::identity();
                for m in maps {
                    acc = compose_maps(&acc, &m.build()?);
                }
                Ok(acc)
            }
            MapDesc::Conjugate { inner, by } => Ok(conjugate(&inner.build()?, &by.build()?)),
            MapDesc::Pair { p, q, pinv, qinv } => PlaneAutomorphism::pair(
                field("p", parse_poly(p))?,
                field("q", parse_poly(q))?,
                field("pinv", parse_poly(pinv))?,
                field("qinv", parse_poly(qinv))?,
            ),
        }
    }

    /// Engine whose core is the innermost regular map and whose conjugator
    /// collects the `by` layers.
    pub fn engine(&self) -> Result<HeightEngine> {
        let (core, gamma) = self.split()?;
        let engine = HeightEngine::new(core)?;
        Ok(match gamma {
            Some(g) => engine.with_conjugator(g),
            None => engine,
        })
    }

    /// `(g, Γ)` with the described map equal to `Γ ∘ g ∘ Γ^-1`.
    fn split(&self) -> Result<(PlaneAutomorphism, Option<PlaneAutomorphism>)> {
        match self {
            MapDesc::Conjugate { inner, by } => {
                let (core, inner_gamma) = inner.split()?;
                let by_inv = by.build()?.inverse();
                let gamma = match inner_gamma {
                    Some(g) => compose_maps(&by_inv, &g),
                    None => by_inv,
                };
                Ok((core, Some(gamma)))
            }
            other => Ok((other.build()?, None)),
        }
    }
}

/// One point per line as `X,Y` or `X Y`; blank lines and `#` comments are
/// skipped. Errors carry the 1-based line number.
pub fn parse_points(text: &str) -> Result<Vec<AffinePoint>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let p = AffinePoint::parse(body).map_err(|e| Error::Input(format!("line {}: {e}", i + 1)))?;
        out.push(p);
    }
    Ok(out)
}

/// Twelve significant digits, `%g` style: fixed notation for exponents in
/// `[-5, 12)`, scientific otherwise, trailing zeros removed.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn henon_document() {
        let m = MapDesc::from_json(r#"{"type":"henon","a":"1","p":"x^2"}"#).unwrap();
        let f = m.build().unwrap();
        let one = Rat::from_integer(1.into());
        let two = Rat::from_integer(2.into());
        assert_eq!(f.apply(&two, &one), (Rat::from_integer(3.into()), two));
        assert_eq!(m.engine().unwrap().delta(), 2);
    }

    #[test]
    fn compose_applies_right_to_left() {
        let doc = r#"{"type":"compose","maps":[
            {"type":"henon","a":"1","p":"x^2"},
            {"type":"henon","a":"1","p":"x^3"}]}"#;
        let f = MapDesc::from_json(doc).unwrap().build().unwrap();
        // (x, y) -> (x^3 - y, x) -> (x^6 - ..., x^3 - y)
        let (x, y) = (Rat::from_integer(2.into()), Rat::from_integer(1.into()));
        let inner = (Rat::from_integer(7.into()), Rat::from_integer(2.into()));
        let outer = (Rat::from_integer(47.into()), Rat::from_integer(7.into()));
        assert_eq!(f.apply(&x, &y), outer);
        assert_eq!(inner.0.clone() * inner.0 - inner.1, Rat::from_integer(47.into()));
        assert_eq!(f.degree(), 6);
    }

    #[test]
    fn conjugate_engine_matches_built_map() {
        let doc = r#"{"type":"conjugate",
            "inner":{"type":"henon","a":"1","p":"x^2"},
            "by":{"type":"triangular","a":"1","b":"1","c":"0","P":"y^2"}}"#;
        let m = MapDesc::from_json(doc).unwrap();
        let f = m.build().unwrap();
        let e = m.engine().unwrap();
        let x = AffinePoint::from_ints(2, -1);
        let (fx, fy) = f.apply(&x.x, &x.y);
        assert_eq!(e.apply_f(&x), AffinePoint::new(fx, fy));
    }

    #[test]
    fn nested_conjugates_compose_conjugators() {
        let doc = r#"{"type":"conjugate",
            "inner":{"type":"conjugate",
                "inner":{"type":"henon","a":"1","p":"x^2"},
                "by":{"type":"triangular","a":"1","b":"1","c":"1","P":"y^2"}},
            "by":{"type":"triangular","a":"-1","b":"1","c":"2","P":"y"}}"#;
        let m = MapDesc::from_json(doc).unwrap();
        let f = m.build().unwrap();
        let e = m.engine().unwrap();
        let x = AffinePoint::from_ints(1, 3);
        let (fx, fy) = f.apply(&x.x, &x.y);
        assert_eq!(e.apply_f(&x), AffinePoint::new(fx, fy));
    }

    #[test]
    fn bad_documents() {
        assert!(matches!(MapDesc::from_json(r#"{"type":"henon","a":"1"}"#), Err(Error::Input(_))));
        let m = MapDesc::from_json(r#"{"type":"henon","a":"1/0","p":"x^2"}"#).unwrap();
        assert!(matches!(m.build(), Err(Error::Input(_))));
    }

    #[test]
    fn round_trip_json() {
        let doc = r#"{"type":"triangular","a":"2","b":"1/3","c":"0","P":"y^3"}"#;
        let m = MapDesc::from_json(doc).unwrap();
        assert_eq!(MapDesc::from_json(&m.to_json()).unwrap(), m);
        assert!(m.to_json().contains("\"P\""));
    }

    #[test]
    fn point_file() {
        let pts = parse_points("# header\n3,0\n\n1/2 -5  # trailing\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].x, Rat::new(1.into(), 2.into()));
        let err = parse_points("1,1\n2,x\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(10f64.ln()), "2.30258509299");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.5), "1.5");
        assert_eq!(format_real(-3.0), "-3");
        assert_eq!(format_real(1.0e20), "1e+20");
        assert_eq!(format_real(1.25e-7), "1.25e-07");
        assert_eq!(format_real(123456789012.0), "123456789012");
        assert_eq!(format_real(f64::NEG_INFINITY), "-inf");
    }
}
