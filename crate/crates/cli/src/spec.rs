//! Body-spec and threshold-input files.
//!
//! Both are YAML documents (JSON is accepted as a subset):
//!
//! ```yaml
//! {kind: lp_ball, n: 2, p: 4}
//! {kind: polygon, vertices: [[1, 1], [-1, 1], [-1, -1], [1, -1]]}
//! {kind: ellipsoid, semi_axes: [2, 1]}
//! {kind: ellipsoid, shape: [[1, 0], [0, 4]], center: [0, 0]}
//! {kind: affine, inner: {kind: lp_ball, n: 2, p: 3}, map: [[2, 1], [0, 1]], translation: [1, 0]}
//! ```

use std::fmt::Write as _;
use std::path::Path;

use floatlab_core::body::BodyKind;
use floatlab_core::{BodySpec, ThresholdInputs, Vec2};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_yaml::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Body(#[from] floatlab_core::Error),
}

impl SpecError {
    /// Whether the failure lies with the caller's input.
    pub fn is_input_error(&self) -> bool {
        match self {
            SpecError::Body(e) => e.is_input_error(),
            _ => true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Number(f64),
    Word(String),
}

impl Exponent {
    fn value(&self) -> Result<f64, SpecError> {
        match self {
            Exponent::Number(p) => Ok(*p),
            Exponent::Word(w) => match w.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                _ => Err(SpecError::Invalid(format!("p must be a number or inf (got {w:?})"))),
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawBody {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    LpBall {
        n: usize,
        p: Exponent,
    },
    Ellipsoid {
        semi_axes: Option<Vec<f64>>,
        shape: Option<Vec<Vec<f64>>>,
        center: Option<Vec<f64>>,
    },
    Affine {
        inner: Box<RawBody>,
        map: Vec<Vec<f64>>,
        translation: Option<Vec<f64>>,
    },
}

fn square_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, SpecError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(SpecError::Invalid(format!("{what} must be a square matrix given as a list of rows")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl RawBody {
    fn build(self) -> Result<BodySpec, SpecError> {
        let body = match self {
            RawBody::Polygon { vertices } => {
                BodySpec::polygon(&vertices)?
            }
            RawBody::LpBall { n, p } => BodySpec::lp_ball(n, p.value()?)?,
            RawBody::Ellipsoid { semi_axes, shape, center } => match (semi_axes, shape) {
                (Some(axes), None) => {
                    let body = BodySpec::ellipsoid_axes(&axes)?;
                    match center {
                        Some(c) => body.translated(&c)?,
                        None => body,
                    }
                }
                (None, Some(rows)) => {
                    let shape = square_matrix(&rows, "shape")?;
                    let center = center.unwrap_or_else(|| vec![0.0; shape.nrows()]);
                    BodySpec::ellipsoid(shape, DVector::from_vec(center))?
                }
                _ => return Err(SpecError::Invalid("ellipsoid needs exactly one of semi_axes or shape".into())),
            },
            RawBody::Affine { inner, map, translation } => {
                let map = square_matrix(&map, "map")?;
                let translation = translation.unwrap_or_else(|| vec![0.0; map.nrows()]);
                BodySpec::affine(inner.build()?, map, DVector::from_vec(translation))?
            }
        };
        Ok(body)
    }
}

/// Parses a body spec.
pub fn parse_body_spec(text: &str) -> Result<BodySpec, SpecError> {
    let raw: RawBody = serde_yaml::from_str(text)?;
    raw.build()
}

pub fn read_body_spec(path: &Path) -> Result<BodySpec, SpecError> {
    parse_body_spec(&read(path)?)
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })
}

/// 17 significant digits, so that parsing gives back the same double.
pub fn number(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { ".inf".into() } else { "-.inf".into() };
    }
    format!("{x:.16e}")
}

fn list(xs: impl IntoIterator<Item = f64>) -> String {
    let items: Vec<String> = xs.into_iter().map(number).collect();
    format!("[{}]", items.join(", "))
}

fn matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m.row_iter().map(|r| list(r.iter().copied())).collect();
    format!("[{}]", rows.join(", "))
}

/// Writes a body spec as a single-line flow mapping.
pub fn serialize_body_spec(body: &BodySpec) -> String {
    let mut s = String::new();
    match body.kind() {
        BodyKind::Polygon(poly) => {
            let verts: Vec<String> = poly.vertices().iter().map(|v: &Vec2| list([v.x, v.y])).collect();
            let _ = write!(s, "{{kind: polygon, vertices: [{}]}}", verts.join(", "));
        }
        BodyKind::LpBall { n, p } => {
            let _ = write!(s, "{{kind: lp_ball, n: {n}, p: {}}}", number(*p));
        }
        BodyKind::Ellipsoid { shape, center } => {
            let _ = write!(s, "{{kind: ellipsoid, shape: {}, center: {}}}", matrix(shape), list(center.iter().copied()));
        }
        BodyKind::Affine { inner, map, translation } => {
            let _ = write!(
                s,
                "{{kind: affine, inner: {}, map: {}, translation: {}}}",
                serialize_body_spec(inner),
                matrix(map),
                list(translation.iter().copied())
            );
        }
    }
    s
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThreshold {
    n: usize,
    tau: f64,
    #[serde(rename = "T_M")]
    t_max: f64,
    r_m: f64,
    #[serde(rename = "r_M")]
    r_cap_m: f64,
    #[serde(rename = "D")]
    d: f64,
    rho_0: f64,
    #[serde(rename = "R")]
    r: f64,
}

/// Parses threshold inputs with keys n, tau, T_M, r_m, r_M, D, rho_0, R.
pub fn parse_threshold_inputs(text: &str) -> Result<ThresholdInputs, SpecError> {
    let raw: RawThreshold = serde_yaml::from_str(text)?;
    let inp = ThresholdInputs {
        n: raw.n,
        tau: raw.tau,
        t_max: raw.t_max,
        r_m: raw.r_m,
        r_cap_m: raw.r_cap_m,
        d: raw.d,
        rho_0: raw.rho_0,
        r: raw.r,
    };
    inp.validate()?;
    Ok(inp)
}

pub fn read_threshold_inputs(path: &Path) -> Result<ThresholdInputs, SpecError> {
    parse_threshold_inputs(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let b = parse_body_spec("{kind: lp_ball, n: 2, p: 4}").unwrap();
        assert_eq!(b, BodySpec::lp_ball(2, 4.0).unwrap());
        let sq = parse_body_spec("{kind: polygon, vertices: [[1,1],[-1,1],[-1,-1],[1,-1]]}").unwrap();
        assert!((sq.volume() - 4.0).abs() < 1e-15);
        let cw = parse_body_spec("{kind: polygon, vertices: [[1,-1],[-1,-1],[-1,1],[1,1]]}").unwrap();
        assert!((cw.volume() - 4.0).abs() < 1e-15);
        let e = parse_body_spec("{kind: polygon, vertices: [[0,0],[2,0],[1,0.1],[0,1]]}").unwrap_err();
        assert!(e.is_input_error());
        assert!(e.to_string().contains("vertex index 2"), "{e}");
    }

    #[test]
    fn infinite_exponent() {
        for text in ["{kind: lp_ball, n: 2, p: inf}", "{kind: lp_ball, n: 2, p: .inf}", r#"{"kind": "lp_ball", "n": 2, "p": "inf"}"#] {
            assert_eq!(parse_body_spec(text).unwrap(), BodySpec::lp_ball(2, f64::INFINITY).unwrap());
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            "{kind: lp_ball, n: 2, p: 0.5}",
            "{kind: lp_ball, n: 2}",
            "{kind: lp_ball, n: 2, p: 2, q: 1}",
            "{kind: torus}",
            "{kind: ellipsoid, semi_axes: [1, 2], shape: [[1, 0], [0, 1]]}",
            "{kind: affine, inner: {kind: lp_ball, n: 2, p: 2}, map: [[1, 2], [2, 4]]}",
            "{kind: lp_ball, n: 2, p: [4",
        ];
        for text in bad {
            assert!(parse_body_spec(text).unwrap_err().is_input_error(), "{text}");
        }
        let e = parse_body_spec("kind: lp_ball\nn: 2\np: [4\n").unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
    }

    #[test]
    fn threshold_file() {
        let inp = parse_threshold_inputs("{n: 2, tau: 2, T_M: 1, r_m: 1, r_M: 1, D: 1, rho_0: 0.5, R: 2}").unwrap();
        assert_eq!(inp.t_max, 1.0);
        assert_eq!(inp.r, 2.0);
        assert!(parse_threshold_inputs("{n: 2, tau: 0.5, T_M: 1, r_m: 1, r_M: 1, D: 1, rho_0: 0.5, R: 2}").is_err());
    }
}
