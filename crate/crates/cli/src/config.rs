//! JSON problem configuration.

use std::fmt;
use std::path::Path;

use greenfde::expr::{parse, Expr, NONLINEARITY_VARS, NO_VARS, TIME_VARS};
use greenfde::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use greenfde::{BoundaryRow, Endpoint, ProblemSpec};
use serde::{Deserialize, Serialize};

/// A real number given either literally or as a constant expression such as `"e"` or `"-pi/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn value(&self) -> Result<f64, String> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Text(src) => {
                let e = parse(src, NO_VARS).map_err(|e| e.to_string())?;
                e.eval_t(0.0).map_err(|e| e.to_string())
            }
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Number(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub a: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub at: Endpoint,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub gamma: Scalar,
    pub b: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub interval: Interval,
    pub bc: Vec<BcConfig>,
    pub f: String,
    pub phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

/// A configuration problem, located by line (and column for syntax errors) when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ProblemConfig {
    /// Parse the JSON text. Syntax and type errors carry serde's line and column.
    pub fn from_json(src: &str) -> Result<ProblemConfig, ConfigError> {
        serde_json::from_str(src).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            field: None,
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Build and validate the problem. `src` is the text this config came
    /// from and is only used to point errors at a line.
    pub fn to_spec(&self, src: Option<&str>) -> Result<ProblemSpec, ConfigError> {
        let fail = |path: &[&str], index: Option<usize>, message: String| ConfigError {
            line: src.and_then(|s| locate(s, path, index)),
            column: None,
            field: Some(field_name(path, index)),
            message,
        };

        let a = self.interval.a.value().map_err(|m| fail(&["interval", "a"], None, m))?;
        if self.bc.len() != 3 {
            return Err(fail(&["bc"], None, format!("expected 3 boundary conditions, got {}", self.bc.len())));
        }
        let mut rows = Vec::with_capacity(3);
        for (i, bc) in self.bc.iter().enumerate() {
            let get = |key: &str, s: &Scalar| s.value().map_err(|m| fail(&["bc", key], Some(i), m));
            rows.push(BoundaryRow::new(
                bc.at,
                get("alpha", &bc.alpha)?,
                get("beta", &bc.beta)?,
                get("gamma", &bc.gamma)?,
                get("b", &bc.b)?,
            ));
        }
        let expr = |key: &str, text: &str, vars| -> Result<Expr, ConfigError> {
            parse(text, vars).map_err(|e| fail(&[key], None, e.to_string()))
        };
        let spec = ProblemSpec {
            a,
            rows: [rows[0], rows[1], rows[2]],
            f: expr("f", &self.f, NONLINEARITY_VARS)?,
            phi: expr("phi", &self.phi, TIME_VARS)?,
            exact: self.exact.as_deref().map(|e| expr("exact", e, TIME_VARS)).transpose()?,
        };
        if self.n < 2 {
            return Err(fail(&["N"], None, format!("need at least 2 cells, got {}", self.n)));
        }
        if !(self.tol > 0.0) {
            return Err(fail(&["tol"], None, format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(fail(&["max_iter"], None, "must be at least 1".into()));
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return Err(fail(&["M"], None, format!("must be positive, got {m}")));
            }
        }
        spec.validate().map_err(|e| ConfigError { line: None, column: None, field: None, message: e.to_string() })?;
        Ok(spec)
    }

    /// The config that reproduces `spec` exactly. Expressions are written in
    /// canonical form and numbers at full precision.
    pub fn from_spec(spec: &ProblemSpec, n: usize, tol: f64, max_iter: usize, m: Option<f64>) -> ProblemConfig {
        ProblemConfig {
            interval: Interval { a: spec.a.into() },
            bc: spec
                .rows
                .iter()
                .map(|r| BcConfig {
                    at: r.at,
                    alpha: r.alpha.into(),
                    beta: r.beta.into(),
                    gamma: r.gamma.into(),
                    b: r.b.into(),
                })
                .collect(),
            f: spec.f.to_string(),
            phi: spec.phi.to_string(),
            exact: spec.exact.as_ref().map(Expr::to_string),
            n,
            tol,
            max_iter,
            m,
        }
    }
}

/// A parsed config together with the problem it describes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ProblemConfig,
    pub spec: ProblemSpec,
}

pub fn load_str(src: &str) -> Result<LoadedConfig, ConfigError> {
    let config = ProblemConfig::from_json(src)?;
    let spec = config.to_spec(Some(src))?;
    Ok(LoadedConfig { config, spec })
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        column: None,
        field: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    load_str(&src)
}

fn field_name(path: &[&str], index: Option<usize>) -> String {
    match (path, index) {
        ([array, key], Some(i)) => format!("{array}[{i}].{key}"),
        _ => path.join("."),
    }
}

/// Line of the key at `path`. Nested keys are searched after their parent;
/// `index` picks the n-th object inside an array-valued parent.
fn locate(src: &str, path: &[&str], index: Option<usize>) -> Option<usize> {
    let mut from = 0;
    for (depth, key) in path.iter().enumerate() {
        from += find_key(&src[from..], key)?;
        if depth == 0 {
            if let Some(i) = index {
                let mut pos = from;
                for _ in 0..=i {
                    pos += src[pos..].find('{')? + 1;
                }
                from = pos;
            }
        }
    }
    Some(src[..from].matches('\n').count() + 1)
}

fn find_key(src: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    let mut start = 0;
    while let Some(off) = src[start..].find(&quoted) {
        let pos = start + off;
        let rest = src[pos + quoted.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(pos);
        }
        start = pos + quoted.len();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
  "interval": { "a": 1 },
  "bc": [
    { "at": "left", "alpha": 1, "beta": 0, "gamma": 0, "b": 1 },
    { "at": "left", "alpha": 0, "beta": 1, "gamma": 0, "b": 1 },
    { "at": "right", "alpha": 0, "beta": 1, "gamma": 0, "b": "e" }
  ],
  "f": "e^t - 1/4*u + 1/4*v^2",
  "phi": "t/2",
  "exact": "e^t",
  "N": 100
}"#;

    #[test]
    fn loads_with_defaults() {
        let loaded = load_str(EX1).unwrap();
        assert_eq!(loaded.config.tol, 1e-10);
        assert_eq!(loaded.config.max_iter, 1000);
        assert_eq!(loaded.config.m, None);
        assert_eq!(loaded.spec.rows[2].b, std::f64::consts::E);
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        let err = load_str("{\n  \"interval\": { \"a\": 1 },\n  \"bc\": [,\n}").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.column.is_some());
    }

    #[test]
    fn expression_error_points_at_key() {
        let src = EX1.replace("\"t/2\"", "\"t/\"");
        let err = load_str(&src).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert_eq!(err.field.as_deref(), Some("phi"));

        let src = EX1.replace("\"b\": \"e\"", "\"b\": \"u\"");
        let err = load_str(&src).unwrap_err();
        assert_eq!(err.line, Some(6));
        assert_eq!(err.field.as_deref(), Some("bc[2].b"));
        assert!(err.to_string().starts_with("line 6: bc[2].b: "));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_counts() {
        let src = EX1.replace("\"N\": 100", "\"N\": 100, \"n\": 3");
        assert!(load_str(&src).is_err());
        let src = EX1.replace("\"N\": 100", "\"N\": 1");
        assert_eq!(load_str(&src).unwrap_err().field.as_deref(), Some("N"));
    }

    #[test]
    fn round_trips_to_identical_spec() {
        let loaded = load_str(EX1).unwrap();
        let back = ProblemConfig::from_spec(&loaded.spec, 100, 1e-10, 1000, Some(6.5));
        let again = load_str(&back.to_json()).unwrap();
        assert_eq!(again.spec, loaded.spec);
        assert_eq!(again.config, back);
    }
}
