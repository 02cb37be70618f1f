//! Line-oriented model definition language and the builtin model catalog.
//!
//! ```text
//! model ou2
//! states: x observed, y
//! params: a b c d e f p r s
//! drift:
//!   x: -a*(x - e) - b*(y - f)
//!   y: -c*(x - e) - d*(y - f)
//! diffusion:
//!   x: [p, 0]
//!   y: [r, s]
//! ```
//!
//! `diffusion_sq:` may replace `diffusion:` and gives the noise covariance
//! `G = g g^T` entrywise (`x y: expr`), which is how square-root diffusion
//! terms such as those of a chemical Langevin equation are written.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::symbolic::{parse_expr, ExprError, Poly, Symbols};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: non-polynomial expression: {reason}")]
    NonPolynomial { line: usize, col: usize, reason: String },
    #[error("line {line}, column {col}: unknown symbol `{name}`")]
    UnknownSymbol { line: usize, col: usize, name: String },
    #[error("line {line}: duplicate state `{name}`")]
    DuplicateState { line: usize, name: String },
    #[error("line {line}: duplicate parameter `{name}`")]
    DuplicateParam { line: usize, name: String },
    #[error("line {line}: `{name}` is declared both as a state and a parameter")]
    StateParamClash { line: usize, name: String },
    #[error("model is incomplete: {0}")]
    Incomplete(String),
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
}

impl DslError {
    fn from_expr(line: usize, col_offset: usize, e: ExprError) -> Self {
        let col = col_offset + e.column();
        match e {
            ExprError::Syntax { found, .. } => DslError::Syntax {
                line,
                col,
                msg: format!("unexpected {found}"),
            },
            ExprError::UnknownSymbol { name, .. } => DslError::UnknownSymbol { line, col, name },
            ExprError::NonPolynomial { reason, .. } => DslError::NonPolynomial { line, col, reason },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub observed: bool,
}

/// Noise specification. `Diffusion` rows are per state, columns per Wiener
/// component; `Covariance` is the symmetric matrix `g g^T` directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Noise {
    Diffusion(Vec<Vec<Poly>>),
    Covariance(Vec<Vec<Poly>>),
}

/// A parsed and validated SDE model. Polynomials are written over the table
/// `states ++ params`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub name: String,
    pub states: Vec<StateVar>,
    pub params: Vec<String>,
    pub drift: Vec<Poly>,
    pub noise: Noise,
    pub warnings: Vec<String>,
    symbols: Symbols,
}

impl ModelSpec {
    /// Table of state symbols followed by parameter symbols.
    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    /// Table holding only the parameters; coefficient polynomials live here.
    pub fn param_symbols(&self) -> Symbols {
        Symbols::new(self.params.iter().cloned())
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn observed_indices(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| self.states[i].observed)
            .collect()
    }

    /// Noise covariance `G = g g^T` as polynomials.
    pub fn noise_covariance(&self) -> Vec<Vec<Poly>> {
        match &self.noise {
            Noise::Covariance(g) => g.clone(),
            Noise::Diffusion(g) => {
                let n = g.len();
                let mut out = vec![vec![Poly::zero(&self.symbols); n]; n];
                for a in 0..n {
                    for b in 0..n {
                        let mut acc = Poly::zero(&self.symbols);
                        for (ga, gb) in g[a].iter().zip(&g[b]) {
                            acc = &acc + &(ga * gb);
                        }
                        out[a][b] = acc;
                    }
                }
                out
            }
        }
    }

    /// Check the shape required by the moment elimination pipeline:
    /// two states, exactly one observed.
    pub fn require_elimination_shape(&self) -> Result<usize, DslError> {
        if self.states.len() != 2 {
            return Err(DslError::Incomplete(format!(
                "elimination needs exactly 2 states, model has {}",
                self.states.len()
            )));
        }
        match self.observed_indices().as_slice() {
            [i] => Ok(*i),
            other => Err(DslError::Incomplete(format!(
                "elimination needs exactly 1 observed state, model has {}",
                other.len()
            ))),
        }
    }

    /// Canonical text in the model grammar; `parse_model` inverts it.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "model {}", self.name).unwrap();
        let states: Vec<String> = self
            .states
            .iter()
            .map(|s| {
                if s.observed {
                    format!("{} observed", s.name)
                } else {
                    s.name.clone()
                }
            })
            .collect();
        writeln!(out, "states: {}", states.join(", ")).unwrap();
        writeln!(out, "params: {}", self.params.join(" ")).unwrap();
        writeln!(out, "drift:").unwrap();
        for (s, f) in self.states.iter().zip(&self.drift) {
            writeln!(out, "  {}: {}", s.name, f).unwrap();
        }
        match &self.noise {
            Noise::Diffusion(rows) => {
                writeln!(out, "diffusion:").unwrap();
                for (s, row) in self.states.iter().zip(rows) {
                    let cells: Vec<String> = row.iter().map(Poly::to_text).collect();
                    writeln!(out, "  {}: [{}]", s.name, cells.join(", ")).unwrap();
                }
            }
            Noise::Covariance(g) => {
                writeln!(out, "diffusion_sq:").unwrap();
                for a in 0..g.len() {
                    for b in a..g.len() {
                        if !g[a][b].is_zero() {
                            writeln!(
                                out,
                                "  {} {}: {}",
                                self.states[a].name, self.states[b].name, g[a][b]
                            )
                            .unwrap();
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Drift,
    Diffusion,
    DiffusionSq,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Column (1-based) of `needle` inside `line`.
fn col_of(line: &str, needle: &str) -> usize {
    line.find(needle).map(|b| line[..b].chars().count() + 1).unwrap_or(1)
}

/// Parse model text into a validated [`ModelSpec`].
pub fn parse_model(text: &str) -> Result<ModelSpec, DslError> {
    let mut name: Option<String> = None;
    let mut states: Vec<StateVar> = Vec::new();
    let mut params: Vec<String> = Vec::new();
    let mut states_line = 0;
    let mut params_seen = false;
    let mut section = Section::None;
    let mut drift_src: BTreeMap<String, (usize, usize, String)> = BTreeMap::new();
    let mut diff_src: BTreeMap<String, (usize, usize, String)> = BTreeMap::new();
    let mut sq_src: Vec<(usize, usize, String, String, String)> = Vec::new();
    let mut saw_diff = false;
    let mut saw_sq = false;

    for (ln0, raw) in text.lines().enumerate() {
        let line_no = ln0 + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let syntax = |col: usize, msg: String| DslError::Syntax {
            line: line_no,
            col,
            msg,
        };

        if let Some(rest) = trimmed.strip_prefix("model ") {
            let n = rest.trim();
            if !is_ident(n) {
                return Err(syntax(col_of(line, n), format!("invalid model name `{n}`")));
            }
            name = Some(n.to_string());
            section = Section::None;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("states:") {
            states_line = line_no;
            for item in rest.split(',') {
                let words: Vec<&str> = item.split_whitespace().collect();
                let (sym, observed) = match words.as_slice() {
                    [s] => (*s, false),
                    [s, "observed"] => (*s, true),
                    _ => {
                        return Err(syntax(
                            col_of(line, item.trim()),
                            format!("expected `<state> [observed]`, got `{}`", item.trim()),
                        ))
                    }
                };
                if !is_ident(sym) {
                    return Err(syntax(col_of(line, sym), format!("invalid state name `{sym}`")));
                }
                if states.iter().any(|s| s.name == sym) {
                    return Err(DslError::DuplicateState {
                        line: line_no,
                        name: sym.to_string(),
                    });
                }
                states.push(StateVar {
                    name: sym.to_string(),
                    observed,
                });
            }
            section = Section::None;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("params:") {
            params_seen = true;
            for sym in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                if !is_ident(sym) {
                    return Err(syntax(col_of(line, sym), format!("invalid parameter name `{sym}`")));
                }
                if params.iter().any(|p| p == sym) {
                    return Err(DslError::DuplicateParam {
                        line: line_no,
                        name: sym.to_string(),
                    });
                }
                if states.iter().any(|s| s.name == sym) {
                    return Err(DslError::StateParamClash {
                        line: line_no,
                        name: sym.to_string(),
                    });
                }
                params.push(sym.to_string());
            }
            section = Section::None;
            continue;
        }
        match trimmed {
            "drift:" => {
                section = Section::Drift;
                continue;
            }
            "diffusion:" => {
                section = Section::Diffusion;
                saw_diff = true;
                continue;
            }
            "diffusion_sq:" => {
                section = Section::DiffusionSq;
                saw_sq = true;
                continue;
            }
            _ => {}
        }

        let Some(colon) = trimmed.find(':') else {
            return Err(syntax(col_of(line, trimmed), format!("unrecognised line `{trimmed}`")));
        };
        let head = trimmed[..colon].trim();
        let body = &trimmed[colon + 1..];
        // column of the first character after ':'
        let body_col = col_of(line, trimmed) + trimmed[..colon + 1].chars().count();
        match section {
            Section::None => {
                return Err(syntax(col_of(line, head), format!("entry `{head}` outside a section")))
            }
            Section::Drift => {
                if drift_src.insert(head.to_string(), (line_no, body_col, body.to_string())).is_some() {
                    return Err(syntax(col_of(line, head), format!("drift for `{head}` given twice")));
                }
            }
            Section::Diffusion => {
                if diff_src.insert(head.to_string(), (line_no, body_col, body.to_string())).is_some() {
                    return Err(syntax(col_of(line, head), format!("diffusion row for `{head}` given twice")));
                }
            }
            Section::DiffusionSq => {
                let words: Vec<&str> = head.split_whitespace().collect();
                let [a, b] = words.as_slice() else {
                    return Err(syntax(
                        col_of(line, head),
                        format!("expected `<state> <state>`, got `{head}`"),
                    ));
                };
                sq_src.push((line_no, body_col, a.to_string(), b.to_string(), body.to_string()));
            }
        }
    }

    let name = name.ok_or_else(|| DslError::Incomplete("missing `model <name>` line".into()))?;
    if states.is_empty() {
        return Err(DslError::Incomplete("missing `states:` line".into()));
    }
    if !params_seen {
        return Err(DslError::Incomplete("missing `params:` line".into()));
    }
    if saw_diff == saw_sq {
        return Err(DslError::Incomplete(
            "exactly one of `diffusion:` or `diffusion_sq:` is required".into(),
        ));
    }

    let symbols = Symbols::new(
        states
            .iter()
            .map(|s| s.name.clone())
            .chain(params.iter().cloned()),
    );
    let state_idx = |s: &str| states.iter().position(|v| v.name == s);

    let mut drift = vec![None; states.len()];
    for (head, (line, col, body)) in &drift_src {
        let Some(i) = state_idx(head) else {
            return Err(DslError::UnknownSymbol {
                line: *line,
                col: 1,
                name: head.clone(),
            });
        };
        drift[i] = Some(parse_expr(body, &symbols).map_err(|e| DslError::from_expr(*line, *col - 1, e))?);
    }
    let drift: Vec<Poly> = drift
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| DslError::Incomplete(format!("no drift for state `{}`", states[i].name))))
        .collect::<Result<_, _>>()?;

    let noise = if saw_diff {
        let mut rows = vec![None; states.len()];
        for (head, (line, col, body)) in &diff_src {
            let Some(i) = state_idx(head) else {
                return Err(DslError::UnknownSymbol {
                    line: *line,
                    col: 1,
                    name: head.clone(),
                });
            };
            let b = body.trim();
            let lead = body.len() - body.trim_start().len();
            let inner = b
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| DslError::Syntax {
                    line: *line,
                    col: *col + lead,
                    msg: "diffusion row must be a bracketed list `[e1, e2, ...]`".into(),
                })?;
            let mut cells = Vec::new();
            let mut offset = *col + lead; // position of '['
            for cell in inner.split(',') {
                cells.push(parse_expr(cell, &symbols).map_err(|e| DslError::from_expr(*line, offset, e))?);
                offset += cell.chars().count() + 1;
            }
            rows[i] = Some(cells);
        }
        let rows: Vec<Vec<Poly>> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| DslError::Incomplete(format!("no diffusion row for state `{}`", states[i].name))))
            .collect::<Result<_, _>>()?;
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(DslError::Incomplete("diffusion rows have different lengths".into()));
        }
        Noise::Diffusion(rows)
    } else {
        let n = states.len();
        let mut g: Vec<Vec<Option<Poly>>> = vec![vec![None; n]; n];
        for (line, col, a, b, body) in &sq_src {
            let (Some(i), Some(j)) = (state_idx(a), state_idx(b)) else {
                let bad = if state_idx(a).is_none() { a } else { b };
                return Err(DslError::UnknownSymbol {
                    line: *line,
                    col: 1,
                    name: bad.clone(),
                });
            };
            let p = parse_expr(body, &symbols).map_err(|e| DslError::from_expr(*line, *col - 1, e))?;
            for (r, c) in [(i, j), (j, i)] {
                if let Some(prev) = &g[r][c] {
                    if prev != &p {
                        return Err(DslError::Syntax {
                            line: *line,
                            col: 1,
                            msg: format!("diffusion_sq entry `{a} {b}` conflicts with an earlier entry"),
                        });
                    }
                }
                g[r][c] = Some(p.clone());
            }
        }
        Noise::Covariance(
            g.into_iter()
                .map(|row| row.into_iter().map(|c| c.unwrap_or_else(|| Poly::zero(&symbols))).collect())
                .collect(),
        )
    };

    let mut warnings = Vec::new();
    let n_obs = states.iter().filter(|s| s.observed).count();
    if n_obs != 1 {
        warnings.push(format!(
            "line {states_line}: {n_obs} observed states; the elimination pipeline needs exactly one (ou analysis only)"
        ));
    }
    let used: HashSet<usize> = drift
        .iter()
        .chain(match &noise {
            Noise::Diffusion(r) | Noise::Covariance(r) => r.iter().flatten().collect::<Vec<_>>(),
        })
        .flat_map(|p| p.support())
        .collect();
    for (k, p) in params.iter().enumerate() {
        if !used.contains(&(states.len() + k)) {
            warnings.push(format!("parameter `{p}` is declared but never used"));
        }
    }

    Ok(ModelSpec {
        name,
        states,
        params,
        drift,
        noise,
        warnings,
        symbols,
    })
}

/// Builtin model identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Ou2,
    Geometric2,
    SemiLogistic,
    LvFull,
    LvSimple,
    Cle,
    LinearUnobs(u32),
}

impl Builtin {
    pub const FIXED: [Builtin; 6] = [
        Builtin::Ou2,
        Builtin::Geometric2,
        Builtin::SemiLogistic,
        Builtin::LvFull,
        Builtin::LvSimple,
        Builtin::Cle,
    ];

    pub fn parse(id: &str) -> Result<Self, DslError> {
        let id = id.trim();
        let b = match id {
            "ou2" => Builtin::Ou2,
            "geometric2" => Builtin::Geometric2,
            "semilogistic" => Builtin::SemiLogistic,
            "lv_full" => Builtin::LvFull,
            "lv_simple" => Builtin::LvSimple,
            "cle" => Builtin::Cle,
            _ => {
                let n = id
                    .strip_prefix("linear_unobs(")
                    .and_then(|s| s.strip_suffix(')'))
                    .or_else(|| id.strip_prefix("linear_unobs:"))
                    .and_then(|s| s.trim().parse::<u32>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| DslError::UnknownBuiltin(id.to_string()))?;
                Builtin::LinearUnobs(n)
            }
        };
        Ok(b)
    }

    pub fn id(&self) -> String {
        match self {
            Builtin::Ou2 => "ou2".into(),
            Builtin::Geometric2 => "geometric2".into(),
            Builtin::SemiLogistic => "semilogistic".into(),
            Builtin::LvFull => "lv_full".into(),
            Builtin::LvSimple => "lv_simple".into(),
            Builtin::Cle => "cle".into(),
            Builtin::LinearUnobs(n) => format!("linear_unobs({n})"),
        }
    }

    /// Model text in the DSL grammar.
    pub fn source(&self) -> String {
        match self {
            Builtin::Ou2 => "\
model ou2
states: x observed, y
params: a b c d e f p r s
drift:
  x: -a*(x - e) - b*(y - f)
  y: -c*(x - e) - d*(y - f)
diffusion:
  x: [p, 0]
  y: [r, s]
"
            .into(),
            Builtin::Geometric2 => "\
model geometric2
states: x observed, y
params: a b c d e f p r s
drift:
  x: -a*(x - e) - b*(y - f)
  y: -c*(x - e) - d*(y - f)
# noise magnitude scales with the state: diag(x, y) * S
diffusion:
  x: [p*x, 0]
  y: [r*y, s*y]
"
            .into(),
            Builtin::SemiLogistic => "\
model semilogistic
states: x observed, y
params: a b c d e f p r s
drift:
  x: a*x*(1 - b*x) + c*y
  y: d*x*(1 - e*x) + f*y
diffusion:
  x: [p, 0]
  y: [r, s]
"
            .into(),
            Builtin::LvFull => "\
model lv_full
states: x observed, y
params: a b c d p s
drift:
  x: a*x + b*x*y
  y: c*y + d*x*y
diffusion:
  x: [p, 0]
  y: [0, s]
"
            .into(),
            Builtin::LvSimple => "\
model lv_simple
states: x observed, y
params: a b c d p s
drift:
  x: a*x + b*y
  y: c*y + d*x*y
diffusion:
  x: [p, 0]
  y: [0, s]
"
            .into(),
            Builtin::Cle => "\
model cle
states: x observed, y
params: alpha beta gamma delta epsilon zeta
drift:
  x: -x*(2*alpha*x + zeta) + 2*beta*y + epsilon
  y: alpha*x^2 - (beta + delta)*y + gamma
# G = g g^T of the six-channel Langevin diffusion
diffusion_sq:
  x x: 4*alpha*x^2 + 4*beta*y + epsilon + zeta*x^2
  x y: -2*alpha*x^2 - 2*beta*y
  y y: alpha*x^2 + beta*y + gamma + delta*y
"
            .into(),
            Builtin::LinearUnobs(n) => {
                let n = *n;
                let cs: Vec<String> = (0..=n).map(|k| format!("c{k}")).collect();
                let ds: Vec<String> = (0..=n).map(|k| format!("d{k}")).collect();
                let series = |coef: &[String]| -> String {
                    coef.iter()
                        .enumerate()
                        .map(|(k, c)| match k {
                            0 => c.clone(),
                            1 => format!("{c}*x"),
                            _ => format!("{c}*x^{k}"),
                        })
                        .collect::<Vec<_>>()
                        .join(" + ")
                };
                format!(
                    "model linear_unobs_{n}\nstates: x observed, y\nparams: {} a {} b p r s\ndrift:\n  x: {} + a*y\n  y: {} + b*y\ndiffusion:\n  x: [p, 0]\n  y: [r, s]\n",
                    cs.join(" "),
                    ds.join(" "),
                    series(&cs),
                    series(&ds)
                )
            }
        }
    }

    pub fn model(&self) -> ModelSpec {
        parse_model(&self.source()).expect("builtin models parse")
    }
}

/// Look up a builtin model by id (`ou2`, `cle`, `linear_unobs(2)`, ...).
pub fn builtin_model(id: &str) -> Result<ModelSpec, DslError> {
    Ok(Builtin::parse(id)?.model())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(m: &ModelSpec, s: &str) -> Poly {
        parse_expr(s, m.symbols()).unwrap()
    }

    #[test]
    fn ou2_matches_factorised_form() {
        let m = builtin_model("ou2").unwrap();
        assert_eq!(m.states[0], StateVar { name: "x".into(), observed: true });
        assert!(!m.states[1].observed);
        assert_eq!(m.drift[0], poly(&m, "a*e + b*f - a*x - b*y"));
        assert_eq!(m.drift[1], poly(&m, "c*e + d*f - c*x - d*y"));
        let g = m.noise_covariance();
        assert_eq!(g[0][0], poly(&m, "p^2"));
        assert_eq!(g[0][1], poly(&m, "p*r"));
        assert_eq!(g[1][1], poly(&m, "r^2 + s^2"));
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn geometric_noise_scales_with_state() {
        let m = builtin_model("geometric2").unwrap();
        let g = m.noise_covariance();
        assert_eq!(g[0][0], poly(&m, "p^2*x^2"));
        assert_eq!(g[0][1], poly(&m, "p*r*x*y"));
        assert_eq!(g[1][1], poly(&m, "(r^2 + s^2)*y^2"));
    }

    #[test]
    fn lv_simple_drift() {
        let m = builtin_model("lv_simple").unwrap();
        assert_eq!(m.drift[0], poly(&m, "a*x + b*y"));
        assert_eq!(m.drift[1], poly(&m, "c*y + d*x*y"));
    }

    #[test]
    fn linear_unobs_family() {
        let m = builtin_model("linear_unobs(2)").unwrap();
        assert_eq!(
            m.params,
            ["c0", "c1", "c2", "a", "d0", "d1", "d2", "b", "p", "r", "s"]
        );
        assert_eq!(m.drift[0], poly(&m, "c0 + c1*x + c2*x^2 + a*y"));
        assert_eq!(m.drift[1], poly(&m, "d0 + d1*x + d2*x^2 + b*y"));
        assert!(matches!(builtin_model("linear_unobs(0)"), Err(DslError::UnknownBuiltin(_))));
    }

    #[test]
    fn cle_covariance_matches_langevin_diffusion() {
        // g has six channels; sqrt terms only enter through g g^T
        let m = builtin_model("cle").unwrap();
        let g = m.noise_covariance();
        assert_eq!(g[0][0], poly(&m, "4*alpha*x^2 + 4*beta*y + epsilon + zeta*x^2"));
        assert_eq!(g[1][0], poly(&m, "-2*alpha*x^2 - 2*beta*y"));
        assert_eq!(g[1][1], poly(&m, "alpha*x^2 + beta*y + gamma + delta*y"));
    }

    #[test]
    fn builtins_round_trip_through_render() {
        let mut all: Vec<Builtin> = Builtin::FIXED.to_vec();
        all.extend((1..=3).map(Builtin::LinearUnobs));
        for b in all {
            let m = b.model();
            let again = parse_model(&m.render()).unwrap();
            assert_eq!(m, again, "{}", b.id());
        }
    }

    #[test]
    fn non_polynomial_drift_rejected() {
        let src = "model bad\nstates: x observed, y\nparams: a\ndrift:\n  x: sin(x)\n  y: a*y\ndiffusion:\n  x: [1]\n  y: [1]\n";
        match parse_model(src) {
            Err(DslError::NonPolynomial { line: 5, col, .. }) => assert_eq!(col, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_symbols_are_errors() {
        let src = "model bad\nstates: x observed, y\nparams: a\ndrift:\n  x: a*x + bb\n  y: a*y\ndiffusion:\n  x: [1]\n  y: [1]\n";
        assert!(matches!(
            parse_model(src),
            Err(DslError::UnknownSymbol { line: 5, ref name, .. }) if name == "bb"
        ));
    }

    #[test]
    fn duplicate_state_and_clash() {
        let dup = "model m\nstates: x observed, x\nparams: a\n";
        assert!(matches!(parse_model(dup), Err(DslError::DuplicateState { line: 2, .. })));
        let clash = "model m\nstates: x observed, y\nparams: a x\n";
        assert!(matches!(parse_model(clash), Err(DslError::StateParamClash { line: 3, .. })));
    }

    #[test]
    fn exactly_one_noise_block() {
        let both = "model m\nstates: x observed, y\nparams: a\ndrift:\n  x: a\n  y: a\ndiffusion:\n  x: [1]\n  y: [1]\ndiffusion_sq:\n  x x: 1\n";
        assert!(matches!(parse_model(both), Err(DslError::Incomplete(_))));
        let none = "model m\nstates: x observed, y\nparams: a\ndrift:\n  x: a\n  y: a\n";
        assert!(matches!(parse_model(none), Err(DslError::Incomplete(_))));
    }

    #[test]
    fn observed_count_is_a_warning_not_an_error() {
        let src = "model ou3\nstates: x1 observed, x2 observed, x3\nparams: a\ndrift:\n  x1: -a*x1\n  x2: -a*x2\n  x3: -a*x3\ndiffusion:\n  x1: [1, 0, 0]\n  x2: [0, 1, 0]\n  x3: [0, 0, 1]\n";
        let m = parse_model(src).unwrap();
        assert_eq!(m.warnings.len(), 1);
        assert!(m.require_elimination_shape().is_err());
    }

    #[test]
    fn comments_and_sq_symmetry() {
        let src = "# header\nmodel m  # trailing\nstates: x observed, y\nparams: k\ndrift:\n  x: -k*x\n  y: -k*y\ndiffusion_sq:\n  y x: k*x\n  x x: 1\n  y y: 1\n";
        let m = parse_model(src).unwrap();
        let g = m.noise_covariance();
        assert_eq!(g[0][1], g[1][0]);
        assert_eq!(g[0][1], poly(&m, "k*x"));
    }
}
