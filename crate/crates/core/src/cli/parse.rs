//! Exact expression parser and the key-value family file format.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::exactcore::{Rat, RatFunc};
use crate::weiermodel::{ModelError, Section, WeierstrassModel};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("non-rational coefficient at line {line}, column {col}: {what}")]
    NonRationalCoefficient { line: usize, col: usize, what: String },
    #[error("wrong variable at line {line}, column {col}: found `{found}`, expected `{expected}`")]
    WrongVariable { line: usize, col: usize, found: String, expected: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

const NON_RATIONAL: &[&str] = &["sqrt", "pi", "e", "i", "I", "exp", "log", "ln", "sin", "cos", "tan"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Sym(char),
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut value: Rat = if int_part.is_empty() { Rat::zero() } else { Rat::from_integer(int_part.parse().unwrap()) };
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                if !frac.is_empty() {
                    let num: num_bigint::BigInt = frac.parse().unwrap();
                    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
                    value += Rat::new(num, den);
                }
            }
            out.push(Lexed { tok: Tok::Num(value), col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Lexed { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else {
            let sym = match c {
                '+' | '-' | '*' | '/' | '^' | '(' | ')' => c,
                '\u{2212}' => '-',
                '\u{b7}' | '\u{d7}' => '*',
                _ => return Err(ParseError::Syntax { line, col, msg: format!("unexpected character `{c}`") }),
            };
            out.push(Lexed { tok: Tok::Sym(sym), col });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    var: &'a str,
    line: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn peek_sym(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Lexed { tok: Tok::Sym(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let col = self.col();
            let rhs = self.unary()?;
            if c == '*' {
                acc = acc * rhs;
            } else {
                if rhs.is_zero() {
                    return Err(ParseError::Syntax { line: self.line, col, msg: "division by zero".into() });
                }
                acc = acc * rhs.inv().unwrap();
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc, ParseError> {
        match self.peek_sym() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc, ParseError> {
        let base = self.atom()?;
        if self.peek_sym() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        let e = self.unary()?;
        let e = match e.as_constant() {
            Some(r) if r.is_integer() => r.to_integer(),
            _ => {
                return Err(ParseError::NonRationalCoefficient {
                    line: self.line,
                    col,
                    what: format!("non-integer exponent {e}"),
                })
            }
        };
        let e = e
            .to_i32()
            .filter(|e| e.abs() <= 10_000)
            .ok_or_else(|| ParseError::Syntax { line: self.line, col, msg: "exponent out of range".into() })?;
        if base.is_zero() && e.is_negative() {
            return Err(ParseError::Syntax { line: self.line, col, msg: "division by zero".into() });
        }
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<RatFunc, ParseError> {
        let Some(t) = self.toks.get(self.pos) else {
            return Err(self.err("unexpected end of expression"));
        };
        let col = t.col;
        match t.tok.clone() {
            Tok::Num(r) => {
                self.pos += 1;
                Ok(RatFunc::constant(r))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if name == self.var {
                    Ok(RatFunc::var())
                } else if NON_RATIONAL.contains(&name.as_str()) {
                    Err(ParseError::NonRationalCoefficient { line: self.line, col, what: name })
                } else {
                    Err(ParseError::WrongVariable { line: self.line, col, found: name, expected: self.var.to_string() })
                }
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek_sym() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Sym(c) => Err(ParseError::Syntax { line: self.line, col, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Parses `src` as a rational function of `var`; `line`/`col` locate `src` in its file (1-based).
pub fn parse_expr_at(src: &str, var: &str, line: usize, col: usize) -> Result<RatFunc, ParseError> {
    let toks = lex(src, line, col)?;
    let mut p = Parser { toks, pos: 0, var, line, end_col: col + src.chars().count() };
    let v = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.err("expected operator or end of expression"));
    }
    Ok(v)
}

pub fn parse_expr(src: &str, var: &str) -> Result<RatFunc, ParseError> {
    parse_expr_at(src, var, 1, 1)
}

/// A parsed family file.
///
/// Format: one `key = value` per statement, statements separated by newlines or `;`,
/// `#` starts a comment. Keys: `name`, `variable` (default `t`), `a1`, `a2`, `a3`, `a4`, `a6`
/// (default `0`), and repeatable `section = (X, Y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub variable: String,
    /// Source text of `a1, a2, a3, a4, a6`.
    pub coefficients: [String; 5],
    pub section_text: Vec<(String, String)>,
    pub model: WeierstrassModel,
    pub sections: Vec<Section>,
}

const KEYS: [&str; 5] = ["a1", "a2", "a3", "a4", "a6"];

struct Stmt {
    key: String,
    value: String,
    line: usize,
    col: usize,
}

fn statements(text: &str) -> Result<Vec<Stmt>, ParseError> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let content = raw.split('#').next().unwrap();
        let mut offset = 0;
        for part in content.split(';') {
            let start = offset;
            offset += part.chars().count() + 1;
            if part.trim().is_empty() {
                continue;
            }
            let Some(eq) = part.find('=') else {
                let col = start + part.chars().take_while(|c| c.is_whitespace()).count() + 1;
                return Err(ParseError::Syntax { line, col, msg: "expected `key = value`".into() });
            };
            let key = part[..eq].trim().to_string();
            let vraw = &part[eq + 1..];
            let lead = vraw.chars().take_while(|c| c.is_whitespace()).count();
            let col = start + part[..eq].chars().count() + 1 + lead + 1;
            out.push(Stmt { key, value: vraw.trim().to_string(), line, col });
        }
    }
    Ok(out)
}

fn split_pair(s: &Stmt) -> Result<((String, usize), (String, usize)), ParseError> {
    let v = s.value.as_str();
    let (inner, off) = match (v.starts_with('('), v.ends_with(')')) {
        (true, true) if balanced_outer(v) => (&v[1..v.len() - 1], 1),
        _ => (v, 0),
    };
    let mut depth = 0i32;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                let x = &inner[..i];
                let y = &inner[i + 1..];
                let xl = x.chars().take_while(|c| c.is_whitespace()).count();
                let yl = y.chars().take_while(|c| c.is_whitespace()).count();
                let xcol = s.col + off + xl;
                let ycol = s.col + off + inner[..i + 1].chars().count() + yl;
                return Ok(((x.trim().to_string(), xcol), (y.trim().to_string(), ycol)));
            }
            _ => {}
        }
    }
    Err(ParseError::Syntax { line: s.line, col: s.col, msg: "section must be `(X, Y)`".into() })
}

fn balanced_outer(v: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in v.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && i + c.len_utf8() < v.len() {
            return false;
        }
    }
    true
}

fn valid_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
        && !NON_RATIONAL.contains(&s)
}

pub fn parse_family(text: &str) -> Result<FamilySpec, ParseError> {
    let stmts = statements(text)?;
    let mut name = None;
    let mut variable: Option<(String, usize, usize)> = None;
    let mut coeffs: [Option<&Stmt>; 5] = [None; 5];
    let mut section_stmts = Vec::new();
    for s in &stmts {
        let dup = || ParseError::Syntax { line: s.line, col: s.col, msg: format!("duplicate key `{}`", s.key) };
        match s.key.as_str() {
            "name" => {
                if name.replace(s.value.clone()).is_some() {
                    return Err(dup());
                }
            }
            "variable" => {
                if !valid_identifier(&s.value) {
                    return Err(ParseError::Syntax { line: s.line, col: s.col, msg: format!("invalid variable name `{}`", s.value) });
                }
                if variable.replace((s.value.clone(), s.line, s.col)).is_some() {
                    return Err(dup());
                }
            }
            "section" => section_stmts.push(s),
            k => match KEYS.iter().position(|x| *x == k) {
                Some(i) => {
                    if coeffs[i].replace(s).is_some() {
                        return Err(dup());
                    }
                }
                None => {
                    return Err(ParseError::Syntax { line: s.line, col: s.col.saturating_sub(k.len() + 3).max(1), msg: format!("unknown key `{k}`") })
                }
            },
        }
    }
    let var = variable.map(|v| v.0).unwrap_or_else(|| "t".to_string());
    let mut texts: [String; 5] = Default::default();
    let mut values: Vec<RatFunc> = Vec::new();
    for i in 0..5 {
        match coeffs[i] {
            Some(s) => {
                if s.value.is_empty() {
                    return Err(ParseError::Syntax { line: s.line, col: s.col, msg: "empty expression".into() });
                }
                values.push(parse_expr_at(&s.value, &var, s.line, s.col)?);
                texts[i] = s.value.clone();
            }
            None => {
                values.push(RatFunc::zero());
                texts[i] = "0".to_string();
            }
        }
    }
    let mut it = values.into_iter();
    let model = WeierstrassModel::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let mut sections = Vec::new();
    let mut section_text = Vec::new();
    for s in section_stmts {
        let ((xs, xc), (ys, yc)) = split_pair(s)?;
        let x = parse_expr_at(&xs, &var, s.line, xc)?;
        let y = parse_expr_at(&ys, &var, s.line, yc)?;
        model.check_point(&x, &y)?;
        sections.push(Section::new(x, y));
        section_text.push((xs, ys));
    }
    Ok(FamilySpec {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        variable: var,
        coefficients: texts,
        section_text,
        model,
        sections,
    })
}

impl FamilySpec {
    /// Canonical family-file text with coefficients rendered from the parsed values.
    pub fn render(&self) -> String {
        let v = self.variable.as_str();
        let mut out = format!("name = {}\nvariable = {v}\n", self.name);
        for (k, c) in KEYS.iter().zip(self.model.coefficients()) {
            if !c.is_zero() {
                out.push_str(&format!("{k} = {}\n", c.display_with(v)));
            }
        }
        for s in &self.sections {
            out.push_str(&format!("section = ({}, {})\n", s.x.display_with(v), s.y.display_with(v)));
        }
        out
    }
}

/// Whether a rendered expression parses back to `f`.
pub fn round_trips(f: &RatFunc, var: &str) -> bool {
    parse_expr(&f.display_with(var), var).is_ok_and(|g| &g == f)
}
