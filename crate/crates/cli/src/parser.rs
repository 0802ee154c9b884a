//! Expression parser and pretty printer.
//!
//! Grammar (whitespace insensitive; juxtaposition multiplies):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' factor) | ('/' nat) | factor)*
//! factor := atom ('^' nat)?
//! atom   := nat | 'i' | 'lam' | ident | '(' expr ')' | '[' rows ']'
//! rows   := row (';' row)*
//! row    := expr (',' expr)*
//! ```
//!
//! `nat '/' nat` is the rational literal; division is only defined by
//! integer literals. Evaluation lowers an expression to a truncated
//! series of polynomials (or a matrix of them) over a workspace's
//! variables.

use std::collections::BTreeMap;
use std::fmt;

use fdq_core::scalar::{int, s_real, Rational};
use fdq_core::series::{FormalSeries, MatrixSeries, PolySeries};
use fdq_core::{Matrix, Polynomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Nat(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.pos.line, self.pos.col, self.message
        )
    }
}

fn lex(text: &str) -> Result<Vec<(Token, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Token::Nat(s), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Token::Ident(s), pos));
            }
            _ => {
                let tok = match c {
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '*' => Token::Star,
                    '/' => Token::Slash,
                    '^' => Token::Caret,
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    ',' => Token::Comma,
                    ';' => Token::Semi,
                    other => {
                        return Err(SyntaxError {
                            pos,
                            message: format!("unexpected character '{other}'"),
                        })
                    }
                };
                chars.next();
                col += 1;
                out.push((tok, pos));
            }
        }
    }
    Ok(out)
}

/// Abstract syntax of workspace expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Nat(String),
    ImaginaryUnit,
    Lambda,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Division by a positive integer literal.
    Div(Box<Expr>, String),
    Pow(Box<Expr>, u32),
    Matrix(Vec<Vec<Expr>>),
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.tokens.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(SyntaxError { pos: self.pos(), message: format!("expected {what}") })
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Nat(_)) | Some(Token::Ident(_)) | Some(Token::LParen) | Some(Token::LBracket)
        )
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let negated = if self.peek() == Some(&Token::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negated {
            acc = Expr::Neg(Box::new(acc));
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.at += 1;
                    let rhs = self.term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.at += 1;
                    let rhs = self.term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.at += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.at += 1;
                    let n = self.nat("a positive integer after '/'")?;
                    acc = Expr::Div(Box::new(acc), n);
                }
                // juxtaposition
                _ if self.starts_atom() => {
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn nat(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Token::Nat(_)) => {
                let Some(Token::Nat(s)) = self.bump() else { unreachable!() };
                Ok(s)
            }
            _ => Err(SyntaxError { pos: self.pos(), message: format!("expected {what}") }),
        }
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.at += 1;
            let n = self.nat("a natural exponent after '^'")?;
            let value: u32 = n.parse().map_err(|_| SyntaxError {
                pos: self.pos(),
                message: "exponent too large".into(),
            })?;
            return Ok(Expr::Pow(Box::new(base), value));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Nat(s)) => Ok(Expr::Nat(s)),
            Some(Token::Ident(name)) => match name.as_str() {
                "i" => Ok(Expr::ImaginaryUnit),
                "lam" => Ok(Expr::Lambda),
                _ => Ok(Expr::Var(name)),
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Some(Token::LBracket) => {
                let mut rows = Vec::new();
                loop {
                    let mut row = vec![self.expr()?];
                    while self.peek() == Some(&Token::Comma) {
                        self.at += 1;
                        row.push(self.expr()?);
                    }
                    rows.push(row);
                    if self.peek() == Some(&Token::Semi) {
                        self.at += 1;
                        continue;
                    }
                    break;
                }
                self.expect(Token::RBracket, "']'")?;
                let width = rows[0].len();
                if rows.iter().any(|r| r.len() != width) {
                    return Err(SyntaxError { pos, message: "ragged matrix rows".into() });
                }
                Ok(Expr::Matrix(rows))
            }
            _ => Err(SyntaxError { pos, message: "expected an expression".into() }),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let tokens = lex(text)?;
    let end = tokens
        .last()
        .map(|(_, p)| Pos { line: p.line, col: p.col + 1 })
        .unwrap_or(Pos { line: 1, col: 1 });
    let mut p = Parser { tokens, at: 0, end };
    let e = p.expr()?;
    if p.at != p.tokens.len() {
        return Err(SyntaxError { pos: p.pos(), message: "trailing input".into() });
    }
    Ok(e)
}

/// Canonical printing of the syntax tree; parses back to an equal tree.
pub fn pretty(e: &Expr) -> String {
    fn needs_parens_in_mul(e: &Expr) -> bool {
        matches!(e, Expr::Add(..) | Expr::Sub(..) | Expr::Neg(..) | Expr::Div(..))
    }
    fn needs_parens_in_pow(e: &Expr) -> bool {
        !matches!(e, Expr::Nat(_) | Expr::Var(_) | Expr::ImaginaryUnit | Expr::Lambda)
    }
    match e {
        Expr::Nat(s) => s.clone(),
        Expr::ImaginaryUnit => "i".into(),
        Expr::Lambda => "lam".into(),
        Expr::Var(v) => v.clone(),
        Expr::Neg(inner) => format!("-{}", {
            let s = pretty(inner);
            if matches!(**inner, Expr::Add(..) | Expr::Sub(..)) {
                format!("({s})")
            } else {
                s
            }
        }),
        Expr::Add(a, b) => format!("{} + {}", pretty(a), pretty(b)),
        Expr::Sub(a, b) => {
            let rhs = pretty(b);
            let rhs = if matches!(**b, Expr::Add(..) | Expr::Sub(..)) {
                format!("({rhs})")
            } else {
                rhs
            };
            format!("{} - {}", pretty(a), rhs)
        }
        Expr::Mul(a, b) => {
            let lhs = pretty(a);
            let lhs = if needs_parens_in_mul(a) { format!("({lhs})") } else { lhs };
            let rhs = pretty(b);
            let rhs = if needs_parens_in_mul(b) { format!("({rhs})") } else { rhs };
            format!("{lhs}*{rhs}")
        }
        Expr::Div(a, n) => {
            let lhs = pretty(a);
            let lhs = if needs_parens_in_mul(a) { format!("({lhs})") } else { lhs };
            format!("{lhs}/{n}")
        }
        Expr::Pow(a, n) => {
            let lhs = pretty(a);
            let lhs = if needs_parens_in_pow(a) { format!("({lhs})") } else { lhs };
            format!("{lhs}^{n}")
        }
        Expr::Matrix(rows) => {
            let body = rows
                .iter()
                .map(|r| r.iter().map(pretty).collect::<Vec<_>>().join(", "))
                .collect::<Vec<_>>()
                .join("; ");
            format!("[{body}]")
        }
    }
}

/// Evaluation context: the workspace's variable layout.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub base: usize,
    pub fiber: usize,
    pub order: usize,
    pub vars: BTreeMap<String, usize>,
}

impl EvalContext {
    pub fn new(base_vars: &[String], fiber_vars: &[String], order: usize) -> Self {
        let mut vars = BTreeMap::new();
        for (i, v) in base_vars.iter().chain(fiber_vars.iter()).enumerate() {
            vars.insert(v.clone(), i);
        }
        EvalContext { base: base_vars.len(), fiber: fiber_vars.len(), order, vars }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    UnknownIdentifier(String),
    TypeMismatch(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            EvalError::TypeMismatch(msg) => write!(f, "type mismatch: {msg}"),
        }
    }
}

/// An evaluated expression: a truncated series of polynomials or a
/// matrix of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Series(PolySeries),
    Matrix(MatrixSeries),
}

impl Value {
    fn zip(
        a: Value,
        b: Value,
        f: impl Fn(&PolySeries, &PolySeries) -> PolySeries,
        what: &str,
    ) -> Result<Value, EvalError> {
        match (a, b) {
            (Value::Series(x), Value::Series(y)) => Ok(Value::Series(f(&x, &y))),
            (Value::Matrix(x), Value::Matrix(y)) => {
                let (xr, xc) = (x.coeff(0).rows(), x.coeff(0).cols());
                let (yr, yc) = (y.coeff(0).rows(), y.coeff(0).cols());
                if (xr, xc) != (yr, yc) {
                    return Err(EvalError::TypeMismatch(format!(
                        "{what} of {xr}x{xc} and {yr}x{yc} matrices"
                    )));
                }
                let mut entries = Vec::new();
                for i in 0..xr {
                    let mut row = Vec::new();
                    for j in 0..xc {
                        let xi = x.map(|m| m.get(i, j).clone());
                        let yi = y.map(|m| m.get(i, j).clone());
                        row.push(f(&xi, &yi));
                    }
                    entries.push(row);
                }
                Ok(Value::Matrix(rows_to_matrix_series(entries)))
            }
            _ => Err(EvalError::TypeMismatch(format!("{what} of a series and a matrix"))),
        }
    }
}

fn rows_to_matrix_series(entries: Vec<Vec<PolySeries>>) -> MatrixSeries {
    let order = entries[0][0].order();
    let rows = entries.len();
    let cols = entries[0].len();
    let coeffs = (0..=order)
        .map(|r| Matrix::from_fn(rows, cols, |i, j| entries[i][j].coeff(r).clone()))
        .collect();
    FormalSeries::from_coeffs(coeffs)
}

pub fn matrix_entry_series(m: &MatrixSeries, i: usize, j: usize) -> PolySeries {
    m.map(|mat| mat.get(i, j).clone())
}

pub fn eval(e: &Expr, ctx: &EvalContext) -> Result<Value, EvalError> {
    let scalar_series = |p: Polynomial| PolySeries::constant(p, ctx.order);
    match e {
        Expr::Nat(s) => {
            let n: Rational = Rational::new(s.parse().unwrap_or_else(|_| int(0)), int(1));
            Ok(Value::Series(scalar_series(Polynomial::constant(
                ctx.base,
                ctx.fiber,
                s_real(n),
            ))))
        }
        Expr::ImaginaryUnit => Ok(Value::Series(scalar_series(Polynomial::constant(
            ctx.base,
            ctx.fiber,
            fdq_core::scalar::s_i(),
        )))),
        Expr::Lambda => {
            let mut s = PolySeries::constant(Polynomial::zero(ctx.base, ctx.fiber), ctx.order);
            if ctx.order >= 1 {
                s.set_coeff(1, Polynomial::one(ctx.base, ctx.fiber));
            }
            Ok(Value::Series(s))
        }
        Expr::Var(name) => {
            let idx = ctx
                .vars
                .get(name)
                .ok_or_else(|| EvalError::UnknownIdentifier(name.clone()))?;
            Ok(Value::Series(scalar_series(Polynomial::var(ctx.base, ctx.fiber, *idx))))
        }
        Expr::Neg(inner) => match eval(inner, ctx)? {
            Value::Series(s) => Ok(Value::Series(s.neg())),
            Value::Matrix(m) => Ok(Value::Matrix(m.neg())),
        },
        Expr::Add(a, b) => Value::zip(eval(a, ctx)?, eval(b, ctx)?, |x, y| x.add(y), "sum"),
        Expr::Sub(a, b) => Value::zip(eval(a, ctx)?, eval(b, ctx)?, |x, y| x.sub(y), "difference"),
        Expr::Mul(a, b) => {
            let (va, vb) = (eval(a, ctx)?, eval(b, ctx)?);
            match (va, vb) {
                (Value::Series(x), Value::Series(y)) => Ok(Value::Series(x.mul(&y))),
                (Value::Series(x), Value::Matrix(m)) | (Value::Matrix(m), Value::Series(x)) => {
                    let rows = m.coeff(0).rows();
                    let cols = m.coeff(0).cols();
                    let mut entries = Vec::new();
                    for i in 0..rows {
                        let mut row = Vec::new();
                        for j in 0..cols {
                            row.push(matrix_entry_series(&m, i, j).mul(&x));
                        }
                        entries.push(row);
                    }
                    Ok(Value::Matrix(rows_to_matrix_series(entries)))
                }
                (Value::Matrix(x), Value::Matrix(y)) => {
                    if x.coeff(0).cols() != y.coeff(0).rows() {
                        return Err(EvalError::TypeMismatch("matrix dimension mismatch".into()));
                    }
                    Ok(Value::Matrix(x.mul(&y)))
                }
            }
        }
        Expr::Div(a, n) => {
            if n.chars().all(|c| c == '0') {
                return Err(EvalError::TypeMismatch("division by zero".into()));
            }
            let c = s_real(Rational::new(int(1), n.parse().expect("lexed digits")));
            match eval(a, ctx)? {
                Value::Series(s) => Ok(Value::Series(s.map(|p| p.scale(&c)))),
                Value::Matrix(m) => Ok(Value::Matrix(m.map(|mat| mat.map(|p| p.scale(&c))))),
            }
        }
        Expr::Pow(a, n) => match eval(a, ctx)? {
            Value::Series(s) => {
                let one = PolySeries::constant(Polynomial::one(ctx.base, ctx.fiber), ctx.order);
                let mut acc = one;
                for _ in 0..*n {
                    acc = acc.mul(&s);
                }
                Ok(Value::Series(acc))
            }
            Value::Matrix(_) => Err(EvalError::TypeMismatch("matrix powers are not defined".into())),
        },
        Expr::Matrix(rows) => {
            let mut entries = Vec::new();
            for row in rows {
                let mut out_row = Vec::new();
                for cell in row {
                    match eval(cell, ctx)? {
                        Value::Series(s) => out_row.push(s),
                        Value::Matrix(_) => {
                            return Err(EvalError::TypeMismatch("nested matrices".into()))
                        }
                    }
                }
                entries.push(out_row);
            }
            Ok(Value::Matrix(rows_to_matrix_series(entries)))
        }
    }
}

/// Parses and evaluates, requiring a series value.
pub fn eval_series(text: &str, ctx: &EvalContext) -> Result<PolySeries, String> {
    let expr = parse(text).map_err(|e| e.to_string())?;
    match eval(&expr, ctx).map_err(|e| e.to_string())? {
        Value::Series(s) => Ok(s),
        Value::Matrix(_) => Err("expected a scalar expression, found a matrix".into()),
    }
}

/// Parses and evaluates, requiring a matrix value.
pub fn eval_matrix(text: &str, ctx: &EvalContext) -> Result<MatrixSeries, String> {
    let expr = parse(text).map_err(|e| e.to_string())?;
    match eval(&expr, ctx).map_err(|e| e.to_string())? {
        Value::Matrix(m) => Ok(m),
        Value::Series(_) => Err("expected a matrix expression".into()),
    }
}

/// A polynomial series rendered with the workspace's variable names.
pub fn render_series(s: &PolySeries, ctx: &EvalContext, names: &[&str]) -> String {
    let _ = ctx;
    fdq_core::series::series_display(s, names)
}

/// Per-order canonical coefficient strings, for machine-readable reports.
pub fn series_orders(s: &PolySeries, names: &[&str]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (r, c) in s.coeffs().iter().enumerate() {
        if !c.is_zero() {
            out.insert(format!("order{r}"), c.display_with(names));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fdq_core::scalar::{s_i, s_ratio};

    fn ctx() -> EvalContext {
        EvalContext::new(&["x".into(), "y".into()], &["t".into()], 3)
    }

    #[test]
    fn parses_and_evaluates_the_reference_examples() {
        let c = ctx();
        // x*y + i/2*lam
        let s = eval_series("x*y + i/2*lam", &c).unwrap();
        let xy = Polynomial::var(2, 1, 0).mul(&Polynomial::var(2, 1, 1));
        assert_eq!(s.coeff(0), &xy);
        assert_eq!(s.coeff(1), &Polynomial::constant(2, 1, s_i() * s_ratio(1, 2)));

        // x^2*y^2
        let s = eval_series("x^2*y^2", &c).unwrap();
        assert_eq!(
            s.coeff(0),
            &Polynomial::var(2, 1, 0).pow(2).mul(&Polynomial::var(2, 1, 1).pow(2))
        );

        // juxtaposition and rational literals
        let s = eval_series("2x - 3/2 y", &c).unwrap();
        let expect = Polynomial::var(2, 1, 0)
            .scale(&fdq_core::scalar::s_int(2))
            .sub(&Polynomial::var(2, 1, 1).scale(&s_ratio(3, 2)));
        assert_eq!(s.coeff(0), &expect);
    }

    #[test]
    fn syntax_error_carries_the_position() {
        let err = parse("x +* y").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 4 });
        let err = parse("x + (y").unwrap_err();
        assert_eq!(err.pos.line, 1);
    }

    #[test]
    fn unknown_identifiers_are_reported() {
        let c = ctx();
        let err = eval_series("x + z", &c).unwrap_err();
        assert!(err.contains("unknown identifier 'z'"));
    }

    #[test]
    fn pretty_print_round_trips() {
        let cases = [
            "x*y + i/2*lam",
            "-x + 2*y - 1/3",
            "(x + y)^2*t",
            "[1 - x*y, y; x - x^2*y, x*y]",
            "lam^2*x - i*t",
            "3/4*i + x^10",
        ];
        for text in cases {
            let ast = parse(text).unwrap();
            let printed = pretty(&ast);
            let reparsed = parse(&printed).unwrap();
            assert_eq!(pretty(&reparsed), printed, "{text}");
        }
    }

    #[test]
    fn matrices_evaluate_entrywise() {
        let c = ctx();
        let m = eval_matrix("[1, x; y, x*y + lam]", &c).unwrap();
        assert_eq!(m.coeff(0).rows(), 2);
        assert_eq!(m.coeff(0).get(0, 1), &Polynomial::var(2, 1, 0));
        assert_eq!(m.coeff(1).get(1, 1), &Polynomial::one(2, 1));
        // arithmetic on matrices
        let two = eval_matrix("[1, x; y, x*y] + [1, x; y, x*y]", &c).unwrap();
        assert_eq!(
            two.coeff(0).get(0, 1),
            &Polynomial::var(2, 1, 0).scale(&fdq_core::scalar::s_int(2))
        );
    }

    #[test]
    fn rendering_matches_the_report_format() {
        let c = ctx();
        let s = eval_series("x*y + i/2*lam", &c).unwrap();
        let names = ["x", "y", "t"];
        let orders = series_orders(&s, &names);
        assert_eq!(orders["order0"], "x*y");
        assert_eq!(orders["order1"], "1/2*i");
        assert_eq!(render_series(&s, &c, &names), "x*y + 1/2*i*lam");
    }
}
