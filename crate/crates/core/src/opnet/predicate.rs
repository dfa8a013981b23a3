//! Condition language for events.
//!
//! ```text
//! expr    := and ("||" and)*
//! and     := unary ("&&" unary)*
//! unary   := "!" unary | "(" expr ")" | compare
//! compare := operand (("==" | "!=" | "<" | "<=" | ">" | ">=") operand)?
//! operand := ["src." | "dst."] ident | number | "string" | true | false
//! ```
//!
//! Bare identifiers read the source agent's knowledge. A comparison with an
//! unknown variable is false; `!=` between values of different kinds is
//! true. A lone operand is true when it is a known, truthy value. The
//! reserved name `tasked` reads whether the agent has been tasked.

use std::cmp::Ordering;
use std::fmt;

use super::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Src,
    Dst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Var(Scope, String),
    Lit(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Or(Vec<Expr>),
    And(Vec<Expr>),
    Not(Box<Expr>),
    Cmp(Operand, CmpOp, Operand),
    Truthy(Operand),
}

/// Predicate syntax error at a 1-based character column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.col, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(Scope, String),
    Num(f64),
    Str(String),
    Bool(bool),
    Op(CmpOp),
    And,
    Or,
    Not,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: &str| SyntaxError { col: col + 1, msg: msg.into() };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let two = |s: &str| chars[i..].iter().take(2).collect::<String>() == s;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if two("&&") {
            i += 2;
            Tok::And
        } else if two("||") {
            i += 2;
            Tok::Or
        } else if two("==") {
            i += 2;
            Tok::Op(CmpOp::Eq)
        } else if two("!=") {
            i += 2;
            Tok::Op(CmpOp::Ne)
        } else if two("<=") {
            i += 2;
            Tok::Op(CmpOp::Le)
        } else if two(">=") {
            i += 2;
            Tok::Op(CmpOp::Ge)
        } else if c == '<' {
            i += 1;
            Tok::Op(CmpOp::Lt)
        } else if c == '>' {
            i += 1;
            Tok::Op(CmpOp::Gt)
        } else if c == '!' {
            i += 1;
            Tok::Not
        } else if c == '(' {
            i += 1;
            Tok::LParen
        } else if c == ')' {
            i += 1;
            Tok::RParen
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(start, "unterminated string")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if matches!(chars.get(i + 1), Some('"') | Some('\\')) => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.'))
            || c == '.'
        {
            i += 1;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '.'
                    || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            Tok::Num(text.parse().map_err(|_| err(start, &format!("invalid number `{text}`")))?)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            match text.as_str() {
                "true" => Tok::Bool(true),
                "false" => Tok::Bool(false),
                _ => {
                    let (scope, name) = match text.split_once('.') {
                        Some(("src", n)) => (Scope::Src, n),
                        Some(("dst", n)) => (Scope::Dst, n),
                        Some(_) => return Err(err(start, &format!("unknown scope in `{text}`; use src. or dst."))),
                        None => (Scope::Src, text.as_str()),
                    };
                    if name.is_empty()
                        || name.contains('.')
                        || !name.starts_with(|c: char| c.is_alphabetic() || c == '_')
                    {
                        return Err(err(start, &format!("invalid identifier `{text}`")));
                    }
                    Tok::Ident(scope, name.to_string())
                }
            }
        } else {
            return Err(err(start, &format!("unexpected character `{c}`")));
        };
        out.push((tok, start + 1));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, c)| *c)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError { col: self.col(), msg: msg.into() })
    }

    fn or(&mut self) -> Result<Expr, SyntaxError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn and(&mut self) -> Result<Expr, SyntaxError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            _ => self.compare(),
        }
    }

    fn operand(&mut self) -> Result<Operand, SyntaxError> {
        let op = match self.peek() {
            Some(Tok::Ident(s, n)) => Operand::Var(*s, n.clone()),
            Some(Tok::Num(x)) => Operand::Lit(Value::Num(*x)),
            Some(Tok::Str(s)) => Operand::Lit(Value::Str(s.clone())),
            Some(Tok::Bool(b)) => Operand::Lit(Value::Bool(*b)),
            Some(_) => return self.fail("expected a variable or literal"),
            None => return self.fail("unexpected end of expression"),
        };
        self.pos += 1;
        Ok(op)
    }

    fn compare(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.operand()?;
        if let Some(Tok::Op(op)) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.operand()?;
            return Ok(Expr::Cmp(lhs, op, rhs));
        }
        Ok(Expr::Truthy(lhs))
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, end: src.chars().count() + 1 };
        let e = p.or()?;
        if p.pos < p.toks.len() {
            return p.fail("unexpected token after expression");
        }
        Ok(e)
    }

    /// Evaluates with `lookup(scope, name)` resolving variables.
    pub fn eval<F>(&self, lookup: &F) -> bool
    where
        F: Fn(Scope, &str) -> Option<Value>,
    {
        let resolve = |o: &Operand| match o {
            Operand::Var(s, n) => lookup(*s, n),
            Operand::Lit(v) => Some(v.clone()),
        };
        match self {
            Expr::Or(items) => items.iter().any(|e| e.eval(lookup)),
            Expr::And(items) => items.iter().all(|e| e.eval(lookup)),
            Expr::Not(e) => !e.eval(lookup),
            Expr::Truthy(o) => resolve(o).is_some_and(|v| v.truthy()),
            Expr::Cmp(a, op, b) => match (resolve(a), resolve(b)) {
                (Some(x), Some(y)) => compare(&x, *op, &y),
                _ => false,
            },
        }
    }

    /// Variables the expression reads.
    pub fn variables(&self) -> Vec<(Scope, &str)> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<(Scope, &'a str)>) {
        let mut op = |o: &'a Operand| {
            if let Operand::Var(s, n) = o {
                out.push((*s, n.as_str()));
            }
        };
        match self {
            Expr::Or(v) | Expr::And(v) => v.iter().for_each(|e| e.collect(out)),
            Expr::Not(e) => e.collect(out),
            Expr::Truthy(o) => op(o),
            Expr::Cmp(a, _, b) => {
                op(a);
                op(b);
            }
        }
    }
}

fn compare(x: &Value, op: CmpOp, y: &Value) -> bool {
    let ord = match (x, y) {
        (Value::Num(a), Value::Num(b)) => a.partial_cmp(b),
        (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
        (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
        _ => None,
    };
    match (op, ord) {
        (CmpOp::Eq, o) => o == Some(Ordering::Equal),
        (CmpOp::Ne, o) => o != Some(Ordering::Equal),
        (_, None) => false,
        (CmpOp::Lt, Some(o)) => o == Ordering::Less,
        (CmpOp::Le, Some(o)) => o != Ordering::Greater,
        (CmpOp::Gt, Some(o)) => o == Ordering::Greater,
        (CmpOp::Ge, Some(o)) => o != Ordering::Less,
    }
}
