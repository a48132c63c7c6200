//! Recursive-descent parser for the piecewise function DSL.
//!
//! ```text
//! dim 1;
//! box -2 2;
//! convex;
//! piece x <= 0 : 0;
//! piece x > 0 : x^2;
//! ```
//!
//! Statements end with `;` or a newline; `#` starts a comment.

use super::ast::*;
use super::{FunctionSpec, Piece};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(&'static str),
    End, // ';' or newline
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 17] = [
    "<=", ">=", "==", "<", ">", "+", "-", "*", "/", "^", "(", ")", ",", ":", "!", "&", "|",
];

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == ';' {
                out.push(Token { tok: Tok::End, line: line_no, column });
                i += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| Error::Syntax {
                    line: line_no,
                    column,
                    message: format!("bad number {:?}", text),
                })?;
                out.push(Token { tok: Tok::Num(v), line: line_no, column });
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(text), line: line_no, column });
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line: line_no, column });
                    i += s.len();
                }
                None => {
                    return Err(Error::Syntax {
                        line: line_no,
                        column,
                        message: format!("unexpected character {:?}", c),
                    })
                }
            }
        }
        out.push(Token {
            tok: Tok::End,
            line: line_no,
            column: chars.len() + 1,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dim: Option<usize>,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.column))
            .unwrap_or(self.eof)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", s))
        }
    }

    fn eat_ident(&mut self, name: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(t)) if t == name) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_ends(&mut self) {
        while matches!(self.peek(), Some(Tok::End)) {
            self.pos += 1;
        }
    }

    fn end_statement(&mut self) -> Result<()> {
        match self.peek() {
            None | Some(Tok::End) => {
                self.skip_ends();
                Ok(())
            }
            _ => self.err("expected end of statement"),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let neg = self.eat_sym("-");
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            Some(Tok::Ident(ref s)) if s == "inf" => {
                self.pos += 1;
                Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            _ => self.err("expected a number"),
        }
    }

    fn parse_spec(&mut self) -> Result<FunctionSpec> {
        self.skip_ends();
        if !self.eat_ident("dim") {
            return self.err("expected 'dim <n>' as the first statement");
        }
        let d = self.number()?;
        if !(d == 1.0 || d == 2.0 || d == 3.0) {
            return self.err("dim must be 1, 2 or 3");
        }
        let dim = d as usize;
        self.dim = Some(dim);
        self.end_statement()?;

        let mut pieces = Vec::new();
        let mut bbox = None;
        let mut convex = false;
        let mut lipschitz = None;
        while self.peek().is_some() {
            let (line, column) = self.here();
            if self.eat_ident("piece") {
                let region = self.pred()?;
                self.expect_sym(":")?;
                let formula = self.expr()?;
                for (what, v) in [("region", region.max_var()), ("formula", formula.max_var())] {
                    if let Some(i) = v {
                        if i >= dim {
                            return Err(Error::DimensionMismatch {
                                declared: dim,
                                found: format!("{} at line {} uses x{}", what, line, i + 1),
                            });
                        }
                    }
                }
                if region.has_special() && dim != 1 {
                    return Err(Error::DimensionMismatch {
                        declared: dim,
                        found: format!("special sets are one-dimensional (line {})", line),
                    });
                }
                pieces.push(Piece { region, formula });
            } else if self.eat_ident("convex") {
                convex = true;
            } else if self.eat_ident("lipschitz") {
                let l = self.number()?;
                if !(l.is_finite() && l >= 0.0) {
                    return self.err("lipschitz constant must be finite and non-negative");
                }
                lipschitz = Some(l);
            } else if self.eat_ident("box") {
                let mut nums = Vec::new();
                while !matches!(self.peek(), None | Some(Tok::End)) {
                    nums.push(self.number()?);
                }
                let pairs: Vec<(f64, f64)> = nums.chunks(2).map(|c| (c[0], *c.get(1).unwrap_or(&f64::NAN))).collect();
                let b = match pairs.len() {
                    _ if nums.len() % 2 != 0 => return self.err("box needs lo/hi pairs"),
                    1 => vec![pairs[0]; dim],
                    n if n == dim => pairs,
                    n => {
                        return Err(Error::DimensionMismatch {
                            declared: dim,
                            found: format!("box with {} intervals at line {}", n, line),
                        })
                    }
                };
                if b.iter().any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: "box intervals must be finite with lo < hi".into(),
                    });
                }
                bbox = Some(b);
            } else if self.eat_ident("dim") {
                return Err(Error::DimensionMismatch {
                    declared: dim,
                    found: format!("second dim statement at line {}", line),
                });
            } else {
                return self.err("expected 'piece', 'box', 'convex' or 'lipschitz'");
            }
            self.end_statement()?;
        }
        if pieces.is_empty() {
            return Err(Error::EmptyPieces);
        }
        Ok(FunctionSpec {
            dim,
            pieces,
            bbox: bbox.unwrap_or_else(|| vec![(-10.0, 10.0); dim]),
            convex,
            lipschitz,
        })
    }

    // pred := and ('or' and)*
    fn pred(&mut self) -> Result<Pred> {
        let mut p = self.pred_and()?;
        while self.eat_ident("or") || self.eat_sym("|") {
            let q = self.pred_and()?;
            p = Pred::Or(Box::new(p), Box::new(q));
        }
        Ok(p)
    }

    fn pred_and(&mut self) -> Result<Pred> {
        let mut p = self.pred_not()?;
        while self.eat_ident("and") || self.eat_sym("&") {
            let q = self.pred_not()?;
            p = Pred::And(Box::new(p), Box::new(q));
        }
        Ok(p)
    }

    fn pred_not(&mut self) -> Result<Pred> {
        if self.eat_ident("not") || self.eat_sym("!") {
            return Ok(Pred::Not(Box::new(self.pred_not()?)));
        }
        self.pred_atom()
    }

    fn pred_atom(&mut self) -> Result<Pred> {
        if self.eat_ident("true") {
            return Ok(Pred::Const(true));
        }
        if self.eat_ident("false") {
            return Ok(Pred::Const(false));
        }
        if self.eat_ident("special") {
            if !self.eat_ident("recip_integers") {
                return self.err("unknown special set (expected recip_integers)");
            }
            self.expect_sym("(")?;
            let n = self.number()?;
            self.expect_sym(")")?;
            if !(n >= 1.0 && n.fract() == 0.0 && n <= SPECIAL_MAX_N as f64) {
                return self.err(format!("recip_integers bound must be an integer in [1, {}]", SPECIAL_MAX_N));
            }
            return Ok(Pred::Special(SpecialSet::RecipIntegers { max_n: n as u64 }));
        }
        // A parenthesis may open either a predicate or an arithmetic
        // sub-expression; try the predicate reading first.
        if matches!(self.peek(), Some(Tok::Sym("("))) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(p) = self.pred() {
                if self.eat_sym(")") && !self.at_expr_continuation() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Sym("==")) => CmpOp::Eq,
            _ => return self.err("expected a comparison operator"),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Pred::Cmp(op, lhs, rhs))
    }

    fn at_expr_continuation(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Sym("+" | "-" | "*" | "/" | "^" | "<" | "<=" | ">" | ">=" | "=="))
        )
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(e);
            };
            let r = self.term()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(e);
            };
            let r = self.unary()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // right-associative, binds tighter than unary minus: -x^2 = -(x^2)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let dim = self.dim.unwrap_or(1);
                let func = match name.as_str() {
                    "abs" => Some(Func::Abs),
                    "sqrt" => Some(Func::Sqrt),
                    "min" => Some(Func::Min),
                    "max" => Some(Func::Max),
                    _ => None,
                };
                if let Some(func) = func {
                    self.pos += 1;
                    self.expect_sym("(")?;
                    let mut args = vec![self.expr()?];
                    while self.eat_sym(",") {
                        args.push(self.expr()?);
                    }
                    self.expect_sym(")")?;
                    let ok = match func {
                        Func::Abs | Func::Sqrt => args.len() == 1,
                        Func::Min | Func::Max => args.len() >= 2,
                    };
                    if !ok {
                        return self.err(format!("wrong number of arguments to {}", name));
                    }
                    return Ok(Expr::Call(func, args));
                }
                if name == "inf" {
                    self.pos += 1;
                    return Ok(Expr::Inf);
                }
                if name == "x" {
                    if dim != 1 {
                        return Err(Error::DimensionMismatch {
                            declared: dim,
                            found: "variable 'x' (use x1..x3)".into(),
                        });
                    }
                    self.pos += 1;
                    return Ok(Expr::Var(0));
                }
                if let Some(i) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if (1..=3).contains(&i) {
                        self.pos += 1;
                        return Ok(Expr::Var(i - 1));
                    }
                }
                self.err(format!("unknown identifier {:?}", name))
            }
            _ => self.err("expected an expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<FunctionSpec> {
    let toks = tokenize(src)?;
    let eof = toks.last().map(|t| (t.line, t.column)).unwrap_or((1, 1));
    Parser {
        toks,
        pos: 0,
        dim: None,
        eof,
    }
    .parse_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_up() {
        let f = parse("dim 1; piece x <= 0 : 0; piece x > 0 : 1").unwrap();
        assert_eq!(f.dim, 1);
        assert_eq!(f.pieces.len(), 2);
        assert_eq!(f.bbox, vec![(-10.0, 10.0)]);
    }

    #[test]
    fn precedence() {
        let f = parse("dim 1; piece true : -x^2 + 2*3").unwrap();
        assert_eq!(f.pieces[0].formula.eval(&[3.0]), -3.0);
        let g = parse("dim 1; piece true : 2^3^2").unwrap();
        assert_eq!(g.pieces[0].formula.eval(&[0.0]), 512.0);
        let h = parse("dim 1; piece true : 1 - 2 - 3").unwrap();
        assert_eq!(h.pieces[0].formula.eval(&[0.0]), -4.0);
    }

    #[test]
    fn parenthesised_predicates_and_expressions() {
        let f = parse("dim 1; piece (x + 1) > 0 and (x < 2 or not (x == 5)) : 1").unwrap();
        assert!(f.pieces[0].region.eval(&[0.0]));
        assert!(!f.pieces[0].region.eval(&[-2.0]));
    }

    #[test]
    fn flags_and_box() {
        let f = parse("dim 2\nbox -1 1 -2 2\nconvex\nlipschitz 3.5\npiece x1 >= 0 : -sqrt(x1)\n").unwrap();
        assert_eq!(f.bbox, vec![(-1.0, 1.0), (-2.0, 2.0)]);
        assert!(f.convex);
        assert_eq!(f.lipschitz, Some(3.5));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse("dim 1;\npiece x <= : 0") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 12);
            }
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(parse("dim 1; piece x $ 0 : 1"), Err(Error::Syntax { column: 16, .. })));
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            parse("dim 1; piece x2 > 0 : 1"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse("dim 2; piece x > 0 : 1"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse("dim 2; box 0 1 0 1 0 1; piece true : 1"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse("dim 2; piece special recip_integers(10) : 0"),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_piece_list() {
        assert_eq!(parse("dim 1; convex;"), Err(Error::EmptyPieces));
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = parse("# step\n\ndim 1 # one-dimensional\n\npiece true : abs(x) # total\n").unwrap();
        assert_eq!(f.pieces.len(), 1);
    }

    #[test]
    fn special_set_bound_checked() {
        assert!(parse("dim 1; piece special recip_integers(0) : 0").is_err());
        assert!(parse("dim 1; piece special recip_integers(2.5) : 0").is_err());
        assert!(parse("dim 1; piece x == 0 or special recip_integers(1000) : 0").is_ok());
    }
}
