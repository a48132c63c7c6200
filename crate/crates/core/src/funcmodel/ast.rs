//! Expression and predicate trees of the piecewise DSL.

use std::fmt;

/// Membership tolerance for the points of a countable set, relative to the
/// magnitude of the point.
pub const SPECIAL_REL_TOL: f64 = 1e-12;

/// Largest index accepted by `recip_integers(N)`.
pub const SPECIAL_MAX_N: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// `+inf`, usable as an explicit formula value.
    Inf,
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A countable point set given by a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialSet {
    /// `{1/k : 1 <= k <= max_n}`
    RecipIntegers { max_n: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pred {
    Const(bool),
    Cmp(CmpOp, Expr, Expr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Special(SpecialSet),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Inf => f64::INFINITY,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(func, args) => match func {
                Func::Abs => args[0].eval(x).abs(),
                Func::Sqrt => args[0].eval(x).sqrt(),
                Func::Min => args.iter().map(|a| a.eval(x)).fold(f64::INFINITY, f64::min),
                Func::Max => args
                    .iter()
                    .map(|a| a.eval(x))
                    .fold(f64::NEG_INFINITY, f64::max),
            },
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Inf => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }
}

// Integer exponents go through powi so that (-2)^2 stays exact and defined.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

impl SpecialSet {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            SpecialSet::RecipIntegers { max_n } => {
                if !(x > 0.0) || x > 1.0 + SPECIAL_REL_TOL {
                    return false;
                }
                let n = (1.0 / x).round();
                [n - 1.0, n, n + 1.0].iter().any(|&k| {
                    k >= 1.0
                        && k <= max_n as f64
                        && (x - 1.0 / k).abs() <= SPECIAL_REL_TOL / k
                })
            }
        }
    }

    /// Points of the set in `[lo, hi]`, at most `cap` of them. When the set
    /// is larger than `cap`, indices are spread log-uniformly and both
    /// extreme points are always kept.
    pub fn points_in(&self, lo: f64, hi: f64, cap: usize) -> Vec<f64> {
        match *self {
            SpecialSet::RecipIntegers { max_n } => {
                if hi <= 0.0 || hi < lo || cap == 0 {
                    return Vec::new();
                }
                let k_min = (1.0 / hi).ceil().max(1.0) as u64;
                let k_max = if lo <= 0.0 {
                    max_n
                } else {
                    ((1.0 / lo).floor() as u64).min(max_n)
                };
                if k_min > k_max {
                    return Vec::new();
                }
                let count = k_max - k_min + 1;
                let ks: Vec<u64> = if count as usize <= cap {
                    (k_min..=k_max).collect()
                } else if cap == 1 {
                    vec![k_max]
                } else {
                    let (a, b) = ((k_min as f64).ln(), (k_max as f64).ln());
                    let mut ks: Vec<u64> = (0..cap)
                        .map(|i| (a + (b - a) * i as f64 / (cap - 1) as f64).exp().round() as u64)
                        .map(|k| k.clamp(k_min, k_max))
                        .collect();
                    ks.dedup();
                    ks
                };
                ks.into_iter()
                    .map(|k| 1.0 / k as f64)
                    .filter(|&p| p >= lo && p <= hi)
                    .collect()
            }
        }
    }

    /// Distance from a member `x` to the nearest other member.
    pub fn spacing_at(&self, x: f64) -> f64 {
        match *self {
            SpecialSet::RecipIntegers { max_n } => {
                let n = (1.0 / x).round();
                let up = if n > 1.0 { 1.0 / (n - 1.0) - x } else { f64::INFINITY };
                let down = if n < max_n as f64 { x - 1.0 / (n + 1.0) } else { x };
                up.min(down)
            }
        }
    }
}

impl Pred {
    pub fn eval(&self, x: &[f64]) -> bool {
        match self {
            Pred::Const(b) => *b,
            Pred::Cmp(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq => a == b,
                }
            }
            Pred::And(p, q) => p.eval(x) && q.eval(x),
            Pred::Or(p, q) => p.eval(x) || q.eval(x),
            Pred::Not(p) => !p.eval(x),
            Pred::Special(s) => s.contains(x[0]),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Pred::Const(_) => None,
            Pred::Special(_) => Some(0),
            Pred::Cmp(_, a, b) => a.max_var().max(b.max_var()),
            Pred::And(p, q) | Pred::Or(p, q) => p.max_var().max(q.max_var()),
            Pred::Not(p) => p.max_var(),
        }
    }

    pub fn collect_special(&self, out: &mut Vec<SpecialSet>) {
        match self {
            Pred::Special(s) => {
                if !out.contains(s) {
                    out.push(*s)
                }
            }
            Pred::And(p, q) | Pred::Or(p, q) => {
                p.collect_special(out);
                q.collect_special(out);
            }
            Pred::Not(p) => p.collect_special(out),
            Pred::Const(_) | Pred::Cmp(..) => {}
        }
    }

    pub fn has_special(&self) -> bool {
        let mut v = Vec::new();
        self.collect_special(&mut v);
        !v.is_empty()
    }
}

/// Printing context: variable naming depends on the dimension.
pub struct Printer {
    pub dim: usize,
}

impl Printer {
    fn var(&self, i: usize) -> String {
        if self.dim == 1 {
            "x".to_string()
        } else {
            format!("x{}", i + 1)
        }
    }

    pub fn expr(&self, e: &Expr) -> String {
        match e {
            Expr::Num(v) if *v < 0.0 => format!("(-{:?})", -v),
            Expr::Num(v) => format!("{:?}", v),
            Expr::Inf => "inf".into(),
            Expr::Var(i) => self.var(*i),
            Expr::Neg(a) => format!("(-{})", self.expr(a)),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                format!("({} {} {})", self.expr(a), sym, self.expr(b))
            }
            Expr::Call(f, args) => {
                let name = match f {
                    Func::Abs => "abs",
                    Func::Sqrt => "sqrt",
                    Func::Min => "min",
                    Func::Max => "max",
                };
                let args: Vec<String> = args.iter().map(|a| self.expr(a)).collect();
                format!("{}({})", name, args.join(", "))
            }
        }
    }

    pub fn pred(&self, p: &Pred) -> String {
        match p {
            Pred::Const(true) => "true".into(),
            Pred::Const(false) => "false".into(),
            Pred::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                    CmpOp::Eq => "==",
                };
                format!("({} {} {})", self.expr(a), sym, self.expr(b))
            }
            Pred::And(a, b) => format!("({} and {})", self.pred(a), self.pred(b)),
            Pred::Or(a, b) => format!("({} or {})", self.pred(a), self.pred(b)),
            Pred::Not(a) => format!("(not {})", self.pred(a)),
            Pred::Special(SpecialSet::RecipIntegers { max_n }) => {
                format!("special recip_integers({})", max_n)
            }
        }
    }
}

impl fmt::Display for SpecialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialSet::RecipIntegers { max_n } => write!(f, "recip_integers({})", max_n),
        }
    }
}
