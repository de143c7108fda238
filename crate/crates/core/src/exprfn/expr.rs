//! Scalar expression trees in a single variable.
//!
//! Trees are built by the parser in [`super::parse`] and are closed under
//! symbolic differentiation: [`Expr::derivative`] only ever produces nodes
//! from the same fixed set. The smart constructors fold constants and drop
//! additive zeros and multiplicative ones so derivatives stay readable.

use std::fmt;

use thiserror::Error;

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Exp => Ok(v.exp()),
            Func::Log if v <= 0.0 => Err(EvalError::LogOfNonPositive(v)),
            Func::Log => Ok(v.ln()),
            Func::Sqrt if v < 0.0 => Err(EvalError::SqrtOfNegative(v)),
            Func::Sqrt => Ok(v.sqrt()),
            Func::Abs => Ok(v.abs()),
        }
    }
}

/// Domain errors raised while evaluating an expression.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive argument {0}")]
    LogOfNonPositive(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtOfNegative(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    FractionalPowerOfNegative { base: f64, exponent: f64 },
    #[error("non-finite intermediate value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The single free variable.
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (Expr::Const(z), e) | (e, Expr::Const(z)) if z == 0.0 => e,
            (l, r) => Expr::Add(Box::new(l), Box::new(r)),
        }
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
            (e, Expr::Const(0.0)) => e,
            (Expr::Const(0.0), e) => Expr::neg(e),
            (l, r) => Expr::Sub(Box::new(l), Box::new(r)),
        }
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
            (Expr::Const(z), _) | (_, Expr::Const(z)) if z == 0.0 => Expr::Const(0.0),
            (Expr::Const(o), e) | (e, Expr::Const(o)) if o == 1.0 => e,
            (Expr::Const(m), e) | (e, Expr::Const(m)) if m == -1.0 => Expr::neg(e),
            // keep constants on the left and merge nested constant factors
            (e, Expr::Const(c)) => Expr::mul(Expr::Const(c), e),
            (Expr::Const(a), Expr::Mul(inner_l, inner_r)) => match *inner_l {
                Expr::Const(b) => Expr::mul(Expr::Const(a * b), *inner_r),
                other => Expr::Mul(Box::new(Expr::Const(a)), Box::new(Expr::Mul(Box::new(other), inner_r))),
            },
            (l, r) => Expr::Mul(Box::new(l), Box::new(r)),
        }
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Const(a), Expr::Const(b)) if b != 0.0 => Expr::Const(a / b),
            (Expr::Const(z), r) if z == 0.0 && !matches!(r, Expr::Const(_)) => Expr::Const(0.0),
            (e, Expr::Const(1.0)) => e,
            (l, r) => Expr::Div(Box::new(l), Box::new(r)),
        }
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        if exponent == 0.0 {
            return Expr::Const(1.0);
        }
        if exponent == 1.0 {
            return base;
        }
        match base {
            Expr::Const(b) => match pow_checked(b, exponent) {
                Ok(v) if v.is_finite() => Expr::Const(v),
                _ => Expr::Pow(Box::new(Expr::Const(b)), exponent),
            },
            base => Expr::Pow(Box::new(base), exponent),
        }
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = arg {
            if let Ok(v) = f.apply(c) {
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
        }
        Expr::Call(f, Box::new(arg))
    }

    /// `true` when the tree does not mention the variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.is_constant(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Expr::Sub(l, r) => l.eval(x)? - r.eval(x)?,
            Expr::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Expr::Div(l, r) => {
                let den = r.eval(x)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                l.eval(x)? / den
            }
            Expr::Pow(b, p) => pow_checked(b.eval(x)?, *p)?,
            Expr::Call(f, e) => f.apply(e.eval(x)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Symbolic derivative with respect to the variable.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(e) => Expr::neg(e.derivative()),
            Expr::Add(l, r) => Expr::add(l.derivative(), r.derivative()),
            Expr::Sub(l, r) => Expr::sub(l.derivative(), r.derivative()),
            Expr::Mul(l, r) => Expr::add(
                Expr::mul(l.derivative(), (**r).clone()),
                Expr::mul((**l).clone(), r.derivative()),
            ),
            Expr::Div(l, r) => {
                if r.is_constant() {
                    return Expr::div(l.derivative(), (**r).clone());
                }
                Expr::div(
                    Expr::sub(
                        Expr::mul(l.derivative(), (**r).clone()),
                        Expr::mul((**l).clone(), r.derivative()),
                    ),
                    Expr::pow((**r).clone(), 2.0),
                )
            }
            Expr::Pow(b, p) => Expr::mul(
                Expr::mul(Expr::Const(*p), Expr::pow((**b).clone(), p - 1.0)),
                b.derivative(),
            ),
            Expr::Call(f, e) => {
                let inner = (**e).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, inner)),
                    Func::Exp => Expr::call(Func::Exp, inner),
                    Func::Log => Expr::div(Expr::Const(1.0), inner),
                    Func::Sqrt => Expr::div(Expr::Const(0.5), Expr::call(Func::Sqrt, inner)),
                    // sign(f) written as f/|f|; undefined where f = 0
                    Func::Abs => Expr::div(inner.clone(), Expr::call(Func::Abs, inner)),
                };
                Expr::mul(outer, e.derivative())
            }
        }
    }

    /// Replaces every occurrence of the variable by `replacement`.
    pub fn substitute(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => replacement.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(replacement))),
            Expr::Add(l, r) => Expr::Add(Box::new(l.substitute(replacement)), Box::new(r.substitute(replacement))),
            Expr::Sub(l, r) => Expr::Sub(Box::new(l.substitute(replacement)), Box::new(r.substitute(replacement))),
            Expr::Mul(l, r) => Expr::Mul(Box::new(l.substitute(replacement)), Box::new(r.substitute(replacement))),
            Expr::Div(l, r) => Expr::Div(Box::new(l.substitute(replacement)), Box::new(r.substitute(replacement))),
            Expr::Pow(b, p) => Expr::Pow(Box::new(b.substitute(replacement)), *p),
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.substitute(replacement))),
        }
    }

    /// Renders the tree with the given variable name.
    pub fn display_with<'a>(&'a self, var: &'a str) -> impl fmt::Display + 'a {
        Rendered { expr: self, var }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Const(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }
}

fn pow_checked(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::FractionalPowerOfNegative { base, exponent });
    }
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Ok(base.powf(exponent))
    }
}

struct Rendered<'a> {
    expr: &'a Expr,
    var: &'a str,
}

impl Rendered<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> Rendered<'b> {
        Rendered { expr: e, var: self.var }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str(self.var),
            Expr::Neg(e) => {
                f.write_str("-")?;
                self.wrapped(f, e, 4)
            }
            Expr::Add(l, r) => {
                self.wrapped(f, l, 1)?;
                f.write_str(" + ")?;
                self.wrapped(f, r, 2)
            }
            Expr::Sub(l, r) => {
                self.wrapped(f, l, 1)?;
                f.write_str(" - ")?;
                self.wrapped(f, r, 2)
            }
            Expr::Mul(l, r) => {
                self.wrapped(f, l, 2)?;
                f.write_str("*")?;
                self.wrapped(f, r, 3)
            }
            Expr::Div(l, r) => {
                self.wrapped(f, l, 2)?;
                f.write_str("/")?;
                self.wrapped(f, r, 3)
            }
            Expr::Pow(b, p) => {
                self.wrapped(f, b, 5)?;
                if *p < 0.0 {
                    write!(f, "^({p})")
                } else {
                    write!(f, "^{p}")
                }
            }
            Expr::Call(func, e) => write!(f, "{}({})", func.name(), self.child(e)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("x"))
    }
}
