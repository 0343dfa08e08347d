//! Expression trees over chart coordinates `x0, x1, …`.
//!
//! Trees evaluate on floats and on truncated series, and differentiate
//! symbolically. The symbolic path is kept deliberately separate from the
//! series path so each can check the other.

use std::f64::consts::PI;

use serde_json::Value;

use super::TruncatedSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unary {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Sinh,
    Cosh,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Exact rational constant `p/q`, `q > 0`.
    Ratio(i64, i64),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Powi(Box<Expr>, i32),
    Powf(Box<Expr>, f64),
    Unary(Unary, Box<Expr>),
}

impl Unary {
    fn name(self) -> &'static str {
        match self {
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Exp => "exp",
            Unary::Ln => "ln",
            Unary::Sqrt => "sqrt",
            Unary::Tanh => "tanh",
            Unary::Sinh => "sinh",
            Unary::Cosh => "cosh",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Unary::Sin,
            "cos" => Unary::Cos,
            "exp" => Unary::Exp,
            "ln" => Unary::Ln,
            "sqrt" => Unary::Sqrt,
            "tanh" => Unary::Tanh,
            "sinh" => Unary::Sinh,
            "cosh" => Unary::Cosh,
            _ => return None,
        })
    }

    fn apply_f64(self, x: f64) -> f64 {
        match self {
            Unary::Sin => x.sin(),
            Unary::Cos => x.cos(),
            Unary::Exp => x.exp(),
            Unary::Ln => x.ln(),
            Unary::Sqrt => x.sqrt(),
            Unary::Tanh => x.tanh(),
            Unary::Sinh => x.sinh(),
            Unary::Cosh => x.cosh(),
        }
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ratio(n: i128, d: i128) -> Option<Expr> {
    if d == 0 {
        return None;
    }
    let g = gcd(n, d).max(1);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    Some(Expr::Ratio(i64::try_from(n).ok()?, i64::try_from(d).ok()?))
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Ratio(n, 1)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Ratio(p, q) => Some(*p as f64 / *q as f64),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Ratio(0, _)) || matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Ratio(1, 1)) || matches!(self, Expr::Const(c) if *c == 1.0)
    }

    fn fold(a: &Expr, b: &Expr, add: bool) -> Option<Expr> {
        match (a, b) {
            (Expr::Ratio(p1, q1), Expr::Ratio(p2, q2)) => {
                let (p1, q1, p2, q2) = (*p1 as i128, *q1 as i128, *p2 as i128, *q2 as i128);
                let r = if add {
                    ratio(p1 * q2 + p2 * q1, q1 * q2)
                } else {
                    ratio(p1 * p2, q1 * q2)
                };
                r.or_else(|| Self::fold_float(a, b, add))
            }
            _ => Self::fold_float(a, b, add),
        }
    }

    fn fold_float(a: &Expr, b: &Expr, add: bool) -> Option<Expr> {
        let (x, y) = (a.constant_value()?, b.constant_value()?);
        Some(Expr::Const(if add { x + y } else { x * y }))
    }

    /// Sum with flattening and constant folding.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = Expr::int(0);
        let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            match t {
                Expr::Add(inner) => stack.extend(inner.into_iter().rev()),
                c @ (Expr::Const(_) | Expr::Ratio(..)) => {
                    constant = Self::fold(&constant, &c, true).expect("constants fold");
                }
                other => out.push(other),
            }
        }
        if !constant.is_zero() {
            out.push(constant);
        }
        match out.len() {
            0 => Expr::int(0),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    /// Product with flattening, constant folding and zero absorption.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = Expr::int(1);
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Mul(inner) => stack.extend(inner.into_iter().rev()),
                c @ (Expr::Const(_) | Expr::Ratio(..)) => {
                    constant = Self::fold(&constant, &c, false).expect("constants fold");
                }
                other => out.push(other),
            }
        }
        if constant.is_zero() {
            return Expr::int(0);
        }
        if !constant.is_one() {
            out.insert(0, constant);
        }
        match out.len() {
            0 => Expr::int(1),
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Ratio(p, q) => Expr::Ratio(-p, q),
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::product(vec![Expr::int(-1), other]),
        }
    }

    pub fn difference(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::negate(b)])
    }

    pub fn quotient(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::int(0);
        }
        if b.is_one() {
            return a;
        }
        if let Expr::Ratio(p, q) = b {
            if p != 0 {
                if let Some(inv) = ratio(q as i128, p as i128) {
                    return Expr::product(vec![inv, a]);
                }
            }
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn power_int(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::int(1),
            1 => a,
            _ if a.is_zero() && n > 0 => Expr::int(0),
            _ => Expr::Powi(Box::new(a), n),
        }
    }

    pub fn unary(op: Unary, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Ratio(..) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(v) | Expr::Mul(v) => v.iter().filter_map(Expr::max_var).max(),
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Powf(a, _) | Expr::Unary(_, a) => a.max_var(),
            Expr::Sub(a, b) | Expr::Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Ratio(p, q) => *p as f64 / *q as f64,
            Expr::Var(i) => x[*i],
            Expr::Add(v) => v.iter().map(|e| e.eval_f64(x)).sum(),
            Expr::Mul(v) => v.iter().map(|e| e.eval_f64(x)).product(),
            Expr::Neg(a) => -a.eval_f64(x),
            Expr::Sub(a, b) => a.eval_f64(x) - b.eval_f64(x),
            Expr::Div(a, b) => a.eval_f64(x) / b.eval_f64(x),
            Expr::Powi(a, n) => a.eval_f64(x).powi(*n),
            Expr::Powf(a, p) => a.eval_f64(x).powf(*p),
            Expr::Unary(op, a) => op.apply_f64(a.eval_f64(x)),
        }
    }

    /// Evaluate on truncated series of a common `order`.
    pub fn eval_series<T: Scalar>(
        &self,
        x: &[TruncatedSeries<T>],
        order: usize,
    ) -> Result<TruncatedSeries<T>> {
        let constant = |v: T| TruncatedSeries::constant(v, order);
        Ok(match self {
            Expr::Const(c) => {
                constant(T::from_f64(*c).ok_or_else(|| {
                    Error::UnsupportedModel(format!("constant {c} is not finite"))
                })?)
            }
            Expr::Ratio(p, q) => constant(T::from_ratio(*p, *q)),
            Expr::Var(i) => {
                let s = x.get(*i).ok_or_else(|| {
                    Error::UnsupportedModel(format!(
                        "variable x{i} out of range for chart dimension {}",
                        x.len()
                    ))
                })?;
                if s.order() != order {
                    return Err(Error::OrderMismatch {
                        left: s.order(),
                        right: order,
                    });
                }
                s.clone()
            }
            Expr::Add(v) => {
                let mut acc = TruncatedSeries::zero(order);
                for e in v {
                    acc = acc.add(&e.eval_series(x, order)?)?;
                }
                acc
            }
            Expr::Mul(v) => {
                let mut acc = constant(T::one());
                for e in v {
                    if let Expr::Ratio(p, q) = e {
                        acc = acc.scale(&T::from_ratio(*p, *q));
                    } else {
                        acc = acc.mul(&e.eval_series(x, order)?)?;
                    }
                }
                acc
            }
            Expr::Neg(a) => a.eval_series(x, order)?.neg(),
            Expr::Sub(a, b) => a.eval_series(x, order)?.sub(&b.eval_series(x, order)?)?,
            Expr::Div(a, b) => a.eval_series(x, order)?.div(&b.eval_series(x, order)?)?,
            Expr::Powi(a, n) => a.eval_series(x, order)?.powi(*n)?,
            Expr::Powf(a, p) => {
                let alpha = T::from_f64(*p).ok_or_else(|| {
                    Error::UnsupportedModel(format!("exponent {p} is not finite"))
                })?;
                a.eval_series(x, order)?.powf(&alpha)?
            }
            Expr::Unary(op, a) => {
                let s = a.eval_series(x, order)?;
                match op {
                    Unary::Sin => s.sin_cos()?.0,
                    Unary::Cos => s.sin_cos()?.1,
                    Unary::Exp => s.exp()?,
                    Unary::Ln => s.ln()?,
                    Unary::Sqrt => s.sqrt()?,
                    Unary::Sinh | Unary::Cosh | Unary::Tanh => {
                        let e = s.exp()?;
                        let em = s.neg().exp()?;
                        let half = T::from_ratio(1, 2);
                        let sinh = e.sub(&em)?.scale(&half);
                        let cosh = e.add(&em)?.scale(&half);
                        match op {
                            Unary::Sinh => sinh,
                            Unary::Cosh => cosh,
                            _ => sinh.div(&cosh)?,
                        }
                    }
                }
            }
        })
    }

    /// Symbolic partial derivative with respect to `x_var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Ratio(..) => Expr::int(0),
            Expr::Var(i) => Expr::int(if *i == var { 1 } else { 0 }),
            Expr::Add(v) => Expr::sum(v.iter().map(|e| e.diff(var)).collect()),
            Expr::Mul(v) => {
                let mut terms = Vec::new();
                for i in 0..v.len() {
                    let d = v[i].diff(var);
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = v
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, e)| e.clone())
                        .collect();
                    factors.push(d);
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Neg(a) => Expr::negate(a.diff(var)),
            Expr::Sub(a, b) => Expr::difference(a.diff(var), b.diff(var)),
            Expr::Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                let first = Expr::quotient(da, (**b).clone());
                if db.is_zero() {
                    return first;
                }
                let second = Expr::quotient(
                    Expr::product(vec![(**a).clone(), db]),
                    Expr::power_int((**b).clone(), 2),
                );
                Expr::difference(first, second)
            }
            Expr::Powi(a, n) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::int(0);
                }
                Expr::product(vec![
                    Expr::int(*n as i64),
                    Expr::power_int((**a).clone(), n - 1),
                    da,
                ])
            }
            Expr::Powf(a, p) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::int(0);
                }
                Expr::product(vec![Expr::Const(*p), Expr::Powf(a.clone(), p - 1.0), da])
            }
            Expr::Unary(op, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::int(0);
                }
                let inner = (**a).clone();
                let outer = match op {
                    Unary::Sin => Expr::unary(Unary::Cos, inner),
                    Unary::Cos => Expr::negate(Expr::unary(Unary::Sin, inner)),
                    Unary::Exp => self.clone(),
                    Unary::Ln => return Expr::quotient(da, inner),
                    Unary::Sqrt => {
                        return Expr::quotient(da, Expr::product(vec![Expr::int(2), self.clone()]))
                    }
                    Unary::Tanh => Expr::difference(Expr::int(1), Expr::power_int(self.clone(), 2)),
                    Unary::Sinh => Expr::unary(Unary::Cosh, inner),
                    Unary::Cosh => Expr::unary(Unary::Sinh, inner),
                };
                Expr::product(vec![outer, da])
            }
        }
    }

    /// Directional derivative `V·∇F` along the vector field `field`.
    pub fn lie_derivative(&self, field: &[Expr]) -> Expr {
        Expr::sum(
            field
                .iter()
                .enumerate()
                .map(|(i, v)| Expr::product(vec![v.clone(), self.diff(i)]))
                .collect(),
        )
    }

    /// Prefix-list JSON form accepted by [`parse_expr`].
    pub fn to_json(&self) -> Value {
        use serde_json::json;
        match self {
            Expr::Const(c) => json!(c),
            Expr::Ratio(p, 1) => json!(p),
            Expr::Ratio(p, q) => json!(format!("{p}/{q}")),
            Expr::Var(i) => json!(format!("x{i}")),
            Expr::Add(v) => {
                let mut a = vec![json!("+")];
                a.extend(v.iter().map(Expr::to_json));
                Value::Array(a)
            }
            Expr::Mul(v) => {
                let mut a = vec![json!("*")];
                a.extend(v.iter().map(Expr::to_json));
                Value::Array(a)
            }
            Expr::Neg(a) => json!(["-", a.to_json()]),
            Expr::Sub(a, b) => json!(["-", a.to_json(), b.to_json()]),
            Expr::Div(a, b) => json!(["/", a.to_json(), b.to_json()]),
            Expr::Powi(a, n) => json!(["^", a.to_json(), n]),
            Expr::Powf(a, p) => json!(["^", a.to_json(), p]),
            Expr::Unary(op, a) => json!([op.name(), a.to_json()]),
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::ModelFile(msg.into())
}

fn parse_atom(s: &str) -> Result<Expr> {
    if s == "pi" {
        return Ok(Expr::Const(PI));
    }
    if let Some(idx) = s.strip_prefix('x') {
        return idx
            .parse::<usize>()
            .map(Expr::Var)
            .map_err(|_| parse_err(format!("bad variable name {s:?}")));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad rational {s:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad rational {s:?}")))?;
        return ratio(p as i128, q as i128)
            .ok_or_else(|| parse_err(format!("zero denominator in {s:?}")));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Expr::int(n));
    }
    s.parse::<f64>()
        .map(Expr::Const)
        .map_err(|_| parse_err(format!("unknown atom {s:?}")))
}

/// Parse a prefix-list expression such as `["*", 2, "pi", "x0"]`.
pub fn parse_expr(v: &Value) -> Result<Expr> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Expr::int(i))
            } else {
                Ok(Expr::Const(
                    n.as_f64().ok_or_else(|| parse_err("non-finite number"))?,
                ))
            }
        }
        Value::String(s) => parse_atom(s),
        Value::Array(items) => {
            let (head, args) = items
                .split_first()
                .ok_or_else(|| parse_err("empty expression list"))?;
            let op = head
                .as_str()
                .ok_or_else(|| parse_err("operator must be a string"))?;
            let parsed: Vec<Expr> = args.iter().map(parse_expr).collect::<Result<_>>()?;
            let arity = |n: usize| -> Result<()> {
                if parsed.len() == n {
                    Ok(())
                } else {
                    Err(parse_err(format!(
                        "operator {op:?} takes {n} arguments, got {}",
                        parsed.len()
                    )))
                }
            };
            match op {
                "+" => Ok(Expr::Add(parsed)),
                "*" => Ok(Expr::Mul(parsed)),
                "-" => match parsed.len() {
                    1 => Ok(Expr::Neg(Box::new(parsed.into_iter().next().unwrap()))),
                    2 => {
                        let mut it = parsed.into_iter();
                        Ok(Expr::Sub(
                            Box::new(it.next().unwrap()),
                            Box::new(it.next().unwrap()),
                        ))
                    }
                    n => Err(parse_err(format!(
                        "operator \"-\" takes 1 or 2 arguments, got {n}"
                    ))),
                },
                "/" => {
                    arity(2)?;
                    let mut it = parsed.into_iter();
                    Ok(Expr::Div(
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                    ))
                }
                "^" => {
                    arity(2)?;
                    let mut it = parsed.into_iter();
                    let base = it.next().unwrap();
                    match it.next().unwrap() {
                        Expr::Ratio(p, 1) => Ok(Expr::Powi(
                            Box::new(base),
                            i32::try_from(p).map_err(|_| parse_err("exponent out of range"))?,
                        )),
                        e => match e.constant_value() {
                            Some(p) => Ok(Expr::Powf(Box::new(base), p)),
                            None => Err(parse_err("exponent must be a numeric constant")),
                        },
                    }
                }
                name => {
                    let u = Unary::from_name(name)
                        .ok_or_else(|| parse_err(format!("unknown operator {name:?}")))?;
                    arity(1)?;
                    Ok(Expr::Unary(u, Box::new(parsed.into_iter().next().unwrap())))
                }
            }
        }
        _ => Err(parse_err(format!("unsupported expression node {v}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use serde_json::json;

    #[test]
    fn parse_and_evaluate() {
        let e = parse_expr(&json!(["*", 2, "pi", ["-", 1, ["^", "x0", 2]]])).unwrap();
        assert!((e.eval_f64(&[0.5]) - 2.0 * PI * 0.75).abs() < 1e-15);
        let r = parse_expr(&json!("3/6")).unwrap();
        assert_eq!(r, Expr::Ratio(1, 2));
        assert!(parse_expr(&json!(["foo", 1])).is_err());
        assert!(parse_expr(&json!(["/", 1])).is_err());
        assert!(parse_expr(&json!("y3")).is_err());
        let back = parse_expr(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn symbolic_derivatives_match_series() {
        let src = json!([
            "+",
            ["*", ["sin", "x0"], ["exp", "x1"]],
            ["/", ["tanh", "x0"], ["+", 2, ["^", "x1", 2]]],
            ["sqrt", ["+", 3, "x0"]],
            ["ln", ["cosh", "x1"]]
        ]);
        let e = parse_expr(&src).unwrap();
        let p = [0.3, -0.7];
        for var in 0..2 {
            let d = e.diff(var).eval_f64(&p);
            let order = 3;
            let x: Vec<TruncatedSeries<f64>> = (0..2)
                .map(|i| {
                    if i == var {
                        TruncatedSeries::variable(p[i], order)
                    } else {
                        TruncatedSeries::constant(p[i], order)
                    }
                })
                .collect();
            let s = e.eval_series(&x, order).unwrap();
            assert!(
                (s.coeff(1) - d).abs() < 1e-13,
                "var {var}: {} vs {d}",
                s.coeff(1)
            );
            let dd = e.diff(var).diff(var).eval_f64(&p);
            assert!((2.0 * s.coeff(2) - dd).abs() < 1e-12);
        }
    }

    #[test]
    fn simplification_folds_constants() {
        let e = Expr::product(vec![Expr::int(2), Expr::Ratio(1, 2), Expr::var(0)]);
        assert_eq!(e, Expr::var(0));
        assert_eq!(
            Expr::sum(vec![Expr::int(1), Expr::Ratio(-1, 1)]),
            Expr::int(0)
        );
        assert_eq!(
            Expr::product(vec![Expr::int(0), Expr::var(3)]),
            Expr::int(0)
        );
        assert_eq!(
            parse_expr(&json!(["^", "x0", 3])).unwrap().diff(1),
            Expr::int(0)
        );
    }

    #[test]
    fn rational_series_evaluation() {
        let e = parse_expr(&json!(["-", 1, ["^", "x0", 2]])).unwrap();
        let x = vec![TruncatedSeries::variable(BigRational::from_ratio(1, 2), 2)];
        let s = e.eval_series(&x, 2).unwrap();
        assert_eq!(
            s.coeffs(),
            &[
                BigRational::from_ratio(3, 4),
                BigRational::from_ratio(-1, 1),
                BigRational::from_ratio(-1, 1)
            ]
        );
        let bad = parse_expr(&json!(["exp", "x0"])).unwrap();
        assert!(bad.eval_series(&x, 2).is_err());
    }
}
