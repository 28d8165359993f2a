//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | factor
//! factor   := base ('^' exponent)?
//! exponent := '-'? integer | '(' '-'? integer ('/' integer)? ')'
//! base     := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ident    := letter (letter | digit)* ('_' jetindices)?
//! ```
//!
//! Unary signs and parenthesised rational exponents extend the core grammar
//! so that every printed expression parses back.

use num_bigint::BigInt;
use num_traits::Zero;

use super::context::{Context, BUILTINS};
use super::node::{Exponent, Expr, Func, Rational};
use super::symbol::Symbol;
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next()? {
            out.push(t);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().unwrap().len_utf8();
        }
        let start = self.pos;
        let Some(c) = self.peek() else { return Ok(None) };
        if c.is_ascii_digit() || c == '.' {
            let mut digits = String::new();
            let mut frac_digits = 0u32;
            let mut seen_dot = false;
            while let Some(d) = self.peek() {
                if d.is_ascii_digit() {
                    digits.push(d);
                    if seen_dot {
                        frac_digits += 1;
                    }
                } else if d == '.' && !seen_dot {
                    seen_dot = true;
                } else {
                    break;
                }
                self.pos += 1;
            }
            if digits.is_empty() {
                return Err(ExprError::Syntax { offset: start, message: "malformed number".into() });
            }
            let n: BigInt = digits.parse().expect("ascii digits");
            let q = Rational::new(n, BigInt::from(10u32).pow(frac_digits));
            return Ok(Some((Tok::Num(q), start)));
        }
        if c.is_ascii_alphabetic() {
            while self.peek().is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                self.pos += 1;
            }
            return Ok(Some((Tok::Ident(self.src[start..self.pos].to_string()), start)));
        }
        if "+-*/^(),".contains(c) {
            self.pos += 1;
            return Ok(Some((Tok::Op(c), start)));
        }
        Err(ExprError::Syntax { offset: start, message: format!("unexpected character `{c}`") })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
    ctx: &'a Context,
}

/// Parses `text` against the symbol table `ctx` into a canonical expression.
pub fn parse(text: &str, ctx: &Context) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, i: 0, end: text.len(), ctx };
    let e = p.expr()?;
    if p.i < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn offset(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(self.end)
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.offset(), message: message.to_string() }
    }

    fn peek_op(&self, c: char) -> bool {
        matches!(self.toks.get(self.i), Some((Tok::Op(o), _)) if *o == c)
    }

    fn expect_op(&mut self, c: char) -> Result<(), ExprError> {
        if self.peek_op(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.peek_op('+') {
                self.i += 1;
                acc = &acc + &self.term()?;
            } else if self.peek_op('-') {
                self.i += 1;
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.peek_op('*') {
                self.i += 1;
                acc = &acc * &self.unary()?;
            } else if self.peek_op('/') {
                self.i += 1;
                let at = self.offset();
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(ExprError::Syntax { offset: at, message: "division by zero".into() });
                }
                acc = &acc * &d.recip();
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek_op('-') {
            self.i += 1;
            return Ok(-self.unary()?);
        }
        if self.peek_op('+') {
            self.i += 1;
            return self.unary();
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        let base = self.base()?;
        if !self.peek_op('^') {
            return Ok(base);
        }
        self.i += 1;
        let p = self.exponent()?;
        if base.is_zero() && p < Exponent::zero() {
            return Err(ExprError::Syntax { offset: at, message: "division by zero".into() });
        }
        Ok(base.pow(p))
    }

    fn integer(&mut self) -> Result<i64, ExprError> {
        let neg = if self.peek_op('-') {
            self.i += 1;
            true
        } else {
            false
        };
        match self.toks.get(self.i) {
            Some((Tok::Num(q), _)) if q.is_integer() => {
                let n: i64 = q.to_integer().try_into().map_err(|_| self.error("exponent out of range"))?;
                self.i += 1;
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error("expected an integer exponent")),
        }
    }

    fn exponent(&mut self) -> Result<Exponent, ExprError> {
        if self.peek_op('(') {
            self.i += 1;
            let n = self.integer()?;
            let d = if self.peek_op('/') {
                self.i += 1;
                self.integer()?
            } else {
                1
            };
            if d == 0 {
                return Err(self.error("zero denominator in exponent"));
            }
            self.expect_op(')')?;
            return Ok(Exponent::new(n, d));
        }
        Ok(Exponent::from_integer(self.integer()?))
    }

    fn args(&mut self) -> Result<Vec<(Expr, usize)>, ExprError> {
        self.expect_op('(')?;
        let mut out = Vec::new();
        loop {
            let at = self.offset();
            out.push((self.expr()?, at));
            if self.peek_op(',') {
                self.i += 1;
            } else {
                break;
            }
        }
        self.expect_op(')')?;
        Ok(out)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.toks.get(self.i).cloned() {
            Some((Tok::Num(q), _)) => {
                self.i += 1;
                Ok(Expr::rational(q))
            }
            Some((Tok::Op('('), _)) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => {
                self.i += 1;
                if self.peek_op('(') {
                    self.call(&name, at)
                } else {
                    self.identifier(&name, at)
                }
            }
            Some(_) => Err(self.error("expected a number, identifier or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn identifier(&self, name: &str, at: usize) -> Result<Expr, ExprError> {
        if let Some((base, sub)) = name.split_once('_') {
            if self.ctx.is_dependent(base) {
                return match Symbol::jet_str(base, sub) {
                    Ok(s) => Ok(Expr::symbol(s)),
                    Err(ExprError::UnknownIdentifier { .. }) => Err(self.unknown(name, at)),
                    Err(e) => Err(e),
                };
            }
            return Err(self.unknown(name, at));
        }
        self.ctx.lookup(name).map(|s| Expr::symbol(s.clone())).ok_or_else(|| self.unknown(name, at))
    }

    fn unknown(&self, name: &str, at: usize) -> ExprError {
        ExprError::UnknownIdentifier { name: name.to_string(), offset: at, known: self.ctx.describe() }
    }

    fn arity(&self, name: &str, at: usize, want: usize, got: usize) -> Result<(), ExprError> {
        if want == got {
            Ok(())
        } else {
            Err(ExprError::Syntax { offset: at, message: format!("`{name}` takes {want} argument(s), got {got}") })
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ExprError> {
        let args = self.args()?;
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "arctan" => Some(Func::Arctan),
            "atan2" => Some(Func::Atan2),
            _ => None,
        };
        if let Some(f) = func {
            self.arity(name, at, f.arity(), args.len())?;
            let a: Vec<Expr> = args.into_iter().map(|(e, _)| e).collect();
            return Ok(Expr::apply_func(f, &a));
        }
        if name == "sqrt" {
            self.arity(name, at, 1, args.len())?;
            return Ok(args[0].0.sqrt());
        }
        if name == "diff" {
            if args.len() < 2 {
                return Err(ExprError::Syntax { offset: at, message: "`diff` needs an expression and variables".into() });
            }
            let mut it = args.into_iter();
            let mut e = it.next().unwrap().0;
            for (v, vat) in it {
                let s = v
                    .as_symbol()
                    .cloned()
                    .ok_or(ExprError::Syntax { offset: vat, message: "differentiation variable must be a symbol".into() })?;
                e = e.diff(&s);
            }
            return Ok(e);
        }
        debug_assert!(!BUILTINS.contains(&name));
        let Some(declared) = self.ctx.function(name) else {
            return Err(self.unknown(name, at));
        };
        self.arity(name, at, declared.len(), args.len())?;
        let mut syms = Vec::with_capacity(args.len());
        for (e, aat) in &args {
            let s = e.as_symbol().cloned().ok_or(ExprError::OpaqueArgument { name: name.to_string(), arg: format!("{e} (byte {aat})") })?;
            syms.push(s);
        }
        Ok(Expr::opaque(name, &syms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Result<Expr, ExprError> {
        parse(s, &Context::default())
    }

    #[test]
    fn residual_parses() {
        let e = p("u_tt - a*(u_xxt + u_yyt) - b*(u_xx + u_yy) - f").unwrap();
        assert_eq!(e.num_terms(), 6);
    }

    #[test]
    fn jets_normalise() {
        assert_eq!(p("u_tx").unwrap(), p("u_xt").unwrap());
    }

    #[test]
    fn cancellation() {
        assert!(p("x + x - 2*x").unwrap().is_zero());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.25*x").unwrap(), p("x/4").unwrap());
    }

    #[test]
    fn syntax_error_offsets() {
        match p("x + * y") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match p("(x + y") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(p("x / 0"), Err(ExprError::Syntax { offset: 4, .. })));
    }

    #[test]
    fn unknown_identifier_lists_table() {
        match p("x + zeta") {
            Err(ExprError::UnknownIdentifier { name, offset, known }) => {
                assert_eq!(name, "zeta");
                assert_eq!(offset, 4);
                assert!(known.contains("u") && known.contains("F2(x,y,t)"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(p("a_x"), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(p("u_xz"), Err(ExprError::UnknownIdentifier { .. })));
    }

    #[test]
    fn opaque_functions() {
        let e = p("diff(F2(x,y,t), t, x, t)").unwrap();
        assert_eq!(e, p("diff(F2(x,y,t), x, t, t)").unwrap());
        assert!(matches!(p("F2(x, y)"), Err(ExprError::Syntax { .. })));
        assert!(matches!(p("F2(x+1, y, t)"), Err(ExprError::OpaqueArgument { .. })));
    }

    #[test]
    fn exponents() {
        assert_eq!(p("x^-1 * x").unwrap(), Expr::one());
        assert!(p("x^(1/2)^2").is_err());
        assert_eq!(p("(x^(1/2))^2").unwrap(), p("x").unwrap());
        assert_eq!(p("-x^2").unwrap(), -p("x^2").unwrap());
    }
}
