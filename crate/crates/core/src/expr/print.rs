use std::fmt;

use num_traits::{One, Signed};

use super::node::{Atom, Exponent, Expr, Monomial, Rational};

fn write_exponent(f: &mut fmt::Formatter<'_>, p: &Exponent) -> fmt::Result {
    if p.is_one() {
        Ok(())
    } else if p.is_integer() {
        write!(f, "^{}", p.numer())
    } else {
        write!(f, "^({}/{})", p.numer(), p.denom())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sym(s) => write!(f, "{s}"),
            Atom::Fn(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Atom::Opaque(o) => {
                let args: Vec<String> = o.args().iter().map(|s| s.to_string()).collect();
                let app = format!("{}({})", o.name(), args.join(","));
                if o.derivs().is_empty() {
                    f.write_str(&app)
                } else {
                    let d: Vec<String> = o.derivs().iter().map(|s| s.to_string()).collect();
                    write!(f, "diff({app}, {})", d.join(", "))
                }
            }
            Atom::Group(g) => write!(f, "({g})"),
        }
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    for (i, (a, p)) in m.factors().iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write!(f, "{a}")?;
        write_exponent(f, p)?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, c: &Rational, m: &Monomial) -> fmt::Result {
    if m.is_one() {
        return write!(f, "{c}");
    }
    if !c.is_one() {
        write!(f, "{c}*")?;
    }
    write_monomial(f, m)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i == 0 {
                if c.is_negative() && !m.is_one() {
                    f.write_str("-")?;
                    write_term(f, &-c, m)?;
                } else {
                    write_term(f, c, m)?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
                write_term(f, &-c, m)?;
            } else {
                f.write_str(" + ")?;
                write_term(f, c, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Context};

    fn roundtrip(s: &str) {
        let ctx = Context::default();
        let e = parse(s, &ctx).unwrap();
        let printed = e.to_string();
        let back = parse(&printed, &ctx).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(back, e, "{printed}");
    }

    #[test]
    fn printed_forms_parse_back() {
        for s in [
            "u_tt - a*(u_xxt + u_yyt) - b*(u_xx + u_yy) - f",
            "-3/2*x^2*y + 7",
            "sin(s)*cos(s)^3 - 1",
            "(x^2 + y^2)^-1 * y",
            "sqrt(x^2 + y^2) + atan2(y, x)",
            "diff(F2(x,y,t), x, x, t) - b*diff(F2(x,y,t), y)",
            "2^(1/2)*exp(-x)",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn display_is_readable() {
        let e = parse("x - 2*y", &Context::default()).unwrap();
        assert_eq!(e.to_string(), "x - 2*y");
        let e = parse("-a*u_x", &Context::default()).unwrap();
        assert_eq!(e.to_string(), "-a*u_x");
    }
}
