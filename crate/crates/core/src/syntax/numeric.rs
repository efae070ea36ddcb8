use super::{Lexer, ParseError, Tok};
use num_complex::Complex;

type C = Complex<f64>;

/// `coefficient |bits>` summand of a ket sum.
#[derive(Debug, Clone, PartialEq)]
pub struct KetTerm {
    pub coef: C,
    pub bits: String,
}

/// Complex scalar: `+ - * /`, parentheses, decimal literals, `i` and
/// `sqrt(..)` of a non-negative real.
pub fn parse_complex(lx: &mut Lexer) -> Result<C, ParseError> {
    let mut acc = parse_product(lx)?;
    loop {
        if lx.eat_sym("+") {
            acc += parse_product(lx)?;
        } else if lx.eat_sym("-") {
            acc -= parse_product(lx)?;
        } else {
            return Ok(acc);
        }
    }
}

fn parse_product(lx: &mut Lexer) -> Result<C, ParseError> {
    let mut acc = parse_unary(lx)?;
    loop {
        if lx.is_sym("*") && !ends_scalar(lx) {
            lx.bump();
            acc *= parse_unary(lx)?;
        } else if lx.is_sym("/") {
            let pos = lx.pos();
            lx.bump();
            let d = parse_unary(lx)?;
            if d.norm() == 0.0 {
                return Err(ParseError::new(pos, "division by zero"));
            }
            acc /= d;
        } else {
            return Ok(acc);
        }
    }
}

/// A `*` followed by a ket or a keyword such as `outer` joins a scalar to
/// what it weights rather than continuing the product.
fn ends_scalar(lx: &Lexer) -> bool {
    match lx.peek_at(1) {
        Tok::Sym("|") => true,
        Tok::Ident(s) => s != "i" && s != "sqrt",
        _ => false,
    }
}

fn parse_unary(lx: &mut Lexer) -> Result<C, ParseError> {
    if lx.eat_sym("-") {
        return Ok(-parse_unary(lx)?);
    }
    if lx.eat_sym("+") {
        return parse_unary(lx);
    }
    parse_atom(lx)
}

fn parse_atom(lx: &mut Lexer) -> Result<C, ParseError> {
    let pos = lx.pos();
    match lx.peek().clone() {
        Tok::Number(s) => {
            lx.bump();
            let v: f64 = s.parse().map_err(|_| ParseError::new(pos, format!("bad number `{s}`")))?;
            Ok(C::new(v, 0.0))
        }
        Tok::Ident(s) if s == "i" => {
            lx.bump();
            Ok(C::new(0.0, 1.0))
        }
        Tok::Ident(s) if s == "sqrt" => {
            lx.bump();
            lx.expect_sym("(")?;
            let v = parse_complex(lx)?;
            lx.expect_sym(")")?;
            if v.im != 0.0 || v.re < 0.0 {
                return Err(ParseError::new(pos, "sqrt of a negative or complex value"));
            }
            Ok(C::new(v.re.sqrt(), 0.0))
        }
        Tok::Sym("(") => {
            lx.bump();
            let v = parse_complex(lx)?;
            lx.expect_sym(")")?;
            Ok(v)
        }
        _ => Err(lx.error("expected a number")),
    }
}

fn parse_ket(lx: &mut Lexer) -> Result<String, ParseError> {
    lx.expect_sym("|")?;
    let pos = lx.pos();
    let bits = match lx.bump().tok {
        Tok::Number(s) if s.bytes().all(|b| b == b'0' || b == b'1') => s,
        _ => return Err(ParseError::new(pos, "expected a bit string")),
    };
    lx.expect_sym(">")?;
    Ok(bits)
}

fn parse_ket_term(lx: &mut Lexer) -> Result<KetTerm, ParseError> {
    let coef = if lx.is_sym("|") {
        C::new(1.0, 0.0)
    } else {
        let c = parse_product(lx)?;
        lx.eat_sym("*");
        c
    };
    Ok(KetTerm { coef, bits: parse_ket(lx)? })
}

/// `c0|b0> + c1|b1> - ...`; coefficients default to 1.
pub fn parse_ket_sum(lx: &mut Lexer) -> Result<Vec<KetTerm>, ParseError> {
    let mut out = vec![parse_ket_term(lx)?];
    loop {
        if lx.eat_sym("+") {
            out.push(parse_ket_term(lx)?);
        } else if lx.eat_sym("-") {
            let mut t = parse_ket_term(lx)?;
            t.coef = -t.coef;
            out.push(t);
        } else {
            return Ok(out);
        }
    }
}

/// `[[a, b], [c, d]]`; squareness is left to the caller.
pub fn parse_matrix(lx: &mut Lexer) -> Result<Vec<Vec<C>>, ParseError> {
    lx.expect_sym("[")?;
    let mut rows = Vec::new();
    loop {
        lx.expect_sym("[")?;
        let mut row = vec![parse_complex(lx)?];
        while lx.eat_sym(",") {
            row.push(parse_complex(lx)?);
        }
        lx.expect_sym("]")?;
        rows.push(row);
        if !lx.eat_sym(",") {
            break;
        }
    }
    lx.expect_sym("]")?;
    Ok(rows)
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Parenthesised when both parts are present, so it can sit in a product.
pub fn fmt_complex(z: C) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => fmt_real(z.re),
        (true, false) => format!("{}*i", fmt_real(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { "-" } else { "+" };
            format!("({}{sign}{}*i)", fmt_real(z.re), fmt_real(z.im.abs()))
        }
    }
}

/// Nonzero amplitudes as a ket sum, in basis order. Inverse of
/// [`parse_ket_sum`] up to dropped zero terms.
pub fn fmt_ket_sum(s: &crate::StateVector) -> String {
    let n = s.qubit_count();
    if n == 0 {
        return fmt_complex(s.amplitudes()[0]);
    }
    let mut out = String::new();
    for (idx, a) in s.amplitudes().iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let bits: String = (0..n).map(|k| if idx & (1 << (n - 1 - k)) != 0 { '1' } else { '0' }).collect();
        let negative = a.im == 0.0 && a.re < 0.0;
        let mag = if negative { -*a } else { *a };
        let coef = if mag == C::new(1.0, 0.0) { String::new() } else { fmt_complex(mag) };
        match (out.is_empty(), negative) {
            (true, false) => {}
            (true, true) => out.push('-'),
            (false, false) => out.push_str(" + "),
            (false, true) => out.push_str(" - "),
        }
        out.push_str(&coef);
        out.push('|');
        out.push_str(&bits);
        out.push('>');
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Builds a register state from parsed ket terms. Repeated kets add up;
/// the result must have unit norm within `tol`.
pub fn state_from_kets(names: Vec<String>, terms: &[KetTerm], tol: f64) -> Result<crate::StateVector, String> {
    let n = names.len();
    let mut amps = vec![C::new(0.0, 0.0); 1 << n];
    for t in terms {
        if t.bits.len() != n {
            return Err(format!("ket |{}> has {} bits for {n} qubits", t.bits, t.bits.len()));
        }
        let idx = usize::from_str_radix(&t.bits, 2).map_err(|e| e.to_string())?;
        amps[idx] += t.coef;
    }
    crate::StateVector::new(names, amps, tol).map_err(|e| format!("amplitude normalization failure: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(src: &str) -> C {
        parse_complex(&mut Lexer::new(src).unwrap()).unwrap()
    }

    #[test]
    fn evaluates_scalar_expressions() {
        assert_eq!(complex("1/2"), C::new(0.5, 0.0));
        assert!((complex("1/sqrt(2)").re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(complex("(1+i)/2"), C::new(0.5, 0.5));
        assert_eq!(complex("-i*2"), C::new(0.0, -2.0));
    }

    #[test]
    fn parses_signed_ket_sums() {
        let mut lx = Lexer::new("1/2|001> + 1/2|010> - 1/2|101> -1/2|110>").unwrap();
        let terms = parse_ket_sum(&mut lx).unwrap();
        let coefs: Vec<f64> = terms.iter().map(|t| t.coef.re).collect();
        assert_eq!(coefs, vec![0.5, 0.5, -0.5, -0.5]);
        assert_eq!(terms[3].bits, "110");
        assert_eq!(parse_ket_sum(&mut Lexer::new("|1>").unwrap()).unwrap()[0].coef, C::new(1.0, 0.0));
    }

    #[test]
    fn parses_matrices() {
        let rows = parse_matrix(&mut Lexer::new("[[1, 0], [0, -1]]").unwrap()).unwrap();
        assert_eq!(rows[1][1], C::new(-1.0, 0.0));
    }

    #[test]
    fn formatting_round_trips() {
        for z in [C::new(0.1 + 0.2, 0.0), C::new(-1.0 / 3.0, 2.5), C::new(0.0, -1e-7), C::new(1e-300, 0.0)] {
            assert_eq!(complex(&fmt_complex(z)), z);
        }
    }
}
