use super::config::{Config, PureConfig};
use super::term::{Name, Term};
use crate::quantum::Gate;
use crate::syntax::{parse_ket_sum, state_from_kets, Lexer, ParseError, Tok};
use crate::StateVector;

const RESERVED: [&str; 5] = ["new", "qbit", "measure", "ok", "process"];

/// Parses a `.cqp` file: `qubits ..; state ..; channels ..; process P`.
/// The header lines are optional; a register without a `state` line
/// starts in `|0..0>`.
pub fn parse_cqp(src: &str) -> Result<Config, ParseError> {
    let mut lx = Lexer::new(src)?;
    let mut qubits: Vec<Name> = Vec::new();
    let mut state = None;
    let mut phi = Vec::new();
    let qubits_pos = lx.pos();
    if lx.eat_keyword("qubits") {
        qubits = name_list(&mut lx, ";")?;
        lx.expect_sym(";")?;
    }
    if lx.is_keyword("state") {
        let pos = lx.pos();
        lx.bump();
        let terms = parse_ket_sum(&mut lx)?;
        lx.expect_sym(";")?;
        state = Some(state_from_kets(qubits.clone(), &terms, 1e-9).map_err(|m| ParseError::new(pos, m))?);
    }
    if lx.eat_keyword("channels") {
        phi = name_list(&mut lx, ";")?;
        lx.expect_sym(";")?;
    }
    lx.expect_keyword("process")?;
    let term = parse_par(&mut lx)?;
    lx.eat_sym(";");
    if !lx.at_eof() {
        return Err(lx.error("expected end of input"));
    }
    let sigma = match state {
        Some(s) => s,
        None => StateVector::basis(qubits.clone(), &vec![false; qubits.len()])
            .map_err(|e| ParseError::new(qubits_pos, e.to_string()))?,
    };
    Ok(Config::Pure(PureConfig { sigma, phi, term }))
}

/// Parses a bare process term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut lx = Lexer::new(src)?;
    let t = parse_par(&mut lx)?;
    if !lx.at_eof() {
        return Err(lx.error("expected end of input"));
    }
    Ok(t)
}

fn name_list(lx: &mut Lexer, end: &str) -> Result<Vec<Name>, ParseError> {
    let mut out = Vec::new();
    if lx.is_sym(end) {
        return Ok(out);
    }
    loop {
        out.push(name(lx, "a name")?);
        if !lx.eat_sym(",") {
            return Ok(out);
        }
    }
}

fn name(lx: &mut Lexer, what: &str) -> Result<Name, ParseError> {
    if let Tok::Ident(s) = lx.peek() {
        if RESERVED.contains(&s.as_str()) {
            return Err(lx.error(format!("expected {what}")));
        }
    }
    lx.expect_name(what)
}

fn parse_par(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = parse_prefix(lx)?;
    while lx.eat_sym("|") {
        t = Term::par(t, parse_prefix(lx)?);
    }
    Ok(t)
}

fn is_name_tok(t: &Tok) -> bool {
    match t {
        Tok::Ident(s) => !RESERVED.contains(&s.as_str()),
        Tok::Number(s) => s.bytes().all(|b| b.is_ascii_digit()),
        _ => false,
    }
}

fn parse_prefix(lx: &mut Lexer) -> Result<Term, ParseError> {
    if lx.is_sym("(") {
        let head = lx.peek_at(1).clone();
        if matches!(&head, Tok::Ident(k) if k == "new" || k == "qbit") && is_name_tok(lx.peek_at(2)) && lx.is_sym_at(3, ")") {
            lx.bump();
            let kw = lx.expect_ident("binder")?;
            let var = name(lx, "a name")?;
            lx.expect_sym(")")?;
            let body = Box::new(parse_prefix(lx)?);
            return Ok(if kw == "new" { Term::NewChan { var, body } } else { Term::NewQbit { var, body } });
        }
        if is_name_tok(&head) && lx.is_sym_at(2, ":=") {
            lx.bump();
            let var = name(lx, "a variable")?;
            lx.expect_sym(":=")?;
            lx.expect_keyword("measure")?;
            let qubits = name_list(lx, ")")?;
            if qubits.is_empty() {
                return Err(lx.error("expected at least one qubit"));
            }
            lx.expect_sym(")")?;
            lx.expect_sym(".")?;
            return Ok(Term::Measure { qubits, var, body: Box::new(parse_prefix(lx)?) });
        }
        lx.bump();
        let t = parse_par(lx)?;
        lx.expect_sym(")")?;
        return Ok(t);
    }
    if lx.eat_sym("{") {
        let qubits = name_list(lx, "*=")?;
        if qubits.is_empty() {
            return Err(lx.error("expected at least one qubit"));
        }
        lx.expect_sym("*=")?;
        let pos = lx.pos();
        let g = lx.expect_ident("a gate name")?;
        let gate: Gate = g.parse().map_err(|m: String| ParseError::new(pos, m))?;
        lx.expect_sym("}")?;
        lx.expect_sym(".")?;
        return Ok(Term::Trans { qubits, gate, body: Box::new(parse_prefix(lx)?) });
    }
    if lx.eat_sym("✓") || lx.eat_keyword("ok") {
        return Ok(Term::Success);
    }
    let is_channel_op = lx.is_sym_at(1, "?") || lx.is_sym_at(1, "!");
    if matches!(lx.peek(), Tok::Number(s) if s == "0") && !is_channel_op {
        lx.bump();
        return Ok(Term::Nil);
    }
    if is_name_tok(lx.peek()) && is_channel_op {
        let chan = name(lx, "a channel")?;
        let input = lx.eat_sym("?");
        if !input {
            lx.expect_sym("!")?;
        }
        lx.expect_sym("[")?;
        let arg = name(lx, "a name")?;
        lx.expect_sym("]")?;
        lx.expect_sym(".")?;
        let body = Box::new(parse_prefix(lx)?);
        return Ok(if input { Term::In { chan, var: arg, body } } else { Term::Out { chan, qubit: arg, body } });
    }
    Err(lx.error("expected a process"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Pos;

    #[test]
    fn parses_every_construct() {
        let src = "(new c)(qbit q)({q *= H}.(x := measure q).x![q].0 | c?[y].ok)";
        let t = parse_term(src).unwrap();
        assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        match t {
            Term::NewChan { var, body } => {
                assert_eq!(var, "c");
                assert!(matches!(*body, Term::NewQbit { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integer_channels_and_nil_are_distinguished() {
        let t = parse_term("0?[y].0 | 1![q].0").unwrap();
        let parts = t.components();
        assert!(matches!(parts[0], Term::In { chan, .. } if chan == "0"));
        assert!(matches!(parts[1], Term::Out { chan, .. } if chan == "1"));
    }

    #[test]
    fn parallel_is_left_nested() {
        let t = parse_term("ok | 0 | ok").unwrap();
        assert!(matches!(&t, Term::Par(a, _) if matches!(**a, Term::Par(..))));
        assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn reports_positions() {
        let err = parse_term("c?[x].\n  {q *= FOO}.0").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 9 });
        let err = parse_term("c?[x]").unwrap_err();
        assert!(err.message.contains("expected `.`"));
    }

    #[test]
    fn parses_headers_and_checks_normalisation() {
        let src = "qubits a, b; state 1/sqrt(2)|00> + 1/sqrt(2)|11>; channels c; process c![a].0";
        let Config::Pure(p) = parse_cqp(src).unwrap() else { panic!() };
        assert_eq!(p.sigma.names(), &["a", "b"]);
        assert_eq!(p.phi, vec!["c"]);
        let bad = "qubits a; state |0> + |1>; process 0";
        assert!(parse_cqp(bad).unwrap_err().message.contains("normalization"));
        let short = "qubits a, b; state |0>; process 0";
        assert!(parse_cqp(short).is_err());
    }
}
