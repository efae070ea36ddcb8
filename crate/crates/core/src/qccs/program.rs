use super::term::{BoolExpr, Name, OpRef, Term};
use crate::quantum::{Gate, QuantumError, Sign};
use crate::syntax::{fmt_complex, fmt_ket_sum, fmt_real, parse_complex, parse_ket_sum, parse_matrix, state_from_kets, Lexer, ParseError, Pos, Tok};
use crate::{DensityMatrix, Matrix, StateVector, SuperOperator};
use indexmap::IndexMap;
use std::borrow::Cow;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ProcDef {
    pub params: Vec<Name>,
    pub body: Term,
}

/// User-declared operators and process constants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Defs {
    pub superops: IndexMap<String, SuperOperator>,
    pub procs: IndexMap<String, ProcDef>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator `{op}` acts on {expected} qubit(s) but is given {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

impl Defs {
    /// The super-operator an [`OpRef`] denotes when applied to `arity`
    /// qubits. `new` is not an operator on existing qubits and is rejected.
    pub fn resolve(&self, op: &OpRef, arity: usize) -> Result<Cow<'_, SuperOperator>, ResolveError> {
        let so = match op {
            OpRef::Gate(g) => Cow::Owned(SuperOperator::gate(*g)),
            OpRef::Measure => Cow::Owned(SuperOperator::meas_unknown(arity)),
            OpRef::Expected(i) => Cow::Owned(SuperOperator::meas_expected(*i, arity)?),
            OpRef::New => return Err(ResolveError::UnknownOperator("new".into())),
            OpRef::Named(n) => Cow::Borrowed(self.superops.get(n).ok_or_else(|| ResolveError::UnknownOperator(n.clone()))?),
        };
        if so.arity() != arity {
            return Err(ResolveError::Arity { op: op.to_string(), expected: so.arity(), found: arity });
        }
        Ok(so)
    }
}

/// A target configuration: a process and the density matrix of every
/// qubit in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct QccsConfig {
    pub term: Term,
    pub rho: DensityMatrix,
}

/// How the initial density matrix was written, kept so that emitting a
/// parsed file reproduces the same notation.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoSpec {
    Outer(StateVector),
    Mixture(Vec<(f64, StateVector)>),
    Matrix(DensityMatrix),
}

impl RhoSpec {
    pub fn density(&self) -> Result<DensityMatrix, QuantumError> {
        match self {
            RhoSpec::Outer(s) => Ok(s.outer()),
            RhoSpec::Mixture(parts) => DensityMatrix::mixture(parts),
            RhoSpec::Matrix(m) => Ok(m.clone()),
        }
    }
}

/// Source positions of a parsed term, shaped like the term itself:
/// `kids[i]` belongs to `term.children()[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Span {
    pub pos: Pos,
    pub kids: Vec<Span>,
}

impl Span {
    fn leaf(pos: Pos) -> Self {
        Span { pos, kids: Vec::new() }
    }

    /// Position of the subterm reached by following child indices.
    pub fn locate(&self, path: &[usize]) -> Pos {
        let mut s = self;
        for &i in path {
            match s.kids.get(i) {
                Some(k) => s = k,
                None => break,
            }
        }
        s.pos
    }
}

/// A complete `.qccs` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub defs: Defs,
    pub rho_spec: RhoSpec,
    pub config: QccsConfig,
    /// Positions of the process term, when parsed from text.
    pub span: Option<Span>,
    /// Positions of each definition body, by constant name.
    pub def_spans: IndexMap<String, Span>,
}

impl Program {
    pub fn new(defs: Defs, rho_spec: RhoSpec, term: Term) -> Result<Self, QuantumError> {
        let rho = rho_spec.density()?;
        Ok(Program { defs, rho_spec, config: QccsConfig { term, rho }, span: None, def_spans: IndexMap::new() })
    }

    /// Operators used anywhere in the file, in a stable order.
    pub fn op_table(&self) -> BTreeSet<OpRef> {
        let mut ops = BTreeSet::new();
        self.config.term.used_operators(&mut ops);
        for d in self.defs.procs.values() {
            d.body.used_operators(&mut ops);
        }
        ops
    }

    /// Renders the `.qccs` text. Emitting a parse of the output yields the
    /// same text.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let ops = self.op_table();
        if !ops.is_empty() {
            let names: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
            let _ = writeln!(out, "// operators: {}", names.join(", "));
        }
        for (name, so) in &self.defs.superops {
            let _ = writeln!(out, "superop {name}({}) {{", so.arity());
            for (sign, m) in so.terms() {
                let s = match sign {
                    Sign::Plus => '+',
                    Sign::Minus => '-',
                };
                let _ = writeln!(out, "    {s}{};", fmt_matrix(m));
            }
            out.push_str("}\n");
        }
        for (name, d) in &self.defs.procs {
            let _ = writeln!(out, "def {name}({}) = {};", d.params.join(", "), d.body);
        }
        let names = self.config.rho.names().join(", ");
        let _ = writeln!(out, "state qubits {names};");
        let rho = match &self.rho_spec {
            RhoSpec::Outer(s) => format!("outer({})", fmt_ket_sum(s)),
            RhoSpec::Mixture(parts) => {
                parts.iter().map(|(p, s)| format!("{}*outer({})", fmt_real(*p), fmt_ket_sum(s))).collect::<Vec<_>>().join(" + ")
            }
            RhoSpec::Matrix(d) => format!("matrix {}", fmt_matrix(d.matrix())),
        };
        let _ = writeln!(out, "rho = {rho};");
        let _ = writeln!(out, "process {};", self.config.term);
        out
    }
}

fn fmt_matrix(m: &Matrix) -> String {
    let n = m.dim();
    let rows: Vec<String> =
        (0..n).map(|r| format!("[{}]", (0..n).map(|c| fmt_complex(m.get(r, c))).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

const RESERVED: [&str; 17] =
    ["nil", "ok", "tau", "if", "then", "true", "false", "not", "and", "tr", "process", "def", "superop", "state", "rho", "new", "outer"];

struct Parser {
    lx: Lexer,
    /// Unresolved references checked once all declarations are known.
    calls: Vec<(String, usize, Pos)>,
    superops: IndexMap<String, SuperOperator>,
}

/// Parses a `.qccs` file. Operators and constants must resolve with the
/// right arities; the no-cloning conditions are checked separately.
pub fn parse_qccs(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser { lx: Lexer::new(src)?, calls: Vec::new(), superops: IndexMap::new() };
    let mut procs = IndexMap::new();
    let mut def_spans = IndexMap::new();
    let mut rho_spec = None;
    loop {
        if p.lx.is_keyword("superop") {
            p.superop()?;
        } else if p.lx.is_keyword("def") {
            let pos = p.lx.pos();
            p.lx.bump();
            let name = p.name("a constant name")?;
            p.lx.expect_sym("(")?;
            let params = p.names(")")?;
            p.lx.expect_sym(")")?;
            p.lx.expect_sym("=")?;
            let (body, span) = p.par()?;
            p.lx.expect_sym(";")?;
            if procs.insert(name.clone(), ProcDef { params, body }).is_some() {
                return Err(ParseError::new(pos, format!("constant `{name}` defined twice")));
            }
            def_spans.insert(name, span);
        } else if p.lx.is_keyword("state") {
            p.lx.bump();
            p.lx.expect_keyword("qubits")?;
            let qubits = p.names(";")?;
            p.lx.expect_sym(";")?;
            p.lx.expect_keyword("rho")?;
            p.lx.expect_sym("=")?;
            rho_spec = Some(p.rho(&qubits)?);
            p.lx.expect_sym(";")?;
        } else {
            break;
        }
    }
    p.lx.expect_keyword("process")?;
    let (term, span) = p.par()?;
    p.lx.eat_sym(";");
    if !p.lx.at_eof() {
        return Err(p.lx.error("expected end of input"));
    }
    for (name, arity, pos) in &p.calls {
        match procs.get(name) {
            None => return Err(ParseError::new(*pos, format!("unresolved constant `{name}`"))),
            Some(d) if d.params.len() != *arity => {
                return Err(ParseError::new(
                    *pos,
                    format!("constant `{name}` takes {} argument(s) but is given {arity}", d.params.len()),
                ))
            }
            Some(_) => {}
        }
    }
    let rho_spec = match rho_spec {
        Some(r) => r,
        None => RhoSpec::Outer(StateVector::basis(Vec::new(), &[]).expect("empty register")),
    };
    let defs = Defs { superops: p.superops, procs };
    let mut prog = Program::new(defs, rho_spec, term).map_err(|e| ParseError::new(Pos::default(), e.to_string()))?;
    prog.span = Some(span);
    prog.def_spans = def_spans;
    Ok(prog)
}

/// Parses a bare term with no user operators or constants in scope.
pub fn parse_qccs_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser { lx: Lexer::new(src)?, calls: Vec::new(), superops: IndexMap::new() };
    let (t, _) = p.par()?;
    if !p.lx.at_eof() {
        return Err(p.lx.error("expected end of input"));
    }
    if let Some((name, _, pos)) = p.calls.first() {
        return Err(ParseError::new(*pos, format!("unresolved constant `{name}`")));
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

impl Parser {
    fn name(&mut self, what: &str) -> Result<Name, ParseError> {
        if !is_name_tok(self.lx.peek()) {
            return Err(self.lx.error(format!("expected {what}")));
        }
        self.lx.expect_name(what)
    }

    fn names(&mut self, end: &str) -> Result<Vec<Name>, ParseError> {
        let mut out = Vec::new();
        if self.lx.is_sym(end) {
            return Ok(out);
        }
        loop {
            out.push(self.name("a name")?);
            if !self.lx.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn superop(&mut self) -> Result<(), ParseError> {
        self.lx.expect_keyword("superop")?;
        let pos = self.lx.pos();
        let name = self.name("an operator name")?;
        if name == "M" || name == "E" || name.parse::<Gate>().is_ok() {
            return Err(ParseError::new(pos, format!("`{name}` is a builtin operator")));
        }
        if self.superops.contains_key(&name) {
            return Err(ParseError::new(pos, format!("operator `{name}` defined twice")));
        }
        self.lx.expect_sym("(")?;
        let arity = self.lx.expect_usize("an arity")?;
        self.lx.expect_sym(")")?;
        self.lx.expect_sym("{")?;
        let mut terms = Vec::new();
        while !self.lx.eat_sym("}") {
            let tpos = self.lx.pos();
            let sign = if self.lx.eat_sym("+") {
                Sign::Plus
            } else if self.lx.eat_sym("-") {
                Sign::Minus
            } else {
                return Err(self.lx.error("expected `+` or `-` before a Kraus matrix"));
            };
            let m = Matrix::from_rows(parse_matrix(&mut self.lx)?).map_err(|e| ParseError::new(tpos, e.to_string()))?;
            self.lx.expect_sym(";")?;
            terms.push((sign, m));
        }
        let so = SuperOperator::signed_kraus(&name, arity, terms).map_err(|e| ParseError::new(pos, e.to_string()))?;
        self.superops.insert(name, so);
        Ok(())
    }

    fn rho(&mut self, qubits: &[Name]) -> Result<RhoSpec, ParseError> {
        let pos = self.lx.pos();
        if self.lx.eat_keyword("matrix") {
            let m = Matrix::from_rows(parse_matrix(&mut self.lx)?).map_err(|e| ParseError::new(pos, e.to_string()))?;
            let d = DensityMatrix::new(qubits.to_vec(), m).map_err(|e| ParseError::new(pos, e.to_string()))?;
            return Ok(RhoSpec::Matrix(d));
        }
        let mut parts = Vec::new();
        let mut weighted = false;
        loop {
            let wpos = self.lx.pos();
            let weight = if self.lx.is_keyword("outer") {
                1.0
            } else {
                weighted = true;
                let w = parse_complex(&mut self.lx)?;
                if w.im != 0.0 || w.re < 0.0 {
                    return Err(ParseError::new(wpos, "mixture weights must be non-negative reals"));
                }
                self.lx.expect_sym("*")?;
                w.re
            };
            self.lx.expect_keyword("outer")?;
            self.lx.expect_sym("(")?;
            let kpos = self.lx.pos();
            let kets = parse_ket_sum(&mut self.lx)?;
            self.lx.expect_sym(")")?;
            let s = state_from_kets(qubits.to_vec(), &kets, crate::DEFAULT_TOLERANCE).map_err(|m| ParseError::new(kpos, m))?;
            parts.push((weight, s));
            if !self.lx.eat_sym("+") {
                break;
            }
        }
        if parts.len() == 1 && !weighted {
            return Ok(RhoSpec::Outer(parts.pop().expect("one part").1));
        }
        Ok(RhoSpec::Mixture(parts))
    }

    fn par(&mut self) -> Result<(Term, Span), ParseError> {
        let (mut t, mut s) = self.choice()?;
        while self.lx.is_sym("|") {
            let pos = self.lx.pos();
            self.lx.bump();
            let (r, rs) = self.choice()?;
            t = Term::par(t, r);
            s = Span { pos, kids: vec![s, rs] };
        }
        Ok((t, s))
    }

    fn choice(&mut self) -> Result<(Term, Span), ParseError> {
        let (mut t, mut s) = self.restr()?;
        while self.lx.is_sym("+") {
            let pos = self.lx.pos();
            self.lx.bump();
            let (r, rs) = self.restr()?;
            t = Term::choice(t, r);
            s = Span { pos, kids: vec![s, rs] };
        }
        Ok((t, s))
    }

    fn restr(&mut self) -> Result<(Term, Span), ParseError> {
        let (mut t, mut s) = self.prefixed()?;
        while self.lx.is_sym("\\") {
            let pos = self.lx.pos();
            self.lx.bump();
            self.lx.expect_sym("{")?;
            let chans = self.names("}")?;
            self.lx.expect_sym("}")?;
            t = Term::restrict(chans, t);
            s = Span { pos, kids: vec![s] };
        }
        Ok((t, s))
    }

    fn op_ref(&mut self) -> Result<OpRef, ParseError> {
        let pos = self.lx.pos();
        let id = self.lx.expect_ident("an operator")?;
        if id == "E" && self.lx.eat_sym("{") {
            let i = self.lx.expect_usize("an outcome index")?;
            self.lx.expect_sym("}")?;
            return Ok(OpRef::Expected(i));
        }
        Ok(match id.as_str() {
            "M" => OpRef::Measure,
            "new" => OpRef::New,
            _ => match id.parse::<Gate>() {
                Ok(g) => OpRef::Gate(g),
                Err(_) if self.superops.contains_key(&id) => OpRef::Named(id),
                Err(_) => return Err(ParseError::new(pos, format!("unresolved operator `{id}`"))),
            },
        })
    }

    /// Checks an operator application's shape against its definition.
    fn check_op(&self, op: &OpRef, qubits: &[Name], pos: Pos) -> Result<(), ParseError> {
        let n = qubits.len();
        let err = |m: String| Err(ParseError::new(pos, m));
        match op {
            OpRef::New if n != 1 => err(format!("`new` binds exactly one qubit, found {n}")),
            OpRef::New => Ok(()),
            OpRef::Expected(i) if n < usize::BITS as usize && *i >= 1usize << n => {
                err(format!("outcome {i} is out of range for {n} qubit(s)"))
            }
            OpRef::Gate(g) if g.arity() != n => err(format!("gate {g} acts on {} qubit(s), found {n}", g.arity())),
            OpRef::Named(name) if self.superops[name].arity() != n => {
                err(format!("operator `{name}` acts on {} qubit(s), found {n}", self.superops[name].arity()))
            }
            _ => Ok(()),
        }
    }

    fn bool_and(&mut self) -> Result<BoolExpr, ParseError> {
        let mut b = self.bool_not()?;
        while self.lx.eat_keyword("and") {
            b = BoolExpr::And(Box::new(b), Box::new(self.bool_not()?));
        }
        Ok(b)
    }

    fn bool_not(&mut self) -> Result<BoolExpr, ParseError> {
        if self.lx.eat_keyword("not") {
            return Ok(BoolExpr::Not(Box::new(self.bool_not()?)));
        }
        if self.lx.eat_keyword("true") {
            return Ok(BoolExpr::True);
        }
        if self.lx.eat_keyword("false") {
            return Ok(BoolExpr::False);
        }
        if self.lx.eat_sym("(") {
            let b = self.bool_and()?;
            self.lx.expect_sym(")")?;
            return Ok(b);
        }
        self.lx.expect_keyword("tr")?;
        self.lx.expect_sym("(")?;
        let pos = self.lx.pos();
        let op = self.op_ref()?;
        if op == OpRef::New {
            return Err(ParseError::new(pos, "`new` cannot appear in a trace guard"));
        }
        self.lx.expect_sym("[")?;
        let qubits = self.names("]")?;
        self.lx.expect_sym("]")?;
        self.check_op(&op, &qubits, pos)?;
        self.lx.expect_sym(")")?;
        self.lx.expect_sym("!=")?;
        let zpos = self.lx.pos();
        match self.lx.bump().tok {
            Tok::Number(z) if z == "0" => {}
            _ => return Err(ParseError::new(zpos, "expected `0`")),
        }
        Ok(BoolExpr::TraceNonzero { op, qubits })
    }

    fn prefixed(&mut self) -> Result<(Term, Span), ParseError> {
        let pos = self.lx.pos();
        let cont = |p: &mut Parser| -> Result<(Term, Span), ParseError> { p.prefixed() };
        if self.lx.eat_keyword("nil") {
            return Ok((Term::Nil, Span::leaf(pos)));
        }
        if self.lx.eat_keyword("ok") || self.lx.eat_sym("✓") {
            return Ok((Term::Success, Span::leaf(pos)));
        }
        if self.lx.eat_keyword("tau") {
            self.lx.expect_sym(".")?;
            let (b, bs) = cont(self)?;
            return Ok((Term::tau(b), Span { pos, kids: vec![bs] }));
        }
        if self.lx.eat_keyword("if") {
            let cond = self.bool_and()?;
            self.lx.expect_keyword("then")?;
            let (b, bs) = cont(self)?;
            return Ok((Term::IfThen { cond, body: Box::new(b) }, Span { pos, kids: vec![bs] }));
        }
        if self.lx.eat_sym("(") {
            let (t, s) = self.par()?;
            self.lx.expect_sym(")")?;
            return Ok((t, s));
        }
        let is_op = matches!(self.lx.peek(), Tok::Ident(_))
            && (self.lx.is_sym_at(1, "[") || (matches!(self.lx.peek(), Tok::Ident(s) if s == "E") && self.lx.is_sym_at(1, "{")));
        if is_op {
            let op = self.op_ref()?;
            self.lx.expect_sym("[")?;
            let qubits = self.names("]")?;
            self.lx.expect_sym("]")?;
            self.check_op(&op, &qubits, pos)?;
            self.lx.expect_sym(".")?;
            let (b, bs) = cont(self)?;
            return Ok((Term::op(op, qubits, b), Span { pos, kids: vec![bs] }));
        }
        if is_name_tok(self.lx.peek()) && (self.lx.is_sym_at(1, "?") || self.lx.is_sym_at(1, "!")) {
            let chan = self.name("a channel")?;
            let input = self.lx.eat_sym("?");
            if !input {
                self.lx.expect_sym("!")?;
            }
            let arg = self.name(if input { "a variable" } else { "a qubit" })?;
            self.lx.expect_sym(".")?;
            let (b, bs) = cont(self)?;
            let body = Box::new(b);
            let t = if input { Term::In { chan, var: arg, body } } else { Term::Out { chan, qubit: arg, body } };
            return Ok((t, Span { pos, kids: vec![bs] }));
        }
        if matches!(self.lx.peek(), Tok::Ident(_)) && self.lx.is_sym_at(1, "(") && is_name_tok(self.lx.peek()) {
            let name = self.name("a constant")?;
            self.lx.expect_sym("(")?;
            let args = self.names(")")?;
            self.lx.expect_sym(")")?;
            self.calls.push((name.clone(), args.len(), pos));
            return Ok((Term::Call { name, args }, Span::leaf(pos)));
        }
        Err(self.lx.error("expected a process"))
    }
}
