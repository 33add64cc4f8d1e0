use crate::span::Span;

use super::ast::*;
use super::lexer::{lex, Kw, Tok, Token};
use super::ParseError;

/// Parses a complete Lite-Eiffel source file.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0, in_rescue: false };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    in_rescue: bool,
}

type PResult<T> = Result<T, ParseError>;

fn starts_expr(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_)
            | Tok::Int(_)
            | Tok::LParen
            | Tok::Minus
            | Tok::Kw(Kw::True | Kw::False | Kw::Void | Kw::Current | Kw::Result | Kw::ExcV | Kw::Old | Kw::Not)
    )
}

fn starts_stmt(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_) | Tok::Kw(Kw::Result | Kw::Retry | Kw::If | Kw::From | Kw::Check | Kw::Raise | Kw::Current)
    )
}

fn is_routine_section(t: &Tok) -> bool {
    matches!(t, Tok::Kw(Kw::Require | Kw::Modify | Kw::Local | Kw::Do | Kw::Deferred | Kw::Ensure | Kw::Rescue))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    /// An argument list must open on the line of the name it applies to;
    /// a parenthesis on a later line starts a new juxtaposed clause.
    fn at_args(&self) -> bool {
        self.at(&Tok::LParen) && self.span().line == self.prev_span().line
    }

    fn at_kw(&self, k: Kw) -> bool {
        self.peek() == &Tok::Kw(k)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        self.eat(&Tok::Kw(k))
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = self.peek();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        ParseError {
            span: self.span(),
            message: format!("unexpected {found}, expected {}", expected.join(" or ")),
            expected,
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&format!("`{}`", t.symbol())]))
        }
    }

    fn expect_kw(&mut self, k: Kw) -> PResult<Span> {
        self.expect(Tok::Kw(k))
    }

    fn ident(&mut self) -> PResult<(Name, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut root = None;
        if self.at_kw(Kw::Root) {
            let start = self.bump().span;
            let (class, _) = self.ident()?;
            self.expect(Tok::Dot)?;
            let (routine, end) = self.ident()?;
            root = Some(RootDecl { class, routine, span: start.to(end) });
        }
        let mut classes = Vec::new();
        while !self.at(&Tok::Eof) {
            classes.push(self.class()?);
        }
        Ok(Program { root, classes })
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let start = self.span();
        let deferred = self.eat_kw(Kw::Deferred);
        if !self.at_kw(Kw::Class) {
            return Err(self.error(if deferred { &["`class`"] } else { &["`class`", "`deferred`"] }));
        }
        self.bump();
        let (name, _) = self.ident()?;
        let mut parent = None;
        let mut redefines = Vec::new();
        if self.eat_kw(Kw::Inherit) {
            parent = Some(self.ident()?.0);
            if self.eat_kw(Kw::Redefine) {
                redefines = self.name_list()?;
                self.expect_kw(Kw::End)?;
            }
        }
        let mut creators = Vec::new();
        if self.eat_kw(Kw::Create) {
            creators = self.name_list()?;
        }
        let mut attributes = Vec::new();
        let mut routines = Vec::new();
        while self.eat_kw(Kw::Feature) {
            while matches!(self.peek(), Tok::Ident(_) | Tok::Kw(Kw::Pure)) {
                self.member(&mut attributes, &mut routines)?;
                self.eat(&Tok::Semi);
            }
        }
        let invariant = if self.eat_kw(Kw::Invariant) { self.clauses()? } else { Vec::new() };
        if !self.at_kw(Kw::End) {
            let mut exp = vec!["`end`"];
            if invariant.is_empty() {
                exp.extend(["`feature`", "`invariant`"]);
            }
            return Err(self.error(&exp));
        }
        let end = self.bump().span;
        Ok(ClassDecl {
            name,
            deferred,
            parent,
            redefines,
            creators,
            attributes,
            routines,
            invariant,
            span: start.to(end),
        })
    }

    fn name_list(&mut self) -> PResult<Vec<Name>> {
        let mut names = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?.0);
        }
        Ok(names)
    }

    fn ty(&mut self) -> PResult<Type> {
        let (n, _) = self.ident()?;
        Ok(match n.as_str() {
            "INTEGER" => Type::Integer,
            "BOOLEAN" => Type::Boolean,
            _ => Type::Class(n),
        })
    }

    /// `a, b: T` declarations, as used for attributes, formals, and locals.
    fn var_group(&mut self) -> PResult<Vec<Var>> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        Ok(names.into_iter().map(|(name, span)| Var { name, ty: ty.clone(), span }).collect())
    }

    fn member(&mut self, attributes: &mut Vec<Attribute>, routines: &mut Vec<Routine>) -> PResult<()> {
        let start = self.span();
        let pure = self.eat_kw(Kw::Pure);
        // attribute group `a, b: T`
        if !pure && self.peek_at(1) == &Tok::Comma {
            for v in self.var_group()? {
                attributes.push(Attribute { name: v.name, ty: v.ty, span: v.span });
            }
            return Ok(());
        }
        let (name, name_span) = self.ident()?;
        let mut formals = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                formals.extend(self.var_group()?);
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        let result = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
        if !pure && formals.is_empty() && !is_routine_section(self.peek()) {
            return match result {
                Some(ty) => {
                    attributes.push(Attribute { name, ty, span: name_span });
                    Ok(())
                }
                None => Err(self.error(&["`:`", "`(`", "routine body"])),
            };
        }
        self.routine_rest(start, name, pure, formals, result, routines)
    }

    fn routine_rest(
        &mut self,
        start: Span,
        name: Name,
        pure: bool,
        formals: Vec<Var>,
        result: Option<Type>,
        routines: &mut Vec<Routine>,
    ) -> PResult<()> {
        let mut contract = Contract::default();
        let mut locals = Vec::new();
        let mut modify = None;
        let mut stmts: Option<Vec<Stmt>> = None;
        let mut deferred = false;
        let mut rescue = None;
        let mut seen = Vec::new();
        loop {
            let section_span = self.span();
            let section = match self.peek() {
                Tok::Kw(Kw::End) => break,
                Tok::Kw(k) if is_routine_section(self.peek()) => *k,
                _ => {
                    return Err(self.error(&[
                        "`require`",
                        "`modify`",
                        "`local`",
                        "`do`",
                        "`deferred`",
                        "`ensure`",
                        "`rescue`",
                        "`end`",
                    ]))
                }
            };
            self.bump();
            let key = match section {
                Kw::Require if self.eat_kw(Kw::Else) => "require else",
                Kw::Ensure if self.eat_kw(Kw::Then) => "ensure then",
                Kw::Rescue if self.eat_kw(Kw::Invariant) => "rescue invariant",
                k => k.as_str(),
            };
            if seen.contains(&key) {
                return Err(ParseError {
                    span: section_span,
                    message: format!("duplicate `{key}` section in routine `{name}`"),
                    expected: Vec::new(),
                });
            }
            seen.push(key);
            match key {
                "require" => contract.require = self.clauses()?,
                "require else" => contract.require_else = self.clauses()?,
                "ensure" => contract.ensure = self.clauses()?,
                "ensure then" => contract.ensure_then = self.clauses()?,
                "rescue invariant" => contract.rescue_invariant = self.clauses()?,
                "modify" => modify = Some(self.modify_targets()?),
                "local" => {
                    while matches!(self.peek(), Tok::Ident(_)) {
                        locals.extend(self.var_group()?);
                        self.eat(&Tok::Semi);
                    }
                }
                "do" => stmts = Some(self.stmts()?),
                "deferred" => deferred = true,
                "rescue" => {
                    self.in_rescue = true;
                    let r = self.stmts();
                    self.in_rescue = false;
                    rescue = Some(r?);
                }
                _ => unreachable!(),
            }
        }
        let end = self.bump().span;
        let span = start.to(end);
        if deferred && (stmts.is_some() || rescue.is_some()) {
            return Err(ParseError {
                span,
                message: format!("deferred routine `{name}` cannot have a body or rescue clause"),
                expected: Vec::new(),
            });
        }
        if !deferred && stmts.is_none() {
            return Err(ParseError {
                span,
                message: format!("routine `{name}` needs a `do` body or `deferred`"),
                expected: vec!["`do`".into(), "`deferred`".into()],
            });
        }
        let body = stmts.map(|stmts| Body { stmts, rescue });
        routines.push(Routine { name, pure, formals, result, locals, body, contract, modify, span });
        Ok(())
    }

    fn modify_targets(&mut self) -> PResult<Vec<ModTarget>> {
        let mut out = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            let (first, s) = self.ident()?;
            if self.eat(&Tok::Dot) {
                let (attr, e) = self.ident()?;
                out.push(ModTarget { receiver: Some(first), attribute: attr, span: s.to(e) });
            } else {
                out.push(ModTarget { receiver: None, attribute: first, span: s });
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn clauses(&mut self) -> PResult<Vec<Clause>> {
        let mut out = Vec::new();
        while starts_expr(self.peek()) {
            let tag = match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Ident(t), Tok::Colon) => {
                    self.bump();
                    self.bump();
                    Some(t)
                }
                _ => None,
            };
            let expr = self.expr()?;
            out.push(Clause { tag, expr });
            self.eat(&Tok::Semi);
        }
        Ok(out)
    }

    fn stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            if !starts_stmt(self.peek()) {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw(Kw::Retry) => {
                if !self.in_rescue {
                    return Err(ParseError {
                        span: start,
                        message: "`Retry` may only be assigned inside a rescue clause".into(),
                        expected: Vec::new(),
                    });
                }
                self.bump();
                self.expect(Tok::Assign)?;
                StmtKind::Retry(self.expr()?)
            }
            Tok::Kw(Kw::Raise) => {
                self.bump();
                StmtKind::Raise
            }
            Tok::Kw(Kw::If) => {
                self.bump();
                let mut branches = Vec::new();
                let cond = self.expr()?;
                self.expect_kw(Kw::Then)?;
                branches.push((cond, self.stmts()?));
                while self.eat_kw(Kw::Elseif) {
                    let cond = self.expr()?;
                    self.expect_kw(Kw::Then)?;
                    branches.push((cond, self.stmts()?));
                }
                let otherwise = if self.eat_kw(Kw::Else) { self.stmts()? } else { Vec::new() };
                if !self.at_kw(Kw::End) {
                    return Err(self.error(&["`elseif`", "`else`", "`end`"]));
                }
                self.bump();
                StmtKind::If { branches, otherwise }
            }
            Tok::Kw(Kw::From) => {
                self.bump();
                let init = self.stmts()?;
                let invariant = if self.eat_kw(Kw::Invariant) { self.clauses()? } else { Vec::new() };
                self.expect_kw(Kw::Until)?;
                let until = self.expr()?;
                self.expect_kw(Kw::Loop)?;
                let body = self.stmts()?;
                self.expect_kw(Kw::End)?;
                StmtKind::Loop { init, invariant, until, body }
            }
            Tok::Kw(Kw::Check) => {
                self.bump();
                let clauses = self.clauses()?;
                self.expect_kw(Kw::End)?;
                StmtKind::Check(clauses)
            }
            Tok::Kw(Kw::Result) if self.peek_at(1) == &Tok::Assign => {
                self.bump();
                self.bump();
                self.assignment(AssignTarget::Result)?
            }
            Tok::Ident(name) if self.peek_at(1) == &Tok::Assign => {
                self.bump();
                self.bump();
                self.assignment(AssignTarget::Name(name))?
            }
            _ => {
                let e = self.postfix()?;
                match e.kind {
                    ExprKind::Member { target, name, args } => StmtKind::Call {
                        target: Some(*target),
                        class: None,
                        routine: name,
                        args: args.unwrap_or_default(),
                    },
                    ExprKind::Ident(name) => {
                        StmtKind::Call { target: None, class: None, routine: name, args: Vec::new() }
                    }
                    ExprKind::Call { name, args } => StmtKind::Call { target: None, class: None, routine: name, args },
                    _ => {
                        return Err(ParseError {
                            span: e.span,
                            message: "expected an instruction".into(),
                            expected: vec!["`:=`".into(), "routine call".into()],
                        })
                    }
                }
            }
        };
        Ok(Stmt { kind, span: start.to(self.prev_span()) })
    }

    fn assignment(&mut self, target: AssignTarget) -> PResult<StmtKind> {
        if self.eat_kw(Kw::Create) {
            self.expect(Tok::LBrace)?;
            let (class, _) = self.ident()?;
            self.expect(Tok::RBrace)?;
            let mut creator = None;
            let mut args = Vec::new();
            if self.eat(&Tok::Dot) {
                creator = Some(self.ident()?.0);
                if self.at_args() {
                    args = self.args()?;
                }
            }
            return Ok(StmtKind::Create { target, class, creator, args });
        }
        Ok(StmtKind::Assign { target, value: self.expr()? })
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if !self.at(&Tok::RParen) {
            out.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                out.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&mut self) -> Option<(BinOp, usize)> {
        let op = match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Kw(Kw::And) => return Some((BinOp::And, if self.peek_at(1) == &Tok::Kw(Kw::Then) { 2 } else { 1 })),
            Tok::Kw(Kw::Or) => return Some((BinOp::Or, if self.peek_at(1) == &Tok::Kw(Kw::Else) { 2 } else { 1 })),
            Tok::Kw(Kw::Implies) => BinOp::Implies,
            _ => return None,
        };
        Some((op, 1))
    }

    /// Precedence climbing; `implies` is right-associative, everything else
    /// left-associative. Comparisons do not chain.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some((op, width)) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            for _ in 0..width {
                self.bump();
            }
            let next_min = if op == BinOp::Implies { prec } else { prec + 1 };
            let rhs = self.binary(next_min)?;
            if prec == 4 {
                if let Some((next, _)) = self.binop() {
                    if next.precedence() == 4 {
                        return Err(ParseError {
                            span: self.span(),
                            message: "comparison operators do not chain; use `and`".into(),
                            expected: Vec::new(),
                        });
                    }
                }
            }
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let op = if self.eat_kw(Kw::Not) {
            UnOp::Not
        } else if self.eat(&Tok::Minus) {
            UnOp::Neg
        } else {
            return self.postfix();
        };
        let e = self.unary()?;
        let span = start.to(e.span);
        Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), span))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Dot) {
            let (name, ns) = self.ident()?;
            let args = if self.at_args() { Some(self.args()?) } else { None };
            let span = e.span.to(if args.is_some() { self.prev_span() } else { ns });
            e = Expr::new(ExprKind::Member { target: Box::new(e), name, args }, span);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Int(n)
            }
            Tok::Kw(Kw::True) => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Kw(Kw::Void) => {
                self.bump();
                ExprKind::Void
            }
            Tok::Kw(Kw::Current) => {
                self.bump();
                ExprKind::Current
            }
            Tok::Kw(Kw::Result) => {
                self.bump();
                ExprKind::Result
            }
            Tok::Kw(Kw::ExcV) => {
                self.bump();
                ExprKind::ExcV
            }
            Tok::Kw(Kw::Old) => {
                self.bump();
                let e = self.postfix()?;
                let span = start.to(e.span);
                return Ok(Expr::new(ExprKind::Old(Box::new(e)), span));
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                e.span = start.to(end);
                return Ok(e);
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at_args() {
                    let args = self.args()?;
                    return Ok(Expr::new(ExprKind::Call { name, args }, start.to(self.prev_span())));
                }
                ExprKind::Ident(name)
            }
            _ => return Err(self.error(&["expression"])),
        };
        Ok(Expr::new(kind, start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_class() {
        let p = parse("class A end").unwrap();
        assert_eq!(p.classes.len(), 1);
        let c = &p.classes[0];
        assert_eq!(c.name, "A");
        assert!(c.attributes.is_empty() && c.routines.is_empty() && c.invariant.is_empty());
    }

    #[test]
    fn retry_outside_rescue_is_parse_error() {
        let e = parse("class A feature r do Retry := True end end").unwrap_err();
        assert!(e.message.contains("Retry"), "{e}");
        assert_eq!(e.span.line, 1);
    }

    #[test]
    fn retry_inside_rescue_parses() {
        let p = parse("class A feature r do raise rescue Retry := True rescue invariant True end end").unwrap();
        let r = &p.classes[0].routines[0];
        assert!(r.has_rescue());
        assert_eq!(r.contract.rescue_invariant.len(), 1);
    }

    #[test]
    fn implies_binds_loosest_and_not_tightest() {
        let mut p = Parser { tokens: lex("not ExcV implies not failed").unwrap(), pos: 0, in_rescue: false };
        let e = p.expr().unwrap();
        match e.kind {
            ExprKind::Binary(BinOp::Implies, l, r) => {
                assert!(matches!(l.kind, ExprKind::Unary(UnOp::Not, _)));
                assert!(matches!(r.kind, ExprKind::Unary(UnOp::Not, _)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn juxtaposed_clauses_split() {
        let p =
            parse("class A feature f: BOOLEAN r do ensure ExcV implies f\n not ExcV implies not f end end").unwrap();
        assert_eq!(p.classes[0].routines[0].contract.ensure.len(), 2);
    }

    #[test]
    fn error_reports_expected_tokens() {
        let e = parse("class A feature x: INTEGER").unwrap_err();
        assert!(!e.expected.is_empty());
        assert!(e.expected.iter().any(|s| s.contains("end")), "{:?}", e.expected);
    }

    #[test]
    fn chained_comparison_rejected() {
        assert!(parse("class A feature a, b: A invariant a /= b /= Current end").is_err());
    }
}
