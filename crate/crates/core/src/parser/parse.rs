use super::lexer::{tokenize, Tok, Token};
use super::surface::*;
use crate::diagnostic::{Diagnostic, DiagnosticKind, Span};

const MAX_DEPTH: usize = 64;
const MAX_OPERATORS: usize = 512;

/// Parses specification source text. Never panics; every failure comes back
/// as one or more error diagnostics.
pub fn parse(source: &str) -> Result<SurfaceSpec, Vec<Diagnostic>> {
    let tokens = tokenize(source).map_err(|d| vec![d])?;
    let mut p = Parser { toks: tokens, pos: 0, end: source.len(), depth: 0, operators: 0 };
    let mut decls = Vec::new();
    let mut errors = Vec::new();
    while !p.at_end() {
        let start = p.pos;
        match p.decl() {
            Ok(d) => decls.push(d),
            Err(e) => {
                errors.push(e);
                p.resync(start);
            }
        }
    }
    if errors.is_empty() {
        Ok(SurfaceSpec { decls })
    } else {
        Err(errors)
    }
}

/// Parses a single expression, for tests and tools.
pub fn parse_expr(source: &str) -> Result<SExpr, Diagnostic> {
    let tokens = tokenize(source)?;
    let mut p = Parser { toks: tokens, pos: 0, end: source.len(), depth: 0, operators: 0 };
    let e = p.expr()?;
    if let Some(t) = p.peek_token() {
        return Err(unexpected(t, "end of expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
    depth: usize,
    /// Binary operators in the current top-level expression; bounds tree depth.
    operators: usize,
}

fn unexpected(t: &Token, expected: &str) -> Diagnostic {
    Diagnostic::error(
        DiagnosticKind::UnexpectedToken,
        t.span,
        format!("expected {expected}, found {}", t.tok.describe()),
    )
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn peek_token(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn eof_span(&self) -> Span {
        Span::new(self.end, self.end)
    }

    fn here(&self) -> Span {
        self.peek_token().map_or(self.eof_span(), |t| t.span)
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn eof_error(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            DiagnosticKind::UnexpectedEof,
            self.eof_span(),
            format!("unexpected end of input, expected {expected}"),
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Span> {
        match self.peek_token() {
            Some(t) if t.tok == tok => {
                let span = t.span;
                self.pos += 1;
                Ok(span)
            }
            Some(t) => Err(unexpected(t, expected)),
            None => Err(self.eof_error(expected)),
        }
    }

    fn expect_close(&mut self, open: Span) -> PResult<Span> {
        match self.peek_token() {
            Some(t) if t.tok == Tok::RParen => {
                let span = t.span;
                self.pos += 1;
                Ok(span)
            }
            Some(t) => Err(unexpected(t, "`)`")),
            None => Err(Diagnostic::error(DiagnosticKind::Unbalanced, open, "unclosed `(`")),
        }
    }

    fn ident(&mut self, expected: &str) -> PResult<Ident> {
        match self.peek_token() {
            Some(Token { tok: Tok::Ident(name), span }) => {
                let id = Ident { name: name.clone(), span: *span };
                self.pos += 1;
                Ok(id)
            }
            Some(t) => Err(unexpected(t, expected)),
            None => Err(self.eof_error(expected)),
        }
    }

    fn resync(&mut self, decl_start: usize) {
        if self.pos == decl_start {
            self.pos += 1;
        }
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Input | Tok::Output | Tok::Trigger | Tok::Constant | Tok::Import) {
                break;
            }
            self.pos += 1;
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.here();
        let t = self.peek_token().cloned().ok_or_else(|| self.eof_error("a declaration"))?;
        self.pos += 1;
        match t.tok {
            Tok::Import => Ok(Decl::Import(self.ident("module name")?)),
            Tok::Input => {
                let name = self.ident("input name")?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                Ok(Decl::Input(InputDecl { name, ty, span: start.to(Span::new(self.prev_end(), self.prev_end())) }))
            }
            Tok::Constant => {
                let name = self.ident("constant name")?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                self.expect(Tok::Assign, "`:=`")?;
                let value = self.expr()?;
                let span = start.to(value.span);
                Ok(Decl::Constant(ConstantDecl { name, ty, value, span }))
            }
            Tok::Output => {
                let name = self.ident("output name")?;
                let params = if self.peek() == Some(&Tok::LParen) { self.params()? } else { Vec::new() };
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                let body = self.body()?;
                let span = start.to(Span::new(self.prev_end(), self.prev_end()));
                Ok(Decl::Output(OutputDecl { name, params, ty, body, span }))
            }
            Tok::Trigger => {
                let body_is_clauses = |p: &Parser, k: usize| {
                    matches!(p.peek_at(k), Some(Tok::Spawn | Tok::Eval | Tok::Close))
                };
                let mut params = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    if let Some(close) = self.matching_paren(self.pos) {
                        if body_is_clauses(self, close + 1 - self.pos) {
                            params = self.params()?;
                        }
                    }
                }
                let body = if body_is_clauses(self, 0) {
                    TriggerBody::Clauses(self.clauses()?)
                } else {
                    if !params.is_empty() {
                        return Err(Diagnostic::error(
                            DiagnosticKind::UnexpectedToken,
                            self.here(),
                            "parameterized trigger needs spawn/eval/close clauses",
                        ));
                    }
                    let pacing = self.opt_pacing()?;
                    let condition = self.expr()?;
                    let message = match self.peek() {
                        Some(Tok::Str(s)) => {
                            let s = s.clone();
                            self.pos += 1;
                            Some(s)
                        }
                        _ => None,
                    };
                    TriggerBody::Condition { pacing, condition, message }
                };
                let span = start.to(Span::new(self.prev_end(), self.prev_end()));
                Ok(Decl::Trigger(TriggerDecl { params, body, span }))
            }
            _ => Err(unexpected(&t, "`input`, `output`, `trigger`, `constant` or `import`")),
        }
    }

    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            match t.tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let open = self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let name = self.ident("parameter name")?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                params.push(Param { name, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect_close(open)?;
        Ok(params)
    }

    fn ty(&mut self) -> PResult<SurfaceType> {
        self.enter()?;
        let result = self.ty_inner();
        self.depth -= 1;
        result
    }

    fn ty_inner(&mut self) -> PResult<SurfaceType> {
        if self.peek() == Some(&Tok::LParen) {
            let open = self.expect(Tok::LParen, "`(`")?;
            let mut elems = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    elems.push(self.ty()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            let close = self.expect_close(open)?;
            return Ok(SurfaceType::Tuple(elems, open.to(close)));
        }
        Ok(SurfaceType::Named(self.ident("a type")?))
    }

    fn body(&mut self) -> PResult<StreamBody> {
        match self.peek() {
            Some(Tok::Spawn | Tok::Eval | Tok::Close) => Ok(StreamBody::Clauses(self.clauses()?)),
            _ => {
                let pacing = self.opt_pacing()?;
                self.expect(Tok::Assign, "`:=` or a spawn/eval/close clause")?;
                let expr = self.expr()?;
                Ok(StreamBody::Shorthand { pacing, expr })
            }
        }
    }

    fn clauses(&mut self) -> PResult<Clauses> {
        let mut clauses = Clauses::default();
        loop {
            let Some(t) = self.peek_token().cloned() else { break };
            let slot = match t.tok {
                Tok::Spawn => &mut clauses.spawn,
                Tok::Eval => &mut clauses.eval,
                Tok::Close => &mut clauses.close,
                _ => break,
            };
            if slot.is_some() {
                return Err(Diagnostic::error(
                    DiagnosticKind::UnexpectedToken,
                    t.span,
                    format!("duplicate {} clause", t.tok.describe()),
                ));
            }
            self.pos += 1;
            let pacing = self.opt_pacing()?;
            let mut when = None;
            let mut with = None;
            loop {
                if when.is_none() && self.eat(&Tok::When) {
                    when = Some(self.expr()?);
                } else if with.is_none() && t.tok != Tok::Close && self.eat(&Tok::With) {
                    with = Some(self.expr()?);
                } else {
                    break;
                }
            }
            let span = t.span.to(Span::new(self.prev_end(), self.prev_end()));
            let clause = Clause { pacing, when, with, span };
            match t.tok {
                Tok::Spawn => clauses.spawn = Some(clause),
                Tok::Eval => clauses.eval = Some(clause),
                _ => clauses.close = Some(clause),
            }
        }
        Ok(clauses)
    }

    fn opt_pacing(&mut self) -> PResult<Option<SPacing>> {
        if !self.eat(&Tok::At) {
            return Ok(None);
        }
        self.operators = 0;
        let pacing = match self.peek_token().cloned() {
            Some(Token { tok: Tok::Duration(value, unit), span }) => {
                self.pos += 1;
                SPacing::Frequency { value, unit, span }
            }
            Some(_) => SPacing::Activation(self.activation_or()?),
            None => return Err(self.eof_error("a pacing annotation")),
        };
        self.eat(&Tok::At);
        Ok(Some(pacing))
    }

    fn activation_or(&mut self) -> PResult<Activation> {
        let mut lhs = self.activation_and()?;
        while self.eat(&Tok::OrOr) || self.eat(&Tok::OrWord) {
            self.count_operator()?;
            let rhs = self.activation_and()?;
            lhs = Activation::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn activation_and(&mut self) -> PResult<Activation> {
        let mut lhs = self.activation_atom()?;
        while self.eat(&Tok::AndAnd) || self.eat(&Tok::AndWord) {
            self.count_operator()?;
            let rhs = self.activation_atom()?;
            lhs = Activation::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn activation_atom(&mut self) -> PResult<Activation> {
        self.enter()?;
        let result = match self.peek_token().cloned() {
            Some(Token { tok: Tok::LParen, span }) => {
                self.pos += 1;
                let inner = self.activation_or();
                inner.and_then(|a| self.expect_close(span).map(|_| a))
            }
            Some(Token { tok: Tok::True, span }) => {
                self.pos += 1;
                Ok(Activation::True(span))
            }
            Some(Token { tok: Tok::Ident(name), span }) => {
                self.pos += 1;
                Ok(Activation::Stream(Ident { name, span }))
            }
            Some(t) => Err(unexpected(&t, "an activation condition")),
            None => Err(self.eof_error("an activation condition")),
        };
        self.depth -= 1;
        result
    }

    fn count_operator(&mut self) -> PResult<()> {
        self.operators += 1;
        if self.operators > MAX_OPERATORS {
            return Err(Diagnostic::error(DiagnosticKind::UnexpectedToken, self.here(), "expression too long"));
        }
        Ok(())
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return Err(Diagnostic::error(
                DiagnosticKind::UnexpectedToken,
                self.here(),
                "expression nesting too deep",
            ));
        }
        Ok(())
    }

    pub fn expr(&mut self) -> PResult<SExpr> {
        if self.depth == 0 {
            self.operators = 0;
        }
        self.enter()?;
        let result = self.binary(1);
        self.depth -= 1;
        result
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek()? {
            Tok::OrOr | Tok::OrWord => BinOp::Or,
            Tok::AndAnd | Tok::AndWord => BinOp::And,
            Tok::Eq | Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    /// Left-associative binary operators with precedence >= `min`.
    fn binary(&mut self, min: u8) -> PResult<SExpr> {
        if min > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(min + 1)?;
        while let Some(op) = self.binop().filter(|op| op.precedence() == min) {
            self.count_operator()?;
            self.pos += 1;
            let rhs = self.binary(min + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = SExpr { kind: SExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<SExpr> {
        let op = match self.peek() {
            Some(Tok::Minus) => UnOp::Neg,
            Some(Tok::Bang) => UnOp::Not,
            _ => return self.power(),
        };
        let start = self.here();
        self.pos += 1;
        self.enter()?;
        let operand = self.unary();
        self.depth -= 1;
        let operand = operand?;
        let span = start.to(operand.span);
        Ok(SExpr { kind: SExprKind::Unary(op, Box::new(operand)), span })
    }

    fn power(&mut self) -> PResult<SExpr> {
        let base = self.postfix()?;
        if !self.eat(&Tok::StarStar) {
            return Ok(base);
        }
        self.count_operator()?;
        self.enter()?;
        let exp = self.unary();
        self.depth -= 1;
        let exp = exp?;
        let span = base.span.to(exp.span);
        Ok(SExpr { kind: SExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)), span })
    }

    fn postfix(&mut self) -> PResult<SExpr> {
        let mut e = self.primary()?;
        while self.peek() == Some(&Tok::Dot) {
            self.count_operator()?;
            self.pos += 1;
            match self.peek_token().cloned() {
                Some(Token { tok: Tok::Int(index), span }) => {
                    self.pos += 1;
                    let index: usize = index.parse().map_err(|_| {
                        Diagnostic::error(DiagnosticKind::UnexpectedToken, span, "tuple index too large")
                    })?;
                    let span = e.span.to(span);
                    e = SExpr { kind: SExprKind::Field(Box::new(e), index), span };
                }
                Some(Token { tok: Tok::Ident(name), span: name_span }) => {
                    self.pos += 1;
                    let open = self.expect(Tok::LParen, "`(` after method name")?;
                    let args = self.named_args(open)?;
                    let span = e.span.to(Span::new(self.prev_end(), self.prev_end()));
                    e = SExpr {
                        kind: SExprKind::Method { receiver: Box::new(e), name: Ident { name, span: name_span }, args },
                        span,
                    };
                }
                Some(t) => return Err(unexpected(&t, "a tuple index or method name")),
                None => return Err(self.eof_error("a tuple index or method name")),
            }
        }
        Ok(e)
    }

    fn named_args(&mut self, open: Span) -> PResult<Vec<NamedArg>> {
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let label = match (self.peek_token().cloned(), self.peek_at(1)) {
                    (Some(Token { tok: Tok::Ident(name), span }), Some(Tok::Colon)) => Some(Ident { name, span }),
                    (Some(Token { tok: Tok::OrWord, span }), Some(Tok::Colon)) => {
                        Some(Ident { name: "or".to_string(), span })
                    }
                    _ => None,
                };
                if label.is_some() {
                    self.pos += 2;
                }
                let value = self.expr()?;
                args.push(NamedArg { label, value });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect_close(open)?;
        Ok(args)
    }

    fn expr_list(&mut self, open: Span) -> PResult<Vec<SExpr>> {
        let mut items = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                items.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect_close(open)?;
        Ok(items)
    }

    fn primary(&mut self) -> PResult<SExpr> {
        let Some(t) = self.peek_token().cloned() else {
            return Err(self.eof_error("an expression"));
        };
        self.pos += 1;
        let leaf = |kind| Ok(SExpr { kind, span: t.span });
        match t.tok {
            Tok::Int(s) => leaf(SExprKind::Int(s)),
            Tok::Float(s) => leaf(SExprKind::Float(s)),
            Tok::Str(s) => leaf(SExprKind::Str(s)),
            Tok::True => leaf(SExprKind::Bool(true)),
            Tok::False => leaf(SExprKind::Bool(false)),
            Tok::Duration(v, u) => leaf(SExprKind::Duration(v, u)),
            Tok::If => {
                let cond = self.expr()?;
                self.expect(Tok::Then, "`then`")?;
                let then = self.expr()?;
                self.expect(Tok::Else, "`else`")?;
                let otherwise = self.expr()?;
                let span = t.span.to(otherwise.span);
                Ok(SExpr { kind: SExprKind::Ite(Box::new(cond), Box::new(then), Box::new(otherwise)), span })
            }
            Tok::LParen => {
                let items = self.expr_list(t.span)?;
                let span = t.span.to(Span::new(self.prev_end(), self.prev_end()));
                if items.len() == 1 {
                    let mut inner = items.into_iter().next().expect("one item");
                    inner.span = span;
                    Ok(inner)
                } else {
                    Ok(SExpr { kind: SExprKind::Tuple(items), span })
                }
            }
            Tok::Ident(name) => {
                let ident = Ident { name, span: t.span };
                let mut generics = Vec::new();
                if ident.name == "cast" && self.peek() == Some(&Tok::Lt) {
                    self.pos += 1;
                    loop {
                        generics.push(self.ty()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::Gt, "`>`")?;
                }
                if self.peek() == Some(&Tok::LParen) {
                    let open = self.expect(Tok::LParen, "`(`")?;
                    let args = self.expr_list(open)?;
                    let span = t.span.to(Span::new(self.prev_end(), self.prev_end()));
                    Ok(SExpr { kind: SExprKind::Call { name: ident, generics, args }, span })
                } else if !generics.is_empty() {
                    Err(match self.peek_token() {
                        Some(next) => unexpected(next, "`(` after generic arguments"),
                        None => self.eof_error("`(` after generic arguments"),
                    })
                } else {
                    leaf(SExprKind::Ident(ident.name))
                }
            }
            _ => Err(unexpected(&t, "an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_source_has_no_declarations() {
        assert_eq!(parse("").unwrap().decls.len(), 0);
        assert_eq!(parse("  // only a comment\n").unwrap().decls.len(), 0);
    }

    #[test]
    fn truncated_expression_reports_end_of_input() {
        let errs = parse("output a := ").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::UnexpectedEof);
    }

    #[test]
    fn unclosed_paren_is_unbalanced() {
        let errs = parse("output a := (1 + 2").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::Unbalanced);
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a || b && c = d + e * -f ** 2").unwrap();
        let SExprKind::Binary(BinOp::Or, _, rhs) = e.kind else { panic!() };
        let SExprKind::Binary(BinOp::And, _, rhs) = rhs.kind else { panic!() };
        let SExprKind::Binary(BinOp::Eq, _, rhs) = rhs.kind else { panic!() };
        let SExprKind::Binary(BinOp::Add, _, rhs) = rhs.kind else { panic!() };
        let SExprKind::Binary(BinOp::Mul, _, rhs) = rhs.kind else { panic!() };
        let SExprKind::Unary(UnOp::Neg, inner) = rhs.kind else { panic!() };
        assert!(matches!(inner.kind, SExprKind::Binary(BinOp::Pow, _, _)));
    }

    #[test]
    fn trigger_forms() {
        let spec = parse(
            "trigger(id) spawn with x eval @1Hz@ when x > 1 with \"m\"\n\
             trigger x > 3 \"too big\"\n\
             trigger @1Hz (x > 3)",
        )
        .unwrap();
        assert_eq!(spec.decls.len(), 3);
        let Decl::Trigger(t) = &spec.decls[0] else { panic!() };
        assert_eq!(t.params.len(), 1);
        let Decl::Trigger(t) = &spec.decls[1] else { panic!() };
        assert!(matches!(&t.body, TriggerBody::Condition { message: Some(m), .. } if m == "too big"));
    }

    #[test]
    fn statement_level_recovery_reports_each_bad_declaration() {
        let errs = parse("output a := \ninput b: Int\noutput c := )\n").unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn deep_nesting_is_rejected_not_a_crash() {
        let src = format!("output a := {}1{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse(&src).is_err());
        let src = format!("output a := {}1", "-".repeat(5000));
        assert!(parse(&src).is_err());
        let src = format!("output a := 1{}", " + 1".repeat(5000));
        assert!(parse(&src).is_err());
    }
}
