use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Byte range into the specification source.
///
/// Spans are carried for reporting only: two spans always compare equal so
/// that derived equality on syntax trees is purely structural.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Span) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Span {
    fn cmp(&self, _: &Span) -> Ordering {
        Ordering::Equal
    }
}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Lexical,
    UnexpectedToken,
    UnexpectedEof,
    Unbalanced,
    UnknownStream,
    DuplicateName,
    ArityMismatch,
    ParamIndexOutOfRange,
    InvalidDeclaration,
    TypeMismatch,
    UnresolvedType,
    UnknownFunction,
    PacingMismatch,
    UnderspecifiedPacing,
    LocalSyncViolation,
    SemanticRefinementMismatch,
    ParameterMismatch,
    NonParameterSyncArgument,
    IllFormedCycle,
}

impl DiagnosticKind {
    pub fn code(self) -> &'static str {
        match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::UnexpectedToken => "unexpected-token",
            DiagnosticKind::UnexpectedEof => "unexpected-eof",
            DiagnosticKind::Unbalanced => "unbalanced",
            DiagnosticKind::UnknownStream => "unknown-stream",
            DiagnosticKind::DuplicateName => "duplicate-name",
            DiagnosticKind::ArityMismatch => "arity-mismatch",
            DiagnosticKind::ParamIndexOutOfRange => "param-index",
            DiagnosticKind::InvalidDeclaration => "invalid-declaration",
            DiagnosticKind::TypeMismatch => "type-mismatch",
            DiagnosticKind::UnresolvedType => "unresolved-type",
            DiagnosticKind::UnknownFunction => "unknown-function",
            DiagnosticKind::PacingMismatch => "pacing-mismatch",
            DiagnosticKind::UnderspecifiedPacing => "underspecified-pacing",
            DiagnosticKind::LocalSyncViolation => "local-sync",
            DiagnosticKind::SemanticRefinementMismatch => "semantic-mismatch",
            DiagnosticKind::ParameterMismatch => "parameter-mismatch",
            DiagnosticKind::NonParameterSyncArgument => "non-parameter-sync",
            DiagnosticKind::IllFormedCycle => "ill-formed-cycle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: Span,
    pub note: Option<String>,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            kind,
            message: message.into(),
            span,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Diagnostic {
        self.note = Some(note.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders the diagnostic with a source excerpt and caret underline.
    pub fn render(&self, source: &str, path: &str) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let (line, col) = line_col(source, self.span.start);
        let mut out = format!("{sev}[{}]: {}\n  --> {path}:{line}:{col}\n", self.kind.code(), self.message);
        if let Some(text) = source.lines().nth(line - 1) {
            let width = self
                .span
                .end
                .saturating_sub(self.span.start)
                .clamp(1, text.len().saturating_sub(col - 1).max(1));
            out.push_str(&format!("   | {text}\n   | {}{}\n", " ".repeat(col - 1), "^".repeat(width)));
        }
        if let Some(note) = &self.note {
            out.push_str(&format!("   = note: {note}\n"));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.code(), self.message)
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..floor_char_boundary(source, offset)];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Sorts diagnostics by source position, keeping emission order for ties.
pub fn sort_by_position(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.span.start, d.span.end));
}
