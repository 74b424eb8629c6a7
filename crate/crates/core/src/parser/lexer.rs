use crate::diagnostic::{Diagnostic, DiagnosticKind, Span};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Float(String),
    /// A number immediately followed by a unit suffix, e.g. `10s`, `1Hz`.
    Duration(String, String),
    Str(String),
    // keywords
    Input,
    Output,
    Trigger,
    Constant,
    Import,
    Spawn,
    Eval,
    Close,
    When,
    With,
    If,
    Then,
    Else,
    True,
    False,
    AndWord,
    OrWord,
    // punctuation
    LParen,
    RParen,
    Comma,
    Colon,
    Assign,
    At,
    Dot,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Eq,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) | Tok::Float(s) => format!("number `{s}`"),
            Tok::Duration(v, u) => format!("duration `{v}{u}`"),
            Tok::Str(_) => "string literal".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Input => "input",
            Tok::Output => "output",
            Tok::Trigger => "trigger",
            Tok::Constant => "constant",
            Tok::Import => "import",
            Tok::Spawn => "spawn",
            Tok::Eval => "eval",
            Tok::Close => "close",
            Tok::When => "when",
            Tok::With => "with",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::True => "true",
            Tok::False => "false",
            Tok::AndWord => "and",
            Tok::OrWord => "or",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::At => "@",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::StarStar => "**",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "input" => Tok::Input,
        "output" => Tok::Output,
        "trigger" => Tok::Trigger,
        "constant" => Tok::Constant,
        "import" => Tok::Import,
        "spawn" => Tok::Spawn,
        "eval" => Tok::Eval,
        "close" => Tok::Close,
        "when" => Tok::When,
        "with" => Tok::With,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "true" => Tok::True,
        "false" => Tok::False,
        "and" => Tok::AndWord,
        "or" => Tok::OrWord,
        _ => return None,
    })
}

pub fn is_reserved(word: &str) -> bool {
    keyword(word).is_some()
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out: Vec<Token> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(Diagnostic::error(
                        DiagnosticKind::Unbalanced,
                        Span::new(start, start + 2),
                        "unterminated block comment",
                    ));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        if c.is_ascii_digit() {
            let after_dot = matches!(out.last(), Some(Token { tok: Tok::Dot, .. }));
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut float = false;
            if !after_dot
                && i + 1 < bytes.len()
                && bytes[i] == b'.'
                && bytes[i + 1].is_ascii_digit()
            {
                float = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if !after_dot && i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    float = true;
                    i = j;
                }
            }
            let number = src[start..i].to_string();
            if i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                let unit_start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let unit = src[unit_start..i].to_string();
                out.push(Token { tok: Tok::Duration(number, unit), span: Span::new(start, i) });
                continue;
            }
            let tok = if float { Tok::Float(number) } else { Tok::Int(number) };
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        if c == b'"' {
            i += 1;
            let mut value = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(Diagnostic::error(
                        DiagnosticKind::Unbalanced,
                        Span::new(start, start + 1),
                        "unterminated string literal",
                    ));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(esc) = src[i..].chars().next() else { continue };
                        i += esc.len_utf8();
                        value.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    other => value.push(other),
                }
            }
            out.push(Token { tok: Tok::Str(value), span: Span::new(start, i) });
            continue;
        }
        let two = bytes.get(i + 1).copied();
        let (tok, len) = match (c, two) {
            (b':', Some(b'=')) => (Tok::Assign, 2),
            (b'*', Some(b'*')) => (Tok::StarStar, 2),
            (b'&', Some(b'&')) => (Tok::AndAnd, 2),
            (b'|', Some(b'|')) => (Tok::OrOr, 2),
            (b'=', Some(b'=')) => (Tok::EqEq, 2),
            (b'!', Some(b'=')) => (Tok::Ne, 2),
            (b'<', Some(b'=')) => (Tok::Le, 2),
            (b'>', Some(b'=')) => (Tok::Ge, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b',', _) => (Tok::Comma, 1),
            (b':', _) => (Tok::Colon, 1),
            (b'@', _) => (Tok::At, 1),
            (b'.', _) => (Tok::Dot, 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'/', _) => (Tok::Slash, 1),
            (b'%', _) => (Tok::Percent, 1),
            (b'!', _) => (Tok::Bang, 1),
            (b'=', _) => (Tok::Eq, 1),
            (b'<', _) => (Tok::Lt, 1),
            (b'>', _) => (Tok::Gt, 1),
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::error(
                    DiagnosticKind::Lexical,
                    Span::new(i, i + ch.len_utf8()),
                    format!("unexpected character `{}`", ch.escape_debug()),
                ));
            }
        };
        out.push(Token { tok, span: Span::new(i, i + len) });
        i += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn projection_after_dot_is_an_integer() {
        assert_eq!(
            kinds("x.hold().0.defaults"),
            vec![
                Tok::Ident("x".into()),
                Tok::Dot,
                Tok::Ident("hold".into()),
                Tok::LParen,
                Tok::RParen,
                Tok::Dot,
                Tok::Int("0".into()),
                Tok::Dot,
                Tok::Ident("defaults".into()),
            ]
        );
    }

    #[test]
    fn numbers_and_units() {
        assert_eq!(kinds("1Hz 200ms 2.5 1e-7"), vec![
            Tok::Duration("1".into(), "Hz".into()),
            Tok::Duration("200".into(), "ms".into()),
            Tok::Float("2.5".into()),
            Tok::Float("1e-7".into()),
        ]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(kinds("/// doc\ninput // x\n/* y */ a"), vec![Tok::Input, Tok::Ident("a".into())]);
    }

    #[test]
    fn stray_character_is_lexical_error() {
        let err = tokenize("output a := #").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Lexical);
        assert_eq!(err.span.start, 12);
    }
}
