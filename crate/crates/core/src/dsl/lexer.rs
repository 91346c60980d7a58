use super::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Bare word, possibly dotted (`a.b.out`). Keywords are contextual.
    Word(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eq,
    Tilde,
    Comma,
    Semi,
    Arrow,
    /// Lexing failed here; the payload describes what was seen.
    Bad(String),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Bad(s) => s.clone(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
    /// Line of the token's last character.
    pub end_line: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Comment {
    pub text: String,
    /// On the same line as the preceding token.
    pub trailing: bool,
}

pub(crate) struct Lexed {
    /// Always ends with an `Eof` token.
    pub tokens: Vec<Token>,
    /// `comments[i]` are the comments between token `i - 1` and token `i`.
    pub comments: Vec<Vec<Comment>>,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn lex(src: &str) -> Lexed {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, col: 1 };
    let mut tokens: Vec<Token> = Vec::new();
    let mut comments: Vec<Vec<Comment>> = vec![Vec::new()];
    let mut prev_end_line = 0usize;

    loop {
        while matches!(cur.peek(), Some(c) if c.is_whitespace()) {
            cur.bump();
        }
        let (line, col) = (cur.line, cur.col);
        let Some(c) = cur.peek() else { break };

        if c == '#' {
            cur.bump();
            let mut text = String::new();
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                text.push(c);
                cur.bump();
            }
            if text.ends_with('\r') {
                text.pop();
            }
            let text = text.strip_prefix(' ').map(str::to_owned).unwrap_or(text);
            let trailing = !tokens.is_empty() && prev_end_line == line;
            comments.last_mut().expect("slot").push(Comment { text, trailing });
            continue;
        }

        let tok = if c.is_ascii_alphabetic() || c == '_' {
            Tok::Word(lex_word(&mut cur))
        } else if c.is_ascii_digit() {
            lex_number(&mut cur, String::new())
        } else if c == '"' {
            lex_string(&mut cur)
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '=' => Tok::Eq,
                '~' => Tok::Tilde,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '-' => match cur.peek() {
                    Some('>') => {
                        cur.bump();
                        Tok::Arrow
                    }
                    Some(d) if d.is_ascii_digit() => lex_number(&mut cur, "-".into()),
                    _ => Tok::Bad("`-`".into()),
                },
                other => Tok::Bad(format!("character {other:?}")),
            }
        };
        let length = if cur.line == line { cur.col - col } else { 1 };
        prev_end_line = cur.line;
        tokens.push(Token { tok, span: SourceSpan { line, column: col, length }, end_line: cur.line });
        comments.push(Vec::new());
    }

    tokens.push(Token {
        tok: Tok::Eof,
        span: SourceSpan { line: cur.line, column: cur.col, length: 0 },
        end_line: cur.line,
    });
    Lexed { tokens, comments }
}

fn lex_word(cur: &mut Cursor<'_>) -> String {
    let mut word = String::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                word.push(c);
                cur.bump();
            } else {
                break;
            }
        }
        // a dot continues the word only when a segment follows
        if cur.peek() == Some('.') {
            let mut look = cur.chars.clone();
            look.next();
            if matches!(look.peek(), Some(c) if c.is_ascii_alphabetic() || *c == '_') {
                word.push('.');
                cur.bump();
                continue;
            }
        }
        return word;
    }
}

fn lex_number(cur: &mut Cursor<'_>, mut text: String) -> Tok {
    let digits = |cur: &mut Cursor<'_>, text: &mut String| {
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    };
    digits(cur, &mut text);
    if cur.peek() == Some('.') {
        text.push('.');
        cur.bump();
        digits(cur, &mut text);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        text.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            text.push(sign);
            cur.bump();
        }
        digits(cur, &mut text);
    }
    // swallow glued letters so `0.5x` is one bad token, not two
    let mut glued = false;
    while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '.') {
        text.push(cur.bump().expect("peeked"));
        glued = true;
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && !glued => Tok::Number(v),
        _ => Tok::Bad(format!("malformed number `{text}`")),
    }
}

fn lex_string(cur: &mut Cursor<'_>) -> Tok {
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.peek() {
            None | Some('\n') => return Tok::Bad("unterminated string".into()),
            Some('"') => {
                cur.bump();
                return Tok::Str(s);
            }
            Some('\\') => {
                cur.bump();
                match cur.peek() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    None | Some('\n') => return Tok::Bad("unterminated string".into()),
                    Some(other) => {
                        // consume the rest of the string to resynchronise
                        cur.bump();
                        while let Some(c) = cur.peek() {
                            if c == '\n' {
                                break;
                            }
                            cur.bump();
                            if c == '"' {
                                break;
                            }
                        }
                        return Tok::Bad(format!("unknown escape `\\{other}`"));
                    }
                }
                cur.bump();
            }
            Some(c) => {
                s.push(c);
                cur.bump();
            }
        }
    }
}
