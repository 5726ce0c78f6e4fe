//! S-expression reader with source positions. `;` starts a line comment.

use super::PddlError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom {
        text: String,
        line: usize,
        col: usize,
    },
    List {
        items: Vec<Sexpr>,
        line: usize,
        col: usize,
    },
}

impl Sexpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexpr::Atom { line, col, .. } | Sexpr::List { line, col, .. } => (*line, *col),
        }
    }

    /// Lowercased atom text.
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Atom { .. } => None,
        }
    }

    /// Head keyword of a list, if its first element is an atom.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexpr::atom)
    }

    pub fn error(&self, msg: impl Into<String>) -> PddlError {
        let (line, col) = self.pos();
        PddlError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Parses exactly one top-level expression.
pub fn parse_one(text: &str) -> Result<Sexpr, PddlError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("length checked")),
        0 => Err(PddlError::Syntax {
            line: 1,
            col: 1,
            msg: "empty input".into(),
        }),
        _ => Err(all[1].error("unexpected trailing expression")),
    }
}

pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, PddlError> {
    let mut stack: Vec<(Vec<Sexpr>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                let Some((items, l, c0)) = stack.pop() else {
                    return Err(PddlError::Syntax {
                        line,
                        col,
                        msg: "unbalanced ')'".into(),
                    });
                };
                col += 1;
                let node = Sexpr::List {
                    items,
                    line: l,
                    col: c0,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let (l, c0) = (line, col);
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                let node = Sexpr::Atom {
                    text,
                    line: l,
                    col: c0,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.pop() {
        return Err(PddlError::Syntax {
            line: l,
            col: c,
            msg: "unclosed '('".into(),
        });
    }
    Ok(top)
}
