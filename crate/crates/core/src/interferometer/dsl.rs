//! Line-oriented layout language.
//!
//! ```text
//! # comment
//! source S
//! splitter BS1 t=1/sqrt(3)
//! mirror E symbol=E phase=0 freq=38 tilt=0.05
//! phase P1 phase=pi/2
//! detector D
//! S -> BS1
//! BS1:1 -> E          # output port 1 of BS1
//! E -> BS2:0          # input port 0 of BS2
//! ```
//!
//! Numeric values accept decimal literals, `pi`, `sqrt(..)`, unary minus,
//! `*`, `/` and parentheses.

use super::{validate_params, Element, ElementKind, GraphBuilder, InterferometerGraph, LayoutError, Mirror};

/// Parse layout text into a validated graph.
pub fn parse_layout(text: &str) -> Result<InterferometerGraph, LayoutError> {
    let mut builder = GraphBuilder::default();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(content);
        if let Some(arrow) = tokens.iter().position(|t| t.text == "->") {
            parse_edge(&tokens, arrow, line_no, &mut builder)?;
        } else {
            let element = parse_declaration(&tokens, line_no)?;
            validate_params(&element)
                .map_err(|e| syntax(line_no, tokens.get(1).map_or(1, |t| t.column), e.to_string()))?;
            builder.element(element)?;
        }
    }
    builder.build()
}

#[derive(Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    // `A->B` without spaces
    let mut split = Vec::with_capacity(out.len());
    for t in out {
        match t.text.find("->") {
            Some(i) if t.text.len() > 2 => {
                if i > 0 {
                    split.push(Token {
                        text: &t.text[..i],
                        column: t.column,
                    });
                }
                split.push(Token {
                    text: &t.text[i..i + 2],
                    column: t.column + i,
                });
                if i + 2 < t.text.len() {
                    split.push(Token {
                        text: &t.text[i + 2..],
                        column: t.column + i + 2,
                    });
                }
            }
            _ => split.push(t),
        }
    }
    split
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> LayoutError {
    LayoutError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_endpoint(tok: &Token<'_>, line: usize) -> Result<(String, Option<u8>), LayoutError> {
    let (label, port) = match tok.text.split_once(':') {
        Some((l, p)) => (l, Some(p)),
        None => (tok.text, None),
    };
    if !is_identifier(label) {
        return Err(syntax(line, tok.column, format!("invalid element label `{label}`")));
    }
    let port = match port {
        None => None,
        Some(p) => Some(
            p.parse::<u8>()
                .map_err(|_| syntax(line, tok.column + label.len() + 1, format!("invalid port `{p}`")))?,
        ),
    };
    Ok((label.to_string(), port))
}

fn parse_edge(tokens: &[Token<'_>], arrow: usize, line: usize, builder: &mut GraphBuilder) -> Result<(), LayoutError> {
    if arrow != 1 || tokens.len() != 3 {
        let column = tokens.get(arrow).map_or(1, |t| t.column);
        return Err(syntax(line, column, "edges have the form `FROM[:port] -> TO[:port]`"));
    }
    let (from, from_port) = parse_endpoint(&tokens[0], line)?;
    let (to, to_port) = parse_endpoint(&tokens[2], line)?;
    builder.edge(from, from_port, to, to_port, Some(line));
    Ok(())
}

fn parse_declaration(tokens: &[Token<'_>], line: usize) -> Result<Element, LayoutError> {
    let kind_tok = &tokens[0];
    let Some(label_tok) = tokens.get(1) else {
        return Err(syntax(
            line,
            kind_tok.column + kind_tok.text.len(),
            "missing element label",
        ));
    };
    if !is_identifier(label_tok.text) {
        return Err(syntax(
            line,
            label_tok.column,
            format!("invalid element label `{}`", label_tok.text),
        ));
    }

    let mut params = Vec::new();
    for tok in &tokens[2..] {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(syntax(
                line,
                tok.column,
                format!("expected key=value, found `{}`", tok.text),
            ));
        };
        if params.iter().any(|(k, _, _)| *k == key) {
            return Err(syntax(line, tok.column, format!("parameter `{key}` given twice")));
        }
        params.push((key, value, tok.column + key.len() + 1));
    }
    let allowed: &[&str] = match kind_tok.text {
        "source" | "detector" => &[],
        "splitter" | "bs" => &["t"],
        "mirror" => &["symbol", "phase", "freq", "tilt"],
        "phase" => &["phase"],
        other => {
            return Err(syntax(
                line,
                kind_tok.column,
                format!("unknown element kind `{other}` (expected source, splitter, mirror, phase, detector)"),
            ))
        }
    };
    for (key, _, column) in &params {
        if !allowed.contains(key) {
            return Err(syntax(
                line,
                column - key.len() - 1,
                format!("`{}` does not take parameter `{key}`", kind_tok.text),
            ));
        }
    }
    let number = |key: &str| -> Result<Option<f64>, LayoutError> {
        match params.iter().find(|(k, _, _)| *k == key) {
            None => Ok(None),
            Some((_, v, column)) => eval_number(v)
                .map(Some)
                .map_err(|(offset, msg)| syntax(line, column + offset, msg)),
        }
    };

    let kind = match kind_tok.text {
        "source" => ElementKind::Source,
        "detector" => ElementKind::Detector,
        "splitter" | "bs" => {
            let t = number("t")?
                .ok_or_else(|| syntax(line, label_tok.column, "splitter requires t=<transmission amplitude>"))?;
            ElementKind::BeamSplitter { t }
        }
        "mirror" => {
            let symbol = match params.iter().find(|(k, _, _)| *k == "symbol") {
                None => None,
                Some((_, v, column)) => Some(v.parse::<Mirror>().map_err(|e| syntax(line, *column, e.to_string()))?),
            };
            ElementKind::Mirror {
                symbol,
                phase: number("phase")?.unwrap_or(0.0),
                frequency: number("freq")?,
                tilt: number("tilt")?,
            }
        }
        "phase" => ElementKind::PhaseShifter {
            phase: number("phase")?
                .ok_or_else(|| syntax(line, label_tok.column, "phase shifter requires phase=<radians>"))?,
        },
        _ => unreachable!(),
    };
    Ok(Element::new(label_tok.text, kind))
}

/// Evaluates a numeric parameter. Errors carry a 0-based offset into `src`.
fn eval_number(src: &str) -> Result<f64, (usize, String)> {
    let mut p = ExprParser { src, pos: 0 };
    let v = p.expr()?;
    if p.pos != src.len() {
        return Err((p.pos, format!("unexpected `{}`", &src[p.pos..])));
    }
    if !v.is_finite() {
        return Err((0, format!("`{src}` is not a finite number")));
    }
    Ok(v)
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, (usize, String)> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, (usize, String)> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, (usize, String)> {
        let rest = &self.src[self.pos..];
        if rest.starts_with('(') {
            self.pos += 1;
            let v = self.expr()?;
            self.expect(b')')?;
            return Ok(v);
        }
        if rest.starts_with("pi") {
            self.pos += 2;
            return Ok(std::f64::consts::PI);
        }
        if rest.starts_with("sqrt(") {
            self.pos += 5;
            let v = self.expr()?;
            self.expect(b')')?;
            return Ok(v.sqrt());
        }
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| {
                c.is_ascii_digit()
                    || c == '.'
                    || ((c == 'e' || c == 'E') && i > 0)
                    || ((c == '-' || c == '+') && i > 0 && matches!(rest.as_bytes()[i - 1], b'e' | b'E'))
            })
            .count();
        if len == 0 {
            return Err((self.pos, format!("expected a number, found `{rest}`")));
        }
        let v = rest[..len]
            .parse::<f64>()
            .map_err(|_| (self.pos, format!("invalid number `{}`", &rest[..len])))?;
        self.pos += len;
        Ok(v)
    }

    fn expect(&mut self, c: u8) -> Result<(), (usize, String)> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err((self.pos, format!("expected `{}`", c as char)))
        }
    }
}
