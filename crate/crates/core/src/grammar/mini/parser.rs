use super::lexer::{tokenize, LineIndex, Token, TokenKind, TYPE_KEYWORDS};
use crate::ast::{AstNode, NodeId, SourceTree, Span};
use crate::error::ParseError;
use crate::grammar::GrammarDescriptor;

/// Parse result before ids are assigned.
struct Raw {
    prod: &'static str,
    start: usize,
    end: usize,
    children: Vec<Raw>,
}

impl Raw {
    fn leaf(prod: &'static str, tok: Token) -> Self {
        Raw {
            prod,
            start: tok.start,
            end: tok.end,
            children: Vec::new(),
        }
    }

    fn wrap(prod: &'static str, children: Vec<Raw>) -> Self {
        let start = children.first().map_or(0, |c| c.start);
        let end = children.last().map_or(0, |c| c.end);
        Raw {
            prod,
            start,
            end,
            children,
        }
    }
}

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", "<=", ">", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn text(&self, tok: Token) -> &'a str {
        &self.src[tok.start..tok.end]
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn peek_text(&self) -> Option<&'a str> {
        self.peek().map(|t| self.text(t))
    }

    fn peek_nth_text(&self, n: usize) -> Option<&'a str> {
        self.tokens.get(self.pos + n).map(|t| self.text(*t))
    }

    fn at(&self, s: &str) -> bool {
        self.peek_text() == Some(s)
    }

    fn bump(&mut self) -> PResult<Token> {
        let tok = self.peek().ok_or_else(|| self.error_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, s: &str) -> PResult<Token> {
        if self.at(s) {
            self.bump()
        } else {
            let found = self.peek_text().unwrap_or("end of input");
            Err(self.error_here(&format!("expected '{s}', found '{found}'")))
        }
    }

    fn error_here(&self, msg: &str) -> ParseError {
        let at = self.peek().map_or(self.src.len(), |t| t.start);
        let (line, col) = LineIndex::new(self.src).position(at);
        ParseError::new(line, col, msg)
    }

    fn ident(&mut self) -> PResult<Raw> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok(Raw::leaf("name", t))
            }
            _ => Err(self.error_here("expected identifier")),
        }
    }

    fn is_type(&self) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&self.text(t)))
    }

    fn ty(&mut self) -> PResult<Raw> {
        if self.is_type() {
            let t = self.bump()?;
            Ok(Raw::leaf("type", t))
        } else {
            Err(self.error_here("expected a type"))
        }
    }

    fn program(&mut self) -> PResult<Raw> {
        let mut methods = Vec::new();
        while self.peek().is_some() {
            methods.push(self.method()?);
        }
        Ok(Raw {
            prod: "program",
            start: 0,
            end: self.src.len(),
            children: methods,
        })
    }

    fn method(&mut self) -> PResult<Raw> {
        let mut children = vec![self.ty()?, self.ident()?];
        self.expect("(")?;
        if !self.at(")") {
            loop {
                let param = Raw::wrap("parameter", vec![self.ty()?, self.ident()?]);
                children.push(param);
                if self.at(",") {
                    self.bump()?;
                } else {
                    break;
                }
            }
        }
        self.expect(")")?;
        children.push(self.block()?);
        Ok(Raw::wrap("method", children))
    }

    fn block(&mut self) -> PResult<Raw> {
        let open = self.expect("{")?;
        let mut children = Vec::new();
        while !self.at("}") {
            if self.peek().is_none() {
                return Err(self.error_here("expected '}', found end of input"));
            }
            children.push(self.statement()?);
        }
        let close = self.bump()?;
        Ok(Raw {
            prod: "block",
            start: open.start,
            end: close.end,
            children,
        })
    }

    fn statement(&mut self) -> PResult<Raw> {
        let first = self.peek().ok_or_else(|| self.error_here("expected statement"))?;
        match self.text(first) {
            "{" => self.block(),
            "if" => {
                self.bump()?;
                self.expect("(")?;
                let mut children = vec![self.expression()?];
                self.expect(")")?;
                children.push(self.statement()?);
                if self.at("else") {
                    self.bump()?;
                    children.push(self.statement()?);
                }
                let end = children.last().map_or(first.end, |c| c.end);
                Ok(Raw {
                    prod: "if",
                    start: first.start,
                    end,
                    children,
                })
            }
            "while" => {
                self.bump()?;
                self.expect("(")?;
                let cond = self.expression()?;
                self.expect(")")?;
                let body = self.statement()?;
                Ok(Raw {
                    prod: "while",
                    start: first.start,
                    end: body.end,
                    children: vec![cond, body],
                })
            }
            "return" => {
                self.bump()?;
                let mut children = Vec::new();
                if !self.at(";") {
                    children.push(self.expression()?);
                }
                let semi = self.expect(";")?;
                Ok(Raw {
                    prod: "return",
                    start: first.start,
                    end: semi.end,
                    children,
                })
            }
            _ if self.is_type() => {
                let mut children = vec![self.ty()?, self.ident()?];
                if self.at("=") {
                    self.bump()?;
                    children.push(self.expression()?);
                }
                let semi = self.expect(";")?;
                Ok(Raw {
                    prod: "declaration",
                    start: first.start,
                    end: semi.end,
                    children,
                })
            }
            _ => {
                let expr = self.expression()?;
                let semi = self.expect(";")?;
                Ok(Raw {
                    prod: "expression_statement",
                    start: expr.start,
                    end: semi.end,
                    children: vec![expr],
                })
            }
        }
    }

    fn expression(&mut self) -> PResult<Raw> {
        let is_assign = matches!(self.peek(), Some(t) if t.kind == TokenKind::Ident)
            && self.peek_nth_text(1).is_some_and(|op| ASSIGN_OPS.contains(&op));
        if is_assign {
            let target = self.ident()?;
            self.bump()?;
            let value = self.expression()?;
            return Ok(Raw::wrap("assignment", vec![target, value]));
        }
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<Raw> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut left = self.binary(level + 1)?;
        while self.peek_text().is_some_and(|t| BINARY_LEVELS[level].contains(&t)) {
            self.bump()?;
            let right = self.binary(level + 1)?;
            left = Raw::wrap("infix", vec![left, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Raw> {
        if self.at("-") || self.at("!") {
            let op = self.bump()?;
            let operand = self.unary()?;
            return Ok(Raw {
                prod: "prefix",
                start: op.start,
                end: operand.end,
                children: vec![operand],
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Raw> {
        let tok = self.peek().ok_or_else(|| self.error_here("expected expression"))?;
        match tok.kind {
            TokenKind::Number => {
                self.bump()?;
                Ok(Raw::leaf("number", tok))
            }
            TokenKind::Str => {
                self.bump()?;
                Ok(Raw::leaf("string", tok))
            }
            TokenKind::Keyword if matches!(self.text(tok), "true" | "false") => {
                self.bump()?;
                Ok(Raw::leaf("boolean", tok))
            }
            TokenKind::Ident if self.peek_nth_text(1) == Some("(") => {
                let mut children = vec![self.ident()?];
                self.bump()?;
                if !self.at(")") {
                    loop {
                        children.push(self.expression()?);
                        if self.at(",") {
                            self.bump()?;
                        } else {
                            break;
                        }
                    }
                }
                let close = self.expect(")")?;
                Ok(Raw {
                    prod: "call",
                    start: tok.start,
                    end: close.end,
                    children,
                })
            }
            TokenKind::Ident => self.ident(),
            TokenKind::Punct if self.text(tok) == "(" => {
                self.bump()?;
                let inner = self.expression()?;
                let close = self.expect(")")?;
                Ok(Raw {
                    prod: "parenthesized",
                    start: tok.start,
                    end: close.end,
                    children: vec![inner],
                })
            }
            _ => Err(self.error_here(&format!("unexpected '{}'", self.text(tok)))),
        }
    }
}

pub fn parse(source: &str, grammar: &GrammarDescriptor) -> Result<SourceTree, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::new(0, 0, "empty input"));
    }
    let mut parser = Parser {
        src: source,
        tokens: tokenize(source)?,
        pos: 0,
    };
    let raw = parser.program()?;

    let index = LineIndex::new(source);
    let mut nodes = Vec::new();
    flatten(raw, None, source, grammar, &index, &mut nodes);
    Ok(SourceTree {
        root: NodeId(0),
        nodes,
        source: source.to_owned(),
        grammar_id: grammar.id.clone(),
    })
}

fn flatten(
    raw: Raw,
    parent: Option<NodeId>,
    source: &str,
    grammar: &GrammarDescriptor,
    index: &LineIndex<'_>,
    nodes: &mut Vec<AstNode>,
) -> NodeId {
    let id = NodeId(nodes.len());
    let (start_line, start_col) = index.position(raw.start);
    let (end_line, end_col) = if raw.end > raw.start {
        // Position of the last char, then one past it.
        let last = source[..raw.end].char_indices().last().map_or(0, |(i, _)| i);
        let (l, c) = index.position(last);
        (l, c + 1)
    } else {
        (start_line, start_col)
    };
    let kind = grammar.kind(raw.prod).to_owned();
    nodes.push(AstNode {
        id,
        category: grammar.category(&kind),
        kind,
        span: Span {
            start_line,
            start_col,
            end_line,
            end_col,
            start_byte: raw.start,
            end_byte: raw.end,
        },
        parent,
        children: Vec::new(),
        text: source[raw.start..raw.end].to_owned(),
    });
    for child in raw.children {
        let cid = flatten(child, Some(id), source, grammar, index, nodes);
        nodes[id.0].children.push(cid);
    }
    id
}
