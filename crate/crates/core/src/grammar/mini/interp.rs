//! Tree-walking interpreter for the mini-language with line-coverage recording.
//!
//! Programs read whitespace-separated values from stdin through `read_int`,
//! `read_float` and `read_string`, and write through `print`, which joins its
//! arguments with single spaces and ends the line. Execution starts at `main`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use crate::ast::{Category, NodeId, SourceTree};
use crate::grammar::{ExecLimits, ExecStatus, Execution, GrammarDescriptor};

const MAX_CALL_DEPTH: usize = 128;
const MAX_OUTPUT_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Float,
    Str,
    Bool,
    Void,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Void,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Void => f.write_str("void"),
        }
    }
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::Bool(_) => "bool",
            Value::Void => "void",
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    fn parse(s: &str) -> Option<BinOp> {
        Some(match s {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }
}

/// Per-node instruction, resolved once per program from kinds and operator text.
#[derive(Debug, Clone)]
enum Op {
    Structural,
    Block,
    If,
    While,
    Return,
    Decl(Ty),
    ExprStmt,
    Assign(Option<BinOp>),
    Infix(BinOp),
    Neg,
    Not,
    Call,
    Name,
    Literal(Value),
    Paren,
    Invalid(String),
}

fn parse_ty(s: &str) -> Option<Ty> {
    Some(match s {
        "int" => Ty::Int,
        "float" => Ty::Float,
        "string" => Ty::Str,
        "bool" => Ty::Bool,
        "void" => Ty::Void,
        _ => return None,
    })
}

fn gap(tree: &SourceTree, from: usize, to: usize) -> &str {
    tree.source.get(from..to).unwrap_or("").trim()
}

fn compile(tree: &SourceTree, grammar: &GrammarDescriptor) -> Vec<Op> {
    tree.iter()
        .map(|node| {
            let child = |i: usize| node.children.get(i).map(|c| tree.node(*c));
            match grammar.production_of(&node.kind) {
                Some("program" | "method" | "parameter" | "type") => Op::Structural,
                Some("block") => Op::Block,
                Some("if") => Op::If,
                Some("while") => Op::While,
                Some("return") => Op::Return,
                Some("declaration") => match child(0).and_then(|t| parse_ty(&t.text)) {
                    Some(Ty::Void) | None => Op::Invalid("invalid declaration type".into()),
                    Some(ty) => Op::Decl(ty),
                },
                Some("expression_statement") => Op::ExprStmt,
                Some("assignment") => match (child(0), child(1)) {
                    (Some(l), Some(r)) => {
                        let op = gap(tree, l.span.end_byte, r.span.start_byte);
                        match op {
                            "=" => Op::Assign(None),
                            _ => match BinOp::parse(op.trim_end_matches('=')) {
                                Some(b) => Op::Assign(Some(b)),
                                None => Op::Invalid(format!("unknown assignment operator '{op}'")),
                            },
                        }
                    }
                    _ => Op::Invalid("malformed assignment".into()),
                },
                Some("infix") => match (child(0), child(1)) {
                    (Some(l), Some(r)) => {
                        let op = gap(tree, l.span.end_byte, r.span.start_byte);
                        BinOp::parse(op)
                            .map(Op::Infix)
                            .unwrap_or_else(|| Op::Invalid(format!("unknown operator '{op}'")))
                    }
                    _ => Op::Invalid("malformed infix expression".into()),
                },
                Some("prefix") => match child(0) {
                    Some(c) => match gap(tree, node.span.start_byte, c.span.start_byte) {
                        "-" => Op::Neg,
                        "!" => Op::Not,
                        other => Op::Invalid(format!("unknown prefix operator '{other}'")),
                    },
                    None => Op::Invalid("malformed prefix expression".into()),
                },
                Some("call") => Op::Call,
                Some("name") => Op::Name,
                Some("number") => {
                    if node.text.contains('.') {
                        node.text
                            .parse()
                            .map(|v| Op::Literal(Value::Float(v)))
                            .unwrap_or_else(|_| Op::Invalid("bad float literal".into()))
                    } else {
                        node.text
                            .parse()
                            .map(|v| Op::Literal(Value::Int(v)))
                            .unwrap_or_else(|_| Op::Invalid("integer literal out of range".into()))
                    }
                }
                Some("string") => Op::Literal(Value::Str(super::lexer::unescape(&node.text))),
                Some("boolean") => Op::Literal(Value::Bool(node.text == "true")),
                Some("parenthesized") => Op::Paren,
                _ => Op::Invalid(format!("no semantics for kind {}", node.kind)),
            }
        })
        .collect()
}

enum Halt {
    Error(String),
    Timeout,
}

type Eval<T> = Result<T, Halt>;

fn fail<T>(msg: impl Into<String>) -> Eval<T> {
    Err(Halt::Error(msg.into()))
}

enum Flow {
    Normal,
    Return(Value),
}

struct Frame {
    vars: HashMap<String, (Ty, Value)>,
}

struct Machine<'t> {
    tree: &'t SourceTree,
    ops: Vec<Op>,
    cover_line: Vec<Option<u32>>,
    functions: HashMap<&'t str, NodeId>,
    input: Vec<String>,
    input_pos: usize,
    out: String,
    covered: BTreeSet<u32>,
    steps: u64,
    limits: ExecLimits,
    started: Instant,
    depth: usize,
}

pub fn run(tree: &SourceTree, grammar: &GrammarDescriptor, stdin: &str, limits: &ExecLimits) -> Execution {
    let ops = compile(tree, grammar);
    let cover_line = tree
        .iter()
        .map(|n| {
            (n.category != Category::Other && n.kind != grammar.block_kind).then_some(n.span.start_line)
        })
        .collect();
    let mut functions = HashMap::new();
    for method in tree.root_node().children.iter().map(|&m| tree.node(m)) {
        if let Some(name) = method.children.get(1) {
            functions.entry(tree.node(*name).text.as_str()).or_insert(method.id);
        }
    }
    let mut machine = Machine {
        tree,
        ops,
        cover_line,
        functions,
        input: stdin.split_whitespace().map(str::to_owned).collect(),
        input_pos: 0,
        out: String::new(),
        covered: BTreeSet::new(),
        steps: 0,
        limits: *limits,
        started: Instant::now(),
        depth: 0,
    };
    let status = match machine.call_by_name("main", Vec::new()) {
        Ok(_) => ExecStatus::Completed,
        Err(Halt::Error(e)) => ExecStatus::RuntimeError(e),
        Err(Halt::Timeout) => ExecStatus::TimedOut,
    };
    Execution {
        stdout: machine.out,
        status,
        covered_lines: machine.covered,
    }
}

impl<'t> Machine<'t> {
    fn tick(&mut self, id: NodeId) -> Eval<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(Halt::Timeout);
        }
        if self.steps.is_multiple_of(1024) && self.started.elapsed() > self.limits.timeout {
            return Err(Halt::Timeout);
        }
        if let Some(line) = self.cover_line[id.0] {
            self.covered.insert(line);
        }
        Ok(())
    }

    fn children(&self, id: NodeId) -> &'t [NodeId] {
        &self.tree.node(id).children
    }

    fn call_by_name(&mut self, name: &str, args: Vec<Value>) -> Eval<Value> {
        let Some(&method) = self.functions.get(name) else {
            return self.builtin(name, args);
        };
        let kids = self.children(method);
        let ret_ty = parse_ty(&self.tree.node(kids[0]).text).unwrap_or(Ty::Void);
        let params = &kids[2..kids.len() - 1];
        let body = kids[kids.len() - 1];
        if params.len() != args.len() {
            return fail(format!("{name} expects {} arguments, got {}", params.len(), args.len()));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return fail("call depth exceeded");
        }
        let mut frame = Frame {
            vars: HashMap::new(),
        };
        for (&p, arg) in params.iter().zip(args) {
            let pk = self.children(p);
            let ty = parse_ty(&self.tree.node(pk[0]).text).unwrap_or(Ty::Void);
            let value = coerce(ty, arg)?;
            frame.vars.insert(self.tree.node(pk[1]).text.clone(), (ty, value));
        }
        self.depth += 1;
        let flow = self.exec(body, &mut frame);
        self.depth -= 1;
        let value = match flow? {
            Flow::Return(v) => v,
            Flow::Normal => Value::Void,
        };
        if ret_ty == Ty::Void {
            Ok(Value::Void)
        } else if value == Value::Void {
            fail(format!("{name} finished without returning a value"))
        } else {
            coerce(ret_ty, value)
        }
    }

    fn builtin(&mut self, name: &str, args: Vec<Value>) -> Eval<Value> {
        match (name, args.as_slice()) {
            ("print", _) => {
                let line: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                self.out.push_str(&line.join(" "));
                self.out.push('\n');
                if self.out.len() > MAX_OUTPUT_BYTES {
                    return fail("output limit exceeded");
                }
                Ok(Value::Void)
            }
            ("read_int", []) => {
                let tok = self.next_input()?;
                tok.parse().map(Value::Int).or_else(|_| fail(format!("read_int: bad input '{tok}'")))
            }
            ("read_float", []) => {
                let tok = self.next_input()?;
                tok.parse().map(Value::Float).or_else(|_| fail(format!("read_float: bad input '{tok}'")))
            }
            ("read_string", []) => Ok(Value::Str(self.next_input()?)),
            ("abs", [Value::Int(v)]) => v.checked_abs().map(Value::Int).ok_or(()).or_else(|_| fail("overflow")),
            ("abs", [Value::Float(v)]) => Ok(Value::Float(v.abs())),
            _ => fail(format!("no function {name} taking {} arguments", args.len())),
        }
    }

    fn next_input(&mut self) -> Eval<String> {
        let tok = self.input.get(self.input_pos).cloned();
        self.input_pos += 1;
        tok.ok_or(()).or_else(|_| fail("read past end of input"))
    }

    fn exec(&mut self, id: NodeId, frame: &mut Frame) -> Eval<Flow> {
        self.tick(id)?;
        let kids = self.children(id);
        match self.ops[id.0].clone() {
            Op::Block => {
                for &stmt in kids {
                    if let Flow::Return(v) = self.exec(stmt, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Op::If => {
                if self.condition(kids[0], frame)? {
                    self.exec(kids[1], frame)
                } else if let Some(&otherwise) = kids.get(2) {
                    self.exec(otherwise, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Op::While => {
                while self.condition(kids[0], frame)? {
                    if let Flow::Return(v) = self.exec(kids[1], frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Op::Return => {
                let value = match kids.first() {
                    Some(&e) => self.eval(e, frame)?,
                    None => Value::Void,
                };
                Ok(Flow::Return(value))
            }
            Op::Decl(ty) => {
                let name = self.tree.node(kids[1]).text.clone();
                let value = match kids.get(2) {
                    Some(&e) => coerce(ty, self.eval(e, frame)?)?,
                    None => default_value(ty),
                };
                frame.vars.insert(name, (ty, value));
                Ok(Flow::Normal)
            }
            Op::ExprStmt => {
                self.eval(kids[0], frame)?;
                Ok(Flow::Normal)
            }
            Op::Invalid(msg) => fail(msg),
            _ => fail(format!("{} is not a statement", self.tree.node(id).kind)),
        }
    }

    fn condition(&mut self, id: NodeId, frame: &mut Frame) -> Eval<bool> {
        match self.eval(id, frame)? {
            Value::Bool(b) => Ok(b),
            other => fail(format!("condition is {}, not bool", other.type_name())),
        }
    }

    fn eval(&mut self, id: NodeId, frame: &mut Frame) -> Eval<Value> {
        self.tick(id)?;
        let kids = self.children(id);
        match self.ops[id.0].clone() {
            Op::Literal(v) => Ok(v),
            Op::Name => {
                let name = &self.tree.node(id).text;
                match frame.vars.get(name) {
                    Some((_, v)) => Ok(v.clone()),
                    None => fail(format!("undefined variable {name}")),
                }
            }
            Op::Paren => self.eval(kids[0], frame),
            Op::Neg => match self.eval(kids[0], frame)? {
                Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(()).or_else(|_| fail("overflow")),
                Value::Float(v) => Ok(Value::Float(-v)),
                other => fail(format!("cannot negate {}", other.type_name())),
            },
            Op::Not => match self.eval(kids[0], frame)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => fail(format!("cannot apply ! to {}", other.type_name())),
            },
            Op::Infix(op @ (BinOp::And | BinOp::Or)) => {
                let left = self.condition(kids[0], frame)?;
                if (op == BinOp::And && !left) || (op == BinOp::Or && left) {
                    return Ok(Value::Bool(left));
                }
                Ok(Value::Bool(self.condition(kids[1], frame)?))
            }
            Op::Infix(op) => {
                let left = self.eval(kids[0], frame)?;
                let right = self.eval(kids[1], frame)?;
                binary(op, left, right)
            }
            Op::Assign(op) => {
                let target = self.tree.node(kids[0]);
                self.tick(target.id)?;
                let value = self.eval(kids[1], frame)?;
                let Some((ty, current)) = frame.vars.get(&target.text).cloned() else {
                    return fail(format!("assignment to undeclared variable {}", target.text));
                };
                let value = match op {
                    None => value,
                    Some(b) => binary(b, current, value)?,
                };
                let stored = coerce(ty, value)?;
                frame.vars.insert(target.text.clone(), (ty, stored.clone()));
                Ok(stored)
            }
            Op::Call => {
                let name = self.tree.node(kids[0]).text.clone();
                self.tick(kids[0])?;
                let mut args = Vec::with_capacity(kids.len() - 1);
                for &a in &kids[1..] {
                    args.push(self.eval(a, frame)?);
                }
                self.call_by_name(&name, args)
            }
            Op::Invalid(msg) => fail(msg),
            _ => fail(format!("{} is not an expression", self.tree.node(id).kind)),
        }
    }
}

fn default_value(ty: Ty) -> Value {
    match ty {
        Ty::Int => Value::Int(0),
        Ty::Float => Value::Float(0.0),
        Ty::Str => Value::Str(String::new()),
        Ty::Bool => Value::Bool(false),
        Ty::Void => Value::Void,
    }
}

fn coerce(ty: Ty, value: Value) -> Eval<Value> {
    match (ty, value) {
        (Ty::Int, v @ Value::Int(_))
        | (Ty::Float, v @ Value::Float(_))
        | (Ty::Str, v @ Value::Str(_))
        | (Ty::Bool, v @ Value::Bool(_)) => Ok(v),
        (Ty::Float, Value::Int(i)) => Ok(Value::Float(i as f64)),
        (ty, v) => fail(format!("cannot store {} in {ty:?} variable", v.type_name())),
    }
}

fn binary(op: BinOp, left: Value, right: Value) -> Eval<Value> {
    use BinOp::*;
    match (op, &left, &right) {
        (Add, Value::Str(a), b) => Ok(Value::Str(format!("{a}{b}"))),
        (Add, a, Value::Str(b)) => Ok(Value::Str(format!("{a}{b}"))),
        (Add | Sub | Mul | Div | Rem, Value::Int(a), Value::Int(b)) => {
            let (a, b) = (*a, *b);
            let r = match op {
                Add => a.checked_add(b),
                Sub => a.checked_sub(b),
                Mul => a.checked_mul(b),
                Div | Rem if b == 0 => return fail("division by zero"),
                Div => a.checked_div(b),
                _ => a.checked_rem(b),
            };
            r.map(Value::Int).ok_or(()).or_else(|_| fail("integer overflow"))
        }
        (Add | Sub | Mul | Div | Rem, a, b) => match (a.as_f64(), b.as_f64()) {
            (Some(a), Some(b)) => Ok(Value::Float(match op {
                Add => a + b,
                Sub => a - b,
                Mul => a * b,
                Div => a / b,
                _ => a % b,
            })),
            _ => fail(format!("cannot apply {op:?} to {} and {}", a.type_name(), b.type_name())),
        },
        (Eq | Ne | Lt | Le | Gt | Ge, a, b) => {
            let ord = match (a, b) {
                (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
                (Value::Bool(x), Value::Bool(y)) if matches!(op, Eq | Ne) => Some(x.cmp(y)),
                _ => match (a.as_f64(), b.as_f64()) {
                    (Some(x), Some(y)) => x.partial_cmp(&y),
                    _ => return fail(format!("cannot compare {} and {}", a.type_name(), b.type_name())),
                },
            };
            use std::cmp::Ordering::*;
            Ok(Value::Bool(match (op, ord) {
                (Ne, None) => true,
                (_, None) => false,
                (Eq, Some(o)) => o == Equal,
                (Ne, Some(o)) => o != Equal,
                (Lt, Some(o)) => o == Less,
                (Le, Some(o)) => o != Greater,
                (Gt, Some(o)) => o == Greater,
                (_, Some(o)) => o != Less,
            }))
        }
        (And | Or, _, _) => unreachable!("short-circuit operators are evaluated in place"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::mini::MiniGrammar;
    use crate::grammar::Grammar;

    fn exec(src: &str, stdin: &str) -> Execution {
        let g = MiniGrammar::new();
        let tree = g.parse(src).unwrap();
        run(&tree, g.descriptor(), stdin, &ExecLimits::default())
    }

    #[test]
    fn arithmetic_and_io() {
        let out = exec(
            "void main() { int a = read_int(); float b = read_float(); print(a * 2, b / 2, \"x\" + a); }",
            "21 5",
        );
        assert_eq!(out.status, ExecStatus::Completed);
        assert_eq!(out.stdout, "42 2.5 x21\n");
    }

    #[test]
    fn functions_recursion_and_loops() {
        let src = "int fact(int n) {\n if (n <= 1) { return 1; }\n return n * fact(n - 1);\n}\n\
                   void main() {\n int i = 0;\n while (i < 3) { print(fact(i + 3)); i += 1; }\n}\n";
        let out = exec(src, "");
        assert_eq!(out.stdout, "6\n24\n120\n");
    }

    #[test]
    fn infinite_loop_times_out() {
        let out = exec("void main() { while (true) { } }", "");
        assert_eq!(out.status, ExecStatus::TimedOut);
    }

    #[test]
    fn runaway_recursion_is_a_runtime_error() {
        let out = exec("int f(int n) { return f(n); }\nvoid main() { f(1); }", "");
        assert!(matches!(out.status, ExecStatus::RuntimeError(_)));
    }

    #[test]
    fn division_by_zero_and_type_errors() {
        assert!(matches!(exec("void main() { print(1 / 0); }", "").status, ExecStatus::RuntimeError(_)));
        assert!(matches!(exec("void main() { if (1) { } }", "").status, ExecStatus::RuntimeError(_)));
        assert!(matches!(exec("void main() { int x = 1.5; }", "").status, ExecStatus::RuntimeError(_)));
        assert!(matches!(exec("void main() { print(read_int()); }", "").status, ExecStatus::RuntimeError(_)));
    }

    #[test]
    fn records_executed_lines_only() {
        let src = "void main() {\n  int a = read_int();\n  if (a > 0) {\n    print(1);\n  } else {\n    print(2);\n  }\n}\n";
        let out = exec(src, "5");
        assert_eq!(out.covered_lines.into_iter().collect::<Vec<_>>(), [2, 3, 4]);
    }

    #[test]
    fn short_circuit_skips_right_operand() {
        let out = exec("void main() { int z = 0; if (z != 0 && 10 / z > 1) { print(1); } print(2); }", "");
        assert_eq!(out.stdout, "2\n");
    }
}
