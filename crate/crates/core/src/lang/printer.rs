//! Canonical pretty-printer. Printing is the identity used for patch
//! deduplication, so it must be deterministic and reparse to the same tree.

use std::fmt::Write;

use super::ast::*;

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Var(v) => out.push_str(&v.name),
        ExprKind::Unary(op, x) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            let wrap = matches!(x.kind, ExprKind::Binary(..)) || matches!(x.kind, ExprKind::Int(v) if v < 0);
            write_wrapped(out, x, wrap);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let lwrap = child_prec(l).is_some_and(|c| c < p || (op.is_comparison() && c == p));
            let rwrap = child_prec(r).is_some_and(|c| c <= p);
            write_wrapped(out, l, lwrap);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_wrapped(out, r, rwrap);
        }
        ExprKind::Call(c) => {
            out.push_str(&c.name);
            out.push('(');
            for (i, a) in c.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

fn child_prec(e: &Expr) -> Option<u8> {
    match &e.kind {
        ExprKind::Binary(op, ..) => Some(op.precedence()),
        _ => None,
    }
}

fn write_wrapped(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, 0, None);
    out
}

/// One-line rendering of a statement's header (bodies elided), used in
/// reports and diagnostics.
pub fn stmt_header(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Assign { target, value } => format!("{} = {};", target.name, expr_to_string(value)),
        StmtKind::If { cond, .. } => format!("if ({}) {{ ... }}", expr_to_string(cond)),
        StmtKind::While { cond, .. } => format!("while ({}) {{ ... }}", expr_to_string(cond)),
        StmtKind::Return(e) => format!("return {};", expr_to_string(e)),
        StmtKind::Assert(e) => format!("assert({});", expr_to_string(e)),
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

/// Statement `id` printed as the `with` list, for printing a patch without
/// building it.
type Subst<'a> = Option<(NodeId, &'a [Stmt])>;

/// `body` with the substitution applied at this level, each statement
/// paired with the substitution its subtree still needs (none inside the
/// replacement, which may wrap the replaced statement itself).
fn expand<'a>(body: &'a [Stmt], sub: Subst<'a>) -> Vec<(&'a Stmt, Subst<'a>)> {
    let mut out = Vec::with_capacity(body.len());
    for s in body {
        match sub {
            Some((id, with)) if s.id == id => out.extend(with.iter().map(|w| (w, None))),
            _ => out.push((s, sub)),
        }
    }
    out
}

fn write_body(out: &mut String, body: &[Stmt], depth: usize, sub: Subst) {
    for (s, sub) in expand(body, sub) {
        write_stmt(out, s, depth, sub);
    }
}

fn write_line(out: &mut String, head: &str, e: &Expr, tail: &str) {
    out.push_str(head);
    write_expr(out, e);
    out.push_str(tail);
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize, sub: Subst) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            out.push_str(&target.name);
            write_line(out, " = ", value, ";\n");
        }
        StmtKind::Return(e) => write_line(out, "return ", e, ";\n"),
        StmtKind::Assert(e) => write_line(out, "assert(", e, ");\n"),
        StmtKind::While { cond, body } => {
            write_line(out, "while (", cond, ") {\n");
            write_body(out, body, depth + 1, sub);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::If { .. } => {
            write_if(out, s, depth, sub);
            out.push('\n');
        }
    }
}

// Writes an if-chain without the trailing newline; `else if` is sugar for an
// else block holding exactly one `if`.
fn write_if(out: &mut String, s: &Stmt, depth: usize, sub: Subst) {
    let StmtKind::If {
        cond,
        then_body,
        else_body,
    } = &s.kind
    else {
        unreachable!("write_if on non-if statement");
    };
    write_line(out, "if (", cond, ") {\n");
    write_body(out, then_body, depth + 1, sub);
    indent(out, depth);
    out.push('}');
    let else_body = expand(else_body, sub);
    match else_body.as_slice() {
        [] => {}
        [(
            nested @ Stmt {
                kind: StmtKind::If { .. },
                ..
            },
            sub,
        )] => {
            out.push_str(" else ");
            write_if(out, nested, depth, *sub);
        }
        list => {
            out.push_str(" else {\n");
            for (x, sub) in list {
                write_stmt(out, x, depth + 1, *sub);
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn write_function(f: &FunctionDef, sub: Subst) -> String {
    let mut out = String::with_capacity(512);
    let params: Vec<String> = f.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    let _ = writeln!(out, "fn {}({}) -> {} {{", f.name, params.join(", "), f.ret);
    for l in &f.locals {
        let _ = writeln!(out, "    var {}: {};", l.name, l.ty);
    }
    write_body(&mut out, &f.body, 1, sub);
    out.push_str("}\n");
    out
}

pub fn function_to_string(f: &FunctionDef) -> String {
    write_function(f, None)
}

/// Text of `f` with statement `stmt` replaced by `with`; equal to printing
/// the spliced function.
pub fn patched_function_to_string(f: &FunctionDef, stmt: NodeId, with: &[Stmt]) -> String {
    write_function(f, Some((stmt, with)))
}

pub fn program_to_string(functions: &[FunctionDef]) -> String {
    functions.iter().map(function_to_string).collect::<Vec<_>>().join("\n")
}
