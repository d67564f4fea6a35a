//! OpenQASM 2.0 subset emitter and parser.
//!
//! The emitted grammar covers named gates {h, s, sdg, t, tdg, x, z, cx, cz,
//! ch, rz, ry, u1}, indexed operands, `measure`/`reset`/`barrier`, and
//! whole-register conditionals `if(c==n) ...`. Sub-block boundaries are
//! emitted as structured comments (`// <gadget ...>` / `// </gadget>`) and
//! restored on parse, so emit -> parse -> emit is byte-identical and a
//! parsed-back program executes identically. Formatting is deterministic:
//! one statement per line, floats at 12 significant digits.

use std::fmt::Write as _;

use thiserror::Error;

use super::{BlockKind, BlockMeta, CBitRef, LogicalProgram, MeasBasis, QubitRef, Stmt};
use crate::sim::gates::Gate;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QasmError {
    #[error("line {line}, col {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("program failed validation: {0}")]
    Invalid(String),
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> QasmError {
    QasmError::Syntax { line, col, message: message.into() }
}

/// Fixed 12-significant-digit float form used for all emitted parameters.
pub fn format_angle(x: f64) -> String {
    format!("{:.11e}", x)
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Emit the program as OpenQASM 2.0 text. The program must validate.
pub fn emit_qasm(program: &LogicalProgram) -> Result<String, QasmError> {
    let diags = program.validate();
    if let Some(d) = diags.first() {
        return Err(QasmError::Invalid(d.to_string()));
    }
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    for r in &program.qregs {
        let _ = writeln!(out, "qreg {}[{}];", r.name, r.width);
    }
    for r in &program.cregs {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.width);
    }
    for s in &program.stmts {
        emit_stmt(program, s, None, &mut out);
    }
    Ok(out)
}

fn qubit_str(p: &LogicalProgram, q: QubitRef) -> String {
    format!("{}[{}]", p.qregs[q.reg].name, q.index)
}

fn cbit_str(p: &LogicalProgram, c: CBitRef) -> String {
    format!("{}[{}]", p.cregs[c.reg].name, c.index)
}

fn guard_prefix(p: &LogicalProgram, guard: Option<(usize, u64)>) -> String {
    match guard {
        Some((reg, value)) => format!("if({}=={}) ", p.cregs[reg].name, value),
        None => String::new(),
    }
}

fn emit_stmt(p: &LogicalProgram, s: &Stmt, guard: Option<(usize, u64)>, out: &mut String) {
    match s {
        Stmt::Gate { gate, qubits } => {
            let ops: Vec<String> = qubits.iter().map(|&q| qubit_str(p, q)).collect();
            let name = match gate.param() {
                Some(t) => format!("{}({})", gate.qasm_name(), format_angle(t)),
                None => gate.qasm_name().to_string(),
            };
            let _ = writeln!(out, "{}{} {};", guard_prefix(p, guard), name, ops.join(","));
        }
        Stmt::Measure { qubit, target } => {
            let _ = writeln!(
                out,
                "{}measure {} -> {};",
                guard_prefix(p, guard),
                qubit_str(p, *qubit),
                cbit_str(p, *target)
            );
        }
        Stmt::Reset { qubit } => {
            let _ = writeln!(out, "{}reset {};", guard_prefix(p, guard), qubit_str(p, *qubit));
        }
        Stmt::Barrier { qubits } => {
            let ops: Vec<String> = qubits.iter().map(|&q| qubit_str(p, q)).collect();
            let _ = writeln!(out, "{}barrier {};", guard_prefix(p, guard), ops.join(","));
        }
        Stmt::If { creg, value, body } => {
            // A conditional inside a guarded block carries its own condition;
            // builders guarantee it subsumes the block guard.
            emit_stmt(p, body, Some((*creg, *value)), out);
        }
        Stmt::Block { meta, stmts } => {
            let _ = writeln!(out, "// <gadget {}>", meta_attrs(p, meta));
            let inner_guard = meta.guard.or(guard);
            for s in stmts {
                emit_stmt(p, s, inner_guard, out);
            }
            out.push_str("// </gadget>\n");
        }
        Stmt::Comment(text) => {
            let _ = writeln!(out, "//{}", text);
        }
    }
}

fn meta_attrs(p: &LogicalProgram, meta: &BlockMeta) -> String {
    let qname = |r: usize| p.qregs[r].name.clone();
    let cname = |r: usize| p.cregs[r].name.clone();
    let cbit = |c: CBitRef| format!("{}[{}]", p.cregs[c.reg].name, c.index);
    let mut s = match &meta.kind {
        BlockKind::Encode { block, injection } => {
            format!("kind=encode block={} injection={}", qname(*block), u8::from(*injection))
        }
        BlockKind::RusInit { block, flag_reg } => {
            format!("kind=rus_init block={} flag={}", qname(*block), cname(*flag_reg))
        }
        BlockKind::TransversalCx { control, target } => {
            format!("kind=cx_t control={} target={}", qname(*control), qname(*target))
        }
        BlockKind::TransversalCz { a, b } => {
            format!("kind=cz_t a={} b={}", qname(*a), qname(*b))
        }
        BlockKind::MeasDecode { block, basis, bits, raw, log, syn, postselect } => format!(
            "kind=meas_decode block={} basis={} bits={} raw={} log={} syn={} postselect={}",
            qname(*block),
            match basis {
                MeasBasis::Z => "z",
                MeasBasis::X => "x",
            },
            cname(*bits),
            cbit(*raw),
            cbit(*log),
            cname(*syn),
            u8::from(*postselect)
        ),
        BlockKind::Teleport { method } => format!("kind=teleport method={method}"),
        BlockKind::RecursiveTeleport { k } => format!("kind=rec_teleport k={k}"),
        BlockKind::AncillaCp => "kind=ancilla_cp".to_string(),
        BlockKind::FlaggedHMeas { block } => format!("kind=flagged_h block={}", qname(*block)),
        BlockKind::TPrepRus { block, flag_reg } => {
            format!("kind=tprep_rus block={} flag={}", qname(*block), cname(*flag_reg))
        }
        BlockKind::Span { label } => format!("kind=span label={label}"),
    };
    if let Some((reg, value)) = meta.guard {
        let _ = write!(s, " guard={}=={}", cname(reg), value);
    }
    s
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

/// Parse OpenQASM 2.0 subset text back into a program.
pub fn parse_qasm(text: &str) -> Result<LogicalProgram, QasmError> {
    let mut lines = Lines { lines: text.lines().collect(), pos: 0 };
    let mut program = LogicalProgram::new("parsed");

    // Header.
    let (ln, header) = next_significant(&mut lines)
        .ok_or_else(|| syntax(1, 1, "expected OPENQASM 2.0"))?;
    if header.trim() != "OPENQASM 2.0;" {
        return Err(syntax(ln, 1, "expected OPENQASM 2.0"));
    }
    let (ln, inc) = next_significant(&mut lines)
        .ok_or_else(|| syntax(ln, 1, "expected include \"qelib1.inc\";"))?;
    if inc.trim() != "include \"qelib1.inc\";" {
        return Err(syntax(ln, 1, "expected include \"qelib1.inc\";"));
    }

    let mut block_stack: Vec<(BlockMeta, Vec<Stmt>)> = Vec::new();
    while let Some((ln, raw)) = next_line(&mut lines) {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        if let Some(comment) = trimmed.strip_prefix("//") {
            if let Some(attrs) = comment.trim().strip_prefix("<gadget ").and_then(|s| s.strip_suffix('>')) {
                let meta = parse_meta(&program, attrs, ln)?;
                block_stack.push((meta, Vec::new()));
            } else if comment.trim() == "</gadget>" {
                let (meta, stmts) = block_stack
                    .pop()
                    .ok_or_else(|| syntax(ln, 1, "unmatched gadget end marker"))?;
                push_stmt(&mut program, &mut block_stack, Stmt::Block { meta, stmts });
            } else {
                push_stmt(&mut program, &mut block_stack, Stmt::Comment(comment.to_string()));
            }
            continue;
        }
        let stmt = parse_statement(&mut program, trimmed, ln, effective_guard(&block_stack))?;
        if let Some(stmt) = stmt {
            push_stmt(&mut program, &mut block_stack, stmt);
        }
    }
    if !block_stack.is_empty() {
        return Err(syntax(lines.lines.len(), 1, "unterminated gadget block"));
    }
    let diags = program.validate();
    if let Some(d) = diags.first() {
        return Err(QasmError::Invalid(d.to_string()));
    }
    Ok(program)
}

fn effective_guard(stack: &[(BlockMeta, Vec<Stmt>)]) -> Option<(usize, u64)> {
    stack.iter().rev().find_map(|(m, _)| m.guard)
}

fn push_stmt(
    program: &mut LogicalProgram,
    stack: &mut Vec<(BlockMeta, Vec<Stmt>)>,
    stmt: Stmt,
) {
    match stack.last_mut() {
        Some((_, stmts)) => stmts.push(stmt),
        None => program.stmts.push(stmt),
    }
}

fn next_line<'a>(lines: &mut Lines<'a>) -> Option<(usize, &'a str)> {
    if lines.pos < lines.lines.len() {
        lines.pos += 1;
        Some((lines.pos, lines.lines[lines.pos - 1]))
    } else {
        None
    }
}

fn next_significant<'a>(lines: &mut Lines<'a>) -> Option<(usize, &'a str)> {
    while let Some((n, l)) = next_line(lines) {
        if !l.trim().is_empty() {
            return Some((n, l));
        }
    }
    None
}

/// Parse one semicolon-terminated statement line. Returns None for register
/// declarations (recorded as a side effect).
fn parse_statement(
    program: &mut LogicalProgram,
    line: &str,
    ln: usize,
    block_guard: Option<(usize, u64)>,
) -> Result<Option<Stmt>, QasmError> {
    let body = line
        .strip_suffix(';')
        .ok_or_else(|| syntax(ln, line.len(), "missing ';'"))?
        .trim();

    // Declarations.
    if let Some(rest) = body.strip_prefix("qreg ") {
        let (name, width) = parse_decl(rest, ln)?;
        if program.qreg_named(&name).is_some() || program.creg_named(&name).is_some() {
            return Err(syntax(ln, 1, format!("duplicate register '{name}'")));
        }
        program.add_qreg(name, width);
        return Ok(None);
    }
    if let Some(rest) = body.strip_prefix("creg ") {
        let (name, width) = parse_decl(rest, ln)?;
        if program.qreg_named(&name).is_some() || program.creg_named(&name).is_some() {
            return Err(syntax(ln, 1, format!("duplicate register '{name}'")));
        }
        program.add_creg(name, width);
        return Ok(None);
    }

    for unsupported in ["gate ", "opaque ", "include "] {
        if body.starts_with(unsupported) {
            return Err(syntax(
                ln,
                1,
                format!("unsupported construct '{}'", unsupported.trim()),
            ));
        }
    }

    // Conditional prefix.
    if let Some(rest) = body.strip_prefix("if") {
        let rest = rest.trim_start();
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| syntax(ln, 1, "expected '(' after if"))?;
        let close = inner
            .find(')')
            .ok_or_else(|| syntax(ln, 1, "expected ')' in conditional"))?;
        let cond = &inner[..close];
        let stmt_text = inner[close + 1..].trim();
        let (reg_name, value_text) = cond
            .split_once("==")
            .ok_or_else(|| syntax(ln, 1, "expected '==' in conditional"))?;
        let creg = program
            .creg_named(reg_name.trim())
            .ok_or_else(|| syntax(ln, 1, format!("unknown classical register '{}'", reg_name.trim())))?;
        let value: u64 = value_text
            .trim()
            .parse()
            .map_err(|_| syntax(ln, 1, "bad conditional constant"))?;
        let base = parse_base_stmt(program, stmt_text, ln)?;
        // Inside a guarded gadget block, the block guard is implicit per
        // line; absorb a matching prefix instead of nesting a conditional.
        if block_guard == Some((creg, value)) {
            return Ok(Some(base));
        }
        return Ok(Some(Stmt::If { creg, value, body: Box::new(base) }));
    }

    Ok(Some(parse_base_stmt(program, body, ln)?))
}

fn parse_decl(rest: &str, ln: usize) -> Result<(String, u32), QasmError> {
    let open = rest.find('[').ok_or_else(|| syntax(ln, 1, "expected '[width]'"))?;
    let close = rest.find(']').ok_or_else(|| syntax(ln, 1, "expected ']'"))?;
    let name = rest[..open].trim().to_string();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(syntax(ln, 1, format!("bad register name '{name}'")));
    }
    let width: u32 = rest[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| syntax(ln, 1, "bad register width"))?;
    if width == 0 || width > 64 {
        return Err(syntax(ln, 1, "register width must be in 1..=64"));
    }
    Ok((name, width))
}

fn parse_base_stmt(
    program: &LogicalProgram,
    text: &str,
    ln: usize,
) -> Result<Stmt, QasmError> {
    if let Some(rest) = text.strip_prefix("measure ") {
        let (qtext, ctext) = rest
            .split_once("->")
            .ok_or_else(|| syntax(ln, 1, "expected '->' in measure"))?;
        let qubit = parse_qubit(program, qtext.trim(), ln)?;
        let target = parse_cbit(program, ctext.trim(), ln)?;
        return Ok(Stmt::Measure { qubit, target });
    }
    if let Some(rest) = text.strip_prefix("reset ") {
        return Ok(Stmt::Reset { qubit: parse_qubit(program, rest.trim(), ln)? });
    }
    if let Some(rest) = text.strip_prefix("barrier ") {
        let qubits = rest
            .split(',')
            .map(|t| parse_qubit(program, t.trim(), ln))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Stmt::Barrier { qubits });
    }

    // Gate application: name[(param)] q[i](,q[j]).
    let (head, operands) = text
        .split_once(' ')
        .ok_or_else(|| syntax(ln, 1, "expected gate operands"))?;
    let (name, param) = match head.split_once('(') {
        Some((n, p)) => {
            let p = p
                .strip_suffix(')')
                .ok_or_else(|| syntax(ln, 1, "expected ')' after parameter"))?;
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| syntax(ln, 1, format!("bad gate parameter '{p}'")))?;
            (n, Some(v))
        }
        None => (head, None),
    };
    let gate = match (name, param) {
        ("h", None) => Gate::H,
        ("s", None) => Gate::S,
        ("sdg", None) => Gate::Sdg,
        ("t", None) => Gate::T,
        ("tdg", None) => Gate::Tdg,
        ("x", None) => Gate::X,
        ("z", None) => Gate::Z,
        ("cx", None) => Gate::Cx,
        ("cz", None) => Gate::Cz,
        ("ch", None) => Gate::Ch,
        ("rz", Some(t)) => Gate::Rz(t),
        ("ry", Some(t)) => Gate::Ry(t),
        ("u1", Some(t)) => Gate::Phase(t),
        (other, _) => {
            return Err(syntax(ln, 1, format!("unsupported gate '{other}'")));
        }
    };
    let qubits = operands
        .split(',')
        .map(|t| parse_qubit(program, t.trim(), ln))
        .collect::<Result<Vec<_>, _>>()?;
    if qubits.len() != gate.arity() {
        return Err(syntax(
            ln,
            1,
            format!("gate {} expects {} operands", gate.qasm_name(), gate.arity()),
        ));
    }
    Ok(Stmt::Gate { gate, qubits })
}

fn parse_qubit(program: &LogicalProgram, text: &str, ln: usize) -> Result<QubitRef, QasmError> {
    let (name, index) = parse_indexed(text, ln)?;
    let reg = program
        .qreg_named(&name)
        .ok_or_else(|| syntax(ln, 1, format!("unknown quantum register '{name}' (whole-register operands are not supported)")))?;
    Ok(QubitRef { reg, index })
}

fn parse_cbit(program: &LogicalProgram, text: &str, ln: usize) -> Result<CBitRef, QasmError> {
    let (name, index) = parse_indexed(text, ln)?;
    let reg = program
        .creg_named(&name)
        .ok_or_else(|| syntax(ln, 1, format!("unknown classical register '{name}'")))?;
    Ok(CBitRef { reg, index })
}

fn parse_indexed(text: &str, ln: usize) -> Result<(String, u32), QasmError> {
    let open = text
        .find('[')
        .ok_or_else(|| syntax(ln, 1, format!("expected indexed operand, got '{text}'")))?;
    let close = text
        .strip_suffix(']')
        .ok_or_else(|| syntax(ln, 1, "expected ']'"))?;
    let name = text[..open].to_string();
    let index: u32 = close[open + 1..]
        .parse()
        .map_err(|_| syntax(ln, 1, "bad operand index"))?;
    Ok((name, index))
}

fn parse_meta(program: &LogicalProgram, attrs: &str, ln: usize) -> Result<BlockMeta, QasmError> {
    let mut map = std::collections::BTreeMap::new();
    for pair in attrs.split_whitespace() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| syntax(ln, 1, format!("bad gadget attribute '{pair}'")))?;
        map.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| -> Result<String, QasmError> {
        map.get(k)
            .cloned()
            .ok_or_else(|| syntax(ln, 1, format!("gadget missing attribute '{k}'")))
    };
    let qreg = |name: &str| -> Result<usize, QasmError> {
        program
            .qreg_named(name)
            .ok_or_else(|| syntax(ln, 1, format!("gadget references unknown qreg '{name}'")))
    };
    let creg = |name: &str| -> Result<usize, QasmError> {
        program
            .creg_named(name)
            .ok_or_else(|| syntax(ln, 1, format!("gadget references unknown creg '{name}'")))
    };
    let cbit = |text: &str| -> Result<CBitRef, QasmError> {
        let (name, index) = parse_indexed(text, ln)?;
        Ok(CBitRef { reg: creg(&name)?, index })
    };

    let kind = match get("kind")?.as_str() {
        "encode" => BlockKind::Encode {
            block: qreg(&get("block")?)?,
            injection: get("injection")? == "1",
        },
        "rus_init" => BlockKind::RusInit {
            block: qreg(&get("block")?)?,
            flag_reg: creg(&get("flag")?)?,
        },
        "cx_t" => BlockKind::TransversalCx {
            control: qreg(&get("control")?)?,
            target: qreg(&get("target")?)?,
        },
        "cz_t" => BlockKind::TransversalCz { a: qreg(&get("a")?)?, b: qreg(&get("b")?)? },
        "meas_decode" => BlockKind::MeasDecode {
            block: qreg(&get("block")?)?,
            basis: match get("basis")?.as_str() {
                "z" => MeasBasis::Z,
                "x" => MeasBasis::X,
                other => return Err(syntax(ln, 1, format!("bad basis '{other}'"))),
            },
            bits: creg(&get("bits")?)?,
            raw: cbit(&get("raw")?)?,
            log: cbit(&get("log")?)?,
            syn: creg(&get("syn")?)?,
            postselect: get("postselect")? == "1",
        },
        "teleport" => BlockKind::Teleport {
            method: get("method")?
                .parse()
                .map_err(|_| syntax(ln, 1, "bad teleport method"))?,
        },
        "rec_teleport" => BlockKind::RecursiveTeleport {
            k: get("k")?.parse().map_err(|_| syntax(ln, 1, "bad recursion level"))?,
        },
        "ancilla_cp" => BlockKind::AncillaCp,
        "flagged_h" => BlockKind::FlaggedHMeas { block: qreg(&get("block")?)? },
        "tprep_rus" => BlockKind::TPrepRus {
            block: qreg(&get("block")?)?,
            flag_reg: creg(&get("flag")?)?,
        },
        "span" => BlockKind::Span { label: get("label")? },
        other => return Err(syntax(ln, 1, format!("unknown gadget kind '{other}'"))),
    };
    let guard = match map.get("guard") {
        Some(text) => {
            let (name, value) = text
                .split_once("==")
                .ok_or_else(|| syntax(ln, 1, "bad guard attribute"))?;
            Some((
                creg(name)?,
                value.parse().map_err(|_| syntax(ln, 1, "bad guard constant"))?,
            ))
        }
        None => None,
    };
    Ok(BlockMeta { kind, guard })
}
