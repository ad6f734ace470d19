//! Textual MRAM assembly: a line-oriented grammar with explicit addressing
//! sigils, a diagnostic-collecting parser, and a canonical printer.
//!
//! Grammar, one instruction or label per line (a label may prefix an
//! instruction on the same line):
//!
//! ```text
//! name:                      ; label
//! OPCODE dst, src1, src2     ; #k literal, [a] direct, [[a]] indirect
//! JUMP name                  ; jump targets are label names
//! ```
//!
//! `;` starts a comment, blank lines are ignored, opcodes are
//! case-insensitive. The printer emits upper-case opcodes, one space after
//! each comma, and a deterministic `L<index>` label for any jump target
//! the program does not name. Output is byte-identical for identical
//! programs.

use std::collections::BTreeMap;
use std::fmt;

use crate::isa::{validate, BinaryOp, Instruction, Opcode, Operand, Program, ValidationDefect};
use crate::word::Word;

/// One parse problem, tied to a 1-based source line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn is_label_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits a cleaned line into an optional leading label and the rest.
fn split_label(line: &str) -> (Option<&str>, &str) {
    if let Some(colon) = line.find(':') {
        let (head, tail) = line.split_at(colon);
        let head = head.trim();
        if is_label_name(head) {
            return (Some(head), tail[1..].trim());
        }
    }
    (None, line)
}

fn strip_comment(line: &str) -> &str {
    match line.find(';') {
        Some(i) => &line[..i],
        None => line,
    }
}

struct LineItem<'a> {
    line_no: usize,
    label: Option<&'a str>,
    body: &'a str,
}

fn scan_lines(text: &str) -> Vec<LineItem<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let cleaned = strip_comment(raw).trim();
            if cleaned.is_empty() {
                return None;
            }
            let (label, body) = split_label(cleaned);
            Some(LineItem {
                line_no: i + 1,
                label,
                body,
            })
        })
        .collect()
}

fn parse_nat(token: &str) -> Option<Word> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    token.parse().ok()
}

fn parse_operand(token: &str) -> Result<Operand, String> {
    let token = token.trim();
    if let Some(rest) = token.strip_prefix("[[") {
        if let Some(inner) = rest.strip_suffix("]]") {
            return parse_nat(inner.trim())
                .map(Operand::Indirect)
                .ok_or_else(|| format!("malformed indirect address `{token}`"));
        }
        return Err(format!("malformed indirect operand `{token}`"));
    }
    if let Some(rest) = token.strip_prefix('[') {
        if let Some(inner) = rest.strip_suffix(']') {
            return parse_nat(inner.trim())
                .map(Operand::Direct)
                .ok_or_else(|| format!("malformed direct address `{token}`"));
        }
        return Err(format!("malformed direct operand `{token}`"));
    }
    if let Some(rest) = token.strip_prefix('#') {
        return parse_nat(rest.trim())
            .map(Operand::Literal)
            .ok_or_else(|| format!("malformed literal `{token}`"));
    }
    Err(format!("malformed operand `{token}`"))
}

fn opcode_from_str(s: &str) -> Option<Opcode> {
    Some(match s.to_ascii_uppercase().as_str() {
        "LOAD" => Opcode::Load,
        "ADD" => Opcode::Add,
        "SUB" => Opcode::Sub,
        "MUL" => Opcode::Mul,
        "DIV" => Opcode::Div,
        "AND" => Opcode::And,
        "OR" => Opcode::Or,
        "XOR" => Opcode::Xor,
        "SHL" => Opcode::Shl,
        "SHR" => Opcode::Shr,
        "JUMP" => Opcode::Jump,
        "JZ" => Opcode::Jz,
        "JNZ" => Opcode::Jnz,
        "HALT" => Opcode::Halt,
        _ => return None,
    })
}

fn binary_op(opcode: Opcode) -> Option<BinaryOp> {
    Some(match opcode {
        Opcode::Add => BinaryOp::Add,
        Opcode::Sub => BinaryOp::Sub,
        Opcode::Mul => BinaryOp::Mul,
        Opcode::Div => BinaryOp::Div,
        Opcode::And => BinaryOp::And,
        Opcode::Or => BinaryOp::Or,
        Opcode::Xor => BinaryOp::Xor,
        Opcode::Shl => BinaryOp::Shl,
        Opcode::Shr => BinaryOp::Shr,
        _ => return None,
    })
}

fn arity(opcode: Opcode) -> usize {
    match opcode {
        Opcode::Halt => 0,
        Opcode::Jump => 1,
        Opcode::Load | Opcode::Jz | Opcode::Jnz => 2,
        _ => 3,
    }
}

/// Parses source text into a validated [`Program`], or every diagnostic
/// the text produces — never just the first.
pub fn parse(text: &str) -> Result<Program, Vec<Diagnostic>> {
    let items = scan_lines(text);
    let mut diagnostics: Vec<Diagnostic> = Vec::new();

    // First pass: label definitions and instruction indices.
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut index = 0usize;
    for item in &items {
        if let Some(name) = item.label {
            if labels.insert(name.to_string(), index).is_some() {
                diagnostics.push(Diagnostic {
                    line: item.line_no,
                    message: format!("duplicate label `{name}`"),
                });
            }
        }
        if !item.body.is_empty() {
            index += 1;
        }
    }

    // Second pass: instructions, with jump targets resolved.
    let mut instructions: Vec<Instruction> = Vec::new();
    for item in &items {
        if item.body.is_empty() {
            continue;
        }
        match parse_instruction(item.body, item.line_no, &labels) {
            Ok(instr) => instructions.push(instr),
            Err(mut diags) => {
                diagnostics.append(&mut diags);
                // keep indices aligned so later diagnostics stay accurate
                instructions.push(Instruction::Halt);
            }
        }
    }

    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }

    let program = Program {
        instructions,
        labels,
    };
    let defects = validate(&program);
    if !defects.is_empty() {
        // labels can resolve past the end; report as diagnostics without lines
        return Err(defects
            .iter()
            .map(|d| Diagnostic {
                line: 0,
                message: d.to_string(),
            })
            .collect());
    }
    Ok(program)
}

fn parse_instruction(
    body: &str,
    line: usize,
    labels: &BTreeMap<String, usize>,
) -> Result<Instruction, Vec<Diagnostic>> {
    let diag = |message: String| vec![Diagnostic { line, message }];

    let (head, rest) = match body.split_once(char::is_whitespace) {
        Some((h, r)) => (h, r.trim()),
        None => (body, ""),
    };
    let opcode = match opcode_from_str(head) {
        Some(op) => op,
        None => return Err(diag(format!("unknown opcode `{head}`"))),
    };

    let operands: Vec<&str> = if rest.is_empty() {
        vec![]
    } else {
        rest.split(',').map(str::trim).collect()
    };
    let expected = arity(opcode);
    if operands.len() != expected {
        return Err(diag(format!(
            "arity: {opcode} requires {expected} operand{}",
            if expected == 1 { "" } else { "s" }
        )));
    }

    let resolve_target = |token: &str| -> Result<usize, Vec<Diagnostic>> {
        if !is_label_name(token) {
            return Err(diag(format!("jump target must be a label, got `{token}`")));
        }
        labels
            .get(token)
            .copied()
            .ok_or_else(|| diag(format!("unknown label `{token}`")))
    };
    let operand = |token: &str| parse_operand(token).map_err(&diag);

    Ok(match opcode {
        Opcode::Halt => Instruction::Halt,
        Opcode::Jump => Instruction::Jump {
            target: resolve_target(operands[0])?,
        },
        Opcode::Jz => Instruction::JumpZero {
            cond: operand(operands[0])?,
            target: resolve_target(operands[1])?,
        },
        Opcode::Jnz => Instruction::JumpNonZero {
            cond: operand(operands[0])?,
            target: resolve_target(operands[1])?,
        },
        Opcode::Load => Instruction::Load {
            dst: operand(operands[0])?,
            src: operand(operands[1])?,
        },
        _ => Instruction::Binary {
            op: binary_op(opcode).expect("three-operand opcode"),
            dst: operand(operands[0])?,
            lhs: operand(operands[1])?,
            rhs: operand(operands[2])?,
        },
    })
}

fn format_operand(op: &Operand) -> String {
    match op {
        Operand::Literal(v) => format!("#{v}"),
        Operand::Direct(a) => format!("[{a}]"),
        Operand::Indirect(a) => format!("[[{a}]]"),
    }
}

/// Prints a program in canonical form. Refuses invalid programs.
///
/// Every jump target gets a label line; targets the program does not name
/// get `L<index>` (suffixed with `_` if that name is already taken).
pub fn print(program: &Program) -> Result<String, Vec<ValidationDefect>> {
    let defects = validate(program);
    if !defects.is_empty() {
        return Err(defects);
    }

    // index -> names defined at that index, in sorted order
    let mut names_at: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (name, &idx) in &program.labels {
        names_at.entry(idx).or_default().push(name);
    }

    let mut invented: BTreeMap<usize, String> = BTreeMap::new();
    for instr in &program.instructions {
        if let Some(target) = instr.target() {
            if !names_at.contains_key(&target) && !invented.contains_key(&target) {
                let mut candidate = format!("L{target}");
                while program.labels.contains_key(&candidate) {
                    candidate.push('_');
                }
                invented.insert(target, candidate);
            }
        }
    }

    let target_name = |idx: usize| -> &str {
        names_at
            .get(&idx)
            .map(|names| names[0])
            .unwrap_or_else(|| &invented[&idx])
    };

    let mut out = String::new();
    for idx in 0..=program.instructions.len() {
        if let Some(names) = names_at.get(&idx) {
            for name in names {
                out.push_str(name);
                out.push_str(":\n");
            }
        }
        if let Some(name) = invented.get(&idx) {
            out.push_str(name);
            out.push_str(":\n");
        }
        let Some(instr) = program.instructions.get(idx) else {
            break;
        };
        let line = match instr {
            Instruction::Load { dst, src } => {
                format!("LOAD {}, {}", format_operand(dst), format_operand(src))
            }
            Instruction::Binary { dst, lhs, rhs, .. } => format!(
                "{} {}, {}, {}",
                instr.opcode(),
                format_operand(dst),
                format_operand(lhs),
                format_operand(rhs)
            ),
            Instruction::Jump { target } => format!("JUMP {}", target_name(*target)),
            Instruction::JumpZero { cond, target } => {
                format!("JZ {}, {}", format_operand(cond), target_name(*target))
            }
            Instruction::JumpNonZero { cond, target } => {
                format!("JNZ {}, {}", format_operand(cond), target_name(*target))
            }
            Instruction::Halt => "HALT".to_string(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
