//! The MRAM instruction set, program representation, and the two cost
//! models (unit and logarithmic).

use std::collections::BTreeMap;
use std::fmt;

use crate::word::Word;

/// How an instruction names a value: an immediate, a cell, or a cell whose
/// contents name another cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    /// `#k` — the value itself. Never legal as a destination.
    Literal(Word),
    /// `[a]` — the contents of cell `a`.
    Direct(Word),
    /// `[[a]]` — the contents of the cell named by the contents of cell `a`.
    Indirect(Word),
}

impl Operand {
    pub fn lit<V: Into<Word>>(v: V) -> Self {
        Operand::Literal(v.into())
    }

    pub fn dir<V: Into<Word>>(a: V) -> Self {
        Operand::Direct(a.into())
    }

    pub fn ind<V: Into<Word>>(a: V) -> Self {
        Operand::Indirect(a.into())
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Operand::Literal(_))
    }
}

/// The three-operand ALU operations. MUL is the defining member of the
/// model: it costs one unit like everything else, whatever the operand
/// widths. SUB is monus, DIV is floor division, SHL/SHR shift by the full
/// value of their second source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Xor,
    Shl,
    Shr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Load {
        dst: Operand,
        src: Operand,
    },
    Binary {
        op: BinaryOp,
        dst: Operand,
        lhs: Operand,
        rhs: Operand,
    },
    Jump {
        target: usize,
    },
    JumpZero {
        cond: Operand,
        target: usize,
    },
    JumpNonZero {
        cond: Operand,
        target: usize,
    },
    Halt,
}

/// Opcode names, used by the assembler and the tracer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Opcode {
    Load,
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Jump,
    Jz,
    Jnz,
    Halt,
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Load { .. } => Opcode::Load,
            Instruction::Binary { op, .. } => match op {
                BinaryOp::Add => Opcode::Add,
                BinaryOp::Sub => Opcode::Sub,
                BinaryOp::Mul => Opcode::Mul,
                BinaryOp::Div => Opcode::Div,
                BinaryOp::And => Opcode::And,
                BinaryOp::Or => Opcode::Or,
                BinaryOp::Xor => Opcode::Xor,
                BinaryOp::Shl => Opcode::Shl,
                BinaryOp::Shr => Opcode::Shr,
            },
            Instruction::Jump { .. } => Opcode::Jump,
            Instruction::JumpZero { .. } => Opcode::Jz,
            Instruction::JumpNonZero { .. } => Opcode::Jnz,
            Instruction::Halt => Opcode::Halt,
        }
    }

    /// Jump target, if this instruction has one.
    pub fn target(&self) -> Option<usize> {
        match self {
            Instruction::Jump { target }
            | Instruction::JumpZero { target, .. }
            | Instruction::JumpNonZero { target, .. } => Some(*target),
            _ => None,
        }
    }

    /// Destination operand, if this instruction writes one.
    pub fn destination(&self) -> Option<&Operand> {
        match self {
            Instruction::Load { dst, .. } | Instruction::Binary { dst, .. } => Some(dst),
            _ => None,
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Opcode::Load => "LOAD",
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::Mul => "MUL",
            Opcode::Div => "DIV",
            Opcode::And => "AND",
            Opcode::Or => "OR",
            Opcode::Xor => "XOR",
            Opcode::Shl => "SHL",
            Opcode::Shr => "SHR",
            Opcode::Jump => "JUMP",
            Opcode::Jz => "JZ",
            Opcode::Jnz => "JNZ",
            Opcode::Halt => "HALT",
        };
        f.write_str(s)
    }
}

/// An MRAM program: instructions plus a label map. Jump targets inside
/// instructions are already-resolved indices; labels are retained so the
/// printer can reproduce the source names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    pub labels: BTreeMap<String, usize>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Program {
            instructions,
            labels: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

/// Every instruction costs 1 under UNIT; under LOG it costs 1 plus the bit
/// lengths of everything it touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostModel {
    Unit,
    Log,
}

/// Cost of one executed instruction given the fully resolved values it
/// touched (sources and the written result) and the effective addresses it
/// used. Jump targets are program indices, not data, and are not charged.
pub fn instruction_cost(model: CostModel, values: &[&Word], addresses: &[&Word]) -> u64 {
    match model {
        CostModel::Unit => 1,
        CostModel::Log => {
            1 + values.iter().map(|v| v.bitlen()).sum::<u64>()
                + addresses.iter().map(|a| a.bitlen()).sum::<u64>()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefectKind {
    TargetOutOfRange { target: usize, len: usize },
    LiteralDestination,
}

/// One validation finding: defects are data, not failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationDefect {
    pub index: usize,
    pub kind: DefectKind,
}

impl fmt::Display for ValidationDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DefectKind::TargetOutOfRange { target, len } => write!(
                f,
                "instruction {}: jump target {} out of range (program has {} instructions)",
                self.index, target, len
            ),
            DefectKind::LiteralDestination => {
                write!(f, "instruction {}: literal destination", self.index)
            }
        }
    }
}

/// Checks jump ranges and destination kinds. Arity is correct by
/// construction here; the assembler reports arity problems at parse time.
pub fn validate(program: &Program) -> Vec<ValidationDefect> {
    let len = program.instructions.len();
    let mut defects = Vec::new();
    for (index, instr) in program.instructions.iter().enumerate() {
        if let Some(target) = instr.target() {
            if target >= len {
                defects.push(ValidationDefect {
                    index,
                    kind: DefectKind::TargetOutOfRange { target, len },
                });
            }
        }
        if let Some(dst) = instr.destination() {
            if dst.is_literal() {
                defects.push(ValidationDefect {
                    index,
                    kind: DefectKind::LiteralDestination,
                });
            }
        }
    }
    defects
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cost_is_one_for_everything() {
        let six = Word::from(6u64);
        let seven = Word::from(7u64);
        let five = Word::from(5u64);
        assert_eq!(
            instruction_cost(CostModel::Unit, &[&six, &seven], &[&five]),
            1
        );
        assert_eq!(instruction_cost(CostModel::Unit, &[], &[]), 1);
    }

    #[test]
    fn log_cost_charges_values_result_and_addresses() {
        // MUL of 6 and 7 writing 42 into cell 5:
        // 1 + bitlen(6)+bitlen(7)+bitlen(42) + bitlen(5) = 1+3+3+6+3 = 16
        let vals = [Word::from(6u64), Word::from(7u64), Word::from(42u64)];
        let addrs = [Word::from(5u64)];
        let cost = instruction_cost(
            CostModel::Log,
            &vals.iter().collect::<Vec<_>>(),
            &addrs.iter().collect::<Vec<_>>(),
        );
        assert_eq!(cost, 16);
    }

    #[test]
    fn halt_costs_one_under_both_models() {
        assert_eq!(instruction_cost(CostModel::Unit, &[], &[]), 1);
        assert_eq!(instruction_cost(CostModel::Log, &[], &[]), 1);
    }

    #[test]
    fn validate_accepts_single_halt() {
        let p = Program::new(vec![Instruction::Halt]);
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn validate_flags_out_of_range_target() {
        let p = Program::new(vec![
            Instruction::Jump { target: 99 },
            Instruction::Halt,
            Instruction::Halt,
        ]);
        let defects = validate(&p);
        assert_eq!(defects.len(), 1);
        assert_eq!(
            defects[0].kind,
            DefectKind::TargetOutOfRange { target: 99, len: 3 }
        );
    }

    #[test]
    fn validate_flags_literal_destination() {
        let p = Program::new(vec![Instruction::Binary {
            op: BinaryOp::Add,
            dst: Operand::lit(0u64),
            lhs: Operand::dir(0u64),
            rhs: Operand::lit(1u64),
        }]);
        let defects = validate(&p);
        assert_eq!(defects.len(), 1);
        assert_eq!(defects[0].kind, DefectKind::LiteralDestination);
    }
}
