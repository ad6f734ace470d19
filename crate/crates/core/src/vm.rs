//! Deterministic executor for MRAM programs: sparse unbounded memory, fuel
//! limits, dual cost accounting, and an optional step trace.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::isa::{
    instruction_cost, validate, BinaryOp, CostModel, Instruction, Opcode, Operand, Program,
    ValidationDefect,
};
use crate::word::Word;

/// Sparse memory: absent cells read as zero, and zeros are never stored
/// explicitly, so two states that agree cell-by-cell compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Memory {
    cells: BTreeMap<Word, Word>,
    total_bits: u64,
}

impl Memory {
    pub fn new() -> Self {
        Memory::default()
    }

    pub fn from_pairs<I, A, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, V)>,
        A: Into<Word>,
        V: Into<Word>,
    {
        let mut m = Memory::new();
        for (a, v) in pairs {
            m.set(a.into(), v.into());
        }
        m
    }

    /// The memory image for the convention the workbench programs use:
    /// cell 1 holds the input length, cells 2.. the input items.
    pub fn input_image(items: &[Word]) -> Self {
        let mut m = Memory::new();
        m.set(Word::from(1u64), Word::from(items.len()));
        for (i, item) in items.iter().enumerate() {
            m.set(Word::from(2 + i as u64), item.clone());
        }
        m
    }

    pub fn get(&self, addr: &Word) -> Word {
        self.cells.get(addr).cloned().unwrap_or_else(Word::zero)
    }

    pub fn get_ref(&self, addr: &Word) -> Option<&Word> {
        self.cells.get(addr)
    }

    pub fn set(&mut self, addr: Word, value: Word) {
        if let Some(old) = self.cells.get(&addr) {
            self.total_bits -= old.bits();
        }
        if value.is_zero() {
            self.cells.remove(&addr);
        } else {
            self.total_bits += value.bits();
            self.cells.insert(addr, value);
        }
    }

    /// Sum of the binary lengths of all stored cells.
    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Word)> {
        self.cells.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub pc: usize,
    pub memory: Memory,
    pub halted: bool,
    pub executed: u64,
    pub unit_cost: u64,
    pub log_cost: u64,
}

impl MachineState {
    pub fn with_memory(memory: Memory) -> Self {
        MachineState {
            pc: 0,
            memory,
            halted: false,
            executed: 0,
            unit_cost: 0,
            log_cost: 0,
        }
    }
}

/// Measurement surface for a finished (or aborted) run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostReport {
    pub executed: u64,
    pub unit_cost: u64,
    pub log_cost: u64,
    /// Largest bit length ever written to a cell.
    pub max_cell_bits: u64,
    /// Distinct cells read or written.
    pub cells_touched: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("program failed validation: {}", format_defects(.0))]
    InvalidProgram(Vec<ValidationDefect>),
    #[error("division by zero at pc {pc}")]
    DivideByZero { pc: usize },
    #[error("pc {pc} escaped the program without HALT")]
    PcOutOfRange { pc: usize },
    #[error("fuel exhausted after {executed} instructions")]
    FuelExhausted { executed: u64 },
    #[error("bit budget exceeded at pc {pc}: {needed} bits needed, budget {budget}")]
    BitBudgetExceeded { pc: usize, needed: u64, budget: u64 },
    #[error("literal destination at pc {pc}")]
    LiteralDestination { pc: usize },
}

fn format_defects(defects: &[ValidationDefect]) -> String {
    defects
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Execution limits. Fuel is mandatory: there are no unbounded runs. The
/// bit budget caps the total stored bits across all cells; a single shift
/// that would blow past it faults before allocating.
#[derive(Clone, Copy, Debug)]
pub struct RunLimits {
    pub fuel: u64,
    pub bit_budget: Option<u64>,
}

pub const DEFAULT_FUEL: u64 = 100_000_000;
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 27;

// Shifts past this allocate unreasonable host memory even without a budget.
const HARD_SHIFT_CAP: u64 = 1 << 32;

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            fuel: DEFAULT_FUEL,
            bit_budget: Some(DEFAULT_BIT_BUDGET),
        }
    }
}

/// What one executed step touched; the driver aggregates these into the
/// cost report and the trace.
#[derive(Clone, Debug)]
pub struct StepInfo {
    pub pc: usize,
    pub opcode: Opcode,
    /// Effective addresses, in operand order (sources, then destination).
    pub addresses: Vec<Word>,
    /// Bit length of the written value, for instructions that write.
    pub written_bits: Option<u64>,
}

/// One trace record: full written values can be astronomically large, so
/// only their bit length is reported.
pub type TraceRecord = StepInfo;

struct ResolvedOperand {
    value: Word,
    addresses: Vec<Word>,
}

fn resolve_read(memory: &Memory, operand: &Operand) -> ResolvedOperand {
    match operand {
        Operand::Literal(v) => ResolvedOperand {
            value: v.clone(),
            addresses: vec![],
        },
        Operand::Direct(a) => ResolvedOperand {
            value: memory.get(a),
            addresses: vec![a.clone()],
        },
        Operand::Indirect(a) => {
            let pointer = memory.get(a);
            let value = memory.get(&pointer);
            ResolvedOperand {
                value,
                addresses: vec![a.clone(), pointer],
            }
        }
    }
}

fn resolve_destination(
    memory: &Memory,
    operand: &Operand,
    pc: usize,
) -> Result<(Word, Vec<Word>), RunError> {
    match operand {
        Operand::Literal(_) => Err(RunError::LiteralDestination { pc }),
        Operand::Direct(a) => Ok((a.clone(), vec![a.clone()])),
        Operand::Indirect(a) => {
            let pointer = memory.get(a);
            Ok((pointer.clone(), vec![a.clone(), pointer]))
        }
    }
}

/// Executes one instruction, advancing pc and both cost counters.
///
/// Preconditions: not halted, pc in range. The caller (the run loop)
/// checks both and also enforces fuel and the post-write bit budget.
pub fn step(
    state: &mut MachineState,
    program: &Program,
    limits: &RunLimits,
) -> Result<StepInfo, RunError> {
    let pc = state.pc;
    let instr = &program.instructions[pc];
    let opcode = instr.opcode();

    let mut values: Vec<Word> = Vec::new();
    let mut addresses: Vec<Word> = Vec::new();
    let mut written: Option<(Word, Word)> = None; // (addr, value)
    let mut next_pc = pc + 1;

    match instr {
        Instruction::Load { dst, src } => {
            let s = resolve_read(&state.memory, src);
            addresses.extend(s.addresses);
            let (daddr, daddrs) = resolve_destination(&state.memory, dst, pc)?;
            addresses.extend(daddrs);
            values.push(s.value.clone());
            values.push(s.value.clone()); // written result
            written = Some((daddr, s.value));
        }
        Instruction::Binary { op, dst, lhs, rhs } => {
            let a = resolve_read(&state.memory, lhs);
            let b = resolve_read(&state.memory, rhs);
            addresses.extend(a.addresses);
            addresses.extend(b.addresses);
            let (daddr, daddrs) = resolve_destination(&state.memory, dst, pc)?;
            addresses.extend(daddrs);

            let result = apply_binary(*op, &a.value, &b.value, pc, limits)?;
            values.push(a.value);
            values.push(b.value);
            values.push(result.clone());
            written = Some((daddr, result));
        }
        Instruction::Jump { target } => {
            next_pc = *target;
        }
        Instruction::JumpZero { cond, target } => {
            let c = resolve_read(&state.memory, cond);
            addresses.extend(c.addresses);
            if c.value.is_zero() {
                next_pc = *target;
            }
            values.push(c.value);
        }
        Instruction::JumpNonZero { cond, target } => {
            let c = resolve_read(&state.memory, cond);
            addresses.extend(c.addresses);
            if !c.value.is_zero() {
                next_pc = *target;
            }
            values.push(c.value);
        }
        Instruction::Halt => {
            state.halted = true;
        }
    }

    let value_refs: Vec<&Word> = values.iter().collect();
    let addr_refs: Vec<&Word> = addresses.iter().collect();
    state.unit_cost += instruction_cost(CostModel::Unit, &value_refs, &addr_refs);
    state.log_cost += instruction_cost(CostModel::Log, &value_refs, &addr_refs);
    state.executed += 1;

    let written_bits = written.as_ref().map(|(_, v)| v.bits());
    if let Some((addr, value)) = written {
        state.memory.set(addr, value);
    }
    state.pc = next_pc;

    Ok(StepInfo {
        pc,
        opcode,
        addresses,
        written_bits,
    })
}

fn apply_binary(
    op: BinaryOp,
    a: &Word,
    b: &Word,
    pc: usize,
    limits: &RunLimits,
) -> Result<Word, RunError> {
    Ok(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a.monus(b),
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a.div_floor(b).ok_or(RunError::DivideByZero { pc })?,
        BinaryOp::And => a & b,
        BinaryOp::Or => a | b,
        BinaryOp::Xor => a ^ b,
        BinaryOp::Shl => {
            if a.is_zero() {
                Word::zero()
            } else {
                let cap = limits.bit_budget.unwrap_or(HARD_SHIFT_CAP);
                let count = b.to_u64().unwrap_or(u64::MAX);
                let needed = count.saturating_add(a.bits());
                if needed > cap {
                    return Err(RunError::BitBudgetExceeded {
                        pc,
                        needed,
                        budget: cap,
                    });
                }
                a << count
            }
        }
        BinaryOp::Shr => {
            // Counts past the operand width floor to zero; no fault.
            match b.to_u64() {
                Some(count) => a >> count,
                None => Word::zero(),
            }
        }
    })
}

struct RunDriver<'a> {
    program: &'a Program,
    limits: RunLimits,
    state: MachineState,
    touched: HashSet<Word>,
    max_cell_bits: u64,
}

impl<'a> RunDriver<'a> {
    fn new(program: &'a Program, image: Memory, limits: RunLimits) -> Self {
        RunDriver {
            program,
            limits,
            state: MachineState::with_memory(image),
            touched: HashSet::new(),
            max_cell_bits: 0,
        }
    }

    fn drive(&mut self, mut trace: Option<&mut Vec<TraceRecord>>) -> Result<(), RunError> {
        loop {
            if self.state.halted {
                return Ok(());
            }
            if self.state.executed >= self.limits.fuel {
                return Err(RunError::FuelExhausted {
                    executed: self.state.executed,
                });
            }
            if self.state.pc >= self.program.instructions.len() {
                return Err(RunError::PcOutOfRange { pc: self.state.pc });
            }
            let pc = self.state.pc;
            let info = step(&mut self.state, self.program, &self.limits)?;
            for a in &info.addresses {
                self.touched.insert(a.clone());
            }
            if let Some(bits) = info.written_bits {
                self.max_cell_bits = self.max_cell_bits.max(bits);
            }
            if let Some(records) = trace.as_deref_mut() {
                records.push(info);
            }
            if let Some(budget) = self.limits.bit_budget {
                let total = self.state.memory.total_bits();
                if total > budget {
                    return Err(RunError::BitBudgetExceeded {
                        pc,
                        needed: total,
                        budget,
                    });
                }
            }
        }
    }

    fn report(&self) -> CostReport {
        CostReport {
            executed: self.state.executed,
            unit_cost: self.state.unit_cost,
            log_cost: self.state.log_cost,
            max_cell_bits: self.max_cell_bits,
            cells_touched: self.touched.len() as u64,
        }
    }
}

/// Runs a validated program from pc 0 on the given memory image until HALT,
/// fault, or fuel exhaustion.
pub fn run(
    program: &Program,
    image: Memory,
    limits: RunLimits,
) -> Result<(MachineState, CostReport), RunError> {
    let defects = validate(program);
    if !defects.is_empty() {
        return Err(RunError::InvalidProgram(defects));
    }
    let mut driver = RunDriver::new(program, image, limits);
    driver.drive(None)?;
    let report = driver.report();
    Ok((driver.state, report))
}

/// Like [`run`] but records every step. On a fault the records cover
/// everything up to and including the faulting step.
pub struct TraceResult {
    pub records: Vec<TraceRecord>,
    pub outcome: Result<(MachineState, CostReport), RunError>,
}

pub fn trace(program: &Program, image: Memory, limits: RunLimits) -> TraceResult {
    let defects = validate(program);
    if !defects.is_empty() {
        return TraceResult {
            records: vec![],
            outcome: Err(RunError::InvalidProgram(defects)),
        };
    }
    let mut records = Vec::new();
    let mut driver = RunDriver::new(program, image, limits);
    let outcome = driver.drive(Some(&mut records)).map(|()| {
        let report = driver.report();
        (driver.state, report)
    });
    TraceResult { records, outcome }
}
