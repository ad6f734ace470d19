//! Compiles a bounded NDTM into an MRAM program that runs the
//! configuration-set simulation on the vm, plus the memory layout map
//! tying the emitted code to its data.
//!
//! The emitted program expects cell 2 to hold the initial configuration
//! index (seeded by the caller) and leaves 1 in cell 0 when some branch
//! accepts within the time bound, 0 otherwise.
//!
//! Memory layout:
//!   0  output            3  universe bit width     8..15  working registers
//!   2  input index       4  current set    5  accept mask
//!   16..16+3r            rule table: mask, |shift|, direction per rule
//!   16+3r..              shared unshifted masks (the mask-build scratch)
//!
//! Rule application is table-driven through indirect addressing, so the
//! code stays O(1) and the table O(rules). All masks are built in-memory
//! from small literals with ADD/MUL/SHL only, by the same doubling scheme
//! the host-side `replicate` uses; the program never executes DIV and
//! never writes cells 1 or 2.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::confset::{reachable_accepts, step_rules, StepRule};
use crate::isa::{BinaryOp, Instruction, Operand, Program};
use crate::ndtm::{
    initial_config, oracle_accepts, Bounds, CodecError, ConfigSetCodec, InputError, Machine,
};
use crate::vm::{run, CostReport, Memory, RunError, RunLimits};
use crate::word::Word;

// Working registers (the vm convention reserves 8..15 for emitted code).
const R_UNIV: u64 = 8;
const R_NEXT: u64 = 9;
const R_PTR: u64 = 10;
const R_ITER: u64 = 11;
const R_T0: u64 = 12;
const R_T1: u64 = 13;
const R_T2: u64 = 14;
const R_MUL: u64 = 15;

const CELL_OUTPUT: u64 = 0;
const CELL_INPUT_INDEX: u64 = 2;
const CELL_UNIVERSE_BITS: u64 = 3;
const CELL_CURRENT_SET: u64 = 4;
const CELL_ACCEPT_MASK: u64 = 5;
const RULE_TABLE_BASE: u64 = 16;

/// Region assignments of the emitted program, recorded explicitly. The
/// serialized field set is the wire format of the layout sidecar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutMap {
    pub output: u64,
    pub input_index: u64,
    pub universe_bits: u64,
    pub current_set: u64,
    pub accept_mask: u64,
    pub rule_table_base: u64,
    pub rules: u64,
    pub scratch_base: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmitStats {
    pub rules: u64,
    pub emitted_instructions: u64,
    /// Instructions before the iteration loop entry (mask building).
    pub prologue_instructions: u64,
    /// Worst-case executed instructions per loop iteration.
    pub per_iteration_instructions: u64,
}

/// The emitted-count contract: executed ≤ C·(B + T·K) with K = 8·|rules|
/// and B the mask-build budget below. `max(rules, 1)` keeps the bound
/// meaningful for machines whose rule table is empty.
pub const BOUND_C: f64 = 4.0;
pub const BOUND_K_PER_RULE: f64 = 8.0;

pub fn mask_build_budget(rules: u64, space: u32, g: u64) -> f64 {
    64.0 * rules.max(1) as f64 * (space as f64 * (g as f64).log2() + (space as f64).log2() + 4.0)
}

pub fn executed_bound(rules: u64, space: u32, g: u64, time: u32) -> f64 {
    BOUND_C
        * (mask_build_budget(rules, space, g)
            + time as f64 * BOUND_K_PER_RULE * rules.max(1) as f64)
}

#[derive(Clone, Debug)]
pub struct TranspileArtifact {
    pub program: Program,
    pub layout: LayoutMap,
    pub stats: EmitStats,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("universe needs {universe_bits} bits, over the {bit_budget}-bit budget")]
    UniverseTooWide { universe_bits: u64, bit_budget: u64 },
}

/// Small assembler: instructions plus named-label fixups.
struct Asm {
    instructions: Vec<Instruction>,
    labels: BTreeMap<String, usize>,
    fixups: Vec<(usize, String)>,
}

fn lit(v: u64) -> Operand {
    Operand::lit(v)
}

fn dir(a: u64) -> Operand {
    Operand::dir(a)
}

fn ind(a: u64) -> Operand {
    Operand::ind(a)
}

impl Asm {
    fn new() -> Self {
        Asm {
            instructions: Vec::new(),
            labels: BTreeMap::new(),
            fixups: Vec::new(),
        }
    }

    fn here(&self) -> usize {
        self.instructions.len()
    }

    fn label(&mut self, name: &str) {
        self.labels.insert(name.to_string(), self.here());
    }

    fn load(&mut self, dst: Operand, src: Operand) {
        self.instructions.push(Instruction::Load { dst, src });
    }

    fn bin(&mut self, op: BinaryOp, dst: Operand, lhs: Operand, rhs: Operand) {
        self.instructions
            .push(Instruction::Binary { op, dst, lhs, rhs });
    }

    fn jump(&mut self, target: &str) {
        self.fixups.push((self.here(), target.to_string()));
        self.instructions
            .push(Instruction::Jump { target: usize::MAX });
    }

    fn jz(&mut self, cond: Operand, target: &str) {
        self.fixups.push((self.here(), target.to_string()));
        self.instructions.push(Instruction::JumpZero {
            cond,
            target: usize::MAX,
        });
    }

    fn jnz(&mut self, cond: Operand, target: &str) {
        self.fixups.push((self.here(), target.to_string()));
        self.instructions.push(Instruction::JumpNonZero {
            cond,
            target: usize::MAX,
        });
    }

    fn halt(&mut self) {
        self.instructions.push(Instruction::Halt);
    }

    fn finish(mut self) -> Program {
        for (at, name) in &self.fixups {
            let target = *self
                .labels
                .get(name)
                .unwrap_or_else(|| panic!("emitter bug: unresolved label {name}"));
            match &mut self.instructions[*at] {
                Instruction::Jump { target: t }
                | Instruction::JumpZero { target: t, .. }
                | Instruction::JumpNonZero { target: t, .. } => *t = target,
                _ => unreachable!(),
            }
        }
        Program {
            instructions: self.instructions,
            labels: self.labels.into_iter().collect(),
        }
    }
}

/// dst = 2^len − 1 using ADD/MUL/SHL only: ones(2k) = ones(k)·(1 + 2^k),
/// ones(2k+1) = 2·ones(2k) + 1. O(log len) instructions.
fn emit_ones(asm: &mut Asm, dst: u64, len: u64) {
    if len == 0 {
        asm.load(dir(dst), lit(0));
        return;
    }
    asm.load(dir(dst), lit(1));
    if len == 1 {
        return;
    }
    let top = 63 - len.leading_zeros() as u64;
    let mut have: u64 = 1;
    for bit in (0..top).rev() {
        asm.bin(BinaryOp::Shl, dir(R_MUL), lit(1), lit(have));
        asm.bin(BinaryOp::Add, dir(R_MUL), dir(R_MUL), lit(1));
        asm.bin(BinaryOp::Mul, dir(dst), dir(dst), dir(R_MUL));
        have *= 2;
        if (len >> bit) & 1 == 1 {
            asm.bin(BinaryOp::Shl, dir(dst), dir(dst), lit(1));
            asm.bin(BinaryOp::Add, dir(dst), dir(dst), lit(1));
            have += 1;
        }
    }
    debug_assert_eq!(have, len);
}

/// dst = `count` copies of the pattern cell in fields of `width` bits,
/// by the doubling recurrence. Requires count ≥ 1 and dst ≠ pattern.
fn emit_replicate(asm: &mut Asm, dst: u64, pattern: u64, width: u64, count: u64) {
    debug_assert!(count >= 1 && dst != pattern);
    asm.load(dir(dst), dir(pattern));
    if count == 1 {
        return;
    }
    let top = 63 - count.leading_zeros() as u64;
    let mut have: u64 = 1;
    for bit in (0..top).rev() {
        asm.bin(BinaryOp::Shl, dir(R_MUL), lit(1), lit(have * width));
        asm.bin(BinaryOp::Add, dir(R_MUL), dir(R_MUL), lit(1));
        asm.bin(BinaryOp::Mul, dir(dst), dir(dst), dir(R_MUL));
        have *= 2;
        if (count >> bit) & 1 == 1 {
            asm.bin(BinaryOp::Shl, dir(dst), dir(dst), lit(width));
            asm.bin(BinaryOp::Add, dir(dst), dir(dst), dir(pattern));
            have += 1;
        }
    }
    debug_assert_eq!(have, count);
}

/// Which shared unshifted mask a rule's mask is a shifted copy of.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SharedMask {
    /// ones(g^{S-1}) — N-move rules select a whole block.
    OnesRun,
    /// digitmask(g, p, a, S-1) — L/R rules select one rest digit.
    Digit { p: u32, a: u8 },
}

fn shared_mask_of(rule: &StepRule, codec: &ConfigSetCodec, machine: &Machine) -> (SharedMask, u64) {
    let t = machine.transitions()[rule.provenance.transition];
    let from = codec.base(t.state, rule.provenance.head, t.read);
    match rule.provenance.scanned_after {
        None => (SharedMask::OnesRun, from),
        Some(a) => {
            let h = rule.provenance.head;
            let h2 = match t.mv {
                crate::ndtm::Move::L => h - 1,
                crate::ndtm::Move::R => h + 1,
                crate::ndtm::Move::N => h,
            };
            (SharedMask::Digit { p: h.min(h2), a }, from)
        }
    }
}

/// Compiles (machine, bounds) into an MRAM program performing the
/// configuration-set iteration, refusing universes over the bit budget.
pub fn emit(
    codec: &ConfigSetCodec,
    machine: &Machine,
    bounds: &Bounds,
    bit_budget: u64,
) -> Result<TranspileArtifact, EmitError> {
    debug_assert_eq!(codec.space(), bounds.space);
    let n = codec.universe_bits();
    if n > bit_budget {
        return Err(EmitError::UniverseTooWide {
            universe_bits: n,
            bit_budget,
        });
    }

    let space = codec.space();
    let rules = step_rules(codec, machine);
    let r = rules.len() as u64;
    let table_end = RULE_TABLE_BASE + 3 * r;
    let shared_base = table_end;

    // Plan the shared unshifted masks and their cells.
    let mut shared: BTreeMap<SharedMask, u64> = BTreeMap::new();
    for rule in &rules {
        let (kind, _) = shared_mask_of(rule, codec, machine);
        let next_cell = shared_base + shared.len() as u64;
        shared.entry(kind).or_insert(next_cell);
    }

    let mut asm = Asm::new();

    // current set = 2^{initial index}
    asm.bin(
        BinaryOp::Shl,
        dir(CELL_CURRENT_SET),
        lit(1),
        dir(CELL_INPUT_INDEX),
    );

    // universe mask = ones(N)
    emit_ones(&mut asm, R_UNIV, n);

    // accept mask: contiguous block of S·g^S indices per accepting state
    let state_block = space as u64 * codec.g_pow(space);
    let accepting: Vec<u32> = machine.accepting_states().collect();
    if !accepting.is_empty() {
        emit_ones(&mut asm, R_T1, state_block);
        for q in accepting {
            asm.bin(
                BinaryOp::Shl,
                dir(R_T0),
                dir(R_T1),
                lit(q as u64 * state_block),
            );
            asm.bin(
                BinaryOp::Or,
                dir(CELL_ACCEPT_MASK),
                dir(CELL_ACCEPT_MASK),
                dir(R_T0),
            );
        }
    }

    // shared unshifted masks
    for (kind, cell) in &shared {
        match *kind {
            SharedMask::OnesRun => emit_ones(&mut asm, *cell, codec.g_pow(space - 1)),
            SharedMask::Digit { p, a } => {
                emit_ones(&mut asm, R_T1, codec.g_pow(p));
                let offset = a as u64 * codec.g_pow(p);
                if offset > 0 {
                    asm.bin(BinaryOp::Shl, dir(R_T1), dir(R_T1), lit(offset));
                }
                emit_replicate(
                    &mut asm,
                    *cell,
                    R_T1,
                    codec.g_pow(p + 1),
                    codec.g_pow(space - 1 - p - 1),
                );
            }
        }
    }

    // rule table: mask = shared << base, then |shift| and direction
    for (i, rule) in rules.iter().enumerate() {
        let entry = RULE_TABLE_BASE + 3 * i as u64;
        let (kind, from) = shared_mask_of(rule, codec, machine);
        asm.bin(BinaryOp::Shl, dir(entry), dir(shared[&kind]), lit(from));
        asm.load(dir(entry + 1), lit(rule.shift.unsigned_abs()));
        asm.load(dir(entry + 2), lit(u64::from(rule.shift < 0)));
    }

    asm.load(dir(CELL_UNIVERSE_BITS), lit(n));

    let prologue_instructions = asm.here() as u64;

    // iteration loop
    asm.load(dir(R_ITER), lit(bounds.time as u64));
    asm.bin(
        BinaryOp::And,
        dir(R_T0),
        dir(CELL_CURRENT_SET),
        dir(CELL_ACCEPT_MASK),
    );
    asm.jnz(dir(R_T0), "accept");
    if r == 0 {
        // nothing can ever be added to the set
        asm.jump("reject");
    } else {
        asm.label("step");
        asm.jz(dir(R_ITER), "reject");
        asm.load(dir(R_NEXT), dir(CELL_CURRENT_SET));
        asm.load(dir(R_PTR), lit(RULE_TABLE_BASE));
        asm.label("rule");
        asm.bin(BinaryOp::And, dir(R_T0), dir(CELL_CURRENT_SET), ind(R_PTR));
        asm.bin(BinaryOp::Add, dir(R_T1), dir(R_PTR), lit(1));
        asm.bin(BinaryOp::Add, dir(R_T2), dir(R_PTR), lit(2));
        asm.jnz(ind(R_T2), "rshr");
        asm.bin(BinaryOp::Shl, dir(R_T0), dir(R_T0), ind(R_T1));
        asm.jump("rjoin");
        asm.label("rshr");
        asm.bin(BinaryOp::Shr, dir(R_T0), dir(R_T0), ind(R_T1));
        asm.label("rjoin");
        asm.bin(BinaryOp::And, dir(R_T0), dir(R_T0), dir(R_UNIV));
        asm.bin(BinaryOp::Or, dir(R_NEXT), dir(R_NEXT), dir(R_T0));
        asm.bin(BinaryOp::Add, dir(R_PTR), dir(R_PTR), lit(3));
        asm.bin(BinaryOp::Sub, dir(R_MUL), lit(table_end), dir(R_PTR));
        asm.jnz(dir(R_MUL), "rule");
        // fixed point and acceptance tests
        asm.bin(BinaryOp::Xor, dir(R_T0), dir(R_NEXT), dir(CELL_CURRENT_SET));
        asm.load(dir(CELL_CURRENT_SET), dir(R_NEXT));
        asm.bin(BinaryOp::Sub, dir(R_ITER), dir(R_ITER), lit(1));
        asm.bin(
            BinaryOp::And,
            dir(R_T1),
            dir(CELL_CURRENT_SET),
            dir(CELL_ACCEPT_MASK),
        );
        asm.jnz(dir(R_T1), "accept");
        asm.jz(dir(R_T0), "reject");
        asm.jump("step");
    }
    asm.label("accept");
    asm.load(dir(CELL_OUTPUT), lit(1));
    asm.halt();
    asm.label("reject");
    asm.load(dir(CELL_OUTPUT), lit(0));
    asm.halt();

    let program = asm.finish();
    debug_assert!(crate::isa::validate(&program).is_empty());

    let stats = EmitStats {
        rules: r,
        emitted_instructions: program.len() as u64,
        prologue_instructions,
        per_iteration_instructions: 11 * r + 10,
    };
    let layout = LayoutMap {
        output: CELL_OUTPUT,
        input_index: CELL_INPUT_INDEX,
        universe_bits: CELL_UNIVERSE_BITS,
        current_set: CELL_CURRENT_SET,
        accept_mask: CELL_ACCEPT_MASK,
        rule_table_base: RULE_TABLE_BASE,
        rules: r,
        scratch_base: shared_base,
    };
    Ok(TranspileArtifact {
        program,
        layout,
        stats,
    })
}

#[derive(Debug, Error)]
pub enum TripleError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("vm run failed: {0}")]
    Run(#[from] RunError),
    #[error("emitted program wrote {0} to the output cell; expected 0 or 1")]
    BadVerdict(Word),
}

/// The three verdicts side by side, plus everything the bench layer
/// records. `divergence` names the mismatch when the levels disagree;
/// callers treat that as a hard failure.
#[derive(Clone, Debug)]
pub struct TripleReport {
    pub oracle_accepted: bool,
    pub confset_accepted: bool,
    pub vm_accepted: bool,
    pub oracle_explored: u64,
    pub confset_iterations: u32,
    pub cost: CostReport,
    pub stats: EmitStats,
    pub universe_bits: u64,
    pub divergence: Option<String>,
}

impl TripleReport {
    pub fn agreed(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Runs the exhaustive oracle, the host bit-set simulation, and the
/// transpiled program on the vm, and compares the verdicts.
pub fn triple_check(
    machine: &Machine,
    input: &[u8],
    bounds: &Bounds,
    limits: &RunLimits,
) -> Result<TripleReport, TripleError> {
    let codec = ConfigSetCodec::new(machine, bounds.space)?;

    let oracle = oracle_accepts(machine, input, *bounds)?;
    let confset = reachable_accepts(&codec, machine, input, *bounds).map_err(|e| match e {
        crate::confset::ConfsetError::Input(err) => TripleError::Input(err),
    })?;

    let artifact = emit(
        &codec,
        machine,
        bounds,
        limits.bit_budget.unwrap_or(u64::MAX),
    )?;
    let initial = initial_config(machine, input, bounds.space)?;
    let image = Memory::from_pairs([(1u64, 1u64), (2u64, codec.index(&initial))]);
    let (state, cost) = run(&artifact.program, image, *limits)?;

    let out = state.memory.get(&Word::from(CELL_OUTPUT));
    let vm_accepted = match out.to_u64() {
        Some(0) => false,
        Some(1) => true,
        _ => return Err(TripleError::BadVerdict(out)),
    };

    let divergence = if oracle.accepted == confset.accepted && confset.accepted == vm_accepted {
        None
    } else {
        Some(format!(
            "oracle={}, confset={}, vm={}",
            oracle.accepted, confset.accepted, vm_accepted
        ))
    };

    Ok(TripleReport {
        oracle_accepted: oracle.accepted,
        confset_accepted: confset.accepted,
        vm_accepted,
        oracle_explored: oracle.explored,
        confset_iterations: confset.iterations,
        cost,
        stats: artifact.stats,
        universe_bits: codec.universe_bits(),
        divergence,
    })
}
