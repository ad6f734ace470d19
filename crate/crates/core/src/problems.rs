//! Problem front ends: CNF satisfiability (DIMACS parser, brute-force
//! oracle, CNF-to-NDTM generator) and the direct-address linear sort.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::asm::Diagnostic;
use crate::isa::{BinaryOp, Instruction, Operand, Program};
use crate::ndtm::{Bounds, Move, NdtmSpec, TransitionRule};

/// A CNF formula: 1-based variables, literals as signed indices, no empty
/// clauses (the parser rejects them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn total_literals(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }
}

/// Parses DIMACS CNF text: `c` comments, a `p cnf <vars> <clauses>`
/// header, then 0-terminated clauses that may span lines. Returns either
/// the formula or every diagnostic found.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, Vec<Diagnostic>> {
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let mut header: Option<(u32, u32)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut current_start_line = 0usize;

    let mut diag = |line: usize, message: String| {
        diagnostics.push(Diagnostic { line, message });
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                diag(line_no, format!("malformed header `{line}`"));
                continue;
            }
            let vars = fields[2].parse::<u32>();
            let count = fields[3].parse::<u32>();
            match (vars, count) {
                (Ok(v), Ok(c)) => {
                    if header.replace((v, c)).is_some() {
                        diag(line_no, "duplicate header".to_string());
                    }
                }
                _ => diag(line_no, format!("malformed header counts in `{line}`")),
            }
            continue;
        }
        if header.is_none() {
            diag(line_no, "clause data before the `p cnf` header".to_string());
            // keep a permissive bound so later literals still get checked
            header = Some((u32::MAX, u32::MAX));
        }
        for token in line.split_whitespace() {
            let lit = match token.parse::<i32>() {
                Ok(l) => l,
                Err(_) => {
                    diag(line_no, format!("malformed literal `{token}`"));
                    continue;
                }
            };
            if lit == 0 {
                if current.is_empty() {
                    diag(line_no, "empty clause".to_string());
                } else {
                    clauses.push(std::mem::take(&mut current));
                }
                continue;
            }
            if current.is_empty() {
                current_start_line = line_no;
            }
            let var = lit.unsigned_abs();
            if let Some((num_vars, _)) = header {
                if var > num_vars {
                    diag(
                        line_no,
                        format!("literal {lit} out of range (1..={num_vars})"),
                    );
                    continue;
                }
            }
            current.push(lit);
        }
    }

    if !current.is_empty() {
        diagnostics.push(Diagnostic {
            line: current_start_line,
            message: "unterminated clause (missing 0)".to_string(),
        });
    }
    let (num_vars, declared) = match header {
        Some(h) => h,
        None => {
            diagnostics.push(Diagnostic {
                line: 0,
                message: "missing `p cnf` header".to_string(),
            });
            (0, 0)
        }
    };
    // `u32::MAX` marks the missing-header fallback; counts were never declared
    if declared != u32::MAX && clauses.len() as u32 != declared {
        diagnostics.push(Diagnostic {
            line: 0,
            message: format!(
                "header declares {declared} clauses but {} were found",
                clauses.len()
            ),
        });
    }

    if diagnostics.is_empty() {
        Ok(CnfFormula { num_vars, clauses })
    } else {
        Err(diagnostics)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("{num_vars} variables exceed the exhaustive-search guard of {max}")]
    TooManyVariables { num_vars: u32, max: u32 },
}

pub const SAT_ORACLE_MAX_VARS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatOutcome {
    /// First satisfying assignment in lexicographic order (false < true,
    /// x1 most significant), if any.
    pub assignment: Option<Vec<bool>>,
    pub tested: u64,
}

fn clause_satisfied(clause: &[i32], assignment: &[bool]) -> bool {
    clause.iter().any(|&lit| {
        let value = assignment[lit.unsigned_abs() as usize - 1];
        if lit > 0 {
            value
        } else {
            !value
        }
    })
}

/// Exhaustively tries all 2^num_vars assignments. An empty conjunction is
/// satisfiable (by the all-false assignment, the first one tested).
pub fn sat_oracle(formula: &CnfFormula) -> Result<SatOutcome, SatError> {
    if formula.num_vars > SAT_ORACLE_MAX_VARS {
        return Err(SatError::TooManyVariables {
            num_vars: formula.num_vars,
            max: SAT_ORACLE_MAX_VARS,
        });
    }
    let n = formula.num_vars;
    let mut tested = 0u64;
    for counter in 0..(1u64 << n) {
        tested += 1;
        let assignment: Vec<bool> = (0..n).map(|i| (counter >> (n - 1 - i)) & 1 == 1).collect();
        if formula
            .clauses
            .iter()
            .all(|c| clause_satisfied(c, &assignment))
        {
            return Ok(SatOutcome {
                assignment: Some(assignment),
                tested,
            });
        }
    }
    Ok(SatOutcome {
        assignment: None,
        tested,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("the generator needs at least one variable")]
    NoVariables,
}

/// Documented constant for the generated machine size:
/// |Q| ≤ SIZE_FACTOR · (num_vars + total literals) over the desk-scale
/// instance range this repository exercises.
pub const SIZE_FACTOR: u64 = 8;

struct MachineBuilder {
    states: Vec<String>,
    transitions: Vec<TransitionRule>,
}

impl MachineBuilder {
    fn add_state(&mut self, name: String) -> usize {
        self.states.push(name);
        self.states.len() - 1
    }

    /// Transition reading either written bit, copying it back, moving
    /// `mv`, into `next`. Used by every walk state.
    fn walk_edges(&mut self, from: usize, mv: Move, next: usize) {
        for s in ["0", "1"] {
            self.transitions.push(TransitionRule(
                self.states[from].clone(),
                s.into(),
                self.states[next].clone(),
                s.into(),
                mv,
            ));
        }
    }

    fn edge(&mut self, from: usize, read: &str, next: usize, write: &str, mv: Move) {
        self.transitions.push(TransitionRule(
            self.states[from].clone(),
            read.into(),
            self.states[next].clone(),
            write.into(),
            mv,
        ));
    }

    /// A chain of walk states carrying the head from `from_pos` to
    /// `to_pos`, ending in `target` (which expects the head at `to_pos`).
    /// Returns the state expecting the head at `from_pos`.
    fn walk_chain(&mut self, prefix: &str, from_pos: u32, to_pos: u32, target: usize) -> usize {
        if from_pos == to_pos {
            return target;
        }
        let (step, mv): (i64, Move) = if from_pos < to_pos {
            (1, Move::R)
        } else {
            (-1, Move::L)
        };
        let mut next = target;
        // build backwards from the cell adjacent to the target
        let mut pos = (to_pos as i64 - step) as u32;
        loop {
            let id = self.add_state(format!("{prefix}p{pos}"));
            self.walk_edges(id, mv, next);
            next = id;
            if pos == from_pos {
                return next;
            }
            pos = (pos as i64 - step) as u32;
        }
    }
}

/// Clause literals as (cell, polarity) in cell order. Duplicates and
/// opposite polarities are kept: same-cell literals chain with N moves,
/// so a tautological clause simply satisfies on one of its two tests.
fn normalize_clause(clause: &[i32]) -> Vec<(u32, bool)> {
    let mut lits: Vec<(u32, bool)> = clause
        .iter()
        .map(|&l| (l.unsigned_abs() - 1, l > 0))
        .collect();
    lits.sort_unstable();
    lits
}

/// Longest path in steps from the start state; the generated machine's
/// state graph is a DAG, so this is the exact worst-case step count.
fn longest_path(spec: &NdtmSpec) -> u32 {
    let index: std::collections::HashMap<&str, usize> = spec
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); spec.states.len()];
    for t in &spec.transitions {
        adj[index[t.0.as_str()]].push(index[t.2.as_str()]);
    }
    let mut memo: Vec<Option<u32>> = vec![None; spec.states.len()];
    // iterative DFS; the graph is small and acyclic by construction
    let start = index[spec.start.as_str()];
    let mut stack = vec![(start, 0usize)];
    while let Some(&(node, edge)) = stack.last() {
        if memo[node].is_some() {
            stack.pop();
            continue;
        }
        if edge < adj[node].len() {
            stack.last_mut().unwrap().1 += 1;
            let next = adj[node][edge];
            if memo[next].is_none() {
                stack.push((next, 0));
            }
        } else {
            let best = adj[node]
                .iter()
                .filter_map(|&n| memo[n])
                .map(|d| d + 1)
                .max()
                .unwrap_or(0);
            memo[node] = Some(best);
            stack.pop();
        }
    }
    memo[start].unwrap_or(0)
}

/// Builds the guess-and-verify machine for a formula: phase 1 writes a
/// candidate assignment into cells 0..n−1 nondeterministically; phase 2
/// walks each clause's literal cells in ascending order, short-circuiting
/// to the next clause on satisfaction and rejecting when a clause runs
/// out of literals. Exact bounds are returned with the machine:
/// S = num_vars and T = the worst-case step count of the state DAG.
pub fn cnf_to_ndtm(formula: &CnfFormula) -> Result<(NdtmSpec, Bounds), GenError> {
    let n = formula.num_vars;
    if n == 0 {
        return Err(GenError::NoVariables);
    }

    let mut b = MachineBuilder {
        states: Vec::new(),
        transitions: Vec::new(),
    };
    let acc = b.add_state("acc".to_string());
    let rej = b.add_state("rej".to_string());

    debug_assert!(formula.clauses.iter().all(|c| !c.is_empty()));
    let clauses: Vec<Vec<(u32, bool)>> = formula
        .clauses
        .iter()
        .map(|c| normalize_clause(c))
        .collect();

    // Head position at each clause's entry: after the guess phase the head
    // sits at n−2 (or 0 when n = 1); each clause exits at its last cell.
    let pos_after_guess = n.saturating_sub(2);
    let mut entry_pos: Vec<u32> = Vec::with_capacity(clauses.len());
    let mut cur = pos_after_guess;
    for clause in &clauses {
        entry_pos.push(cur);
        cur = clause.last().expect("normalized clauses are non-empty").0;
    }

    // Build chains last-clause-first so each clause knows its successor.
    let mut next_entry = acc;
    for (j, clause) in clauses.iter().enumerate().rev() {
        let k = clause.len();
        let c_first = clause[0].0;
        let c_last = clause[k - 1].0;

        // Satisfied track: carry the head from any literal cell to the
        // clause exit at c_last without further tests. sat_at[p] expects
        // the head at p; position c_last is the next clause's entry.
        let mut sat_at: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
        sat_at.insert(c_last, next_entry);
        {
            let mut next = next_entry;
            for pos in (c_first + 1..c_last).rev() {
                let id = b.add_state(format!("c{j}s{pos}"));
                b.walk_edges(id, Move::R, next);
                sat_at.insert(pos, id);
                next = id;
            }
        }

        // Tests, last literal first.
        let mut next_test = usize::MAX;
        for (t, &(cell, positive)) in clause.iter().enumerate().rev() {
            let test = b.add_state(format!("c{j}t{t}"));
            let (good, bad) = if positive { ("1", "0") } else { ("0", "1") };
            // satisfied: head to the clause exit
            if cell == c_last {
                b.edge(test, good, next_entry, good, Move::N);
            } else {
                b.edge(test, good, sat_at[&(cell + 1)], good, Move::R);
            }
            // unsatisfied: next literal, or reject after the last
            if t + 1 == k {
                b.edge(test, bad, rej, bad, Move::N);
            } else {
                let next_cell = clause[t + 1].0;
                if next_cell == cell {
                    b.edge(test, bad, next_test, bad, Move::N);
                } else {
                    let walk = b.walk_chain(&format!("c{j}u{t}"), cell + 1, next_cell, next_test);
                    b.edge(test, bad, walk, bad, Move::R);
                }
            }
            next_test = test;
        }

        next_entry = b.walk_chain(&format!("c{j}e"), entry_pos[j], c_first, next_test);
    }

    // Guess phase: write 0 or 1 into every cell, moving right, with the
    // last write turning back (or staying, for a one-cell tape).
    let guess: Vec<usize> = (0..n).map(|i| b.add_state(format!("g{i}"))).collect();
    for i in 0..n {
        let (mv, next) = if i + 1 < n {
            (Move::R, guess[i as usize + 1])
        } else if n >= 2 {
            (Move::L, next_entry)
        } else {
            (Move::N, next_entry)
        };
        b.edge(guess[i as usize], "_", next, "0", mv);
        b.edge(guess[i as usize], "_", next, "1", mv);
    }

    let spec = NdtmSpec {
        states: b.states,
        tape_alphabet: vec!["_".into(), "0".into(), "1".into()],
        blank: "_".into(),
        input_alphabet: vec!["0".into(), "1".into()],
        transitions: b.transitions,
        start: "g0".to_string(),
        accept: vec!["acc".into()],
        reject: vec!["rej".into()],
    };
    let time = longest_path(&spec);
    Ok((spec, Bounds { space: n, time }))
}

/// Where the emitted sort program keeps its data. Registers and table are
/// placed past the input region so they never collide with it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SortLayout {
    pub reg_base: u64,
    pub table_base: u64,
    pub out_base: u64,
}

pub fn sort_layout(n: u64, max_key: u64) -> SortLayout {
    let reg_base = (2 + n).max(16);
    let table_base = reg_base + 3;
    SortLayout {
        reg_base,
        table_base,
        out_base: table_base + max_key + 1,
    }
}

/// Documented unit-cost constants for the emitted sort:
/// executed ≤ SORT_C1·n + SORT_C2·max_key + SORT_C3.
pub const SORT_C1: u64 = 8;
pub const SORT_C2: u64 = 2;
pub const SORT_C3: u64 = 8;

/// Counting sort as an MRAM program: one pass bumping cell
/// (table_base + k) per input key k — the direct-address trick — then one
/// sweep over 0..=max_key writing each key multiplicity-many times to the
/// output region. Keys above max_key make the run fault: their counts
/// land past the table, so the final written-count check trips a
/// deliberate division by zero.
pub fn direct_sort_program(n: u64, max_key: u64) -> Program {
    let layout = sort_layout(n, max_key);
    let cnt = layout.reg_base;
    let out = layout.reg_base + 1;
    let tmp = layout.reg_base + 2;
    let table = layout.table_base;

    let mut asm = SortAsm::default();

    // the input convention pins cell 1 to the item count
    asm.bin(BinaryOp::Xor, dir(tmp), dir(1), lit(n));
    asm.jnz(dir(tmp), "bad");
    if n > 0 {
        for i in 0..n {
            asm.bin(BinaryOp::Add, dir(tmp), dir(2 + i), lit(table));
            asm.bin(BinaryOp::Add, ind(tmp), ind(tmp), lit(1));
        }
        asm.load(dir(out), lit(layout.out_base));
        for k in 0..=max_key {
            let done = format!("k{k}d");
            let again = format!("k{k}l");
            asm.jz(dir(table + k), &done);
            asm.load(dir(cnt), dir(table + k));
            asm.label(&again);
            asm.load(ind(out), lit(k));
            asm.bin(BinaryOp::Add, dir(out), dir(out), lit(1));
            asm.bin(BinaryOp::Sub, dir(cnt), dir(cnt), lit(1));
            asm.jnz(dir(cnt), &again);
            asm.label(&done);
        }
        asm.bin(BinaryOp::Sub, dir(tmp), dir(out), lit(layout.out_base));
        asm.bin(BinaryOp::Xor, dir(tmp), dir(tmp), dir(1));
        asm.jnz(dir(tmp), "bad");
    }
    asm.halt();
    asm.label("bad");
    asm.bin(BinaryOp::Div, dir(tmp), lit(1), lit(0));

    asm.finish()
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

// Same shape as the transpiler's builder; small enough that sharing would
// couple the modules for no gain.
#[derive(Default)]
struct SortAsm {
    instructions: Vec<Instruction>,
    labels: std::collections::BTreeMap<String, usize>,
    fixups: Vec<(usize, String)>,
}

impl SortAsm {
    fn label(&mut self, name: &str) {
        self.labels
            .insert(name.to_string(), self.instructions.len());
    }

    fn load(&mut self, dst: Operand, src: Operand) {
        self.instructions.push(Instruction::Load { dst, src });
    }

    fn bin(&mut self, op: BinaryOp, dst: Operand, lhs: Operand, rhs: Operand) {
        self.instructions
            .push(Instruction::Binary { op, dst, lhs, rhs });
    }

    fn jz(&mut self, cond: Operand, target: &str) {
        self.fixups
            .push((self.instructions.len(), target.to_string()));
        self.instructions.push(Instruction::JumpZero {
            cond,
            target: usize::MAX,
        });
    }

    fn jnz(&mut self, cond: Operand, target: &str) {
        self.fixups
            .push((self.instructions.len(), target.to_string()));
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
            let target = self.labels[name];
            match &mut self.instructions[*at] {
                Instruction::JumpZero { target: t, .. }
                | Instruction::JumpNonZero { target: t, .. }
                | Instruction::Jump { target: t } => *t = target,
                _ => unreachable!(),
            }
        }
        Program {
            instructions: self.instructions,
            labels: self.labels,
        }
    }
}

/// The seed for the fixed pseudorandom formula sweep shipped with the
/// repository's checks; recorded here so the sweep is reproducible.
pub const SWEEP_SEED: u64 = 0x5EED_2016;

fn pick(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    rng.next_u64() % bound
}

/// A pseudorandom formula: `num_clauses` clauses of `lits_per_clause`
/// literals each, variables drawn uniformly with uniform polarity.
pub fn random_formula(
    rng: &mut ChaCha8Rng,
    num_vars: u32,
    num_clauses: u32,
    lits_per_clause: u32,
) -> CnfFormula {
    let clauses = (0..num_clauses)
        .map(|_| {
            (0..lits_per_clause)
                .map(|_| {
                    let var = pick(rng, num_vars as u64) as i32 + 1;
                    if pick(rng, 2) == 1 {
                        var
                    } else {
                        -var
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula { num_vars, clauses }
}

/// The fixed sweep: `count` formulas with 1..=3 variables, 1..=3 clauses,
/// 1..=2 literals per clause.
pub fn formula_sweep(count: usize, seed: u64) -> Vec<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let num_vars = pick(&mut rng, 3) as u32 + 1;
            let num_clauses = pick(&mut rng, 3) as u32 + 1;
            let lits = pick(&mut rng, 2) as u32 + 1;
            random_formula(&mut rng, num_vars, num_clauses, lits)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndtm::{oracle_accepts, validate_spec};
    use crate::vm::{run, Memory, RunError, RunLimits};
    use crate::word::Word;

    fn limits() -> RunLimits {
        RunLimits {
            fuel: 10_000_000,
            bit_budget: Some(1 << 24),
        }
    }

    #[test]
    fn parses_simple_dimacs() {
        let f = parse_dimacs("p cnf 2 2\n1 -2 0\n2 0").unwrap();
        assert_eq!(f.num_vars, 2);
        assert_eq!(f.clauses, vec![vec![1, -2], vec![2]]);
    }

    #[test]
    fn comments_and_multiline_clauses_parse() {
        let f = parse_dimacs("c comment\np cnf 3 1\n1\n-2 3 0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1, -2, 3]]);
    }

    #[test]
    fn empty_clause_is_a_diagnostic() {
        let diags = parse_dimacs("p cnf 1 1\n0").unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("empty clause")));
    }

    #[test]
    fn out_of_range_literal_is_a_diagnostic() {
        let diags = parse_dimacs("p cnf 2 1\n1 3 0").unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("out of range")));
    }

    #[test]
    fn clause_count_mismatch_is_a_diagnostic() {
        let diags = parse_dimacs("p cnf 2 3\n1 0\n2 0").unwrap_err();
        assert!(diags
            .iter()
            .any(|d| d.message.contains("declares 3 clauses")));
    }

    #[test]
    fn multiple_defects_all_reported() {
        let diags = parse_dimacs("p cnf 1 2\n0\n5 0\nx 0").unwrap_err();
        assert!(diags.len() >= 3, "{diags:?}");
    }

    #[test]
    fn sat_oracle_finds_lexicographically_first_assignment() {
        // (x1 ∨ ¬x2) ∧ (x2): FF sat? c2 fails. FT: c1 fails. TF: c2 fails.
        // TT: both hold — the 4th assignment tested.
        let f = CnfFormula {
            num_vars: 2,
            clauses: vec![vec![1, -2], vec![2]],
        };
        let out = sat_oracle(&f).unwrap();
        assert_eq!(out.assignment, Some(vec![true, true]));
        assert_eq!(out.tested, 4);
    }

    #[test]
    fn sat_oracle_reports_unsat() {
        let f = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![1], vec![-1]],
        };
        let out = sat_oracle(&f).unwrap();
        assert_eq!(out.assignment, None);
        assert_eq!(out.tested, 2);
    }

    #[test]
    fn empty_formula_is_satisfiable_by_all_false() {
        let f = CnfFormula {
            num_vars: 2,
            clauses: vec![],
        };
        let out = sat_oracle(&f).unwrap();
        assert_eq!(out.assignment, Some(vec![false, false]));
        assert_eq!(out.tested, 1);
    }

    #[test]
    fn sat_oracle_guards_against_large_instances() {
        let f = CnfFormula {
            num_vars: 21,
            clauses: vec![],
        };
        assert!(sat_oracle(&f).is_err());
    }

    #[test]
    fn single_positive_clause_machine_accepts_by_writing_one() {
        let f = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![1]],
        };
        let (spec, bounds) = cnf_to_ndtm(&f).unwrap();
        let m = validate_spec(&spec).unwrap();
        let out = oracle_accepts(&m, &[], bounds).unwrap();
        assert!(out.accepted);
        let witness = out.witness.unwrap();
        let last = witness.last().unwrap();
        // the satisfying branch wrote 1 into cell 0
        assert_eq!(m.symbol_name(last.tape[0]), "1");
    }

    #[test]
    fn contradiction_machine_rejects_every_branch() {
        let f = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![1], vec![-1]],
        };
        let (spec, bounds) = cnf_to_ndtm(&f).unwrap();
        let m = validate_spec(&spec).unwrap();
        assert!(!oracle_accepts(&m, &[], bounds).unwrap().accepted);
    }

    #[test]
    fn tautological_clause_is_always_satisfied() {
        let f = CnfFormula {
            num_vars: 2,
            clauses: vec![vec![1, -1]],
        };
        let (spec, bounds) = cnf_to_ndtm(&f).unwrap();
        let m = validate_spec(&spec).unwrap();
        assert!(oracle_accepts(&m, &[], bounds).unwrap().accepted);
    }

    #[test]
    fn duplicate_literals_chain_without_moving() {
        // (x1 ∨ x1 ∨ x1) over one variable: no R moves in the verify
        // phase, so S = 1 still works
        let f = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![1, 1, 1], vec![-1, 1, -1]],
        };
        let (spec, bounds) = cnf_to_ndtm(&f).unwrap();
        let m = validate_spec(&spec).unwrap();
        let out = oracle_accepts(&m, &[], bounds).unwrap();
        // second clause is tautological, first needs x1 = true
        assert!(out.accepted);
        assert_eq!(sat_oracle(&f).unwrap().assignment, Some(vec![true]));
    }

    #[test]
    fn generator_needs_a_variable() {
        let f = CnfFormula {
            num_vars: 0,
            clauses: vec![],
        };
        assert_eq!(cnf_to_ndtm(&f), Err(GenError::NoVariables));
    }

    /// The generated machine decides exactly what the brute-force SAT
    /// oracle decides, over the fixed 100-formula sweep.
    #[test]
    fn sweep_agrees_with_sat_oracle() {
        for (i, f) in formula_sweep(100, SWEEP_SEED).iter().enumerate() {
            let (spec, bounds) = cnf_to_ndtm(f).unwrap();
            let m = validate_spec(&spec).expect("generated machines validate");
            let machine_verdict = oracle_accepts(&m, &[], bounds).unwrap().accepted;
            let sat_verdict = sat_oracle(f).unwrap().assignment.is_some();
            assert_eq!(machine_verdict, sat_verdict, "formula {i}: {f:?}");
        }
    }

    #[test]
    fn generated_machine_size_stays_linear_in_the_instance() {
        for f in formula_sweep(100, SWEEP_SEED) {
            let (spec, _) = cnf_to_ndtm(&f).unwrap();
            let budget = SIZE_FACTOR * (f.num_vars as u64 + f.total_literals() as u64);
            assert!(
                (spec.states.len() as u64) <= budget,
                "|Q|={} over budget {budget} for {f:?}",
                spec.states.len()
            );
        }
    }

    fn run_sort(keys: &[u64], max_key: u64) -> Result<Vec<u64>, RunError> {
        let n = keys.len() as u64;
        let program = direct_sort_program(n, max_key);
        assert!(crate::isa::validate(&program).is_empty());
        let layout = sort_layout(n, max_key);
        let image = Memory::input_image(&keys.iter().map(|&k| Word::from(k)).collect::<Vec<_>>());
        let (state, report) = run(&program, image, limits())?;
        // documented cost contract, and the coarser (8,8,8) cap
        let bound = SORT_C1 * n + SORT_C2 * max_key + SORT_C3;
        assert!(report.executed <= bound, "{} > {bound}", report.executed);
        assert!(report.executed <= 8 * n + 8 * max_key + 8);
        Ok((0..n)
            .map(|i| {
                state
                    .memory
                    .get(&Word::from(layout.out_base + i))
                    .to_u64()
                    .unwrap()
            })
            .collect())
    }

    #[test]
    fn sorts_the_spec_examples() {
        assert_eq!(run_sort(&[3, 1, 2], 4).unwrap(), vec![1, 2, 3]);
        assert_eq!(run_sort(&[2, 2, 1], 4).unwrap(), vec![1, 2, 2]);
        assert_eq!(run_sort(&[], 4).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn sorts_corner_sizes() {
        for (n, max_key) in [
            (0u64, 0u64),
            (0, 7),
            (1, 0),
            (1, 1),
            (2, 0),
            (2, 1),
            (5, 2),
            (8, 8),
        ] {
            let keys: Vec<u64> = (0..n).map(|i| (i * 7 + 3) % (max_key + 1)).collect();
            let mut expected = keys.clone();
            expected.sort_unstable();
            assert_eq!(
                run_sort(&keys, max_key).unwrap(),
                expected,
                "n={n} K={max_key}"
            );
        }
    }

    #[test]
    fn out_of_range_key_faults() {
        let err = run_sort(&[1, 9], 4).unwrap_err();
        assert!(matches!(err, RunError::DivideByZero { .. }));
    }

    #[test]
    fn length_mismatch_faults() {
        let program = direct_sort_program(3, 4);
        // cell 1 says two items but the program was emitted for three
        let image = Memory::from_pairs([(1u64, 2u64), (2u64, 1u64), (3u64, 0u64)]);
        let err = run(&program, image, limits()).unwrap_err();
        assert!(matches!(err, RunError::DivideByZero { .. }));
    }

    #[test]
    fn random_sorts_match_the_host_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = pick(&mut rng, 40);
            let max_key = pick(&mut rng, 60);
            let keys: Vec<u64> = (0..n).map(|_| pick(&mut rng, max_key + 1)).collect();
            let mut expected = keys.clone();
            expected.sort_unstable();
            assert_eq!(run_sort(&keys, max_key).unwrap(), expected);
        }
    }

    #[test]
    fn sweep_is_reproducible() {
        assert_eq!(formula_sweep(10, SWEEP_SEED), formula_sweep(10, SWEEP_SEED));
        assert_ne!(formula_sweep(10, 1), formula_sweep(10, 2));
    }
}
