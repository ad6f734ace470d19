//! Host-level reference implementation of the configuration-set
//! simulation: the set of reachable configurations lives in one giant
//! [`Word`], advanced per step by precomputed mask-and-shift rules. The
//! transpiler emits the same algorithm as MRAM code.
//!
//! Rule derivation. A block of g^{S-1} consecutive indices shares
//! (state, head, scanned symbol); the offset inside the block is the rest
//! of the tape packed as an (S-1)-digit base-g number, cells in order,
//! skipping the head cell. Writing under the head and staying (N) moves
//! the whole block by a constant. Moving to a neighbouring cell h' swaps
//! which cell is packed: the re-ranking leaves every other cell's digit
//! position unchanged, the departed cell h keeps digit position
//! p = min(h, h'), so for each possible scanned-after-move symbol a' the
//! sub-block with rest digit p equal to a' shifts by the constant
//! base(q',h',a') − base(q,h,a) + (b − a')·g^p.

use thiserror::Error;

use crate::ndtm::{
    initial_config, Bounds, ConfigSetCodec, Configuration, InputError, Machine, Move,
};
use crate::word::{blockmask, digitmask, Word};

/// One unit of the simulation's inner loop: select a sub-block, slide it
/// to the successor block.
#[derive(Clone, Debug)]
pub struct StepRule {
    pub mask: Word,
    /// Bit-position delta; negative means shift right.
    pub shift: i64,
    pub provenance: RuleProvenance,
}

/// Where a rule came from: which transition, at which head position, and
/// (for L/R moves) which symbol sits under the head after the move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleProvenance {
    pub transition: usize,
    pub head: u32,
    pub scanned_after: Option<u8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfsetError {
    #[error(transparent)]
    Input(#[from] InputError),
}

/// Ones at exactly the indices whose state component is accepting.
pub fn accept_mask(codec: &ConfigSetCodec, machine: &Machine) -> Word {
    let space = codec.space();
    let g = codec.alphabet_size() as u8;
    let block = codec.g_pow(space - 1);
    let mut mask = Word::zero();
    for q in machine.accepting_states() {
        for h in 0..space {
            for a in 0..g {
                mask = &mask | &blockmask(codec.base(q, h, a), block);
            }
        }
    }
    mask
}

/// The full rule table: one rule per (transition, head) for N moves, one
/// per (transition, head, scanned-after-move symbol) for L/R moves.
/// |rules| ≤ |Δ|·S·g.
pub fn step_rules(codec: &ConfigSetCodec, machine: &Machine) -> Vec<StepRule> {
    let space = codec.space();
    let g = codec.alphabet_size();
    let block = codec.g_pow(space - 1);
    let mut rules = Vec::new();

    for (ti, t) in machine.transitions().iter().enumerate() {
        for h in 0..space {
            let h2 = h as i64
                + match t.mv {
                    Move::L => -1,
                    Move::R => 1,
                    Move::N => 0,
                };
            if h2 < 0 || h2 >= space as i64 {
                continue; // branch dies at the tape edge
            }
            let h2 = h2 as u32;
            let from = codec.base(t.state, h, t.read) as i64;

            match t.mv {
                Move::N => {
                    rules.push(StepRule {
                        mask: blockmask(from as u64, block),
                        shift: codec.base(t.next, h, t.write) as i64 - from,
                        provenance: RuleProvenance {
                            transition: ti,
                            head: h,
                            scanned_after: None,
                        },
                    });
                }
                Move::L | Move::R => {
                    // the departed cell h keeps digit position min(h, h')
                    let p = h.min(h2);
                    for scanned in 0..g as u8 {
                        let digits = digitmask(g, p, scanned as u64, space - 1)
                            .expect("digit parameters in range");
                        let shift = codec.base(t.next, h2, scanned) as i64 - from
                            + (t.write as i64 - scanned as i64) * codec.g_pow(p) as i64;
                        rules.push(StepRule {
                            mask: digits << from as u64,
                            shift,
                            provenance: RuleProvenance {
                                transition: ti,
                                head: h,
                                scanned_after: Some(scanned),
                            },
                        });
                    }
                }
            }
        }
    }
    rules
}

/// One simulation step: R' = R ∪ (∪ rules: shift(R ∩ mask)), clipped back
/// to the universe. Monotone: the result always contains R.
pub fn step_set(set: &Word, rules: &[StepRule], universe: &Word) -> Word {
    let mut next = set.clone();
    for rule in rules {
        let selected = set & &rule.mask;
        if selected.is_zero() {
            continue;
        }
        let moved = if rule.shift >= 0 {
            selected << rule.shift as u64
        } else {
            &selected >> rule.shift.unsigned_abs()
        };
        next = &next | &moved;
    }
    &next & universe
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachOutcome {
    pub accepted: bool,
    /// Iterations actually run before accept, fixed point, or the bound.
    pub iterations: u32,
}

/// Iterates the reachable set from the initial configuration for at most
/// `bounds.time` steps, with early exit on acceptance or a fixed point.
pub fn reachable_accepts(
    codec: &ConfigSetCodec,
    machine: &Machine,
    input: &[u8],
    bounds: Bounds,
) -> Result<ReachOutcome, ConfsetError> {
    let initial = initial_config(machine, input, bounds.space)?;
    let rules = step_rules(codec, machine);
    let accept = accept_mask(codec, machine);
    let universe = blockmask(0, codec.universe_bits());

    let mut set = Word::zero();
    set.set_bit(codec.index(&initial), true);

    if !(&set & &accept).is_zero() {
        return Ok(ReachOutcome {
            accepted: true,
            iterations: 0,
        });
    }
    for iteration in 1..=bounds.time {
        let next = step_set(&set, &rules, &universe);
        if !(&next & &accept).is_zero() {
            return Ok(ReachOutcome {
                accepted: true,
                iterations: iteration,
            });
        }
        if next == set {
            return Ok(ReachOutcome {
                accepted: false,
                iterations: iteration,
            });
        }
        set = next;
    }
    Ok(ReachOutcome {
        accepted: false,
        iterations: bounds.time,
    })
}

/// Decodes a set word back into configurations; test and debugging aid.
pub fn decode_set(codec: &ConfigSetCodec, set: &Word) -> Vec<Configuration> {
    set.iter_set_bits()
        .map(|i| codec.unindex(i).expect("set bit inside the universe"))
        .collect()
}
