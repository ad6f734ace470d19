//! Space/time-bounded single-tape nondeterministic Turing machines:
//! the JSON-facing specification, validation into a numeric [`Machine`],
//! configurations and their successor relation, the configuration/index
//! codec, and the brute-force breadth-first acceptance oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Head movement. `N` (stay) simplifies generated verifier machines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
    N,
}

/// One transition record: (state, read, state', write, move).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRule(pub String, pub String, pub String, pub String, pub Move);

/// The on-disk machine description. This shape is the normative file
/// format (`.json`); see the `machines/` directory for the shipped corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdtmSpec {
    pub states: Vec<String>,
    pub tape_alphabet: Vec<String>,
    pub blank: String,
    pub input_alphabet: Vec<String>,
    pub transitions: Vec<TransitionRule>,
    pub start: String,
    pub accept: Vec<String>,
    pub reject: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpecDefect {
    #[error("no states declared")]
    NoStates,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate tape symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("blank symbol `{0}` is not in the tape alphabet")]
    BlankNotInAlphabet(String),
    #[error("input symbol `{0}` is not a non-blank tape symbol")]
    BadInputSymbol(String),
    #[error("start state `{0}` is not a declared state")]
    UnknownStart(String),
    #[error("accepting state `{0}` is not a declared state")]
    UnknownAccept(String),
    #[error("rejecting state `{0}` is not a declared state")]
    UnknownReject(String),
    #[error("state `{0}` is both accepting and rejecting")]
    AcceptRejectOverlap(String),
    #[error("transition {0} references unknown state `{1}`")]
    UnknownTransitionState(usize, String),
    #[error("transition {0} references unknown symbol `{1}`")]
    UnknownTransitionSymbol(usize, String),
    #[error("transition {0} leaves halting state `{1}`")]
    TransitionFromHalting(usize, String),
}

/// A transition in numeric form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub state: u32,
    pub read: u8,
    pub next: u32,
    pub write: u8,
    pub mv: Move,
}

/// A validated machine. Symbol and state numbering is fixed here and
/// inherited by the codec, so configuration indices are stable across
/// runs: the blank is digit 0 and the start state is state 0, with the
/// remaining entries following declaration order.
#[derive(Clone, Debug)]
pub struct Machine {
    spec: NdtmSpec,
    state_names: Vec<String>,
    symbol_names: Vec<String>,
    state_ids: HashMap<String, u32>,
    symbol_ids: HashMap<String, u8>,
    accepting: Vec<bool>,
    rejecting: Vec<bool>,
    delta: Vec<Transition>,
    // (state, symbol) -> indices into delta
    by_state_symbol: HashMap<(u32, u8), Vec<usize>>,
}

impl Machine {
    pub fn spec(&self) -> &NdtmSpec {
        &self.spec
    }

    pub fn num_states(&self) -> u32 {
        self.state_names.len() as u32
    }

    /// |Γ|, the base of the configuration digit encoding.
    pub fn alphabet_size(&self) -> u8 {
        self.symbol_names.len() as u8
    }

    pub fn start_state(&self) -> u32 {
        0
    }

    pub fn blank_symbol(&self) -> u8 {
        0
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    pub fn is_rejecting(&self, state: u32) -> bool {
        self.rejecting[state as usize]
    }

    pub fn is_halting(&self, state: u32) -> bool {
        self.is_accepting(state) || self.is_rejecting(state)
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.num_states()).filter(|&q| self.is_accepting(q))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.delta
    }

    pub fn state_name(&self, id: u32) -> &str {
        &self.state_names[id as usize]
    }

    pub fn symbol_name(&self, id: u8) -> &str {
        &self.symbol_names[id as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<u32> {
        self.state_ids.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<u8> {
        self.symbol_ids.get(name).copied()
    }

    fn applicable(&self, state: u32, symbol: u8) -> &[usize] {
        self.by_state_symbol
            .get(&(state, symbol))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Maps an input string, one character per symbol name, to symbol ids.
    /// Every character must name an input-alphabet symbol.
    pub fn parse_input(&self, text: &str) -> Result<Vec<u8>, InputError> {
        text.chars()
            .map(|c| {
                let name = c.to_string();
                let id = self
                    .symbol_id(&name)
                    .ok_or_else(|| InputError::UnknownSymbol(name.clone()))?;
                if self.spec.input_alphabet.iter().any(|s| s == &name) {
                    Ok(id)
                } else {
                    Err(InputError::NotInputSymbol(name))
                }
            })
            .collect()
    }
}

/// Checks every spec invariant; returns the numeric machine only when the
/// defect list is empty.
pub fn validate_spec(spec: &NdtmSpec) -> Result<Machine, Vec<SpecDefect>> {
    let mut defects = Vec::new();

    if spec.states.is_empty() {
        defects.push(SpecDefect::NoStates);
    }
    let mut seen = BTreeSet::new();
    for s in &spec.states {
        if !seen.insert(s.clone()) {
            defects.push(SpecDefect::DuplicateState(s.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for s in &spec.tape_alphabet {
        if !seen.insert(s.clone()) {
            defects.push(SpecDefect::DuplicateSymbol(s.clone()));
        }
    }
    if !spec.tape_alphabet.contains(&spec.blank) {
        defects.push(SpecDefect::BlankNotInAlphabet(spec.blank.clone()));
    }
    for s in &spec.input_alphabet {
        if s == &spec.blank || !spec.tape_alphabet.contains(s) {
            defects.push(SpecDefect::BadInputSymbol(s.clone()));
        }
    }
    if !spec.states.contains(&spec.start) {
        defects.push(SpecDefect::UnknownStart(spec.start.clone()));
    }
    for s in &spec.accept {
        if !spec.states.contains(s) {
            defects.push(SpecDefect::UnknownAccept(s.clone()));
        }
    }
    for s in &spec.reject {
        if !spec.states.contains(s) {
            defects.push(SpecDefect::UnknownReject(s.clone()));
        }
        if spec.accept.contains(s) {
            defects.push(SpecDefect::AcceptRejectOverlap(s.clone()));
        }
    }
    let halting: BTreeSet<&String> = spec.accept.iter().chain(spec.reject.iter()).collect();
    for (i, t) in spec.transitions.iter().enumerate() {
        for state in [&t.0, &t.2] {
            if !spec.states.contains(state) {
                defects.push(SpecDefect::UnknownTransitionState(i, state.clone()));
            }
        }
        for sym in [&t.1, &t.3] {
            if !spec.tape_alphabet.contains(sym) {
                defects.push(SpecDefect::UnknownTransitionSymbol(i, sym.clone()));
            }
        }
        if halting.contains(&t.0) {
            defects.push(SpecDefect::TransitionFromHalting(i, t.0.clone()));
        }
    }

    if !defects.is_empty() {
        return Err(defects);
    }

    // Numbering: start state first, blank first, then declaration order.
    let mut state_names = vec![spec.start.clone()];
    state_names.extend(spec.states.iter().filter(|s| **s != spec.start).cloned());
    let mut symbol_names = vec![spec.blank.clone()];
    symbol_names.extend(
        spec.tape_alphabet
            .iter()
            .filter(|s| **s != spec.blank)
            .cloned(),
    );
    let state_ids: HashMap<String, u32> = state_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i as u32))
        .collect();
    let symbol_ids: HashMap<String, u8> = symbol_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i as u8))
        .collect();

    let mut accepting = vec![false; state_names.len()];
    for s in &spec.accept {
        accepting[state_ids[s] as usize] = true;
    }
    let mut rejecting = vec![false; state_names.len()];
    for s in &spec.reject {
        rejecting[state_ids[s] as usize] = true;
    }

    let delta: Vec<Transition> = spec
        .transitions
        .iter()
        .map(|t| Transition {
            state: state_ids[&t.0],
            read: symbol_ids[&t.1],
            next: state_ids[&t.2],
            write: symbol_ids[&t.3],
            mv: t.4,
        })
        .collect();
    let mut by_state_symbol: HashMap<(u32, u8), Vec<usize>> = HashMap::new();
    for (i, t) in delta.iter().enumerate() {
        by_state_symbol
            .entry((t.state, t.read))
            .or_default()
            .push(i);
    }

    Ok(Machine {
        spec: spec.clone(),
        state_names,
        symbol_names,
        state_ids,
        symbol_ids,
        accepting,
        rejecting,
        delta,
        by_state_symbol,
    })
}

/// One instantaneous description: state, head position, and the full
/// bounded tape in symbol ids.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: u32,
    pub head: u32,
    pub tape: Vec<u8>,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{} h{} [", self.state, self.head)?;
        for (i, s) in self.tape.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// Per-instance resource bounds: `space` tape cells, `time` steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub space: u32,
    pub time: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InputError {
    #[error("input of length {len} does not fit in {space} tape cells")]
    InputTooLong { len: usize, space: u32 },
    #[error("unknown symbol `{0}` in input")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is not in the input alphabet")]
    NotInputSymbol(String),
    #[error("space bound must be at least 1")]
    ZeroSpace,
}

/// Start configuration: the input then blanks, head at cell 0, start state.
pub fn initial_config(
    machine: &Machine,
    input: &[u8],
    space: u32,
) -> Result<Configuration, InputError> {
    if space == 0 {
        return Err(InputError::ZeroSpace);
    }
    if input.len() > space as usize {
        return Err(InputError::InputTooLong {
            len: input.len(),
            space,
        });
    }
    let mut tape = vec![machine.blank_symbol(); space as usize];
    tape[..input.len()].copy_from_slice(input);
    Ok(Configuration {
        state: machine.start_state(),
        head: 0,
        tape,
    })
}

/// One layer of the computation tree. Moves that would take the head
/// outside `[0, space)` kill that branch; halting configurations have no
/// successors.
pub fn successors(machine: &Machine, config: &Configuration) -> Vec<Configuration> {
    if machine.is_halting(config.state) {
        return Vec::new();
    }
    let space = config.tape.len() as i64;
    let mut out = BTreeSet::new();
    for &ti in machine.applicable(config.state, config.tape[config.head as usize]) {
        let t = machine.delta[ti];
        let new_head = config.head as i64
            + match t.mv {
                Move::L => -1,
                Move::R => 1,
                Move::N => 0,
            };
        if new_head < 0 || new_head >= space {
            continue;
        }
        let mut tape = config.tape.clone();
        tape[config.head as usize] = t.write;
        out.insert(Configuration {
            state: t.next,
            head: new_head as u32,
            tape,
        });
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub accepted: bool,
    /// Shortest accepting path, initial configuration first, when accepted.
    pub witness: Option<Vec<Configuration>>,
    /// Distinct configurations reached within the bounds.
    pub explored: u64,
}

/// Breadth-first layered reachability over at most `bounds.time` steps:
/// the whole bounded closure is explored (this is the exhaustive search
/// the bit-parallel simulation is contrasted against, so the explored
/// count reflects the full brute-force work), then acceptance is decided
/// over everything reached. The witness is a shortest accepting path.
pub fn oracle_accepts(
    machine: &Machine,
    input: &[u8],
    bounds: Bounds,
) -> Result<OracleOutcome, InputError> {
    let initial = initial_config(machine, input, bounds.space)?;
    let mut parent: HashMap<Configuration, Option<Configuration>> = HashMap::new();
    parent.insert(initial.clone(), None);

    // first accepting configuration in BFS order = shortest witness end
    let mut accepting_end: Option<Configuration> = None;
    if machine.is_accepting(initial.state) {
        accepting_end = Some(initial.clone());
    }

    let mut frontier: VecDeque<Configuration> = VecDeque::new();
    frontier.push_back(initial);
    for _ in 0..bounds.time {
        if frontier.is_empty() {
            break;
        }
        let mut next = VecDeque::new();
        for config in frontier {
            for succ in successors(machine, &config) {
                if parent.contains_key(&succ) {
                    continue;
                }
                parent.insert(succ.clone(), Some(config.clone()));
                if accepting_end.is_none() && machine.is_accepting(succ.state) {
                    accepting_end = Some(succ.clone());
                }
                next.push_back(succ);
            }
        }
        frontier = next;
    }

    let witness = accepting_end.map(|end| {
        let mut path = vec![end];
        while let Some(Some(prev)) = parent.get(path.last().unwrap()) {
            path.push(prev.clone());
        }
        path.reverse();
        path
    });
    Ok(OracleOutcome {
        accepted: witness.is_some(),
        witness,
        explored: parent.len() as u64,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("configuration universe overflows the host word: {0}")]
    UniverseOverflow(String),
    #[error("index {index} out of range (universe has {n} configurations)")]
    IndexOutOfRange { index: u64, n: u64 },
}

/// The bijection between configurations and bit positions of one giant
/// word: N = |Q|·S·g^S total positions, grouped into blocks of g^{S-1} by
/// (state, head, scanned symbol), with the remaining cells packed as an
/// (S-1)-digit base-g number in cell order.
#[derive(Clone, Debug)]
pub struct ConfigSetCodec {
    g: u64,
    num_states: u64,
    space: u32,
    /// g^0 .. g^space
    pow: Vec<u64>,
    n: u64,
}

impl ConfigSetCodec {
    pub fn new(machine: &Machine, space: u32) -> Result<Self, CodecError> {
        let g = machine.alphabet_size() as u64;
        let num_states = machine.num_states() as u64;
        let overflow =
            || CodecError::UniverseOverflow(format!("|Q|={num_states}, S={space}, g={g}"));
        let mut pow = Vec::with_capacity(space as usize + 1);
        let mut acc: u64 = 1;
        pow.push(acc);
        for _ in 0..space {
            acc = acc.checked_mul(g).ok_or_else(overflow)?;
            pow.push(acc);
        }
        let n = num_states
            .checked_mul(space as u64)
            .and_then(|v| v.checked_mul(acc))
            .ok_or_else(overflow)?;
        Ok(ConfigSetCodec {
            g,
            num_states,
            space,
            pow,
            n,
        })
    }

    /// Total configurations = width of the set word in bits.
    pub fn universe_bits(&self) -> u64 {
        self.n
    }

    pub fn space(&self) -> u32 {
        self.space
    }

    pub fn alphabet_size(&self) -> u64 {
        self.g
    }

    pub fn g_pow(&self, e: u32) -> u64 {
        self.pow[e as usize]
    }

    /// First index of the block for (state, head, scanned symbol).
    pub fn base(&self, state: u32, head: u32, scanned: u8) -> u64 {
        ((state as u64 * self.space as u64 + head as u64) * self.g + scanned as u64)
            * self.pow[self.space as usize - 1]
    }

    pub fn index(&self, config: &Configuration) -> u64 {
        debug_assert_eq!(config.tape.len(), self.space as usize);
        let head = config.head as usize;
        let mut rest: u64 = 0;
        for (j, &sym) in config.tape.iter().enumerate() {
            if j == head {
                continue;
            }
            let rank = if j < head { j } else { j - 1 };
            rest += sym as u64 * self.pow[rank];
        }
        self.base(config.state, config.head, config.tape[head]) + rest
    }

    pub fn unindex(&self, index: u64) -> Result<Configuration, CodecError> {
        if index >= self.n {
            return Err(CodecError::IndexOutOfRange { index, n: self.n });
        }
        let block_width = self.pow[self.space as usize - 1];
        let mut rest = index % block_width;
        let block = index / block_width;
        let scanned = (block % self.g) as u8;
        let block = block / self.g;
        let head = (block % self.space as u64) as u32;
        let state = (block / self.space as u64) as u32;
        debug_assert!(state < self.num_states as u32);

        let mut tape = vec![0u8; self.space as usize];
        for rank in 0..self.space as usize - 1 {
            let cell = if rank < head as usize { rank } else { rank + 1 };
            tape[cell] = (rest % self.g) as u8;
            rest /= self.g;
        }
        tape[head as usize] = scanned;
        Ok(Configuration { state, head, tape })
    }
}

/// The canonical test machines. The JSON files under `machines/` hold the
/// same definitions; a test pins them together.
pub mod corpus {
    use super::*;

    fn t(q: &str, a: &str, q2: &str, b: &str, mv: Move) -> TransitionRule {
        TransitionRule(q.into(), a.into(), q2.into(), b.into(), mv)
    }

    /// One nondeterministic choice over a blank: write 1 and accept, or
    /// write 0 and reject.
    pub fn guess_bit() -> NdtmSpec {
        NdtmSpec {
            states: vec!["s".into(), "acc".into(), "rej".into()],
            tape_alphabet: vec!["_".into(), "0".into(), "1".into()],
            blank: "_".into(),
            input_alphabet: vec!["0".into(), "1".into()],
            transitions: vec![
                t("s", "_", "acc", "1", Move::N),
                t("s", "_", "rej", "0", Move::N),
            ],
            start: "s".into(),
            accept: vec!["acc".into()],
            reject: vec!["rej".into()],
        }
    }

    /// A single transition into the rejecting state; accepts nothing.
    pub fn always_reject() -> NdtmSpec {
        NdtmSpec {
            states: vec!["s".into(), "rej".into()],
            tape_alphabet: vec!["_".into(), "0".into(), "1".into()],
            blank: "_".into(),
            input_alphabet: vec!["0".into(), "1".into()],
            transitions: vec![t("s", "_", "rej", "_", Move::N)],
            start: "s".into(),
            accept: vec![],
            reject: vec!["rej".into()],
        }
    }

    /// Deterministic scan accepting inputs with an odd number of 1s.
    /// Needs at least one blank cell after the input to see the end.
    pub fn parity() -> NdtmSpec {
        NdtmSpec {
            states: vec!["even".into(), "odd".into(), "acc".into(), "rej".into()],
            tape_alphabet: vec!["_".into(), "0".into(), "1".into()],
            blank: "_".into(),
            input_alphabet: vec!["0".into(), "1".into()],
            transitions: vec![
                t("even", "0", "even", "0", Move::R),
                t("even", "1", "odd", "1", Move::R),
                t("odd", "0", "odd", "0", Move::R),
                t("odd", "1", "even", "1", Move::R),
                t("even", "_", "rej", "_", Move::N),
                t("odd", "_", "acc", "_", Move::N),
            ],
            start: "even".into(),
            accept: vec!["acc".into()],
            reject: vec!["rej".into()],
        }
    }

    pub fn all() -> BTreeMap<&'static str, NdtmSpec> {
        BTreeMap::from([
            ("guess-bit", guess_bit()),
            ("always-reject", always_reject()),
            ("parity", parity()),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine(spec: &NdtmSpec) -> Machine {
        validate_spec(spec).expect("corpus machine validates")
    }

    #[test]
    fn corpus_machines_validate() {
        for (name, spec) in corpus::all() {
            assert!(validate_spec(&spec).is_ok(), "{name}");
        }
    }

    #[test]
    fn unknown_start_is_a_defect() {
        let mut spec = corpus::guess_bit();
        spec.start = "nowhere".into();
        let defects = validate_spec(&spec).unwrap_err();
        assert!(defects.contains(&SpecDefect::UnknownStart("nowhere".into())));
    }

    #[test]
    fn transition_out_of_accepting_state_is_a_defect() {
        let mut spec = corpus::guess_bit();
        spec.transitions.push(TransitionRule(
            "acc".into(),
            "_".into(),
            "s".into(),
            "_".into(),
            Move::N,
        ));
        let defects = validate_spec(&spec).unwrap_err();
        assert!(matches!(
            defects[0],
            SpecDefect::TransitionFromHalting(2, _)
        ));
    }

    #[test]
    fn initial_config_pads_with_blanks() {
        let m = machine(&corpus::guess_bit());
        let c = initial_config(&m, &[], 3).unwrap();
        assert_eq!(c.state, 0);
        assert_eq!(c.head, 0);
        assert_eq!(c.tape, vec![0, 0, 0]);

        let input = m.parse_input("01").unwrap();
        let c = initial_config(&m, &input, 4).unwrap();
        assert_eq!(c.tape, vec![1, 2, 0, 0]);
    }

    #[test]
    fn initial_config_rejects_long_input() {
        let m = machine(&corpus::guess_bit());
        let input = m.parse_input("01010").unwrap();
        assert_eq!(
            initial_config(&m, &input, 4),
            Err(InputError::InputTooLong { len: 5, space: 4 })
        );
    }

    #[test]
    fn guess_bit_start_has_two_successors() {
        let m = machine(&corpus::guess_bit());
        let c = initial_config(&m, &[], 2).unwrap();
        let succs = successors(&m, &c);
        assert_eq!(succs.len(), 2);
        // both wrote into cell 0 and stayed (N moves)
        assert!(succs.iter().all(|s| s.head == 0));
        let states: BTreeSet<u32> = succs.iter().map(|s| s.state).collect();
        assert_eq!(
            states,
            BTreeSet::from([m.state_id("acc").unwrap(), m.state_id("rej").unwrap()])
        );
    }

    #[test]
    fn halting_configurations_have_no_successors() {
        let m = machine(&corpus::guess_bit());
        let c = Configuration {
            state: m.state_id("acc").unwrap(),
            head: 0,
            tape: vec![0, 0],
        };
        assert!(successors(&m, &c).is_empty());
    }

    #[test]
    fn moves_off_the_tape_kill_the_branch() {
        // single transition moving left from cell 0
        let spec = NdtmSpec {
            states: vec!["s".into(), "x".into()],
            tape_alphabet: vec!["_".into()],
            blank: "_".into(),
            input_alphabet: vec![],
            transitions: vec![TransitionRule(
                "s".into(),
                "_".into(),
                "x".into(),
                "_".into(),
                Move::L,
            )],
            start: "s".into(),
            accept: vec![],
            reject: vec![],
        };
        let m = machine(&spec);
        let c = initial_config(&m, &[], 2).unwrap();
        assert!(successors(&m, &c).is_empty());
    }

    #[test]
    fn oracle_accepts_guess_bit_with_witness() {
        let m = machine(&corpus::guess_bit());
        let out = oracle_accepts(&m, &[], Bounds { space: 2, time: 2 }).unwrap();
        assert!(out.accepted);
        let witness = out.witness.unwrap();
        assert_eq!(witness.len(), 2);
        // the witness is a legal chain ending in an accepting state
        assert_eq!(witness[0], initial_config(&m, &[], 2).unwrap());
        assert!(successors(&m, &witness[0]).contains(&witness[1]));
        assert!(m.is_accepting(witness[1].state));
    }

    #[test]
    fn oracle_rejects_always_reject() {
        let m = machine(&corpus::always_reject());
        let out = oracle_accepts(&m, &[], Bounds { space: 2, time: 8 }).unwrap();
        assert!(!out.accepted);
        assert!(out.witness.is_none());
    }

    #[test]
    fn zero_time_rejects_unless_start_accepts() {
        let m = machine(&corpus::guess_bit());
        let out = oracle_accepts(&m, &[], Bounds { space: 2, time: 0 }).unwrap();
        assert!(!out.accepted);
    }

    #[test]
    fn parity_machine_decides_parity_when_space_allows() {
        let m = machine(&corpus::parity());
        for (text, expect) in [
            ("111", true),
            ("11", false),
            ("1", true),
            ("0", false),
            ("", false),
        ] {
            let input = m.parse_input(text).unwrap();
            let out = oracle_accepts(&m, &input, Bounds { space: 4, time: 8 }).unwrap();
            assert_eq!(out.accepted, expect, "input {text:?}");
        }
    }

    /// A witness must be a legal transition chain from the initial to an
    /// accepting configuration.
    fn assert_witness_valid(m: &Machine, input: &[u8], bounds: Bounds) {
        let out = oracle_accepts(m, input, bounds).unwrap();
        let witness = out.witness.expect("caller passes accepting cases");
        assert_eq!(witness[0], initial_config(m, input, bounds.space).unwrap());
        for pair in witness.windows(2) {
            assert!(
                successors(m, &pair[0]).contains(&pair[1]),
                "illegal step {} -> {}",
                pair[0],
                pair[1]
            );
        }
        assert!(m.is_accepting(witness.last().unwrap().state));
    }

    #[test]
    fn witnesses_are_legal_chains() {
        let parity = machine(&corpus::parity());
        let input = parity.parse_input("100").unwrap();
        assert_witness_valid(&parity, &input, Bounds { space: 4, time: 8 });
        let guess = machine(&corpus::guess_bit());
        assert_witness_valid(&guess, &[], Bounds { space: 3, time: 4 });
    }

    #[test]
    fn oracle_is_monotone_in_time() {
        let m = machine(&corpus::parity());
        let input = m.parse_input("100").unwrap();
        let mut seen_accept = false;
        for t in 0..8 {
            let out = oracle_accepts(&m, &input, Bounds { space: 4, time: t }).unwrap();
            if seen_accept {
                assert!(out.accepted, "accepted at smaller T but not at T={t}");
            }
            seen_accept |= out.accepted;
        }
        assert!(seen_accept);
    }

    #[test]
    fn all_blank_start_configuration_has_index_zero() {
        let m = machine(&corpus::guess_bit());
        let codec = ConfigSetCodec::new(&m, 3).unwrap();
        let c = initial_config(&m, &[], 3).unwrap();
        assert_eq!(codec.index(&c), 0);
    }

    #[test]
    fn codec_is_a_bijection_on_a_two_symbol_machine() {
        // |Q| = 2, g = 2, S = 2: exactly 16 configurations
        let spec = NdtmSpec {
            states: vec!["a".into(), "b".into()],
            tape_alphabet: vec!["_".into(), "1".into()],
            blank: "_".into(),
            input_alphabet: vec!["1".into()],
            transitions: vec![],
            start: "a".into(),
            accept: vec![],
            reject: vec![],
        };
        let m = machine(&spec);
        let codec = ConfigSetCodec::new(&m, 2).unwrap();
        assert_eq!(codec.universe_bits(), 16);
        let mut seen = BTreeSet::new();
        for state in 0..2u32 {
            for head in 0..2u32 {
                for t0 in 0..2u8 {
                    for t1 in 0..2u8 {
                        let c = Configuration {
                            state,
                            head,
                            tape: vec![t0, t1],
                        };
                        let i = codec.index(&c);
                        assert!(i < 16);
                        assert!(seen.insert(i), "collision at {i}");
                        assert_eq!(codec.unindex(i).unwrap(), c);
                    }
                }
            }
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn codec_round_trips_every_corpus_configuration() {
        for (_, spec) in corpus::all() {
            let m = machine(&spec);
            for space in 1..=3u32 {
                let codec = ConfigSetCodec::new(&m, space).unwrap();
                for i in 0..codec.universe_bits() {
                    let c = codec.unindex(i).unwrap();
                    assert_eq!(codec.index(&c), i);
                }
            }
        }
    }

    #[test]
    fn unindex_rejects_out_of_range() {
        let m = machine(&corpus::guess_bit());
        let codec = ConfigSetCodec::new(&m, 2).unwrap();
        let n = codec.universe_bits();
        assert_eq!(
            codec.unindex(n),
            Err(CodecError::IndexOutOfRange { index: n, n })
        );
    }

    #[test]
    fn spec_serde_round_trips() {
        for (_, spec) in corpus::all() {
            let json = serde_json::to_string(&spec).unwrap();
            let back: NdtmSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
        }
    }
}
