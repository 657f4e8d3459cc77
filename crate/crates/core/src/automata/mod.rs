//! Nondeterministic automata: the plain NFA (Q, Σ, δ, q0, C), its homogeneous
//! form where symbols label states instead of transitions, and the tools that
//! move between them.
//!
//! Symbols are integers in `[0, 2^W)` for a symbol width `W` in bits.

mod homogenize;
mod oracle;
mod regex;
mod text;

use std::collections::BTreeSet;

use thiserror::Error;

pub use homogenize::{homogenize, merge_equivalent_states};
pub use oracle::{nfa_accepts_oracle, nfa_trace_oracle, AcceptanceResult};
pub use regex::{parse_regex, parse_regex_with, SymbolEncoding};
pub use text::{AutomatonFile, AutomatonSource};

pub type StateId = u32;
pub type Symbol = u32;

/// Widest supported symbol, in bits. The symbol matrix has `2^W` rows.
pub const MAX_SYMBOL_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("symbol {symbol} does not fit in {bits} bits")]
    SymbolOutOfRange { symbol: u64, bits: u32 },
    #[error("symbol width {0} is outside 1..={MAX_SYMBOL_BITS}")]
    InvalidSymbolBits(u32),
    #[error("state {state} is out of range for {num_states} states")]
    StateOutOfRange { state: u64, num_states: usize },
    #[error("automaton has no states")]
    NoStates,
    #[error("automaton has no start state")]
    NoStartState,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

pub(crate) fn check_symbol_bits(bits: u32) -> Result<(), AutomataError> {
    if (1..=MAX_SYMBOL_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(AutomataError::InvalidSymbolBits(bits))
    }
}

pub(crate) fn check_symbol(symbol: u64, bits: u32) -> Result<(), AutomataError> {
    if symbol < (1u64 << bits) {
        Ok(())
    } else {
        Err(AutomataError::SymbolOutOfRange { symbol, bits })
    }
}

/// How start states behave during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum StartMode {
    /// Start states are active only before the first symbol.
    #[default]
    StartOfData,
    /// Start states stay active at every step, so a match may begin at any
    /// offset of the stream.
    AllInput,
}

/// A nondeterministic finite automaton over `W`-bit symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    num_states: usize,
    alphabet_bits: u32,
    transitions: BTreeSet<(StateId, Symbol, StateId)>,
    start: StateId,
    accepting: BTreeSet<StateId>,
}

impl Nfa {
    pub fn new(
        alphabet_bits: u32,
        num_states: usize,
        start: StateId,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = (StateId, Symbol, StateId)>,
    ) -> Result<Self, AutomataError> {
        check_symbol_bits(alphabet_bits)?;
        if num_states == 0 {
            return Err(AutomataError::NoStates);
        }
        let in_range = |s: StateId| {
            if (s as usize) < num_states {
                Ok(s)
            } else {
                Err(AutomataError::StateOutOfRange {
                    state: s as u64,
                    num_states,
                })
            }
        };
        in_range(start)?;
        let accepting = accepting
            .into_iter()
            .map(in_range)
            .collect::<Result<BTreeSet<_>, _>>()?;
        let transitions = transitions
            .into_iter()
            .map(|(src, sym, dst)| {
                in_range(src)?;
                in_range(dst)?;
                check_symbol(sym as u64, alphabet_bits)?;
                Ok((src, sym, dst))
            })
            .collect::<Result<BTreeSet<_>, AutomataError>>()?;
        Ok(Nfa {
            num_states,
            alphabet_bits,
            transitions,
            start,
            accepting,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet_bits(&self) -> u32 {
        self.alphabet_bits
    }

    pub fn alphabet_size(&self) -> u64 {
        1u64 << self.alphabet_bits
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting.contains(&state)
    }

    /// Transitions sorted by `(src, symbol, dst)`.
    pub fn transitions(&self) -> &BTreeSet<(StateId, Symbol, StateId)> {
        &self.transitions
    }

    /// Targets of `state` on `symbol`.
    pub fn successors(&self, state: StateId, symbol: Symbol) -> impl Iterator<Item = StateId> + '_ {
        self.transitions
            .range((state, symbol, 0)..=(state, symbol, StateId::MAX))
            .map(|&(_, _, dst)| dst)
    }
}

/// An automaton whose states carry symbol classes: every transition into a
/// state fires exactly on the symbols of that state's class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousAutomaton {
    classes: Vec<BTreeSet<Symbol>>,
    edges: BTreeSet<(StateId, StateId)>,
    start_states: BTreeSet<StateId>,
    accepting: BTreeSet<StateId>,
}

impl HomogeneousAutomaton {
    pub fn new(
        classes: Vec<BTreeSet<Symbol>>,
        edges: impl IntoIterator<Item = (StateId, StateId)>,
        start_states: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
    ) -> Result<Self, AutomataError> {
        let num_states = classes.len();
        if num_states == 0 {
            return Err(AutomataError::NoStates);
        }
        let in_range = |s: StateId| {
            if (s as usize) < num_states {
                Ok(s)
            } else {
                Err(AutomataError::StateOutOfRange {
                    state: s as u64,
                    num_states,
                })
            }
        };
        let edges = edges
            .into_iter()
            .map(|(a, b)| Ok((in_range(a)?, in_range(b)?)))
            .collect::<Result<BTreeSet<_>, AutomataError>>()?;
        let start_states = start_states
            .into_iter()
            .map(in_range)
            .collect::<Result<BTreeSet<_>, _>>()?;
        if start_states.is_empty() {
            return Err(AutomataError::NoStartState);
        }
        let accepting = accepting
            .into_iter()
            .map(in_range)
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(HomogeneousAutomaton {
            classes,
            edges,
            start_states,
            accepting,
        })
    }

    pub fn num_states(&self) -> usize {
        self.classes.len()
    }

    pub fn symbol_class(&self, state: StateId) -> &BTreeSet<Symbol> {
        &self.classes[state as usize]
    }

    pub fn symbol_classes(&self) -> &[BTreeSet<Symbol>] {
        &self.classes
    }

    pub fn edges(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.edges
    }

    pub fn start_states(&self) -> &BTreeSet<StateId> {
        &self.start_states
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    /// Largest symbol named by any class, if any class is non-empty.
    pub fn max_symbol(&self) -> Option<Symbol> {
        self.classes.iter().filter_map(|c| c.last().copied()).max()
    }

    /// Expands symbol classes back onto transitions.
    ///
    /// A single start state under [`StartMode::StartOfData`] maps directly.
    /// Otherwise a fresh start state is appended that copies the outgoing
    /// transitions of every start state; under [`StartMode::AllInput`] it also
    /// loops on every symbol so it never dies.
    pub fn to_nfa(&self, alphabet_bits: u32, start_mode: StartMode) -> Result<Nfa, AutomataError> {
        check_symbol_bits(alphabet_bits)?;
        let mut transitions = BTreeSet::new();
        for &(src, dst) in &self.edges {
            for &sym in &self.classes[dst as usize] {
                check_symbol(sym as u64, alphabet_bits)?;
                transitions.insert((src, sym, dst));
            }
        }
        let mut accepting = self.accepting.clone();
        let single = self.start_states.len() == 1 && start_mode == StartMode::StartOfData;
        if single {
            let start = *self.start_states.iter().next().expect("non-empty");
            return Nfa::new(alphabet_bits, self.num_states(), start, accepting, transitions);
        }

        let fresh = self.num_states() as StateId;
        let copied: Vec<_> = transitions
            .iter()
            .filter(|(src, _, _)| self.start_states.contains(src))
            .map(|&(_, sym, dst)| (fresh, sym, dst))
            .collect();
        transitions.extend(copied);
        if start_mode == StartMode::AllInput {
            for sym in 0..(1u32 << alphabet_bits) {
                transitions.insert((fresh, sym, fresh));
            }
        }
        if self.start_states.iter().any(|s| self.accepting.contains(s)) {
            accepting.insert(fresh);
        }
        Nfa::new(alphabet_bits, self.num_states() + 1, fresh, accepting, transitions)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn nfa_rejects_out_of_range_parts() {
        assert_eq!(
            Nfa::new(2, 2, 0, [], [(0, 4, 1)]),
            Err(AutomataError::SymbolOutOfRange { symbol: 4, bits: 2 })
        );
        assert!(matches!(
            Nfa::new(2, 2, 2, [], []),
            Err(AutomataError::StateOutOfRange { state: 2, .. })
        ));
        assert!(matches!(
            Nfa::new(2, 2, 0, [5], []),
            Err(AutomataError::StateOutOfRange { .. })
        ));
        assert_eq!(Nfa::new(0, 1, 0, [], []), Err(AutomataError::InvalidSymbolBits(0)));
        assert_eq!(Nfa::new(2, 0, 0, [], []), Err(AutomataError::NoStates));
    }

    #[test]
    fn successors_filter_by_symbol() {
        let nfa = example_nfa();
        assert_eq!(nfa.successors(0, B).collect::<Vec<_>>(), vec![2]);
        assert_eq!(nfa.successors(0, C).collect::<Vec<_>>(), vec![1]);
        assert_eq!(nfa.successors(0, D).count(), 0);
    }

    #[test]
    fn homogeneous_to_nfa_expands_classes() {
        let nfa = example_homogeneous().to_nfa(2, StartMode::StartOfData).unwrap();
        assert_eq!(nfa, example_nfa());
    }

    #[test]
    fn multiple_starts_get_a_fresh_start() {
        let h = HomogeneousAutomaton::new(
            vec![BTreeSet::new(), BTreeSet::new(), BTreeSet::from([A])],
            [(0, 2), (1, 2)],
            [0, 1],
            [1],
        )
        .unwrap();
        let nfa = h.to_nfa(1, StartMode::StartOfData).unwrap();
        assert_eq!(nfa.num_states(), 4);
        assert_eq!(nfa.start(), 3);
        assert!(nfa.is_accepting(3));
        assert_eq!(nfa.successors(3, A).collect::<Vec<_>>(), vec![2]);
    }
}
