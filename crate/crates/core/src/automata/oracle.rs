//! Reference acceptance by textbook subset simulation.
//!
//! This is deliberately written against plain ordered sets and the NFA's
//! transition relation, with nothing shared with the bit-parallel engine, so
//! it can serve as an independent oracle for it.

use std::collections::BTreeSet;

use super::{check_symbol, AutomataError, Nfa, StateId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptanceResult {
    pub accepted: bool,
    /// Active set before the first symbol and after each symbol, when traced.
    pub active_trace: Option<Vec<BTreeSet<StateId>>>,
}

/// True iff the NFA ends in an accepting state after consuming `input`
/// from `{start}`.
pub fn nfa_accepts_oracle(nfa: &Nfa, input: &[Symbol]) -> Result<bool, AutomataError> {
    simulate(nfa, input, false).map(|r| r.accepted)
}

/// Same as [`nfa_accepts_oracle`] but records every active set.
pub fn nfa_trace_oracle(nfa: &Nfa, input: &[Symbol]) -> Result<AcceptanceResult, AutomataError> {
    simulate(nfa, input, true)
}

fn simulate(nfa: &Nfa, input: &[Symbol], trace: bool) -> Result<AcceptanceResult, AutomataError> {
    for &sym in input {
        check_symbol(sym as u64, nfa.alphabet_bits())?;
    }
    let mut active = BTreeSet::from([nfa.start()]);
    let mut history = trace.then(|| vec![active.clone()]);
    for &sym in input {
        let mut next = BTreeSet::new();
        for &state in &active {
            next.extend(nfa.successors(state, sym));
        }
        active = next;
        if let Some(h) = history.as_mut() {
            h.push(active.clone());
        }
    }
    let accepted = active.iter().any(|s| nfa.is_accepting(*s));
    Ok(AcceptanceResult {
        accepted,
        active_trace: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::*;

    #[test]
    fn example_accepts_b_and_cb() {
        let nfa = example_nfa();
        assert!(nfa_accepts_oracle(&nfa, &[B]).unwrap());
        assert!(nfa_accepts_oracle(&nfa, &[C, B]).unwrap());
        assert!(!nfa_accepts_oracle(&nfa, &[D]).unwrap());
        assert!(!nfa_accepts_oracle(&nfa, &[A]).unwrap());
        assert!(!nfa_accepts_oracle(&nfa, &[B, B]).unwrap());
    }

    #[test]
    fn empty_input_checks_start() {
        let nfa = example_nfa();
        assert!(!nfa_accepts_oracle(&nfa, &[]).unwrap());
        let nfa = Nfa::new(2, 1, 0, [0], []).unwrap();
        assert!(nfa_accepts_oracle(&nfa, &[]).unwrap());
    }

    #[test]
    fn trace_has_one_entry_per_step_plus_initial() {
        let r = nfa_trace_oracle(&example_nfa(), &[C, B]).unwrap();
        let trace = r.active_trace.unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace[0], BTreeSet::from([0]));
        assert_eq!(trace[1], BTreeSet::from([1]));
        assert_eq!(trace[2], BTreeSet::from([2]));
        assert!(r.accepted);
    }

    #[test]
    fn out_of_range_symbol_is_an_error() {
        assert_eq!(
            nfa_accepts_oracle(&example_nfa(), &[B, 4]),
            Err(AutomataError::SymbolOutOfRange { symbol: 4, bits: 2 })
        );
    }
}
