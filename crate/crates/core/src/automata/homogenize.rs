use std::collections::{BTreeMap, BTreeSet};

use super::{HomogeneousAutomaton, Nfa, StateId, Symbol};

/// Converts an NFA into a language-equivalent homogeneous automaton.
///
/// The symbols entering a state `q` are grouped by the exact set of sources
/// that reach `q` on them; each group becomes one copy of `q` whose class is
/// that group. A state whose incoming symbols all come from the same sources
/// is therefore kept as a single copy. Copies inherit the outgoing edges and
/// the accepting flag of `q`.
///
/// The start state is reused as-is when nothing transitions into it;
/// otherwise a dedicated start copy with an empty class is added next to the
/// copies that carry its incoming groups. States that are neither the start
/// nor entered by any transition are unreachable and dropped.
///
/// Copies appear in source-state order, groups ordered by their smallest
/// symbol, so an already homogeneous NFA keeps its numbering.
pub fn homogenize(nfa: &Nfa) -> HomogeneousAutomaton {
    let n = nfa.num_states();

    // incoming[q]: symbol -> sources entering q on that symbol
    let mut incoming: Vec<BTreeMap<Symbol, BTreeSet<StateId>>> = vec![BTreeMap::new(); n];
    for &(src, sym, dst) in nfa.transitions() {
        incoming[dst as usize].entry(sym).or_default().insert(src);
    }

    struct Copy {
        origin: StateId,
        class: BTreeSet<Symbol>,
        sources: BTreeSet<StateId>,
    }

    let mut copies: Vec<Copy> = Vec::new();
    let mut copies_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut start_copy = None;

    for q in 0..n {
        let mut groups: BTreeMap<&BTreeSet<StateId>, BTreeSet<Symbol>> = BTreeMap::new();
        for (sym, sources) in &incoming[q] {
            groups.entry(sources).or_default().insert(*sym);
        }
        let mut groups: Vec<_> = groups.into_iter().collect();
        groups.sort_by_key(|(_, class)| *class.first().expect("non-empty group"));

        let is_start = q as StateId == nfa.start();
        if is_start && groups.is_empty() {
            start_copy = Some(copies.len());
            copies_of[q].push(copies.len());
            copies.push(Copy {
                origin: q as StateId,
                class: BTreeSet::new(),
                sources: BTreeSet::new(),
            });
            continue;
        }
        if is_start {
            start_copy = Some(copies.len());
            copies_of[q].push(copies.len());
            copies.push(Copy {
                origin: q as StateId,
                class: BTreeSet::new(),
                sources: BTreeSet::new(),
            });
        }
        for (sources, class) in groups {
            copies_of[q].push(copies.len());
            copies.push(Copy {
                origin: q as StateId,
                class,
                sources: sources.clone(),
            });
        }
    }

    let mut edges = BTreeSet::new();
    for (dst, copy) in copies.iter().enumerate() {
        for &src in &copy.sources {
            for &src_copy in &copies_of[src as usize] {
                edges.insert((src_copy as StateId, dst as StateId));
            }
        }
    }
    let accepting: Vec<StateId> = copies
        .iter()
        .enumerate()
        .filter(|(_, c)| nfa.is_accepting(c.origin))
        .map(|(i, _)| i as StateId)
        .collect();
    let start = start_copy.expect("start state always gets a copy") as StateId;
    let classes = copies.into_iter().map(|c| c.class).collect();

    HomogeneousAutomaton::new(classes, edges, [start], accepting)
        .expect("homogenized automaton is well-formed")
}

/// Merges states that share class, accepting flag, start flag and successor
/// set, repeating until nothing changes.
///
/// Two such states have identical futures and are entered on the same
/// symbols, so redirecting the predecessors of one onto the other preserves
/// the language. Surviving states keep their relative order.
pub fn merge_equivalent_states(h: &HomogeneousAutomaton) -> HomogeneousAutomaton {
    let mut current = h.clone();
    loop {
        let n = current.num_states();
        let mut successors: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); n];
        for &(a, b) in current.edges() {
            successors[a as usize].insert(b);
        }

        type Key<'a> = (&'a BTreeSet<Symbol>, bool, bool, &'a BTreeSet<StateId>);
        let mut representative: BTreeMap<Key<'_>, StateId> = BTreeMap::new();
        let mut renamed: Vec<StateId> = Vec::with_capacity(n);
        let mut kept: Vec<usize> = Vec::new();
        for (s, succ) in successors.iter().enumerate() {
            let key = (
                current.symbol_class(s as StateId),
                current.accepting().contains(&(s as StateId)),
                current.start_states().contains(&(s as StateId)),
                succ,
            );
            let next = kept.len() as StateId;
            let id = *representative.entry(key).or_insert_with(|| {
                kept.push(s);
                next
            });
            renamed.push(id);
        }
        if kept.len() == n {
            return current;
        }

        let classes = kept
            .iter()
            .map(|&s| current.symbol_class(s as StateId).clone())
            .collect();
        let map = |s: &StateId| renamed[*s as usize];
        let edges: Vec<_> = current.edges().iter().map(|(a, b)| (map(a), map(b))).collect();
        let starts: Vec<_> = current.start_states().iter().map(map).collect();
        let accepting: Vec<_> = current.accepting().iter().map(map).collect();
        current = HomogeneousAutomaton::new(classes, edges, starts, accepting)
            .expect("merging keeps the automaton well-formed");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::*;
    use crate::automata::{nfa_accepts_oracle, parse_regex_with, StartMode, SymbolEncoding};
    use proptest::prelude::*;

    #[test]
    fn example_nfa_keeps_three_states() {
        let h = homogenize(&example_nfa());
        assert_eq!(h.num_states(), 3);
        assert_eq!(h.symbol_class(0), &BTreeSet::new());
        assert_eq!(h.symbol_class(1), &BTreeSet::from([C]));
        assert_eq!(h.symbol_class(2), &BTreeSet::from([B]));
        assert_eq!(h.edges(), &BTreeSet::from([(0, 1), (0, 2), (1, 2)]));
        assert_eq!(h.start_states(), &BTreeSet::from([0]));
        assert_eq!(h.accepting(), &BTreeSet::from([2]));
    }

    #[test]
    fn homogeneous_input_is_a_fixpoint() {
        let nfa = example_nfa();
        let h = homogenize(&nfa);
        assert_eq!(h.to_nfa(2, StartMode::StartOfData).unwrap(), nfa);
        assert_eq!(homogenize(&h.to_nfa(2, StartMode::StartOfData).unwrap()), h);
    }

    #[test]
    fn state_entered_on_two_symbols_from_different_sources_splits() {
        // 0 -a-> 2, 1 -b-> 2, 0 -b-> 1
        let nfa = Nfa::new(2, 3, 0, [2], [(0, A, 2), (1, B, 2), (0, B, 1)]).unwrap();
        let h = homogenize(&nfa);
        assert_eq!(h.num_states(), 4);
        let classes: Vec<_> = h.symbol_classes().to_vec();
        assert_eq!(
            classes,
            vec![
                BTreeSet::new(),
                BTreeSet::from([B]),
                BTreeSet::from([A]),
                BTreeSet::from([B])
            ]
        );
        assert_eq!(h.accepting(), &BTreeSet::from([2, 3]));
    }

    #[test]
    fn shared_sources_are_not_split() {
        // 0 enters 1 on a and b: one group
        let nfa = Nfa::new(2, 2, 0, [1], [(0, A, 1), (0, B, 1)]).unwrap();
        let h = homogenize(&nfa);
        assert_eq!(h.num_states(), 2);
        assert_eq!(h.symbol_class(1), &BTreeSet::from([A, B]));
    }

    #[test]
    fn start_with_incoming_gets_dedicated_copy() {
        // a* as a one-state loop
        let nfa = Nfa::new(1, 1, 0, [0], [(0, 0, 0)]).unwrap();
        let h = homogenize(&nfa);
        assert_eq!(h.num_states(), 2);
        assert_eq!(h.symbol_class(0), &BTreeSet::new());
        assert_eq!(h.symbol_class(1), &BTreeSet::from([0]));
        assert_eq!(h.edges(), &BTreeSet::from([(0, 1), (1, 1)]));
        assert_eq!(h.accepting(), &BTreeSet::from([0, 1]));
    }

    #[test]
    fn unreachable_states_are_dropped() {
        let nfa = Nfa::new(2, 3, 0, [1], [(0, A, 1), (2, A, 1)]).unwrap();
        let h = homogenize(&nfa);
        assert_eq!(h.num_states(), 2);
    }

    #[test]
    fn merging_collapses_joined_branches() {
        let nfa = parse_regex_with("ab|cb", 2, SymbolEncoding::Letters).unwrap();
        let h = merge_equivalent_states(&homogenize(&nfa));
        // start, a, b, c
        assert_eq!(h.num_states(), 4);
        assert_eq!(h.accepting().len(), 1);
        let back = h.to_nfa(2, StartMode::StartOfData).unwrap();
        for input in [[A, B], [C, B], [B, B], [A, C]] {
            assert_eq!(
                nfa_accepts_oracle(&back, &input).unwrap(),
                nfa_accepts_oracle(&nfa, &input).unwrap()
            );
        }
    }

    fn arb_nfa() -> impl Strategy<Value = Nfa> {
        (1usize..=8).prop_flat_map(|n| {
            let state = 0..n as StateId;
            (
                Just(n),
                state.clone(),
                prop::collection::btree_set(state.clone(), 0..=n),
                prop::collection::vec((state.clone(), 0u32..4, state), 0..24),
            )
                .prop_map(|(n, start, acc, trans)| Nfa::new(2, n, start, acc, trans).unwrap())
        })
    }

    fn all_strings(max_len: usize) -> Vec<Vec<Symbol>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &frontier {
                for sym in 0..4 {
                    let mut t: Vec<Symbol> = s.clone();
                    t.push(sym);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn homogenize_preserves_language(nfa in arb_nfa()) {
            let h = homogenize(&nfa);
            let back = h.to_nfa(2, StartMode::StartOfData).unwrap();
            let merged = merge_equivalent_states(&h).to_nfa(2, StartMode::StartOfData).unwrap();
            for s in all_strings(6) {
                let want = nfa_accepts_oracle(&nfa, &s).unwrap();
                prop_assert_eq!(nfa_accepts_oracle(&back, &s).unwrap(), want);
                prop_assert_eq!(nfa_accepts_oracle(&merged, &s).unwrap(), want);
            }
        }

        #[test]
        fn homogenized_incoming_symbols_match_class(nfa in arb_nfa()) {
            let h = homogenize(&nfa);
            let back = h.to_nfa(2, StartMode::StartOfData).unwrap();
            let mut by_edge: BTreeMap<(StateId, StateId), BTreeSet<Symbol>> = BTreeMap::new();
            for &(src, sym, dst) in back.transitions() {
                by_edge.entry((src, dst)).or_default().insert(sym);
            }
            for ((_, dst), symbols) in by_edge {
                prop_assert_eq!(&symbols, h.symbol_class(dst));
            }
        }
    }
}
