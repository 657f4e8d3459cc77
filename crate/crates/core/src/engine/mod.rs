//! Bit-parallel automata processor.
//!
//! A homogeneous automaton with `N` states over `W`-bit symbols is compiled
//! into an [`ApProgram`]:
//!
//! * the STE matrix `V`, `2^W` rows of `N` bits; row `k` marks the states
//!   whose symbol class contains `k`,
//! * the routing matrix `R`, `N` rows of `N` bits; row `i` marks the
//!   destinations of state `i`,
//! * the accept vector `c` and the initial active vector.
//!
//! One input symbol is processed as
//!
//! ```text
//! s = V[symbol]                  symbol vector (one-hot input selects a row)
//! f = OR of R[i] for a[i] = 1    follow vector
//! a = f AND s                    next active vector
//! A = (a AND c) != 0             acceptance
//! ```
//!
//! Storing `R` by source row turns the follow vector into a wired-OR of the
//! rows selected by the active bits, which is how the hardware evaluates it
//! with several word lines raised at once.

mod image;
mod run;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::automata::{HomogeneousAutomaton, StartMode, StateId, Symbol, MAX_SYMBOL_BITS};
use crate::bits::{or_words, words_for, BitVector};

pub use image::{ImageError, IMAGE_MAGIC, IMAGE_VERSION};
pub use run::{run, step, RunResult, RunState, Runner};

/// Default cap on the number of states (bit-vector width).
pub const DEFAULT_MAX_STATES: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{states} states exceed the configured maximum of {max}")]
    TooManyStates { states: usize, max: usize },
    #[error("program has no states")]
    NoStates,
    #[error("symbol width {0} is outside 1..={MAX_SYMBOL_BITS}")]
    InvalidSymbolBits(u32),
    #[error("symbol {symbol} does not fit in {bits} bits")]
    SymbolOutOfRange { symbol: u64, bits: u32 },
    #[error("symbol {symbol} at input position {position} does not fit in {bits} bits")]
    InvalidInput {
        symbol: u64,
        bits: u32,
        position: usize,
    },
    #[error("vector has {found} bits, program has {expected} states")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub max_states: usize,
    pub start_mode: StartMode,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            max_states: DEFAULT_MAX_STATES,
            start_mode: StartMode::StartOfData,
        }
    }
}

/// A configured automata processor image. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApProgram {
    symbol_bits: u32,
    num_states: usize,
    words_per_row: usize,
    ste: Vec<u64>,
    routing: Vec<u64>,
    accept: BitVector,
    initial: BitVector,
    start_mode: StartMode,
}

/// Compiles with default options.
pub fn compile(h: &HomogeneousAutomaton, symbol_bits: u32) -> Result<ApProgram, EngineError> {
    compile_with(h, symbol_bits, &CompileOptions::default())
}

pub fn compile_with(
    h: &HomogeneousAutomaton,
    symbol_bits: u32,
    options: &CompileOptions,
) -> Result<ApProgram, EngineError> {
    check_bits(symbol_bits)?;
    let n = h.num_states();
    if n == 0 {
        return Err(EngineError::NoStates);
    }
    if n > options.max_states {
        return Err(EngineError::TooManyStates {
            states: n,
            max: options.max_states,
        });
    }
    if let Some(sym) = h.max_symbol() {
        check_symbol(sym as u64, symbol_bits)?;
    }
    let wpr = words_for(n);
    let mut ste = vec![0u64; (1usize << symbol_bits) * wpr];
    for (state, class) in h.symbol_classes().iter().enumerate() {
        for &sym in class {
            ste[sym as usize * wpr + state / 64] |= 1 << (state % 64);
        }
    }
    let mut routing = vec![0u64; n * wpr];
    for &(src, dst) in h.edges() {
        let dst = dst as usize;
        routing[src as usize * wpr + dst / 64] |= 1 << (dst % 64);
    }
    let accept = BitVector::from_indices(n, h.accepting().iter().map(|&s| s as usize));
    let initial = BitVector::from_indices(n, h.start_states().iter().map(|&s| s as usize));
    Ok(ApProgram {
        symbol_bits,
        num_states: n,
        words_per_row: wpr,
        ste,
        routing,
        accept,
        initial,
        start_mode: options.start_mode,
    })
}

fn check_bits(bits: u32) -> Result<(), EngineError> {
    if (1..=MAX_SYMBOL_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(EngineError::InvalidSymbolBits(bits))
    }
}

fn check_symbol(symbol: u64, bits: u32) -> Result<(), EngineError> {
    if symbol < 1u64 << bits {
        Ok(())
    } else {
        Err(EngineError::SymbolOutOfRange { symbol, bits })
    }
}

impl ApProgram {
    /// Assembles a program from explicit matrices.
    ///
    /// `ste_rows` holds `2^W` rows and `routing_rows` holds `N` rows, each
    /// `N` bits wide.
    pub fn from_parts(
        symbol_bits: u32,
        ste_rows: &[BitVector],
        routing_rows: &[BitVector],
        accept: BitVector,
        initial: BitVector,
        start_mode: StartMode,
    ) -> Result<Self, EngineError> {
        check_bits(symbol_bits)?;
        let n = accept.len();
        if n == 0 {
            return Err(EngineError::NoStates);
        }
        let expect = |v: &BitVector| {
            if v.len() == n {
                Ok(())
            } else {
                Err(EngineError::LengthMismatch {
                    expected: n,
                    found: v.len(),
                })
            }
        };
        expect(&initial)?;
        if ste_rows.len() != 1 << symbol_bits {
            return Err(EngineError::LengthMismatch {
                expected: 1 << symbol_bits,
                found: ste_rows.len(),
            });
        }
        if routing_rows.len() != n {
            return Err(EngineError::LengthMismatch {
                expected: n,
                found: routing_rows.len(),
            });
        }
        let mut ste = Vec::with_capacity(ste_rows.len() * words_for(n));
        for row in ste_rows {
            expect(row)?;
            ste.extend_from_slice(row.words());
        }
        let mut routing = Vec::with_capacity(n * words_for(n));
        for row in routing_rows {
            expect(row)?;
            routing.extend_from_slice(row.words());
        }
        Ok(ApProgram {
            symbol_bits,
            num_states: n,
            words_per_row: words_for(n),
            ste,
            routing,
            accept,
            initial,
            start_mode,
        })
    }

    pub fn symbol_bits(&self) -> u32 {
        self.symbol_bits
    }

    pub fn num_symbols(&self) -> usize {
        1 << self.symbol_bits
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn start_mode(&self) -> StartMode {
        self.start_mode
    }

    pub fn accept_vector(&self) -> &BitVector {
        &self.accept
    }

    pub fn initial_active(&self) -> &BitVector {
        &self.initial
    }

    #[inline]
    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub(crate) fn routing_words(&self) -> &[u64] {
        &self.routing
    }

    /// Packed words of row `symbol` of `V`.
    #[inline]
    pub fn ste_row_words(&self, symbol: usize) -> &[u64] {
        let w = self.words_per_row;
        &self.ste[symbol * w..(symbol + 1) * w]
    }

    /// Packed words of row `source` of `R`.
    #[inline]
    pub fn routing_row_words(&self, source: usize) -> &[u64] {
        let w = self.words_per_row;
        &self.routing[source * w..(source + 1) * w]
    }

    pub fn ste_row(&self, symbol: usize) -> BitVector {
        BitVector::from_words(self.num_states, self.ste_row_words(symbol).to_vec())
            .expect("rows are canonical")
    }

    pub fn routing_row(&self, source: usize) -> BitVector {
        BitVector::from_words(self.num_states, self.routing_row_words(source).to_vec())
            .expect("rows are canonical")
    }

    /// `V[symbol][state]`: whether `symbol` is in the class of `state`.
    pub fn ste_bit(&self, symbol: usize, state: usize) -> bool {
        self.ste_row_words(symbol)[state / 64] >> (state % 64) & 1 == 1
    }

    /// `R[source][dest]`: whether the edge `source -> dest` exists.
    pub fn route_bit(&self, source: usize, dest: usize) -> bool {
        self.routing_row_words(source)[dest / 64] >> (dest % 64) & 1 == 1
    }

    /// Column `state` of `V` as a `2^W`-bit vector.
    pub fn ste_column(&self, state: usize) -> BitVector {
        BitVector::from_bits((0..self.num_symbols()).map(|k| self.ste_bit(k, state)))
    }

    /// Column `dest` of `R`: the sources that reach `dest`.
    pub fn routing_column(&self, dest: usize) -> BitVector {
        BitVector::from_bits((0..self.num_states).map(|i| self.route_bit(i, dest)))
    }

    /// Fraction of set bits in the routing matrix.
    pub fn routing_density(&self) -> f64 {
        let ones: u64 = self.routing.iter().map(|w| w.count_ones() as u64).sum();
        ones as f64 / (self.num_states as f64 * self.num_states as f64)
    }

    /// Reads the matrices back into a homogeneous automaton.
    pub fn decompile(&self) -> HomogeneousAutomaton {
        let n = self.num_states;
        let mut classes = vec![BTreeSet::new(); n];
        for sym in 0..self.num_symbols() {
            for state in self.ste_row(sym).iter_ones() {
                classes[state].insert(sym as Symbol);
            }
        }
        let mut edges = Vec::new();
        for src in 0..n {
            edges.extend(
                self.routing_row(src)
                    .iter_ones()
                    .map(|dst| (src as StateId, dst as StateId)),
            );
        }
        let ids = |v: &BitVector| v.iter_ones().map(|i| i as StateId).collect::<Vec<_>>();
        HomogeneousAutomaton::new(classes, edges, ids(&self.initial), ids(&self.accept))
            .expect("program matrices describe a valid automaton")
    }

    fn check_len(&self, v: &BitVector) -> Result<(), EngineError> {
        if v.len() == self.num_states {
            Ok(())
        } else {
            Err(EngineError::LengthMismatch {
                expected: self.num_states,
                found: v.len(),
            })
        }
    }
}

/// Symbol vector: `s[n] = OR_k i[k] AND V[k][n]` with `i` one-hot at
/// `symbol`, which is row `symbol` of `V`.
pub fn symbol_vector(program: &ApProgram, symbol: Symbol) -> Result<BitVector, EngineError> {
    check_symbol(symbol as u64, program.symbol_bits)?;
    Ok(program.ste_row(symbol as usize))
}

/// Follow vector: `f[n] = OR_i a[i] AND R[i][n]`, evaluated as the OR of the
/// routing rows selected by `active`.
pub fn follow_vector(program: &ApProgram, active: &BitVector) -> Result<BitVector, EngineError> {
    program.check_len(active)?;
    let mut f = BitVector::zeros(program.num_states);
    for i in active.iter_ones() {
        or_words(f.words_mut(), program.routing_row_words(i));
    }
    Ok(f)
}

/// Acceptance: `A = OR_n a[n] AND c[n]`.
pub fn accept(program: &ApProgram, active: &BitVector) -> Result<bool, EngineError> {
    program.check_len(active)?;
    Ok(active.intersects(&program.accept))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::automata::fixtures::*;
    use crate::automata::{homogenize, Nfa};
    use proptest::prelude::*;

    pub fn example_program() -> ApProgram {
        compile(&example_homogeneous(), 2).unwrap()
    }

    fn bits(v: &[u8]) -> BitVector {
        BitVector::from_bits(v.iter().map(|&b| b == 1))
    }

    #[test]
    fn example_matrices() {
        let p = example_program();
        let v: Vec<BitVector> = (0..4).map(|k| p.ste_row(k)).collect();
        assert_eq!(v, [bits(&[1, 0, 0]), bits(&[1, 0, 1]), bits(&[1, 1, 0]), bits(&[0, 0, 0])]);
        let r: Vec<BitVector> = (0..3).map(|i| p.routing_row(i)).collect();
        assert_eq!(r, [bits(&[0, 1, 1]), bits(&[0, 0, 1]), bits(&[0, 0, 0])]);
        assert_eq!(p.accept_vector(), &bits(&[0, 0, 1]));
        assert_eq!(p.initial_active(), &bits(&[1, 0, 0]));
        // S1 cannot be reached, S2 only from S1, S3 from S1 and S2
        assert_eq!(p.routing_column(0), bits(&[0, 0, 0]));
        assert_eq!(p.routing_column(1), bits(&[1, 0, 0]));
        assert_eq!(p.routing_column(2), bits(&[1, 1, 0]));
    }

    #[test]
    fn example_kernels() {
        let p = example_program();
        assert_eq!(symbol_vector(&p, B).unwrap(), bits(&[1, 0, 1]));
        let a = bits(&[1, 0, 0]);
        assert_eq!(follow_vector(&p, &a).unwrap(), bits(&[0, 1, 1]));
        assert!(accept(&p, &bits(&[0, 0, 1])).unwrap());
        assert!(!accept(&p, &bits(&[1, 1, 0])).unwrap());
    }

    #[test]
    fn annihilators() {
        let p = example_program();
        assert!(symbol_vector(&p, D).unwrap().is_zero());
        assert!(follow_vector(&p, &BitVector::zeros(3)).unwrap().is_zero());
        assert!(!accept(&p, &BitVector::zeros(3)).unwrap());
    }

    #[test]
    fn degenerate_single_state_program() {
        let h = HomogeneousAutomaton::new(vec![BTreeSet::new()], [], [0], [0]).unwrap();
        let p = compile(&h, 1).unwrap();
        assert!(p.ste_column(0).is_zero());
        assert!(p.routing_row(0).is_zero());
        assert_eq!(p.accept_vector(), &bits(&[1]));
    }

    #[test]
    fn kernel_errors() {
        let p = example_program();
        assert_eq!(
            symbol_vector(&p, 4),
            Err(EngineError::SymbolOutOfRange { symbol: 4, bits: 2 })
        );
        assert_eq!(
            follow_vector(&p, &BitVector::zeros(4)),
            Err(EngineError::LengthMismatch { expected: 3, found: 4 })
        );
        assert!(accept(&p, &BitVector::zeros(2)).is_err());
    }

    #[test]
    fn compile_rejects_oversized_automata() {
        let h = homogenize(&Nfa::new(2, 5, 0, [], [(0, 0, 1), (1, 0, 2), (2, 0, 3), (3, 0, 4)]).unwrap());
        let options = CompileOptions {
            max_states: 4,
            ..CompileOptions::default()
        };
        assert_eq!(
            compile_with(&h, 2, &options),
            Err(EngineError::TooManyStates { states: 5, max: 4 })
        );
        assert!(compile(&h, 2).is_ok());
        assert_eq!(
            compile(&example_homogeneous(), 1),
            Err(EngineError::SymbolOutOfRange { symbol: 2, bits: 1 })
        );
    }

    pub fn arb_homogeneous(max_states: usize, bits: u32) -> impl Strategy<Value = HomogeneousAutomaton> {
        (1..=max_states).prop_flat_map(move |n| {
            let state = 0..n as StateId;
            (
                prop::collection::vec(prop::collection::btree_set(0..(1u32 << bits), 0..4), n),
                prop::collection::vec((state.clone(), state.clone()), 0..3 * n),
                prop::collection::btree_set(state.clone(), 1..=2.min(n)),
                prop::collection::btree_set(state, 0..=n),
            )
                .prop_map(|(classes, edges, starts, acc)| {
                    HomogeneousAutomaton::new(classes, edges, starts, acc).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn compile_decompile_is_identity(h in arb_homogeneous(80, 3)) {
            let p = compile(&h, 3).unwrap();
            prop_assert_eq!(p.decompile(), h);
        }

        #[test]
        fn symbol_vector_matches_dot_product(h in arb_homogeneous(70, 3), sym in 0u32..8) {
            let p = compile(&h, 3).unwrap();
            let s = symbol_vector(&p, sym).unwrap();
            for n in 0..p.num_states() {
                let dot = (0..8).any(|k| (k == sym as usize) && p.ste_bit(k, n));
                prop_assert_eq!(s.get(n), dot);
            }
        }

        #[test]
        fn follow_is_linear(h in arb_homogeneous(70, 2), seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let p = compile(&h, 2).unwrap();
            let n = p.num_states();
            let a = BitVector::from_bits((0..n).map(|i| seed_a.rotate_left(i as u32) & 1 == 1));
            let b = BitVector::from_bits((0..n).map(|i| seed_b.rotate_right(i as u32) & 1 == 1));
            let lhs = follow_vector(&p, &a.or(&b)).unwrap();
            let rhs = follow_vector(&p, &a).unwrap().or(&follow_vector(&p, &b).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
