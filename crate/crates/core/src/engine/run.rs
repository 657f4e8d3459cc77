use crate::automata::{StartMode, Symbol};
use crate::bits::BitVector;

use super::{accept, check_symbol, follow_vector, symbol_vector, ApProgram, EngineError};


/// Execution state of one input stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunState {
    pub active: BitVector,
    /// Whether any step so far, including step 0, had an accepting state
    /// active.
    pub accepted_ever: bool,
    pub steps: usize,
}

impl RunState {
    pub fn initial(program: &ApProgram) -> Self {
        let active = program.initial_active().clone();
        let accepted_ever = active.intersects(program.accept_vector());
        RunState {
            active,
            accepted_ever,
            steps: 0,
        }
    }
}

/// Processes one symbol: `a' = follow(a) AND s`.
///
/// Under [`StartMode::AllInput`] the start states are OR-ed back into `a'`
/// so they stay active.
pub fn step(program: &ApProgram, state: &RunState, symbol: Symbol) -> Result<RunState, EngineError> {
    let s = symbol_vector(program, symbol)?;
    let mut active = follow_vector(program, &state.active)?;
    active.and_assign(&s);
    if program.start_mode() == StartMode::AllInput {
        active.or_assign(program.initial_active());
    }
    let hit = accept(program, &active)?;
    Ok(RunState {
        active,
        accepted_ever: state.accepted_ever | hit,
        steps: state.steps + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    /// Acceptance of the final active vector.
    pub accepted: bool,
    pub accepted_ever: bool,
    /// Number of symbols consumed before the first accepting configuration
    /// (0 when the initial configuration already accepts).
    pub first_accept: Option<usize>,
    pub steps: usize,
    /// STE column evaluations performed: one per state per step.
    pub column_evaluations: u64,
    pub final_active: BitVector,
    /// Active vector before the first symbol and after every symbol.
    pub trace: Option<Vec<BitVector>>,
}

/// Runs `input` from the initial active vector.
pub fn run(program: &ApProgram, input: &[Symbol], trace: bool) -> Result<RunResult, EngineError> {
    let mut runner = Runner::new(program);
    let mut history = trace.then(|| vec![runner.active()]);
    for (position, &sym) in input.iter().enumerate() {
        runner
            .step(sym)
            .map_err(|_| EngineError::InvalidInput {
                symbol: sym as u64,
                bits: program.symbol_bits(),
                position,
            })?;
        if let Some(h) = history.as_mut() {
            h.push(runner.active());
        }
    }
    Ok(runner.finish(history))
}

/// Allocation-free streaming executor over one shared program.
///
/// Two precomputations keep the per-symbol work small. Edges `i -> i+1`,
/// the common case for position automata, are applied to all states at once
/// by a masked shift, so only sources with other edges are visited one by
/// one. Under [`StartMode::AllInput`] the start states are active at every
/// step, so their contribution to the follow vector is computed up front.
#[derive(Debug, Clone)]
pub struct Runner<'p> {
    program: &'p ApProgram,
    active: Vec<u64>,
    follow: Vec<u64>,
    masks: StepMasks,
    accepted_ever: bool,
    first_accept: Option<usize>,
    steps: usize,
}

#[derive(Debug, Clone)]
struct StepMasks {
    /// Follow vector of the always-active start states, zero when anchored.
    base_follow: Vec<u64>,
    /// Start states under all-input mode, zero when anchored.
    pinned: Vec<u64>,
    /// States with an edge to the next state.
    shift: Vec<u64>,
    /// Unpinned states with any edge besides the one to the next state.
    visit: Vec<u64>,
}

impl StepMasks {
    fn new(program: &ApProgram) -> Self {
        let n = program.num_states();
        let wpr = program.words_per_row();
        let mut shift = vec![0; wpr];
        let mut visit = vec![0; wpr];
        for src in 0..n {
            let row = program.routing_row_words(src);
            let next = src + 1;
            let mut other = false;
            for (w, &word) in row.iter().enumerate() {
                let rest = if next / 64 == w { word & !(1 << (next % 64)) } else { word };
                other |= rest != 0;
            }
            if next < n && program.route_bit(src, next) {
                shift[src / 64] |= 1 << (src % 64);
            }
            if other {
                visit[src / 64] |= 1 << (src % 64);
            }
        }
        let (base_follow, pinned) = match program.start_mode() {
            StartMode::StartOfData => (vec![0; wpr], vec![0; wpr]),
            StartMode::AllInput => {
                let mut base = vec![0; wpr];
                for src in program.initial_active().iter_ones() {
                    for (f, r) in base.iter_mut().zip(program.routing_row_words(src)) {
                        *f |= r;
                    }
                }
                (base, program.initial_active().words().to_vec())
            }
        };
        for (v, p) in visit.iter_mut().zip(&pinned) {
            *v &= !p;
        }
        StepMasks {
            base_follow,
            pinned,
            shift,
            visit,
        }
    }
}

/// [`StepMasks`] for rows of exactly `K` words.
struct FixedMasks<const K: usize> {
    base_follow: [u64; K],
    pinned: [u64; K],
    shift: [u64; K],
    visit: [u64; K],
}

impl<const K: usize> FixedMasks<K> {
    #[inline(always)]
    fn new(m: &StepMasks) -> Self {
        let fixed = |v: &[u64]| -> [u64; K] { v.try_into().expect("row width") };
        FixedMasks {
            base_follow: fixed(&m.base_follow),
            pinned: fixed(&m.pinned),
            shift: fixed(&m.shift),
            visit: fixed(&m.visit),
        }
    }
}

/// One step on rows of exactly `K` words.
#[inline(always)]
fn kernel<const K: usize>(routing: &[u64], ste_row: &[u64], active: &mut [u64; K], m: &FixedMasks<K>) {
    let ste_row: &[u64; K] = ste_row.try_into().expect("row width");
    let mut f = m.base_follow;
    let mut carry = 0;
    for k in 0..K {
        let x = active[k] & m.shift[k];
        f[k] |= (x << 1) | carry;
        carry = x >> 63;
    }
    for (w, (a, v)) in active.iter().zip(&m.visit).enumerate() {
        let mut bits = a & v;
        while bits != 0 {
            let src = w * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let row: &[u64; K] = routing[src * K..src * K + K].try_into().expect("row width");
            for k in 0..K {
                f[k] |= row[k];
            }
        }
    }
    for k in 0..K {
        active[k] = (f[k] & ste_row[k]) | m.pinned[k];
    }
}

impl<'p> Runner<'p> {
    pub fn new(program: &'p ApProgram) -> Self {
        let active = program.initial_active().words().to_vec();
        let mut runner = Runner {
            program,
            follow: vec![0; active.len()],
            active,
            masks: StepMasks::new(program),
            accepted_ever: false,
            first_accept: None,
            steps: 0,
        };
        runner.note_acceptance();
        runner
    }

    #[inline]
    fn note_acceptance(&mut self) {
        if !self.accepted_ever && self.is_accepting() {
            self.accepted_ever = true;
            self.first_accept = Some(self.steps);
        }
    }

    #[inline]
    pub fn is_accepting(&self) -> bool {
        self.active
            .iter()
            .zip(self.program.accept_vector().words())
            .any(|(a, c)| a & c != 0)
    }

    pub fn accepted_ever(&self) -> bool {
        self.accepted_ever
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn active(&self) -> BitVector {
        BitVector::from_words(self.program.num_states(), self.active.clone())
            .expect("active words stay canonical")
    }

    #[inline]
    pub fn step(&mut self, symbol: Symbol) -> Result<(), EngineError> {
        check_symbol(symbol as u64, self.program.symbol_bits())?;
        self.step_unchecked(symbol as usize);
        Ok(())
    }

    #[inline]
    fn step_unchecked(&mut self, symbol: usize) {
        let p = self.program;
        let routing = p.routing_words();
        let s = p.ste_row_words(symbol);
        let (active, m) = (&mut self.active[..], &self.masks);
        match active.len() {
            1 => kernel::<1>(routing, s, active.try_into().expect("width"), &FixedMasks::new(m)),
            2 => kernel::<2>(routing, s, active.try_into().expect("width"), &FixedMasks::new(m)),
            3 => kernel::<3>(routing, s, active.try_into().expect("width"), &FixedMasks::new(m)),
            4 => kernel::<4>(routing, s, active.try_into().expect("width"), &FixedMasks::new(m)),
            wpr => {
                let f = &mut self.follow;
                f.copy_from_slice(&m.base_follow);
                let mut carry = 0;
                for k in 0..wpr {
                    let x = active[k] & m.shift[k];
                    f[k] |= (x << 1) | carry;
                    carry = x >> 63;
                }
                for (w, (a, v)) in active.iter().zip(&m.visit).enumerate() {
                    let mut bits = a & v;
                    while bits != 0 {
                        let src = w * 64 + bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let row = &routing[src * wpr..(src + 1) * wpr];
                        for (f, r) in f.iter_mut().zip(row) {
                            *f |= r;
                        }
                    }
                }
                for (k, a) in active.iter_mut().enumerate() {
                    *a = (f[k] & s[k]) | m.pinned[k];
                }
            }
        }
        self.steps += 1;
        self.note_acceptance();
    }

    /// Feeds a whole byte slice. Every byte must fit the symbol width.
    pub fn feed_bytes(&mut self, input: &[u8]) -> Result<(), EngineError> {
        let base = self.steps;
        if self.program.symbol_bits() >= 8 {
            match self.active.len() {
                1 => self.feed_fixed::<1>(input),
                2 => self.feed_fixed::<2>(input),
                3 => self.feed_fixed::<3>(input),
                4 => self.feed_fixed::<4>(input),
                _ => input.iter().for_each(|&b| self.step_unchecked(b as usize)),
            }
            return Ok(());
        }
        for (i, &b) in input.iter().enumerate() {
            self.step(b as Symbol).map_err(|_| EngineError::InvalidInput {
                symbol: b as u64,
                bits: self.program.symbol_bits(),
                position: base + i,
            })?;
        }
        Ok(())
    }

    /// Byte loop with the active vector held in registers.
    fn feed_fixed<const K: usize>(&mut self, input: &[u8]) {
        let p = self.program;
        let routing = p.routing_words();
        let accept: [u64; K] = p.accept_vector().words().try_into().expect("width");
        let mut active: [u64; K] = self.active[..].try_into().expect("width");
        let masks = FixedMasks::<K>::new(&self.masks);
        for (i, &b) in input.iter().enumerate() {
            kernel::<K>(routing, p.ste_row_words(b as usize), &mut active, &masks);
            if !self.accepted_ever && (0..K).any(|k| active[k] & accept[k] != 0) {
                self.accepted_ever = true;
                self.first_accept = Some(self.steps + i + 1);
            }
        }
        self.steps += input.len();
        self.active.copy_from_slice(&active);
    }

    pub fn into_result(self) -> RunResult {
        self.finish(None)
    }

    fn finish(self, trace: Option<Vec<BitVector>>) -> RunResult {
        RunResult {
            accepted: self.is_accepting(),
            accepted_ever: self.accepted_ever,
            first_accept: self.first_accept,
            steps: self.steps,
            column_evaluations: self.steps as u64 * self.program.num_states() as u64,
            final_active: self.active(),
            trace,
        }
    }
}
