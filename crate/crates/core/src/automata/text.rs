//! Line-oriented automaton files.
//!
//! A plain NFA:
//!
//! ```text
//! nfa W=2 states=3 start=0
//! accept 2
//! trans 0 2 1
//! trans 0 1 2
//! trans 1 1 2
//! ```
//!
//! A homogeneous automaton, as produced by dumping a compiled program:
//!
//! ```text
//! hom W=2 states=3
//! start 0
//! accept 2
//! class 0 0 1 2
//! class 1 2
//! class 2 1
//! edge 0 1
//! edge 0 2
//! edge 1 2
//! ```
//!
//! Either kind may carry `mode all-input` (or the default `mode start-of-data`).
//! Tokens are separated by any whitespace, blank lines and `#` comments are
//! ignored, and any other directive is an error.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{AutomataError, HomogeneousAutomaton, Nfa, StartMode, StateId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AutomatonSource {
    Nfa(Nfa),
    Homogeneous {
        automaton: HomogeneousAutomaton,
        symbol_bits: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonFile {
    pub source: AutomatonSource,
    pub start_mode: StartMode,
}

fn err(line: usize, message: impl Into<String>) -> AutomataError {
    AutomataError::Format {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, AutomataError> {
    token
        .parse()
        .map_err(|_| err(line, format!("invalid {what} '{token}'")))
}

enum Kind {
    Nfa {
        start: StateId,
        transitions: Vec<(StateId, Symbol, StateId)>,
    },
    Hom {
        classes: Vec<Option<BTreeSet<Symbol>>>,
        edges: Vec<(StateId, StateId)>,
        starts: Vec<StateId>,
    },
}

struct Header {
    bits: u32,
    states: usize,
    kind: Kind,
}

fn parse_header(tokens: &[&str], line: usize) -> Result<Header, AutomataError> {
    let is_nfa = match tokens[0] {
        "nfa" => true,
        "hom" => false,
        other => return Err(err(line, format!("expected 'nfa' or 'hom' header, found '{other}'"))),
    };
    let (mut bits, mut states, mut start) = (None, None, None);
    for field in &tokens[1..] {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found '{field}'")))?;
        let slot = match key {
            "W" => &mut bits,
            "states" => &mut states,
            "start" if is_nfa => &mut start,
            _ => return Err(err(line, format!("unknown header field '{key}'"))),
        };
        if slot.replace(number::<u64>(value, line, key)?).is_some() {
            return Err(err(line, format!("duplicate header field '{key}'")));
        }
    }
    let bits = bits.ok_or_else(|| err(line, "missing W="))? as u32;
    let states = states.ok_or_else(|| err(line, "missing states="))? as usize;
    let kind = if is_nfa {
        Kind::Nfa {
            start: start.ok_or_else(|| err(line, "missing start="))? as StateId,
            transitions: Vec::new(),
        }
    } else {
        Kind::Hom {
            classes: vec![None; states],
            edges: Vec::new(),
            starts: Vec::new(),
        }
    };
    Ok(Header { bits, states, kind })
}

impl AutomatonFile {
    pub fn parse(text: &str) -> Result<Self, AutomataError> {
        let mut header: Option<Header> = None;
        let mut accepting = Vec::new();
        let mut start_mode = StartMode::StartOfData;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let Some(h) = header.as_mut() else {
                header = Some(parse_header(&tokens, line)?);
                continue;
            };
            let ids = |from: usize, what: &str| -> Result<Vec<u32>, AutomataError> {
                tokens[from..].iter().map(|t| number(t, line, what)).collect()
            };
            match (tokens[0], &mut h.kind) {
                ("nfa" | "hom", _) => return Err(err(line, "duplicate header")),
                ("accept", _) => accepting.extend(ids(1, "state")?),
                ("mode", _) => {
                    start_mode = match tokens.get(1..) {
                        Some(["start-of-data"]) => StartMode::StartOfData,
                        Some(["all-input"]) => StartMode::AllInput,
                        _ => return Err(err(line, "expected 'mode start-of-data' or 'mode all-input'")),
                    }
                }
                ("trans", Kind::Nfa { transitions, .. }) => match ids(1, "field")?[..] {
                    [src, sym, dst] => transitions.push((src, sym, dst)),
                    _ => return Err(err(line, "expected 'trans <src> <symbol> <dst>'")),
                },
                ("start", Kind::Hom { starts, .. }) => starts.extend(ids(1, "state")?),
                ("edge", Kind::Hom { edges, .. }) => match ids(1, "state")?[..] {
                    [src, dst] => edges.push((src, dst)),
                    _ => return Err(err(line, "expected 'edge <src> <dst>'")),
                },
                ("class", Kind::Hom { classes, .. }) => {
                    let values = ids(1, "class entry")?;
                    let (&state, symbols) = values
                        .split_first()
                        .ok_or_else(|| err(line, "expected 'class <state> <symbol>...'"))?;
                    let slot = classes.get_mut(state as usize).ok_or_else(|| {
                        err(line, format!("state {state} out of range for {} states", h.states))
                    })?;
                    if slot.replace(symbols.iter().copied().collect()).is_some() {
                        return Err(err(line, format!("duplicate class for state {state}")));
                    }
                }
                (other, _) => return Err(err(line, format!("unknown directive '{other}'"))),
            }
        }

        let h = header.ok_or_else(|| err(1, "missing header"))?;
        let source = match h.kind {
            Kind::Nfa { start, transitions } => {
                AutomatonSource::Nfa(Nfa::new(h.bits, h.states, start, accepting, transitions)?)
            }
            Kind::Hom {
                classes,
                edges,
                starts,
            } => {
                super::check_symbol_bits(h.bits)?;
                let classes: Vec<BTreeSet<Symbol>> =
                    classes.into_iter().map(Option::unwrap_or_default).collect();
                for &sym in classes.iter().flatten() {
                    super::check_symbol(sym as u64, h.bits)?;
                }
                AutomatonSource::Homogeneous {
                    automaton: HomogeneousAutomaton::new(classes, edges, starts, accepting)?,
                    symbol_bits: h.bits,
                }
            }
        };
        Ok(AutomatonFile { source, start_mode })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.start_mode {
            StartMode::StartOfData => None,
            StartMode::AllInput => Some("mode all-input\n"),
        };
        let join = |ids: &mut dyn Iterator<Item = u32>| -> String {
            ids.map(|i| format!(" {i}")).collect()
        };
        match &self.source {
            AutomatonSource::Nfa(nfa) => {
                let _ = writeln!(
                    out,
                    "nfa W={} states={} start={}",
                    nfa.alphabet_bits(),
                    nfa.num_states(),
                    nfa.start()
                );
                out.extend(mode);
                let _ = writeln!(out, "accept{}", join(&mut nfa.accepting().iter().copied()));
                for (src, sym, dst) in nfa.transitions() {
                    let _ = writeln!(out, "trans {src} {sym} {dst}");
                }
            }
            AutomatonSource::Homogeneous {
                automaton,
                symbol_bits,
            } => {
                let _ = writeln!(out, "hom W={} states={}", symbol_bits, automaton.num_states());
                out.extend(mode);
                let _ = writeln!(out, "start{}", join(&mut automaton.start_states().iter().copied()));
                let _ = writeln!(out, "accept{}", join(&mut automaton.accepting().iter().copied()));
                for (state, class) in automaton.symbol_classes().iter().enumerate() {
                    let _ = writeln!(out, "class {state}{}", join(&mut class.iter().copied()));
                }
                for (src, dst) in automaton.edges() {
                    let _ = writeln!(out, "edge {src} {dst}");
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::*;

    const EXAMPLE_NFA: &str = "nfa W=2 states=3 start=0\naccept 2\ntrans 0 2 1\ntrans 0 1 2\ntrans 1 1 2\n";

    #[test]
    fn parses_example_nfa() {
        let file = AutomatonFile::parse(EXAMPLE_NFA).unwrap();
        assert_eq!(file.source, AutomatonSource::Nfa(example_nfa()));
        assert_eq!(file.start_mode, StartMode::StartOfData);
    }

    #[test]
    fn whitespace_and_comments_are_tolerated() {
        let text = "\n  # example\n\tnfa   start=0 W=2  states=3\naccept\t2 # final\n\ntrans 0 2 1\n trans 0  1 2\ntrans 1 1 2";
        assert_eq!(
            AutomatonFile::parse(text).unwrap().source,
            AutomatonSource::Nfa(example_nfa())
        );
    }

    #[test]
    fn text_round_trips() {
        for file in [
            AutomatonFile {
                source: AutomatonSource::Nfa(example_nfa()),
                start_mode: StartMode::StartOfData,
            },
            AutomatonFile {
                source: AutomatonSource::Homogeneous {
                    automaton: example_homogeneous(),
                    symbol_bits: 2,
                },
                start_mode: StartMode::AllInput,
            },
        ] {
            let text = file.to_text();
            assert_eq!(AutomatonFile::parse(&text).unwrap(), file, "{text}");
        }
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("nfa W=2 states=3 start=0\nfoo 1\n", 2, "unknown directive"),
            ("trans 0 1 2\n", 1, "header"),
            ("nfa W=2 states=3\n", 1, "missing start"),
            ("nfa W=2 states=3 start=0\ntrans 0 1\n", 2, "trans"),
            ("nfa W=2 states=3 start=0\naccept x\n", 2, "invalid state"),
            ("hom W=2 states=2\nstart 0\nclass 0 1\nclass 0 2\n", 4, "duplicate class"),
            ("hom W=2 states=2\ntrans 0 1 1\n", 2, "unknown directive"),
            ("nfa W=2 states=1 start=0\nnfa W=2 states=1 start=0\n", 2, "duplicate header"),
        ];
        for (text, line, needle) in cases {
            match AutomatonFile::parse(text) {
                Err(AutomataError::Format { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}");
                    assert!(message.contains(needle), "{message} lacks {needle}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors_come_from_constructors() {
        assert_eq!(
            AutomatonFile::parse("nfa W=2 states=2 start=0\ntrans 0 9 1\n"),
            Err(AutomataError::SymbolOutOfRange { symbol: 9, bits: 2 })
        );
        assert_eq!(
            AutomatonFile::parse("hom W=2 states=2\naccept 1\n"),
            Err(AutomataError::NoStartState)
        );
    }
}
