//! Regex front end producing epsilon-free position (Glushkov) automata.
//!
//! Dialect:
//!
//! ```text
//! alternation   a|b        concatenation  ab        grouping  (ab)
//! repetition    a*  a+  a?  any symbol     .
//! classes       [abc] [a-z] [^a-c]          symbol literal    \x{1F}
//! escapes       \\ \| \* \+ \? \( \) \[ \] \. \^ \- \n \t \r
//! ```
//!
//! The empty pattern and empty branches (`a|`, `()`) denote the empty string.
//! There are no anchors, counted repetitions, captures or backreferences.
//!
//! Each literal or class becomes one position. State 0 is the start state and
//! position `k` becomes state `k`, so every non-start state is entered only on
//! the symbols of its own literal.

use std::collections::BTreeSet;

use super::{check_symbol, check_symbol_bits, AutomataError, Nfa, StateId, Symbol};

/// How pattern characters map to symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolEncoding {
    /// A character encodes to its code point (`'a'` is 97).
    #[default]
    Code,
    /// Lowercase letters encode to their alphabet index (`'a'` is 0, `'z'`
    /// is 25). Other characters must be written as `\x{..}`.
    Letters,
}

/// Parses `pattern` with [`SymbolEncoding::Code`].
pub fn parse_regex(pattern: &str, alphabet_bits: u32) -> Result<Nfa, AutomataError> {
    parse_regex_with(pattern, alphabet_bits, SymbolEncoding::Code)
}

pub fn parse_regex_with(
    pattern: &str,
    alphabet_bits: u32,
    encoding: SymbolEncoding,
) -> Result<Nfa, AutomataError> {
    check_symbol_bits(alphabet_bits)?;
    let mut parser = Parser {
        chars: pattern.chars().collect(),
        pos: 0,
        bits: alphabet_bits,
        encoding,
    };
    let ast = parser.alternation()?;
    if parser.pos < parser.chars.len() {
        return Err(parser.error("unmatched ')'"));
    }
    Ok(glushkov(&ast, alphabet_bits))
}

#[derive(Debug, Clone)]
enum Ast {
    Empty,
    Class(BTreeSet<Symbol>),
    Concat(Vec<Ast>),
    Alternate(Vec<Ast>),
    Star(Box<Ast>),
    Plus(Box<Ast>),
    Optional(Box<Ast>),
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    bits: u32,
    encoding: SymbolEncoding,
}

impl Parser {
    fn error(&self, message: &str) -> AutomataError {
        AutomataError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn alternation(&mut self) -> Result<Ast, AutomataError> {
        let mut branches = vec![self.concatenation()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concatenation()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().expect("one branch")
        } else {
            Ast::Alternate(branches)
        })
    }

    fn concatenation(&mut self) -> Result<Ast, AutomataError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repetition()?);
        }
        Ok(match items.len() {
            0 => Ast::Empty,
            1 => items.pop().expect("one item"),
            _ => Ast::Concat(items),
        })
    }

    fn repetition(&mut self) -> Result<Ast, AutomataError> {
        let mut atom = self.atom()?;
        while let Some(c) = self.peek() {
            atom = match c {
                '*' => Ast::Star(Box::new(atom)),
                '+' => Ast::Plus(Box::new(atom)),
                '?' => Ast::Optional(Box::new(atom)),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Ast, AutomataError> {
        let start = self.pos;
        match self.bump() {
            None => Err(self.error("unexpected end of pattern")),
            Some('(') => {
                let inner = self.alternation()?;
                if self.bump() != Some(')') {
                    self.pos = start;
                    return Err(self.error("unclosed group"));
                }
                Ok(inner)
            }
            Some('[') => self.class(start),
            Some('.') => Ok(Ast::Class((0..(1u32 << self.bits)).collect())),
            Some('*' | '+' | '?') => {
                self.pos = start;
                Err(self.error("repetition operator without operand"))
            }
            Some(']') => {
                self.pos = start;
                Err(self.error("unmatched ']'"))
            }
            Some('\\') => {
                let sym = self.escape(start)?;
                Ok(Ast::Class(BTreeSet::from([sym])))
            }
            Some(c) => {
                let sym = self.encode(c, start)?;
                Ok(Ast::Class(BTreeSet::from([sym])))
            }
        }
    }

    fn class(&mut self, open: usize) -> Result<Ast, AutomataError> {
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut set = BTreeSet::new();
        let mut first = true;
        loop {
            let item_start = self.pos;
            let lo = match self.bump() {
                None => {
                    self.pos = open;
                    return Err(self.error("unclosed character class"));
                }
                Some(']') if !first => break,
                Some('\\') => self.escape(item_start)?,
                Some(c) => self.encode(c, item_start)?,
            };
            first = false;
            let is_range = self.peek() == Some('-')
                && self.chars.get(self.pos + 1).is_some_and(|&c| c != ']');
            if is_range {
                self.pos += 1;
                let hi_start = self.pos;
                let hi = match self.bump() {
                    Some('\\') => self.escape(hi_start)?,
                    Some(c) => self.encode(c, hi_start)?,
                    None => unreachable!("checked by lookahead"),
                };
                if hi < lo {
                    self.pos = item_start;
                    return Err(self.error("reversed class range"));
                }
                set.extend(lo..=hi);
            } else {
                set.insert(lo);
            }
        }
        if negated {
            set = (0..(1u32 << self.bits)).filter(|s| !set.contains(s)).collect();
        }
        if set.is_empty() {
            self.pos = open;
            return Err(self.error("character class matches no symbol"));
        }
        Ok(Ast::Class(set))
    }

    fn escape(&mut self, start: usize) -> Result<Symbol, AutomataError> {
        let c = match self.bump() {
            None => {
                self.pos = start;
                return Err(self.error("dangling escape"));
            }
            Some(c) => c,
        };
        match c {
            'x' => {
                if self.bump() != Some('{') {
                    self.pos = start;
                    return Err(self.error("expected '{' after \\x"));
                }
                let digits_start = self.pos;
                while self.peek().is_some_and(|c| c != '}') {
                    self.pos += 1;
                }
                if self.peek() != Some('}') {
                    self.pos = start;
                    return Err(self.error("unclosed \\x{...}"));
                }
                let digits: String = self.chars[digits_start..self.pos].iter().collect();
                self.pos += 1;
                let value = u64::from_str_radix(&digits, 16).map_err(|_| AutomataError::Syntax {
                    position: digits_start,
                    message: format!("invalid hex symbol '{digits}'"),
                })?;
                check_symbol(value, self.bits)?;
                Ok(value as Symbol)
            }
            'n' => self.encode('\n', start),
            't' => self.encode('\t', start),
            'r' => self.encode('\r', start),
            '\\' | '|' | '*' | '+' | '?' | '(' | ')' | '[' | ']' | '.' | '^' | '-' => {
                self.encode(c, start)
            }
            _ => {
                self.pos = start;
                Err(self.error(&format!("unknown escape '\\{c}'")))
            }
        }
    }

    fn encode(&self, c: char, at: usize) -> Result<Symbol, AutomataError> {
        let value = match self.encoding {
            SymbolEncoding::Code => c as u64,
            SymbolEncoding::Letters => match c {
                'a'..='z' => c as u64 - 'a' as u64,
                _ => {
                    return Err(AutomataError::Syntax {
                        position: at,
                        message: format!("'{c}' is not a letter; use \\x{{..}}"),
                    })
                }
            },
        };
        check_symbol(value, self.bits)?;
        Ok(value as Symbol)
    }
}

/// First/last position sets and nullability of a subexpression.
struct Summary {
    nullable: bool,
    first: Vec<usize>,
    last: Vec<usize>,
}

struct Positions {
    classes: Vec<BTreeSet<Symbol>>,
    follow: Vec<BTreeSet<usize>>,
}

impl Positions {
    fn visit(&mut self, ast: &Ast) -> Summary {
        match ast {
            Ast::Empty => Summary {
                nullable: true,
                first: vec![],
                last: vec![],
            },
            Ast::Class(set) => {
                let p = self.classes.len();
                self.classes.push(set.clone());
                self.follow.push(BTreeSet::new());
                Summary {
                    nullable: false,
                    first: vec![p],
                    last: vec![p],
                }
            }
            Ast::Concat(items) => {
                let mut acc = Summary {
                    nullable: true,
                    first: vec![],
                    last: vec![],
                };
                for item in items {
                    let next = self.visit(item);
                    self.link(&acc.last, &next.first);
                    if acc.nullable {
                        acc.first.extend(&next.first);
                    }
                    acc.last = if next.nullable {
                        acc.last.into_iter().chain(next.last).collect()
                    } else {
                        next.last
                    };
                    acc.nullable &= next.nullable;
                }
                acc
            }
            Ast::Alternate(branches) => {
                let mut acc = Summary {
                    nullable: false,
                    first: vec![],
                    last: vec![],
                };
                for b in branches {
                    let s = self.visit(b);
                    acc.nullable |= s.nullable;
                    acc.first.extend(s.first);
                    acc.last.extend(s.last);
                }
                acc
            }
            Ast::Star(inner) => {
                let s = self.visit(inner);
                self.link(&s.last, &s.first);
                Summary { nullable: true, ..s }
            }
            Ast::Plus(inner) => {
                let s = self.visit(inner);
                self.link(&s.last, &s.first);
                s
            }
            Ast::Optional(inner) => Summary {
                nullable: true,
                ..self.visit(inner)
            },
        }
    }

    fn link(&mut self, from: &[usize], to: &[usize]) {
        for &p in from {
            self.follow[p].extend(to.iter().copied());
        }
    }
}

fn glushkov(ast: &Ast, alphabet_bits: u32) -> Nfa {
    let mut positions = Positions {
        classes: Vec::new(),
        follow: Vec::new(),
    };
    let summary = positions.visit(ast);
    let state = |p: usize| (p + 1) as StateId;

    let mut transitions = Vec::new();
    let mut enter = |src: StateId, p: usize| {
        for &sym in &positions.classes[p] {
            transitions.push((src, sym, state(p)));
        }
    };
    for &p in &summary.first {
        enter(0, p);
    }
    for (p, follows) in positions.follow.iter().enumerate() {
        for &q in follows {
            enter(state(p), q);
        }
    }
    let mut accepting: Vec<StateId> = summary.last.iter().map(|&p| state(p)).collect();
    if summary.nullable {
        accepting.push(0);
    }
    Nfa::new(
        alphabet_bits,
        positions.classes.len() + 1,
        0,
        accepting,
        transitions,
    )
    .expect("position construction yields a valid automaton")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::nfa_accepts_oracle;

    fn letters(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| (b - b'a') as Symbol).collect()
    }

    fn bytes(s: &str) -> Vec<Symbol> {
        s.bytes().map(Symbol::from).collect()
    }

    #[test]
    fn empty_pattern_accepts_only_empty_string() {
        let nfa = parse_regex("", 8).unwrap();
        assert_eq!(nfa.num_states(), 1);
        assert!(nfa.transitions().is_empty());
        assert!(nfa_accepts_oracle(&nfa, &[]).unwrap());
        assert!(!nfa_accepts_oracle(&nfa, &bytes("a")).unwrap());
    }

    #[test]
    fn two_paths_joining_on_b() {
        let nfa = parse_regex_with("ab|cb", 2, SymbolEncoding::Letters).unwrap();
        // start, a, b, c, b
        assert_eq!(nfa.num_states(), 5);
        let expected = BTreeSet::from([(0, 0, 1), (0, 2, 3), (1, 1, 2), (3, 1, 4)]);
        assert_eq!(nfa.transitions(), &expected);
        assert_eq!(nfa.accepting(), &BTreeSet::from([2, 4]));
        for (input, want) in [("ab", true), ("cb", true), ("b", false), ("a", false), ("abb", false)] {
            assert_eq!(nfa_accepts_oracle(&nfa, &letters(input)).unwrap(), want, "{input}");
        }
    }

    /// Direct membership test for `a*b`.
    fn in_a_star_b(s: &[u8]) -> bool {
        matches!(s.split_last(), Some((b'b', rest)) if rest.iter().all(|&c| c == b'a'))
    }

    #[test]
    fn a_star_b_matches_enumeration() {
        let nfa = parse_regex("a*b", 8).unwrap();
        for len in 0..=6 {
            for code in 0..(1u32 << len) {
                let s: Vec<u8> = (0..len)
                    .map(|i| if code >> i & 1 == 1 { b'b' } else { b'a' })
                    .collect();
                let input: Vec<Symbol> = s.iter().map(|&c| c as Symbol).collect();
                assert_eq!(
                    nfa_accepts_oracle(&nfa, &input).unwrap(),
                    in_a_star_b(&s),
                    "{:?}",
                    String::from_utf8_lossy(&s)
                );
            }
        }
    }

    #[test]
    fn classes_ranges_and_negation() {
        let nfa = parse_regex_with("[a-c]x?|[^a-y]", 5, SymbolEncoding::Letters).unwrap();
        let accepts = |s: &str| nfa_accepts_oracle(&nfa, &letters(s)).unwrap();
        assert!(accepts("a") && accepts("cx") && accepts("z"));
        assert!(!accepts("d") && !accepts("y") && !accepts("xa"));
        // [^a-y] over 5 bits covers z (25) and symbols 26..31
        assert!(nfa_accepts_oracle(&nfa, &[31]).unwrap());
    }

    #[test]
    fn plus_optional_dot_and_escapes() {
        let nfa = parse_regex(r"(ab)+\.?.\x{7e}", 8).unwrap();
        let accepts = |s: &str| nfa_accepts_oracle(&nfa, &bytes(s)).unwrap();
        assert!(accepts("abz~"));
        assert!(accepts("abab.z~"));
        assert!(accepts("ab.~"));
        assert!(!accepts("z~"));
        assert!(!accepts("abz"));
    }

    #[test]
    fn empty_branches_are_epsilon() {
        let nfa = parse_regex("a|", 8).unwrap();
        assert!(nfa_accepts_oracle(&nfa, &[]).unwrap());
        let nfa = parse_regex("()b", 8).unwrap();
        assert!(nfa_accepts_oracle(&nfa, &bytes("b")).unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cases = [
            ("(", 0),
            ("ab)", 2),
            ("*a", 0),
            ("a|+", 2),
            ("[abc", 0),
            ("[z-a]", 1),
            (r"a\q", 1),
            (r"\x{zz}", 3),
            ("]", 0),
        ];
        for (pattern, position) in cases {
            match parse_regex(pattern, 8) {
                Err(AutomataError::Syntax { position: p, .. }) => {
                    assert_eq!(p, position, "{pattern}")
                }
                other => panic!("{pattern}: expected syntax error, got {other:?}"),
            }
        }
    }

    #[test]
    fn out_of_alphabet_literals_are_rejected() {
        assert_eq!(
            parse_regex("a", 4),
            Err(AutomataError::SymbolOutOfRange { symbol: 97, bits: 4 })
        );
        assert_eq!(
            parse_regex(r"\x{10}", 4),
            Err(AutomataError::SymbolOutOfRange { symbol: 16, bits: 4 })
        );
        assert!(matches!(
            parse_regex_with("A", 8, SymbolEncoding::Letters),
            Err(AutomataError::Syntax { position: 0, .. })
        ));
    }

    #[test]
    fn every_position_is_entered_on_its_own_class() {
        for pattern in ["(a|b)*abb", "x(y|z)+w?", "[a-f]*[0-9]+", ".a.", "((ab)*|c)+d"] {
            let nfa = parse_regex(pattern, 8).unwrap();
            let mut incoming: Vec<BTreeSet<(StateId, Symbol)>> =
                vec![BTreeSet::new(); nfa.num_states()];
            for &(src, sym, dst) in nfa.transitions() {
                incoming[dst as usize].insert((src, sym));
            }
            assert!(incoming[0].is_empty(), "{pattern}: start has incoming");
            for (state, inc) in incoming.iter().enumerate().skip(1) {
                let sources: BTreeSet<_> = inc.iter().map(|(s, _)| *s).collect();
                let symbols: BTreeSet<_> = inc.iter().map(|(_, y)| *y).collect();
                // every source enters on the full, shared symbol set
                assert_eq!(inc.len(), sources.len() * symbols.len(), "{pattern}: state {state}");
            }
        }
    }
}
