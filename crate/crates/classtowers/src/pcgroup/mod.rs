//! Finite p-group engine: consistent polycyclic presentations, collection to
//! normal form, subgroups, quotients, derived and lower central series.
//!
//! A presentation has generators g1..gk with relative orders r_i (powers of
//! the prime), power relations g_i^(r_i) = word in generators of index > i,
//! and conjugate relations g_j^(g_i) = word in generators of index >= j for
//! i < j. Every group element has a unique normal form g1^e1 ... gk^ek with
//! 0 <= e_i < r_i, reached by collection from the left.

mod group;
mod subgroup;

pub use group::Group;
pub use subgroup::{lower_central_series, AbelianInvariants, Quotient, Subgroup};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PcError {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("group order needs {needed} bits, size guard allows {guard} (override with {env})", env = SIZE_GUARD_ENV)]
    SizeGuard { needed: u32, guard: u32 },
    #[error("generator index {0} out of range for {1} generators")]
    GeneratorOutOfRange(usize, usize),
    #[error("presentation parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent presentation: {0}")]
    Inconsistent(String),
}

/// Environment variable overriding the maximal log2 of a constructible group
/// order (default 20).
pub const SIZE_GUARD_ENV: &str = "CLASSTOWERS_SIZE_GUARD";

pub(crate) fn size_guard_bits() -> u32 {
    std::env::var(SIZE_GUARD_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20)
        .min(31) // element indices are u32
}

/// A word in the generators: syllables (generator index, exponent), 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<(usize, u64)>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn single(gen: usize, exp: u64) -> Self {
        Word(vec![(gen, exp)])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(g, e) in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "g{}^{}", g + 1, e)?;
            first = false;
        }
        Ok(())
    }
}

/// Polycyclic presentation data. Construct with [`PcPresentation::new`] to
/// get trivial relations, then install the nontrivial ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcPresentation {
    prime: u64,
    orders: Vec<u64>,
    powers: Vec<Word>,
    /// conjugates[i][j] is the word for g_j^(g_i), only used for i < j.
    conjugates: Vec<Vec<Word>>,
}

impl PcPresentation {
    /// Presentation with all power words trivial and all generators
    /// commuting; relations are installed with the setters.
    pub fn new(prime: u64, orders: Vec<u64>) -> Self {
        let g = orders.len();
        let powers = vec![Word::identity(); g];
        let conjugates = (0..g)
            .map(|_| (0..g).map(|j| Word::single(j, 1)).collect())
            .collect();
        PcPresentation {
            prime,
            orders,
            powers,
            conjugates,
        }
    }

    pub fn set_power(&mut self, i: usize, word: Word) {
        self.powers[i] = word;
    }

    pub fn set_conjugate(&mut self, i: usize, j: usize, word: Word) {
        assert!(i < j, "conjugate relations are indexed with i < j");
        self.conjugates[i][j] = word;
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn num_gens(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn power_word(&self, i: usize) -> &Word {
        &self.powers[i]
    }

    pub fn conjugate_word(&self, i: usize, j: usize) -> &Word {
        &self.conjugates[i][j]
    }

    fn check_word(&self, w: &Word, min_gen: usize, what: &str) -> Result<(), PcError> {
        let mut last: Option<usize> = None;
        for &(g, e) in &w.0 {
            if g >= self.num_gens() {
                return Err(PcError::GeneratorOutOfRange(g + 1, self.num_gens()));
            }
            if g < min_gen {
                return Err(PcError::InvalidPresentation(format!(
                    "{}: generator g{} below the allowed range (needs index > g{})",
                    what,
                    g + 1,
                    min_gen
                )));
            }
            if let Some(l) = last {
                if g <= l {
                    return Err(PcError::InvalidPresentation(format!(
                        "{}: word is not in normal form (indices must increase)",
                        what
                    )));
                }
            }
            if e == 0 || e >= self.orders[g] {
                return Err(PcError::InvalidPresentation(format!(
                    "{}: exponent {} of g{} outside 1..{}",
                    what,
                    e,
                    g + 1,
                    self.orders[g]
                )));
            }
            last = Some(g);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PcError> {
        if !crate::arith::is_prime(self.prime) {
            return Err(PcError::InvalidPresentation(format!(
                "{} is not prime",
                self.prime
            )));
        }
        for (i, &r) in self.orders.iter().enumerate() {
            let mut t = r;
            while t > 1 && t % self.prime == 0 {
                t /= self.prime;
            }
            if t != 1 || r < 2 {
                return Err(PcError::InvalidPresentation(format!(
                    "relative order {} of g{} is not a positive power of {}",
                    r,
                    i + 1,
                    self.prime
                )));
            }
        }
        for i in 0..self.num_gens() {
            self.check_word(&self.powers[i], i + 1, &format!("power relation P {}", i + 1))?;
            for j in i + 1..self.num_gens() {
                self.check_word(
                    &self.conjugates[i][j],
                    j,
                    &format!("conjugate relation C {} {}", i + 1, j + 1),
                )?;
            }
        }
        Ok(())
    }

    /// Canonical plain-text form: `p g`, the g relative orders, then all
    /// power and conjugate relation lines. Round-trips bit-exactly through
    /// [`PcPresentation::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.prime, self.num_gens()));
        for r in &self.orders {
            out.push_str(&format!("{}\n", r));
        }
        for i in 0..self.num_gens() {
            let w = &self.powers[i];
            if w.0.is_empty() {
                out.push_str(&format!("P {} :\n", i + 1));
            } else {
                out.push_str(&format!("P {} : {}\n", i + 1, w));
            }
        }
        for i in 0..self.num_gens() {
            for j in i + 1..self.num_gens() {
                let w = &self.conjugates[i][j];
                if w.0.is_empty() {
                    out.push_str(&format!("C {} {} :\n", i + 1, j + 1));
                } else {
                    out.push_str(&format!("C {} {} : {}\n", i + 1, j + 1, w));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PcPresentation, PcError> {
        let err = |line: usize, msg: &str| PcError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, head) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        let mut it = head.split_whitespace();
        let prime: u64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln + 1, "expected `p g`"))?;
        let g: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln + 1, "expected `p g`"))?;
        let mut orders = Vec::with_capacity(g);
        for _ in 0..g {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| err(0, "missing relative order line"))?;
            orders.push(
                l.trim()
                    .parse()
                    .map_err(|_| err(ln + 1, "bad relative order"))?,
            );
        }
        let mut pres = PcPresentation::new(prime, orders);
        for (ln, l) in lines {
            let (head, word_part) = l
                .split_once(':')
                .ok_or_else(|| err(ln + 1, "expected `P i : word` or `C i j : word`"))?;
            let mut toks = head.split_whitespace();
            let kind = toks.next().ok_or_else(|| err(ln + 1, "missing P/C tag"))?;
            let word = parse_word(word_part).map_err(|msg| err(ln + 1, &msg))?;
            match kind {
                "P" => {
                    let i: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .filter(|&i| i >= 1 && i <= g)
                        .ok_or_else(|| err(ln + 1, "bad generator index in P line"))?;
                    pres.set_power(i - 1, word);
                }
                "C" => {
                    let i: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(ln + 1, "bad index in C line"))?;
                    let j: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(ln + 1, "bad index in C line"))?;
                    if !(i >= 1 && i < j && j <= g) {
                        return Err(err(ln + 1, "C line needs 1 <= i < j <= g"));
                    }
                    pres.set_conjugate(i - 1, j - 1, word);
                }
                other => return Err(err(ln + 1, &format!("unknown relation tag {:?}", other))),
            }
        }
        pres.validate()?;
        Ok(pres)
    }
}

fn parse_word(s: &str) -> Result<Word, String> {
    let mut syllables = Vec::new();
    for tok in s.split_whitespace() {
        let rest = tok
            .strip_prefix('g')
            .ok_or_else(|| format!("token {:?} does not start with `g`", tok))?;
        let (gen, exp) = rest
            .split_once('^')
            .ok_or_else(|| format!("token {:?} is missing `^`", tok))?;
        let gen: usize = gen.parse().map_err(|_| format!("bad index in {:?}", tok))?;
        if gen == 0 {
            return Err(format!("generator indices are 1-based, got {:?}", tok));
        }
        let exp: u64 = exp.parse().map_err(|_| format!("bad exponent in {:?}", tok))?;
        syllables.push((gen - 1, exp));
    }
    Ok(Word(syllables))
}

/// A group element in normal form: exponent vector with 0 <= e_i < r_i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub(crate) Vec<u64>);

impl Element {
    pub fn exponents(&self) -> &[u64] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PcPresentation {
        // The (m, n) = (1, 1) group of order 32.
        let mut p = PcPresentation::new(2, vec![2, 4, 4]);
        p.set_power(0, Word::single(1, 2));
        p.set_conjugate(0, 1, Word::single(1, 3));
        p.set_conjugate(0, 2, Word::single(2, 3));
        p
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let p = sample();
        let text = p.to_text();
        let q = PcPresentation::from_text(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_text(), text);
    }

    #[test]
    fn canonical_text_layout() {
        let text = sample().to_text();
        assert_eq!(
            text,
            "2 3\n2\n4\n4\nP 1 : g2^2\nP 2 :\nP 3 :\nC 1 2 : g2^3\nC 1 3 : g3^3\nC 2 3 : g3^1\n"
        );
    }

    #[test]
    fn validation_rejects_malformed_words() {
        let mut p = sample();
        p.set_power(0, Word::single(0, 1)); // power word must use gens > 1
        assert!(p.validate().is_err());

        let mut p = sample();
        p.set_conjugate(0, 2, Word::single(1, 1)); // conjugate of g3 must stay >= g3
        assert!(p.validate().is_err());

        let mut p = sample();
        p.set_power(1, Word::single(2, 9)); // exponent out of range
        assert!(p.validate().is_err());

        let p = PcPresentation::new(2, vec![6]); // 6 is not a power of 2
        assert!(p.validate().is_err());

        let p = PcPresentation::new(4, vec![4]); // 4 is not prime
        assert!(p.validate().is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "2 2\n2\n2\nP 1 : h2^1\n";
        match PcPresentation::from_text(bad) {
            Err(PcError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {:?}", other),
        }
    }
}
