//! Bundled example programs with the analysis settings they are run with.

use crate::localize::LocalizeConfig;
use crate::solvers::SolverConfig;
use crate::span::SourceFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusEntry {
    /// Unique entry name.
    pub name: &'static str,
    pub file: &'static str,
    pub source: &'static str,
    /// Function the entry is about.
    pub function: &'static str,
    pub bound: i64,
    pub placeholder_bound: i64,
    /// Whether the function violates its contract.
    pub buggy: bool,
    /// Loop-free, call-free and correct: usable as a mutation seed.
    pub mutation_seed: bool,
}

impl CorpusEntry {
    pub fn source_file(&self) -> SourceFile {
        SourceFile::new(self.file, self.source)
    }

    pub fn config(&self) -> LocalizeConfig {
        LocalizeConfig {
            solver: SolverConfig::with_bounds(self.bound, self.placeholder_bound),
            ..Default::default()
        }
    }
}

macro_rules! corpus_file {
    ($f:literal) => {
        ($f, include_str!(concat!("../corpus/", $f)))
    };
}

const MAX: (&str, &str) = corpus_file!("max.mcl");
const MAX_FIXED: (&str, &str) = corpus_file!("max_fixed.mcl");
const TCAS_V7: (&str, &str) = corpus_file!("tcas_v7.mcl");
const TCAS_V9: (&str, &str) = corpus_file!("tcas_v9.mcl");
const TCAS_V14: (&str, &str) = corpus_file!("tcas_v14.mcl");
const SUM_UPTO: (&str, &str) = corpus_file!("sum_upto.mcl");
const INT_DIVISION: (&str, &str) = corpus_file!("int_division.mcl");
const COUNTER: (&str, &str) = corpus_file!("counter.mcl");
const ARITH: (&str, &str) = corpus_file!("arith.mcl");

const fn entry(
    name: &'static str,
    (file, source): (&'static str, &'static str),
    function: &'static str,
    bound: i64,
    placeholder_bound: i64,
    buggy: bool,
    mutation_seed: bool,
) -> CorpusEntry {
    CorpusEntry {
        name,
        file,
        source,
        function,
        bound,
        placeholder_bound,
        buggy,
        mutation_seed,
    }
}

pub const CORPUS: &[CorpusEntry] = &[
    entry("max", MAX, "max", 8, 8, true, false),
    entry("max_fixed", MAX_FIXED, "max", 8, 8, false, true),
    // No inputs survive, so the placeholder needs room for the constants.
    entry("tcas_v7", TCAS_V7, "initialize", 8, 1000, true, false),
    entry("tcas_v9", TCAS_V9, "NonCrossBiasedDescend", 4, 4, true, false),
    entry("tcas_v14", TCAS_V14, "altSepTest", 4, 4, true, false),
    entry("sum_upto", SUM_UPTO, "sum_upto", 8, 8, false, false),
    entry("int_division", INT_DIVISION, "divide", 8, 8, false, false),
    entry("counter", COUNTER, "tick", 8, 8, false, false),
    entry("abs", ARITH, "abs", 8, 16, false, true),
    entry("clamp", ARITH, "clamp", 8, 16, false, true),
    entry("max3", ARITH, "max3", 8, 16, false, true),
    entry("sign", ARITH, "sign", 8, 16, false, true),
    entry("xor", ARITH, "xor", 8, 16, false, true),
    entry("nearest", ARITH, "nearest", 8, 16, false, true),
    entry("in_range", ARITH, "in_range", 8, 16, false, true),
];

pub fn find(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::Analysis;

    #[test]
    fn every_entry_loads() {
        for e in CORPUS {
            let a = Analysis::new(&e.source_file()).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert!(a.function(e.function).is_ok(), "{}", e.name);
        }
    }

    #[test]
    fn names_are_unique() {
        for (i, e) in CORPUS.iter().enumerate() {
            assert!(CORPUS[i + 1..].iter().all(|o| o.name != e.name));
        }
    }
}
