//! Turning English belief sentences into typed statements.
//!
//! Translation is pluggable: a [`Backend`] proposes weighted candidate
//! formulas for a sentence, and [`translate`] keeps the candidates that
//! actually parse and typecheck, renormalizes their weights, and sorts
//! them best first. Two backends ship with the crate: a fixture table of
//! reference translations for the statements exercised by the test
//! scenarios, and a line-protocol bridge to an external translator
//! process (typically a wrapper around a grammar-constrained language
//! model).

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::elot::{parse_epistemic, DomainSignature, EpistemicFormula};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("no translation on file for: {0}")]
    UnknownSentence(String),
    #[error("sentence must be a single line without tabs")]
    InvalidSentence,
    #[error("no proposed translation parses: {0}")]
    NoValidTranslation(String),
    #[error("translator process: {0}")]
    Io(#[from] std::io::Error),
    #[error("translator process produced a malformed reply: {0}")]
    Protocol(String),
    #[error("translator process closed its output")]
    BackendClosed,
    #[error("translator process timed out")]
    Timeout,
}

/// Source of candidate translations. Weights are relative and need not
/// sum to one; [`translate`] renormalizes after validation.
pub trait Backend {
    /// Proposes up to `n` candidate formulas, as concrete syntax plus a
    /// positive weight.
    fn propose(&mut self, sentence: &str, n: usize)
        -> Result<Vec<(String, f64)>, TranslateError>;
}

/// A validated translation: every candidate parses, weights sum to one,
/// and the best candidate comes first.
#[derive(Debug, Clone)]
pub struct Translation {
    pub sentence: String,
    pub candidates: Vec<(EpistemicFormula, f64)>,
}

impl Translation {
    /// The top-weighted candidate.
    pub fn top(&self) -> &EpistemicFormula {
        &self.candidates[0].0
    }
}

/// Runs a backend on one sentence and validates what comes back.
/// Candidates that fail to parse or typecheck under `domain` are dropped;
/// surviving weights are renormalized and sorted descending (ties keep
/// the backend's order).
pub fn translate(
    backend: &mut dyn Backend,
    sentence: &str,
    domain: &DomainSignature,
    n: usize,
) -> Result<Translation, TranslateError> {
    let proposed = backend.propose(sentence, n)?;
    let mut candidates: Vec<(EpistemicFormula, f64)> = proposed
        .into_iter()
        .filter(|&(_, w)| w.is_finite() && w > 0.0)
        .filter_map(|(text, w)| parse_epistemic(&text, domain).ok().map(|f| (f, w)))
        .collect();
    if candidates.is_empty() {
        return Err(TranslateError::NoValidTranslation(sentence.to_owned()));
    }
    let total: f64 = candidates.iter().map(|&(_, w)| w).sum();
    for c in &mut candidates {
        c.1 /= total;
    }
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(Translation {
        sentence: sentence.to_owned(),
        candidates,
    })
}

/// Normalizes a sentence for table lookup: surrounding whitespace and one
/// trailing period are dropped, and internal whitespace runs collapse.
fn normalize(sentence: &str) -> String {
    let joined = sentence.split_whitespace().collect::<Vec<_>>().join(" ");
    joined.strip_suffix('.').unwrap_or(&joined).to_owned()
}

/// Table-driven backend with reference translations.
#[derive(Debug, Default)]
pub struct FixtureBackend {
    entries: HashMap<String, Vec<(String, f64)>>,
}

impl FixtureBackend {
    pub fn new() -> FixtureBackend {
        FixtureBackend::default()
    }

    /// Registers candidates for a sentence, replacing any previous entry.
    pub fn insert(&mut self, sentence: &str, candidates: &[(&str, f64)]) {
        self.entries.insert(
            normalize(sentence),
            candidates
                .iter()
                .map(|&(f, w)| (f.to_owned(), w))
                .collect(),
        );
    }

    /// The reference corpus: statement sentences paired with the formulas
    /// the reference translator produced for them. One entry keeps both
    /// samples the translator weighted ("expected" read as a likelihood
    /// word versus plain belief); the final entry is reconstructed in the
    /// same dialect from a documented example sentence rather than a
    /// published translation.
    pub fn gold() -> FixtureBackend {
        let mut b = FixtureBackend::new();
        for (sentence, formula) in [
            (
                "The player knows that box 2 and box 3 are empty.",
                "knows_that(player, formula(and(empty(box2), empty(box3))))",
            ),
            (
                "The player knows the color of the keys in all of the boxes.",
                "forall(box(B), knows_about(player, color(C), \
                 exists(and(key(K), inside(K, B)), iscolor(K, C))))",
            ),
            // The reference pair really does gloss "a blue key" as red;
            // kept verbatim, mismatch and all.
            (
                "The player doesn't know that there is a blue key in box 2.",
                "not_knows_that(player, formula(exists(and(key(K), iscolor(K, red)), \
                 inside(K, box2))))",
            ),
            (
                "The player is sure of the color of the key in box 4.",
                "certain_about(player, color(C), exists(and(key(K), inside(K, box4)), \
                 iscolor(K, C)))",
            ),
            (
                "The player is uncertain about what's in box 2.",
                "uncertain_about(player, color(C), exists(and(key(K), inside(K, box2)), \
                 iscolor(K, C)))",
            ),
            (
                "The player believes that there is a key in box 4.",
                "believes(player, formula(exists(key(K), inside(K, box4))))",
            ),
            (
                "The player thinks that there is a red key in either box 1 or box 3.",
                "believes(player, formula(exists(and(key(K), iscolor(K, red)), \
                 or(inside(K, box1), inside(K, box3)))))",
            ),
            (
                "The player thinks there might be a key in box 1 or box 2.",
                "believes(player, might(exists(key(K), or(inside(K, box1), \
                 inside(K, box2)))))",
            ),
            (
                "The player thinks there is likely a key in box 2.",
                "believes(player, likely(exists(key(K), inside(K, box2))))",
            ),
            (
                "The player believes that box 3 is empty.",
                "believes(player, formula(empty(box3)))",
            ),
            (
                "The player initially thought that box 2 contained a red key.",
                "believes(player, formula(exists(and(key(K), iscolor(K, red)), \
                 inside(K, box2))))",
            ),
            (
                "The player initially did not know if box 2 had a key.",
                "not_knows_if(player, formula(exists(key(K), inside(K, box2))))",
            ),
            // Reconstructed pair.
            (
                "The player believes box 1 may contain a blue key or a red key.",
                "believes(player, may(exists(and(key(K), or(iscolor(K, blue), \
                 iscolor(K, red))), inside(K, box1))))",
            ),
        ] {
            b.insert(sentence, &[(formula, 1.0)]);
        }
        b.insert(
            "The player initially expected to find a key in box 3.",
            &[
                (
                    "believes(player, likely(exists(key(K), inside(K, box3))))",
                    0.67,
                ),
                (
                    "believes(player, formula(exists(key(K), inside(K, box3))))",
                    0.32,
                ),
            ],
        );
        b
    }
}

impl Backend for FixtureBackend {
    fn propose(
        &mut self,
        sentence: &str,
        n: usize,
    ) -> Result<Vec<(String, f64)>, TranslateError> {
        let entry = self
            .entries
            .get(&normalize(sentence))
            .ok_or_else(|| TranslateError::UnknownSentence(sentence.to_owned()))?;
        Ok(entry.iter().take(n).cloned().collect())
    }
}

/// Bridge to an external translator process over stdin/stdout.
///
/// One request per sentence: `TRANSLATE\t{n}\t{sentence}\n`. The process
/// answers with up to `n` lines of `formula\tweight` followed by one blank
/// line. The process stays alive between requests; replies are read on a
/// helper thread so a stuck translator times out instead of hanging the
/// caller.
pub struct ExternalBackend {
    child: Child,
    stdin: ChildStdin,
    lines: mpsc::Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ExternalBackend {
    /// Spawns `command` (split on whitespace into program and arguments).
    pub fn spawn(command: &str, timeout: Duration) -> Result<ExternalBackend, TranslateError> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| TranslateError::Protocol("empty translator command".to_owned()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalBackend {
            child,
            stdin,
            lines: rx,
            timeout,
        })
    }

    fn next_line(&mut self) -> Result<String, TranslateError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(TranslateError::Io(e)),
            Err(mpsc::RecvTimeoutError::Timeout) => Err(TranslateError::Timeout),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(TranslateError::BackendClosed),
        }
    }
}

impl Backend for ExternalBackend {
    fn propose(
        &mut self,
        sentence: &str,
        n: usize,
    ) -> Result<Vec<(String, f64)>, TranslateError> {
        if sentence.contains('\n') || sentence.contains('\t') {
            return Err(TranslateError::InvalidSentence);
        }
        writeln!(self.stdin, "TRANSLATE\t{n}\t{sentence}")?;
        self.stdin.flush()?;
        let mut out = Vec::new();
        loop {
            let line = self.next_line()?;
            if line.is_empty() {
                return Ok(out);
            }
            let (formula, weight) = line
                .rsplit_once('\t')
                .ok_or_else(|| TranslateError::Protocol(line.clone()))?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| TranslateError::Protocol(line.clone()))?;
            if !weight.is_finite() || weight <= 0.0 {
                return Err(TranslateError::Protocol(line.clone()));
            }
            out.push((formula.to_owned(), weight));
        }
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        // Best effort; a dead child just makes these no-ops.
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
