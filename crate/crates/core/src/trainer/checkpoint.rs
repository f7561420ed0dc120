//! Text checkpoints.
//!
//! ```text
//! qforage-checkpoint v1
//! # key=value            (configuration echo, one per line)
//! [vocab V 1]            (one word per line)
//! [actor.amplitudes V k]
//! [actor.weights 1 R]
//! [actor.factors R*n k]
//! [critic.amplitudes V d]
//! [critic.phases V d]
//! [critic.salience 1 V]
//! [rng 1 3]              (hex seed, stream, word position)
//! ```
//!
//! Decimals carry 17 significant digits, enough for every `f64` to parse
//! back to the identical value.

use super::{Model, TrainConfig};
use crate::actor::ActorParams;
use crate::critic::ComplexEmbeddingTable;
use crate::error::{Error, Result};
use crate::qrep::{AmplitudeTable, GlobalRepresentation};
use crate::rng::Rng;
use crate::vocab::Vocabulary;
use rand::SeedableRng;
use std::fmt::Write as _;
use std::path::Path;

pub const HEADER: &str = "qforage-checkpoint v1";

/// Position of a ChaCha generator, enough to resume it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &Rng) -> Self {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> Rng {
        let mut rng = Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: Model,
    pub rng: RngState,
}

impl Checkpoint {
    pub fn new(config: &TrainConfig, model: &Model, rng: &Rng) -> Self {
        Checkpoint {
            config: TrainConfig {
                checkpoint_path: None,
                ..config.clone()
            },
            model: model.clone(),
            rng: RngState::capture(rng),
        }
    }
}

fn block(out: &mut String, name: &str, cols: usize, values: &[f64]) {
    let rows = values.len().checked_div(cols).unwrap_or(0);
    let _ = writeln!(out, "[{name} {rows} {cols}]");
    for row in values.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn write_checkpoint(cp: &Checkpoint) -> String {
    let m = &cp.model;
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    for (k, v) in cp.config.to_pairs() {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "[vocab {} 1]", m.vocab.len());
    for w in m.vocab.words() {
        let _ = writeln!(out, "{w}");
    }
    let k = m.actor.table.basis_dim();
    block(&mut out, "actor.amplitudes", k, m.actor.table.as_slice());
    block(&mut out, "actor.weights", m.actor.global.rank(), m.actor.global.weights());
    block(&mut out, "actor.factors", k, m.actor.global.factors());
    let d = m.critic.dim();
    block(&mut out, "critic.amplitudes", d, m.critic.amplitudes());
    block(&mut out, "critic.phases", d, m.critic.phases());
    block(&mut out, "critic.salience", m.critic.len(), m.critic.salience());
    let seed: String = cp.rng.seed.iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(out, "[rng 1 3]");
    let _ = writeln!(out, "{seed} {} {}", cp.rng.stream, cp.rng.word_pos);
    out
}

pub fn save_checkpoint(cp: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_checkpoint(cp))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    parse_checkpoint(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l)
            }
            None => Err(self.error("unexpected end of file")),
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::ParseError {
            line: self.last + 1,
            message: message.to_string(),
        }
    }

    fn header(&mut self, name: &str) -> Result<(usize, usize)> {
        let line = self.next()?;
        let inner = line
            .strip_prefix('[')
            .and_then(|l| l.strip_suffix(']'))
            .ok_or_else(|| self.error_here(&format!("expected block [{name} ..]")))?;
        let parts: Vec<&str> = inner.split(' ').collect();
        match parts.as_slice() {
            [n, r, c] if *n == name => {
                let parse = |s: &str| s.parse::<usize>().map_err(|_| self.error_here("bad block size"));
                Ok((parse(r)?, parse(c)?))
            }
            _ => Err(self.error_here(&format!("expected block [{name} ..]"))),
        }
    }

    fn error_here(&self, message: &str) -> Error {
        Error::ParseError {
            line: self.last,
            message: message.to_string(),
        }
    }

    fn matrix(&mut self, name: &str) -> Result<(usize, usize, Vec<f64>)> {
        let (rows, cols) = self.header(name)?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.next()?;
            let row: Vec<f64> = line
                .split(' ')
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| self.error_here("bad number"))?;
            if row.len() != cols {
                return Err(self.error_here(&format!("expected {cols} values, found {}", row.len())));
            }
            values.extend(row);
        }
        Ok((rows, cols, values))
    }
}

pub fn parse_checkpoint(input: &str) -> Result<Checkpoint> {
    let mut lines = Lines {
        inner: input.lines().enumerate(),
        last: 0,
    };
    let first = lines.next().map_err(|_| Error::VersionMismatch { found: String::new() })?;
    if first != HEADER {
        return Err(Error::VersionMismatch {
            found: first.to_string(),
        });
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    let vocab_header = loop {
        let line = lines.next()?;
        match line.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| lines.error_here("expected key=value"))?;
                pairs.push((k.to_string(), v.to_string()));
            }
            None => break line,
        }
    };
    let config = TrainConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;

    let v = vocab_header
        .strip_prefix("[vocab ")
        .and_then(|l| l.strip_suffix(" 1]"))
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| lines.error_here("expected [vocab V 1]"))?;
    let mut words = Vec::with_capacity(v);
    for _ in 0..v {
        words.push(lines.next()?.to_string());
    }
    let vocab = Vocabulary::from_words(words).ok_or_else(|| lines.error_here("malformed vocabulary"))?;

    let invalid = |e: Error, lines: &Lines| lines.error_here(&e.to_string());
    let (rows, k, amps) = lines.matrix("actor.amplitudes")?;
    let table = AmplitudeTable::from_rows(rows, k, amps).map_err(|e| invalid(e, &lines))?;
    let (_, _, weights) = lines.matrix("actor.weights")?;
    let (_, _, factors) = lines.matrix("actor.factors")?;
    let global = GlobalRepresentation::new(k, config.order, weights, factors).map_err(|e| invalid(e, &lines))?;
    let actor = ActorParams::new(table, global, config.temperature).map_err(|e| invalid(e, &lines))?;
    let (_, d, amplitudes) = lines.matrix("critic.amplitudes")?;
    let (_, _, phases) = lines.matrix("critic.phases")?;
    let (_, _, salience) = lines.matrix("critic.salience")?;
    let critic = ComplexEmbeddingTable::from_parts(d, amplitudes, phases, salience).map_err(|e| invalid(e, &lines))?;
    if critic.len() != vocab.len() || actor.table.len() != vocab.len() {
        return Err(lines.error_here("table sizes disagree with the vocabulary"));
    }

    lines.header("rng")?;
    let line = lines.next()?;
    let parts: Vec<&str> = line.split(' ').collect();
    let rng = match parts.as_slice() {
        [seed, stream, pos] if seed.len() == 64 => {
            let mut bytes = [0u8; 32];
            for (i, b) in bytes.iter_mut().enumerate() {
                *b = u8::from_str_radix(&seed[2 * i..2 * i + 2], 16).map_err(|_| lines.error_here("bad rng seed"))?;
            }
            RngState {
                seed: bytes,
                stream: stream.parse().map_err(|_| lines.error_here("bad rng stream"))?,
                word_pos: pos.parse().map_err(|_| lines.error_here("bad rng position"))?,
            }
        }
        _ => return Err(lines.error_here("expected rng state")),
    };
    Ok(Checkpoint {
        config,
        model: Model { vocab, actor, critic },
        rng,
    })
}
